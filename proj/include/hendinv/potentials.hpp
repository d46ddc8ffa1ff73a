#ifndef HENDINV_POTENTIALS_HPP
#define HENDINV_POTENTIALS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hendinv/energy.hpp"

namespace hendinv {

// Piecewise-linear curve on strictly increasing abscissae.
struct TabulatedCurve {
    std::vector<double> r;
    std::vector<double> u;
};

struct LennardJonesParams {
    double epsilon = 1.0;
    double sigma = 1.0;
};

struct HardCoreParams {
    double core_radius = 0.0;
    TabulatedCurve tail; // defined on [core_radius, cutoff); may be empty
};

struct TabulatedParams {
    TabulatedCurve knots;
    // Below the first knot the value is +infinity when the first knot value
    // exceeds this threshold, else extrapolated flat.
    double huge_threshold = 1.0e6;
};

// Power-law minorant/majorant certificate for the two admissibility
// conditions: phi(r) = c1 * r^-p near zero, psi(r) = c2 * r^-q beyond r0.
// For hard-core potentials the minorant is +infinity inside the core and p
// is not consulted.
struct AdmissibilityCertificate {
    double p = 0.0;
    double q = 0.0;
    double r0 = 1.0;
    double c1 = 1.0;
    double c2 = 1.0;
};

struct AdmissibilityReport {
    bool condition1 = false;      // integral of r^{d-1} phi diverges at 0
    bool condition2 = false;      // integral of r^{d-1} psi converges at infinity
    bool minorant_ok = false;     // u >= phi spot-checked on (0, r0]
    bool majorant_ok = false;     // |u| <= psi spot-checked on [r0, cutoff]
    double offending_r = -1.0;    // first grid point violating a bound, if any
    std::string detail;

    bool admissible() const {
        return condition1 && condition2 && minorant_ok && majorant_ok;
    }
};

// Radially symmetric pair potential. Evaluation depends only on r = |x|;
// u(r) = +infinity exactly for r < hard_core_radius and 0 for
// r >= cutoff_radius (plain truncation, no shift).
class PairPotential {
public:
    using Params = std::variant<LennardJonesParams, HardCoreParams, TabulatedParams>;

    static PairPotential lennard_jones(double epsilon, double sigma, double cutoff);
    static PairPotential hard_core(double core_radius, TabulatedCurve tail,
                                   std::optional<double> cutoff = std::nullopt);
    static PairPotential tabulated(TabulatedCurve knots,
                                   std::optional<double> cutoff = std::nullopt,
                                   double huge_threshold = 1.0e6);
    // u == 0 everywhere; the free-gas reference.
    static PairPotential ideal_gas();

    Energy evaluate(double r) const;

    double cutoff_radius() const { return cutoff_; }
    double hard_core_radius() const { return hard_core_; }
    const Params& params() const { return params_; }
    const std::string& kind() const { return kind_; }

    // Characteristic length for displacement scales and search boxes
    // (sigma for LJ, core radius or first knot otherwise).
    double length_scale() const;

    // True when the potential is identically zero (no core, zero values);
    // configuration integrals then factorize exactly.
    bool is_noninteracting() const;

    // True when u(r) >= 0 for all r (certified by structure + grid scan).
    bool is_nonnegative() const;

    // Radii where evaluate() or its slope can jump: the hard-core edge,
    // tabulated knots, and the cutoff. Sorted ascending, deduplicated.
    std::vector<double> critical_radii() const;

    // Largest attraction depth max(0, -u) over [lo, hi) within the cutoff,
    // by grid scan refined around critical radii.
    double max_attraction(double lo, double hi) const;

    const std::optional<AdmissibilityCertificate>& certificate() const {
        return certificate_;
    }
    void attach_certificate(AdmissibilityCertificate cert) { certificate_ = cert; }

private:
    PairPotential() = default;

    Params params_;
    std::string kind_;
    double cutoff_ = 0.0;
    double hard_core_ = 0.0;
    std::optional<AdmissibilityCertificate> certificate_;
};

AdmissibilityReport validate_admissibility(const PairPotential& pot,
                                           const AdmissibilityCertificate& cert,
                                           int dim);

enum class StabilityMethod {
    analytic_nonnegative,
    analytic_hardcore_bound,
    random_search,
};

struct StabilityCertificate {
    double B = 0.0;                      // H(x_m) >= -B m for everything examined
    StabilityMethod method = StabilityMethod::analytic_nonnegative;
    std::uint64_t search_budget = 0;
    double worst_found = 0.0;            // min H/m over visited configurations
    bool unstable_suspected = false;
};

// Optional observer for the random search; receives every visited
// configuration's (m, H/m) so tests can replay the bound.
using StabilityVisitLog = std::vector<std::pair<std::size_t, double>>;

StabilityCertificate estimate_stability_constant(const PairPotential& pot, int dim,
                                                 std::uint64_t budget,
                                                 std::uint64_t rng_seed,
                                                 StabilityVisitLog* log = nullptr);

} // namespace hendinv

#endif
