#ifndef HENDINV_ORACLE_HPP
#define HENDINV_ORACLE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "hendinv/estimators.hpp"
#include "hendinv/potentials.hpp"
#include "hendinv/system.hpp"

namespace hendinv {

struct QuadratureSpec {
    enum class Scheme { midpoint, gauss_legendre };
    Scheme scheme = Scheme::gauss_legendre;
    int points_per_axis = 8;   // >= 8
    int refinement_levels = 2; // error = difference of the finest two levels

    void validate() const;
};

struct TruncationSpec {
    double tolerance = 1.0e-9; // bound on the closed-form series tail
    int n_max_cap = 64;
    std::uint64_t cost_ceiling = 400000000; // quadrature node budget
};

// Retained series length and the stability tail
// sum_{N > n_max} (z |Lambda| e^{beta B})^N / N!.
struct TruncationBound {
    int n_max = 0;
    double tail_bound = 0.0;
};

TruncationBound make_truncation_bound(int n_max, double z, double volume,
                                      double beta, double stability_B);

// Smallest n_max meeting `tolerance`; throws RefusalError naming the needed
// n_max when the cap is insufficient.
int required_n_max(double tolerance, double z, double volume, double beta,
                   double stability_B, int n_max_cap);

struct ValueWithBound {
    double value = 0.0;
    double bound = 0.0;
};

struct JanossyDiagnostics {
    int k_used = 0;
    double last_term_magnitude = 0.0;
    // Alternating-series control: bound on the first omitted term.
    double tail_estimate = 0.0;
    bool negative_within_tolerance = false;
};

struct JanossyResult {
    std::vector<double> values;
    JanossyDiagnostics diagnostics;
};

// Per-m integrals of the Janossy family over Lambda^m:
//   integral[m]          = ∫ j^(m),
//   entropy_integrand[m] = ∫ j^(m) log j^(m)   (x log x -> 0 at 0).
struct JanossyTable {
    int m_max = 0;
    std::vector<double> integral;
    std::vector<double> entropy_integrand;
    double normalization_defect = 0.0;
    double tail_diagnostic = 0.0;
    Provenance provenance = Provenance::oracle;
    double volume = 0.0;
};

struct OracleParams {
    BoxSpec box; // free boundary required
    double beta = 1.0;
    double mu = 0.0;
    PairPotential potential = PairPotential::ideal_gas();
    double stability_B = 0.0;
    QuadratureSpec quad;
    TruncationSpec trunc;
    // Cross-check hook: route d=1 integrals through the product grid
    // instead of the ordered-sector integrator.
    bool force_product_grid = false;
};

// Ground-truth engine: truncated grand-canonical series with per-term
// configuration integrals by quadrature. In d=1 the integrals run over the
// ordered sector with panel boundaries at interaction radii, so hard cores
// land on panel edges instead of cutting through quadrature cells; in d>1 a
// plain product grid over Lambda^N is used (tiny N only). All reported
// bounds combine the difference of the two finest refinement levels with
// the closed-form stability tail.
class Oracle {
public:
    explicit Oracle(OracleParams params);

    const OracleParams& params() const { return params_; }
    double activity() const;                  // z = e^{beta mu}
    const TruncationBound& truncation() const { return trunc_bound_; }

    ValueWithBound grand_partition();         // Xi >= 1
    ValueWithBound log_partition();
    ValueWithBound pressure();                // log Xi / (beta |Lambda|)
    ValueWithBound mean_particle_number();    // <N>
    ValueWithBound mean_energy();             // <H>

    // rho^(m) at the given m-tuples (all tuples of one common m; m = 0 -> 1).
    std::vector<ValueWithBound> correlation(
        const std::vector<std::vector<Point>>& tuples);

    // Window-averaged binned rho2(r) over x in Lambda_{ell - r_max}, d=1.
    CorrelationEstimate rho2_binned(const Binning& binning);

    // Janossy densities via the alternating correlation series, truncated at
    // k_max (or automatically when k_max < 0).
    JanossyResult janossy(const std::vector<std::vector<Point>>& tuples,
                          int k_max = -1);

    // Janossy integral table for the entropy sum. m_max < 0 chooses the
    // smallest m_max with Poisson-tail below the truncation tolerance.
    JanossyTable janossy_table(int m_max = -1);

    std::uint64_t nodes_spent() const { return nodes_spent_; }

private:
    struct Series {
        std::vector<double> weight;   // ordered integrals I_N
        std::vector<double> h_weight; // ordered ∫ H e^{-beta H}
    };

    // Ordered configuration integrals I_j (j = 0..j_max) with fixed anchor
    // particles, at refinement level `level`.
    std::vector<double> anchor_integrals(const std::vector<Point>& anchors,
                                         int j_max, int level);
    const Series& partition_series(int level);

    int quad_order(int level) const;
    double xi_at_level(int level);

    OracleParams params_;
    TruncationBound trunc_bound_;
    std::vector<std::optional<Series>> series_by_level_;
    std::uint64_t nodes_spent_ = 0;
};

} // namespace hendinv

#endif
