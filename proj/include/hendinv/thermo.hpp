#ifndef HENDINV_THERMO_HPP
#define HENDINV_THERMO_HPP

#include <string>

#include "hendinv/estimators.hpp"
#include "hendinv/oracle.hpp"
#include "hendinv/potentials.hpp"

namespace hendinv {

// How to treat rho2 mass inside the potential's hard core:
//  - strict_same_system: unphysical input, hard failure (the table claims to
//    come from this potential's own ensemble);
//  - cross: lawful (foreign ensemble), the energy is +infinity.
enum class EnergyPolicy { strict_same_system, cross };

struct SpecificEnergy {
    double value = 0.0;      // E per volume
    double tail_bound = 0.0; // psi-tail beyond r_max (0 if cutoff <= r_max)
    double quad_bound = 0.0; // binning + input-uncertainty bound
    bool infinite = false;   // cross policy only
};

// E = 1/2 ∫ u(r) rho2(r) surface(d) r^{d-1} dr over the bins (midpoint rule,
// hard-core bins contribute exactly 0), plus the psi-tail bound beyond r_max
// controlled by the Ruelle fit of the estimate.
SpecificEnergy specific_energy(const PairPotential& pot,
                               const CorrelationEstimate& estimate, int dim,
                               EnergyPolicy policy = EnergyPolicy::strict_same_system);

struct FiniteVolumeEnergy {
    double value = 0.0;
    double sigma = 0.0;
    bool sigma_defined = true;
};

// (1/|Lambda|) < (1/2) sum_{x != y} u(x-y) > with block standard error.
FiniteVolumeEnergy specific_energy_finite_volume(const SampleSet& samples,
                                                 const PairPotential& pot,
                                                 const BoxSpec& box);

struct SpecificEntropy {
    double value = 0.0;       // S per volume (relative-entropy sign convention)
    double truncation = 0.0;  // m-tail diagnostic
    double normalization_defect = 0.0;
};

SpecificEntropy specific_entropy(const JanossyTable& table, const BoxSpec& box,
                                 double defect_tolerance = 1.0e-6);

// Omega = mu rho - E - S / beta.
double grand_potential(double beta, double mu, double rho, double energy,
                       double entropy);

struct TrialEnsemble {
    double beta = 1.0;
    double mu = 0.0;
    double rho = 0.0;
    double rho_err = 0.0;
    double entropy = 0.0;
    double entropy_err = 0.0;
    CorrelationEstimate rho2;
};

struct GapResult {
    double gap = 0.0;   // p_u - Omega_{beta,mu}(u, P_v); >= 0 expected
    double sigma = 0.0; // combined deterministic/statistical uncertainty
    bool infinite = false;
};

// Gibbs-variational gap at matched (beta, mu): the trial ensemble's energy
// term is recomputed against `u` (cross energy over the trial's rho2).
GapResult variational_gap(const PairPotential& u, ValueWithBound pressure_u,
                          const TrialEnsemble& trial, double beta, double mu);

struct CrossCheckResult {
    double value = 0.0;
    bool infinite = false;
    std::string infinite_terms; // which of the four terms diverged
};

// -E(u,P_v) + E(u,P_u) - E(v,P_u) + E(v,P_v) on the supplied tables
// (identical binning required; bin sums only, no tail terms).
CrossCheckResult henderson_cross_check(const PairPotential& u,
                                       const PairPotential& v,
                                       const CorrelationEstimate& rho2_u,
                                       const CorrelationEstimate& rho2_v,
                                       int dim);

struct ThermoReport {
    double rho = 0.0, rho_err = 0.0;
    double energy = 0.0, energy_err = 0.0;
    double entropy = 0.0, entropy_err = 0.0;
    double omega = 0.0, omega_err = 0.0;
    double pressure = 0.0, pressure_err = 0.0;
    double beta = 1.0, mu = 0.0;
    std::string provenance; // "oracle" | "sampled" | "mixed"
    bool has_entropy = false;

    // |Omega - (mu rho - E - S/beta)| / max(1, |Omega|); identity among the
    // stored fields.
    double identity_residual() const;
};

} // namespace hendinv

#endif
