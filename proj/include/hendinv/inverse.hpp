#ifndef HENDINV_INVERSE_HPP
#define HENDINV_INVERSE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "hendinv/estimators.hpp"
#include "hendinv/gcmc.hpp"
#include "hendinv/thermo.hpp"

namespace hendinv {

// Tabulated iterate of the structure-matching fixed point. Bins where the
// target g falls below the mask threshold are frozen: a leading frozen
// prefix acts as a hard core, any other frozen bin keeps its value.
struct IbiState {
    int iteration = 0;
    Binning binning;
    std::vector<double> u;
    std::vector<bool> frozen;
    double alpha = 0.2;
    std::vector<double> g_current; // g_k from the last completed simulation
    bool g_valid = false;
    std::vector<double> residual_inf; // per-iteration ||g_k - g_target||_inf
    std::vector<double> residual_l2;  // per-iteration rms over active bins
    std::size_t skipped_bins = 0;     // g_k = 0 on an active bin (warned)

    std::size_t first_active() const;
    bool all_masked() const;
};

// Potential-of-mean-force seed u0 = -(1/beta) log g_target on active bins.
IbiState pmf_initial_guess(const RdfCurve& g_target, double beta,
                           double mask_epsilon, const Binning& binning,
                           double alpha);

// Simulatable potential for the current iterate: leading frozen prefix ->
// hard core, active bins -> tabulated knots, zero beyond the RDF window.
PairPotential build_iterate_potential(const IbiState& state);

// u_{k+1} = u_k + (alpha/beta) log(g_k / g_target) on active bins; masked
// bins unchanged; active bins with g_k = 0 skipped with a warning count.
void ibi_step(IbiState& state, const RdfCurve& g_target, double beta);

struct SolverConfig {
    int max_iters = 50;
    double alpha = 0.2;
    double mask_epsilon = 1.0e-6;
    // ||g - g_target||_inf target; defaults to 3x the median per-bin sigma
    // of the target curve.
    std::optional<double> tolerance;
    Binning binning; // the target curve's binning
    ChainSpec chain; // box/beta/mu/run lengths; potential and seed are set per iteration
    std::uint64_t master_seed = 0;
    int workers = 1;
    // Theorem-1 setting: also match the density via bisection on mu.
    bool match_density = false;
    double density_target = 0.0;
};

struct InvertIteration {
    int k = 0;
    double res_inf = 0.0;
    double res_l2 = 0.0;
    double mu_used = 0.0;
    double rho_measured = 0.0;
};

struct InvertResult {
    IbiState best_state;
    std::vector<double> best_g;
    double best_res_inf = 0.0;
    int best_iteration = 0;
    std::vector<InvertIteration> history;
    bool converged = false;
    bool stagnated = false;
    bool ergodicity_warning = false;
    double tolerance_used = 0.0;
};

InvertResult invert(const RdfCurve& g_target, double beta, double mu,
                    const BoxSpec& box, const SolverConfig& config);

struct UniquenessReport {
    double max_significance = 0.0; // max_r |g_u - g_v| / combined sigma
    double argmax_r = 0.0;
    std::vector<double> g_u, g_v, sigma_combined, r_mid;
    CrossCheckResult cross_check;
    bool inconclusive = false; // below 3 sigma everywhere: never claims equality
    bool ergodicity_warning = false;
};

// Simulates both potentials at matched (beta, mu) and reports how strongly
// the pair structures differ; refuses when u = v as tabulated curves.
UniquenessReport uniqueness_experiment(const PairPotential& u,
                                       const PairPotential& v, double beta,
                                       double mu, const BoxSpec& box,
                                       const ChainSpec& chain_template,
                                       const Binning& binning, int workers = 1);

} // namespace hendinv

#endif
