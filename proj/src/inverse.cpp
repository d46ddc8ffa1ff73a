#include "hendinv/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hendinv/errors.hpp"
#include "hendinv/rng.hpp"

namespace hendinv {

std::size_t IbiState::first_active() const {
    for (std::size_t i = 0; i < frozen.size(); ++i)
        if (!frozen[i]) return i;
    return frozen.size();
}

bool IbiState::all_masked() const { return first_active() == frozen.size(); }

IbiState pmf_initial_guess(const RdfCurve& g_target, double beta,
                           double mask_epsilon, const Binning& binning,
                           double alpha) {
    if (g_target.g.size() != binning.bins)
        throw ConfigError("pmf_initial_guess: target size does not match binning");
    IbiState state;
    state.binning = binning;
    state.alpha = alpha;
    state.u.assign(binning.bins, 0.0);
    state.frozen.assign(binning.bins, false);
    for (std::size_t i = 0; i < binning.bins; ++i) {
        double g = g_target.g[i];
        if (g < 0.0) throw ConfigError("pmf_initial_guess: negative g_target");
        if (g < mask_epsilon) {
            state.frozen[i] = true;
            state.u[i] = 0.0; // placeholder; leading prefix acts as a hard core
        } else {
            state.u[i] = -std::log(g) / beta;
        }
    }
    if (state.all_masked())
        throw RefusalError("pmf_initial_guess: every bin is masked");
    // Interior or trailing frozen bins hold the value of the nearest active
    // neighbor so the tabulated curve stays well defined.
    std::size_t fa = state.first_active();
    for (std::size_t i = fa + 1; i < binning.bins; ++i)
        if (state.frozen[i]) state.u[i] = state.u[i - 1];
    return state;
}

PairPotential build_iterate_potential(const IbiState& state) {
    const std::size_t fa = state.first_active();
    TabulatedCurve knots;
    for (std::size_t i = fa; i < state.binning.bins; ++i) {
        knots.r.push_back(state.binning.mid(i));
        knots.u.push_back(state.u[i]);
    }
    if (fa > 0) {
        // Leading masked prefix: hard wall up to the first active bin edge.
        return PairPotential::hard_core(state.binning.lo(fa), std::move(knots),
                                        state.binning.r_max);
    }
    return PairPotential::tabulated(std::move(knots), state.binning.r_max);
}

void ibi_step(IbiState& state, const RdfCurve& g_target, double beta) {
    if (!state.g_valid)
        throw ConfigError("ibi_step: no completed simulation for the current iterate");
    if (g_target.g.size() != state.binning.bins)
        throw ConfigError("ibi_step: target size does not match binning");
    for (std::size_t i = 0; i < state.binning.bins; ++i) {
        if (state.frozen[i]) continue;
        double gk = state.g_current[i];
        if (gk <= 0.0) {
            ++state.skipped_bins; // insufficient sampling in this bin
            continue;
        }
        state.u[i] += state.alpha / beta * std::log(gk / g_target.g[i]);
    }
    ++state.iteration;
    state.g_valid = false;
}

namespace {

struct Residuals {
    double inf = 0.0;
    double l2 = 0.0;
};

Residuals residuals(const IbiState& state, const std::vector<double>& g,
                    const RdfCurve& g_target) {
    Residuals r;
    double sq = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < state.binning.bins; ++i) {
        if (state.frozen[i]) continue;
        double d = std::abs(g[i] - g_target.g[i]);
        r.inf = std::max(r.inf, d);
        sq += d * d;
        ++n;
    }
    r.l2 = n ? std::sqrt(sq / static_cast<double>(n)) : 0.0;
    return r;
}

double default_tolerance(const RdfCurve& g_target) {
    std::vector<double> sigmas;
    for (double s : g_target.g_err)
        if (s > 0.0) sigmas.push_back(s);
    if (sigmas.empty()) return 1.0e-3;
    std::nth_element(sigmas.begin(), sigmas.begin() + sigmas.size() / 2,
                     sigmas.end());
    return 3.0 * sigmas[sigmas.size() / 2];
}

} // namespace

InvertResult invert(const RdfCurve& g_target, double beta, double mu,
                    const BoxSpec& box, const SolverConfig& config) {
    IbiState state = pmf_initial_guess(g_target, beta, config.mask_epsilon,
                                       config.binning, config.alpha);
    InvertResult result;
    result.tolerance_used =
        config.tolerance ? *config.tolerance : default_tolerance(g_target);

    double mu_lo = mu - 2.0, mu_hi = mu + 2.0; // density-matching bracket
    double mu_current = mu;
    double best = HUGE_VAL;
    int since_improvement = 0;

    for (int k = 0; k < config.max_iters; ++k) {
        PairPotential pot = build_iterate_potential(state);
        ChainSpec chain = config.chain;
        chain.box = box;
        chain.beta = beta;
        chain.mu = mu_current;
        chain.potential = pot;
        chain.seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(k));

        SampleSet samples = run_replicated(chain, config.workers);
        result.ergodicity_warning |= samples.ergodicity_warning;

        CorrelationEstimate est = pair_correlation_estimate(
            samples, box, config.binning, pot.hard_core_radius());
        RdfCurve g_k = rdf(est);

        state.g_current = g_k.g;
        state.g_valid = true;

        Residuals res = residuals(state, g_k.g, g_target);
        InvertIteration it;
        it.k = k;
        it.res_inf = res.inf;
        it.res_l2 = res.l2;
        it.mu_used = mu_current;
        it.rho_measured = est.rho1;
        result.history.push_back(it);

        if (res.inf < best - 1e-15) {
            best = res.inf;
            result.best_state = state;
            result.best_g = g_k.g;
            result.best_res_inf = res.inf;
            result.best_iteration = k;
            since_improvement = 0;
        } else {
            ++since_improvement;
        }

        if (res.inf < result.tolerance_used) {
            result.converged = true;
            break;
        }
        if (since_improvement >= 5) {
            result.stagnated = true; // no improvement over 5 iterations
            break;
        }

        if (config.match_density) {
            // Theorem-1 mode: bisect mu toward the target density alongside
            // the structure iteration.
            if (est.rho1 < config.density_target)
                mu_lo = mu_current;
            else
                mu_hi = mu_current;
            mu_current = 0.5 * (mu_lo + mu_hi);
        }

        ibi_step(state, g_target, beta);
    }
    return result;
}

UniquenessReport uniqueness_experiment(const PairPotential& u,
                                       const PairPotential& v, double beta,
                                       double mu, const BoxSpec& box,
                                       const ChainSpec& chain_template,
                                       const Binning& binning, int workers) {
    // Precondition: the potentials must differ as tabulated curves.
    {
        double max_diff = 0.0;
        bool structural_diff = u.hard_core_radius() != v.hard_core_radius();
        double hi = std::max(u.cutoff_radius(), v.cutoff_radius());
        for (int i = 0; i <= 512; ++i) {
            double r = hi * (i + 0.5) / 513.0;
            Energy eu = u.evaluate(r), ev = v.evaluate(r);
            if (eu.is_infinite() != ev.is_infinite()) {
                structural_diff = true;
                break;
            }
            if (!eu.is_infinite())
                max_diff = std::max(max_diff, std::abs(eu.value() - ev.value()));
        }
        if (!structural_diff && max_diff <= 1e-10)
            throw RefusalError(
                "uniqueness_experiment: u and v coincide beyond tolerance");
    }

    auto simulate = [&](const PairPotential& pot, std::uint64_t stream) {
        ChainSpec chain = chain_template;
        chain.box = box;
        chain.beta = beta;
        chain.mu = mu;
        chain.potential = pot;
        chain.seed = derive_seed(chain_template.seed, stream);
        return run_replicated(chain, workers);
    };
    SampleSet samples_u = simulate(u, 0xAull);
    SampleSet samples_v = simulate(v, 0xBull);

    CorrelationEstimate est_u =
        pair_correlation_estimate(samples_u, box, binning, u.hard_core_radius());
    CorrelationEstimate est_v =
        pair_correlation_estimate(samples_v, box, binning, v.hard_core_radius());
    RdfCurve g_u = rdf(est_u);
    RdfCurve g_v = rdf(est_v);

    UniquenessReport report;
    report.ergodicity_warning =
        samples_u.ergodicity_warning || samples_v.ergodicity_warning;
    report.r_mid = g_u.r_mid;
    report.g_u = g_u.g;
    report.g_v = g_v.g;
    report.sigma_combined.assign(binning.bins, 0.0);
    for (std::size_t i = 0; i < binning.bins; ++i) {
        double sigma = std::hypot(g_u.g_err[i], g_v.g_err[i]);
        report.sigma_combined[i] = sigma;
        double diff = std::abs(g_u.g[i] - g_v.g[i]);
        double sig;
        if (sigma > 0.0)
            sig = diff / sigma;
        else
            sig = (diff == 0.0) ? 0.0 : HUGE_VAL;
        if (sig > report.max_significance) {
            report.max_significance = sig;
            report.argmax_r = binning.mid(i);
        }
    }
    report.cross_check = henderson_cross_check(u, v, est_u, est_v, box.dim);
    report.inconclusive = report.max_significance < 3.0;
    return report;
}

} // namespace hendinv
