#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hendinv/errors.hpp"
#include "hendinv/inverse.hpp"

using namespace hendinv;

namespace {

RdfCurve flat_curve(const Binning& binning, double value, double err = 0.0) {
    RdfCurve g;
    for (std::size_t i = 0; i < binning.bins; ++i) {
        g.r_mid.push_back(binning.mid(i));
        g.g.push_back(value);
        g.g_err.push_back(err);
    }
    return g;
}

ChainSpec quick_chain(double ell, std::uint64_t steps, std::uint64_t thin) {
    ChainSpec chain;
    chain.box = BoxSpec{1, ell, Boundary::periodic};
    chain.beta = 1.0;
    chain.mu = 0.0;
    chain.steps = steps;
    chain.burn_in = steps / 10;
    chain.thin = thin;
    return chain;
}

} // namespace

TEST_CASE("pmf initial guess") {
    Binning binning{10, 2.0};

    // g = 1 -> u0 = 0
    IbiState flat = pmf_initial_guess(flat_curve(binning, 1.0), 1.0, 1e-6,
                                      binning, 0.2);
    for (std::size_t i = 0; i < binning.bins; ++i) {
        CHECK(flat.u[i] == 0.0);
        CHECK_FALSE(flat.frozen[i]);
    }

    // g = 0 below the core -> masked prefix
    RdfCurve cored = flat_curve(binning, 1.0);
    for (std::size_t i = 0; i < 3; ++i) cored.g[i] = 0.0;
    IbiState masked = pmf_initial_guess(cored, 1.0, 1e-6, binning, 0.2);
    CHECK(masked.first_active() == 3);
    CHECK(masked.frozen[0]);
    CHECK_FALSE(masked.frozen[3]);

    // plug-in identity: g = e^{-beta u} gives back u
    const double beta = 1.7;
    RdfCurve boltz = flat_curve(binning, 1.0);
    std::vector<double> u_ref(binning.bins);
    for (std::size_t i = 0; i < binning.bins; ++i) {
        u_ref[i] = 0.3 * std::sin(static_cast<double>(i));
        boltz.g[i] = std::exp(-beta * u_ref[i]);
    }
    IbiState plug = pmf_initial_guess(boltz, beta, 1e-6, binning, 0.2);
    for (std::size_t i = 0; i < binning.bins; ++i)
        CHECK(plug.u[i] == doctest::Approx(u_ref[i]).epsilon(1e-12));

    // everything masked -> refusal
    CHECK_THROWS_AS(
        pmf_initial_guess(flat_curve(binning, 0.0), 1.0, 1e-6, binning, 0.2),
        RefusalError);
}

TEST_CASE("ibi step: fixed point, formula, sign, masking") {
    Binning binning{8, 2.0};
    RdfCurve target = flat_curve(binning, 1.0);
    target.g[0] = 0.0; // masked bin

    IbiState state = pmf_initial_guess(target, 1.0, 1e-6, binning, 0.2);
    std::vector<double> u0 = state.u;

    // fixed point: g_k == g_target leaves u unchanged
    state.g_current = target.g;
    state.g_valid = true;
    ibi_step(state, target, 1.0);
    CHECK(state.iteration == 1);
    for (std::size_t i = 0; i < binning.bins; ++i)
        CHECK(state.u[i] == u0[i]);

    // formula: g_k = 1.2 vs 1.0 at alpha = 0.2, beta = 1:
    // du = 0.2 ln 1.2 = +0.0364643...
    state.g_current.assign(binning.bins, 1.2);
    state.g_valid = true;
    ibi_step(state, target, 1.0);
    for (std::size_t i = 1; i < binning.bins; ++i)
        CHECK(state.u[i] - u0[i] ==
              doctest::Approx(0.2 * std::log(1.2)).epsilon(1e-12));
    CHECK(state.u[0] == u0[0]); // masked bin untouched

    // sign property: du has the sign of g_k - g_target
    IbiState signs = pmf_initial_guess(target, 1.0, 1e-6, binning, 0.2);
    signs.g_current.assign(binning.bins, 1.0);
    signs.g_current[2] = 1.4; // over-structured: potential raised
    signs.g_current[3] = 0.6; // under-structured: potential lowered
    signs.g_valid = true;
    std::vector<double> before = signs.u;
    ibi_step(signs, target, 1.0);
    CHECK(signs.u[2] > before[2]);
    CHECK(signs.u[3] < before[3]);

    // g_k = 0 on an active bin is skipped with a warning count
    IbiState skip = pmf_initial_guess(target, 1.0, 1e-6, binning, 0.2);
    skip.g_current.assign(binning.bins, 1.0);
    skip.g_current[4] = 0.0;
    skip.g_valid = true;
    ibi_step(skip, target, 1.0);
    CHECK(skip.skipped_bins == 1);
    CHECK(skip.u[4] == u0[4]);

    // stepping without a completed simulation is rejected
    CHECK_THROWS_AS(ibi_step(skip, target, 1.0), ConfigError);
}

TEST_CASE("iterate potential: masked prefix becomes a hard core") {
    Binning binning{10, 2.0};
    RdfCurve target = flat_curve(binning, 1.0);
    target.g[0] = target.g[1] = 0.0;
    IbiState state = pmf_initial_guess(target, 1.0, 1e-6, binning, 0.2);
    PairPotential pot = build_iterate_potential(state);
    CHECK(pot.hard_core_radius() == doctest::Approx(binning.lo(2)));
    CHECK(pot.evaluate(0.1).is_infinite());
    CHECK(pot.evaluate(3.0).value() == 0.0); // pinned to zero beyond the window

    // no mask: plain tabulated curve
    IbiState open = pmf_initial_guess(flat_curve(binning, 1.0), 1.0, 1e-6,
                                      binning, 0.2);
    CHECK(build_iterate_potential(open).hard_core_radius() == 0.0);
}

TEST_CASE("invert: ideal-gas target converges immediately") {
    Binning binning{20, 2.0};
    SolverConfig config;
    config.binning = binning;
    config.max_iters = 2;
    config.tolerance = 0.08;
    config.chain = quick_chain(3.0, 400000, 40);
    config.master_seed = 71;
    BoxSpec box{1, 3.0, Boundary::periodic};

    InvertResult res = invert(flat_curve(binning, 1.0), 1.0, 0.0, box, config);
    CHECK(res.converged);
    CHECK(res.history.size() <= 2);
    for (std::size_t i = 0; i < binning.bins; ++i)
        CHECK(std::abs(res.best_state.u[i]) < 0.1);
}

TEST_CASE("invert: zero damping stagnates and never changes u") {
    Binning binning{16, 2.0};
    // unreachable target for a free chain: hard-rod structure
    RdfCurve target = flat_curve(binning, 1.0);
    for (std::size_t i = 0; i < binning.bins; ++i)
        if (binning.hi(i) <= 1.0) target.g[i] = 0.2; // not masked, just wrong

    SolverConfig config;
    config.binning = binning;
    config.alpha = 0.0;
    config.max_iters = 12;
    config.tolerance = 1e-6;
    config.chain = quick_chain(3.0, 120000, 60);
    config.master_seed = 73;
    BoxSpec box{1, 3.0, Boundary::periodic};

    InvertResult res = invert(target, 1.0, 0.0, box, config);
    CHECK_FALSE(res.converged);
    CHECK(res.stagnated);
    CHECK(res.history.size() <= 7); // stagnation fires after 5 flat iterations
    IbiState fresh = pmf_initial_guess(target, 1.0, 1e-6, binning, 0.0);
    for (std::size_t i = 0; i < binning.bins; ++i)
        CHECK(res.best_state.u[i] == fresh.u[i]);
}

TEST_CASE("invert: deterministic for a fixed master seed") {
    Binning binning{16, 2.0};
    SolverConfig config;
    config.binning = binning;
    config.max_iters = 3;
    config.tolerance = 1e-9; // force all iterations
    config.chain = quick_chain(3.0, 100000, 50);
    config.master_seed = 77;
    BoxSpec box{1, 3.0, Boundary::periodic};
    RdfCurve target = flat_curve(binning, 1.0, 0.01);

    InvertResult a = invert(target, 1.0, 0.0, box, config);
    InvertResult b = invert(target, 1.0, 0.0, box, config);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t k = 0; k < a.history.size(); ++k) {
        CHECK(a.history[k].res_inf == b.history[k].res_inf);
        CHECK(a.history[k].res_l2 == b.history[k].res_l2);
    }
    for (std::size_t i = 0; i < binning.bins; ++i)
        CHECK(a.best_state.u[i] == b.best_state.u[i]);
}

TEST_CASE("ibi one-iteration noise floor on a self-consistent target") {
    // two independent runs of the same potential; the update must stay
    // within the propagated statistical noise
    Binning binning{16, 1.8};
    ChainSpec chain = quick_chain(4.0, 1220000, 50);
    chain.potential = PairPotential::hard_core(1.0, {}, 1.0);
    chain.seed = 101;
    SampleSet run_a = run(chain);
    chain.seed = 202;
    SampleSet run_b = run(chain);

    CorrelationEstimate est_a =
        pair_correlation_estimate(run_a, chain.box, binning, 1.0);
    CorrelationEstimate est_b =
        pair_correlation_estimate(run_b, chain.box, binning, 1.0);
    RdfCurve g_a = rdf(est_a);
    RdfCurve g_b = rdf(est_b);

    IbiState state = pmf_initial_guess(g_b, 1.0, 1e-6, binning, 0.2);
    std::vector<double> u0 = state.u;
    state.g_current = g_a.g;
    state.g_valid = true;
    ibi_step(state, g_b, 1.0);

    std::size_t within = 0, active = 0;
    for (std::size_t i = 0; i < binning.bins; ++i) {
        if (state.frozen[i]) continue;
        ++active;
        double noise = 0.2 * 3.0 *
                       (g_a.g_err[i] + g_b.g_err[i]) /
                       std::max(1e-6, std::min(g_a.g[i], g_b.g[i]));
        if (std::abs(state.u[i] - u0[i]) <= noise + 1e-9) ++within;
    }
    CHECK(static_cast<double>(within) >= 0.9 * static_cast<double>(active));
}

TEST_CASE("uniqueness: identical potentials are refused") {
    PairPotential rods = PairPotential::hard_core(1.0, {}, 1.0);
    ChainSpec chain = quick_chain(4.0, 50000, 50);
    CHECK_THROWS_AS(uniqueness_experiment(rods, rods, 1.0, 0.0, chain.box,
                                          chain, Binning{16, 1.8}),
                    RefusalError);
}

TEST_CASE("uniqueness: rod diameters separate far beyond noise") {
    PairPotential u = PairPotential::hard_core(0.5, {}, 0.5);
    PairPotential v = PairPotential::hard_core(1.0, {}, 1.0);
    ChainSpec chain = quick_chain(6.0, 1220000, 40);
    chain.seed = 11;
    Binning binning{24, 1.8};
    UniquenessReport rep =
        uniqueness_experiment(u, v, 1.0, 0.0, chain.box, chain, binning);
    CHECK(rep.max_significance > 5.0);
    CHECK_FALSE(rep.inconclusive);
    // the separating region is the excluded shell (0.5, 1.0)
    CHECK(rep.argmax_r > 0.5);
    CHECK(rep.argmax_r < 1.1);
    // cross-check on the sampled tables: v's core inside u's support
    CHECK(rep.cross_check.infinite);
}

TEST_CASE("uniqueness: indistinguishable structures are inconclusive") {
    PairPotential u = PairPotential::lennard_jones(1.0, 1.0, 2.5);
    PairPotential v = PairPotential::lennard_jones(1.0 + 5e-6, 1.0, 2.5);
    ChainSpec chain = quick_chain(4.0, 60000, 60);
    chain.mu = -1.0;
    chain.seed = 13;
    UniquenessReport rep =
        uniqueness_experiment(u, v, 1.0, -1.0, chain.box, chain, Binning{12, 1.8});
    CHECK(rep.inconclusive); // never claims equality
}
