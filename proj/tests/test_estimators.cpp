#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hendinv/errors.hpp"
#include "hendinv/estimators.hpp"
#include "hendinv/gcmc.hpp"
#include "hendinv/oracle.hpp"

using namespace hendinv;

namespace {

SampleSet ideal_samples(double ell, Boundary b, std::uint64_t steps,
                        std::uint64_t thin, std::uint64_t seed) {
    ChainSpec spec;
    spec.box = BoxSpec{1, ell, b};
    spec.beta = 1.0;
    spec.mu = 0.0;
    spec.potential = PairPotential::ideal_gas();
    spec.steps = steps;
    spec.burn_in = 20000;
    spec.thin = thin;
    spec.seed = seed;
    return run(spec);
}

SampleSet rod_samples(double a, double ell, double mu, std::uint64_t steps,
                      std::uint64_t seed) {
    ChainSpec spec;
    spec.box = BoxSpec{1, ell, Boundary::periodic};
    spec.beta = 1.0;
    spec.mu = mu;
    spec.potential = PairPotential::hard_core(a, {}, a);
    spec.steps = steps;
    spec.burn_in = 20000;
    spec.thin = 40;
    spec.seed = seed;
    return run(spec);
}

} // namespace

TEST_CASE("shell volumes per dimension") {
    CHECK(shell_volume(1, 0.5, 1.0) == doctest::Approx(1.0));
    CHECK(shell_volume(2, 0.0, 1.0) == doctest::Approx(std::numbers::pi));
    CHECK(shell_volume(3, 0.0, 1.0) ==
          doctest::Approx(4.0 / 3.0 * std::numbers::pi));
}

TEST_CASE("density estimate: closed cases") {
    SampleSet empty_frames;
    empty_frames.box = BoxSpec{1, 2.0, Boundary::periodic};
    CHECK_THROWS_AS(density_estimate(empty_frames, empty_frames.box), RefusalError);

    // all frames empty -> 0 +- 0
    SampleSet zeros;
    zeros.box = BoxSpec{1, 2.0, Boundary::periodic};
    for (int i = 0; i < 64; ++i) zeros.frames.push_back(Frame{0, {}});
    DensityEstimate d = density_estimate(zeros, zeros.box);
    CHECK(d.rho == 0.0);
    CHECK(d.sigma == 0.0);

    // a single frame has undefined sigma, flagged
    SampleSet one;
    one.box = BoxSpec{1, 2.0, Boundary::periodic};
    one.frames.push_back(Frame{0, {Point{0, 0, 0}, Point{1, 0, 0},
                                   Point{-1, 0, 0}, Point{0.5, 0, 0}}});
    DensityEstimate single = density_estimate(one, one.box);
    CHECK(single.rho == doctest::Approx(1.0));
    CHECK_FALSE(single.sigma_defined);
}

TEST_CASE("ideal gas: density and flat rho2 within 3 sigma") {
    SampleSet samples = ideal_samples(2.0, Boundary::periodic, 1620000, 40, 29);
    DensityEstimate d = density_estimate(samples, samples.box);
    CHECK(std::abs(d.rho - 1.0) <= 3.0 * d.sigma);

    Binning binning{40, 2.0};
    CorrelationEstimate est =
        pair_correlation_estimate(samples, samples.box, binning, 0.0);
    std::size_t within = 0;
    for (std::size_t i = 0; i < binning.bins; ++i)
        if (std::abs(est.rho2[i] - 1.0) <= 3.0 * est.rho2_err[i]) ++within;
    CHECK(static_cast<double>(within) >= 0.9 * static_cast<double>(binning.bins));

    RdfCurve g = rdf(est);
    within = 0;
    for (std::size_t i = 0; i < binning.bins; ++i)
        if (std::abs(g.g[i] - 1.0) <= 3.0 * g.g_err[i]) ++within;
    CHECK(static_cast<double>(within) >= 0.9 * static_cast<double>(binning.bins));
}

TEST_CASE("histogram mass conservation: exact bookkeeping identity") {
    SampleSet samples = ideal_samples(2.0, Boundary::periodic, 120000, 40, 31);
    Binning binning{25, 2.0};
    CorrelationEstimate est =
        pair_correlation_estimate(samples, samples.box, binning, 0.0);

    // total recorded ordered pairs within range, recounted directly
    double direct = 0.0;
    for (const auto& f : samples.frames) {
        for (std::size_t i = 0; i < f.positions.size(); ++i)
            for (std::size_t j = 0; j < f.positions.size(); ++j) {
                if (i == j) continue;
                double r = samples.box.distance(f.positions[i], f.positions[j]);
                if (r < binning.r_max) direct += 1.0;
            }
    }
    double recorded = 0.0;
    for (double c : est.pair_counts) recorded += c;
    CHECK(recorded == direct);
}

TEST_CASE("hard rods: core bins are exactly zero, rdf algebra is exact") {
    SampleSet samples = rod_samples(1.0, 4.0, 0.0, 800000, 37);
    Binning binning{40, 2.0};
    CorrelationEstimate est =
        pair_correlation_estimate(samples, samples.box, binning, 1.0);
    for (std::size_t i = 0; i < binning.bins; ++i)
        if (binning.hi(i) <= 1.0) CHECK(est.rho2[i] == 0.0);

    RdfCurve g = rdf(est);
    // g * rho1^2 reproduces rho2 bins exactly (algebraic inverse)
    for (std::size_t i = 0; i < binning.bins; ++i)
        CHECK(g.g[i] * est.rho1 * est.rho1 ==
              doctest::Approx(est.rho2[i]).epsilon(1e-12));

    // linearity: doubling rho2 doubles g bin-wise
    CorrelationEstimate doubled = est;
    for (auto& v : doubled.rho2) v *= 2.0;
    RdfCurve g2 = rdf(doubled);
    for (std::size_t i = 0; i < binning.bins; ++i)
        CHECK(g2.g[i] == doctest::Approx(2.0 * g.g[i]).epsilon(1e-12));
}

TEST_CASE("hard rods at tiny activity: rho2/rho^2 approaches e^{-beta u}") {
    SampleSet samples = rod_samples(1.0, 8.0, -2.5, 3220000, 41);
    Binning binning{16, 2.0};
    CorrelationEstimate est =
        pair_correlation_estimate(samples, samples.box, binning, 1.0);
    RdfCurve g = rdf(est);
    for (std::size_t i = 0; i < binning.bins; ++i) {
        double expect = binning.hi(i) <= 1.0 ? 0.0 : 1.0;
        if (binning.lo(i) < 1.0 && binning.hi(i) > 1.0) continue; // straddles the step
        CHECK(std::abs(g.g[i] - expect) <= 3.0 * g.g_err[i] + 0.05);
    }
}

TEST_CASE("rdf refuses zero density") {
    CorrelationEstimate est;
    est.binning = Binning{4, 1.0};
    est.rho2.assign(4, 0.0);
    est.rho2_err.assign(4, 0.0);
    est.rho1 = 0.0;
    CHECK_THROWS_AS(rdf(est), RefusalError);
}

TEST_CASE("estimator consistency: sampled rho2 matches the oracle table") {
    // free-boundary rods; oracle and sampler on the same system
    const double ell = 3.0, a = 1.0;
    ChainSpec spec;
    spec.box = BoxSpec{1, ell, Boundary::free};
    spec.beta = 1.0;
    spec.mu = 0.0;
    spec.potential = PairPotential::hard_core(a, {}, a);
    spec.steps = 2520000;
    spec.burn_in = 20000;
    spec.thin = 50;
    spec.seed = 43;
    SampleSet samples = run(spec);

    Binning binning{24, 1.8};
    CorrelationEstimate sampled =
        pair_correlation_estimate(samples, spec.box, binning, a);

    OracleParams params;
    params.box = spec.box;
    params.beta = 1.0;
    params.mu = 0.0;
    params.potential = spec.potential;
    params.trunc.tolerance = 1e-7;
    Oracle oracle(params);
    CorrelationEstimate exact = oracle.rho2_binned(binning);

    std::size_t within = 0;
    for (std::size_t i = 0; i < binning.bins; ++i) {
        double tol = 3.0 * sampled.rho2_err[i] + exact.rho2_err[i];
        if (std::abs(sampled.rho2[i] - exact.rho2[i]) <= tol) ++within;
    }
    CHECK(static_cast<double>(within) >=
          0.95 * static_cast<double>(binning.bins));
    CHECK(std::abs(sampled.rho1 - exact.rho1) <=
          3.0 * sampled.rho1_err + exact.rho1_err);
}

TEST_CASE("gnz residual: ideal gas and negative control") {
    SampleSet samples = ideal_samples(4.0, Boundary::free, 1220000, 40, 47);
    std::vector<TestFunction> fs = {
        {"one", [](const Point&) { return 1.0; }},
        {"cosine", [](const Point& p) { return std::cos(p[0]); }},
    };
    auto res = gnz_residual(samples, samples.box, 1.0, 0.0,
                            PairPotential::ideal_gas(), fs, 1.0);
    REQUIRE(res.size() == 2);
    for (const auto& r : res) {
        // lhs = z |Delta| for f = 1; both sides agree within 3 sigma
        CHECK(std::abs(r.residual) <= 3.0 * r.sigma);
    }
    CHECK(res[0].lhs == doctest::Approx(2.0).epsilon(0.05)); // z |Delta| = 2

    // wrong mu in the rhs: the residual must blow past 5 sigma
    auto wrong = gnz_residual(samples, samples.box, 1.0, 0.5,
                              PairPotential::ideal_gas(), fs, 1.0);
    for (const auto& r : wrong)
        CHECK(std::abs(r.residual) > 5.0 * r.sigma);
}

TEST_CASE("gnz residual: probe domain must fit the core sub-box") {
    SampleSet samples = ideal_samples(2.0, Boundary::free, 60000, 40, 53);
    std::vector<TestFunction> fs = {{"one", [](const Point&) { return 1.0; }}};
    PairPotential lj = PairPotential::lennard_jones(1.0, 1.0, 1.5);
    CHECK_THROWS_AS(
        gnz_residual(samples, samples.box, 1.0, 0.0, lj, fs, 1.0),
        ConfigError); // 1.0 + cutoff 1.5 > ell 2.0
}

TEST_CASE("ruelle bound fit") {
    CorrelationEstimate est;
    est.binning = Binning{4, 1.0};
    est.rho2 = {0.0, 4.0, 1.0, 0.5};
    est.rho2_err.assign(4, 0.0);
    est.rho1 = 1.2;
    RuelleFit fit = ruelle_bound_fit(est);
    CHECK(fit.xi == doctest::Approx(2.0)); // sqrt(max rho2) dominates rho1
    CHECK(fit.argmax_bin == 1);

    // empty estimate -> xi = 0
    CorrelationEstimate empty;
    empty.binning = Binning{2, 1.0};
    empty.rho2 = {0.0, 0.0};
    empty.rho1 = 0.0;
    CHECK(ruelle_bound_fit(empty).xi == 0.0);
}
