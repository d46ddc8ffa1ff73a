#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "hendinv/errors.hpp"
#include "hendinv/gcmc.hpp"
#include "hendinv/numeric.hpp"

using namespace hendinv;

namespace {

ChainSpec ideal_chain(double ell, Boundary b, std::uint64_t steps,
                      std::uint64_t burn_in, std::uint64_t thin,
                      std::uint64_t seed) {
    ChainSpec spec;
    spec.box = BoxSpec{1, ell, b};
    spec.beta = 1.0;
    spec.mu = 0.0;
    spec.potential = PairPotential::ideal_gas();
    spec.steps = steps;
    spec.burn_in = burn_in;
    spec.thin = thin;
    spec.seed = seed;
    return spec;
}

} // namespace

TEST_CASE("acceptance probabilities: closed forms and detailed balance") {
    ChainSpec spec = ideal_chain(2.0, Boundary::periodic, 0, 0, 1, 1);
    spec.mu = 0.3;
    const double zV = spec.activity() * spec.box.volume();

    for (std::size_t n : {0u, 1u, 5u, 40u}) {
        for (double de : {-1.5, 0.0, 2.0}) {
            double a_ins = insertion_acceptance(spec, n, Energy(de));
            double a_del = deletion_acceptance(spec, n + 1, Energy(-de));
            // ratio of the two acceptance probabilities is the detailed
            // balance factor, exactly
            double expect = zV / static_cast<double>(n + 1) * std::exp(-spec.beta * de);
            CHECK(a_ins / a_del == doctest::Approx(expect).epsilon(1e-14));
        }
    }

    // insertion into a hard core rejects with probability 1
    CHECK(insertion_acceptance(spec, 3, Energy::infinite()) == 0.0);
    // deletion from an empty box is a no-op rejection
    CHECK(deletion_acceptance(spec, 0, Energy(0.0)) == 0.0);
    CHECK(displacement_acceptance(spec, Energy::infinite()) == 0.0);
    CHECK(displacement_acceptance(spec, Energy(-1.0)) == 1.0);
}

TEST_CASE("chain spec validation") {
    ChainSpec spec = ideal_chain(2.0, Boundary::periodic, 100, 10, 1, 1);
    CHECK_NOTHROW(spec.validate());

    ChainSpec bad = spec;
    bad.moves.p_insert = 0.3; // breaks p_insert == p_delete
    bad.moves.p_delete = 0.2;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = spec;
    bad.blocks = 8;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = spec;
    bad.burn_in = 200;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("ideal gas run: Poisson moments within block errors") {
    // z |Lambda| = 4; <N> = 4, Var/mean = 1
    ChainSpec spec = ideal_chain(2.0, Boundary::periodic, 1220000, 20000, 60, 7);
    SampleSet samples = run(spec);
    BlockStats n = samples.n_stats();
    REQUIRE(n.sigma_defined);
    CHECK(std::abs(n.mean - 4.0) <= 3.0 * n.sigma);

    Accumulator acc;
    for (const auto& f : samples.frames)
        acc.add(static_cast<double>(f.positions.size()));
    double ratio = acc.variance() / acc.mean();
    CHECK(ratio > 0.9);
    CHECK(ratio < 1.1);
    CHECK_FALSE(samples.ergodicity_warning);
}

TEST_CASE("ideal gas: empirical N histogram passes chi-square vs Poisson") {
    ChainSpec spec = ideal_chain(2.0, Boundary::periodic, 8020000, 20000, 80, 11);
    SampleSet samples = run(spec);
    REQUIRE(samples.frames.size() >= 100000);

    std::map<std::size_t, double> observed;
    for (const auto& f : samples.frames) observed[f.positions.size()] += 1.0;
    const double total = static_cast<double>(samples.frames.size());
    const double lambda = 4.0;

    // expected Poisson counts; the sparse tail is merged so cells have >= 5
    double stat = 0.0;
    int cells = 0;
    double tail_obs = 0.0, tail_exp = 0.0;
    double pmf = std::exp(-lambda);
    for (std::size_t k = 0; k <= 30; ++k) {
        double expect = total * pmf;
        double obs = observed.count(k) ? observed[k] : 0.0;
        if (expect >= 5.0) {
            stat += (obs - expect) * (obs - expect) / expect;
            ++cells;
        } else {
            tail_obs += obs;
            tail_exp += expect;
        }
        pmf *= lambda / static_cast<double>(k + 1);
    }
    if (tail_exp > 0.0) {
        stat += (tail_obs - tail_exp) * (tail_obs - tail_exp) / tail_exp;
        ++cells;
    }
    double pvalue = chi_square_pvalue(stat, cells - 1);
    CHECK(pvalue > 0.01);
}

TEST_CASE("ideal gas: insertion acceptance matches min(1, zV/(N+1)) per N") {
    ChainSpec spec = ideal_chain(2.0, Boundary::periodic, 400000, 0, 1000000, 13);
    std::map<std::size_t, std::pair<std::uint64_t, std::uint64_t>> tally;
    run(spec, [&](const MoveRecord& rec) {
        if (rec.kind == MoveKind::insert) {
            auto& [attempts, accepts] = tally[rec.n_before];
            ++attempts;
            if (rec.accepted) ++accepts;
        }
    });
    const double zV = 4.0;
    for (const auto& [n, counts] : tally) {
        auto [attempts, accepts] = counts;
        if (attempts < 500) continue;
        double expect = std::min(1.0, zV / static_cast<double>(n + 1));
        double rate = static_cast<double>(accepts) / static_cast<double>(attempts);
        if (expect == 1.0) {
            CHECK(rate == 1.0); // the capped ratio never rejects
        } else {
            double sigma = std::sqrt(expect * (1.0 - expect) /
                                     static_cast<double>(attempts));
            CHECK(std::abs(rate - expect) <= 5.0 * sigma + 1e-12);
        }
    }
}

TEST_CASE("incremental energy stays in sync with full recomputation") {
    ChainSpec spec;
    spec.box = BoxSpec{1, 4.0, Boundary::periodic};
    spec.beta = 1.0;
    spec.mu = 0.2;
    spec.potential = PairPotential::lennard_jones(1.0, 1.0, 2.5);
    spec.steps = 30000;
    spec.burn_in = 0;
    spec.thin = 30000;
    spec.seed = 17;
    spec.max_displacement = 0.4;

    MarkovChainState state(spec);
    for (int s = 0; s < 30000; ++s) state.step(spec);
    Energy full = hamiltonian(state.configuration(), spec.potential);
    REQUIRE_FALSE(full.is_infinite());
    CHECK(std::abs(state.current_energy() - full.value()) <=
          1e-8 * std::max(1.0, std::abs(full.value())));
    CHECK_NOTHROW(state.resync_energy(spec));
}

TEST_CASE("free boundary: wall density stays flat for the ideal gas") {
    ChainSpec spec = ideal_chain(2.0, Boundary::free, 2020000, 20000, 50, 19);
    SampleSet samples = run(spec);

    const std::size_t bins = 20;
    const std::size_t nb = 32;
    const std::size_t nf = samples.frames.size();
    std::vector<std::vector<Accumulator>> block_hist(
        bins, std::vector<Accumulator>(nb));
    const double width = 4.0 / bins;
    for (std::size_t f = 0; f < nf; ++f) {
        std::vector<double> counts(bins, 0.0);
        for (const auto& p : samples.frames[f].positions) {
            auto b = static_cast<std::size_t>((p[0] + 2.0) / width);
            if (b >= bins) b = bins - 1;
            counts[b] += 1.0;
        }
        for (std::size_t b = 0; b < bins; ++b)
            block_hist[b][(f * nb) / nf].add(counts[b] / width);
    }
    std::size_t within = 0;
    for (std::size_t b = 0; b < bins; ++b) {
        BlockStats s = block_stats(block_hist[b]);
        if (std::abs(s.mean - 1.0) <= 3.0 * s.sigma) ++within;
    }
    CHECK(within >= bins - 1); // 3-sigma coverage with one allowed excursion
}

TEST_CASE("reproducibility: same seed and spec give identical output") {
    ChainSpec spec;
    spec.box = BoxSpec{1, 3.0, Boundary::periodic};
    spec.beta = 1.2;
    spec.mu = -0.1;
    spec.potential = PairPotential::lennard_jones(0.8, 1.0, 2.5);
    spec.steps = 50000;
    spec.burn_in = 5000;
    spec.thin = 20;
    spec.seed = 4242;

    SampleSet a = run(spec);
    SampleSet b = run(spec);
    REQUIRE(a.frames.size() == b.frames.size());
    for (std::size_t f = 0; f < a.frames.size(); ++f) {
        CHECK(a.frames[f].step == b.frames[f].step);
        REQUIRE(a.frames[f].positions.size() == b.frames[f].positions.size());
        for (std::size_t i = 0; i < a.frames[f].positions.size(); ++i)
            CHECK(a.frames[f].positions[i][0] == b.frames[f].positions[i][0]);
    }
    CHECK(a.counters.insert_accepts == b.counters.insert_accepts);
    CHECK(a.tuned_displacement == b.tuned_displacement);

    SampleSet r1 = run_replicated(spec, 2);
    SampleSet r2 = run_replicated(spec, 2);
    REQUIRE(r1.frames.size() == r2.frames.size());
    for (std::size_t f = 0; f < r1.frames.size(); ++f)
        CHECK(r1.frames[f].positions.size() == r2.frames[f].positions.size());
    CHECK(r1.blocks == 2 * a.blocks);
}

TEST_CASE("boundary case: steps == burn_in gives an empty but valid set") {
    ChainSpec spec = ideal_chain(2.0, Boundary::periodic, 5000, 5000, 1, 3);
    SampleSet samples = run(spec);
    CHECK(samples.frames.empty());
    CHECK(samples.rng_name == Rng::generator_name());
    CHECK(samples.seed == 3);
    CHECK(samples.n_stats().blocks == 0);
}

TEST_CASE("ergodicity warning when no exchange moves are ever accepted") {
    ChainSpec spec = ideal_chain(2.0, Boundary::periodic, 50000, 0, 100, 5);
    spec.moves = MoveMix{0.0, 0.0, 1.0}; // displacement-only chain
    SampleSet samples = run(spec);
    CHECK(samples.ergodicity_warning);
}

TEST_CASE("hard rods: no overlapping pair is ever sampled") {
    ChainSpec spec;
    spec.box = BoxSpec{1, 4.0, Boundary::periodic};
    spec.beta = 1.0;
    spec.mu = 0.0;
    spec.potential = PairPotential::hard_core(1.0, {}, 1.0);
    spec.steps = 200000;
    spec.burn_in = 10000;
    spec.thin = 50;
    spec.seed = 23;
    SampleSet samples = run(spec);
    REQUIRE_FALSE(samples.frames.empty());
    for (const auto& f : samples.frames) {
        Configuration cfg{f.positions, spec.box};
        CHECK_FALSE(hamiltonian(cfg, spec.potential).is_infinite());
    }
}
