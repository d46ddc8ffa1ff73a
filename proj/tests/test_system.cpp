#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "hendinv/system.hpp"

using namespace hendinv;

namespace {

BoxSpec box1d(double ell, Boundary b = Boundary::free) {
    return BoxSpec{1, ell, b};
}

Configuration random_config(const BoxSpec& box, std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(-box.half_width, box.half_width);
    Configuration cfg{{}, box};
    for (std::size_t i = 0; i < n; ++i) {
        Point p{0.0, 0.0, 0.0};
        for (int k = 0; k < box.dim; ++k) p[static_cast<std::size_t>(k)] = pos(rng);
        cfg.positions.push_back(p);
    }
    return cfg;
}

} // namespace

TEST_CASE("box distances: free and minimum image") {
    BoxSpec free3{3, 2.0, Boundary::free};
    BoxSpec per3{3, 2.0, Boundary::periodic};
    Point a{1.9, 0.0, 0.0}, b{-1.9, 0.0, 0.0};
    CHECK(free3.distance(a, b) == doctest::Approx(3.8));
    CHECK(per3.distance(a, b) == doctest::Approx(0.2)); // wraps through the face
    CHECK(per3.wrap(Point{2.5, -2.5, 0.0})[0] == doctest::Approx(-1.5));
    CHECK(per3.wrap(Point{2.5, -2.5, 0.0})[1] == doctest::Approx(1.5));
}

TEST_CASE("hamiltonian basics") {
    PairPotential lj = PairPotential::lennard_jones(1.0, 1.0, 3.5);
    BoxSpec box = box1d(5.0);

    Configuration empty{{}, box};
    CHECK(hamiltonian(empty, lj).value() == 0.0);

    Configuration one{{Point{0.3, 0.0, 0.0}}, box};
    CHECK(hamiltonian(one, lj).value() == 0.0);

    Configuration two{{Point{-0.5, 0.0, 0.0}, Point{0.7, 0.0, 0.0}}, box};
    CHECK(hamiltonian(two, lj).value() ==
          doctest::Approx(lj.evaluate(1.2).value()));

    TabulatedCurve tail;
    PairPotential rods = PairPotential::hard_core(0.5, tail);
    Configuration overlap{{Point{0.0, 0.0, 0.0}, Point{0.3, 0.0, 0.0}}, box};
    CHECK(hamiltonian(overlap, rods).is_infinite());
}

TEST_CASE("hamiltonian permutation invariance") {
    PairPotential lj = PairPotential::lennard_jones(1.0, 1.0, 2.5);
    BoxSpec box{2, 3.0, Boundary::periodic};
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        Configuration cfg = random_config(box, 8, rng);
        Energy h0 = hamiltonian(cfg, lj);
        std::shuffle(cfg.positions.begin(), cfg.positions.end(), rng);
        Energy h1 = hamiltonian(cfg, lj);
        if (h0.is_infinite()) {
            CHECK(h1.is_infinite());
        } else {
            CHECK(h1.value() == doctest::Approx(h0.value()).epsilon(1e-12));
        }
    }
}

TEST_CASE("interaction energy: additivity and append identity") {
    PairPotential lj = PairPotential::lennard_jones(1.0, 1.0, 2.5);
    BoxSpec box = box1d(6.0);
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        Configuration cfg = random_config(box, 6, rng);
        Point x{0.25, 0.0, 0.0};

        // W(x; gamma1 ∪ gamma2) = W(x; gamma1) + W(x; gamma2)
        Configuration g1{{cfg.positions.begin(), cfg.positions.begin() + 3}, box};
        Configuration g2{{cfg.positions.begin() + 3, cfg.positions.end()}, box};
        Energy whole = interaction_energy(x, cfg, lj);
        Energy split = interaction_energy(x, g1, lj) + interaction_energy(x, g2, lj);
        CHECK(whole.value() == doctest::Approx(split.value()).epsilon(1e-12));

        // H(x_{m+1}) = H(x_m) + W(x_{m+1}; x_m)
        Configuration bigger = cfg;
        bigger.positions.push_back(x);
        CHECK(hamiltonian(bigger, lj).value() ==
              doctest::Approx(hamiltonian(cfg, lj).value() + whole.value())
                  .epsilon(1e-12));
    }

    Configuration empty{{}, box};
    CHECK(interaction_energy(Point{0, 0, 0}, empty, lj).value() == 0.0);
}

TEST_CASE("delta energy equals full recomputation") {
    PairPotential lj = PairPotential::lennard_jones(1.0, 1.0, 2.5);
    BoxSpec box{1, 4.0, Boundary::periodic};
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> pos(-4.0, 4.0);

    // 1e-10 relative to the configuration's energy scale; the subtraction of
    // two full Hamiltonians cannot resolve finer than that.
    auto agree = [](double delta, double before, double after) {
        double scale = std::max({1.0, std::abs(before), std::abs(after)});
        return std::abs(delta - (after - before)) <= 1e-10 * scale;
    };

    for (int trial = 0; trial < 400; ++trial) {
        Configuration cfg = random_config(box, 5, rng);
        if (hamiltonian(cfg, lj).is_infinite()) continue;
        double before = hamiltonian(cfg, lj).value();

        int kind = static_cast<int>(rng() % 3);
        if (kind == 0) {
            Point x{pos(rng), 0.0, 0.0};
            Energy d = delta_energy(cfg, lj, MoveInsert{x});
            Configuration after = cfg;
            after.positions.push_back(x);
            Energy full = hamiltonian(after, lj);
            if (d.is_infinite()) {
                CHECK(full.is_infinite());
            } else {
                CHECK(agree(d.value(), before, full.value()));
            }
        } else if (kind == 1) {
            std::size_t i = rng() % cfg.size();
            Energy d = delta_energy(cfg, lj, MoveDelete{i});
            Configuration after = cfg;
            after.positions.erase(after.positions.begin() +
                                  static_cast<std::ptrdiff_t>(i));
            CHECK(agree(d.value(), before, hamiltonian(after, lj).value()));
        } else {
            std::size_t i = rng() % cfg.size();
            Point x{pos(rng), 0.0, 0.0};
            Energy d = delta_energy(cfg, lj, MoveDisplace{i, x});
            Configuration after = cfg;
            after.positions[i] = x;
            Energy full = hamiltonian(after, lj);
            if (d.is_infinite()) {
                CHECK(full.is_infinite());
            } else {
                CHECK(agree(d.value(), before, full.value()));
            }
        }
    }

    Configuration empty{{}, box};
    CHECK(delta_energy(empty, lj, MoveInsert{Point{0, 0, 0}}).value() == 0.0);
    Configuration single{{Point{0, 0, 0}}, box};
    CHECK(delta_energy(single, lj, MoveDelete{0}).value() == 0.0);
    CHECK_THROWS_AS(delta_energy(single, lj, MoveDelete{3}), std::out_of_range);
}

TEST_CASE("free-boundary hamiltonian is translation invariant") {
    PairPotential lj = PairPotential::lennard_jones(1.0, 1.0, 2.5);
    BoxSpec box = box1d(8.0);
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        Configuration cfg = random_config(box1d(4.0), 6, rng);
        cfg.box = box;
        double h0 = hamiltonian(cfg, lj).value();
        Configuration shifted = cfg;
        for (auto& p : shifted.positions) p[0] += 2.5;
        REQUIRE(shifted.valid());
        CHECK(hamiltonian(shifted, lj).value() ==
              doctest::Approx(h0).epsilon(1e-12));
    }
}

TEST_CASE("cell list matches all-pairs neighbor scan") {
    PairPotential lj = PairPotential::lennard_jones(1.0, 1.0, 1.5);
    std::mt19937_64 rng(41);
    for (Boundary b : {Boundary::free, Boundary::periodic}) {
        for (int dim : {1, 2, 3}) {
            BoxSpec box{dim, 3.0, b};
            Configuration cfg = random_config(box, 40, rng);
            CellList cells(box, lj.cutoff_radius());
            cells.build(cfg.positions);

            std::uniform_real_distribution<double> pos(-3.0, 3.0);
            for (int probe = 0; probe < 20; ++probe) {
                Point x{0.0, 0.0, 0.0};
                for (int k = 0; k < dim; ++k)
                    x[static_cast<std::size_t>(k)] = pos(rng);

                std::vector<std::size_t> via_cells;
                cells.for_each_candidate(x, [&](std::size_t j) {
                    if (box.distance(x, cfg.positions[j]) < lj.cutoff_radius())
                        via_cells.push_back(j);
                });
                std::vector<std::size_t> via_scan;
                for (std::size_t j = 0; j < cfg.size(); ++j)
                    if (box.distance(x, cfg.positions[j]) < lj.cutoff_radius())
                        via_scan.push_back(j);
                std::sort(via_cells.begin(), via_cells.end());
                std::sort(via_scan.begin(), via_scan.end());
                CHECK(via_cells == via_scan);
            }
        }
    }
}

TEST_CASE("cell list incremental updates equal rebuild") {
    BoxSpec box{2, 3.0, Boundary::periodic};
    std::mt19937_64 rng(43);
    Configuration cfg = random_config(box, 25, rng);
    CellList incremental(box, 1.0);
    incremental.build(cfg.positions);

    std::uniform_real_distribution<double> pos(-3.0, 3.0);
    for (int step = 0; step < 300; ++step) {
        int kind = static_cast<int>(rng() % 3);
        if (kind == 0) {
            Point p{pos(rng), pos(rng), 0.0};
            incremental.insert(cfg.size(), p);
            cfg.positions.push_back(p);
        } else if (kind == 1 && !cfg.positions.empty()) {
            std::size_t i = rng() % cfg.size();
            std::size_t last = cfg.size() - 1;
            incremental.erase(i, cfg.positions[i]);
            if (i != last) {
                incremental.reindex(last, i, cfg.positions[last]);
                cfg.positions[i] = cfg.positions[last];
            }
            cfg.positions.pop_back();
        } else if (!cfg.positions.empty()) {
            std::size_t i = rng() % cfg.size();
            Point p{pos(rng), pos(rng), 0.0};
            incremental.erase(i, cfg.positions[i]);
            incremental.insert(i, p);
            cfg.positions[i] = p;
        }
    }
    CellList rebuilt(box, 1.0);
    rebuilt.build(cfg.positions);
    REQUIRE(incremental.cell_count() == rebuilt.cell_count());
    std::size_t total = 0;
    for (std::size_t c = 0; c < rebuilt.cell_count(); ++c) {
        auto a = incremental.cells()[c];
        auto b = rebuilt.cells()[c];
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
        total += b.size();
    }
    CHECK(total == cfg.size()); // partition: every index exactly once
}

TEST_CASE("periodic box requires room for the minimum image") {
    PairPotential lj = PairPotential::lennard_jones(1.0, 1.0, 3.5);
    BoxSpec small{1, 2.0, Boundary::periodic}; // side 4 < 2*cutoff 7
    CHECK_THROWS(small.validate_against(lj));
    BoxSpec ok{1, 4.0, Boundary::periodic};
    CHECK_NOTHROW(ok.validate_against(lj));
}
