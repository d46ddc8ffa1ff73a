#include "hendinv/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "hendinv/rng.hpp"

namespace hendinv {

namespace {

void check_curve(const TabulatedCurve& c) {
    if (c.r.size() != c.u.size())
        throw std::invalid_argument("tabulated curve: r/u size mismatch");
    for (std::size_t i = 0; i < c.r.size(); ++i) {
        if (!std::isfinite(c.r[i]) || !std::isfinite(c.u[i]))
            throw std::invalid_argument("tabulated curve: non-finite entry");
        if (c.r[i] < 0.0)
            throw std::invalid_argument("tabulated curve: negative radius");
        if (i > 0 && c.r[i] <= c.r[i - 1])
            throw std::invalid_argument("tabulated curve: radii not strictly increasing");
    }
}

// Linear interpolation; clamps flat below the first knot.
double interp(const TabulatedCurve& c, double r) {
    if (r <= c.r.front()) return c.u.front();
    if (r >= c.r.back()) return c.u.back();
    auto it = std::upper_bound(c.r.begin(), c.r.end(), r);
    std::size_t i = static_cast<std::size_t>(it - c.r.begin());
    double t = (r - c.r[i - 1]) / (c.r[i] - c.r[i - 1]);
    return c.u[i - 1] + t * (c.u[i] - c.u[i - 1]);
}

} // namespace

PairPotential PairPotential::lennard_jones(double epsilon, double sigma, double cutoff) {
    if (epsilon < 0.0 || sigma <= 0.0 || cutoff <= 0.0)
        throw std::invalid_argument("lennard_jones: epsilon >= 0, sigma > 0, cutoff > 0 required");
    PairPotential p;
    p.params_ = LennardJonesParams{epsilon, sigma};
    p.kind_ = "lennard_jones";
    p.cutoff_ = cutoff;
    p.hard_core_ = 0.0;
    return p;
}

PairPotential PairPotential::hard_core(double core_radius, TabulatedCurve tail,
                                       std::optional<double> cutoff) {
    if (core_radius <= 0.0)
        throw std::invalid_argument("hard_core: core_radius must be positive");
    if (!tail.r.empty()) {
        check_curve(tail);
        if (tail.r.front() < core_radius)
            throw std::invalid_argument("hard_core: tail starts inside the core");
    }
    PairPotential p;
    double cut = cutoff ? *cutoff : (tail.r.empty() ? core_radius : tail.r.back());
    if (cut < core_radius)
        throw std::invalid_argument("hard_core: cutoff inside the core");
    p.params_ = HardCoreParams{core_radius, std::move(tail)};
    p.kind_ = "hard_core";
    p.cutoff_ = cut;
    p.hard_core_ = core_radius;
    return p;
}

PairPotential PairPotential::tabulated(TabulatedCurve knots, std::optional<double> cutoff,
                                       double huge_threshold) {
    if (knots.r.empty())
        throw std::invalid_argument("tabulated: no knots");
    check_curve(knots);
    PairPotential p;
    p.cutoff_ = cutoff ? *cutoff : knots.r.back();
    // A first value above the threshold acts as a hard wall below the first knot.
    p.hard_core_ = (knots.u.front() > huge_threshold) ? knots.r.front() : 0.0;
    p.params_ = TabulatedParams{std::move(knots), huge_threshold};
    p.kind_ = "tabulated";
    return p;
}

PairPotential PairPotential::ideal_gas() {
    TabulatedCurve c;
    c.r = {0.0, 1.0};
    c.u = {0.0, 0.0};
    return tabulated(std::move(c), 1.0);
}

Energy PairPotential::evaluate(double r) const {
    if (r < 0.0) throw std::domain_error("evaluate: negative distance");
    if (r < hard_core_) return Energy::infinite();
    if (r >= cutoff_) return Energy(0.0);

    if (const auto* lj = std::get_if<LennardJonesParams>(&params_)) {
        if (r == 0.0) return Energy::infinite();
        double s = lj->sigma / r;
        double s6 = s * s * s;
        s6 *= s6;
        double v = 4.0 * lj->epsilon * (s6 * s6 - s6);
        if (!std::isfinite(v)) return Energy::infinite();
        return Energy(v);
    }
    if (const auto* hc = std::get_if<HardCoreParams>(&params_)) {
        if (hc->tail.r.empty() || r > hc->tail.r.back()) return Energy(0.0);
        return Energy(interp(hc->tail, r));
    }
    const auto& tb = std::get<TabulatedParams>(params_);
    if (r > tb.knots.r.back()) return Energy(0.0);
    if (r < tb.knots.r.front()) {
        // hard wall already handled via hard_core_; remaining case is flat
        return Energy(tb.knots.u.front());
    }
    return Energy(interp(tb.knots, r));
}

double PairPotential::length_scale() const {
    if (const auto* lj = std::get_if<LennardJonesParams>(&params_)) return lj->sigma;
    if (hard_core_ > 0.0) return hard_core_;
    const auto& tb = std::get<TabulatedParams>(params_);
    for (std::size_t i = 0; i < tb.knots.r.size(); ++i)
        if (tb.knots.r[i] > 0.0) return tb.knots.r[i];
    return cutoff_ > 0.0 ? cutoff_ : 1.0;
}

bool PairPotential::is_noninteracting() const {
    if (hard_core_ > 0.0) return false;
    if (const auto* lj = std::get_if<LennardJonesParams>(&params_))
        return lj->epsilon == 0.0;
    if (std::holds_alternative<HardCoreParams>(params_)) return false;
    const auto& tb = std::get<TabulatedParams>(params_);
    return std::all_of(tb.knots.u.begin(), tb.knots.u.end(),
                       [](double v) { return v == 0.0; });
}

bool PairPotential::is_nonnegative() const {
    if (const auto* lj = std::get_if<LennardJonesParams>(&params_))
        return lj->epsilon == 0.0 || cutoff_ <= lj->sigma;
    if (const auto* hc = std::get_if<HardCoreParams>(&params_))
        return std::all_of(hc->tail.u.begin(), hc->tail.u.end(),
                           [](double v) { return v >= 0.0; });
    const auto& tb = std::get<TabulatedParams>(params_);
    return std::all_of(tb.knots.u.begin(), tb.knots.u.end(),
                       [](double v) { return v >= 0.0; });
}

std::vector<double> PairPotential::critical_radii() const {
    std::set<double> radii;
    if (hard_core_ > 0.0) radii.insert(hard_core_);
    radii.insert(cutoff_);
    const TabulatedCurve* curve = nullptr;
    if (const auto* hc = std::get_if<HardCoreParams>(&params_)) curve = &hc->tail;
    if (const auto* tb = std::get_if<TabulatedParams>(&params_)) curve = &tb->knots;
    if (curve)
        for (double r : curve->r)
            if (r > 0.0 && r <= cutoff_) radii.insert(r);
    return {radii.begin(), radii.end()};
}

double PairPotential::max_attraction(double lo, double hi) const {
    hi = std::min(hi, cutoff_);
    lo = std::max(lo, hard_core_);
    if (hi <= lo) return 0.0;
    double depth = 0.0;
    auto probe = [&](double r) {
        Energy e = evaluate(r);
        if (!e.is_infinite()) depth = std::max(depth, -e.value());
    };
    const int n = 512;
    for (int i = 0; i <= n; ++i)
        probe(lo + (hi - lo) * static_cast<double>(i) / n);
    for (double r : critical_radii()) {
        if (r > lo && r < hi) {
            probe(r);
            probe(std::nextafter(r, lo));
        }
    }
    return depth;
}

AdmissibilityReport validate_admissibility(const PairPotential& pot,
                                           const AdmissibilityCertificate& cert,
                                           int dim) {
    if (dim < 1 || dim > 3)
        throw std::invalid_argument("validate_admissibility: dim must be 1, 2 or 3");
    if (cert.r0 <= 0.0)
        throw std::invalid_argument("validate_admissibility: r0 must be positive");

    AdmissibilityReport rep;
    const double d = static_cast<double>(dim);
    const double a = pot.hard_core_radius();

    // Closed-form convergence rule for power laws.
    rep.condition1 = (a > 0.0) || (cert.p >= d);
    rep.condition2 = cert.q > d;

    // Power laws r^-p with negative exponent or negative constant are not
    // admissible minorant/majorant shapes (must be decreasing and >= 0).
    if (cert.p < 0.0 || cert.c1 < 0.0) {
        rep.minorant_ok = false;
        rep.detail = "minorant not a decreasing nonnegative power law";
        return rep;
    }
    if (cert.q < 0.0 || cert.c2 < 0.0) {
        rep.majorant_ok = false;
        rep.detail = "majorant not a decreasing nonnegative power law";
        return rep;
    }

    auto grid = [&](double lo, double hi, int n) {
        std::vector<double> g;
        for (int i = 1; i <= n; ++i)
            g.push_back(lo + (hi - lo) * static_cast<double>(i) / n);
        for (double r : pot.critical_radii())
            if (r > lo && r < hi) g.push_back(r);
        return g;
    };

    // Spot check u >= phi on (0, r0]. Inside a hard core u is +infinity and
    // passes regardless of the power law.
    rep.minorant_ok = true;
    const double slack = 1.0e-9;
    for (double r : grid(0.0, cert.r0, 96)) {
        Energy u = pot.evaluate(r);
        if (u.is_infinite()) continue;
        double phi = (a > 0.0 && r <= a) ? HUGE_VAL : cert.c1 * std::pow(r, -cert.p);
        if (u.value() < phi - slack * (1.0 + std::abs(phi))) {
            rep.minorant_ok = false;
            rep.offending_r = r;
            rep.detail = "minorant violated: u(r) < phi(r)";
            return rep;
        }
    }

    // Spot check |u| <= psi on [r0, cutoff].
    rep.majorant_ok = true;
    double hi = std::max(pot.cutoff_radius(), cert.r0);
    for (double r : grid(cert.r0, hi, 96)) {
        Energy u = pot.evaluate(r);
        double psi = cert.c2 * std::pow(r, -cert.q);
        double mag = u.is_infinite() ? HUGE_VAL : std::abs(u.value());
        if (mag > psi + slack * (1.0 + psi)) {
            rep.majorant_ok = false;
            rep.offending_r = r;
            rep.detail = "majorant violated: |u(r)| > psi(r)";
            return rep;
        }
    }
    return rep;
}

namespace {

// Free-space cluster energy, for stability search only.
Energy cluster_energy(const std::vector<std::array<double, 3>>& pts, int dim,
                      const PairPotential& pot) {
    Energy h(0.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            double r2 = 0.0;
            for (int k = 0; k < dim; ++k) {
                double dx = pts[i][static_cast<std::size_t>(k)] -
                            pts[j][static_cast<std::size_t>(k)];
                r2 += dx * dx;
            }
            h += pot.evaluate(std::sqrt(r2));
            if (h.is_infinite()) return h;
        }
    }
    return h;
}

} // namespace

StabilityCertificate estimate_stability_constant(const PairPotential& pot, int dim,
                                                 std::uint64_t budget,
                                                 std::uint64_t rng_seed,
                                                 StabilityVisitLog* log) {
    StabilityCertificate cert;
    cert.search_budget = budget;

    if (pot.is_nonnegative()) {
        cert.method = StabilityMethod::analytic_nonnegative;
        cert.B = 0.0;
        cert.worst_found = 0.0;
        return cert;
    }

    const double a = pot.hard_core_radius();
    if (a > 0.0) {
        // Shell packing: with pairwise spacing >= a, the k-th shell
        // [k a, (k+1) a) holds at most 2 neighbors in d=1 (one per side);
        // in d>1 we bound the shell count by the total count within (k+1)a
        // from the disjoint-balls volume argument.
        cert.method = StabilityMethod::analytic_hardcore_bound;
        double per_particle = 0.0;
        for (int k = 1; static_cast<double>(k) * a < pot.cutoff_radius(); ++k) {
            double lo = static_cast<double>(k) * a;
            double hi = lo + a;
            double depth = pot.max_attraction(lo, hi);
            if (depth == 0.0) continue;
            double count;
            if (dim == 1) {
                count = 2.0;
            } else {
                double ratio = 2.0 * (static_cast<double>(k) + 1.0) + 1.0;
                count = std::pow(ratio, dim) - 1.0;
            }
            per_particle += count * depth;
        }
        cert.B = 0.5 * per_particle;
        cert.worst_found = 0.0;
        return cert;
    }

    // Heuristic random search: maximize -H/m over random clusters with local
    // perturbation. The result is a certificate of what was examined, not a
    // proof.
    cert.method = StabilityMethod::random_search;
    Rng rng(rng_seed);
    const double scale = pot.length_scale();
    const std::size_t m_max = 20;

    std::vector<std::array<double, 3>> best;
    double best_ratio = 0.0; // min H/m seen
    double ratio_at_three_quarters = 0.0;

    auto visit = [&](const std::vector<std::array<double, 3>>& pts) {
        Energy h = cluster_energy(pts, dim, pot);
        if (h.is_infinite()) return;
        double ratio = h.value() / static_cast<double>(pts.size());
        if (log) log->emplace_back(pts.size(), ratio);
        if (ratio < best_ratio) {
            best_ratio = ratio;
            best = pts;
        }
    };

    for (std::uint64_t it = 0; it < budget; ++it) {
        if (best.empty() || rng.uniform() < 0.4) {
            std::size_t m = 2 + rng.uniform_index(m_max - 1);
            double side = scale * (0.8 + 2.0 * rng.uniform()) *
                          std::pow(static_cast<double>(m), 1.0 / dim);
            std::vector<std::array<double, 3>> pts(m, {0.0, 0.0, 0.0});
            for (auto& p : pts)
                for (int k = 0; k < dim; ++k)
                    p[static_cast<std::size_t>(k)] = rng.uniform(0.0, side);
            visit(pts);
        } else {
            auto pts = best;
            std::size_t i = rng.uniform_index(pts.size());
            for (int k = 0; k < dim; ++k)
                pts[i][static_cast<std::size_t>(k)] +=
                    0.3 * scale * (rng.uniform() - 0.5);
            visit(pts);
        }
        if (it == (3 * budget) / 4) ratio_at_three_quarters = best_ratio;
    }

    cert.worst_found = best_ratio;
    cert.B = std::max(0.0, -best_ratio) * 1.05;
    // Still finding markedly worse clusters in the last quarter of the
    // budget suggests the search has not saturated.
    cert.unstable_suspected =
        best_ratio < ratio_at_three_quarters - 0.05 * std::abs(ratio_at_three_quarters) - 1e-12;
    return cert;
}

} // namespace hendinv
