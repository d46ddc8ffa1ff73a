#include "hendinv/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "hendinv/errors.hpp"
#include "hendinv/numeric.hpp"

namespace hendinv {

void QuadratureSpec::validate() const {
    if (points_per_axis < 8)
        throw ConfigError("quadrature: points_per_axis must be >= 8");
    if (refinement_levels < 2)
        throw ConfigError("quadrature: refinement_levels must be >= 2");
}

TruncationBound make_truncation_bound(int n_max, double z, double volume,
                                      double beta, double stability_B) {
    TruncationBound b;
    b.n_max = n_max;
    b.tail_bound = poisson_tail(n_max, z * volume * std::exp(beta * stability_B));
    return b;
}

int required_n_max(double tolerance, double z, double volume, double beta,
                   double stability_B, int n_max_cap) {
    const double x = z * volume * std::exp(beta * stability_B);
    for (int n = 0; n <= n_max_cap; ++n)
        if (poisson_tail(n, x) <= tolerance) return n;
    int needed = n_max_cap + 1;
    while (needed < 100000 && poisson_tail(needed, x) > tolerance) ++needed;
    std::ostringstream msg;
    msg << "truncation tolerance " << tolerance << " needs n_max = " << needed
        << " (cap " << n_max_cap << ")";
    throw RefusalError(msg.str());
}

namespace {

constexpr double kDedupRel = 1.0e-12;

void budget_check(std::uint64_t spent, std::uint64_t ceiling) {
    if (spent > ceiling) {
        std::ostringstream msg;
        msg << "quadrature cost ceiling exceeded (" << ceiling
            << " nodes); raise the ceiling or reduce n_max/points";
        throw RefusalError(msg.str());
    }
}

// Sums of up to `depth` interaction radii, deduplicated, below `limit`.
// These are the positions where repeated-packing kinks of the nested
// integrals can sit.
std::vector<double> radius_sum_closure(const std::vector<double>& radii,
                                       double limit, int depth,
                                       std::size_t cap) {
    std::vector<double> out;
    std::vector<double> frontier{0.0};
    auto seen = [&](double s) {
        for (double v : out)
            if (std::abs(v - s) <= kDedupRel * limit) return true;
        return false;
    };
    for (int d = 0; d < depth && out.size() < cap; ++d) {
        std::vector<double> next;
        for (double f : frontier) {
            for (double r : radii) {
                double s = f + r;
                if (s >= limit || s <= 0.0) continue;
                if (seen(s)) continue;
                out.push_back(s);
                next.push_back(s);
                if (out.size() >= cap) break;
            }
            if (out.size() >= cap) break;
        }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct AxisNodes {
    std::vector<double> x;
    std::vector<double> w;
};

// Composite rule on [lo, hi] with panel edges at `cuts` (clipped inside).
AxisNodes axis_nodes(double lo, double hi, const std::vector<double>& cuts,
                     QuadratureSpec::Scheme scheme, int order) {
    AxisNodes out;
    if (hi - lo <= kDedupRel) return out;
    std::vector<double> edges{lo};
    for (double c : cuts)
        if (c > lo + kDedupRel && c < hi - kDedupRel) edges.push_back(c);
    edges.push_back(hi);
    std::sort(edges.begin(), edges.end());
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        double a = edges[p], b = edges[p + 1];
        if (b - a <= kDedupRel) continue;
        if (scheme == QuadratureSpec::Scheme::gauss_legendre) {
            const GaussRule& rule = gauss_rule(order);
            double c = 0.5 * (a + b), h = 0.5 * (b - a);
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                out.x.push_back(c + h * rule.nodes[i]);
                out.w.push_back(h * rule.weights[i]);
            }
        } else {
            double h = (b - a) / order;
            for (int i = 0; i < order; ++i) {
                out.x.push_back(a + (i + 0.5) * h);
                out.w.push_back(h);
            }
        }
    }
    return out;
}

// Ordered-sector integrator, d = 1. Coordinates live in [0, L]; anchors are
// pre-shifted. Particles are placed in ascending order; every node at depth
// j contributes to the ordered integral I_j, so one tree sweep yields the
// whole family j = 0..j_max.
class Ordered1d {
public:
    Ordered1d(const PairPotential& pot, double beta, double L,
              QuadratureSpec::Scheme scheme, int order,
              std::vector<double> anchors, std::uint64_t ceiling,
              std::uint64_t& spent)
        : pot_(pot), beta_(beta), L_(L), scheme_(scheme), order_(order),
          anchors_(std::move(anchors)), ceiling_(ceiling), total_(spent) {
        radii_ = pot.critical_radii();
        sums_ = radius_sum_closure(radii_, L_, 2, 64);
    }

    void run(int j_max, bool want_h, std::vector<double>& I,
             std::vector<double>& H) {
        j_max_ = j_max;
        want_h_ = want_h;
        I_.assign(static_cast<std::size_t>(j_max) + 1, 0.0);
        H_.assign(static_cast<std::size_t>(j_max) + 1, 0.0);
        I_[0] = 1.0;
        placed_.clear();
        spent_ = 0;
        if (j_max >= 1) place(1, 0.0, 1.0, 0.0);
        total_ += spent_;
        I = I_;
        H = H_;
    }

private:
    std::vector<double> cuts(double lo) const {
        std::vector<double> c;
        for (double s : sums_) {
            c.push_back(s);
            c.push_back(L_ - s);
        }
        for (double y : placed_)
            for (double r : radii_) c.push_back(y + r);
        for (double a : anchors_)
            for (double r : radii_) {
                c.push_back(a + r);
                c.push_back(a - r);
            }
        std::erase_if(c, [&](double v) { return v <= lo || v >= L_; });
        std::sort(c.begin(), c.end());
        return c;
    }

    // Interaction of a particle at y with everything already placed.
    Energy added_energy(double y) const {
        Energy e(0.0);
        for (double p : placed_) {
            e += pot_.evaluate(y - p);
            if (e.is_infinite()) return e;
        }
        for (double a : anchors_) {
            e += pot_.evaluate(std::abs(y - a));
            if (e.is_infinite()) return e;
        }
        return e;
    }

    // Hard-core infeasibility is interval-shaped and its interval edges are
    // panel boundaries, so a panel whose midpoint overlaps a core is zero on
    // the whole panel and can be skipped without enumerating nodes.
    bool core_feasible(double y) const {
        const double a = pot_.hard_core_radius();
        if (a == 0.0) return true;
        if (!placed_.empty() && y - placed_.back() < a) return false;
        for (double anchor : anchors_)
            if (std::abs(y - anchor) < a) return false;
        return true;
    }

    void place(int depth, double lo, double wprod, double esum) {
        std::vector<double> edges{lo};
        for (double c : cuts(lo))
            if (c > lo + 1e-13 * L_ && c < L_ - 1e-13 * L_) edges.push_back(c);
        edges.push_back(L_);
        std::sort(edges.begin(), edges.end());

        for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
            const double pa = edges[p], pb = edges[p + 1];
            if (pb - pa <= 1e-13 * L_) continue;
            if (!core_feasible(0.5 * (pa + pb))) continue;
            AxisNodes nodes = axis_nodes(pa, pb, {}, scheme_, order_);
            spent_ += nodes.x.size();
            budget_check(spent_, ceiling_);
            for (std::size_t i = 0; i < nodes.x.size(); ++i) {
                const double y = nodes.x[i];
                Energy de = added_energy(y);
                if (de.is_infinite()) continue; // zero weight, as is every extension
                const double e2 = esum + de.value();
                const double w2 = wprod * nodes.w[i];
                const double boltz = std::exp(-beta_ * e2);
                auto d = static_cast<std::size_t>(depth);
                I_[d] += w2 * boltz;
                if (want_h_) H_[d] += w2 * e2 * boltz;
                if (depth < j_max_) {
                    placed_.push_back(y);
                    place(depth + 1, y, w2, e2);
                    placed_.pop_back();
                }
            }
        }
    }

    const PairPotential& pot_;
    double beta_, L_;
    QuadratureSpec::Scheme scheme_;
    int order_;
    std::vector<double> anchors_;
    std::uint64_t ceiling_;
    std::uint64_t& total_;
    std::uint64_t spent_ = 0;
    std::vector<double> radii_, sums_;
    std::vector<double> placed_;
    std::vector<double> I_, H_;
    int j_max_ = 0;
    bool want_h_ = false;
};

// Plain product grid over Lambda^N for d in {1,2,3}; one particle at a time
// with overlap pruning. Yields unordered integrals, converted to the ordered
// normalization (divide by j!) for a common interface.
class ProductGrid {
public:
    ProductGrid(const PairPotential& pot, double beta, const BoxSpec& box,
                QuadratureSpec::Scheme scheme, int order,
                std::vector<Point> anchors, std::uint64_t ceiling,
                std::uint64_t& spent)
        : pot_(pot), beta_(beta), box_(box), anchors_(std::move(anchors)),
          ceiling_(ceiling), total_(spent) {
        axis_ = axis_nodes(-box.half_width, box.half_width, {}, scheme, order);
    }

    void run(int j_max, bool want_h, std::vector<double>& I,
             std::vector<double>& H) {
        j_max_ = j_max;
        want_h_ = want_h;
        I_.assign(static_cast<std::size_t>(j_max) + 1, 0.0);
        H_.assign(static_cast<std::size_t>(j_max) + 1, 0.0);
        I_[0] = 1.0;
        placed_.clear();
        spent_ = 0;
        if (j_max >= 1) place_particle(1, 1.0, 0.0);
        total_ += spent_;
        double fact = 1.0;
        for (int j = 1; j <= j_max; ++j) {
            fact *= j;
            I_[static_cast<std::size_t>(j)] /= fact;
            H_[static_cast<std::size_t>(j)] /= fact;
        }
        I = I_;
        H = H_;
    }

private:
    void place_particle(int depth, double wprod, double esum) {
        Point p{0.0, 0.0, 0.0};
        place_coord(depth, 0, p, wprod, esum);
    }

    void place_coord(int depth, int coord, Point& p, double wprod, double esum) {
        if (coord == box_.dim) {
            spent_ += 1;
            budget_check(spent_, ceiling_);
            Energy de(0.0);
            for (const auto& q : placed_) {
                de += pot_.evaluate(box_.distance(p, q));
                if (de.is_infinite()) return;
            }
            for (const auto& a : anchors_) {
                de += pot_.evaluate(box_.distance(p, a));
                if (de.is_infinite()) return;
            }
            const double e2 = esum + de.value();
            const double boltz = std::exp(-beta_ * e2);
            auto d = static_cast<std::size_t>(depth);
            I_[d] += wprod * boltz;
            if (want_h_) H_[d] += wprod * e2 * boltz;
            if (depth < j_max_) {
                placed_.push_back(p);
                place_particle(depth + 1, wprod, e2);
                placed_.pop_back();
            }
            return;
        }
        for (std::size_t i = 0; i < axis_.x.size(); ++i) {
            p[static_cast<std::size_t>(coord)] = axis_.x[i];
            place_coord(depth, coord + 1, p, wprod * axis_.w[i], esum);
        }
    }

    const PairPotential& pot_;
    double beta_;
    BoxSpec box_;
    std::vector<Point> anchors_;
    std::uint64_t ceiling_;
    std::uint64_t& total_;
    std::uint64_t spent_ = 0;
    AxisNodes axis_;
    std::vector<Point> placed_;
    std::vector<double> I_, H_;
    int j_max_ = 0;
    bool want_h_ = false;
};

Energy free_cluster_energy(const std::vector<Point>& pts, const BoxSpec& box,
                           const PairPotential& pot) {
    Energy h(0.0);
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            h += pot.evaluate(box.distance(pts[i], pts[j]));
            if (h.is_infinite()) return h;
        }
    return h;
}

} // namespace

Oracle::Oracle(OracleParams params) : params_(std::move(params)) {
    params_.box.validate();
    params_.quad.validate();
    if (params_.box.boundary != Boundary::free)
        throw ConfigError("oracle: free boundary required");
    const double z = activity();
    trunc_bound_.n_max =
        required_n_max(params_.trunc.tolerance, z, params_.box.volume(),
                       params_.beta, params_.stability_B, params_.trunc.n_max_cap);
    trunc_bound_ = make_truncation_bound(trunc_bound_.n_max, z,
                                         params_.box.volume(), params_.beta,
                                         params_.stability_B);
    series_by_level_.resize(static_cast<std::size_t>(params_.quad.refinement_levels));
}

double Oracle::activity() const { return std::exp(params_.beta * params_.mu); }

int Oracle::quad_order(int level) const {
    if (params_.quad.scheme == QuadratureSpec::Scheme::midpoint)
        return params_.quad.points_per_axis << level;
    static const int ladder[] = {8, 12, 16, 24, 32, 48, 64};
    int start = 0;
    while (ladder[start] < params_.quad.points_per_axis && start < 6) ++start;
    int idx = std::min(start + level, 6);
    return ladder[idx];
}

std::vector<double> Oracle::anchor_integrals(const std::vector<Point>& anchors,
                                             int j_max, int level) {
    std::vector<double> I, H;
    if (params_.potential.is_noninteracting()) {
        I.assign(static_cast<std::size_t>(j_max) + 1, 0.0);
        double v = 1.0;
        double fact = 1.0;
        I[0] = 1.0;
        for (int j = 1; j <= j_max; ++j) {
            v *= params_.box.volume();
            fact *= j;
            I[static_cast<std::size_t>(j)] = v / fact;
        }
        return I;
    }
    if (params_.box.dim == 1 && !params_.force_product_grid) {
        std::vector<double> shifted;
        shifted.reserve(anchors.size());
        for (const auto& a : anchors) shifted.push_back(a[0] + params_.box.half_width);
        Ordered1d integ(params_.potential, params_.beta, params_.box.side(),
                        params_.quad.scheme, quad_order(level), std::move(shifted),
                        params_.trunc.cost_ceiling, nodes_spent_);
        integ.run(j_max, false, I, H);
        return I;
    }
    ProductGrid integ(params_.potential, params_.beta, params_.box,
                      params_.quad.scheme, quad_order(level), anchors,
                      params_.trunc.cost_ceiling, nodes_spent_);
    integ.run(j_max, false, I, H);
    return I;
}

const Oracle::Series& Oracle::partition_series(int level) {
    auto& slot = series_by_level_[static_cast<std::size_t>(level)];
    if (slot) return *slot;
    Series s;
    const int n = trunc_bound_.n_max;
    if (params_.potential.is_noninteracting()) {
        s.weight.assign(static_cast<std::size_t>(n) + 1, 0.0);
        s.h_weight.assign(static_cast<std::size_t>(n) + 1, 0.0);
        s.weight[0] = 1.0;
        double v = 1.0, fact = 1.0;
        for (int j = 1; j <= n; ++j) {
            v *= params_.box.volume();
            fact *= j;
            s.weight[static_cast<std::size_t>(j)] = v / fact;
        }
    } else if (params_.box.dim == 1 && !params_.force_product_grid) {
        Ordered1d integ(params_.potential, params_.beta, params_.box.side(),
                        params_.quad.scheme, quad_order(level), {},
                        params_.trunc.cost_ceiling, nodes_spent_);
        integ.run(n, true, s.weight, s.h_weight);
    } else {
        ProductGrid integ(params_.potential, params_.beta, params_.box,
                          params_.quad.scheme, quad_order(level), {},
                          params_.trunc.cost_ceiling, nodes_spent_);
        integ.run(n, true, s.weight, s.h_weight);
    }
    slot = std::move(s);
    return *slot;
}

double Oracle::xi_at_level(int level) {
    const Series& s = partition_series(level);
    const double z = activity();
    KahanSum sum;
    double zp = 1.0;
    for (std::size_t j = 0; j < s.weight.size(); ++j) {
        sum.add(zp * s.weight[j]);
        zp *= z;
    }
    return sum.value();
}

ValueWithBound Oracle::grand_partition() {
    const int hi = params_.quad.refinement_levels - 1;
    double xi_hi = xi_at_level(hi);
    double xi_lo = xi_at_level(hi - 1);
    return {xi_hi, std::abs(xi_hi - xi_lo) + trunc_bound_.tail_bound};
}

ValueWithBound Oracle::log_partition() {
    ValueWithBound xi = grand_partition();
    return {std::log(xi.value), xi.bound / xi.value};
}

ValueWithBound Oracle::pressure() {
    ValueWithBound lp = log_partition();
    const double bv = params_.beta * params_.box.volume();
    return {lp.value / bv, lp.bound / bv};
}

ValueWithBound Oracle::mean_particle_number() {
    const double z = activity();
    const double x = z * params_.box.volume() * std::exp(params_.beta * params_.stability_B);
    auto mean_at = [&](int level) {
        const Series& s = partition_series(level);
        KahanSum num;
        double zp = 1.0;
        for (std::size_t j = 0; j < s.weight.size(); ++j) {
            num.add(static_cast<double>(j) * zp * s.weight[j]);
            zp *= z;
        }
        return num.value() / xi_at_level(level);
    };
    const int hi = params_.quad.refinement_levels - 1;
    double v_hi = mean_at(hi);
    double v_lo = mean_at(hi - 1);
    // sum_{N>n} N x^N/N! = x * tail(n-1)
    double tail = x * poisson_tail(trunc_bound_.n_max - 1, x) / xi_at_level(hi);
    return {v_hi, std::abs(v_hi - v_lo) + tail};
}

ValueWithBound Oracle::mean_energy() {
    const double z = activity();
    auto mean_at = [&](int level) {
        const Series& s = partition_series(level);
        KahanSum num;
        double zp = 1.0;
        for (std::size_t j = 0; j < s.h_weight.size(); ++j) {
            num.add(zp * s.h_weight[j]);
            zp *= z;
        }
        return num.value() / xi_at_level(level);
    };
    const int hi = params_.quad.refinement_levels - 1;
    double v_hi = mean_at(hi);
    double v_lo = mean_at(hi - 1);
    const double x = z * params_.box.volume() * std::exp(params_.beta * params_.stability_B);
    double tail = (params_.stability_B + 1.0 / params_.beta) * x *
                  poisson_tail(trunc_bound_.n_max - 1, x) / xi_at_level(hi);
    return {v_hi, std::abs(v_hi - v_lo) + tail};
}

std::vector<ValueWithBound> Oracle::correlation(
    const std::vector<std::vector<Point>>& tuples) {
    std::vector<ValueWithBound> out;
    out.reserve(tuples.size());
    const double z = activity();
    const int hi = params_.quad.refinement_levels - 1;
    const double xi_hi = xi_at_level(hi);
    const double xi_lo = xi_at_level(hi - 1);
    const double tail_rel = trunc_bound_.tail_bound / xi_hi;

    for (const auto& tuple : tuples) {
        const auto m = tuple.size();
        if (m == 0) {
            out.push_back({1.0, 0.0}); // rho^(0) = 1 by convention
            continue;
        }
        for (const auto& p : tuple)
            if (!params_.box.contains(p))
                throw ConfigError("correlation: point outside the box");
        Energy h0 = free_cluster_energy(tuple, params_.box, params_.potential);
        if (h0.is_infinite()) {
            out.push_back({0.0, 0.0});
            continue;
        }
        auto value_at = [&](int level, double xi) {
            auto I = anchor_integrals(tuple, trunc_bound_.n_max, level);
            KahanSum num;
            double zp = 1.0;
            for (std::size_t j = 0; j < I.size(); ++j) {
                num.add(zp * I[j]);
                zp *= z;
            }
            return std::pow(z, static_cast<double>(m)) *
                   h0.boltzmann(params_.beta) * num.value() / xi;
        };
        double v_hi = value_at(hi, xi_hi);
        double v_lo = value_at(hi - 1, xi_lo);
        double bound = std::abs(v_hi - v_lo) + 2.0 * std::abs(v_hi) * tail_rel;
        out.push_back({v_hi, bound});
    }
    return out;
}

CorrelationEstimate Oracle::rho2_binned(const Binning& binning) {
    if (params_.box.dim != 1)
        throw ConfigError("rho2_binned: implemented for d = 1");
    const double ell = params_.box.half_width;
    if (binning.r_max >= ell)
        throw RefusalError("rho2_binned: r_max must be < ell (window would be empty)");
    const double w = ell - binning.r_max; // window half-width
    const GaussRule& xr = gauss_rule(12);
    const GaussRule& rr = gauss_rule(4);

    CorrelationEstimate est;
    est.binning = binning;
    est.dim = 1;
    est.boundary = Boundary::free;
    est.core_subbox_margin = binning.r_max;
    est.provenance = Provenance::oracle;
    est.frames = 0;
    est.rho2.assign(binning.bins, 0.0);
    est.rho2_err.assign(binning.bins, 0.0);

    // rho1 averaged over the window.
    {
        std::vector<std::vector<Point>> pts;
        for (std::size_t i = 0; i < xr.nodes.size(); ++i)
            pts.push_back({Point{w * xr.nodes[i], 0.0, 0.0}});
        auto vals = correlation(pts);
        double v = 0.0, b = 0.0;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            v += 0.5 * xr.weights[i] * vals[i].value; // rule is on [-1,1]
            b += 0.5 * xr.weights[i] * vals[i].bound;
        }
        est.rho1 = v;
        est.rho1_err = b;
    }

    for (std::size_t bin = 0; bin < binning.bins; ++bin) {
        const double rl = binning.lo(bin), rh = binning.hi(bin);
        // Pairs strictly inside a hard core never occur.
        if (rh <= params_.potential.hard_core_radius()) {
            est.rho2[bin] = 0.0;
            est.rho2_err[bin] = 0.0;
            continue;
        }
        std::vector<std::vector<Point>> pts;
        std::vector<double> wts;
        for (std::size_t ix = 0; ix < xr.nodes.size(); ++ix) {
            const double x = w * xr.nodes[ix];
            for (std::size_t ir = 0; ir < rr.nodes.size(); ++ir) {
                const double r = 0.5 * (rl + rh) + 0.5 * (rh - rl) * rr.nodes[ir];
                for (double s : {-1.0, 1.0}) {
                    pts.push_back({Point{x, 0.0, 0.0}, Point{x + s * r, 0.0, 0.0}});
                    // x-weight * r-weight, both mapped from [-1,1]
                    wts.push_back(0.5 * xr.weights[ix] * 0.5 * rr.weights[ir]);
                }
            }
        }
        auto vals = correlation(pts);
        double v = 0.0, b = 0.0;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            v += wts[i] * vals[i].value;
            b += wts[i] * vals[i].bound;
        }
        // average over x in the window and r in the bin, both sides counted
        est.rho2[bin] = v / 2.0;
        est.rho2_err[bin] = b / 2.0;
    }
    return est;
}

JanossyResult Oracle::janossy(const std::vector<std::vector<Point>>& tuples,
                              int k_max) {
    const double z = activity();
    const int hi = params_.quad.refinement_levels - 1;
    const double xi = xi_at_level(hi);
    const int cap = (k_max < 0) ? 64 : k_max;

    JanossyResult res;
    res.values.reserve(tuples.size());

    for (const auto& tuple : tuples) {
        const auto m = tuple.size();
        Energy h0 = free_cluster_energy(tuple, params_.box, params_.potential);
        if (h0.is_infinite()) {
            res.values.push_back(0.0);
            continue;
        }
        auto I = anchor_integrals(tuple, cap + trunc_bound_.n_max, hi);

        // term_k = (-1)^k z^{m+k} e^{-beta H0} / Xi
        //          * sum_N z^N C(k+N, k) I_{k+N}
        auto term = [&](int k) {
            KahanSum sum;
            double wn = 1.0; // z^N * binom(k+N, k), built by recurrence
            for (int N = 0; k + N <= cap + trunc_bound_.n_max &&
                            N <= trunc_bound_.n_max; ++N) {
                sum.add(wn * I[static_cast<std::size_t>(k + N)]);
                wn *= z * static_cast<double>(k + N + 1) / static_cast<double>(N + 1);
            }
            double sign = (k % 2 == 0) ? 1.0 : -1.0;
            return sign * std::pow(z, static_cast<double>(m) + k) *
                   h0.boltzmann(params_.beta) * sum.value() / xi;
        };

        KahanSum value;
        double prev_mag = HUGE_VAL;
        int grow_streak = 0;
        int k_used = 0;
        double last_mag = 0.0;
        double t_next = 0.0;
        // Terms of the exp-type series legitimately grow until
        // k ~ z |Lambda| e^{beta B}; only growth beyond that is pathological.
        const double x_peak = z * params_.box.volume() *
                              std::exp(params_.beta * params_.stability_B);
        const int grow_allowed_until = static_cast<int>(std::ceil(x_peak)) + 4;
        for (int k = 0; k <= cap; ++k) {
            double t = term(k);
            value.add(t);
            k_used = k;
            last_mag = std::abs(t);
            if (last_mag == 0.0) {
                t_next = 0.0;
                break; // series terminated exactly (packing bound)
            }
            if (last_mag > prev_mag && k > grow_allowed_until) {
                if (++grow_streak >= 3) {
                    std::ostringstream msg;
                    msg << "janossy: non-decaying terms at k = " << k
                        << " (|t_k| = " << last_mag
                        << "); box too large or activity too high for the series";
                    throw RefusalError(msg.str());
                }
            } else {
                grow_streak = 0;
            }
            prev_mag = last_mag;
            if (k == cap) break;
            t_next = std::abs(term(k + 1));
            if (k_max < 0 && last_mag < params_.trunc.tolerance &&
                t_next < last_mag)
                break;
        }
        res.diagnostics.k_used = std::max(res.diagnostics.k_used, k_used);
        res.diagnostics.last_term_magnitude =
            std::max(res.diagnostics.last_term_magnitude, last_mag);
        res.diagnostics.tail_estimate =
            std::max(res.diagnostics.tail_estimate, t_next);

        double v = value.value();
        if (v < 0.0) {
            double tol = 10.0 * (res.diagnostics.tail_estimate +
                                 res.diagnostics.last_term_magnitude) +
                         1.0e-12;
            if (-v <= tol) {
                res.diagnostics.negative_within_tolerance = true;
            } else {
                std::ostringstream msg;
                msg << "janossy: value " << v
                    << " negative beyond truncation tolerance " << tol;
                throw RefusalError(msg.str());
            }
        }
        res.values.push_back(v);
    }
    return res;
}

JanossyTable Oracle::janossy_table(int m_max) {
    const double z = activity();
    const double volume = params_.box.volume();
    const double x = z * volume * std::exp(params_.beta * params_.stability_B);
    int M = m_max;
    if (M < 0) {
        M = 0;
        while (M < 128 && poisson_tail(M, x) > params_.trunc.tolerance) ++M;
    }

    JanossyTable table;
    table.m_max = M;
    table.volume = volume;
    table.integral.assign(static_cast<std::size_t>(M) + 1, 0.0);
    table.entropy_integrand.assign(static_cast<std::size_t>(M) + 1, 0.0);

    const int hi = params_.quad.refinement_levels - 1;
    const double xi = xi_at_level(hi);
    const double log_xi = std::log(xi);

    if (params_.potential.is_noninteracting()) {
        // j^(m) is spatially constant; evaluate it through the alternating
        // series so the closed path is exercised, then integrate trivially.
        const double ell = params_.box.half_width;
        std::vector<std::vector<Point>> tuples;
        for (int m = 0; m <= M; ++m) {
            std::vector<Point> t;
            for (int i = 0; i < m; ++i) {
                double xi_pos = -ell + (2.0 * ell) * (i + 0.5) / m;
                t.push_back(Point{xi_pos, 0.0, 0.0});
            }
            tuples.push_back(std::move(t));
        }
        JanossyResult jr = janossy(tuples);
        double vol_m = 1.0;
        for (int m = 0; m <= M; ++m) {
            auto ms = static_cast<std::size_t>(m);
            double j = jr.values[ms];
            table.integral[ms] = vol_m * j;
            table.entropy_integrand[ms] = (j > 0.0) ? vol_m * j * std::log(j) : 0.0;
            vol_m *= volume;
        }
        table.tail_diagnostic = poisson_tail(M, x) +
                                jr.diagnostics.tail_estimate;
    } else {
        // Direct finite-volume identity j^(m) = z^m e^{-beta H} / Xi:
        //   ∫ j^(m)           = z^m m! I_m / Xi
        //   ∫ j^(m) log j^(m) = z^m m!/Xi [ (m log z - log Xi) I_m - beta H_m ]
        const Series& s = partition_series(hi);
        if (static_cast<int>(s.weight.size()) <= M) {
            std::ostringstream msg;
            msg << "janossy_table: m_max " << M << " exceeds retained series length "
                << s.weight.size() - 1;
            throw RefusalError(msg.str());
        }
        double zm = 1.0, fact = 1.0;
        for (int m = 0; m <= M; ++m) {
            auto ms = static_cast<std::size_t>(m);
            if (m > 0) {
                zm *= z;
                fact *= m;
            }
            double pref = zm * fact / xi;
            table.integral[ms] = pref * s.weight[ms];
            table.entropy_integrand[ms] =
                pref * ((m * std::log(z) - log_xi) * s.weight[ms] -
                        params_.beta * s.h_weight[ms]);
        }
        table.tail_diagnostic = poisson_tail(M, x);
    }

    KahanSum norm;
    double fact = 1.0;
    for (int m = 0; m <= M; ++m) {
        if (m > 0) fact *= m;
        norm.add(table.integral[static_cast<std::size_t>(m)] / fact);
    }
    table.normalization_defect = std::abs(1.0 - norm.value());
    return table;
}

} // namespace hendinv
