#include "hendinv/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hendinv/accumulator.hpp"
#include "hendinv/errors.hpp"
#include "hendinv/gcmc.hpp"
#include "hendinv/numeric.hpp"

namespace hendinv {

double shell_volume(int dim, double r_lo, double r_hi) {
    switch (dim) {
    case 1:
        return 2.0 * (r_hi - r_lo);
    case 2:
        return std::numbers::pi * (r_hi * r_hi - r_lo * r_lo);
    case 3:
        return 4.0 / 3.0 * std::numbers::pi *
               (r_hi * r_hi * r_hi - r_lo * r_lo * r_lo);
    default:
        throw ConfigError("shell_volume: dim must be 1, 2 or 3");
    }
}

namespace {

constexpr std::size_t kEstimatorBlocks = 32;

std::size_t frame_block(std::size_t frame, std::size_t frames, std::size_t blocks) {
    return (frame * blocks) / frames;
}

bool in_window(const Point& p, const BoxSpec& box, double margin) {
    for (int k = 0; k < box.dim; ++k)
        if (std::abs(p[static_cast<std::size_t>(k)]) > box.half_width - margin)
            return false;
    return true;
}

double window_volume(const BoxSpec& box, double margin) {
    double v = 1.0;
    for (int k = 0; k < box.dim; ++k) v *= 2.0 * (box.half_width - margin);
    return v;
}

} // namespace

DensityEstimate density_estimate(const SampleSet& samples, const BoxSpec& box,
                                 double core_margin) {
    if (samples.frames.empty())
        throw RefusalError("density_estimate: empty sample set");
    double margin = (box.boundary == Boundary::free) ? core_margin : 0.0;
    if (margin >= box.half_width)
        throw ConfigError("density_estimate: margin leaves no core sub-box");
    const double volume = window_volume(box, margin);

    const std::size_t nf = samples.frames.size();
    const std::size_t nb = std::min(kEstimatorBlocks, nf);
    std::vector<Accumulator> blocks(nb);
    for (std::size_t f = 0; f < nf; ++f) {
        std::size_t count = 0;
        for (const auto& p : samples.frames[f].positions)
            if (margin == 0.0 || in_window(p, box, margin)) ++count;
        blocks[frame_block(f, nf, nb)].add(static_cast<double>(count) / volume);
    }
    BlockStats s = block_stats(blocks);
    DensityEstimate out;
    out.rho = s.mean;
    out.sigma = s.sigma;
    out.sigma_defined = s.sigma_defined;
    return out;
}

CorrelationEstimate pair_correlation_estimate(const SampleSet& samples,
                                              const BoxSpec& box,
                                              const Binning& binning,
                                              double potential_core) {
    if (samples.frames.empty())
        throw RefusalError("pair_correlation_estimate: empty sample set");
    if (box.boundary == Boundary::periodic) {
        if (binning.r_max > box.half_width)
            throw ConfigError("pair_correlation: r_max must be <= ell in periodic mode");
    } else {
        if (binning.r_max >= box.half_width)
            throw ConfigError("pair_correlation: r_max must be < ell in free mode");
    }
    const double margin = (box.boundary == Boundary::free) ? binning.r_max : 0.0;
    const double wvol = window_volume(box, margin);

    const std::size_t nf = samples.frames.size();
    const std::size_t nb = std::min(kEstimatorBlocks, nf);

    // counts[block][bin] of ordered pairs; both (x,y) and (y,x) contribute.
    std::vector<std::vector<double>> counts(nb, std::vector<double>(binning.bins, 0.0));
    std::vector<std::size_t> frames_in_block(nb, 0);

    for (std::size_t f = 0; f < nf; ++f) {
        const auto& pos = samples.frames[f].positions;
        std::size_t b = frame_block(f, nf, nb);
        ++frames_in_block[b];
        for (std::size_t i = 0; i < pos.size(); ++i) {
            if (margin > 0.0 && !in_window(pos[i], box, margin)) continue;
            for (std::size_t j = 0; j < pos.size(); ++j) {
                if (j == i) continue;
                double r = box.distance(pos[i], pos[j]);
                std::size_t bin = binning.index(r);
                if (bin < binning.bins) counts[b][bin] += 1.0;
            }
        }
    }

    CorrelationEstimate est;
    est.binning = binning;
    est.dim = box.dim;
    est.boundary = box.boundary;
    est.core_subbox_margin = margin;
    est.frames = nf;
    est.provenance = Provenance::sampled;
    est.rho2.assign(binning.bins, 0.0);
    est.rho2_err.assign(binning.bins, 0.0);
    est.pair_counts.assign(binning.bins, 0.0);

    for (std::size_t bin = 0; bin < binning.bins; ++bin) {
        const double shell = shell_volume(box.dim, binning.lo(bin), binning.hi(bin));
        std::vector<Accumulator> blocks(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            if (frames_in_block[b] == 0) continue;
            double norm = static_cast<double>(frames_in_block[b]) * wvol * shell;
            blocks[b].add(counts[b][bin] / norm);
            est.pair_counts[bin] += counts[b][bin];
        }
        BlockStats s = block_stats(blocks);
        est.rho2[bin] = s.mean;
        est.rho2_err[bin] = s.sigma_defined ? s.sigma : 0.0;
        // Bins strictly inside a hard core can never receive pairs.
        if (binning.hi(bin) <= potential_core && est.pair_counts[bin] != 0.0)
            throw std::logic_error("pair_correlation: pairs recorded inside the hard core");
    }

    DensityEstimate rho = density_estimate(samples, box, margin);
    est.rho1 = rho.rho;
    est.rho1_err = rho.sigma;
    est.rho1_err_defined = rho.sigma_defined;
    return est;
}

RdfCurve rdf(const CorrelationEstimate& estimate) {
    if (!(estimate.rho1 > 0.0))
        throw RefusalError("rdf: density is zero");
    const double rho1 = estimate.rho1;
    const double rho1_rel = estimate.rho1_err / rho1;
    RdfCurve curve;
    curve.r_mid.reserve(estimate.binning.bins);
    curve.g.reserve(estimate.binning.bins);
    curve.g_err.reserve(estimate.binning.bins);
    for (std::size_t bin = 0; bin < estimate.binning.bins; ++bin) {
        curve.r_mid.push_back(estimate.binning.mid(bin));
        double rho2 = estimate.rho2[bin];
        double g = rho2 / (rho1 * rho1);
        double err;
        if (rho2 > 0.0) {
            double rel2 = estimate.rho2_err[bin] / rho2;
            err = g * std::sqrt(rel2 * rel2 + 4.0 * rho1_rel * rho1_rel);
        } else {
            g = 0.0;
            err = estimate.rho2_err[bin] / (rho1 * rho1);
        }
        curve.g.push_back(g);
        curve.g_err.push_back(err);
    }
    return curve;
}

std::vector<GnzResidual> gnz_residual(const SampleSet& samples, const BoxSpec& box,
                                      double beta, double mu,
                                      const PairPotential& pot,
                                      const std::vector<TestFunction>& fs,
                                      double delta_half_width, int quad_points) {
    if (samples.frames.empty())
        throw RefusalError("gnz_residual: empty sample set");
    if (box.boundary == Boundary::free &&
        delta_half_width + pot.cutoff_radius() > box.half_width)
        throw ConfigError("gnz_residual: probe domain outside the core sub-box");
    if (delta_half_width > box.half_width)
        throw ConfigError("gnz_residual: probe domain outside the box");

    const double z = std::exp(beta * mu);
    const GaussRule& rule = gauss_rule(quad_points);

    // Product-Gauss nodes over Delta = [-w, w]^d.
    std::vector<Point> nodes;
    std::vector<double> weights;
    const double w = delta_half_width;
    std::size_t per_axis = rule.nodes.size();
    std::size_t total = 1;
    for (int k = 0; k < box.dim; ++k) total *= per_axis;
    for (std::size_t c = 0; c < total; ++c) {
        std::size_t t = c;
        Point p{0.0, 0.0, 0.0};
        double wt = 1.0;
        for (int k = 0; k < box.dim; ++k) {
            std::size_t i = t % per_axis;
            t /= per_axis;
            p[static_cast<std::size_t>(k)] = w * rule.nodes[i];
            wt *= w * rule.weights[i];
        }
        nodes.push_back(p);
        weights.push_back(wt);
    }

    const std::size_t nf = samples.frames.size();
    const std::size_t nb = std::min(kEstimatorBlocks, nf);

    std::vector<GnzResidual> out;
    for (const auto& tf : fs) {
        std::vector<Accumulator> lhs_blocks(nb), rhs_blocks(nb), diff_blocks(nb);
        for (std::size_t f = 0; f < nf; ++f) {
            const auto& pos = samples.frames[f].positions;
            Configuration cfg{pos, box};
            double lhs = 0.0;
            for (const auto& p : pos) {
                bool inside = true;
                for (int k = 0; k < box.dim; ++k)
                    if (std::abs(p[static_cast<std::size_t>(k)]) > w) inside = false;
                if (inside) lhs += tf.f(p);
            }
            double rhs = 0.0;
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                Energy wu = interaction_energy(nodes[i], cfg, pot);
                rhs += weights[i] * tf.f(nodes[i]) * wu.boltzmann(beta);
            }
            rhs *= z;
            std::size_t b = frame_block(f, nf, nb);
            lhs_blocks[b].add(lhs);
            rhs_blocks[b].add(rhs);
            diff_blocks[b].add(lhs - rhs);
        }
        BlockStats ls = block_stats(lhs_blocks);
        BlockStats rs = block_stats(rhs_blocks);
        BlockStats ds = block_stats(diff_blocks);
        GnzResidual res;
        res.name = tf.name;
        res.lhs = ls.mean;
        res.rhs = rs.mean;
        res.residual = ds.mean;
        res.sigma = ds.sigma;
        out.push_back(res);
    }
    return out;
}

RuelleFit ruelle_bound_fit(const CorrelationEstimate& estimate) {
    RuelleFit fit;
    double max_rho2 = 0.0;
    for (std::size_t bin = 0; bin < estimate.rho2.size(); ++bin) {
        if (estimate.rho2[bin] > max_rho2) {
            max_rho2 = estimate.rho2[bin];
            fit.argmax_bin = bin;
        }
    }
    fit.xi = std::max(estimate.rho1, std::sqrt(max_rho2));
    return fit;
}

} // namespace hendinv
