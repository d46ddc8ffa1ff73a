#ifndef HENDINV_ESTIMATORS_HPP
#define HENDINV_ESTIMATORS_HPP

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "hendinv/system.hpp"

namespace hendinv {

struct SampleSet; // gcmc.hpp

// Uniform radial bins on [0, r_max).
struct Binning {
    std::size_t bins = 200;
    double r_max = 4.0;

    double width() const { return r_max / static_cast<double>(bins); }
    double lo(std::size_t i) const { return width() * static_cast<double>(i); }
    double hi(std::size_t i) const { return width() * static_cast<double>(i + 1); }
    double mid(std::size_t i) const { return 0.5 * (lo(i) + hi(i)); }
    // Index of the bin containing r, or bins for r >= r_max.
    std::size_t index(double r) const {
        if (r < 0.0 || r >= r_max) return bins;
        auto i = static_cast<std::size_t>(r / width());
        return i < bins ? i : bins - 1;
    }
};

// d-dimensional measure of the shell {r_lo <= |y| < r_hi}.
double shell_volume(int dim, double r_lo, double r_hi);

enum class Provenance { sampled, oracle };

// Binned pair correlation rho2(r) with per-bin uncertainty. For sampled
// estimates sigma is a block standard error; for oracle tables it is a
// deterministic quadrature/truncation bound.
struct CorrelationEstimate {
    Binning binning;
    std::vector<double> rho2;
    std::vector<double> rho2_err;
    double rho1 = 0.0;
    double rho1_err = 0.0;
    bool rho1_err_defined = true;
    std::size_t frames = 0;
    Boundary boundary = Boundary::periodic;
    int dim = 1;
    double core_subbox_margin = 0.0; // free mode window margin (= r_max)
    Provenance provenance = Provenance::sampled;
    // Bookkeeping: raw ordered-pair count recorded per bin (sampled mode).
    std::vector<double> pair_counts;
};

struct RdfCurve {
    std::vector<double> r_mid;
    std::vector<double> g;
    std::vector<double> g_err;
};

// <N>/|Lambda| with block standard error. In free mode an optional core
// sub-box margin discards the wall layer.
struct DensityEstimate {
    double rho = 0.0;
    double sigma = 0.0;
    bool sigma_defined = true;
};
DensityEstimate density_estimate(const SampleSet& samples, const BoxSpec& box,
                                 double core_margin = 0.0);

CorrelationEstimate pair_correlation_estimate(const SampleSet& samples,
                                              const BoxSpec& box,
                                              const Binning& binning,
                                              double potential_core = 0.0);

// g(r) = rho2 / rho1^2 with first-order error propagation.
RdfCurve rdf(const CorrelationEstimate& estimate);

// One bounded test function on the probe domain.
struct TestFunction {
    std::string name;
    std::function<double(const Point&)> f;
};

struct GnzResidual {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    double sigma = 0.0;
};

// Single-insertion Georgii-Nguyen-Zessin residual on the centered cube
// Delta of half-width `delta_half_width`:
//   <sum_{x in gamma ∩ Delta} f(x)>  vs  z ∫_Delta f(x) <e^{-beta W(x;gamma)}> dx.
// Both sides are estimated per frame; sigma is the block standard error of
// the per-frame difference.
std::vector<GnzResidual> gnz_residual(const SampleSet& samples, const BoxSpec& box,
                                      double beta, double mu,
                                      const PairPotential& pot,
                                      const std::vector<TestFunction>& fs,
                                      double delta_half_width,
                                      int quad_points = 16);

struct RuelleFit {
    double xi = 0.0;
    std::size_t argmax_bin = 0;
};

// Smallest xi with rho1 <= xi and sup_bins rho2 <= xi^2.
RuelleFit ruelle_bound_fit(const CorrelationEstimate& estimate);

} // namespace hendinv

#endif
