#include "hendinv/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "hendinv/errors.hpp"
#include "hendinv/gcmc.hpp"

namespace hendinv {

namespace {

double surface_measure(int dim) {
    switch (dim) {
    case 1:
        return 2.0;
    case 2:
        return 2.0 * std::numbers::pi;
    case 3:
        return 4.0 * std::numbers::pi;
    default:
        throw ConfigError("surface_measure: dim must be 1, 2 or 3");
    }
}

// Range of u over a bin, probed at sub-midpoints; used for the midpoint-rule
// bias bound. Only finite values enter (the caller has excluded core bins).
std::pair<double, double> u_range(const PairPotential& pot, double lo, double hi) {
    double umin = HUGE_VAL, umax = -HUGE_VAL;
    const int sub = 8;
    for (int i = 0; i < sub; ++i) {
        double r = lo + (hi - lo) * (i + 0.5) / sub;
        Energy e = pot.evaluate(r);
        if (e.is_infinite()) continue;
        umin = std::min(umin, e.value());
        umax = std::max(umax, e.value());
    }
    if (umin > umax) return {0.0, 0.0};
    return {umin, umax};
}

} // namespace

SpecificEnergy specific_energy(const PairPotential& pot,
                               const CorrelationEstimate& estimate, int dim,
                               EnergyPolicy policy) {
    SpecificEnergy out;
    const Binning& binning = estimate.binning;
    const double core = pot.hard_core_radius();

    double sum = 0.0, quad = 0.0;
    for (std::size_t bin = 0; bin < binning.bins; ++bin) {
        const double lo = binning.lo(bin), hi = binning.hi(bin);
        const double rho2 = estimate.rho2[bin];
        if (hi <= core) {
            // Inside the hard core u = +infinity; rho2 must vanish there and
            // the bin contributes exactly 0 (the convention inf * 0 = 0 is
            // only invoked for exactly-zero mass).
            if (rho2 != 0.0) {
                if (policy == EnergyPolicy::strict_same_system)
                    throw std::logic_error(
                        "specific_energy: nonzero rho2 inside the hard core");
                out.infinite = true;
                return out;
            }
            continue;
        }
        // Clip a straddling bin to the part outside the core.
        const double a = std::max(lo, core);
        const double mid = 0.5 * (a + hi);
        Energy u = pot.evaluate(mid);
        if (u.is_infinite())
            throw std::logic_error("specific_energy: infinite u outside the core");
        const double shell = shell_volume(dim, a, hi);
        sum += 0.5 * u.value() * rho2 * shell;
        auto [umin, umax] = u_range(pot, a, hi);
        quad += 0.5 * ((umax - umin) * rho2 +
                       std::abs(u.value()) * estimate.rho2_err[bin]) *
                shell;
    }
    out.value = sum;
    out.quad_bound = quad;

    // psi-tail beyond r_max, Ruelle-controlled. A truncated potential has no
    // tail once the bins cover the cutoff.
    if (pot.cutoff_radius() <= binning.r_max) {
        out.tail_bound = 0.0;
    } else {
        const auto& cert = pot.certificate();
        if (!cert)
            throw RefusalError(
                "specific_energy: bins end before the cutoff and no psi "
                "certificate is attached");
        const double d = static_cast<double>(dim);
        if (cert->q <= d)
            throw RefusalError("specific_energy: psi tail integral diverges (q <= d)");
        if (binning.r_max < cert->r0)
            throw RefusalError("specific_energy: psi certificate only valid beyond r0");
        const double xi = ruelle_bound_fit(estimate).xi;
        out.tail_bound = 0.5 * xi * xi * cert->c2 * surface_measure(dim) *
                         std::pow(binning.r_max, d - cert->q) / (cert->q - d);
    }
    return out;
}

FiniteVolumeEnergy specific_energy_finite_volume(const SampleSet& samples,
                                                 const PairPotential& pot,
                                                 const BoxSpec& box) {
    if (samples.frames.empty())
        throw RefusalError("specific_energy_finite_volume: empty sample set");
    const std::size_t nf = samples.frames.size();
    const std::size_t nb = std::min<std::size_t>(32, nf);
    std::vector<Accumulator> blocks(nb);
    for (std::size_t f = 0; f < nf; ++f) {
        Configuration cfg{samples.frames[f].positions, box};
        Energy h = hamiltonian(cfg, pot);
        if (h.is_infinite())
            throw std::logic_error("specific_energy_finite_volume: overlapping frame");
        blocks[(f * nb) / nf].add(h.value() / box.volume());
    }
    BlockStats s = block_stats(blocks);
    return {s.mean, s.sigma, s.sigma_defined};
}

SpecificEntropy specific_entropy(const JanossyTable& table, const BoxSpec& box,
                                 double defect_tolerance) {
    if (table.normalization_defect > defect_tolerance) {
        std::ostringstream msg;
        msg << "specific_entropy: normalization defect " << table.normalization_defect
            << " above tolerance " << defect_tolerance;
        throw RefusalError(msg.str());
    }
    SpecificEntropy out;
    double fact = 1.0;
    double sum = 0.0;
    for (int m = 0; m <= table.m_max; ++m) {
        if (m > 0) fact *= m;
        sum += table.entropy_integrand[static_cast<std::size_t>(m)] / fact;
    }
    out.value = sum / box.volume();
    out.truncation = table.tail_diagnostic / box.volume();
    out.normalization_defect = table.normalization_defect;
    return out;
}

double grand_potential(double beta, double mu, double rho, double energy,
                       double entropy) {
    return mu * rho - energy - entropy / beta;
}

GapResult variational_gap(const PairPotential& u, ValueWithBound pressure_u,
                          const TrialEnsemble& trial, double beta, double mu) {
    if (trial.beta != beta || trial.mu != mu)
        throw ConfigError("variational_gap: mismatched beta or mu between arguments");
    GapResult out;
    SpecificEnergy cross =
        specific_energy(u, trial.rho2, trial.rho2.dim, EnergyPolicy::cross);
    if (cross.infinite) {
        // Omega(u, P_v) = -infinity; the gap is +infinity.
        out.infinite = true;
        out.gap = HUGE_VAL;
        return out;
    }
    double omega = grand_potential(beta, mu, trial.rho, cross.value, trial.entropy);
    out.gap = pressure_u.value - omega;
    out.sigma = pressure_u.bound + std::abs(mu) * trial.rho_err +
                cross.quad_bound + cross.tail_bound + trial.entropy_err / beta;
    return out;
}

CrossCheckResult henderson_cross_check(const PairPotential& u,
                                       const PairPotential& v,
                                       const CorrelationEstimate& rho2_u,
                                       const CorrelationEstimate& rho2_v,
                                       int dim) {
    if (rho2_u.binning.bins != rho2_v.binning.bins ||
        rho2_u.binning.r_max != rho2_v.binning.r_max)
        throw ConfigError("henderson_cross_check: binning mismatch");

    CrossCheckResult out;
    struct Term {
        const PairPotential* pot;
        const CorrelationEstimate* table;
        double sign;
        const char* name;
    };
    const Term terms[] = {
        {&u, &rho2_v, -1.0, "E(u,P_v)"},
        {&u, &rho2_u, +1.0, "E(u,P_u)"},
        {&v, &rho2_u, -1.0, "E(v,P_u)"},
        {&v, &rho2_v, +1.0, "E(v,P_v)"},
    };
    double sum = 0.0;
    for (const Term& t : terms) {
        SpecificEnergy e = specific_energy(*t.pot, *t.table, dim, EnergyPolicy::cross);
        if (e.infinite) {
            out.infinite = true;
            if (!out.infinite_terms.empty()) out.infinite_terms += ", ";
            out.infinite_terms += t.name;
            continue;
        }
        sum += t.sign * e.value;
    }
    out.value = out.infinite ? 0.0 : sum;
    return out;
}

double ThermoReport::identity_residual() const {
    if (!has_entropy) return 0.0;
    double lhs = grand_potential(beta, mu, rho, energy, entropy);
    return std::abs(omega - lhs) / std::max(1.0, std::abs(omega));
}

} // namespace hendinv
