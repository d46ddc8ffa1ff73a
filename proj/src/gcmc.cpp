#include "hendinv/gcmc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "hendinv/errors.hpp"

namespace hendinv {

double ChainSpec::activity() const { return std::exp(beta * mu); }

void ChainSpec::validate() const {
    box.validate_against(potential);
    if (beta <= 0.0) throw ConfigError("chain: beta must be positive");
    double sum = moves.p_insert + moves.p_delete + moves.p_displace;
    if (std::abs(sum - 1.0) > 1e-12)
        throw ConfigError("chain: move probabilities must sum to 1");
    if (moves.p_insert < 0.0 || moves.p_delete < 0.0 || moves.p_displace < 0.0)
        throw ConfigError("chain: move probabilities must be nonnegative");
    if (moves.p_insert != moves.p_delete)
        throw ConfigError("chain: p_insert must equal p_delete");
    if (max_displacement <= 0.0)
        throw ConfigError("chain: max_displacement must be positive");
    if (blocks < 32) throw ConfigError("chain: blocks must be >= 32");
    if (burn_in > steps) throw ConfigError("chain: burn_in exceeds steps");
    if (thin == 0) throw ConfigError("chain: thin must be >= 1");
}

double insertion_acceptance(const ChainSpec& spec, std::size_t n_before, Energy dE) {
    if (dE.is_infinite()) return 0.0;
    double ratio = spec.activity() * spec.box.volume() /
                   static_cast<double>(n_before + 1) *
                   std::exp(-spec.beta * dE.value());
    return std::min(1.0, ratio);
}

double deletion_acceptance(const ChainSpec& spec, std::size_t n_before, Energy dE) {
    if (n_before == 0) return 0.0;
    if (dE.is_infinite()) return 0.0;
    double ratio = static_cast<double>(n_before) /
                   (spec.activity() * spec.box.volume()) *
                   std::exp(-spec.beta * dE.value());
    return std::min(1.0, ratio);
}

double displacement_acceptance(const ChainSpec& spec, Energy dE) {
    if (dE.is_infinite()) return 0.0;
    return std::min(1.0, std::exp(-spec.beta * dE.value()));
}

MarkovChainState::MarkovChainState(const ChainSpec& spec)
    : config_{{}, spec.box},
      cells_(spec.box, spec.potential.cutoff_radius()),
      rng_(spec.seed),
      max_displacement_(spec.max_displacement) {}

void MarkovChainState::resync_energy(const ChainSpec& spec) {
    Energy full = hamiltonian(config_, spec.potential);
    if (full.is_infinite())
        throw std::logic_error("gcmc: occupied state has infinite energy");
    double ref = std::max(1.0, std::abs(full.value()));
    if (std::abs(energy_ - full.value()) > 1e-8 * ref)
        throw std::logic_error("gcmc: incremental energy drifted beyond 1e-8");
    energy_ = full.value();
}

MoveRecord MarkovChainState::step(const ChainSpec& spec) {
    ++steps_taken_;
    MoveRecord rec;
    rec.n_before = config_.size();
    const double pick = rng_.uniform();

    if (pick < spec.moves.p_insert) {
        rec.kind = MoveKind::insert;
        ++counters_.insert_attempts;
        Point x{0.0, 0.0, 0.0};
        for (int k = 0; k < spec.box.dim; ++k)
            x[static_cast<std::size_t>(k)] =
                rng_.uniform(-spec.box.half_width, spec.box.half_width);
        Energy dE = delta_energy(config_, spec.potential, MoveInsert{x}, &cells_);
        double acc = insertion_acceptance(spec, config_.size(), dE);
        if (rng_.uniform() < acc) {
            rec.accepted = true;
            ++counters_.insert_accepts;
            cells_.insert(config_.size(), x);
            config_.positions.push_back(x);
            energy_ += dE.value();
        }
        return rec;
    }

    if (pick < spec.moves.p_insert + spec.moves.p_delete) {
        rec.kind = MoveKind::remove;
        ++counters_.delete_attempts;
        const std::size_t n = config_.size();
        if (n == 0) {
            rec.proposal_valid = false;
            return rec; // lawful no-op rejection
        }
        std::size_t i = rng_.uniform_index(n);
        Energy dE = delta_energy(config_, spec.potential, MoveDelete{i}, &cells_);
        double acc = deletion_acceptance(spec, n, dE);
        if (rng_.uniform() < acc) {
            rec.accepted = true;
            ++counters_.delete_accepts;
            cells_.erase(i, config_.positions[i]);
            if (i + 1 != n) {
                cells_.reindex(n - 1, i, config_.positions[n - 1]);
                config_.positions[i] = config_.positions[n - 1];
            }
            config_.positions.pop_back();
            energy_ += dE.value();
        }
        return rec;
    }

    rec.kind = MoveKind::displace;
    ++counters_.displace_attempts;
    const std::size_t n = config_.size();
    if (n == 0) {
        rec.proposal_valid = false;
        return rec;
    }
    std::size_t i = rng_.uniform_index(n);
    Point to = config_.positions[i];
    for (int k = 0; k < spec.box.dim; ++k)
        to[static_cast<std::size_t>(k)] +=
            rng_.uniform(-max_displacement_, max_displacement_);
    if (spec.box.boundary == Boundary::periodic) {
        to = spec.box.wrap(to);
    } else if (!spec.box.contains(to)) {
        rec.proposal_valid = false;
        return rec; // free boundary: moving out of the box rejects
    }
    Energy dE = delta_energy(config_, spec.potential, MoveDisplace{i, to}, &cells_);
    double acc = displacement_acceptance(spec, dE);
    if (rng_.uniform() < acc) {
        rec.accepted = true;
        ++counters_.displace_accepts;
        cells_.erase(i, config_.positions[i]);
        cells_.insert(i, to);
        config_.positions[i] = to;
        energy_ += dE.value();
    }
    return rec;
}

void SampleSet::merge(const SampleSet& other) {
    frames.insert(frames.end(), other.frames.begin(), other.frames.end());
    blocks += other.blocks;
    block_n.insert(block_n.end(), other.block_n.begin(), other.block_n.end());
    block_energy.insert(block_energy.end(), other.block_energy.begin(),
                        other.block_energy.end());
    counters.insert_attempts += other.counters.insert_attempts;
    counters.insert_accepts += other.counters.insert_accepts;
    counters.delete_attempts += other.counters.delete_attempts;
    counters.delete_accepts += other.counters.delete_accepts;
    counters.displace_attempts += other.counters.displace_attempts;
    counters.displace_accepts += other.counters.displace_accepts;
    ergodicity_warning = ergodicity_warning || other.ergodicity_warning;
}

SampleSet run(const ChainSpec& spec, const MoveObserver& observer) {
    spec.validate();
    MarkovChainState state(spec);

    SampleSet out;
    out.box = spec.box;
    out.beta = spec.beta;
    out.mu = spec.mu;
    out.blocks = spec.blocks;
    out.block_n.assign(spec.blocks, {});
    out.block_energy.assign(spec.blocks, {});
    out.seed = spec.seed;
    out.rng_name = Rng::generator_name();

    constexpr std::uint64_t resync_interval = 100000;
    constexpr std::uint64_t tune_window = 1000;

    // Burn-in; displacement step tuned toward 30-50% acceptance, then frozen
    // (tuning during measurement would break detailed balance).
    std::uint64_t window_attempts = 0, window_accepts = 0;
    for (std::uint64_t s = 0; s < spec.burn_in; ++s) {
        MoveRecord rec = state.step(spec);
        if (observer) observer(rec);
        if (rec.kind == MoveKind::displace) {
            ++window_attempts;
            if (rec.accepted) ++window_accepts;
        }
        if (spec.auto_tune && window_attempts >= tune_window) {
            double rate = static_cast<double>(window_accepts) /
                          static_cast<double>(window_attempts);
            double d = state.max_displacement();
            if (rate < 0.30) d *= 0.9;
            if (rate > 0.50) d *= 1.1;
            d = std::clamp(d, 1e-6 * spec.box.half_width, spec.box.half_width);
            state.set_max_displacement(d);
            out.tuning_record.emplace_back(s + 1, d);
            window_attempts = window_accepts = 0;
        }
        if (state.steps_taken() % resync_interval == 0) state.resync_energy(spec);
    }
    out.tuned_displacement = state.max_displacement();

    const std::uint64_t measure = spec.steps - spec.burn_in;
    std::uint64_t block_ins_del_accepts = 0;
    std::size_t prev_block = 0;
    for (std::uint64_t s = 0; s < measure; ++s) {
        MoveRecord rec = state.step(spec);
        if (observer) observer(rec);

        std::size_t block = static_cast<std::size_t>(
            (static_cast<unsigned __int128>(s) * spec.blocks) / measure);
        if (block != prev_block) {
            if (block_ins_del_accepts == 0) out.ergodicity_warning = true;
            block_ins_del_accepts = 0;
            prev_block = block;
        }
        if (rec.accepted &&
            (rec.kind == MoveKind::insert || rec.kind == MoveKind::remove))
            ++block_ins_del_accepts;

        out.block_n[block].add(static_cast<double>(state.configuration().size()));
        out.block_energy[block].add(state.current_energy());

        if ((s + 1) % spec.thin == 0)
            out.frames.push_back(Frame{state.steps_taken(),
                                       state.configuration().positions});
        if (state.steps_taken() % resync_interval == 0) state.resync_energy(spec);
    }
    if (measure > 0 && block_ins_del_accepts == 0) out.ergodicity_warning = true;
    out.counters = state.counters();
    return out;
}

SampleSet run_replicated(const ChainSpec& spec, int workers) {
    if (workers <= 1) return run(spec);
    std::vector<SampleSet> results(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int r = 0; r < workers; ++r) {
        pool.emplace_back([&, r]() {
            ChainSpec replica = spec;
            replica.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(r));
            results[static_cast<std::size_t>(r)] = run(replica);
        });
    }
    for (auto& t : pool) t.join();
    SampleSet merged = std::move(results.front());
    for (std::size_t r = 1; r < results.size(); ++r) merged.merge(results[r]);
    return merged;
}

} // namespace hendinv
