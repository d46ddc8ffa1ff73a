#ifndef HENDINV_GCMC_HPP
#define HENDINV_GCMC_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hendinv/accumulator.hpp"
#include "hendinv/potentials.hpp"
#include "hendinv/rng.hpp"
#include "hendinv/system.hpp"

namespace hendinv {

struct MoveMix {
    double p_insert = 0.25;
    double p_delete = 0.25;
    double p_displace = 0.5;
};

struct ChainSpec {
    BoxSpec box;
    double beta = 1.0;
    double mu = 0.0;
    PairPotential potential = PairPotential::ideal_gas();
    MoveMix moves;
    double max_displacement = 0.5;
    bool auto_tune = true;
    std::uint64_t steps = 0;   // total, burn-in included
    std::uint64_t burn_in = 0;
    std::uint64_t thin = 1;
    std::size_t blocks = 32;
    std::uint64_t seed = 0;

    double activity() const; // z = e^{beta mu}
    void validate() const;
};

struct AcceptanceCounters {
    std::uint64_t insert_attempts = 0, insert_accepts = 0;
    std::uint64_t delete_attempts = 0, delete_accepts = 0;
    std::uint64_t displace_attempts = 0, displace_accepts = 0;
};

enum class MoveKind { insert, remove, displace };

struct MoveRecord {
    MoveKind kind = MoveKind::displace;
    std::size_t n_before = 0;
    bool accepted = false;
    bool proposal_valid = true; // false: empty deletion / out-of-box displacement
};

// Closed-form Metropolis acceptance probabilities; step() uses exactly these.
double insertion_acceptance(const ChainSpec& spec, std::size_t n_before, Energy dE);
double deletion_acceptance(const ChainSpec& spec, std::size_t n_before, Energy dE);
double displacement_acceptance(const ChainSpec& spec, Energy dE);

class MarkovChainState {
public:
    explicit MarkovChainState(const ChainSpec& spec);

    MoveRecord step(const ChainSpec& spec);

    const Configuration& configuration() const { return config_; }
    double current_energy() const { return energy_; }
    const AcceptanceCounters& counters() const { return counters_; }
    AcceptanceCounters& counters() { return counters_; }
    double max_displacement() const { return max_displacement_; }
    void set_max_displacement(double d) { max_displacement_ = d; }
    std::uint64_t steps_taken() const { return steps_taken_; }

    // Recompute the energy from scratch; throws if the incremental value has
    // drifted beyond 1e-8 relative.
    void resync_energy(const ChainSpec& spec);

private:
    Configuration config_;
    CellList cells_;
    Rng rng_;
    AcceptanceCounters counters_;
    double energy_ = 0.0;
    double max_displacement_ = 0.5;
    std::uint64_t steps_taken_ = 0;
};

struct Frame {
    std::uint64_t step = 0;
    std::vector<Point> positions;
};

struct SampleSet {
    std::vector<Frame> frames;
    BoxSpec box;
    double beta = 1.0;
    double mu = 0.0;
    std::size_t blocks = 0;
    std::vector<Accumulator> block_n;      // per-block particle number
    std::vector<Accumulator> block_energy; // per-block energy
    AcceptanceCounters counters;
    bool ergodicity_warning = false; // a full block saw no accepted insert/delete
    double tuned_displacement = 0.0;
    std::vector<std::pair<std::uint64_t, double>> tuning_record;
    std::uint64_t seed = 0;
    std::string rng_name;

    BlockStats n_stats() const { return block_stats(block_n); }
    BlockStats energy_stats() const { return block_stats(block_energy); }

    // Associative merge: frames and block lists concatenate.
    void merge(const SampleSet& other);
};

using MoveObserver = std::function<void(const MoveRecord&)>;

// Runs one chain: burn-in (with optional displacement tuning, frozen before
// measurement), then measurement with frames every `thin` steps and
// per-block means of N and H. Bit-reproducible for a given (seed, spec).
SampleSet run(const ChainSpec& spec, const MoveObserver& observer = nullptr);

// `workers` independent replicas with seeds derived from spec.seed, merged
// in replica order (result independent of scheduling).
SampleSet run_replicated(const ChainSpec& spec, int workers);

} // namespace hendinv

#endif
