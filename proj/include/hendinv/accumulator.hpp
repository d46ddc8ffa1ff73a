#ifndef HENDINV_ACCUMULATOR_HPP
#define HENDINV_ACCUMULATOR_HPP

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace hendinv {

// Running mean/variance accumulator (Welford's update).
class Accumulator {
public:
    void add(double x) {
        ++count_;
        double t = x - mean_;
        mean_ += t / static_cast<double>(count_);
        m2_ += t * (x - mean_);
    }

    std::size_t count() const { return count_; }

    double mean() const {
        assert(count_ > 0);
        return mean_;
    }

    double variance() const {
        assert(count_ > 1);
        return m2_ / static_cast<double>(count_ - 1);
    }

    double std_error() const {
        return std::sqrt(variance() / static_cast<double>(count_));
    }

private:
    std::size_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Block-averaging estimate: mean of per-block means and the standard error
// across blocks. sigma_defined is false for fewer than two nonempty blocks.
struct BlockStats {
    double mean = 0.0;
    double sigma = 0.0;
    std::size_t blocks = 0;
    bool sigma_defined = false;
};

inline BlockStats block_stats(const std::vector<Accumulator>& blocks) {
    Accumulator over_blocks;
    for (const auto& b : blocks)
        if (b.count() > 0) over_blocks.add(b.mean());
    BlockStats s;
    s.blocks = over_blocks.count();
    if (s.blocks == 0) return s;
    s.mean = over_blocks.mean();
    if (s.blocks > 1) {
        s.sigma = over_blocks.std_error();
        s.sigma_defined = true;
    }
    return s;
}

} // namespace hendinv

#endif
