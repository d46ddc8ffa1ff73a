#ifndef HENDINV_ENERGY_HPP
#define HENDINV_ENERGY_HPP

#include <cassert>
#include <cmath>

namespace hendinv {

// Extended-real energy value: a finite double or +infinity.
//
// +infinity is a dedicated flag, never a floating sentinel, so it cannot
// leak into ordinary arithmetic. Any sum touching +infinity is +infinity.
// -infinity never occurs in lawful states (overlapping configurations are
// never occupied), so it is not representable.
class Energy {
public:
    constexpr Energy() = default;
    constexpr explicit Energy(double v) : value_(v) {}

    static constexpr Energy infinite() {
        Energy e;
        e.infinite_ = true;
        e.value_ = 0.0;
        return e;
    }

    constexpr bool is_infinite() const { return infinite_; }

    // Finite value; must not be called on +infinity.
    constexpr double value() const {
        assert(!infinite_);
        return value_;
    }

    // Finite value, or +HUGE_VAL for +infinity. For display only.
    double as_double() const {
        return infinite_ ? HUGE_VAL : value_;
    }

    Energy& operator+=(Energy rhs) {
        if (rhs.infinite_) infinite_ = true;
        if (!infinite_) value_ += rhs.value_;
        return *this;
    }

    friend Energy operator+(Energy a, Energy b) {
        a += b;
        return a;
    }

    // Difference a - b for finite b only (ordinary move bookkeeping).
    friend Energy operator-(Energy a, Energy b) {
        assert(!b.is_infinite());
        if (a.infinite_) return a;
        return Energy(a.value_ - b.value_);
    }

    friend bool operator==(Energy a, Energy b) {
        if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
        return a.value_ == b.value_;
    }

    // Boltzmann weight exp(-beta * E); exactly 0 for +infinity.
    double boltzmann(double beta) const {
        return infinite_ ? 0.0 : std::exp(-beta * value_);
    }

private:
    double value_ = 0.0;
    bool infinite_ = false;
};

} // namespace hendinv

#endif
