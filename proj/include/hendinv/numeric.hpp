#ifndef HENDINV_NUMERIC_HPP
#define HENDINV_NUMERIC_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace hendinv {

// Neumaier compensated accumulator. Gives order-robust sums for quadrature
// accumulation so results are stable at documented tolerances.
class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Gauss-Legendre rule on [-1, 1]; nodes/weights for a small set of orders.
// `order` is rounded up to the nearest supported order {4, 8, 12, 16, 24, 32}.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussRule& gauss_rule(int order);

// Regularized incomplete gamma functions P(a, x) (lower) and Q(a, x) (upper).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Poisson upper tail sum_{N > n} x^N / N!  (closed form via regularized
// incomplete gamma: sum_{N<=n} x^N/N! = e^x Q(n+1, x)).
double poisson_tail(int n, double x);

// Chi-square upper p-value with k degrees of freedom.
double chi_square_pvalue(double stat, int dof);

// Damerau-free Levenshtein edit distance, for config-key suggestions.
std::size_t edit_distance(std::span<const char> a, std::span<const char> b);

} // namespace hendinv

#endif
