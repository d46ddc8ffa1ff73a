#include "hendinv/numeric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace hendinv {

namespace {

template <unsigned N>
GaussRule make_rule() {
    using G = boost::math::quadrature::gauss<double, N>;
    GaussRule r;
    // boost stores only the nonnegative half of the symmetric rule.
    const auto& half_x = G::abscissa();
    const auto& half_w = G::weights();
    for (std::size_t i = half_x.size(); i-- > 0;) {
        if (half_x[i] > 0.0) {
            r.nodes.push_back(-half_x[i]);
            r.weights.push_back(half_w[i]);
        }
    }
    for (std::size_t i = 0; i < half_x.size(); ++i) {
        r.nodes.push_back(half_x[i]);
        r.weights.push_back(half_w[i]);
    }
    return r;
}

} // namespace

const GaussRule& gauss_rule(int order) {
    static const std::map<int, GaussRule> rules = {
        {4, make_rule<4>()},   {8, make_rule<8>()},   {12, make_rule<12>()},
        {16, make_rule<16>()}, {24, make_rule<24>()}, {32, make_rule<32>()},
    };
    auto it = rules.lower_bound(order);
    if (it == rules.end()) --it;
    return it->second;
}

double gamma_p(double a, double x) { return boost::math::gamma_p(a, x); }
double gamma_q(double a, double x) { return boost::math::gamma_q(a, x); }

double poisson_tail(int n, double x) {
    if (x <= 0.0) return 0.0;
    // sum_{N > n} x^N/N! = e^x * P(n+1, x)
    return std::exp(x) * gamma_p(static_cast<double>(n) + 1.0, x);
}

double chi_square_pvalue(double stat, int dof) {
    if (stat <= 0.0) return 1.0;
    return gamma_q(0.5 * static_cast<double>(dof), 0.5 * stat);
}

std::size_t edit_distance(std::span<const char> a, std::span<const char> b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

} // namespace hendinv
