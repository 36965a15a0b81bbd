// oracles.hpp
//
// Reference computations used only by tests. They share no code path with
// the library routines they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace qltt::oracle {

// Exact inverse of the order-statistic bound: the smallest epsilon at which
// the floor(n (1 - q*))-th order statistic drops strictly below alpha.
//
// With k = #{x < alpha}, the bound is < alpha iff q* > max(0, 1 - (k+1)/n).
// q*(eps) = target is a quadratic in s = sqrt(r_n):
//   0.8 s^2 + 1.5 sqrt(q (1 - q)) s + (target - q) = 0,
// and r_n = (1.4 ln ln(2.1 n) + ln(10 / eps)) / n gives eps back.
// Clamped into [lo, 1] like the bisection search.
inline double exact_quantile_p_value(std::vector<double> xs, double q, double alpha,
                                     double lo = 1e-12) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    const auto k = static_cast<double>(std::lower_bound(xs.begin(), xs.end(), alpha) - xs.begin());
    if (k == 0.0) return 1.0;
    const double target = std::max(0.0, 1.0 - (k + 1.0) / n);
    const long double a = 0.8L;
    const long double b = 1.5L * std::sqrt(static_cast<long double>(q) * (1.0L - q));
    const long double c = static_cast<long double>(target) - q;
    // Target at or above q: no r_n > 0 reaches it, the bound never drops.
    if (c >= 0.0L) return 1.0;
    const long double s = (-b + std::sqrt(b * b - 4.0L * a * c)) / (2.0L * a);
    const long double r = s * s;
    const long double log_ten_over_eps =
        r * n - 1.4L * std::log(std::log(2.1L * static_cast<long double>(n)));
    const long double eps = 10.0L * std::exp(-log_ten_over_eps);
    if (eps >= 1.0L) return 1.0;
    return std::max(static_cast<double>(eps), lo);
}

// Fixed sequence testing by enumeration of prefixes: the longest prefix of
// `ordering` whose p-values are all <= delta.
inline std::vector<std::size_t> fst_reference(std::span<const double> p,
                                              std::span<const std::size_t> ordering, double delta) {
    std::size_t best = 0;
    for (std::size_t len = 0; len <= ordering.size(); ++len) {
        bool ok = true;
        for (std::size_t i = 0; i < len; ++i) ok = ok && p[ordering[i]] <= delta;
        if (ok) best = len;
    }
    return {ordering.begin(), ordering.begin() + static_cast<std::ptrdiff_t>(best)};
}

// 3-sigma binomial margin for a frequency over `trials` with rate u.
inline double three_sigma(double u, std::size_t trials) {
    return 3.0 * std::sqrt(u * (1.0 - u) / static_cast<double>(trials));
}

}  // namespace qltt::oracle
