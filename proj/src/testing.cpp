#include "qltt/testing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qltt/core.hpp"

namespace qltt {

namespace {

void require_finite(std::span<const double> xs) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i])) {
            throw Error(ErrorCode::non_finite_value,
                        "risk sample " + std::to_string(i) + " is not finite");
        }
    }
}

void require_sorted(std::span<const double> xs) {
    if (!std::is_sorted(xs.begin(), xs.end())) {
        throw Error(ErrorCode::unsorted_input, "risk sample is not sorted ascending");
    }
}

void require_q(double q) {
    if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCode::invalid_range, "q must lie in (0, 1)");
}

// Bound evaluated on already validated sorted input.
double order_statistic_bound(std::span<const double> sorted, double q, double epsilon) {
    const auto p = bound_params(sorted.size(), q, epsilon);
    if (p.vacuous()) return std::numeric_limits<double>::infinity();
    return sorted[p.index - 1];
}

}  // namespace

double empirical_mean_risk(std::span<const double> risks) {
    if (risks.empty()) throw Error(ErrorCode::empty_input, "cannot average an empty risk sample");
    require_finite(risks);
    double sum = 0.0;
    for (double r : risks) sum += r;
    return sum / static_cast<double>(risks.size());
}

double hoeffding_p_value(double mean_risk, std::size_t n, double alpha) {
    if (n == 0) throw Error(ErrorCode::invalid_range, "Hoeffding p-value needs n >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw Error(ErrorCode::invalid_alpha, "alpha must lie in [0, 1] for the mean method");
    }
    if (!(mean_risk >= 0.0 && mean_risk <= 1.0)) {
        throw Error(ErrorCode::unbounded_risk, "mean risk outside [0, 1]; Hoeffding needs unit-bounded risk");
    }
    const double gap = std::max(0.0, alpha - mean_risk);
    return std::exp(-2.0 * static_cast<double>(n) * gap * gap);
}

QuantileBoundParams bound_params(std::size_t n, double q, double epsilon) {
    if (n == 0) throw Error(ErrorCode::invalid_range, "bound needs n >= 1");
    require_q(q);
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw Error(ErrorCode::invalid_range, "epsilon must lie in (0, 1]");
    }
    const double nd = static_cast<double>(n);
    QuantileBoundParams p;
    p.n = n;
    p.q = q;
    p.epsilon = epsilon;
    p.r_n = (1.4 * std::log(std::log(2.1 * nd)) + std::log(10.0 / epsilon)) / nd;
    p.q_star = q - 1.5 * std::sqrt(q * (1.0 - q) * p.r_n) - 0.8 * p.r_n;
    const double pos = std::floor(nd * (1.0 - p.q_star));
    // q* <= q < 1, so pos >= floor(n (1 - q)) >= 0.
    p.index = static_cast<std::size_t>(pos);
    return p;
}

double quantile_upper_bound(std::span<const double> sorted_risks, double q, double epsilon) {
    if (sorted_risks.empty()) throw Error(ErrorCode::invalid_range, "bound needs n >= 1");
    require_finite(sorted_risks);
    require_sorted(sorted_risks);
    return order_statistic_bound(sorted_risks, q, epsilon);
}

double quantile_p_value_sorted(std::span<const double> sorted, double q, double alpha, double tol) {
    if (sorted.empty()) throw Error(ErrorCode::invalid_range, "p-value needs n >= 1");
    require_q(q);
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw Error(ErrorCode::invalid_range, "alpha must be finite and >= 0");
    }
    if (!(tol > 0.0)) throw Error(ErrorCode::invalid_range, "tol must be positive");
    require_finite(sorted);
    require_sorted(sorted);

    // The bound is non-increasing in epsilon, so {eps : bound(eps) < alpha}
    // is an interval reaching up to 1.
    auto below = [&](double eps) { return order_statistic_bound(sorted, q, eps) < alpha; };
    if (!below(1.0)) return 1.0;
    double lo = kMinEpsilon;
    if (below(lo)) return lo;
    double hi = 1.0;
    // Invariant: !below(lo) && below(hi). Returning hi keeps the result on
    // the conservative side of the infimum.
    while (hi - lo > tol) {
        const double mid = lo + 0.5 * (hi - lo);
        if (below(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

double quantile_p_value(std::span<const double> risks, double q, double alpha, double tol) {
    if (risks.empty()) throw Error(ErrorCode::invalid_range, "p-value needs n >= 1");
    require_finite(risks);
    std::vector<double> sorted(risks.begin(), risks.end());
    std::sort(sorted.begin(), sorted.end());
    return quantile_p_value_sorted(sorted, q, alpha, tol);
}

}  // namespace qltt
