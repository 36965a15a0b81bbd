// testing.hpp
//
// Per-hyperparameter p-values.
//
// Mean risk: Hoeffding p-value exp(-2n (alpha - mean)_+^2), valid for risks
// bounded in [0, 1].
//
// Quantile risk: a one-sided upper confidence bound on the q-quantile built
// from a single order statistic. For sample size n, outage rate q and
// failure probability eps,
//
//     r_n   = (1.4 ln ln(2.1 n) + ln(10 / eps)) / n
//     q*    = q - 1.5 sqrt(q (1 - q) r_n) - 0.8 r_n
//     bound = floor(n (1 - q*))-th smallest sample (1-based)
//
// and Pr[R_q <= bound] >= 1 - eps. Inverting the bound over eps gives a
// p-value for H: R_q > alpha,
//
//     p = inf { eps in (0, 1] : bound(eps) < alpha }   (1 if the set is empty)
//
// The strict "<" is the event the validity argument actually controls; the
// alternative "bound(eps) >= alpha" reading collapses to 0 whenever
// bound(0+) >= alpha and is not a p-value.
#pragma once

#include <cstddef>
#include <span>

namespace qltt {

double empirical_mean_risk(std::span<const double> risks);

// Throws Error{unbounded_risk} for mean_risk outside [0,1],
// Error{invalid_alpha} for alpha outside [0,1], Error{invalid_range} for n == 0.
double hoeffding_p_value(double mean_risk, std::size_t n, double alpha);

struct QuantileBoundParams {
    std::size_t n = 0;
    double q = 0.0;
    double epsilon = 0.0;
    double r_n = 0.0;
    double q_star = 0.0;
    // floor(n (1 - q*)), 1-based; exceeds n when q* < 0.
    std::size_t index = 0;

    // The bound is +inf: q* <= 0 or the order statistic does not exist.
    bool vacuous() const noexcept { return q_star <= 0.0 || index > n || index < 1; }
};

QuantileBoundParams bound_params(std::size_t n, double q, double epsilon);

// sorted_risks must be ascending. Returns +inf in the vacuous regime.
double quantile_upper_bound(std::span<const double> sorted_risks, double q, double epsilon);

// Bisection search bracket on epsilon.
inline constexpr double kMinEpsilon = 1e-12;

double quantile_p_value(std::span<const double> risks, double q, double alpha,
                        double tol = 1e-9);

// Same as quantile_p_value for data already sorted ascending (not re-checked
// beyond a monotonicity scan).
double quantile_p_value_sorted(std::span<const double> sorted_risks, double q, double alpha,
                               double tol = 1e-9);

}  // namespace qltt
