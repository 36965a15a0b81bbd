// stats.hpp
#pragma once

#include <cstddef>
#include <span>

namespace qltt {

// inf { r : F_hat(r) >= 1 - q } over an ascending sample, i.e. the
// ceil(N (1 - q))-th smallest value.
double empirical_quantile(std::span<const double> sorted, double q);

struct BinomialInterval {
    double low = 0.0;
    double high = 1.0;
};

// Exact (Clopper-Pearson) two-sided interval for k successes out of n.
BinomialInterval clopper_pearson(std::size_t k, std::size_t n, double confidence = 0.95);

}  // namespace qltt
