#include "qltt/stats.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>

#include "qltt/core.hpp"

namespace qltt {

double empirical_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw Error(ErrorCode::empty_input, "quantile of an empty sample");
    const double n = static_cast<double>(sorted.size());
    // The small slack keeps N (1 - q) = 90.00000000000001 from rounding up.
    double k = std::ceil(n * (1.0 - q) - 1e-9);
    if (k < 1.0) k = 1.0;
    if (k > n) k = n;
    return sorted[static_cast<std::size_t>(k) - 1];
}

BinomialInterval clopper_pearson(std::size_t k, std::size_t n, double confidence) {
    if (n == 0 || k > n) throw Error(ErrorCode::invalid_range, "need 0 <= k <= n and n >= 1");
    const double tail = (1.0 - confidence) / 2.0;
    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n);
    BinomialInterval ci;
    ci.low = k == 0 ? 0.0 : boost::math::ibeta_inv(kd, nd - kd + 1.0, tail);
    ci.high = k == n ? 1.0 : boost::math::ibeta_inv(kd + 1.0, nd - kd, 1.0 - tail);
    return ci;
}

}  // namespace qltt
