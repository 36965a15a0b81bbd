// fwer.hpp
//
// Family-wise error rate control over the per-hyperparameter p-values.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qltt/core.hpp"

namespace qltt {

struct FwerOutcome {
    std::vector<std::size_t> certified;
    FwerProcedure procedure = FwerProcedure::bonferroni;
    // delta / |grid| for Bonferroni, delta for fixed sequence testing.
    double threshold_used = 0.0;
};

// Certifies ids with p < delta / |grid| (strict), in grid order.
FwerOutcome bonferroni(std::span<const double> p_values, double delta);

// Walks `ordering` and certifies while p <= delta (non-strict); stops at the
// first failure. The result is always a prefix of `ordering`.
FwerOutcome fixed_sequence_test(std::span<const double> p_values,
                                std::span<const std::size_t> ordering, double delta);

}  // namespace qltt
