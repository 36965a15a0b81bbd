#include "qltt/fwer.hpp"

#include <string>

namespace qltt {

namespace {

void check_inputs(std::span<const double> p_values, double delta) {
    if (p_values.empty()) throw Error(ErrorCode::invalid_range, "no p-values supplied");
    if (!(delta > 0.0 && delta < 1.0)) {
        throw Error(ErrorCode::invalid_range, "delta must lie in (0, 1)");
    }
    for (std::size_t j = 0; j < p_values.size(); ++j) {
        if (!(p_values[j] >= 0.0 && p_values[j] <= 1.0)) {
            throw Error(ErrorCode::invalid_range, "p-value " + std::to_string(j) + " outside [0, 1]");
        }
    }
}

}  // namespace

FwerOutcome bonferroni(std::span<const double> p_values, double delta) {
    check_inputs(p_values, delta);
    FwerOutcome out;
    out.procedure = FwerProcedure::bonferroni;
    out.threshold_used = delta / static_cast<double>(p_values.size());
    for (std::size_t j = 0; j < p_values.size(); ++j) {
        if (p_values[j] < out.threshold_used) out.certified.push_back(j);
    }
    return out;
}

FwerOutcome fixed_sequence_test(std::span<const double> p_values,
                                std::span<const std::size_t> ordering, double delta) {
    check_inputs(p_values, delta);
    const std::size_t k = p_values.size();
    if (ordering.size() != k) {
        throw Error(ErrorCode::bad_permutation, "ordering length " + std::to_string(ordering.size()) +
                                                    " does not match " + std::to_string(k) + " p-values");
    }
    std::vector<bool> seen(k, false);
    for (std::size_t id : ordering) {
        if (id >= k || seen[id]) {
            throw Error(ErrorCode::bad_permutation, "ordering is not a permutation of grid ids");
        }
        seen[id] = true;
    }
    FwerOutcome out;
    out.procedure = FwerProcedure::fst;
    out.threshold_used = delta;
    for (std::size_t id : ordering) {
        if (!(p_values[id] <= delta)) break;
        out.certified.push_back(id);
    }
    return out;
}

}  // namespace qltt
