// calibrate.hpp
//
// End-to-end calibration: p-value per grid point, FWER selection of the
// certified set, then reward-based choice of a single hyperparameter.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qltt/core.hpp"

namespace qltt {

// Mean-risk control. Requires spec.method == mean and a unit-bounded matrix.
//
// `rewards`, when given, is an episodes x |grid| matrix averaged per column
// to rank the certified points; without it the point with the lowest
// empirical mean risk wins.
CalibrationResult ltt_calibrate(const RiskMatrix& m, const HyperGrid& g, const ControlSpec& spec,
                                const Matrix* rewards = nullptr);

// Quantile-risk control. Requires spec.method == quantile; any nonnegative
// risk scale is accepted.
CalibrationResult qltt_calibrate(const RiskMatrix& m, const HyperGrid& g, const ControlSpec& spec,
                                 const Matrix* rewards = nullptr);

// Dispatches on spec.method.
CalibrationResult calibrate(const RiskMatrix& m, const HyperGrid& g, const ControlSpec& spec,
                            const Matrix* rewards = nullptr);

// Highest mean reward among the certified ids; ties go to the smallest id.
// `rewards` is indexed by grid id.
std::optional<std::size_t> select_best(std::span<const std::size_t> certified,
                                       std::span<const double> rewards);

}  // namespace qltt
