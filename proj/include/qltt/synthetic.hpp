// synthetic.hpp
//
// Risk families with closed-form mean and quantile, used as ground truth
// when checking the calibration guarantees.
#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "qltt/core.hpp"

namespace qltt {

// Risk ~ Uniform(0, scale).
struct UniformScale {
    double scale = 1.0;
};

// Risk ~ Beta(a, b).
struct BetaShape {
    double a = 1.0;
    double b = 1.0;
};

// Risk = hi with probability p, lo otherwise (lo <= hi).
struct BernoulliMixture {
    double p = 0.0;
    double lo = 0.0;
    double hi = 1.0;
};

enum class FamilyKind { uniform_scale, beta, bernoulli_mixture };

using FamilyPoint = std::variant<UniformScale, BetaShape, BernoulliMixture>;

// One distribution per grid point, all of the same kind.
struct SyntheticFamily {
    FamilyKind kind = FamilyKind::uniform_scale;
    std::vector<FamilyPoint> points;
};

// Throws Error{invalid_parameters} for empty, mixed-kind or out-of-range families.
void validate_family(const SyntheticFamily& fam);

SyntheticFamily uniform_scale_family(const std::vector<double>& scales);

// Grid whose point j carries the parameters of distribution j.
HyperGrid family_grid(const SyntheticFamily& fam);

// True when every distribution is supported inside [0, 1].
bool family_is_unit_bounded(const SyntheticFamily& fam);

// n i.i.d. draws per grid point. Column j uses its own stream derived from
// (seed, j), so columns are independent and reproducible.
RiskMatrix sample_risk_matrix(const SyntheticFamily& fam, const HyperGrid& g, std::size_t n,
                              std::uint64_t seed);

struct TrueFunctionals {
    double mean = 0.0;
    // inf { r : Pr[R <= r] >= 1 - q }
    double quantile = 0.0;
};

std::vector<TrueFunctionals> true_functionals(const SyntheticFamily& fam, const HyperGrid& g,
                                              double q);

}  // namespace qltt
