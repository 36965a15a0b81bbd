#include "qltt/synthetic.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <random>
#include <string>

#include "qltt/random.hpp"

namespace qltt {

namespace {

FamilyKind kind_of(const FamilyPoint& p) {
    return static_cast<FamilyKind>(p.index());
}

[[noreturn]] void bad(std::size_t j, const std::string& what) {
    throw Error(ErrorCode::invalid_parameters, "family point " + std::to_string(j) + ": " + what);
}

struct Sampler {
    Rng& rng;

    double operator()(const UniformScale& u) const { return u.scale * uniform01(rng); }

    double operator()(const BetaShape& b) const {
        std::gamma_distribution<double> ga(b.a, 1.0);
        std::gamma_distribution<double> gb(b.b, 1.0);
        const double x = ga(rng);
        const double y = gb(rng);
        return x / (x + y);
    }

    double operator()(const BernoulliMixture& m) const {
        return uniform01(rng) < m.p ? m.hi : m.lo;
    }
};

}  // namespace

void validate_family(const SyntheticFamily& fam) {
    if (fam.points.empty()) throw Error(ErrorCode::invalid_parameters, "synthetic family is empty");
    for (std::size_t j = 0; j < fam.points.size(); ++j) {
        const auto& pt = fam.points[j];
        if (kind_of(pt) != fam.kind) bad(j, "kind differs from the family kind");
        if (const auto* u = std::get_if<UniformScale>(&pt)) {
            if (!(u->scale > 0.0) || !std::isfinite(u->scale)) bad(j, "scale must be positive");
        } else if (const auto* b = std::get_if<BetaShape>(&pt)) {
            if (!(b->a > 0.0 && b->b > 0.0) || !std::isfinite(b->a) || !std::isfinite(b->b)) {
                bad(j, "beta shapes must be positive");
            }
        } else if (const auto* m = std::get_if<BernoulliMixture>(&pt)) {
            if (!(m->p >= 0.0 && m->p <= 1.0)) bad(j, "p must lie in [0, 1]");
            if (!(m->lo >= 0.0 && m->lo <= m->hi) || !std::isfinite(m->hi)) {
                bad(j, "need 0 <= lo <= hi < inf");
            }
        }
    }
}

SyntheticFamily uniform_scale_family(const std::vector<double>& scales) {
    SyntheticFamily fam;
    fam.kind = FamilyKind::uniform_scale;
    for (double c : scales) fam.points.emplace_back(UniformScale{c});
    validate_family(fam);
    return fam;
}

HyperGrid family_grid(const SyntheticFamily& fam) {
    validate_family(fam);
    std::vector<std::vector<double>> params;
    for (const auto& pt : fam.points) {
        if (const auto* u = std::get_if<UniformScale>(&pt)) {
            params.push_back({u->scale});
        } else if (const auto* b = std::get_if<BetaShape>(&pt)) {
            params.push_back({b->a, b->b});
        } else {
            const auto& m = std::get<BernoulliMixture>(pt);
            params.push_back({m.p, m.lo, m.hi});
        }
    }
    return HyperGrid::from_params(std::move(params));
}

bool family_is_unit_bounded(const SyntheticFamily& fam) {
    for (const auto& pt : fam.points) {
        if (const auto* u = std::get_if<UniformScale>(&pt)) {
            if (u->scale > 1.0) return false;
        } else if (const auto* m = std::get_if<BernoulliMixture>(&pt)) {
            if (m->hi > 1.0) return false;
        }
    }
    return true;
}

RiskMatrix sample_risk_matrix(const SyntheticFamily& fam, const HyperGrid& g, std::size_t n,
                              std::uint64_t seed) {
    validate_family(fam);
    if (n == 0) throw Error(ErrorCode::invalid_parameters, "need at least one episode");
    if (g.size() != fam.points.size()) {
        throw Error(ErrorCode::dimension_mismatch, "family and grid sizes differ");
    }
    RiskMatrix m;
    m.values = Matrix(n, g.size());
    m.bounded_unit = family_is_unit_bounded(fam);
    for (std::size_t j = 0; j < g.size(); ++j) {
        Rng rng(derive_seed(seed, streams::synthetic_column, j));
        Sampler draw{rng};
        for (std::size_t i = 0; i < n; ++i) m.values(i, j) = std::visit(draw, fam.points[j]);
    }
    return m;
}

std::vector<TrueFunctionals> true_functionals(const SyntheticFamily& fam, const HyperGrid& g,
                                              double q) {
    validate_family(fam);
    if (g.size() != fam.points.size()) {
        throw Error(ErrorCode::dimension_mismatch, "family and grid sizes differ");
    }
    std::vector<TrueFunctionals> out;
    out.reserve(fam.points.size());
    for (const auto& pt : fam.points) {
        TrueFunctionals t;
        if (const auto* u = std::get_if<UniformScale>(&pt)) {
            t.mean = u->scale / 2.0;
            t.quantile = (1.0 - q) * u->scale;
        } else if (const auto* b = std::get_if<BetaShape>(&pt)) {
            t.mean = b->a / (b->a + b->b);
            t.quantile = boost::math::ibeta_inv(b->a, b->b, 1.0 - q);
        } else {
            const auto& m = std::get<BernoulliMixture>(pt);
            t.mean = m.p * m.hi + (1.0 - m.p) * m.lo;
            // Pr[R <= lo] = 1 - p reaches 1 - q exactly when p <= q.
            t.quantile = m.p > q ? m.hi : m.lo;
        }
        out.push_back(t);
    }
    return out;
}

}  // namespace qltt
