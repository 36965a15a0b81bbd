#include "qltt/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qltt/fwer.hpp"
#include "qltt/testing.hpp"

namespace qltt {

namespace {

std::vector<double> selection_scores(const RiskMatrix& m, const Matrix* rewards) {
    if (rewards == nullptr) {
        auto means = column_means(m.values);
        for (double& v : means) v = -v;
        return means;
    }
    if (rewards->cols() != m.columns() || rewards->rows() == 0) {
        throw Error(ErrorCode::missing_reward,
                    "reward matrix has " + std::to_string(rewards->cols()) + " columns, expected " +
                        std::to_string(m.columns()));
    }
    return column_means(*rewards);
}

CalibrationResult finish(const RiskMatrix& m, const HyperGrid& g, const ControlSpec& spec,
                         std::vector<double> p_values, const Matrix* rewards) {
    CalibrationResult result;
    result.spec = spec;
    result.n = m.episodes();
    result.p_values = std::move(p_values);
    if (spec.fwer == FwerProcedure::bonferroni) {
        result.certified = bonferroni(result.p_values, spec.delta).certified;
    } else {
        const auto order = effective_ordering(spec, g.size());
        result.certified = fixed_sequence_test(result.p_values, order, spec.delta).certified;
    }
    if (!result.certified.empty()) {
        result.selected = select_best(result.certified, selection_scores(m, rewards));
    }
    return result;
}

}  // namespace

CalibrationResult ltt_calibrate(const RiskMatrix& m, const HyperGrid& g, const ControlSpec& spec,
                                const Matrix* rewards) {
    if (spec.method != Method::mean) {
        throw Error(ErrorCode::invalid_spec, "ltt_calibrate needs method = mean");
    }
    validate_spec(spec, g.size());
    if (!(spec.alpha <= 1.0)) {
        throw Error(ErrorCode::invalid_spec, "alpha must lie in [0, 1] for the mean method");
    }
    if (!m.bounded_unit) {
        throw Error(ErrorCode::unbounded_risk,
                    "mean-risk control needs a risk matrix declared bounded in [0, 1]");
    }
    validate_risk_matrix(m, g);

    const auto means = column_means(m.values);
    std::vector<double> p(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        p[j] = hoeffding_p_value(means[j], m.episodes(), spec.alpha);
    }
    return finish(m, g, spec, std::move(p), rewards);
}

CalibrationResult qltt_calibrate(const RiskMatrix& m, const HyperGrid& g, const ControlSpec& spec,
                                 const Matrix* rewards) {
    if (spec.method != Method::quantile) {
        throw Error(ErrorCode::invalid_spec, "qltt_calibrate needs method = quantile");
    }
    validate_spec(spec, g.size());
    validate_risk_matrix(m, g);

    std::vector<double> p(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        auto column = m.values.column(j);
        std::sort(column.begin(), column.end());
        p[j] = quantile_p_value_sorted(column, spec.q, spec.alpha, spec.tol);
    }
    return finish(m, g, spec, std::move(p), rewards);
}

CalibrationResult calibrate(const RiskMatrix& m, const HyperGrid& g, const ControlSpec& spec,
                            const Matrix* rewards) {
    return spec.method == Method::mean ? ltt_calibrate(m, g, spec, rewards)
                                       : qltt_calibrate(m, g, spec, rewards);
}

std::optional<std::size_t> select_best(std::span<const std::size_t> certified,
                                       std::span<const double> rewards) {
    std::optional<std::size_t> best;
    for (std::size_t id : certified) {
        if (id >= rewards.size() || std::isnan(rewards[id])) {
            throw Error(ErrorCode::missing_reward, "no reward for certified id " + std::to_string(id));
        }
        if (!best || rewards[id] > rewards[*best] ||
            (rewards[id] == rewards[*best] && id < *best)) {
            best = id;
        }
    }
    return best;
}

}  // namespace qltt
