#include "qltt/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qltt {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::dimension_mismatch: return "dimension-mismatch";
        case ErrorCode::non_finite_value: return "non-finite-value";
        case ErrorCode::bound_violation: return "bound-violation";
        case ErrorCode::empty_input: return "empty-input";
        case ErrorCode::invalid_range: return "invalid-range";
        case ErrorCode::unbounded_risk: return "unbounded-risk";
        case ErrorCode::invalid_alpha: return "invalid-alpha";
        case ErrorCode::unsorted_input: return "unsorted-input";
        case ErrorCode::bad_permutation: return "bad-permutation";
        case ErrorCode::missing_reward: return "missing-reward";
        case ErrorCode::invalid_spec: return "invalid-spec";
        case ErrorCode::invalid_parameters: return "invalid-parameters";
        case ErrorCode::invalid_config: return "invalid-config";
        case ErrorCode::grid_too_large: return "grid-too-large";
        case ErrorCode::parse_error: return "parse-error";
        case ErrorCode::schema_mismatch: return "schema-mismatch";
        case ErrorCode::file_not_found: return "file-not-found";
        case ErrorCode::io_error: return "io-error";
    }
    return "unknown";
}

HyperGrid HyperGrid::from_params(std::vector<std::vector<double>> params) {
    std::vector<HyperPoint> points;
    points.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        points.push_back(HyperPoint{i, std::move(params[i])});
    }
    return from_points(std::move(points));
}

HyperGrid HyperGrid::from_points(std::vector<HyperPoint> points) {
    if (points.empty()) {
        throw Error(ErrorCode::empty_input, "hyperparameter grid is empty");
    }
    const std::size_t d = points.front().params.size();
    if (d == 0) {
        throw Error(ErrorCode::dimension_mismatch, "grid dimension must be at least 1");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].id != i) {
            throw Error(ErrorCode::invalid_parameters,
                        "grid point at position " + std::to_string(i) + " has id " +
                            std::to_string(points[i].id));
        }
        if (points[i].params.size() != d) {
            throw Error(ErrorCode::dimension_mismatch,
                        "grid point " + std::to_string(i) + " has dimension " +
                            std::to_string(points[i].params.size()) + ", expected " +
                            std::to_string(d));
        }
        for (double v : points[i].params) {
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::non_finite_value,
                            "grid point " + std::to_string(i) + " has a non-finite parameter");
            }
        }
    }
    HyperGrid g;
    g.points_ = std::move(points);
    g.dimension_ = d;
    return g;
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows * cols) {
        throw Error(ErrorCode::dimension_mismatch,
                    "matrix storage holds " + std::to_string(values_.size()) +
                        " values, expected " + std::to_string(rows * cols));
    }
}

std::vector<double> Matrix::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

std::vector<double> column_means(const Matrix& m) {
    std::vector<double> sums(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        for (std::size_t c = 0; c < m.cols(); ++c) sums[c] += row[c];
    }
    if (m.rows() > 0) {
        for (double& s : sums) s /= static_cast<double>(m.rows());
    }
    return sums;
}

void validate_risk_matrix(const RiskMatrix& m, const HyperGrid& g) {
    if (m.columns() != g.size()) {
        throw Error(ErrorCode::dimension_mismatch,
                    "risk matrix has " + std::to_string(m.columns()) + " columns but grid has " +
                        std::to_string(g.size()) + " points");
    }
    if (m.episodes() == 0) {
        throw Error(ErrorCode::empty_input, "risk matrix has no episodes");
    }
    for (std::size_t i = 0; i < m.episodes(); ++i) {
        for (std::size_t j = 0; j < m.columns(); ++j) {
            const double v = m.values(i, j);
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::non_finite_value,
                            "risk at row " + std::to_string(i) + ", column " + std::to_string(j) +
                                " is not finite");
            }
            if (v < 0.0) {
                std::ostringstream os;
                os << "risk " << v << " at row " << i << ", column " << j << " is negative";
                throw Error(ErrorCode::bound_violation, os.str());
            }
            if (m.bounded_unit && v > 1.0) {
                std::ostringstream os;
                os << "risk " << v << " at row " << i << ", column " << j
                   << " lies outside [0, 1] but the matrix is declared unit-bounded";
                throw Error(ErrorCode::bound_violation, os.str());
            }
        }
    }
}

std::string_view to_string(Method m) noexcept {
    return m == Method::mean ? "mean" : "quantile";
}

std::string_view to_string(FwerProcedure f) noexcept {
    return f == FwerProcedure::bonferroni ? "bonferroni" : "fst";
}

Method parse_method(std::string_view s) {
    if (s == "mean") return Method::mean;
    if (s == "quantile") return Method::quantile;
    throw Error(ErrorCode::invalid_spec, "unknown method '" + std::string(s) + "'");
}

FwerProcedure parse_fwer(std::string_view s) {
    if (s == "bonferroni") return FwerProcedure::bonferroni;
    if (s == "fst") return FwerProcedure::fst;
    throw Error(ErrorCode::invalid_spec, "unknown FWER procedure '" + std::string(s) + "'");
}

namespace {

bool is_permutation_of_ids(std::span<const std::size_t> ordering, std::size_t k) {
    if (ordering.size() != k) return false;
    std::vector<bool> seen(k, false);
    for (std::size_t id : ordering) {
        if (id >= k || seen[id]) return false;
        seen[id] = true;
    }
    return true;
}

}  // namespace

void validate_spec(const ControlSpec& spec, std::size_t grid_size) {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::invalid_spec, msg); };
    if (!(spec.delta > 0.0 && spec.delta < 1.0)) fail("delta must lie in (0, 1)");
    if (!std::isfinite(spec.alpha) || spec.alpha < 0.0) fail("alpha must be finite and >= 0");
    if (spec.method == Method::quantile && !(spec.q > 0.0 && spec.q < 1.0)) {
        fail("q must lie in (0, 1) for the quantile method");
    }
    if (!(spec.tol > 0.0) || !std::isfinite(spec.tol)) fail("tol must be a positive number");
    if (spec.ordering && !is_permutation_of_ids(*spec.ordering, grid_size)) {
        fail("ordering is not a permutation of all grid ids");
    }
}

std::vector<std::size_t> effective_ordering(const ControlSpec& spec, std::size_t grid_size) {
    if (spec.ordering) return *spec.ordering;
    std::vector<std::size_t> order(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i) order[i] = i;
    return order;
}

std::optional<std::string> check_result_invariants(const CalibrationResult& r) {
    const std::size_t k = r.p_values.size();
    for (std::size_t j = 0; j < k; ++j) {
        if (!(r.p_values[j] >= 0.0 && r.p_values[j] <= 1.0)) {
            return "p-value " + std::to_string(j) + " outside [0, 1]";
        }
    }
    std::vector<bool> in_set(k, false);
    for (std::size_t id : r.certified) {
        if (id >= k) return "certified id " + std::to_string(id) + " out of range";
        if (in_set[id]) return "certified id " + std::to_string(id) + " repeated";
        in_set[id] = true;
    }
    if (r.spec.fwer == FwerProcedure::bonferroni) {
        const double threshold = r.spec.delta / static_cast<double>(k);
        for (std::size_t j = 0; j < k; ++j) {
            if (in_set[j] != (r.p_values[j] < threshold)) {
                return "Bonferroni membership of id " + std::to_string(j) + " is inconsistent";
            }
        }
    } else {
        if (r.spec.ordering && r.spec.ordering->size() != k) return "ordering size mismatch";
        const auto order = effective_ordering(r.spec, k);
        for (std::size_t i = 0; i < r.certified.size(); ++i) {
            if (r.certified[i] != order[i]) return "certified set is not a prefix of the ordering";
        }
    }
    if (r.selected && (*r.selected >= k || !in_set[*r.selected])) {
        return "selected id is not certified";
    }
    if (!r.selected && !r.certified.empty()) return "certified set non-empty but nothing selected";
    return std::nullopt;
}

}  // namespace qltt
