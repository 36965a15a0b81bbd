// core.hpp
//
// Shared domain types: hyperparameter grids, risk matrices, control
// specifications and calibration results.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qltt {

enum class ErrorCode {
    dimension_mismatch,
    non_finite_value,
    bound_violation,
    empty_input,
    invalid_range,
    unbounded_risk,
    invalid_alpha,
    unsorted_input,
    bad_permutation,
    missing_reward,
    invalid_spec,
    invalid_parameters,
    invalid_config,
    grid_too_large,
    parse_error,
    schema_mismatch,
    file_not_found,
    io_error,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure in the library is reported through this type; the code lets
// callers (the CLI in particular) map failures onto exit statuses.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

struct HyperPoint {
    std::size_t id = 0;
    std::vector<double> params;

    bool operator==(const HyperPoint&) const = default;
};

// Finite candidate set. Ids are dense and equal to grid position.
class HyperGrid {
public:
    HyperGrid() = default;

    // Assigns ids 0..k-1 in the order given.
    static HyperGrid from_params(std::vector<std::vector<double>> params);
    // Checks that ids are exactly 0..k-1 in order and dimensions agree.
    static HyperGrid from_points(std::vector<HyperPoint> points);

    std::size_t size() const noexcept { return points_.size(); }
    std::size_t dimension() const noexcept { return dimension_; }
    const std::vector<HyperPoint>& points() const noexcept { return points_; }
    const HyperPoint& operator[](std::size_t id) const { return points_.at(id); }

    bool operator==(const HyperGrid&) const = default;

private:
    std::vector<HyperPoint> points_;
    std::size_t dimension_ = 0;
};

// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const {
        return {values_.data() + r * cols_, cols_};
    }
    std::vector<double> column(std::size_t c) const;
    std::span<const double> values() const noexcept { return values_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

// Per-column arithmetic mean.
std::vector<double> column_means(const Matrix& m);

// n episodes x |grid| risk evaluations R(Z_i, lambda_j).
struct RiskMatrix {
    Matrix values;
    // Declares every value to lie in [0, 1]; required for the mean method.
    bool bounded_unit = false;

    std::size_t episodes() const noexcept { return values.rows(); }
    std::size_t columns() const noexcept { return values.cols(); }

    bool operator==(const RiskMatrix&) const = default;
};

// Throws Error{dimension_mismatch | non_finite_value | bound_violation |
// empty_input} when the matrix cannot be used against the grid.
void validate_risk_matrix(const RiskMatrix& m, const HyperGrid& g);

enum class Method { mean, quantile };
enum class FwerProcedure { bonferroni, fst };

std::string_view to_string(Method m) noexcept;
std::string_view to_string(FwerProcedure f) noexcept;
Method parse_method(std::string_view s);
FwerProcedure parse_fwer(std::string_view s);

inline constexpr double kDefaultBisectionTol = 1e-9;

struct ControlSpec {
    double alpha = 0.0;
    double delta = 0.1;
    double q = 0.1;
    Method method = Method::quantile;
    FwerProcedure fwer = FwerProcedure::bonferroni;
    // FST walk order over grid ids; grid order when absent.
    std::optional<std::vector<std::size_t>> ordering;
    // Bisection tolerance on epsilon for quantile p-values.
    double tol = kDefaultBisectionTol;

    bool operator==(const ControlSpec&) const = default;
};

// Throws Error{invalid_spec} on range violations or a bad ordering.
void validate_spec(const ControlSpec& spec, std::size_t grid_size);

// The FST walk order for this spec (explicit ordering or grid order).
std::vector<std::size_t> effective_ordering(const ControlSpec& spec, std::size_t grid_size);

struct CalibrationResult {
    std::vector<double> p_values;
    std::vector<std::size_t> certified;
    std::optional<std::size_t> selected;
    ControlSpec spec;
    std::size_t n = 0;
    std::optional<std::uint64_t> seed;

    bool operator==(const CalibrationResult&) const = default;
};

// Structural invariants of a result: p-values in [0,1], certified ids valid,
// Bonferroni membership or FST prefix shape, selection inside the certified
// set. Returns a description of the first violation, or nothing.
std::optional<std::string> check_result_invariants(const CalibrationResult& r);

}  // namespace qltt
