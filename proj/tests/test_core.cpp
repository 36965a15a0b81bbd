#include <doctest.h>

#include <cmath>
#include <limits>

#include "qltt/core.hpp"

using namespace qltt;

namespace {

RiskMatrix make(std::size_t rows, std::size_t cols, std::vector<double> v, bool unit) {
    return RiskMatrix{Matrix(rows, cols, std::move(v)), unit};
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::io_error;
}

}  // namespace

TEST_CASE("validate_risk_matrix accepts a consistent matrix") {
    const auto g = HyperGrid::from_params({{1.0}, {2.0}});
    CHECK_NOTHROW(validate_risk_matrix(make(2, 2, {0.1, 0.2, 0.3, 0.4}, true), g));
}

TEST_CASE("validate_risk_matrix error paths") {
    const auto g = HyperGrid::from_params({{1.0}, {2.0}});
    CHECK(code_of([&] { validate_risk_matrix(make(2, 2, {0.1, 1.5, 0.3, 0.4}, true), g); }) ==
          ErrorCode::bound_violation);
    CHECK(code_of([&] { validate_risk_matrix(make(2, 3, {0, 0, 0, 0, 0, 0}, true), g); }) ==
          ErrorCode::dimension_mismatch);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    try {
        validate_risk_matrix(make(2, 2, {0.1, 0.2, nan, 0.4}, false), g);
        FAIL("expected non-finite error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::non_finite_value);
        CHECK(std::string(e.what()).find("row 1, column 0") != std::string::npos);
    }
    CHECK(code_of([&] { validate_risk_matrix(make(1, 2, {-0.1, 0.2}, false), g); }) ==
          ErrorCode::bound_violation);
    // Unbounded matrices may exceed 1.
    CHECK_NOTHROW(validate_risk_matrix(make(1, 2, {12.0, 0.2}, false), g));
}

TEST_CASE("grid ids are dense and dimensions agree") {
    const auto g = HyperGrid::from_params({{1, 2}, {3, 4}, {5, 6}});
    CHECK(g.size() == 3);
    CHECK(g.dimension() == 2);
    CHECK(g[2].id == 2);
    CHECK(code_of([] { HyperGrid::from_params({}); }) == ErrorCode::empty_input);
    CHECK(code_of([] { HyperGrid::from_params({{1, 2}, {3}}); }) == ErrorCode::dimension_mismatch);
    CHECK(code_of([] { HyperGrid::from_points({HyperPoint{1, {1.0}}}); }) ==
          ErrorCode::invalid_parameters);
}

TEST_CASE("control spec validation") {
    ControlSpec s;
    s.alpha = 0.5;
    CHECK_NOTHROW(validate_spec(s, 3));
    s.delta = 1.0;
    CHECK_THROWS_AS(validate_spec(s, 3), Error);
    s.delta = 0.1;
    s.q = 0.0;
    CHECK_THROWS_AS(validate_spec(s, 3), Error);
    s.method = Method::mean;  // q is irrelevant for the mean method
    CHECK_NOTHROW(validate_spec(s, 3));
    s.fwer = FwerProcedure::fst;
    s.ordering = std::vector<std::size_t>{2, 0, 1};
    CHECK_NOTHROW(validate_spec(s, 3));
    s.ordering = std::vector<std::size_t>{2, 2, 1};
    CHECK_THROWS_AS(validate_spec(s, 3), Error);
    s.ordering = std::vector<std::size_t>{0, 1};
    CHECK_THROWS_AS(validate_spec(s, 3), Error);
}

TEST_CASE("result invariants") {
    CalibrationResult r;
    r.spec.delta = 0.1;
    r.p_values = {0.01, 0.5, 0.02};
    r.certified = {0, 2};
    r.selected = 2;
    CHECK_FALSE(check_result_invariants(r));

    auto bad = r;
    bad.certified = {0};
    bad.selected = 0;
    CHECK(check_result_invariants(bad));  // id 2 has p < 0.1/3 but is missing

    bad = r;
    bad.selected = 1;
    CHECK(check_result_invariants(bad));

    r.spec.fwer = FwerProcedure::fst;
    r.spec.ordering = std::vector<std::size_t>{2, 0, 1};
    r.certified = {2, 0};
    CHECK_FALSE(check_result_invariants(r));
    r.certified = {0, 2};
    CHECK(check_result_invariants(r));
}

TEST_CASE("column means") {
    const Matrix m(2, 3, {1, 2, 3, 3, 4, 5});
    CHECK(column_means(m) == std::vector<double>{2, 3, 4});
    CHECK(m.column(1) == std::vector<double>{2, 4});
}
