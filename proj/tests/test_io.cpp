#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

#include "qltt/io.hpp"

using namespace qltt;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("qltt_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

template <class F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::io_error;
}

const char* kManifest2 = R"({
  "format": "qltt-risk-matrix", "version": 1, "risks": "r.csv",
  "bounded_unit": true, "episodes": 3, "dimension": 1,
  "points": [{"id": 0, "params": [0.5]}, {"id": 1, "params": [1.0]}]
})";

}  // namespace

TEST_CASE("doubles are written in shortest round-trip form") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng);
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(2.0) == "2");
}

TEST_CASE("CSV round trip is exact") {
    Matrix m(3, 2, {0.1, 0.25, 1.0 / 3.0, 0.0, 1e-17, 0.9999999999999999});
    const auto back = matrix_from_csv(matrix_to_csv(m));
    REQUIRE(back.rows() == 3);
    REQUIRE(back.cols() == 2);
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 2; ++c) CHECK(back(r, c) == m(r, c));
    }
    CHECK(matrix_to_csv(m).substr(0, 12) == "episode,0,1\n");
}

TEST_CASE("well-formed 3 x 2 file loads") {
    const auto dir = scratch_dir("load");
    write_text_file(dir / "r.json", kManifest2);
    write_text_file(dir / "r.csv", "episode,0,1\n0,0.1,0.2\n1,0.3,0.4\n2,0.5,0.6\n");
    for (const auto& p : {dir / "r.json", dir / "r.csv"}) {
        const auto d = load_risk_matrix(p);
        CHECK(d.risks.episodes() == 3);
        CHECK(d.risks.columns() == 2);
        CHECK(d.risks.bounded_unit);
        CHECK(d.risks.values(2, 1) == 0.6);
        CHECK(d.grid[1].params == std::vector<double>{1.0});
        CHECK_FALSE(d.rewards.has_value());
    }
}

TEST_CASE("header and grid mismatches are schema errors") {
    const auto dir = scratch_dir("schema");
    write_text_file(dir / "r.json", kManifest2);
    write_text_file(dir / "r.csv", "episode,0,1,2\n0,0.1,0.2,0.3\n1,0.3,0.4,0.5\n2,0.5,0.6,0.7\n");
    CHECK(code_of([&] { load_risk_matrix(dir / "r.json"); }) == ErrorCode::schema_mismatch);
    CHECK(code_of([] { matrix_from_csv("episode,1,0\n0,1,2\n"); }) == ErrorCode::schema_mismatch);
    CHECK(code_of([] { matrix_from_csv("row,0\n0,1\n"); }) == ErrorCode::schema_mismatch);
    CHECK(code_of([] { matrix_from_csv("episode,0,1\n0,1\n"); }) == ErrorCode::schema_mismatch);

    write_text_file(dir / "r.csv", "episode,0,1\n0,0.1,0.2\n1,0.3,0.4\n");
    CHECK(code_of([&] { load_risk_matrix(dir / "r.json"); }) == ErrorCode::schema_mismatch);

    auto extra = parse_json(kManifest2, "m");
    extra["colour"] = "blue";
    write_text_file(dir / "x.json", extra.dump());
    CHECK(code_of([&] { load_risk_matrix(dir / "x.json"); }) == ErrorCode::schema_mismatch);
}

TEST_CASE("non-numeric cell is a parse error naming the cell") {
    try {
        matrix_from_csv("episode,0,1\n0,0.1,0.2\n1,0.3,abc\n", "risks.csv");
        FAIL("expected parse_error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::parse_error);
        const std::string msg = e.what();
        CHECK(msg.find("risks.csv:3:3") != std::string::npos);
        CHECK(msg.find("'abc'") != std::string::npos);
    }
    CHECK(code_of([] { matrix_from_csv("episode,0\n0,\n"); }) == ErrorCode::parse_error);
    CHECK(code_of([] { matrix_from_csv("episode,0\n0,1.5x\n"); }) == ErrorCode::parse_error);
}

TEST_CASE("validation errors pass through the loader") {
    const auto dir = scratch_dir("validate");
    write_text_file(dir / "r.json", kManifest2);
    write_text_file(dir / "r.csv", "episode,0,1\n0,0.1,0.2\n1,0.3,1.4\n2,0.5,0.6\n");
    CHECK(code_of([&] { load_risk_matrix(dir / "r.json"); }) == ErrorCode::bound_violation);
    write_text_file(dir / "r.csv", "episode,0,1\n0,0.1,0.2\n1,0.3,nan\n2,0.5,0.6\n");
    CHECK(code_of([&] { load_risk_matrix(dir / "r.json"); }) == ErrorCode::non_finite_value);
    CHECK(code_of([&] { load_risk_matrix(dir / "missing.json"); }) == ErrorCode::file_not_found);
}

TEST_CASE("dataset save and load round trip") {
    const auto dir = scratch_dir("dataset");
    RiskDataset d;
    d.grid = HyperGrid::from_params({{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}});
    d.risks = RiskMatrix{Matrix(2, 3, {1.5, 2.5, 3.5, 4.5, 5.5, 6.5}), false};
    d.rewards = Matrix(2, 3, {-1, -2, -3, -4, -5, -6});
    const auto manifest = save_risk_dataset(d, dir, "cal");
    CHECK(manifest == dir / "cal.json");
    const auto back = load_risk_matrix(manifest);
    CHECK_FALSE(back.risks.bounded_unit);
    REQUIRE(back.rewards.has_value());
    CHECK((*back.rewards)(1, 2) == -6.0);
    CHECK(back.risks.values(0, 1) == 2.5);
    CHECK(back.grid.size() == 3);
    CHECK(back.grid[2].params == std::vector<double>{5.0, 6.0});
}

TEST_CASE("result and spec JSON round trip") {
    ControlSpec s;
    s.alpha = 0.3;
    s.delta = 0.05;
    s.q = 0.2;
    s.method = Method::quantile;
    s.fwer = FwerProcedure::fst;
    s.ordering = std::vector<std::size_t>{2, 0, 1};
    CalibrationResult r;
    r.spec = s;
    r.p_values = {0.01, 0.5, 1e-300};
    r.certified = {2};
    r.selected = 2;
    r.n = 40;
    r.seed = 99;
    const auto back = result_from_json(parse_json(to_json(r).dump(), "r"));
    CHECK(back.p_values == r.p_values);
    CHECK(back.certified == r.certified);
    CHECK(back.selected == r.selected);
    CHECK(back.n == 40);
    CHECK(back.seed == r.seed);
    CHECK(back.spec.alpha == 0.3);
    CHECK(back.spec.ordering == s.ordering);
    CHECK(back.spec.fwer == FwerProcedure::fst);
    CHECK(to_json(back).dump() == to_json(r).dump());
    CHECK(code_of([] { result_from_json(Json::parse(R"({"p_values": "x"})")); }) ==
          ErrorCode::schema_mismatch);
    CHECK(code_of([] { parse_json("{", "bad"); }) == ErrorCode::parse_error);
}
