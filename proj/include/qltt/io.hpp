// io.hpp
//
// Persistence formats.
//
// Risk matrix: CSV whose header is `episode,<id0>,<id1>,...` followed by one
// row per episode (`<episode>,<v0>,<v1>,...`), numbers written with
// shortest round-trip precision. A companion JSON manifest carries the grid
// and the unit-bound flag:
//
//   { "format": "qltt-risk-matrix", "version": 1, "risks": "risks.csv",
//     "bounded_unit": false, "dimension": 4, "episodes": 300,
//     "points": [ {"id": 0, "params": [..]}, ... ],
//     "rewards": "rewards.csv" }            // optional, same CSV layout
//
// Results and coverage reports are JSON documents mirroring the structs.
#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "qltt/core.hpp"

namespace qltt {

using Json = nlohmann::ordered_json;

Json to_json(const HyperGrid& g);
HyperGrid grid_from_json(const Json& j);

Json to_json(const ControlSpec& s);
ControlSpec spec_from_json(const Json& j);

Json to_json(const CalibrationResult& r);
CalibrationResult result_from_json(const Json& j);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

// CSV with header `episode,0,1,...,cols-1`.
std::string matrix_to_csv(const Matrix& m);
// Throws Error{parse_error} naming line and column on malformed input, and
// Error{schema_mismatch} when the header ids differ from 0..cols-1 in order.
Matrix matrix_from_csv(const std::string& text, const std::string& source = "<csv>");

struct RiskDataset {
    RiskMatrix risks;
    HyperGrid grid;
    std::optional<Matrix> rewards;
};

// Writes <dir>/<stem>.csv, <dir>/<stem>.json and, with rewards,
// <dir>/<stem>_rewards.csv. Returns the manifest path.
std::filesystem::path save_risk_dataset(const RiskDataset& data, const std::filesystem::path& dir,
                                        const std::string& stem);

// Accepts the manifest (.json) or the risk CSV; for a CSV the manifest is the
// sibling file with the .json extension. Validates through core.
RiskDataset load_risk_matrix(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Parses JSON, mapping syntax errors to Error{parse_error}.
Json parse_json(const std::string& text, const std::string& source);

}  // namespace qltt
