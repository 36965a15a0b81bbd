#include "qltt/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace qltt {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void schema(const std::string& what) {
    throw Error(ErrorCode::schema_mismatch, what);
}

const Json& field(const Json& j, const char* key) {
    if (!j.is_object()) schema(std::string("expected an object holding '") + key + "'");
    const auto it = j.find(key);
    if (it == j.end()) schema(std::string("missing field '") + key + "'");
    return *it;
}

template <typename T>
T get_as(const Json& j, const char* key) {
    try {
        return field(j, key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        schema(std::string("field '") + key + "': " + e.what());
    }
}

std::size_t get_id(const Json& j) {
    if (!j.is_number_unsigned()) schema("expected a nonnegative integer id");
    return j.get<std::size_t>();
}

std::vector<std::size_t> get_ids(const Json& j, const char* key) {
    const Json& arr = field(j, key);
    if (!arr.is_array()) schema(std::string("field '") + key + "' must be an array");
    std::vector<std::size_t> out;
    out.reserve(arr.size());
    for (const auto& v : arr) out.push_back(get_id(v));
    return out;
}

double parse_cell(std::string_view cell, const std::string& source, std::size_t line,
                  std::size_t column) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || cell.empty()) {
        throw Error(ErrorCode::parse_error, source + ":" + std::to_string(line) + ":" +
                                                std::to_string(column) + ": cell '" +
                                                std::string(cell) + "' is not a number");
    }
    return v;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

}  // namespace

Json to_json(const HyperGrid& g) {
    Json points = Json::array();
    for (const auto& p : g.points()) points.push_back({{"id", p.id}, {"params", p.params}});
    return {{"dimension", g.dimension()}, {"points", std::move(points)}};
}

HyperGrid grid_from_json(const Json& j) {
    const auto dimension = get_as<std::size_t>(j, "dimension");
    const Json& arr = field(j, "points");
    if (!arr.is_array()) schema("'points' must be an array");
    std::vector<HyperPoint> points;
    for (const auto& p : arr) {
        points.push_back(HyperPoint{get_id(field(p, "id")), get_as<std::vector<double>>(p, "params")});
    }
    HyperGrid g;
    try {
        g = HyperGrid::from_points(std::move(points));
    } catch (const Error& e) {
        schema(std::string("invalid grid: ") + e.what());
    }
    if (g.dimension() != dimension) schema("grid 'dimension' disagrees with its points");
    return g;
}

Json to_json(const ControlSpec& s) {
    Json j = {{"alpha", s.alpha},
              {"delta", s.delta},
              {"q", s.q},
              {"method", std::string(to_string(s.method))},
              {"fwer", std::string(to_string(s.fwer))},
              {"tol", s.tol}};
    j["ordering"] = s.ordering ? Json(*s.ordering) : Json(nullptr);
    return j;
}

ControlSpec spec_from_json(const Json& j) {
    ControlSpec s;
    s.alpha = get_as<double>(j, "alpha");
    s.delta = get_as<double>(j, "delta");
    s.q = get_as<double>(j, "q");
    try {
        s.method = parse_method(get_as<std::string>(j, "method"));
        s.fwer = parse_fwer(get_as<std::string>(j, "fwer"));
    } catch (const Error& e) {
        schema(e.what());
    }
    s.tol = get_as<double>(j, "tol");
    if (!field(j, "ordering").is_null()) s.ordering = get_ids(j, "ordering");
    return s;
}

Json to_json(const CalibrationResult& r) {
    Json j = {{"p_values", r.p_values}, {"certified", r.certified}};
    j["selected"] = r.selected ? Json(*r.selected) : Json(nullptr);
    j["spec"] = to_json(r.spec);
    j["n"] = r.n;
    j["seed"] = r.seed ? Json(*r.seed) : Json(nullptr);
    return j;
}

CalibrationResult result_from_json(const Json& j) {
    CalibrationResult r;
    r.p_values = get_as<std::vector<double>>(j, "p_values");
    r.certified = get_ids(j, "certified");
    if (!field(j, "selected").is_null()) r.selected = get_id(field(j, "selected"));
    r.spec = spec_from_json(field(j, "spec"));
    r.n = get_as<std::size_t>(j, "n");
    if (!field(j, "seed").is_null()) r.seed = get_as<std::uint64_t>(j, "seed");
    return r;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw Error(ErrorCode::io_error, "cannot format number");
    return std::string(buf, ptr);
}

std::string matrix_to_csv(const Matrix& m) {
    std::string out = "episode";
    for (std::size_t c = 0; c < m.cols(); ++c) out += "," + std::to_string(c);
    out += "\n";
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out += std::to_string(r);
        for (double v : m.row(r)) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

Matrix matrix_from_csv(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::size_t cols = 0;
    bool have_header = false;
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto cells = split_commas(line);
        if (!have_header) {
            if (cells.front() != "episode") {
                schema(source + ":" + std::to_string(line_no) + ": header must start with 'episode'");
            }
            cols = cells.size() - 1;
            for (std::size_t c = 0; c < cols; ++c) {
                if (cells[c + 1] != std::to_string(c)) {
                    schema(source + ":" + std::to_string(line_no) + ": header column " +
                           std::to_string(c + 2) + " is '" + std::string(cells[c + 1]) +
                           "', expected grid id " + std::to_string(c));
                }
            }
            have_header = true;
            continue;
        }
        if (cells.size() != cols + 1) {
            schema(source + ":" + std::to_string(line_no) + ": row has " +
                   std::to_string(cells.size()) + " cells, header has " + std::to_string(cols + 1));
        }
        parse_cell(cells[0], source, line_no, 1);
        for (std::size_t c = 0; c < cols; ++c) {
            values.push_back(parse_cell(cells[c + 1], source, line_no, c + 2));
        }
        ++rows;
    }
    if (!have_header) schema(source + ": missing header line");
    return Matrix(rows, cols, std::move(values));
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        if (!fs::exists(path)) {
            throw Error(ErrorCode::file_not_found, "file not found: " + path.string());
        }
        throw Error(ErrorCode::io_error, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw Error(ErrorCode::io_error, "cannot create " + path.parent_path().string());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

Json parse_json(const std::string& text, const std::string& source) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::parse_error, source + ": " + e.what());
    }
}

fs::path save_risk_dataset(const RiskDataset& data, const fs::path& dir, const std::string& stem) {
    const std::string csv_name = stem + ".csv";
    write_text_file(dir / csv_name, matrix_to_csv(data.risks.values));
    Json manifest = {{"format", "qltt-risk-matrix"},
                     {"version", 1},
                     {"risks", csv_name},
                     {"bounded_unit", data.risks.bounded_unit},
                     {"episodes", data.risks.episodes()}};
    const Json grid = to_json(data.grid);
    manifest["dimension"] = grid["dimension"];
    manifest["points"] = grid["points"];
    if (data.rewards) {
        const std::string rewards_name = stem + "_rewards.csv";
        write_text_file(dir / rewards_name, matrix_to_csv(*data.rewards));
        manifest["rewards"] = rewards_name;
    }
    const fs::path manifest_path = dir / (stem + ".json");
    write_text_file(manifest_path, manifest.dump(2) + "\n");
    return manifest_path;
}

RiskDataset load_risk_matrix(const fs::path& path) {
    fs::path manifest_path = path;
    if (path.extension() != ".json") manifest_path.replace_extension(".json");
    const Json manifest = parse_json(read_text_file(manifest_path), manifest_path.string());
    if (!manifest.is_object()) schema(manifest_path.string() + ": manifest must be a JSON object");
    for (const auto& [key, value] : manifest.items()) {
        static const char* known[] = {"format", "version", "risks", "bounded_unit", "episodes",
                                      "dimension", "points", "rewards"};
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            schema(manifest_path.string() + ": unknown manifest key '" + key + "'");
        }
    }
    if (get_as<std::string>(manifest, "format") != "qltt-risk-matrix") {
        schema(manifest_path.string() + ": not a risk-matrix manifest");
    }
    const fs::path base = manifest_path.parent_path();
    RiskDataset data;
    data.grid = grid_from_json(manifest);
    const fs::path csv_path = base / get_as<std::string>(manifest, "risks");
    data.risks.values = matrix_from_csv(read_text_file(csv_path), csv_path.string());
    data.risks.bounded_unit = get_as<bool>(manifest, "bounded_unit");
    if (data.risks.episodes() != get_as<std::size_t>(manifest, "episodes")) {
        schema(csv_path.string() + ": episode count differs from the manifest");
    }
    if (data.risks.columns() != data.grid.size()) {
        schema(csv_path.string() + ": " + std::to_string(data.risks.columns()) +
               " risk columns but the grid has " + std::to_string(data.grid.size()) + " points");
    }
    if (manifest.contains("rewards")) {
        const fs::path rewards_path = base / get_as<std::string>(manifest, "rewards");
        data.rewards = matrix_from_csv(read_text_file(rewards_path), rewards_path.string());
        if (data.rewards->rows() != data.risks.episodes() ||
            data.rewards->cols() != data.grid.size()) {
            schema(rewards_path.string() + ": reward matrix shape differs from the risk matrix");
        }
    }
    validate_risk_matrix(data.risks, data.grid);
    return data;
}

}  // namespace qltt
