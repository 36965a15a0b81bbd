#include "qltt/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "qltt/calibrate.hpp"
#include "qltt/random.hpp"
#include "qltt/stats.hpp"

namespace qltt {

namespace {

TrueFunctionals column_functionals(std::vector<double> column, double q, std::optional<double> cap) {
    if (cap) {
        for (double& v : column) v = std::min(v, *cap) / *cap;
    }
    std::sort(column.begin(), column.end());
    TrueFunctionals t;
    t.mean = std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(column.size());
    t.quantile = empirical_quantile(column, q);
    return t;
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> optional_double(const Json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<double>();
}

}  // namespace

SyntheticSource::SyntheticSource(SyntheticFamily family)
    : family_(std::move(family)), grid_(family_grid(family_)) {}

std::vector<TrueFunctionals> SyntheticSource::truth(double q, std::optional<double> cap) const {
    if (cap) {
        throw Error(ErrorCode::invalid_spec, "risk caps are not supported for synthetic families");
    }
    return true_functionals(family_, grid_, q);
}

TrialData SyntheticSource::draw(std::uint64_t trial_seed, std::size_t n_cal, std::size_t n_test) const {
    TrialData d;
    d.calibration = sample_risk_matrix(family_, grid_, n_cal, derive_seed(trial_seed, streams::calibration, 0));
    if (n_test > 0) {
        d.test = sample_risk_matrix(family_, grid_, n_test, derive_seed(trial_seed, streams::test, 0));
    }
    return d;
}

PoolSource::PoolSource(HyperGrid grid, RiskMatrix pool, std::optional<Matrix> rewards)
    : grid_(std::move(grid)), pool_(std::move(pool)), rewards_(std::move(rewards)) {
    validate_risk_matrix(pool_, grid_);
    if (rewards_ && (rewards_->rows() != pool_.episodes() || rewards_->cols() != pool_.columns())) {
        throw Error(ErrorCode::dimension_mismatch, "reward pool shape differs from the risk pool");
    }
}

std::vector<TrueFunctionals> PoolSource::truth(double q, std::optional<double> cap) const {
    std::vector<TrueFunctionals> out;
    out.reserve(grid_.size());
    for (std::size_t j = 0; j < grid_.size(); ++j) {
        out.push_back(column_functionals(pool_.values.column(j), q, cap));
    }
    return out;
}

TrialData PoolSource::draw(std::uint64_t trial_seed, std::size_t n_cal, std::size_t n_test) const {
    Rng rng(derive_seed(trial_seed, streams::resample, 0));
    const std::size_t cols = pool_.columns();
    auto resample = [&](std::size_t rows, Matrix* reward_out) {
        RiskMatrix m;
        m.bounded_unit = pool_.bounded_unit;
        m.values = Matrix(rows, cols);
        if (reward_out) *reward_out = Matrix(rows, cols);
        for (std::size_t i = 0; i < rows; ++i) {
            const auto src = static_cast<std::size_t>(uniform_index(rng, pool_.episodes()));
            const auto row = pool_.values.row(src);
            std::copy(row.begin(), row.end(), &m.values(i, 0));
            if (reward_out) {
                const auto rrow = rewards_->row(src);
                std::copy(rrow.begin(), rrow.end(), &(*reward_out)(i, 0));
            }
        }
        return m;
    };
    TrialData d;
    if (rewards_) {
        Matrix r;
        d.calibration = resample(n_cal, &r);
        d.rewards = std::move(r);
    } else {
        d.calibration = resample(n_cal, nullptr);
    }
    if (n_test > 0) d.test = resample(n_test, nullptr);
    return d;
}

RiskMatrix cap_risks(const RiskMatrix& m, double cap) {
    if (!(cap > 0.0)) throw Error(ErrorCode::invalid_range, "risk cap must be positive");
    RiskMatrix out;
    out.bounded_unit = true;
    out.values = Matrix(m.episodes(), m.columns());
    for (std::size_t i = 0; i < m.episodes(); ++i) {
        for (std::size_t j = 0; j < m.columns(); ++j) {
            out.values(i, j) = std::min(m.values(i, j), cap) / cap;
        }
    }
    return out;
}

std::pair<RiskMatrix, ControlSpec> prepare_for_method(const RiskMatrix& m, const ControlSpec& spec,
                                                      std::optional<double> risk_cap) {
    if (spec.method != Method::mean || !risk_cap) {
        if (spec.method == Method::mean && !m.bounded_unit) {
            throw Error(ErrorCode::schema_mismatch,
                        "method=mean needs unit-bounded risks; supply risk_cap or use method=quantile");
        }
        return {m, spec};
    }
    ControlSpec capped = spec;
    capped.alpha = spec.alpha / *risk_cap;
    return {cap_risks(m, *risk_cap), capped};
}

CoverageReport run_coverage(const TrialSource& source, const ControlSpec& spec,
                            const CoverageOptions& options) {
    if (options.trials == 0) throw Error(ErrorCode::invalid_config, "trials must be >= 1");
    if (options.n_cal == 0) throw Error(ErrorCode::invalid_config, "n_cal must be >= 1");
    const auto start = std::chrono::steady_clock::now();
    const auto& grid = source.grid();
    validate_spec(spec, grid.size());

    const std::optional<double> cap = spec.method == Method::mean ? options.risk_cap : std::nullopt;
    if (spec.method == Method::mean && !cap && !source.unit_bounded()) {
        throw Error(ErrorCode::schema_mismatch,
                    "method=mean needs unit-bounded risks; supply risk_cap or use method=quantile");
    }
    ControlSpec run_spec = spec;
    if (cap) run_spec.alpha = spec.alpha / *cap;
    const auto truth = source.truth(spec.q, cap);
    const auto raw_truth = cap ? source.truth(spec.q, std::nullopt) : truth;

    CoverageReport report;
    report.source = source.kind();
    report.spec = run_spec;
    report.risk_cap = cap;
    report.n_cal = options.n_cal;
    report.n_test = options.n_test;
    report.trials = options.trials;
    report.seed = options.seed;
    report.records.resize(options.trials);

    auto run_trial = [&](std::size_t t) {
        TrialRecord rec;
        rec.trial = t;
        rec.seed = derive_seed(options.seed, streams::trial, t);
        const TrialData data = source.draw(rec.seed, options.n_cal, options.n_test);
        const RiskMatrix cal = cap ? cap_risks(data.calibration, *cap) : data.calibration;
        const auto result =
            calibrate(cal, grid, run_spec, data.rewards ? &*data.rewards : nullptr);
        rec.certified = result.certified;
        for (std::size_t id : rec.certified) {
            const double value =
                spec.method == Method::mean ? truth[id].mean : truth[id].quantile;
            rec.certified_truth.push_back(value);
            if (value > run_spec.alpha) rec.violation = true;
        }
        rec.selected = result.selected;
        if (rec.selected) {
            rec.selected_mean = raw_truth[*rec.selected].mean;
            rec.selected_quantile = raw_truth[*rec.selected].quantile;
            if (data.test) {
                const auto f = column_functionals(data.test->values.column(*rec.selected), spec.q,
                                                  std::nullopt);
                rec.test_mean = f.mean;
                rec.test_quantile = f.quantile;
            }
        }
        report.records[t] = std::move(rec);
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, options.trials));
    if (workers == 1) {
        for (std::size_t t = 0; t < options.trials; ++t) run_trial(t);
    } else {
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t t = w; t < options.trials; t += workers) run_trial(t);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    for (const auto& rec : report.records) report.violations += rec.violation ? 1 : 0;
    report.violation_rate =
        static_cast<double>(report.violations) / static_cast<double>(report.trials);
    const auto ci = clopper_pearson(report.violations, report.trials);
    report.ci_low = ci.low;
    report.ci_high = ci.high;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

Json to_json(const CoverageReport& r, bool include_timing) {
    Json records = Json::array();
    for (const auto& rec : r.records) {
        Json j = {{"trial", rec.trial},
                  {"seed", rec.seed},
                  {"certified_size", rec.certified.size()},
                  {"certified", rec.certified},
                  {"certified_truth", rec.certified_truth}};
        j["selected"] = rec.selected ? Json(*rec.selected) : Json(nullptr);
        j["selected_mean"] = optional_json(rec.selected_mean);
        j["selected_quantile"] = optional_json(rec.selected_quantile);
        j["test_mean"] = optional_json(rec.test_mean);
        j["test_quantile"] = optional_json(rec.test_quantile);
        j["violation"] = rec.violation;
        records.push_back(std::move(j));
    }
    Json j = {{"format", "qltt-coverage"},
              {"source", r.source},
              {"spec", to_json(r.spec)}};
    j["risk_cap"] = optional_json(r.risk_cap);
    j["n_cal"] = r.n_cal;
    j["n_test"] = r.n_test;
    j["trials"] = r.trials;
    j["seed"] = r.seed;
    j["violations"] = r.violations;
    j["violation_rate"] = r.violation_rate;
    j["ci_low"] = r.ci_low;
    j["ci_high"] = r.ci_high;
    j["records"] = std::move(records);
    if (include_timing) j["timing"] = {{"wall_seconds", r.wall_seconds}};
    return j;
}

CoverageReport coverage_from_json(const Json& j) {
    try {
        if (j.at("format").get<std::string>() != "qltt-coverage") {
            throw Error(ErrorCode::schema_mismatch, "not a coverage report");
        }
        CoverageReport r;
        r.source = j.at("source").get<std::string>();
        r.spec = spec_from_json(j.at("spec"));
        r.risk_cap = optional_double(j, "risk_cap");
        r.n_cal = j.at("n_cal").get<std::size_t>();
        r.n_test = j.at("n_test").get<std::size_t>();
        r.trials = j.at("trials").get<std::size_t>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.violations = j.at("violations").get<std::size_t>();
        r.violation_rate = j.at("violation_rate").get<double>();
        r.ci_low = j.at("ci_low").get<double>();
        r.ci_high = j.at("ci_high").get<double>();
        for (const auto& rj : j.at("records")) {
            TrialRecord rec;
            rec.trial = rj.at("trial").get<std::size_t>();
            rec.seed = rj.at("seed").get<std::uint64_t>();
            rec.certified = rj.at("certified").get<std::vector<std::size_t>>();
            rec.certified_truth = rj.at("certified_truth").get<std::vector<double>>();
            if (!rj.at("selected").is_null()) rec.selected = rj.at("selected").get<std::size_t>();
            rec.selected_mean = optional_double(rj, "selected_mean");
            rec.selected_quantile = optional_double(rj, "selected_quantile");
            rec.test_mean = optional_double(rj, "test_mean");
            rec.test_quantile = optional_double(rj, "test_quantile");
            rec.violation = rj.at("violation").get<bool>();
            r.records.push_back(std::move(rec));
        }
        if (r.records.size() != r.trials) {
            throw Error(ErrorCode::schema_mismatch, "record count differs from 'trials'");
        }
        if (const auto it = j.find("timing"); it != j.end()) {
            r.wall_seconds = it->at("wall_seconds").get<double>();
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::schema_mismatch, std::string("coverage report: ") + e.what());
    }
}

PilotSummary summarize_pilot(const RiskMatrix& pilot, double q) {
    if (pilot.episodes() == 0) throw Error(ErrorCode::empty_input, "pilot run has no episodes");
    PilotSummary s;
    for (std::size_t j = 0; j < pilot.columns(); ++j) {
        const auto f = column_functionals(pilot.values.column(j), q, std::nullopt);
        s.mean.push_back(f.mean);
        s.quantile.push_back(f.quantile);
    }
    std::vector<double> sorted = s.quantile;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t k = sorted.size();
    s.median_quantile = k % 2 == 1 ? sorted[k / 2] : 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]);
    return s;
}

std::vector<std::size_t> order_by(const std::vector<double>& score) {
    std::vector<std::size_t> ids(score.size());
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    std::stable_sort(ids.begin(), ids.end(),
                     [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
    return ids;
}

std::vector<std::uint64_t> episode_seeds(std::uint64_t master, std::uint64_t stream,
                                         std::size_t count) {
    std::vector<std::uint64_t> seeds(count);
    for (std::size_t i = 0; i < count; ++i) seeds[i] = derive_seed(master, stream, i);
    return seeds;
}

}  // namespace qltt
