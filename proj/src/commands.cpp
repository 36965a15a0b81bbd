#include "qltt/commands.hpp"

#include <algorithm>
#include <sstream>

#include "qltt/random.hpp"

namespace qltt {

namespace fs = std::filesystem;

namespace {

struct Dataset {
    HyperGrid grid;
    RiskMatrix calibration;
    std::optional<Matrix> rewards;
    std::optional<RiskMatrix> test;
    std::optional<SchedulerStudy> study;
};

HyperGrid scheduler_grid(const SchedulerEnv& env) {
    return build_multiplier_grid(HyperPoint{0, env.base}, env.multipliers);
}

bool needs_pilot(const ExperimentConfig& cfg) {
    return cfg.alpha_from_pilot || cfg.ordering_from_pilot;
}

Dataset generate(const ExperimentConfig& cfg, bool with_test) {
    Dataset d;
    if (const auto* syn = std::get_if<SyntheticEnv>(&cfg.env)) {
        d.grid = family_grid(syn->family);
        d.calibration = sample_risk_matrix(syn->family, d.grid, cfg.n_cal,
                                           derive_seed(cfg.seed, streams::calibration, 0));
        if (with_test && cfg.n_test > 0) {
            d.test = sample_risk_matrix(syn->family, d.grid, cfg.n_test,
                                        derive_seed(cfg.seed, streams::test, 0));
        }
    } else if (const auto* sched = std::get_if<SchedulerEnv>(&cfg.env)) {
        if (needs_pilot(cfg)) d.study = run_pilot(*sched, cfg.spec.q, cfg.seed);
        d.grid = scheduler_grid(*sched);
        auto cal = simulate_grid(sched->scheduler, d.grid,
                                 episode_seeds(cfg.seed, streams::calibration, cfg.n_cal));
        d.calibration = std::move(cal.risks);
        d.rewards = std::move(cal.rewards);
        if (with_test && cfg.n_test > 0) {
            d.test = simulate_grid(sched->scheduler, d.grid,
                                   episode_seeds(cfg.seed, streams::test, cfg.n_test))
                         .risks;
        }
    } else {
        const auto& file = std::get<FileEnv>(cfg.env);
        auto data = load_risk_matrix(file.calibration);
        d.grid = std::move(data.grid);
        d.calibration = std::move(data.risks);
        d.rewards = std::move(data.rewards);
        if (with_test && file.test) {
            auto test = load_risk_matrix(*file.test);
            if (!(test.grid == d.grid)) {
                throw Error(ErrorCode::schema_mismatch, "test matrix grid differs from calibration grid");
            }
            d.test = std::move(test.risks);
        }
    }
    return d;
}

void write_json(const fs::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::string describe_point(const HyperGrid& g, std::size_t id) {
    std::ostringstream os;
    os << id << " (";
    const auto& p = g[id].params;
    for (std::size_t k = 0; k < p.size(); ++k) os << (k ? ", " : "") << p[k];
    os << ")";
    return os.str();
}

std::string method_tag(Method m) { return std::string(to_string(m)); }

std::optional<CalibrationResult> load_result_if_present(const std::optional<fs::path>& path,
                                                        const char* label, ReportOutput& out,
                                                        std::ostream& log) {
    if (!path) return std::nullopt;
    if (!fs::exists(*path)) {
        const std::string w = std::string("warning: ") + label + " result " + path->string() +
                              " not found; writing partial output";
        out.warnings.push_back(w);
        log << w << "\n";
        return std::nullopt;
    }
    return result_from_json(parse_json(read_text_file(*path), path->string()));
}

}  // namespace

ExperimentConfig apply_overrides(ExperimentConfig cfg, const Overrides& o) {
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.output_dir = *o.out;
    if (o.method) {
        cfg.spec.method = *o.method;
        cfg.methods = {*o.method};
    }
    return cfg;
}

SchedulerStudy run_pilot(const SchedulerEnv& env, double q, std::uint64_t seed) {
    SchedulerStudy s;
    s.grid = scheduler_grid(env);
    s.pilot_risks = simulate_grid(env.scheduler, s.grid,
                                  episode_seeds(seed, streams::pilot, env.pilot_episodes))
                        .risks;
    s.pilot = summarize_pilot(s.pilot_risks, q);
    return s;
}

ResolvedRun resolve_run(const ExperimentConfig& cfg, Method method, const SchedulerStudy* study) {
    ResolvedRun run;
    run.spec = cfg.spec;
    run.spec.method = method;
    if ((cfg.alpha_from_pilot || cfg.ordering_from_pilot) && study == nullptr) {
        throw Error(ErrorCode::invalid_config, "pilot-derived settings need a pilot run");
    }
    if (cfg.alpha_from_pilot) run.spec.alpha = study->pilot.median_quantile;
    run.risk_cap = cfg.risk_cap;
    if (!run.risk_cap) {
        if (const auto* sched = std::get_if<SchedulerEnv>(&cfg.env);
            sched && sched->risk_cap_multiple) {
            run.risk_cap = *sched->risk_cap_multiple * run.spec.alpha;
        }
    }
    if (method != Method::mean) run.risk_cap.reset();
    if (cfg.ordering_from_pilot) {
        if (method == Method::quantile) {
            run.spec.ordering = order_by(study->pilot.quantile);
        } else {
            const RiskMatrix scored =
                run.risk_cap ? cap_risks(study->pilot_risks, *run.risk_cap) : study->pilot_risks;
            run.spec.ordering = order_by(column_means(scored.values));
        }
    }
    return run;
}

CalibrateOutput cmd_calibrate(const ExperimentConfig& cfg, std::ostream& log) {
    const Dataset data = generate(cfg, true);
    const auto* study = data.study ? &*data.study : nullptr;

    if (!std::holds_alternative<FileEnv>(cfg.env)) {
        save_risk_dataset({data.calibration, data.grid, data.rewards}, cfg.output_dir, "calibration");
        if (data.test) save_risk_dataset({*data.test, data.grid, std::nullopt}, cfg.output_dir, "test");
    }

    CalibrateOutput out;
    for (Method method : cfg.methods) {
        const auto run = resolve_run(cfg, method, study);
        const auto [matrix, spec] = prepare_for_method(data.calibration, run.spec, run.risk_cap);
        CalibrationResult result =
            calibrate(matrix, data.grid, spec, data.rewards ? &*data.rewards : nullptr);
        result.seed = cfg.seed;

        Json j = to_json(result);
        if (run.risk_cap) j["risk_cap"] = *run.risk_cap;
        const fs::path path = cfg.output_dir / ("result_" + method_tag(method) + ".json");
        write_json(path, j);

        log << "[" << to_string(method) << "] n = " << result.n << ", |grid| = " << data.grid.size()
            << ", alpha = " << run.spec.alpha;
        if (run.risk_cap) log << " (risk cap " << *run.risk_cap << ")";
        log << "\n";
        if (result.certified.empty()) {
            log << "[" << to_string(method) << "] no hyperparameter certified\n";
        } else {
            log << "[" << to_string(method) << "] |certified| = " << result.certified.size()
                << ", selected = " << describe_point(data.grid, *result.selected) << "\n";
        }
        const auto [lo, hi] = std::minmax_element(result.p_values.begin(), result.p_values.end());
        log << "[" << to_string(method) << "] p-values in [" << *lo << ", " << *hi << "]\n";
        log << "[" << to_string(method) << "] wrote " << path.string() << "\n";

        out.result_files.push_back(path);
        out.results.push_back(std::move(result));
    }
    return out;
}

std::vector<CoverageReport> cmd_coverage(const ExperimentConfig& cfg, std::ostream& log) {
    std::unique_ptr<TrialSource> source;
    std::optional<SchedulerStudy> study;
    if (const auto* syn = std::get_if<SyntheticEnv>(&cfg.env)) {
        source = std::make_unique<SyntheticSource>(syn->family);
    } else if (const auto* sched = std::get_if<SchedulerEnv>(&cfg.env)) {
        if (needs_pilot(cfg)) study = run_pilot(*sched, cfg.spec.q, cfg.seed);
        const auto grid = scheduler_grid(*sched);
        log << "simulating a pool of " << sched->pool_episodes << " episodes over " << grid.size()
            << " grid points\n";
        auto pool = simulate_grid(sched->scheduler, grid,
                                  episode_seeds(cfg.seed, streams::pool, sched->pool_episodes));
        source = std::make_unique<PoolSource>(grid, std::move(pool.risks), std::move(pool.rewards));
    } else {
        const auto& file = std::get<FileEnv>(cfg.env);
        auto data = load_risk_matrix(file.calibration);
        source = std::make_unique<PoolSource>(std::move(data.grid), std::move(data.risks),
                                              std::move(data.rewards));
    }

    std::vector<CoverageReport> reports;
    for (Method method : cfg.methods) {
        const auto run = resolve_run(cfg, method, study ? &*study : nullptr);
        CoverageOptions opt;
        opt.n_cal = cfg.n_cal;
        opt.n_test = cfg.n_test;
        opt.trials = cfg.trials;
        opt.seed = cfg.seed;
        opt.workers = cfg.workers;
        opt.risk_cap = run.risk_cap;
        auto report = run_coverage(*source, run.spec, opt);
        const fs::path path = cfg.output_dir / ("coverage_" + method_tag(method) + ".json");
        write_json(path, to_json(report));
        std::size_t nonempty = 0;
        for (const auto& r : report.records) nonempty += r.certified.empty() ? 0 : 1;
        log << "[" << to_string(method) << "] trials = " << report.trials
            << ", violation rate = " << report.violation_rate << " (95% CI [" << report.ci_low
            << ", " << report.ci_high << "]), non-empty certified sets = " << nonempty << "\n";
        log << "[" << to_string(method) << "] wrote " << path.string() << "\n";
        reports.push_back(std::move(report));
    }
    return reports;
}

void cmd_simulate(const ExperimentConfig& cfg, std::ostream& log) {
    if (!std::holds_alternative<SchedulerEnv>(cfg.env)) {
        throw Error(ErrorCode::invalid_config, "simulate needs a scheduler environment");
    }
    const Dataset data = generate(cfg, true);
    const auto cal = save_risk_dataset({data.calibration, data.grid, data.rewards}, cfg.output_dir,
                                       "calibration");
    log << "wrote " << cal.string() << " (" << data.calibration.episodes() << " episodes x "
        << data.grid.size() << " grid points)\n";
    if (data.test) {
        const auto test = save_risk_dataset({*data.test, data.grid, std::nullopt}, cfg.output_dir, "test");
        log << "wrote " << test.string() << " (" << data.test->episodes() << " episodes)\n";
    }
}

ReportOutput cmd_report(const ReportInputs& in, std::ostream& log) {
    ReportOutput out;
    const auto ltt = load_result_if_present(in.ltt_result, "mean", out, log);
    const auto qltt = load_result_if_present(in.qltt_result, "quantile", out, log);

    if (ltt || qltt) {
        if (!in.test_matrix) {
            throw Error(ErrorCode::invalid_config, "histogram output needs --test <risk matrix>");
        }
        const auto test = load_risk_matrix(*in.test_matrix);
        std::string csv =
            "# columns: episode = test episode index; method = mean|quantile; lambda_id = selected "
            "grid id; risk = R(Z, lambda) on that episode\n"
            "episode,method,lambda_id,risk\n";
        std::vector<std::pair<std::string, std::size_t>> selections;
        for (const auto* r : {ltt ? &*ltt : nullptr, qltt ? &*qltt : nullptr}) {
            if (r == nullptr) continue;
            const std::string name(to_string(r->spec.method));
            if (r->p_values.size() != test.grid.size()) {
                throw Error(ErrorCode::schema_mismatch,
                            name + " result covers " + std::to_string(r->p_values.size()) +
                                " grid points, test matrix has " + std::to_string(test.grid.size()));
            }
            if (!r->selected) {
                const std::string w = "warning: " + name + " result certified nothing; no histogram rows";
                out.warnings.push_back(w);
                log << w << "\n";
                continue;
            }
            selections.emplace_back(name, *r->selected);
        }
        for (std::size_t i = 0; i < test.risks.episodes(); ++i) {
            for (const auto& [name, id] : selections) {
                csv += std::to_string(i) + "," + name + "," + std::to_string(id) + "," +
                       format_double(test.risks.values(i, id)) + "\n";
            }
        }
        out.histogram = in.out_dir / "histogram.csv";
        write_text_file(*out.histogram, csv);
        log << "wrote " << out.histogram->string() << "\n";
    }

    if (!in.coverage.empty()) {
        std::string csv =
            "# columns: trial = trial index; method = mean|quantile; selected_id = selected grid id "
            "(empty if none); mean_risk, quantile_risk = ground-truth mean and (1-q)-quantile of "
            "the selected point; test_mean_risk, test_quantile_risk = the same on the trial's test "
            "episodes\n"
            "trial,method,selected_id,mean_risk,quantile_risk,test_mean_risk,test_quantile_risk\n";
        auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
        for (const auto& path : in.coverage) {
            if (!fs::exists(path)) {
                const std::string w = "warning: coverage file " + path.string() + " not found; skipped";
                out.warnings.push_back(w);
                log << w << "\n";
                continue;
            }
            const auto report = coverage_from_json(parse_json(read_text_file(path), path.string()));
            const std::string name(to_string(report.spec.method));
            for (const auto& rec : report.records) {
                csv += std::to_string(rec.trial) + "," + name + "," +
                       (rec.selected ? std::to_string(*rec.selected) : std::string()) + "," +
                       cell(rec.selected_mean) + "," + cell(rec.selected_quantile) + "," +
                       cell(rec.test_mean) + "," + cell(rec.test_quantile) + "\n";
            }
        }
        out.violin = in.out_dir / "violin.csv";
        write_text_file(*out.violin, csv);
        log << "wrote " << out.violin->string() << "\n";
    }
    if (!out.histogram && !out.violin) {
        throw Error(ErrorCode::file_not_found, "no usable result or coverage file given");
    }
    return out;
}

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::file_not_found:
        case ErrorCode::io_error:
            return 3;
        default:
            return 2;
    }
}

}  // namespace qltt
