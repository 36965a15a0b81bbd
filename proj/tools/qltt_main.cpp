// qltt: risk-controlling hyperparameter calibration from the command line.
//
//   qltt calibrate --config cfg.json [--seed N] [--out DIR] [--method mean|quantile]
//   qltt coverage  --config cfg.json [...]
//   qltt simulate  --config cfg.json [...]
//   qltt report    --ltt result_mean.json --qltt result_quantile.json --test test.json
//                  --coverage coverage_mean.json --coverage coverage_quantile.json --out DIR

#include <CLI11.hpp>
#include <iostream>
#include <sstream>

#include "qltt/commands.hpp"

namespace {

struct GlobalFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> method;
    bool quiet = false;
};

qltt::ExperimentConfig load(const GlobalFlags& g) {
    qltt::Overrides o;
    o.seed = g.seed;
    if (g.out) o.out = *g.out;
    if (g.method) o.method = qltt::parse_method(*g.method);
    return qltt::apply_overrides(qltt::load_config(g.config), o);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Calibrate hyperparameters with certified mean or quantile risk control"};
    app.require_subcommand(1);

    GlobalFlags g;
    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", g.config, "Experiment config (JSON)");
        if (needs_config) opt->required();
        sub->add_option("--seed", g.seed, "Master seed (overrides config)");
        sub->add_option("--out", g.out, "Output directory (overrides config)");
        sub->add_option("--method", g.method, "mean | quantile (overrides config)")
            ->check(CLI::IsMember({"mean", "quantile"}));
        sub->add_flag("--quiet", g.quiet, "Suppress the summary");
    };

    auto* calibrate = app.add_subcommand("calibrate", "Run one calibration and write result_<method>.json");
    add_common(calibrate, true);
    auto* coverage = app.add_subcommand("coverage", "Repeated calibrations against ground truth");
    add_common(coverage, true);
    auto* simulate = app.add_subcommand("simulate", "Scheduler episodes to risk-matrix files");
    add_common(simulate, true);

    auto* report = app.add_subcommand("report", "Figure-data CSVs from result and coverage files");
    add_common(report, false);
    qltt::ReportInputs rin;
    std::string ltt, qltt_path, test;
    report->add_option("--ltt", ltt, "Mean-method result file");
    report->add_option("--qltt", qltt_path, "Quantile-method result file");
    report->add_option("--test", test, "Test risk matrix (manifest or CSV)");
    report->add_option("--coverage", rin.coverage, "Coverage report file (repeatable)");

    CLI11_PARSE(app, argc, argv);

    std::ostringstream sink;
    std::ostream& log = g.quiet ? static_cast<std::ostream&>(sink) : std::cout;
    try {
        if (calibrate->parsed()) {
            qltt::cmd_calibrate(load(g), log);
        } else if (coverage->parsed()) {
            qltt::cmd_coverage(load(g), log);
        } else if (simulate->parsed()) {
            qltt::cmd_simulate(load(g), log);
        } else if (report->parsed()) {
            if (!ltt.empty()) rin.ltt_result = ltt;
            if (!qltt_path.empty()) rin.qltt_result = qltt_path;
            if (!test.empty()) rin.test_matrix = test;
            rin.out_dir = g.out ? *g.out : "out";
            qltt::cmd_report(rin, log);
        }
    } catch (const qltt::Error& e) {
        std::cerr << "error (" << qltt::to_string(e.code()) << "): " << e.what() << "\n";
        return qltt::exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
