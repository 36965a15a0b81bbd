// commands.hpp
//
// The CLI subcommands as library calls, so tests can drive them directly.
#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qltt/calibrate.hpp"
#include "qltt/config.hpp"
#include "qltt/experiment.hpp"

namespace qltt {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
    std::optional<Method> method;
};

// Applies --seed / --out / --method on top of a loaded config.
ExperimentConfig apply_overrides(ExperimentConfig cfg, const Overrides& o);

// Pilot-derived quantities of a scheduler experiment.
struct SchedulerStudy {
    HyperGrid grid;
    RiskMatrix pilot_risks;
    PilotSummary pilot;
};

SchedulerStudy run_pilot(const SchedulerEnv& env, double q, std::uint64_t seed);

// The spec and risk cap a method actually runs with: pilot alpha and
// ordering resolved, method substituted.
struct ResolvedRun {
    ControlSpec spec;
    std::optional<double> risk_cap;
};

ResolvedRun resolve_run(const ExperimentConfig& cfg, Method method, const SchedulerStudy* study);

struct CalibrateOutput {
    std::vector<std::filesystem::path> result_files;
    std::vector<CalibrationResult> results;
};

// Writes result_<method>.json for every configured method plus the
// calibration/test datasets it generated. Summary lines go to `log`.
CalibrateOutput cmd_calibrate(const ExperimentConfig& cfg, std::ostream& log);

// Writes coverage_<method>.json for every configured method.
std::vector<CoverageReport> cmd_coverage(const ExperimentConfig& cfg, std::ostream& log);

// Scheduler episodes -> calibration.{csv,json} and test.{csv,json}.
void cmd_simulate(const ExperimentConfig& cfg, std::ostream& log);

struct ReportInputs {
    std::optional<std::filesystem::path> ltt_result;
    std::optional<std::filesystem::path> qltt_result;
    std::optional<std::filesystem::path> test_matrix;
    std::vector<std::filesystem::path> coverage;
    std::filesystem::path out_dir = "out";
};

struct ReportOutput {
    std::optional<std::filesystem::path> histogram;
    std::optional<std::filesystem::path> violin;
    std::vector<std::string> warnings;
};

// histogram.csv: one row per (test episode, method) with the risk of that
// method's selected point. violin.csv: one row per (trial, method) with the
// ground-truth mean and quantile risk of the selected point.
ReportOutput cmd_report(const ReportInputs& in, std::ostream& log);

// Exit status for a failure: 2 for validation problems, 3 for I/O.
int exit_code_for(ErrorCode code) noexcept;

}  // namespace qltt
