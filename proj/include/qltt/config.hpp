// config.hpp
//
// Experiment configuration (JSON). Unknown keys are rejected everywhere.
// See README.md for the full schema.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include "qltt/core.hpp"
#include "qltt/io.hpp"
#include "qltt/scheduler.hpp"
#include "qltt/synthetic.hpp"

namespace qltt {

struct SyntheticEnv {
    SyntheticFamily family;
};

struct SchedulerEnv {
    SchedulerConfig scheduler;
    std::vector<double> base;         // lambda*
    std::vector<double> multipliers;  // per-coordinate factors
    std::size_t pilot_episodes = 200;
    // Episodes simulated once and resampled by the coverage command.
    std::size_t pool_episodes = 2000;
    // Mean method on delay risks: cap = risk_cap_multiple * alpha.
    std::optional<double> risk_cap_multiple;
};

struct FileEnv {
    std::filesystem::path calibration;
    std::optional<std::filesystem::path> test;
};

using EnvConfig = std::variant<SyntheticEnv, SchedulerEnv, FileEnv>;

struct ExperimentConfig {
    ControlSpec spec;
    // alpha := median over grid points of the pilot (1 - q)-quantiles.
    bool alpha_from_pilot = false;
    // FST ordering := grid points sorted by their pilot estimate.
    bool ordering_from_pilot = false;
    EnvConfig env;
    std::size_t n_cal = 0;
    std::size_t n_test = 100;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "out";
    std::size_t workers = 1;
    // Mean method on unbounded risks: risks become min(R, cap) / cap and
    // alpha becomes alpha / cap.
    std::optional<double> risk_cap;
    // Methods run by the coverage command; defaults to {spec.method}.
    std::vector<Method> methods;
};

// Relative paths inside the config resolve against `base_dir`.
ExperimentConfig config_from_json(const Json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

// n_cal / trials defaults when absent: 2000 / 500 for synthetic and file
// environments, 300 / 100 for the scheduler.
inline constexpr std::size_t kSyntheticCal = 2000;
inline constexpr std::size_t kSyntheticTrials = 500;
inline constexpr std::size_t kSchedulerCal = 300;
inline constexpr std::size_t kSchedulerTrials = 100;

Json to_json(const SchedulerConfig& cfg);
SchedulerConfig scheduler_from_json(const Json& j);

}  // namespace qltt
