// scheduler.hpp
//
// Toy downlink resource-block scheduler. Each TTI (1 ms) every UE may
// receive a packet, channel qualities evolve, and the resource blocks go to
// the UEs with the highest score
//
//   w1 * cqi + w2 * queue / buffer_cap + w3 * oldest_age / n_tti
//     + w4 * (1 - share of blocks received so far)
//
// where (w1, w2, w3, w4) is the hyperparameter being calibrated. Equal scores
// are broken round-robin, so the all-zero weight vector is a plain
// round-robin scheduler.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qltt/core.hpp"

namespace qltt {

struct QosClass {
    // Probability that a UE of this class receives one packet in a TTI.
    double arrival_prob = 0.0;
    // Delay budget in ms.
    double budget_ms = 0.0;

    bool operator==(const QosClass&) const = default;
};

struct ChannelParams {
    // AR(1) around a per-UE mean drawn from U(mean_lo, mean_hi), reflected
    // into [0, 1].
    double rho = 0.9;
    double sigma = 0.05;
    double mean_lo = 0.4;
    double mean_hi = 1.0;

    bool operator==(const ChannelParams&) const = default;
};

struct SchedulerConfig {
    std::size_t n_ue = 8;
    std::size_t n_rb = 2;
    std::size_t n_tti = 2000;
    // Class 1 is light and tight; the other classes carry most of the load,
    // so the reward and the class-1 delay pull the weights apart.
    std::vector<QosClass> classes = {{0.15, 10.0}, {0.55, 20.0}, {0.55, 50.0}, {0.55, 100.0}};
    std::size_t buffer_cap = 100;
    ChannelParams channel;
    // Packets served per block at unit channel quality; a block serves
    // round(serve_rate * cqi) packets.
    double serve_rate = 4.0;

    bool operator==(const SchedulerConfig&) const = default;
};

// Throws Error{invalid_config}.
void validate_config(const SchedulerConfig& cfg);

// The random part of an episode (UE classes, arrivals, channel), independent
// of the scheduler weights so every grid point sees the same episode.
struct EpisodeScenario {
    std::uint64_t seed = 0;
    std::size_t n_ue = 0;
    std::size_t n_tti = 0;
    std::vector<std::size_t> ue_class;   // per UE, 0-based (0 is QoS class 1)
    std::vector<std::uint8_t> arrivals;  // n_tti x n_ue
    std::vector<double> cqi;             // n_tti x n_ue, in [0, 1]
};

EpisodeScenario generate_scenario(const SchedulerConfig& cfg, std::uint64_t seed);

struct EpisodeTrace {
    // Delays (ms) of delivered packets, per QoS class.
    std::vector<std::vector<double>> class_delays;
    // Negative count of packets that missed their budget, were dropped on
    // buffer overflow, or were still queued at the end.
    double reward = 0.0;
    std::uint64_t seed = 0;
    // No UE was assigned QoS class 1.
    bool no_class1 = false;

    std::size_t arrived = 0;
    std::size_t served = 0;
    std::size_t dropped = 0;
    std::size_t residual = 0;
    std::size_t max_queue = 0;
    std::size_t max_blocks_per_tti = 0;

    const std::vector<double>& class1_delays() const { return class_delays.front(); }
};

// Runs the scheduler with 4 nonnegative weights on a pre-drawn scenario.
EpisodeTrace run_scheduler(const SchedulerConfig& cfg, const EpisodeScenario& scenario,
                           std::span<const double> weights);

EpisodeTrace run_episode(const SchedulerConfig& cfg, const HyperPoint& lam, std::uint64_t seed);

// Mean class-1 delay in ms; 0 when the episode delivered no class-1 packet.
double episode_risk(const EpisodeTrace& trace);

inline constexpr std::size_t kDefaultGridCap = 1'000'000;

// Cartesian product base * (a_1, ..., a_d) over the multipliers, with ids in
// lexicographic order (first coordinate varies slowest).
HyperGrid build_multiplier_grid(const HyperPoint& base, std::span<const double> multipliers,
                                std::size_t cap = kDefaultGridCap);

struct SimulatedData {
    RiskMatrix risks;  // episodes x grid, in ms, not unit-bounded
    Matrix rewards;    // episodes x grid
    std::vector<bool> no_class1;
};

// One row per seed; every grid point is run on the same scenario.
SimulatedData simulate_grid(const SchedulerConfig& cfg, const HyperGrid& grid,
                            std::span<const std::uint64_t> seeds);

}  // namespace qltt
