#include "qltt/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "qltt/random.hpp"

namespace qltt {

namespace {

[[noreturn]] void bad_config(const std::string& what) {
    throw Error(ErrorCode::invalid_config, what);
}

double reflect_unit(double x) {
    // Reflect into [0, 1]; terminates because each step shrinks the excess.
    while (x < 0.0 || x > 1.0) x = x < 0.0 ? -x : 2.0 - x;
    return x;
}

// Fixed-capacity FIFO of arrival TTIs.
class PacketQueue {
public:
    explicit PacketQueue(std::size_t capacity) : slots_(capacity) {}

    std::size_t size() const noexcept { return count_; }
    bool empty() const noexcept { return count_ == 0; }
    bool full() const noexcept { return count_ == slots_.size(); }
    std::size_t front() const { return slots_[head_]; }

    void push_back(std::size_t arrival) {
        slots_[(head_ + count_) % slots_.size()] = arrival;
        ++count_;
    }

    void pop_front() {
        head_ = (head_ + 1) % slots_.size();
        --count_;
    }

private:
    std::vector<std::size_t> slots_;
    std::size_t head_ = 0;
    std::size_t count_ = 0;
};

void check_weights(std::span<const double> w) {
    if (w.size() != 4) {
        bad_config("scheduler needs 4 weights, got " + std::to_string(w.size()));
    }
    for (double v : w) {
        if (!(v >= 0.0) || !std::isfinite(v)) bad_config("scheduler weights must be finite and >= 0");
    }
}

}  // namespace

void validate_config(const SchedulerConfig& cfg) {
    if (cfg.n_ue == 0) bad_config("n_ue must be >= 1");
    if (cfg.n_rb == 0) bad_config("n_rb must be >= 1");
    if (cfg.n_tti == 0) bad_config("n_tti must be >= 1");
    if (cfg.buffer_cap == 0) bad_config("buffer_cap must be >= 1");
    if (cfg.classes.empty()) bad_config("at least one QoS class is required");
    for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
        const auto& k = cfg.classes[c];
        if (!(k.arrival_prob >= 0.0 && k.arrival_prob <= 1.0)) {
            bad_config("arrival probability of class " + std::to_string(c + 1) + " outside [0, 1]");
        }
        if (!(k.budget_ms > 0.0) || !std::isfinite(k.budget_ms)) {
            bad_config("delay budget of class " + std::to_string(c + 1) + " must be positive");
        }
        if (c > 0 && !(k.budget_ms > cfg.classes[c - 1].budget_ms)) {
            bad_config("delay budgets must increase strictly across classes");
        }
    }
    const auto& ch = cfg.channel;
    if (!(ch.rho >= 0.0 && ch.rho <= 1.0)) bad_config("channel rho outside [0, 1]");
    if (!(ch.sigma >= 0.0) || !std::isfinite(ch.sigma)) bad_config("channel sigma must be >= 0");
    if (!(ch.mean_lo >= 0.0 && ch.mean_lo <= ch.mean_hi && ch.mean_hi <= 1.0)) {
        bad_config("channel means need 0 <= mean_lo <= mean_hi <= 1");
    }
    if (!(cfg.serve_rate >= 0.0) || !std::isfinite(cfg.serve_rate)) {
        bad_config("serve_rate must be finite and >= 0");
    }
}

EpisodeScenario generate_scenario(const SchedulerConfig& cfg, std::uint64_t seed) {
    validate_config(cfg);
    EpisodeScenario s;
    s.seed = seed;
    s.n_ue = cfg.n_ue;
    s.n_tti = cfg.n_tti;
    s.ue_class.resize(cfg.n_ue);
    s.arrivals.resize(cfg.n_tti * cfg.n_ue);
    s.cqi.resize(cfg.n_tti * cfg.n_ue);

    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> level(cfg.n_ue);
    std::vector<double> x(cfg.n_ue);
    for (std::size_t u = 0; u < cfg.n_ue; ++u) {
        s.ue_class[u] = static_cast<std::size_t>(uniform_index(rng, cfg.classes.size()));
        level[u] = cfg.channel.mean_lo + (cfg.channel.mean_hi - cfg.channel.mean_lo) * uniform01(rng);
        x[u] = level[u];
    }
    const double rho = cfg.channel.rho;
    for (std::size_t t = 0; t < cfg.n_tti; ++t) {
        for (std::size_t u = 0; u < cfg.n_ue; ++u) {
            const double p = cfg.classes[s.ue_class[u]].arrival_prob;
            s.arrivals[t * cfg.n_ue + u] = uniform01(rng) < p ? 1 : 0;
            if (t > 0) {
                x[u] = reflect_unit(level[u] + rho * (x[u] - level[u]) + cfg.channel.sigma * noise(rng));
            }
            s.cqi[t * cfg.n_ue + u] = x[u];
        }
    }
    return s;
}

EpisodeTrace run_scheduler(const SchedulerConfig& cfg, const EpisodeScenario& scenario,
                           std::span<const double> weights) {
    check_weights(weights);
    if (scenario.n_ue != cfg.n_ue || scenario.n_tti != cfg.n_tti) {
        bad_config("scenario was drawn for a different configuration");
    }
    const std::size_t n_ue = cfg.n_ue;
    const std::size_t n_tti = cfg.n_tti;
    const double cap = static_cast<double>(cfg.buffer_cap);
    const double horizon = static_cast<double>(n_tti);

    EpisodeTrace tr;
    tr.seed = scenario.seed;
    tr.class_delays.resize(cfg.classes.size());
    tr.no_class1 = std::none_of(scenario.ue_class.begin(), scenario.ue_class.end(),
                                [](std::size_t c) { return c == 0; });

    // Each queue holds arrival TTIs in FIFO order.
    std::vector<PacketQueue> queues(n_ue, PacketQueue(cfg.buffer_cap));
    std::vector<std::size_t> blocks_received(n_ue, 0);
    std::size_t blocks_total = 0;
    std::size_t violations = 0;

    std::vector<double> score(n_ue);
    std::vector<std::size_t> order;
    order.reserve(n_ue);

    for (std::size_t t = 0; t < n_tti; ++t) {
        const std::uint8_t* arrivals = &scenario.arrivals[t * n_ue];
        const double* cqi = &scenario.cqi[t * n_ue];

        for (std::size_t u = 0; u < n_ue; ++u) {
            if (!arrivals[u]) continue;
            ++tr.arrived;
            if (queues[u].full()) {
                ++tr.dropped;
                ++violations;
            } else {
                queues[u].push_back(t);
            }
            tr.max_queue = std::max(tr.max_queue, queues[u].size());
        }

        order.clear();
        for (std::size_t u = 0; u < n_ue; ++u) {
            if (queues[u].empty()) continue;
            const double share = blocks_total == 0
                                     ? 0.0
                                     : static_cast<double>(blocks_received[u]) /
                                           static_cast<double>(blocks_total);
            score[u] = weights[0] * cqi[u] +
                       weights[1] * (static_cast<double>(queues[u].size()) / cap) +
                       weights[2] * (static_cast<double>(t - queues[u].front()) / horizon) +
                       weights[3] * (1.0 - share);
            order.push_back(u);
        }
        // Ties rotate with t, which makes equal scores round-robin.
        const std::size_t offset = t % n_ue;
        auto rotated = [&](std::size_t u) { return (u + n_ue - offset) % n_ue; };
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (score[a] != score[b]) return score[a] > score[b];
            return rotated(a) < rotated(b);
        });

        std::size_t blocks_left = cfg.n_rb;
        bool progress = !order.empty();
        while (blocks_left > 0 && progress) {
            progress = false;
            for (std::size_t u : order) {
                if (blocks_left == 0) break;
                if (queues[u].empty()) continue;
                progress = true;
                --blocks_left;
                ++blocks_received[u];
                ++blocks_total;
                const auto capacity = static_cast<std::size_t>(std::lround(cfg.serve_rate * cqi[u]));
                const std::size_t cls = scenario.ue_class[u];
                for (std::size_t k = 0; k < capacity && !queues[u].empty(); ++k) {
                    const double delay = static_cast<double>(t + 1 - queues[u].front());
                    queues[u].pop_front();
                    ++tr.served;
                    tr.class_delays[cls].push_back(delay);
                    if (delay > cfg.classes[cls].budget_ms) ++violations;
                }
            }
        }
        tr.max_blocks_per_tti = std::max(tr.max_blocks_per_tti, cfg.n_rb - blocks_left);
    }

    for (const auto& q : queues) tr.residual += q.size();
    violations += tr.residual;
    tr.reward = -static_cast<double>(violations);
    return tr;
}

EpisodeTrace run_episode(const SchedulerConfig& cfg, const HyperPoint& lam, std::uint64_t seed) {
    check_weights(lam.params);
    return run_scheduler(cfg, generate_scenario(cfg, seed), lam.params);
}

double episode_risk(const EpisodeTrace& trace) {
    if (trace.class_delays.empty() || trace.class1_delays().empty()) return 0.0;
    const auto& d = trace.class1_delays();
    return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

HyperGrid build_multiplier_grid(const HyperPoint& base, std::span<const double> multipliers,
                                std::size_t cap) {
    const std::size_t d = base.params.size();
    if (d == 0) throw Error(ErrorCode::invalid_parameters, "base point has dimension 0");
    if (multipliers.empty()) throw Error(ErrorCode::invalid_parameters, "no multipliers supplied");
    const std::size_t m = multipliers.size();
    std::size_t total = 1;
    for (std::size_t k = 0; k < d; ++k) {
        if (total > cap / m) {
            throw Error(ErrorCode::grid_too_large,
                        "multiplier grid exceeds the cap of " + std::to_string(cap) + " points");
        }
        total *= m;
    }
    if (total > cap) {
        throw Error(ErrorCode::grid_too_large,
                    "multiplier grid exceeds the cap of " + std::to_string(cap) + " points");
    }
    std::vector<std::vector<double>> params;
    params.reserve(total);
    std::vector<std::size_t> digit(d, 0);
    for (std::size_t id = 0; id < total; ++id) {
        std::vector<double> p(d);
        for (std::size_t k = 0; k < d; ++k) p[k] = base.params[k] * multipliers[digit[k]];
        params.push_back(std::move(p));
        for (std::size_t k = d; k-- > 0;) {
            if (++digit[k] < m) break;
            digit[k] = 0;
        }
    }
    return HyperGrid::from_params(std::move(params));
}

SimulatedData simulate_grid(const SchedulerConfig& cfg, const HyperGrid& grid,
                            std::span<const std::uint64_t> seeds) {
    validate_config(cfg);
    for (const auto& pt : grid.points()) check_weights(pt.params);
    SimulatedData out;
    out.risks.values = Matrix(seeds.size(), grid.size());
    out.risks.bounded_unit = false;
    out.rewards = Matrix(seeds.size(), grid.size());
    out.no_class1.resize(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const auto scenario = generate_scenario(cfg, seeds[i]);
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const auto tr = run_scheduler(cfg, scenario, grid[j].params);
            out.risks.values(i, j) = episode_risk(tr);
            out.rewards(i, j) = tr.reward;
            out.no_class1[i] = tr.no_class1;
        }
    }
    return out;
}

}  // namespace qltt
