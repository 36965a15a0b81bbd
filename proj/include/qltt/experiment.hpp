// experiment.hpp
//
// Repeated-calibration coverage experiments. A TrialSource supplies fresh
// calibration (and test) data per trial plus the ground-truth risk
// functionals of every grid point; run_coverage calibrates once per trial
// and checks every certified point against that ground truth.
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qltt/core.hpp"
#include "qltt/io.hpp"
#include "qltt/scheduler.hpp"
#include "qltt/synthetic.hpp"

namespace qltt {

struct TrialData {
    RiskMatrix calibration;
    std::optional<Matrix> rewards;
    std::optional<RiskMatrix> test;
};

class TrialSource {
public:
    virtual ~TrialSource() = default;

    virtual const HyperGrid& grid() const = 0;
    // Ground truth per grid point. With a cap, means refer to min(R, cap) / cap.
    virtual std::vector<TrueFunctionals> truth(double q, std::optional<double> cap) const = 0;
    // Deterministic in trial_seed.
    virtual TrialData draw(std::uint64_t trial_seed, std::size_t n_cal, std::size_t n_test) const = 0;
    virtual bool unit_bounded() const = 0;
    virtual std::string kind() const = 0;
};

// Fresh i.i.d. draws from a synthetic family; exact ground truth.
class SyntheticSource final : public TrialSource {
public:
    explicit SyntheticSource(SyntheticFamily family);

    const HyperGrid& grid() const override { return grid_; }
    std::vector<TrueFunctionals> truth(double q, std::optional<double> cap) const override;
    TrialData draw(std::uint64_t trial_seed, std::size_t n_cal, std::size_t n_test) const override;
    bool unit_bounded() const override { return family_is_unit_bounded(family_); }
    std::string kind() const override { return "synthetic"; }

private:
    SyntheticFamily family_;
    HyperGrid grid_;
};

// Rows resampled with replacement from a fixed pool of episodes. Ground truth
// is the pool's own empirical distribution, so the guarantee applies exactly
// to the resampling distribution.
class PoolSource final : public TrialSource {
public:
    PoolSource(HyperGrid grid, RiskMatrix pool, std::optional<Matrix> rewards);

    const HyperGrid& grid() const override { return grid_; }
    std::vector<TrueFunctionals> truth(double q, std::optional<double> cap) const override;
    TrialData draw(std::uint64_t trial_seed, std::size_t n_cal, std::size_t n_test) const override;
    bool unit_bounded() const override { return pool_.bounded_unit; }
    std::string kind() const override { return "pool"; }

    const RiskMatrix& pool() const { return pool_; }

private:
    HyperGrid grid_;
    RiskMatrix pool_;
    std::optional<Matrix> rewards_;
};

// min(R, cap) / cap, flagged unit-bounded.
RiskMatrix cap_risks(const RiskMatrix& m, double cap);

// Applies the cap (when present) for the mean method: returns the matrix and
// spec calibration actually runs on. Throws Error{schema_mismatch} for the
// mean method on unbounded data without a cap.
std::pair<RiskMatrix, ControlSpec> prepare_for_method(const RiskMatrix& m, const ControlSpec& spec,
                                                      std::optional<double> risk_cap);

struct TrialRecord {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> certified;
    // Ground-truth functional (mean or quantile per method, in the units the
    // calibration ran on) of each certified id.
    std::vector<double> certified_truth;
    std::optional<std::size_t> selected;
    // Raw ground truth of the selected point.
    std::optional<double> selected_mean;
    std::optional<double> selected_quantile;
    // Empirical functionals of the selected point on the trial's test episodes.
    std::optional<double> test_mean;
    std::optional<double> test_quantile;
    bool violation = false;
};

struct CoverageReport {
    std::string source;
    ControlSpec spec;  // as run (alpha in calibration units)
    std::optional<double> risk_cap;
    std::size_t n_cal = 0;
    std::size_t n_test = 0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::vector<TrialRecord> records;
    std::size_t violations = 0;
    double violation_rate = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    double wall_seconds = 0.0;
};

struct CoverageOptions {
    std::size_t n_cal = 0;
    std::size_t n_test = 0;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::optional<double> risk_cap;
};

// Trial t uses seed derive_seed(seed, streams::trial, t).
CoverageReport run_coverage(const TrialSource& source, const ControlSpec& spec,
                            const CoverageOptions& options);

Json to_json(const CoverageReport& r, bool include_timing = true);
CoverageReport coverage_from_json(const Json& j);

// Pilot run over the scheduler grid, used to fix alpha and FST orderings
// before any calibration data is seen.
struct PilotSummary {
    std::vector<double> mean;      // per grid point, raw risk
    std::vector<double> quantile;  // per grid point, empirical (1 - q)-quantile
    // Median over grid points of `quantile`.
    double median_quantile = 0.0;
};

PilotSummary summarize_pilot(const RiskMatrix& pilot, double q);

// Grid ids sorted ascending by score, ties by id.
std::vector<std::size_t> order_by(const std::vector<double>& score);

// Seeds of episode i in a stream: derive_seed(master, stream, i).
std::vector<std::uint64_t> episode_seeds(std::uint64_t master, std::uint64_t stream,
                                         std::size_t count);

}  // namespace qltt
