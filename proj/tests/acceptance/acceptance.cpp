// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
//
//   acceptance            run every criterion
//   acceptance 1 3 8      run the listed criteria only

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qltt/calibrate.hpp"
#include "qltt/commands.hpp"
#include "qltt/experiment.hpp"
#include "qltt/fwer.hpp"
#include "qltt/random.hpp"
#include "qltt/synthetic.hpp"
#include "qltt/testing.hpp"
#include "support/oracles.hpp"

using namespace qltt;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Agreement to `digits` significant digits.
bool same_digits(double a, double b, int digits) {
    return std::abs(a - b) <= 0.5 * std::pow(10.0, -(digits - 1)) * std::abs(b);
}

Outcome hoeffding_closed_form() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> size(1, 100000);
    std::vector<double> means(1000);
    std::vector<double> alphas(1000);
    std::vector<std::size_t> ns(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
        means[i] = unit(rng);
        alphas[i] = unit(rng);
        ns[i] = size(rng);
    }
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (std::size_t i = 0; i < 1000; ++i) {
        const double p = hoeffding_p_value(means[i], ns[i], alphas[i]);
        const long double gap = std::max(0.0L, static_cast<long double>(alphas[i]) - means[i]);
        const long double ref = std::exp(-2.0L * static_cast<long double>(ns[i]) * gap * gap);
        worst = std::max(worst, static_cast<double>(std::abs(p - ref)));
    }
    const double elapsed = seconds_since(t0);
    return {worst <= 1e-12 && elapsed < 1.0,
            fmt("max |err| = %.3g over 1000 triples in %.4f s", worst, elapsed)};
}

Outcome bound_parameters() {
    // Arbitrary-precision values (tests/oracles/bound_oracle.py).
    const double r_ref = 0.0081468490205219430;
    const double q_ref = 0.052865567098505404;
    const auto p = bound_params(1000, 0.1, 0.05);
    const auto v = bound_params(100, 0.1, 0.1);
    const bool ok = same_digits(p.r_n, r_ref, 6) && same_digits(p.q_star, q_ref, 6) &&
                    p.index == 947 && !p.vacuous() && v.vacuous() &&
                    std::isinf(quantile_upper_bound(std::vector<double>(100, 0.0), 0.1, 0.1));
    return {ok, fmt("r_n = %.7g, q* = %.7g, index = %zu; (100, 0.1, 0.1): q* = %.4g, vacuous = %s",
                    p.r_n, p.q_star, p.index, v.q_star, v.vacuous() ? "yes" : "no")};
}

Outcome bound_coverage() {
    const auto fam = uniform_scale_family({1.0});
    const auto grid = family_grid(fam);
    const double truth = true_functionals(fam, grid, 0.1)[0].quantile;
    const std::size_t trials = 2000;
    std::size_t covered = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto m = sample_risk_matrix(fam, grid, 1000, derive_seed(31, streams::trial, t));
        auto col = m.values.column(0);
        std::sort(col.begin(), col.end());
        if (truth <= quantile_upper_bound(col, 0.1, 0.1)) ++covered;
    }
    const double freq = static_cast<double>(covered) / trials;
    const double floor = 0.9 - oracle::three_sigma(0.9, trials);
    return {freq >= floor, fmt("coverage %.4f (floor %.4f) over %zu trials", freq, floor, trials)};
}

Outcome super_uniformity() {
    const double alpha = 0.5;
    const double q = 0.1;
    const auto fam = uniform_scale_family({alpha / (1.0 - q)});
    const auto grid = family_grid(fam);
    const std::size_t trials = 2000;
    std::vector<double> p(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        const auto m = sample_risk_matrix(fam, grid, 1000, derive_seed(37, streams::trial, t));
        p[t] = quantile_p_value(m.values.column(0), q, alpha);
    }
    bool ok = true;
    std::ostringstream os;
    for (double u : {0.01, 0.05, 0.1, 0.25}) {
        const auto hits = std::count_if(p.begin(), p.end(), [u](double v) { return v <= u; });
        const double cdf = static_cast<double>(hits) / trials;
        const double limit = u + oracle::three_sigma(u, trials);
        ok = ok && cdf <= limit;
        os << fmt("F(%.2f) = %.4f <= %.4f; ", u, cdf, limit);
    }
    os << "trials " << trials;
    return {ok, os.str()};
}

// 8 safe scales spread over [0.3, 1] * safe_hi, 8 unsafe over [unsafe_lo, 1].
std::vector<double> end_to_end_scales(double safe_hi, double unsafe_lo) {
    std::vector<double> scales;
    for (int k = 0; k < 8; ++k) scales.push_back(safe_hi * (0.3 + 0.7 * k / 7.0));
    for (int k = 0; k < 8; ++k) scales.push_back(unsafe_lo + (1.0 - unsafe_lo) * k / 7.0);
    return scales;
}

struct EndToEnd {
    CoverageReport report;
    std::size_t median_size = 0;
    std::size_t unsafe_trials = 0;
};

EndToEnd end_to_end_run(Method method, double alpha, double safe_hi, double unsafe_lo,
                        std::uint64_t seed) {
    SyntheticSource src(uniform_scale_family(end_to_end_scales(safe_hi, unsafe_lo)));
    ControlSpec spec;
    spec.alpha = alpha;
    spec.delta = 0.1;
    spec.q = 0.1;
    spec.method = method;
    spec.fwer = FwerProcedure::bonferroni;
    CoverageOptions opt;
    opt.n_cal = 2000;
    opt.trials = 500;
    opt.seed = seed;
    EndToEnd out;
    out.report = run_coverage(src, spec, opt);

    // Recount unsafe certifications from the closed forms, independently of
    // the report's violation flags.
    const auto truth = src.truth(spec.q, std::nullopt);
    std::vector<std::size_t> sizes;
    for (const auto& rec : out.report.records) {
        sizes.push_back(rec.certified.size());
        const bool unsafe = std::any_of(rec.certified.begin(), rec.certified.end(), [&](std::size_t id) {
            return (method == Method::mean ? truth[id].mean : truth[id].quantile) > alpha;
        });
        if (unsafe) ++out.unsafe_trials;
    }
    std::sort(sizes.begin(), sizes.end());
    out.median_size = sizes[sizes.size() / 2];
    return out;
}

Outcome end_to_end_guarantee() {
    const double limit = 0.1 + oracle::three_sigma(0.1, 500);
    // Quantile: alpha = 0.5, safe 0.9 c <= 0.8 alpha, unsafe 0.9 c >= 1.2 alpha.
    const double aq = 0.5;
    const auto q = end_to_end_run(Method::quantile, aq, 0.8 * aq / 0.9, 1.2 * aq / 0.9, 41);
    // Mean: alpha = 0.3, safe c / 2 <= 0.8 alpha, unsafe c / 2 >= 1.2 alpha.
    const double am = 0.3;
    const auto m = end_to_end_run(Method::mean, am, 0.8 * am * 2.0, 1.2 * am * 2.0, 43);

    auto line = [&](const char* name, const EndToEnd& e) {
        return fmt("%s: violation rate %.4f <= %.4f (recount %zu), median |set| = %zu", name,
                   e.report.violation_rate, limit, e.unsafe_trials, e.median_size);
    };
    const bool ok = q.report.violation_rate <= limit && m.report.violation_rate <= limit &&
                    q.unsafe_trials == q.report.violations && m.unsafe_trials == m.report.violations &&
                    q.median_size >= 1 && m.median_size >= 1;
    return {ok, line("quantile", q) + "; " + line("mean", m)};
}

Outcome fst_exhaustive() {
    const double levels[] = {0.01, 0.05, 0.2};
    const double delta = 0.05;
    const auto t0 = Clock::now();
    std::size_t cases = 0;
    std::size_t mismatches = 0;
    std::array<std::size_t, 4> ord{0, 1, 2, 3};
    std::vector<std::array<std::size_t, 4>> orderings;
    do {
        orderings.push_back(ord);
    } while (std::next_permutation(ord.begin(), ord.end()));
    for (int code = 0; code < 81; ++code) {
        std::array<double, 4> p{};
        int c = code;
        for (auto& v : p) {
            v = levels[c % 3];
            c /= 3;
        }
        for (const auto& o : orderings) {
            const auto got = fixed_sequence_test(p, o, delta).certified;
            const auto want = oracle::fst_reference(p, o, delta);
            // Prefix property: the certified set is a prefix of the ordering.
            const bool prefix = std::equal(got.begin(), got.end(), o.begin());
            if (got != want || !prefix) ++mismatches;
            ++cases;
        }
    }
    const double elapsed = seconds_since(t0);
    return {mismatches == 0 && cases == 81 * 24 && elapsed < 1.0,
            fmt("%zu cases, %zu mismatches, %.4f s", cases, mismatches, elapsed)};
}

Outcome bisection_equivalence() {
    const double tol = 1e-9;
    std::mt19937_64 rng(53);
    std::uniform_int_distribution<std::size_t> size(30, 200);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double qs[] = {0.05, 0.1, 0.2, 0.3};

    // Dense epsilon grid: 10^5 points log-spaced over [1e-12, 1].
    const std::size_t grid_points = 100000;
    std::vector<double> eps(grid_points);
    for (std::size_t k = 0; k < grid_points; ++k) {
        eps[k] = std::pow(10.0, -12.0 + 12.0 * static_cast<double>(k) / (grid_points - 1));
    }
    eps.back() = 1.0;

    std::size_t bracket_fail = 0;
    std::size_t oracle_fail = 0;
    std::size_t nontrivial = 0;
    double worst_oracle = 0.0;
    for (int s = 0; s < 200; ++s) {
        const std::size_t n = size(rng);
        const double q = qs[s % 4];
        const double scale = 0.2 + unit(rng);
        std::vector<double> xs(n);
        for (double& x : xs) x = scale * unit(rng);
        std::sort(xs.begin(), xs.end());
        const double alpha = scale * (0.7 + 0.5 * unit(rng));

        const double p = quantile_p_value(xs, q, alpha, tol);
        // Scan: the first grid epsilon whose bound is below alpha.
        std::size_t first = grid_points;
        for (std::size_t k = 0; k < grid_points; ++k) {
            if (quantile_upper_bound(xs, q, eps[k]) < alpha) {
                first = k;
                break;
            }
        }
        bool in_bracket;
        if (first == grid_points) {
            in_bracket = p == 1.0;
        } else if (first == 0) {
            in_bracket = p <= eps[0] + 2 * tol;
        } else {
            in_bracket = p >= eps[first - 1] - 2 * tol && p <= eps[first] + 2 * tol;
        }
        if (!in_bracket) ++bracket_fail;
        if (p < 1.0) ++nontrivial;

        const double exact = oracle::exact_quantile_p_value(xs, q, alpha);
        const double err = std::abs(p - exact);
        worst_oracle = std::max(worst_oracle, err);
        if (err > 2 * tol) ++oracle_fail;
    }
    return {bracket_fail == 0 && oracle_fail == 0,
            fmt("200 samples (%zu with p < 1): %zu outside the grid bracket, max |p - exact| = %.3g "
                "(limit %.1g)",
                nontrivial, bracket_fail, worst_oracle, 2 * tol)};
}

Outcome directional_scheduler() {
    const auto cfg_path = std::filesystem::path(QLTT_SOURCE_DIR) / "configs" / "scheduler.json";
    ExperimentConfig cfg = load_config(cfg_path);
    cfg.output_dir = std::filesystem::path(QLTT_BINARY_DIR) / "acceptance_out";
    cfg.methods = {Method::mean, Method::quantile};

    std::ostringstream log;
    const auto reports = cmd_coverage(cfg, log);
    const auto& ltt = reports[0];
    const auto& qltt = reports[1];
    const double alpha = qltt.spec.alpha;

    std::size_t selected = 0;
    std::size_t within = 0;
    std::size_t both = 0;
    std::size_t lighter_or_equal = 0;
    std::size_t strictly_lighter = 0;
    for (std::size_t t = 0; t < qltt.records.size(); ++t) {
        const auto& rq = qltt.records[t];
        const auto& rl = ltt.records[t];
        if (rq.selected && rq.test_quantile) {
            ++selected;
            if (*rq.test_quantile <= alpha) ++within;
        }
        if (rq.selected && rl.selected && rq.test_quantile && rl.test_quantile) {
            ++both;
            if (*rq.test_quantile <= *rl.test_quantile) ++lighter_or_equal;
            if (*rq.test_quantile < *rl.test_quantile) ++strictly_lighter;
        }
    }
    const double rate = selected ? static_cast<double>(within) / selected : 0.0;
    const double floor = selected ? 0.9 - oracle::three_sigma(0.9, selected) : 1.0;
    const bool a = selected > 0 && rate >= floor;
    const bool b = both > 0 && 2 * lighter_or_equal > both;

    // Figure data for the plotting scripts.
    ReportInputs in;
    in.coverage = {cfg.output_dir / "coverage_mean.json", cfg.output_dir / "coverage_quantile.json"};
    in.out_dir = cfg.output_dir;
    cmd_report(in, log);

    return {a && b,
            fmt("alpha = %.4g ms; (a) test 0.9-quantile <= alpha in %zu/%zu QLTT selections "
                "(%.3f, floor %.3f); (b) QLTT <= LTT in %zu/%zu trials with both non-empty "
                "(%zu strictly lighter); LTT violations %zu, QLTT violations %zu",
                alpha, within, selected, rate, floor, lighter_or_equal, both, strictly_lighter,
                ltt.violations, qltt.violations)};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, "closed-form Hoeffding p-values", hoeffding_closed_form},
        {2, "order-statistic bound parameters", bound_parameters},
        {3, "quantile-bound coverage", bound_coverage},
        {4, "quantile p-value super-uniformity", super_uniformity},
        {5, "end-to-end risk guarantee", end_to_end_guarantee},
        {6, "fixed sequence testing exhaustive check", fst_exhaustive},
        {7, "bisection against dense grid and exact inverse", bisection_equivalence},
        {8, "directional scheduler experiment", directional_scheduler},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : all) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail
                  << fmt(" (%.1f s)", seconds_since(t0)) << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
