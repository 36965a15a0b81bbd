#include "qltt/config.hpp"

#include <set>
#include <string>

namespace qltt {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void invalid(const std::string& what) {
    throw Error(ErrorCode::invalid_config, what);
}

// Reads an object while tracking which keys were consumed, so leftovers can
// be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) invalid(where_ + " must be a JSON object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    const Json& raw(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) invalid(where_ + ": missing key '" + key + "'");
        return *it;
    }

    template <typename T>
    T get(const char* key) {
        const Json& v = raw(key);
        try {
            return v.get<T>();
        } catch (const nlohmann::json::exception&) {
            invalid(where_ + ": key '" + key + "' has the wrong type");
        }
    }

    template <typename T>
    T get_or(const char* key, T fallback) {
        return has(key) ? get<T>(key) : fallback;
    }

    std::size_t count(const char* key, std::size_t fallback) {
        if (!has(key)) return fallback;
        const Json& v = raw(key);
        if (!v.is_number_unsigned()) invalid(where_ + ": key '" + key + "' must be a nonnegative integer");
        return v.get<std::size_t>();
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) invalid(where_ + ": unknown key '" + key + "'");
        }
    }

    const std::string& where() const { return where_; }

private:
    const Json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

FamilyPoint family_point(FamilyKind kind, const Json& j, const std::string& where) {
    ObjectReader r(j, where);
    FamilyPoint out;
    switch (kind) {
        case FamilyKind::uniform_scale:
            out = UniformScale{r.get<double>("scale")};
            break;
        case FamilyKind::beta:
            out = BetaShape{r.get<double>("a"), r.get<double>("b")};
            break;
        case FamilyKind::bernoulli_mixture:
            out = BernoulliMixture{r.get<double>("p"), r.get<double>("lo"), r.get<double>("hi")};
            break;
    }
    r.finish();
    return out;
}

SyntheticEnv synthetic_env(ObjectReader& r) {
    SyntheticEnv env;
    const auto kind = r.get<std::string>("kind");
    if (kind == "uniform_scale") {
        env.family.kind = FamilyKind::uniform_scale;
    } else if (kind == "beta") {
        env.family.kind = FamilyKind::beta;
    } else if (kind == "bernoulli_mixture") {
        env.family.kind = FamilyKind::bernoulli_mixture;
    } else {
        invalid("env: unknown synthetic kind '" + kind + "'");
    }
    const Json& pts = r.raw("points");
    if (!pts.is_array()) invalid("env: 'points' must be an array");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        env.family.points.push_back(
            family_point(env.family.kind, pts[i], "env.points[" + std::to_string(i) + "]"));
    }
    try {
        validate_family(env.family);
    } catch (const Error& e) {
        invalid(std::string("env: ") + e.what());
    }
    return env;
}

SchedulerEnv scheduler_env(ObjectReader& r) {
    SchedulerEnv env;
    env.scheduler = r.has("scheduler") ? scheduler_from_json(r.raw("scheduler")) : SchedulerConfig{};
    ObjectReader grid(r.raw("grid"), "env.grid");
    env.base = grid.get<std::vector<double>>("base");
    env.multipliers = grid.get<std::vector<double>>("multipliers");
    grid.finish();
    if (env.base.size() != 4) invalid("env.grid: the scheduler needs a 4-dimensional base point");
    env.pilot_episodes = r.count("pilot_episodes", env.pilot_episodes);
    env.pool_episodes = r.count("pool_episodes", env.pool_episodes);
    if (r.has("risk_cap_multiple")) env.risk_cap_multiple = r.get<double>("risk_cap_multiple");
    if (env.pilot_episodes == 0) invalid("env: pilot_episodes must be >= 1");
    if (env.pool_episodes == 0) invalid("env: pool_episodes must be >= 1");
    if (env.risk_cap_multiple && !(*env.risk_cap_multiple > 0.0)) {
        invalid("env: risk_cap_multiple must be positive");
    }
    return env;
}

fs::path resolve(const fs::path& base, const fs::path& p) {
    return p.is_absolute() ? p : base / p;
}

}  // namespace

Json to_json(const SchedulerConfig& cfg) {
    Json classes = Json::array();
    for (const auto& c : cfg.classes) {
        classes.push_back({{"arrival_prob", c.arrival_prob}, {"budget_ms", c.budget_ms}});
    }
    return {{"n_ue", cfg.n_ue},
            {"n_rb", cfg.n_rb},
            {"n_tti", cfg.n_tti},
            {"classes", std::move(classes)},
            {"buffer_cap", cfg.buffer_cap},
            {"channel",
             {{"rho", cfg.channel.rho},
              {"sigma", cfg.channel.sigma},
              {"mean_lo", cfg.channel.mean_lo},
              {"mean_hi", cfg.channel.mean_hi}}},
            {"serve_rate", cfg.serve_rate}};
}

SchedulerConfig scheduler_from_json(const Json& j) {
    SchedulerConfig cfg;
    ObjectReader r(j, "scheduler");
    cfg.n_ue = r.count("n_ue", cfg.n_ue);
    cfg.n_rb = r.count("n_rb", cfg.n_rb);
    cfg.n_tti = r.count("n_tti", cfg.n_tti);
    cfg.buffer_cap = r.count("buffer_cap", cfg.buffer_cap);
    cfg.serve_rate = r.get_or("serve_rate", cfg.serve_rate);
    if (r.has("classes")) {
        const Json& arr = r.raw("classes");
        if (!arr.is_array()) invalid("scheduler: 'classes' must be an array");
        cfg.classes.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            ObjectReader c(arr[i], "scheduler.classes[" + std::to_string(i) + "]");
            cfg.classes.push_back({c.get<double>("arrival_prob"), c.get<double>("budget_ms")});
            c.finish();
        }
    }
    if (r.has("channel")) {
        ObjectReader c(r.raw("channel"), "scheduler.channel");
        cfg.channel.rho = c.get_or("rho", cfg.channel.rho);
        cfg.channel.sigma = c.get_or("sigma", cfg.channel.sigma);
        cfg.channel.mean_lo = c.get_or("mean_lo", cfg.channel.mean_lo);
        cfg.channel.mean_hi = c.get_or("mean_hi", cfg.channel.mean_hi);
        c.finish();
    }
    r.finish();
    validate_config(cfg);
    return cfg;
}

ExperimentConfig config_from_json(const Json& j, const fs::path& base_dir) {
    ExperimentConfig cfg;
    ObjectReader top(j, "config");

    ObjectReader spec(top.raw("spec"), "spec");
    const Json& alpha = spec.raw("alpha");
    if (alpha.is_string() && alpha.get<std::string>() == "pilot") {
        cfg.alpha_from_pilot = true;
    } else if (alpha.is_number()) {
        cfg.spec.alpha = alpha.get<double>();
    } else {
        invalid("spec: 'alpha' must be a number or \"pilot\"");
    }
    cfg.spec.delta = spec.get<double>("delta");
    cfg.spec.q = spec.get_or("q", cfg.spec.q);
    cfg.spec.tol = spec.get_or("tol", cfg.spec.tol);
    try {
        cfg.spec.method = parse_method(spec.get<std::string>("method"));
        cfg.spec.fwer = parse_fwer(spec.get_or<std::string>("fwer", "bonferroni"));
    } catch (const Error& e) {
        invalid(std::string("spec: ") + e.what());
    }
    if (spec.has("ordering")) {
        const Json& ord = spec.raw("ordering");
        if (ord.is_string() && ord.get<std::string>() == "pilot") {
            cfg.ordering_from_pilot = true;
        } else if (ord.is_array()) {
            try {
                cfg.spec.ordering = ord.get<std::vector<std::size_t>>();
            } catch (const nlohmann::json::exception&) {
                invalid("spec: 'ordering' must list grid ids");
            }
        } else if (!ord.is_null()) {
            invalid("spec: 'ordering' must be an id list, null or \"pilot\"");
        }
    }
    spec.finish();

    ObjectReader env(top.raw("env"), "env");
    const auto type = env.get<std::string>("type");
    std::size_t default_cal = kSyntheticCal;
    std::size_t default_trials = kSyntheticTrials;
    if (type == "synthetic") {
        cfg.env = synthetic_env(env);
    } else if (type == "scheduler") {
        cfg.env = scheduler_env(env);
        default_cal = kSchedulerCal;
        default_trials = kSchedulerTrials;
    } else if (type == "file") {
        FileEnv f;
        f.calibration = resolve(base_dir, env.get<std::string>("calibration"));
        if (env.has("test")) f.test = resolve(base_dir, env.get<std::string>("test"));
        cfg.env = f;
    } else {
        invalid("env: unknown type '" + type + "'");
    }
    env.finish();

    if ((cfg.alpha_from_pilot || cfg.ordering_from_pilot) &&
        !std::holds_alternative<SchedulerEnv>(cfg.env)) {
        invalid("\"pilot\" alpha or ordering needs a scheduler environment");
    }

    cfg.n_cal = top.count("n_cal", default_cal);
    cfg.n_test = top.count("n_test", cfg.n_test);
    cfg.trials = top.count("trials", default_trials);
    if (top.has("seed")) {
        const Json& s = top.raw("seed");
        if (!s.is_number_unsigned()) invalid("config: 'seed' must be a nonnegative integer");
        cfg.seed = s.get<std::uint64_t>();
    }
    cfg.output_dir = resolve(base_dir, top.get_or<std::string>("output_dir", "out"));
    cfg.workers = top.count("workers", cfg.workers);
    if (top.has("risk_cap")) cfg.risk_cap = top.get<double>("risk_cap");
    if (top.has("methods")) {
        for (const auto& m : top.get<std::vector<std::string>>("methods")) {
            try {
                cfg.methods.push_back(parse_method(m));
            } catch (const Error& e) {
                invalid(std::string("config: ") + e.what());
            }
        }
    }
    top.finish();

    if (cfg.methods.empty()) cfg.methods.push_back(cfg.spec.method);
    if (cfg.n_cal == 0) invalid("config: n_cal must be >= 1");
    if (cfg.trials == 0) invalid("config: trials must be >= 1");
    if (cfg.workers == 0) invalid("config: workers must be >= 1");
    if (cfg.risk_cap && !(*cfg.risk_cap > 0.0)) invalid("config: risk_cap must be positive");
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
    const Json j = parse_json(read_text_file(path), path.string());
    return config_from_json(j, path.parent_path());
}

}  // namespace qltt
