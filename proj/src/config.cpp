#include "qrvol/config.hpp"

#include <fstream>
#include <stdexcept>

namespace qrvol {

namespace fs = std::filesystem;

Json load_json(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open config " + file.string());
    try {
        return Json::parse(in, nullptr, true, true);
    } catch (const Json::parse_error& e) {
        throw std::runtime_error(file.string() + ": " + e.what());
    }
}

namespace {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

fs::path resolve(const fs::path& base, const std::string& name) {
    const fs::path p(name);
    return p.is_absolute() || base.empty() ? p : base / p;
}

RegimeSchedule parse_schedule(const Json& j, double theta, double theta_reinit) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "constant") return RegimeSchedule::constant(theta, theta_reinit);
        if (s == "five_regimes") return RegimeSchedule::five_regimes();
        throw std::invalid_argument("unknown schedule: " + s);
    }
    RegimeSchedule sched;
    for (const auto& iv : j)
        sched.intervals.push_back({iv.at("start").get<double>(), iv.at("end").get<double>(),
                                   iv.at("theta").get<double>(), iv.at("theta_reinit").get<double>()});
    sched.validate();
    return sched;
}

}  // namespace

ModelSpec parse_model(const Json& j, const fs::path& base) {
    const auto type = j.at("type").get<std::string>();
    if (type == "zi") {
        ZIParams p;
        p.lambda_L = get_or(j, "lambda_L", p.lambda_L);
        p.lambda_C = get_or(j, "lambda_C", p.lambda_C);
        p.lambda_M = get_or(j, "lambda_M", p.lambda_M);
        p.K = get_or(j, "K", p.K);
        p.tick_size = get_or(j, "tick_size", p.tick_size);
        p.start_price = get_or(j, "start_price", p.start_price);
        p.initial_depth = get_or(j, "initial_depth", p.initial_depth);
        return ZIModel{p};
    }
    if (type == "qr") {
        QRParams p = default_qr_params();
        if (j.contains("intensity_csv")) {
            const fs::path file = resolve(base, j.at("intensity_csv").get<std::string>());
            std::ifstream in(file);
            if (!in) throw std::runtime_error("cannot open intensity table " + file.string());
            const int K = get_or(j, "K", 2);
            const double lm = get_or(j, "lambda_M", 0.3);
            p.intensities = read_intensity_csv(in, K, get_or(j, "q_max", 30), get_or(j, "m", 2), get_or(j, "l", 5), lm, lm);
            p.K = K;
            p.tick_size = get_or(j, "tick_size", 0.01);
            p.start_price = get_or(j, "start_price", 50.0);
            p.invariant_dist = estimate_invariant_distribution(p, 1000.0, get_or(j, "invariant_horizon", 200000.0),
                                                               get_or<uint64_t>(j, "invariant_seed", 20240601));
        }
        p.theta = get_or(j, "theta", p.theta);
        p.theta_reinit = get_or(j, "theta_reinit", p.theta_reinit);
        const RegimeSchedule sched = j.contains("schedule") ? parse_schedule(j.at("schedule"), p.theta, p.theta_reinit)
                                                           : RegimeSchedule::constant(p.theta, p.theta_reinit);
        return QRModel{p, sched};
    }
    if (type == "surrogate") {
        SurrogateParams p;
        if (j.contains("sigma2")) {
            const auto& s = j.at("sigma2");
            p.sigma2 = s.is_array() ? s.get<std::vector<double>>() : std::vector<double>{s.get<double>()};
        }
        p.breakpoints = get_or(j, "breakpoints", p.breakpoints);
        p.omega = get_or(j, "omega", p.omega);
        p.mesh = get_or(j, "mesh", p.mesh);
        p.start_price = get_or(j, "start_price", p.start_price);
        if (p.breakpoints.size() + 1 != p.sigma2.size())
            throw std::invalid_argument("surrogate: breakpoints must number sigma2.size() - 1");
        return SurrogateModel{p};
    }
    throw std::invalid_argument("unknown model type: " + type);
}

std::vector<SeriesKind> parse_series(const Json& j) {
    std::vector<SeriesKind> out;
    for (const auto& s : j) out.push_back(series_kind_from_string(s.get<std::string>()));
    return out;
}

EstimatorParams parse_estimator_params(const Json& j) {
    EstimatorParams p;
    auto opt_int = [&](const char* k, std::optional<int>& v) {
        if (j.contains(k)) v = j.at(k).get<int>();
    };
    auto opt_dbl = [&](const char* k, std::optional<double>& v) {
        if (j.contains(k)) v = j.at(k).get<double>();
    };
    opt_int("q", p.q);
    opt_int("N", p.N);
    opt_int("M", p.M);
    opt_int("h", p.h);
    opt_int("s", p.s);
    opt_int("m", p.m_scales);
    opt_dbl("c1", p.c1);
    opt_dbl("c2", p.c2);
    opt_dbl("bandwidth", p.bandwidth);
    for (const auto& [k, v] : j.items())
        if (k != "q" && k != "N" && k != "M" && k != "h" && k != "s" && k != "m" && k != "c1" && k != "c2" &&
            k != "bandwidth")
            throw std::invalid_argument("unknown estimator parameter: " + k);
    return p;
}

ScenarioConfig parse_scenario(const Json& j, const fs::path& base) {
    ScenarioConfig c;
    c.name = get_or<std::string>(j, "name", c.name);
    c.seed = get_or<uint64_t>(j, "seed", c.seed);
    if (j.contains("model")) c.model = parse_model(j.at("model"), base);
    c.truth = std::holds_alternative<SurrogateModel>(c.model) ? TruthSource::closed_form : TruthSource::simulated;
    if (j.contains("scenario")) {
        const auto& s = j.at("scenario");
        c.n_paths = get_or(s, "n_paths", c.n_paths);
        c.horizon = get_or(s, "horizon", c.horizon);
        c.mesh = get_or(s, "mesh", c.mesh);
        c.n_t = get_or(s, "n_t", c.n_t);
        c.keep_spot_paths = get_or(s, "keep_spot_paths", c.keep_spot_paths);
        if (s.contains("series")) c.series = parse_series(s.at("series"));
        if (s.contains("estimators")) c.estimators = s.at("estimators").get<std::vector<std::string>>();
    }
    if (j.contains("truth")) {
        const auto& t = j.at("truth");
        if (t.contains("source")) c.truth = truth_source_from_string(t.at("source").get<std::string>());
        c.truth_m = get_or(t, "m", c.truth_m);
        c.truth_sims = get_or(t, "n_sims", c.truth_sims);
        if (t.contains("values"))
            for (const auto& v : t.at("values")) c.truth_values.push_back(v.get<std::array<double, 3>>());
    }
    if (j.contains("tuning")) {
        const auto& t = j.at("tuning");
        c.tuning.subsample_seconds = get_or(t, "subsample_seconds", c.tuning.subsample_seconds);
        const auto iq = get_or<std::string>(t, "iq_variant", "as_printed");
        if (iq == "as_printed") c.tuning.iq_variant = IQVariant::as_printed;
        else if (iq == "textbook") c.tuning.iq_variant = IQVariant::textbook;
        else throw std::invalid_argument("unknown iq_variant: " + iq);
    }
    if (j.contains("overrides"))
        for (const auto& [id, v] : j.at("overrides").items()) c.overrides[id] = parse_estimator_params(v);
    c.validate();
    return c;
}

ExecutionSpec parse_execution(const Json& j) {
    const double shares = get_or(j, "shares", 60.0);
    const double horizon = get_or(j, "horizon", 12000.0);
    const double tau = get_or(j, "tau", 600.0);
    if (j.contains("schedule")) {
        ExecutionSpec s;
        s.total_shares = shares;
        s.horizon = horizon;
        s.tau = tau;
        s.schedule = j.at("schedule").get<std::vector<double>>();
        s.validate();
        return s;
    }
    return ExecutionSpec::vwap(shares, horizon, tau);
}

GMMSettings parse_gmm(const Json& j) {
    GMMSettings g;
    g.T = get_or(j, "T", g.T);
    g.horizon = get_or(j, "horizon", g.horizon);
    g.grid_step = get_or(j, "grid_step", g.grid_step);
    g.seed = get_or<uint64_t>(j, "seed", g.seed);
    g.nm_max_evals = get_or(j, "nm_max_evals", g.nm_max_evals);
    g.nm_tol = get_or(j, "nm_tol", g.nm_tol);
    return g;
}

ScenarioConfig load_scenario(const fs::path& file) { return parse_scenario(load_json(file), file.parent_path()); }

ModelSpec load_model(const fs::path& file) {
    const Json j = load_json(file);
    return parse_model(j.contains("model") ? j.at("model") : j, file.parent_path());
}

}  // namespace qrvol
