#include "qrvol/harness.hpp"
#include "qrvol/parallel.hpp"
#include "qrvol/registry.hpp"
#include "qrvol/rng.hpp"
#include "qrvol/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qrvol {

std::string to_string(TruthSource s) {
    switch (s) {
        case TruthSource::closed_form: return "closed_form";
        case TruthSource::simulated: return "simulated";
        default: return "given";
    }
}

TruthSource truth_source_from_string(const std::string& s) {
    if (s == "closed_form") return TruthSource::closed_form;
    if (s == "simulated") return TruthSource::simulated;
    if (s == "given") return TruthSource::given;
    throw std::invalid_argument("unknown truth source: " + s);
}

void ScenarioConfig::validate() const {
    if (n_paths < 1) throw std::invalid_argument("ScenarioConfig: n_paths must be >= 1");
    if (!(horizon > 0.0) || !(mesh > 0.0)) throw std::invalid_argument("ScenarioConfig: horizon and mesh must be > 0");
    if (series.empty()) throw std::invalid_argument("ScenarioConfig: no series");
    if (n_t < 1) throw std::invalid_argument("ScenarioConfig: n_t must be >= 1");
    resolve_estimator_ids(estimators);
    if (truth == TruthSource::closed_form && !std::holds_alternative<SurrogateModel>(model))
        throw std::invalid_argument("ScenarioConfig: closed-form truth needs a surrogate model");
    if (truth == TruthSource::given && truth_values.empty())
        throw std::invalid_argument("ScenarioConfig: given truth needs truth_values");
    if (const auto* qr = std::get_if<QRModel>(&model)) {
        if (!qr->schedule.intervals.empty()) qr->schedule.validate();
        if (truth == TruthSource::given && !qr->schedule.intervals.empty() &&
            truth_values.size() != qr->schedule.intervals.size())
            throw std::invalid_argument("ScenarioConfig: one truth triple per regime required");
    }
}

double Truth::sigma2_at(SeriesKind kind, double frac) const {
    size_t k = 0;
    while (k + 1 < sigma2.size() && frac >= boundaries[k + 1]) ++k;
    return sigma2[k][static_cast<size_t>(kind)];
}

double Truth::integrated(SeriesKind kind, double horizon) const {
    double iv = 0.0;
    for (size_t k = 0; k < sigma2.size(); ++k)
        iv += sigma2[k][static_cast<size_t>(kind)] * (boundaries[k + 1] - boundaries[k]) * horizon;
    return iv;
}

SpotPath Truth::spot(SeriesKind kind, const std::vector<double>& times, double horizon) const {
    SpotPath s;
    s.estimator_id = "truth";
    s.times = times;
    s.edge.assign(times.size(), false);
    for (double t : times) s.values.push_back(sigma2_at(kind, t / horizon));
    return s;
}

Truth resolve_truth(const ScenarioConfig& cfg) {
    Truth tr;
    if (cfg.truth == TruthSource::closed_form) {
        const auto* sur = std::get_if<SurrogateModel>(&cfg.model);
        if (!sur) throw std::invalid_argument("resolve_truth: closed-form truth needs a surrogate model");
        tr.boundaries = {0.0};
        for (double b : sur->params.breakpoints) tr.boundaries.push_back(b);
        tr.boundaries.push_back(1.0);
        for (double s2 : sur->params.sigma2) {
            tr.sigma2.push_back({s2, s2, s2});
            tr.std_error.push_back({0.0, 0.0, 0.0});
        }
        return tr;
    }
    std::vector<ModelSpec> regimes;
    if (const auto* qr = std::get_if<QRModel>(&cfg.model); qr && qr->schedule.intervals.size() > 1) {
        tr.boundaries = {0.0};
        for (const auto& iv : qr->schedule.intervals) {
            tr.boundaries.push_back(iv.end);
            QRParams p = qr->params;
            p.theta = iv.theta;
            p.theta_reinit = iv.theta_reinit;
            regimes.push_back(QRModel{p, RegimeSchedule::constant(iv.theta, iv.theta_reinit)});
        }
    } else {
        regimes.push_back(cfg.model);
    }
    if (cfg.truth == TruthSource::given) {
        if (cfg.truth_values.size() != regimes.size())
            throw std::invalid_argument("resolve_truth: one truth triple per regime required");
        tr.sigma2 = cfg.truth_values;
        tr.std_error.assign(regimes.size(), {0.0, 0.0, 0.0});
        return tr;
    }
    const uint64_t base = derive_seed(cfg.seed, 0x7275746875ULL);
    for (size_t k = 0; k < regimes.size(); ++k) {
        const TrueVariance tv = estimate_true_variance(regimes[k], cfg.truth_m, cfg.truth_sims, derive_seed(base, k));
        tr.sigma2.push_back(tv.value);
        tr.std_error.push_back(tv.std_error);
    }
    return tr;
}

const EstimatorSummary* ExperimentReport::find(const std::string& id, SeriesKind kind) const {
    for (const auto& r : rows)
        if (r.estimator_id == id && r.series == kind) return &r;
    return nullptr;
}

ExperimentReport run_scenario(const ScenarioConfig& cfg) { return run_scenario(cfg, resolve_truth(cfg)); }

namespace {

struct PathResult {
    std::vector<std::optional<double>> iv;           // [est * series]
    std::vector<std::optional<SpotPath>> spot;       // [est * series]
    std::vector<std::string> errors;                 // [est * series], empty when ok
    double spread = 0.0;
};

}  // namespace

ExperimentReport run_scenario(const ScenarioConfig& cfg, const Truth& truth) {
    cfg.validate();
    const auto ids = resolve_estimator_ids(cfg.estimators);
    const size_t E = ids.size(), S = cfg.series.size();
    const auto out_grid = spot_output_grid(cfg.horizon, cfg.n_t);

    std::vector<PathResult> results(static_cast<size_t>(cfg.n_paths));
    parallel_for(results.size(), [&](size_t i) {
        PathResult& pr = results[i];
        pr.iv.resize(E * S);
        pr.spot.resize(E * S);
        pr.errors.assign(E * S, "");
        const TickPath path = simulate(cfg.model, cfg.horizon, derive_seed(cfg.seed, i));
        pr.spread = spread_statistics(path);
        for (size_t s = 0; s < S; ++s) {
            LogPriceGrid grid;
            TuningInputs tune;
            std::string setup_error;
            try {
                grid = sample_grid(path, cfg.mesh, cfg.series[s]);
                tune = feasible_tuning(grid, cfg.tuning);
            } catch (const std::exception& ex) {
                setup_error = ex.what();
            }
            for (size_t e = 0; e < E; ++e) {
                const size_t slot = e * S + s;
                if (!setup_error.empty()) {
                    pr.errors[slot] = setup_error;
                    continue;
                }
                const auto ov = cfg.overrides.find(ids[e]);
                const EstimatorParams params = ov == cfg.overrides.end() ? EstimatorParams{} : ov->second;
                try {
                    if (const SpotEntry* sp = find_spot(ids[e])) {
                        SpotPath p = sp->fn(grid, out_grid, tune, params);
                        for (double v : p.values)
                            if (!std::isfinite(v)) throw std::runtime_error("non-finite spot value");
                        pr.spot[slot] = std::move(p);
                    } else {
                        const double v = find_iv(ids[e])->fn(grid, tune, params).value;
                        if (!std::isfinite(v)) throw std::runtime_error("non-finite estimate");
                        pr.iv[slot] = v;
                    }
                } catch (const std::exception& ex) {
                    pr.errors[slot] = ex.what();
                }
            }
        }
    });

    ExperimentReport rep;
    rep.name = cfg.name;
    rep.model = model_name(cfg.model);
    rep.n_paths = cfg.n_paths;
    rep.horizon = cfg.horizon;
    rep.mesh = cfg.mesh;
    rep.seed = cfg.seed;
    rep.truth = truth;
    double spread = 0.0;
    for (const auto& pr : results) spread += pr.spread;
    rep.average_spread = spread / static_cast<double>(results.size());

    for (size_t e = 0; e < E; ++e) {
        for (size_t s = 0; s < S; ++s) {
            const size_t slot = e * S + s;
            EstimatorSummary row;
            row.estimator_id = ids[e];
            row.series = cfg.series[s];
            row.spot = is_spot_id(ids[e]);
            if (row.spot) {
                const SpotPath tpath = truth.spot(row.series, out_grid, cfg.horizon);
                row.truth = tpath.day_average();
                std::vector<SpotPath> ok;
                for (size_t i = 0; i < results.size(); ++i) {
                    if (results[i].spot[slot]) {
                        ok.push_back(*results[i].spot[slot]);
                        row.estimates.push_back(ok.back().day_average());
                        row.path_index.push_back(static_cast<int>(i));
                    } else {
                        row.failures.push_back("path " + std::to_string(i) + ": " + results[i].errors[slot]);
                    }
                }
                if (!ok.empty()) {
                    row.mean_estimate = mean(row.estimates);
                    try {
                        const SpotMetrics m = integrated_metrics(ok, tpath);
                        row.rel_bias = m.rel_int_bias;
                        row.rel_mse = m.rel_int_mse;
                    } catch (const std::invalid_argument& ex) {
                        rep.warnings.push_back(row.estimator_id + ": " + ex.what());
                    }
                    if (cfg.keep_spot_paths) row.sample_path = ok.front();
                }
            } else {
                row.truth = truth.integrated(row.series, cfg.horizon);
                for (size_t i = 0; i < results.size(); ++i) {
                    if (results[i].iv[slot]) {
                        row.estimates.push_back(*results[i].iv[slot]);
                        row.path_index.push_back(static_cast<int>(i));
                    } else {
                        row.failures.push_back("path " + std::to_string(i) + ": " + results[i].errors[slot]);
                    }
                }
                if (!row.estimates.empty()) {
                    row.mean_estimate = mean(row.estimates);
                    if (row.truth != 0.0) {
                        row.rel_bias = row.mean_estimate / row.truth - 1.0;
                        double mse = 0.0;
                        for (double v : row.estimates) mse += (v - row.truth) * (v - row.truth);
                        row.rel_mse = mse / static_cast<double>(row.estimates.size()) / (row.truth * row.truth);
                    } else {
                        rep.warnings.push_back(row.estimator_id + ": zero truth, relative metrics undefined");
                    }
                }
            }
            row.n_ok = static_cast<int>(row.estimates.size());
            row.n_failed = static_cast<int>(row.failures.size());
            if (row.n_failed > 0)
                rep.warnings.push_back(row.estimator_id + "/" + to_string(row.series) + ": " +
                                       std::to_string(row.n_failed) + " failed paths");
            rep.rows.push_back(std::move(row));
        }
    }
    rep.rankings = compute_rankings(rep.rows);
    return rep;
}

std::vector<Ranking> compute_rankings(const std::vector<EstimatorSummary>& rows) {
    std::vector<Ranking> out;
    std::vector<std::pair<SeriesKind, bool>> groups;
    for (const auto& r : rows) {
        const auto key = std::make_pair(r.series, r.spot);
        if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
    }
    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
        return std::make_pair(a.second, static_cast<int>(a.first)) < std::make_pair(b.second, static_cast<int>(b.first));
    });
    for (const auto& [series, spot] : groups) {
        for (const std::string metric : {"bias", "mse"}) {
            std::vector<std::pair<double, std::string>> items;
            for (const auto& r : rows) {
                // Realized variance is reported as a baseline but not ranked.
                if (r.series != series || r.spot != spot || r.n_ok == 0 || r.estimator_id == "iv.rv") continue;
                items.emplace_back(metric == "bias" ? std::abs(r.rel_bias) : r.rel_mse, r.estimator_id);
            }
            std::sort(items.begin(), items.end());
            Ranking rk;
            rk.series = series;
            rk.spot = spot;
            rk.metric = metric;
            for (const auto& [v, id] : items) {
                rk.order.push_back(id);
                rk.values.push_back(v);
            }
            out.push_back(std::move(rk));
        }
    }
    return out;
}

std::vector<PValueMatrix> pairwise_ttests(const ExperimentReport& report) {
    std::vector<PValueMatrix> out;
    for (const auto& rk : report.rankings) {
        if (rk.metric != "bias") continue;
        PValueMatrix m;
        m.series = rk.series;
        m.spot = rk.spot;
        std::vector<const EstimatorSummary*> rows;
        for (const auto& r : report.rows)
            if (r.series == rk.series && r.spot == rk.spot && r.n_ok >= 2) {
                m.ids.push_back(r.estimator_id);
                rows.push_back(&r);
            }
        const size_t k = rows.size();
        m.p.assign(k, std::vector<double>(k, 1.0));
        for (size_t i = 0; i < k; ++i)
            for (size_t j = i + 1; j < k; ++j)
                m.p[i][j] = m.p[j][i] = welch_ttest(rows[i]->estimates, rows[j]->estimates).p_value;
        out.push_back(std::move(m));
    }
    return out;
}

ScenarioConfig five_regime_scenario() {
    ScenarioConfig cfg;
    cfg.name = "five_regimes";
    cfg.model = QRModel{default_qr_params(), RegimeSchedule::five_regimes()};
    cfg.truth = TruthSource::simulated;
    return cfg;
}

double spread_statistics(const TickPath& path) {
    if (path.quotes.empty() || !(path.tick_size > 0.0)) return 0.0;
    double total = 0.0, weighted = 0.0;
    for (size_t i = 0; i < path.quotes.size(); ++i) {
        const double start = path.quotes[i].timestamp;
        const double end = i + 1 < path.quotes.size() ? path.quotes[i + 1].timestamp : path.horizon;
        const double dt = std::max(0.0, end - start);
        weighted += dt * (path.quotes[i].best_ask - path.quotes[i].best_bid) / path.tick_size;
        total += dt;
    }
    return total > 0.0 ? weighted / total : (path.quotes.back().best_ask - path.quotes.back().best_bid) / path.tick_size;
}

double spread_statistics(const std::vector<TickPath>& paths) {
    if (paths.empty()) throw std::invalid_argument("spread_statistics: no paths");
    double s = 0.0;
    for (const auto& p : paths) s += spread_statistics(p);
    return s / static_cast<double>(paths.size());
}

}  // namespace qrvol
