#include "qrvol/execution.hpp"
#include "qrvol/parallel.hpp"
#include "qrvol/registry.hpp"
#include "qrvol/rng.hpp"
#include "qrvol/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qrvol {

int ExecutionSpec::slices() const { return static_cast<int>(std::llround(horizon / tau)); }

void ExecutionSpec::validate() const {
    if (!(tau > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("ExecutionSpec: horizon and tau must be > 0");
    const int N = slices();
    if (N < 1 || std::abs(N * tau - horizon) > 1e-9 * horizon)
        throw std::invalid_argument("ExecutionSpec: horizon must be a multiple of tau");
    if (static_cast<int>(schedule.size()) != N) throw std::invalid_argument("ExecutionSpec: schedule length != N");
    double sum = 0.0;
    for (double v : schedule) {
        if (!(v >= 0.0)) throw std::invalid_argument("ExecutionSpec: negative slice volume");
        sum += v;
    }
    if (std::abs(sum - total_shares) > 1e-9 * std::max(1.0, total_shares))
        throw std::invalid_argument("ExecutionSpec: schedule does not sum to total shares");
}

ExecutionSpec ExecutionSpec::vwap(double shares, double horizon, double tau) {
    ExecutionSpec s;
    s.total_shares = shares;
    s.horizon = horizon;
    s.tau = tau;
    s.schedule.assign(static_cast<size_t>(std::max(0LL, std::llround(horizon / tau))),
                      shares / std::max(1.0, std::round(horizon / tau)));
    s.validate();
    return s;
}

namespace {

void finish(ExecutionOutcome& out) {
    double cash = 0.0, shares = 0.0;
    for (size_t k = 0; k < out.volumes.size(); ++k) {
        cash += out.volumes[k] * out.fill_prices[k];
        shares += out.volumes[k];
    }
    out.shortfall = cash - shares * out.p0;
}

}  // namespace

ExecutionOutcome run_vwap(const QRModel& model, const ExecutionSpec& spec, uint64_t seed, ExecutionMode mode) {
    spec.validate();
    for (double v : spec.schedule)
        if (std::abs(v - std::round(v)) > 1e-9) throw std::invalid_argument("run_vwap: QR slices must be whole units");
    QRSimulator sim(model.params, model.schedule, spec.horizon, seed);
    ExecutionOutcome out;
    out.p0 = 0.5 * static_cast<double>(sim.book().mid_twice_ticks()) * model.params.tick_size;
    const double frozen_ask = static_cast<double>(sim.book().best_ask_ticks()) * model.params.tick_size;
    for (int k = 1; k <= spec.slices(); ++k) {
        const double v = spec.schedule[k - 1];
        out.volumes.push_back(v);
        if (mode == ExecutionMode::frozen) {
            out.fill_prices.push_back(frozen_ask);
            continue;
        }
        sim.run_until(k * spec.tau, nullptr);
        if (v <= 0.0) {
            out.fill_prices.push_back(0.5 * static_cast<double>(sim.book().mid_twice_ticks()) * model.params.tick_size);
            continue;
        }
        const FillResult f = sim.market_buy(static_cast<int>(std::llround(v)), nullptr);
        out.fill_prices.push_back(f.avg_price);
        out.redraws += f.redrawn;
    }
    finish(out);
    return out;
}

ExecutionOutcome run_vwap_on_path(const TickPath& path, const ExecutionSpec& spec) {
    spec.validate();
    if (path.quotes.empty()) throw std::invalid_argument("run_vwap_on_path: empty path");
    if (path.horizon + 1e-9 < spec.horizon) throw std::invalid_argument("run_vwap_on_path: path shorter than horizon");
    ExecutionOutcome out;
    size_t i = 0;
    auto mid_at = [&](double t) {
        while (i + 1 < path.quotes.size() && path.quotes[i + 1].timestamp <= t + 1e-9) ++i;
        return mid_price(path.quotes[i]);
    };
    out.p0 = mid_at(0.0);
    for (int k = 1; k <= spec.slices(); ++k) {
        out.volumes.push_back(spec.schedule[k - 1]);
        out.fill_prices.push_back(mid_at(k * spec.tau));
    }
    finish(out);
    return out;
}

ExecutionOutcome run_vwap(const ModelSpec& model, const ExecutionSpec& spec, uint64_t seed) {
    if (const auto* qr = std::get_if<QRModel>(&model)) return run_vwap(*qr, spec, seed);
    return run_vwap_on_path(simulate(model, spec.horizon, seed), spec);
}

double ac_variance(const ACModel& model, const ExecutionSpec& spec) {
    spec.validate();
    // vᵀBv with B_ij = min(i, j) equals Σ_k (Σ_{j≥k} v_j)².
    double tail = 0.0, quad = 0.0;
    for (size_t k = spec.schedule.size(); k-- > 0;) {
        tail += spec.schedule[k];
        quad += tail * tail;
    }
    return model.sigma2 * spec.tau * quad;
}

double ac_variance_vwap_closed_form(double sigma2, double shares, double tau, int slices) {
    if (slices < 1) throw std::invalid_argument("ac_variance_vwap_closed_form: slices must be >= 1");
    const double N = slices;
    return shares * shares * sigma2 * tau * (2.0 * N * N + 3.0 * N + 1.0) / (6.0 * N);
}

double ac_expected_cost(const ACModel& model, const ExecutionSpec& spec) {
    spec.validate();
    double sq = 0.0, cross = 0.0, prefix = 0.0;
    for (double v : spec.schedule) {
        sq += v * v;
        cross += v * prefix;
        prefix += v;
    }
    return (model.permanent + model.temporary) * sq + model.permanent * cross;
}

double predicted_sigma2(const ModelSpec& model, const VarianceRatioSettings& s, uint64_t seed) {
    if (s.spot_estimator == "truth") {
        const auto* sur = std::get_if<SurrogateModel>(&model);
        if (!sur) throw std::invalid_argument("predicted_sigma2: truth is only available for surrogate models");
        return sur->params.integrated_variance(s.estimation_horizon) / s.estimation_horizon;
    }
    const SpotEntry* est = find_spot(s.spot_estimator);
    if (!est) throw std::invalid_argument("predicted_sigma2: unknown spot estimator " + s.spot_estimator);
    if (s.estimation_paths < 1) throw std::invalid_argument("predicted_sigma2: estimation_paths must be >= 1");
    std::vector<double> avg(s.estimation_paths);
    const auto out = spot_output_grid(s.estimation_horizon);
    parallel_for(avg.size(), [&](size_t i) {
        const TickPath path = simulate(model, s.estimation_horizon, derive_seed(seed, i));
        const LogPriceGrid g = sample_grid(path, s.estimation_mesh, SeriesKind::mid);
        const TuningInputs t = feasible_tuning(g);
        avg[i] = est->fn(g, out, t, {}).day_average();
    });
    return mean(avg);
}

VarianceRatioResult variance_ratio_experiment(const ModelSpec& model_a, const ModelSpec& model_b,
                                              const ExecutionSpec& spec, const VarianceRatioSettings& s) {
    if (s.n_runs < 30) throw std::invalid_argument("variance_ratio_experiment: n_runs must be >= 30");
    spec.validate();
    VarianceRatioResult res;
    auto run_all = [&](const ModelSpec& m, uint64_t stream) {
        std::vector<double> sf(s.n_runs);
        const uint64_t base = derive_seed(s.seed, stream);
        parallel_for(sf.size(), [&](size_t r) { sf[r] = run_vwap(m, spec, derive_seed(base, r)).shortfall; });
        return sf;
    };
    res.shortfalls_a = run_all(model_a, 1);
    res.shortfalls_b = run_all(model_b, 2);
    res.var_a = sample_variance(res.shortfalls_a);
    res.var_b = sample_variance(res.shortfalls_b);
    if (!(res.var_b > 0.0)) throw std::domain_error("variance_ratio_experiment: zero shortfall variance under model B");
    res.empirical_ratio = res.var_a / res.var_b;
    res.sigma2_a = predicted_sigma2(model_a, s, derive_seed(s.seed, 3));
    res.sigma2_b = predicted_sigma2(model_b, s, derive_seed(s.seed, 4));
    if (!(res.sigma2_b > 0.0)) throw std::domain_error("variance_ratio_experiment: zero predicted variance under model B");
    // Same schedule on both sides: the prediction is the σ² ratio.
    res.predicted_ratio = res.sigma2_a / res.sigma2_b;
    return res;
}

}  // namespace qrvol
