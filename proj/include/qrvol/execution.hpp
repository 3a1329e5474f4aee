#pragma once

#include "qrvol/sim_engine.hpp"

#include <string>
#include <vector>

namespace qrvol {

struct ExecutionSpec {
    double total_shares = 60.0;
    double horizon = 12000.0;  // seconds
    double tau = 600.0;        // slice length, seconds
    std::vector<double> schedule;  // units per slice

    int slices() const;
    void validate() const;
    static ExecutionSpec vwap(double shares, double horizon, double tau);
};

struct ExecutionOutcome {
    std::vector<double> fill_prices;
    std::vector<double> volumes;
    double p0 = 0.0;
    double shortfall = 0.0;
    int redraws = 0;
};

struct ACModel {
    double sigma2 = 0.0;      // cash variance per second
    double permanent = 0.0;
    double temporary = 0.0;
};

enum class ExecutionMode { live, frozen };

// Market buys of v_k at each slice end against the simulated QR book.
ExecutionOutcome run_vwap(const QRModel& model, const ExecutionSpec& spec, uint64_t seed,
                          ExecutionMode mode = ExecutionMode::live);
// Impact-free fills at the observed mid-price of a simulated path.
ExecutionOutcome run_vwap_on_path(const TickPath& path, const ExecutionSpec& spec);
// Dispatch: QR models trade against the book, other models are impact-free.
ExecutionOutcome run_vwap(const ModelSpec& model, const ExecutionSpec& spec, uint64_t seed);

double ac_variance(const ACModel& model, const ExecutionSpec& spec);
// S²σ²τ(2N²+3N+1)/(6N).
double ac_variance_vwap_closed_form(double sigma2, double shares, double tau, int slices);
double ac_expected_cost(const ACModel& model, const ExecutionSpec& spec);

struct VarianceRatioSettings {
    int n_runs = 100;
    std::string spot_estimator = "spot.fourier";  // or "truth" for surrogate models
    int estimation_paths = 20;
    double estimation_horizon = 23400.0;
    double estimation_mesh = 1.0;
    uint64_t seed = 1;
};

struct VarianceRatioResult {
    double empirical_ratio = 0.0;
    double predicted_ratio = 0.0;
    double var_a = 0.0, var_b = 0.0;
    double sigma2_a = 0.0, sigma2_b = 0.0;
    std::vector<double> shortfalls_a, shortfalls_b;
};

// σ̂² per second of the mid log-price from the day-average of a spot estimator.
double predicted_sigma2(const ModelSpec& model, const VarianceRatioSettings& settings, uint64_t seed);

VarianceRatioResult variance_ratio_experiment(const ModelSpec& model_a, const ModelSpec& model_b,
                                              const ExecutionSpec& spec, const VarianceRatioSettings& settings);

}  // namespace qrvol
