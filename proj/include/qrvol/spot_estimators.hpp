#pragma once

#include "qrvol/iv_estimators.hpp"

#include <string>
#include <utility>
#include <vector>

namespace qrvol {

struct SpotPath {
    std::vector<double> times;   // seconds from the start of the grid
    std::vector<double> values;  // variance per second, raw (may be negative)
    std::vector<bool> edge;      // true where the estimation window was truncated
    std::string estimator_id;
    EstimatorParams params_used;
    std::map<std::string, double> diagnostics;
    std::vector<std::string> flags;

    // max(value, 0) pointwise.
    std::vector<double> floored() const;
    double day_average() const;
};

// Midpoints of n_t equal cells over [0, horizon].
std::vector<double> spot_output_grid(double horizon, int n_t = 390);

SpotPath spot_fourier(const LogPriceGrid& g, const std::vector<double>& out, const TuningInputs& t,
                      const EstimatorParams& o = {});
SpotPath spot_regularized(const LogPriceGrid& g, const std::vector<double>& out, const TuningInputs& t,
                          const EstimatorParams& o = {});
SpotPath spot_kernel(const LogPriceGrid& g, const std::vector<double>& out, const TuningInputs& t,
                     const EstimatorParams& o = {});
SpotPath spot_preaveraging(const LogPriceGrid& g, const std::vector<double>& out, const TuningInputs& t,
                           const EstimatorParams& o = {});
SpotPath spot_two_scale(const LogPriceGrid& g, const std::vector<double>& out, const TuningInputs& t,
                        const EstimatorParams& o = {});
SpotPath spot_preavg_kernel(const LogPriceGrid& g, const std::vector<double>& out, const TuningInputs& t,
                            const EstimatorParams& o = {});

// Rolling-variance roughness used by the two-scale window rule.
double two_scale_gamma(const LogPriceGrid& g, int window);

struct SpotMetrics {
    double rel_int_bias = 0.0;
    double rel_int_mse = 0.0;
};

SpotMetrics integrated_metrics(const SpotPath& spot, const SpotPath& truth);
// Across paths: bias of the pointwise mean, MSE averaged over paths.
SpotMetrics integrated_metrics(const std::vector<SpotPath>& spots, const SpotPath& truth);

double trapezoid_integral(const SpotPath& s, double horizon);

}  // namespace qrvol
