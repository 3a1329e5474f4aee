#pragma once

#include "qrvol/sim_engine.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace qrvol {

ZIParams estimate_zi_rates(const std::vector<EventRecord>& events);

struct IntensityEstimate {
    QRIntensityTable table;
    // Cell diagnostics, same indexing as the table via cell_index().
    std::vector<double> exposure;
    std::vector<int> counts;
    std::vector<std::string> flags;
    int empty_cells = 0;

    size_t cell_index(int level, EventKind kind, int q, Regime reg, bool best_empty) const;
};

struct IntensityOptions {
    double m_l_quantile = 0.33;
    int q_max = 30;
    int K = 2;
    int m_override = -1;  // < 0 means estimate from quantiles
    int l_override = -1;
};

IntensityEstimate estimate_qr_intensities(const std::vector<EventRecord>& events, const IntensityOptions& opts = {});

// ζ = n_c / (2 n_a) over the sequence of nonzero moves.
double mean_reversion_ratio(const LogPriceGrid& grid);
double mean_reversion_ratio(const std::vector<double>& moves);

struct GMMMoments {
    double sigma = 0.0;
    double zeta = 0.0;
};

// σ and ζ of one 1-second mid-price grid.
GMMMoments grid_moments(const LogPriceGrid& grid);

struct GMMSettings {
    int T = 100;
    double horizon = 23400.0;
    double grid_step = 0.05;
    uint64_t seed = 1;
    int nm_max_evals = 60;
    double nm_tol = 1e-3;
};

struct GMMPoint {
    double theta = 0.0;
    double theta_reinit = 0.0;
    double objective = 0.0;
};

struct GMMResult {
    double theta = 0.0;
    double theta_reinit = 0.0;
    double step1_theta = 0.0;
    double step1_theta_reinit = 0.0;
    double step1_objective = 0.0;
    double step2_objective = 0.0;
    std::array<std::array<double, 2>, 2> W{};
    bool identity_fallback = false;
    std::vector<GMMMoments> moments;  // per simulation at the final estimate
    std::vector<std::string> warnings;
    int evaluations = 0;
};

// Moment generator: (θ, θ^reinit, simulation index) -> moments.  Simulation
// t must use the same random stream for every θ pair.
using MomentFn = std::function<GMMMoments(double theta, double theta_reinit, int t)>;

MomentFn qr_moment_fn(const QRParams& model, const GMMSettings& settings);

GMMResult calibrate_theta_gmm(const MomentFn& moments, GMMMoments targets, const GMMSettings& settings);
GMMResult calibrate_theta_gmm(const QRParams& model, GMMMoments targets, const GMMSettings& settings);

// Nelder-Mead on [0,1]^2 with clamping; exposed for tests.
GMMPoint nelder_mead_box(const std::function<double(double, double)>& f, GMMPoint start, double step, int max_evals,
                         double tol, int* evals = nullptr);

}  // namespace qrvol
