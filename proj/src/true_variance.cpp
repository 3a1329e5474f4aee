#include "qrvol/sim_engine.hpp"

#include <cmath>
#include <stdexcept>

namespace qrvol {

TrueVariance estimate_true_variance(const ModelSpec& model, double m, int n_sims, uint64_t seed) {
    if (m < 1.0) throw std::invalid_argument("estimate_true_variance: m must be >= 1");
    if (n_sims < 2) throw std::invalid_argument("estimate_true_variance: n_sims must be >= 2");
    TrueVariance out;
    out.n_sims = n_sims;
    out.m = m;
    out.below_stabilization = m < 18000.0;

    std::array<std::vector<double>, 3> x;
    for (int s = 0; s < n_sims; ++s) {
        const TickPath path = simulate(model, m, derive_seed(seed, static_cast<uint64_t>(s)));
        for (int k = 0; k < 3; ++k) {
            const auto kind = static_cast<SeriesKind>(k);
            double v = 0.0;
            if (kind != SeriesKind::trade || !path.trades.empty()) {
                const LogPriceGrid g = sample_grid(path, m, kind);
                const double d = g.values.back() - g.values.front();
                v = d * d / m;
            }
            x[k].push_back(v);
        }
    }
    for (int k = 0; k < 3; ++k) {
        // Jackknife standard error of the mean.
        const auto n = static_cast<double>(n_sims);
        double sum = 0.0;
        for (double v : x[k]) sum += v;
        const double mean = sum / n;
        double ss = 0.0;
        for (double v : x[k]) {
            const double loo = (sum - v) / (n - 1.0);
            ss += (loo - mean) * (loo - mean);
        }
        out.value[k] = mean;
        out.std_error[k] = std::sqrt((n - 1.0) / n * ss);
    }
    return out;
}

}  // namespace qrvol
