#include "qrvol/sim_engine.hpp"

#include <cmath>
#include <stdexcept>

namespace qrvol {

double SurrogateParams::sigma2_at(double frac) const {
    size_t k = 0;
    while (k < breakpoints.size() && frac >= breakpoints[k]) ++k;
    return sigma2.at(k);
}

double SurrogateParams::integrated_variance(double horizon) const {
    double iv = 0.0, prev = 0.0;
    for (size_t k = 0; k < sigma2.size(); ++k) {
        const double end = k < breakpoints.size() ? breakpoints[k] : 1.0;
        iv += sigma2[k] * (end - prev) * horizon;
        prev = end;
    }
    return iv;
}

double SurrogateParams::integrated_quarticity(double horizon) const {
    double iq = 0.0, prev = 0.0;
    for (size_t k = 0; k < sigma2.size(); ++k) {
        const double end = k < breakpoints.size() ? breakpoints[k] : 1.0;
        iq += sigma2[k] * sigma2[k] * (end - prev) * horizon;
        prev = end;
    }
    return iq;
}

TickPath simulate_surrogate(const SurrogateParams& p, double horizon, uint64_t seed) {
    if (!(horizon > 0.0) || !(p.mesh > 0.0)) throw std::invalid_argument("simulate_surrogate: invalid horizon or mesh");
    if (p.sigma2.empty() || p.breakpoints.size() + 1 != p.sigma2.size())
        throw std::invalid_argument("simulate_surrogate: breakpoints must number sigma2.size() - 1");
    for (double s : p.sigma2)
        if (!(s >= 0.0)) throw std::invalid_argument("simulate_surrogate: negative variance");
    if (!(p.start_price > 0.0) || p.omega < 0.0) throw std::invalid_argument("simulate_surrogate: invalid parameters");

    Rng rng(seed);
    const auto n = static_cast<size_t>(std::floor(horizon / p.mesh + 1e-9));
    TickPath path;
    path.horizon = horizon;
    path.quotes.reserve(n + 1);
    path.trades.reserve(n + 1);
    double x = std::log(p.start_price);
    for (size_t i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) * p.mesh;
        if (i > 0) {
            const double mid_frac = (t - 0.5 * p.mesh) / horizon;
            x += std::sqrt(p.sigma2_at(mid_frac) * p.mesh) * rng.normal();
        }
        const double obs = p.omega > 0.0 ? x + p.omega * rng.normal() : x;
        const double px = std::exp(obs);
        path.quotes.push_back({px, px, 1.0, 1.0, t});
        path.trades.push_back({t, px, 1.0});
    }
    return path;
}

}  // namespace qrvol
