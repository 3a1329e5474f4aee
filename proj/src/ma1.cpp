#include "qrvol/iv_estimators.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <limits>

namespace qrvol {

namespace {

// Profile objective: log σ̂²(φ) + mean log r_t, via the innovations recursion
// r_1 = 1+φ², r_{t+1} = 1+φ²-φ²/r_t, e_{t+1} = x_{t+1} - (φ/r_t) e_t.
double profile(const std::vector<double>& x, double phi, double* sigma2_out) {
    const double a = 1.0 + phi * phi;
    const double p2 = phi * phi;
    double r = a, e = x[0];
    double ss = e * e / r, slog = std::log(r);
    bool converged = false;
    for (size_t t = 1; t < x.size(); ++t) {
        const double k = phi / r;
        e = x[t] - k * e;
        if (!converged) {
            const double rn = a - p2 / r;
            converged = std::abs(rn - r) < 1e-15;
            r = rn;
        }
        ss += e * e / r;
        slog += std::log(r);
    }
    const auto n = static_cast<double>(x.size());
    const double s2 = ss / n;
    if (sigma2_out) *sigma2_out = s2;
    return std::log(s2) + slog / n;
}

}  // namespace

MA1Fit fit_ma1(const std::vector<double>& x) {
    MA1Fit fit;
    if (x.size() < 3) return fit;
    double ss = 0.0;
    for (double v : x) {
        if (!std::isfinite(v)) return fit;
        ss += v * v;
    }
    if (!(ss > 0.0)) return fit;

    constexpr double lo = -0.999, hi = 0.999;
    constexpr int grid = 40;
    double best_phi = 0.0, best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid; ++i) {
        const double phi = lo + (hi - lo) * i / grid;
        const double v = profile(x, phi, nullptr);
        if (v < best) {
            best = v;
            best_phi = phi;
        }
    }
    const double h = (hi - lo) / grid;
    const double a = std::max(lo, best_phi - h), b = std::min(hi, best_phi + h);
    auto f = [&](double phi) { return profile(x, phi, nullptr); };
    std::uintmax_t iters = 100;
    const auto r = boost::math::tools::brent_find_minima(f, a, b, 40, iters);
    fit.phi = r.first;
    fit.neg_loglik = r.second;
    profile(x, fit.phi, &fit.sigma2_w);
    fit.ok = std::isfinite(fit.neg_loglik) && fit.sigma2_w > 0.0;
    return fit;
}

}  // namespace qrvol
