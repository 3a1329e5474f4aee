#include "qrvol/iv_estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace qrvol {

double subsampled_sum(const std::vector<double>& p, size_t q) {
    double s = 0.0;
    for (size_t j = q; j < p.size(); ++j) {
        const double d = p[j] - p[j - q];
        s += d * d;
    }
    return s / static_cast<double>(q);
}

TuningInputs feasible_tuning(const LogPriceGrid& grid, const TuningOptions& opts) {
    const size_t n = grid.n();
    if (grid.horizon() < 1800.0 - 1e-9) throw std::invalid_argument("feasible_tuning: grid must span at least 30 minutes");
    for (double v : grid.values)
        if (!std::isfinite(v)) throw std::invalid_argument("feasible_tuning: non-finite input");
    TuningInputs t;
    t.n = n;
    const auto q = static_cast<size_t>(std::max<long long>(1, std::llround(opts.subsample_seconds / grid.mesh)));
    const double nd = static_cast<double>(n), qd = static_cast<double>(q);
    const auto& p = grid.values;

    double s2 = 0.0, s4 = 0.0;
    for (size_t j = q; j <= n; ++j) {
        const double d = p[j] - p[j - q];
        s2 += d * d;
        s4 += d * d * d * d;
    }
    const double cov = nd / (nd - qd + 1.0);
    t.iv_hat = cov * s2 / qd;
    if (opts.iq_variant == IQVariant::as_printed) {
        t.iq_hat = cov * cov * 26.0 / qd * s4;
        t.source["iq_hat"] = "subsampled quarticity, printed constant 26/q";
    } else {
        t.iq_hat = cov * (nd / (3.0 * qd)) * s4 / qd;
        t.source["iq_hat"] = "subsampled quarticity, n/(3q) constant";
    }
    t.source["iv_hat"] = "subsampled RV at q=" + std::to_string(q);

    const auto r = grid.returns();
    double rv = 0.0;
    for (double x : r) rv += x * x;
    const double fallback = rv / (2.0 * nd);
    const double floor = std::max(1e-6 * fallback, 1e-30);
    const MA1Fit fit = fit_ma1(r);
    if (!fit.ok) {
        t.omega2_hat = rv > 0.0 ? fallback : floor;
        t.source["omega2_hat"] = rv > 0.0 ? "fallback RV/(2n)" : "floor";
        t.diagnostics.push_back(rv > 0.0 ? "MA(1) fit failed, RV/(2n) used" : "constant grid, noise floor applied");
    } else {
        t.ma1_phi = fit.phi;
        t.ma1_sigma2 = fit.sigma2_w;
        const double w2 = -fit.phi * fit.sigma2_w;
        if (w2 > floor) {
            t.omega2_hat = w2;
            t.source["omega2_hat"] = "MA(1) fit";
        } else {
            t.omega2_hat = floor;
            t.source["omega2_hat"] = "floor";
            t.diagnostics.push_back("non-positive noise variance estimate clamped to floor");
        }
    }
    t.omega4_hat = t.omega2_hat * t.omega2_hat;
    return t;
}

}  // namespace qrvol
