#include "qrvol/iv_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qrvol {

namespace {

void check_grid(const LogPriceGrid& g) {
    if (g.n() < 10) throw std::invalid_argument("estimator: need n >= 10");
    for (double v : g.values)
        if (!std::isfinite(v)) throw std::invalid_argument("estimator: non-finite input");
}

IVEstimate start(const std::string& id, const EstimatorParams& o) {
    IVEstimate e;
    e.estimator_id = id;
    e.params_used = o;
    e.params_used.provenance.clear();
    return e;
}

// Chooses an integer knob: override if given, else the feasible value,
// then clamps to [lo, hi].
int pick(const std::optional<int>& ov, double feasible, int lo, int hi, const std::string& name, IVEstimate& e,
         const char* origin = "feasible") {
    std::string prov = origin;
    long long v = 0;
    if (ov) {
        v = *ov;
        prov = "override";
    } else if (std::isfinite(feasible)) {
        v = std::llround(feasible);
    } else {
        v = lo;
        prov = "fallback";
    }
    if (v < lo || v > hi) {
        v = std::clamp<long long>(v, lo, hi);
        prov = "clamped";
        e.flags.push_back(name + " clamped to " + std::to_string(v));
    }
    e.params_used.provenance[name] = prov;
    e.diagnostics[name] = static_cast<double>(v);
    return static_cast<int>(v);
}

double sum_sq(const std::vector<double>& r) {
    double s = 0.0;
    for (double x : r) s += x * x;
    return s;
}

double autocov_sum(const std::vector<double>& r, size_t lag) {
    double s = 0.0;
    for (size_t i = 0; i + lag < r.size(); ++i) s += r[i] * r[i + lag];
    return s;
}

}  // namespace

double tukey_hanning2(double x) {
    const double u = 0.5 * std::numbers::pi * (1.0 - x) * (1.0 - x);
    const double s = std::sin(u);
    return s * s;
}

const KernelConstants& th2_constants() {
    static const KernelConstants kc = [] {
        const double pi = std::numbers::pi;
        auto k = [&](double x) { return tukey_hanning2(x); };
        auto k2 = [&](double x) {
            const double u = 0.5 * pi * (1 - x) * (1 - x), up = -pi * (1 - x), upp = pi;
            return 2.0 * std::cos(2 * u) * up * up + std::sin(2 * u) * upp;
        };
        auto k3 = [&](double x) {
            const double u = 0.5 * pi * (1 - x) * (1 - x), up = -pi * (1 - x), upp = pi;
            return -4.0 * std::sin(2 * u) * up * up * up + 6.0 * std::cos(2 * u) * up * upp;
        };
        const int m = 20000;
        double I1 = 0, I2 = 0, I3 = 0;
        for (int i = 0; i <= m; ++i) {
            const double x = static_cast<double>(i) / m;
            const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            I1 += w * k(x) * k(x);
            I2 += w * k(x) * k2(x);
            I3 += w * k(x) * k3(x);
        }
        const double hh = 1.0 / (3.0 * m);
        I1 *= hh;
        I2 *= hh;
        I3 *= hh;
        return KernelConstants{4.0 * I1, -8.0 * I2, 12.0 * (k3(0.0) + I3)};
    }();
    return kc;
}

std::vector<double> multi_scale_weights(int q) {
    std::vector<double> a(q);
    if (q == 1) {
        a[0] = 1.0;
        return a;
    }
    const double qd = q;
    for (int j = 1; j <= q; ++j)
        a[j - 1] = j / (1.0 - 1.0 / (qd * qd)) * (12.0 * (j / qd - 0.5) / (qd * qd) - 6.0 / (qd * qd * qd));
    return a;
}

IVEstimate iv_realized(const LogPriceGrid& g, const TuningInputs&, const EstimatorParams& o) {
    check_grid(g);
    auto e = start("iv.rv", o);
    e.value = sum_sq(g.returns());
    return e;
}

IVEstimate iv_bias_corrected(const LogPriceGrid& g, const TuningInputs& t, const EstimatorParams& o) {
    check_grid(g);
    auto e = start("iv.bc", o);
    const auto n = static_cast<int>(g.n());
    const double feas = t.iv_hat > 0.0 ? 2.0 * n * t.omega2_hat / (t.iv_hat * std::sqrt(3.0)) : 1.0;
    const int q = pick(o.q, std::max(1.0, std::floor(feas)), 1, n / 2, "q", e);
    const auto& p = g.values;
    double s = 0.0;
    for (int j = q; j <= n; ++j) {
        const double d = p[j] - p[j - q];
        s += d * d;
        if (j >= 2 * q) s += 2.0 * d * (p[j - q] - p[j - 2 * q]);
    }
    e.value = static_cast<double>(n) / (n - q + 1.0) / q * s;
    return e;
}

IVEstimate iv_fourier(const LogPriceGrid& g, const TuningInputs& t, const EstimatorParams& o) {
    check_grid(g);
    auto e = start("iv.fourier", o);
    const auto n = static_cast<int>(g.n());
    const int N = pick(o.N, select_fourier_cutoff(g.n(), t.iv_hat, t.omega2_hat), 1, n / 2, "N", e);
    const auto X = return_fourier_coefficients(g.returns());
    const double a = N + 1.0;
    double s = std::norm(X[0]) / a;
    for (int k = 1; k <= N; ++k) s += 2.0 * (1.0 - k / a) * std::norm(X[k % n]) / a;
    e.value = s;
    return e;
}

IVEstimate iv_mle(const LogPriceGrid& g, const TuningInputs&, const EstimatorParams& o) {
    check_grid(g);
    auto e = start("iv.mle", o);
    const auto r = g.returns();
    const MA1Fit fit = fit_ma1(r);
    if (!fit.ok) {
        e.value = sum_sq(r) > 0.0 ? sum_sq(r) : 0.0;
        e.flags.push_back("MA(1) fit failed");
        return e;
    }
    e.diagnostics["phi"] = fit.phi;
    e.diagnostics["sigma2_w"] = fit.sigma2_w;
    e.value = static_cast<double>(r.size()) * fit.sigma2_w * (1.0 + fit.phi) * (1.0 + fit.phi);
    return e;
}

IVEstimate iv_two_scale(const LogPriceGrid& g, const TuningInputs& t, const EstimatorParams& o) {
    check_grid(g);
    auto e = start("iv.two_scale", o);
    const auto n = static_cast<int>(g.n());
    const double nd = n;
    const double feas = t.iq_hat > 0.0 ? std::pow(nd, 2.0 / 3.0) * std::cbrt(12.0 * t.omega4_hat / t.iq_hat) : 2.0;
    const int q = pick(o.q, feas, 2, n / 2, "q", e);
    const double nbar = (nd - q + 1.0) / (nd * q);
    const double slow = subsampled_sum(g.values, q);
    const double fast = sum_sq(g.returns());
    e.value = (slow - nbar * fast) / (1.0 - nbar);
    return e;
}

IVEstimate iv_multi_scale(const LogPriceGrid& g, const TuningInputs& t, const EstimatorParams& o) {
    check_grid(g);
    auto e = start("iv.multi_scale", o);
    const auto n = static_cast<int>(g.n());
    double feas = 2.0;
    if (t.iq_hat > 0.0) {
        const double w2 = t.omega2_hat, w4 = t.omega4_hat;
        const double beta = (48.0 / 5.0) * w2 * (t.iv_hat + w2 / 2.0) / ((208.0 / 35.0) * t.iq_hat);
        feas = std::sqrt(static_cast<double>(n)) *
               std::sqrt(beta + std::sqrt(beta * beta + 144.0 * w4 / ((104.0 / 35.0) * t.iq_hat)));
    }
    const int q = pick(o.q, feas, 2, n / 2, "q", e);
    const auto a = multi_scale_weights(q);
    double s = 0.0;
    for (int j = 1; j <= q; ++j) s += a[j - 1] * subsampled_sum(g.values, j);
    e.value = s;
    return e;
}

IVEstimate iv_kernel(const LogPriceGrid& g, const TuningInputs& t, const EstimatorParams& o) {
    check_grid(g);
    auto e = start("iv.kernel", o);
    e.params_used.kernel = "tukey_hanning2";
    const auto n = static_cast<int>(g.n());
    double feas = 1.0;
    if (t.iq_hat > 0.0) {
        const auto& kc = th2_constants();
        const double beta = kc.b * t.omega2_hat * (t.iv_hat + t.omega2_hat / 2.0) / (2.0 * kc.a * t.iq_hat);
        const double inner = beta * beta + kc.c * t.omega4_hat / (kc.a * t.iq_hat);
        feas = std::sqrt(static_cast<double>(n)) * std::sqrt(std::max(0.0, beta + std::sqrt(std::max(0.0, inner))));
    }
    const int q = pick(o.q, feas, 1, n / 2, "q", e);
    const auto r = g.returns();
    double s = sum_sq(r);
    for (int j = 1; j <= q; ++j) s += 2.0 * tukey_hanning2((j - 1.0) / q) * autocov_sum(r, j);
    e.value = s;
    return e;
}

IVEstimate iv_preaveraging(const LogPriceGrid& g, const TuningInputs&, const EstimatorParams& o) {
    check_grid(g);
    auto e = start("iv.preavg", o);
    const auto n = static_cast<int>(g.n());
    int h_default = static_cast<int>(std::llround(240.0 / g.mesh));
    h_default += h_default % 2;
    int h = pick(o.h, h_default, 2, std::max(2, (n / 2) - (n / 2) % 2), "h", e, "default");
    if (h % 2) {
        ++h;
        e.diagnostics["h"] = h;
        e.flags.push_back("h rounded up to even");
    }
    const int half = h / 2;
    const auto& p = g.values;
    // Prefix sums of prices for the half-window averages.
    std::vector<double> cs(p.size() + 1, 0.0);
    for (size_t i = 0; i < p.size(); ++i) cs[i + 1] = cs[i] + (p[i] - p[0]);
    double s = 0.0;
    int windows = 0;
    for (int s0 = 0; s0 + h - 1 <= n; ++s0) {
        const double first = (cs[s0 + half] - cs[s0]) / half;
        const double second = (cs[s0 + h] - cs[s0 + half]) / half;
        s += (second - first) * (second - first);
        ++windows;
    }
    const double rv = sum_sq(g.returns());
    e.diagnostics["windows"] = windows;
    e.value = static_cast<double>(n) / windows * (3.0 / h) * s - 6.0 / (static_cast<double>(h) * h) * rv;
    return e;
}

IVEstimate iv_alternation(const LogPriceGrid& g, const TuningInputs&, const EstimatorParams& o) {
    check_grid(g);
    auto e = start("iv.alternation", o);
    const auto r = g.returns();
    long nc = 0, na = 0;
    int prev = 0;
    for (double x : r) {
        if (x == 0.0) continue;
        const int s = x > 0.0 ? 1 : -1;
        if (prev != 0) (s == prev ? nc : na) += 1;
        prev = s;
    }
    e.diagnostics["n_c"] = static_cast<double>(nc);
    e.diagnostics["n_a"] = static_cast<double>(na);
    const double rv = sum_sq(r);
    if (na == 0) {
        e.value = rv;
        e.flags.push_back("no alternations: realized variance returned");
        return e;
    }
    e.value = static_cast<double>(nc) / static_cast<double>(na) * rv;
    return e;
}

IVEstimate iv_range(const LogPriceGrid& g, const TuningInputs& t, const EstimatorParams& o) {
    check_grid(g);
    auto e = start("iv.range", o);
    const auto n = static_cast<int>(g.n());
    const double feas = t.omega4_hat > 0.0 ? std::cbrt(t.iq_hat / t.omega4_hat) : static_cast<double>(n);
    // Keep at least ten blocks unless overridden.
    const int q = pick(o.q, std::min(feas, std::max(1.0, n / 10.0)), 1, n, "q", e);
    const int blocks = n / q;
    const auto& p = g.values;
    double s = 0.0;
    for (int b = 0; b < blocks; ++b) {
        const auto first = p.begin() + static_cast<long>(b) * q;
        const auto [mn, mx] = std::minmax_element(first, first + q + 1);
        s += (*mx - *mn) * (*mx - *mn);
    }
    e.diagnostics["blocks"] = blocks;
    // Rescale for the tail shorter than one block.
    const double coverage = static_cast<double>(n) / (static_cast<double>(blocks) * q);
    e.value = coverage * s / (4.0 * std::log(2.0));
    return e;
}

IVEstimate iv_unified(const LogPriceGrid& g, const TuningInputs&, const EstimatorParams& o) {
    check_grid(g);
    auto e = start("iv.unified", o);
    const auto n = static_cast<int>(g.n());
    const int scale_cap = std::max(1, n / 4);
    const int q1 = pick(o.q, 30, 1, scale_cap, "q1", e, "default");
    const int m = pick(o.m_scales, 20, 1, std::max(1, scale_cap - q1 + 1), "m", e, "default");
    std::vector<double> nl(m), srv(m);
    double nbar = 0.0;
    for (int l = 0; l < m; ++l) {
        const int q = q1 + l;
        nl[l] = (n - q + 1.0) / q;
        srv[l] = subsampled_sum(g.values, q);
        nbar += nl[l];
    }
    nbar /= m;
    double sq = 0.0;
    for (double v : nl) sq += v * v;
    const double denom = sq - m * nbar * nbar;
    double value = 0.0;
    const bool degenerate = !(denom > 1e-12 * sq);
    if (degenerate && m > 1) e.flags.push_back("equal scale counts: equal weights used");
    for (int l = 0; l < m; ++l) {
        const double w = degenerate ? 1.0 / m : 1.0 / m - nbar * (nl[l] - nbar) / denom;
        value += w * srv[l];
    }
    e.value = value;
    return e;
}

}  // namespace qrvol
