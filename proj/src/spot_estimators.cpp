#include "qrvol/spot_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qrvol {

namespace {

void check_inputs(const LogPriceGrid& g, const std::vector<double>& out) {
    if (g.n() < 10) throw std::invalid_argument("spot estimator: need n >= 10");
    for (double v : g.values)
        if (!std::isfinite(v)) throw std::invalid_argument("spot estimator: non-finite input");
    if (out.empty()) throw std::invalid_argument("spot estimator: empty output grid");
}

SpotPath start(const std::string& id, const std::vector<double>& out, const EstimatorParams& o) {
    SpotPath s;
    s.estimator_id = id;
    s.times = out;
    s.values.assign(out.size(), 0.0);
    s.edge.assign(out.size(), false);
    s.params_used = o;
    s.params_used.provenance.clear();
    return s;
}

int knob(const std::optional<int>& ov, double value, int lo, int hi, const std::string& name, SpotPath& s,
         const char* origin) {
    std::string prov = origin;
    long long v = 0;
    if (ov) {
        v = *ov;
        prov = "override";
    } else if (std::isfinite(value)) {
        v = std::llround(value);
    } else {
        v = lo;
        prov = "fallback";
    }
    if (v < lo || v > hi) {
        v = std::clamp<long long>(v, lo, hi);
        prov = "clamped";
        s.flags.push_back(name + " clamped to " + std::to_string(v));
    }
    s.params_used.provenance[name] = prov;
    s.diagnostics[name] = static_cast<double>(v);
    return static_cast<int>(v);
}

void mark_edges(SpotPath& s, double half_width, double horizon) {
    int count = 0;
    for (size_t j = 0; j < s.times.size(); ++j) {
        s.edge[j] = s.times[j] - half_width < -1e-9 || s.times[j] + half_width > horizon + 1e-9;
        count += s.edge[j];
    }
    if (count > 0) s.flags.push_back(std::to_string(count) + " edge points with truncated windows");
}

struct Prefix {
    std::vector<double> c;
    explicit Prefix(const std::vector<double>& x, double origin = 0.0) : c(x.size() + 1, 0.0) {
        for (size_t i = 0; i < x.size(); ++i) c[i + 1] = c[i] + (x[i] - origin);
    }
    // Sum of x[a..b), clipped to the valid range.
    double sum(long a, long b) const {
        a = std::clamp<long>(a, 0, static_cast<long>(c.size()) - 1);
        b = std::clamp<long>(b, 0, static_cast<long>(c.size()) - 1);
        return b > a ? c[b] - c[a] : 0.0;
    }
};

// Index range [a, b) of items with centers (i + offset)*mesh inside [t - hw, t + hw).
std::pair<long, long> window(double t, double hw, double mesh, double offset, long count) {
    const long a = static_cast<long>(std::ceil((t - hw) / mesh - offset - 1e-9));
    const long b = static_cast<long>(std::ceil((t + hw) / mesh - offset - 1e-9));
    return {std::clamp<long>(a, 0, count), std::clamp<long>(b, 0, count)};
}

}  // namespace

std::vector<double> SpotPath::floored() const {
    std::vector<double> v(values);
    for (double& x : v) x = std::max(x, 0.0);
    return v;
}

double SpotPath::day_average() const {
    if (values.empty()) return 0.0;
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

std::vector<double> spot_output_grid(double horizon, int n_t) {
    if (!(horizon > 0.0) || n_t < 1) throw std::invalid_argument("spot_output_grid: bad arguments");
    std::vector<double> t(n_t);
    for (int j = 0; j < n_t; ++j) t[j] = (j + 0.5) * horizon / n_t;
    return t;
}

SpotPath spot_fourier(const LogPriceGrid& g, const std::vector<double>& out, const TuningInputs& t,
                      const EstimatorParams& o) {
    check_inputs(g, out);
    auto s = start("spot.fourier", out, o);
    const auto n = static_cast<long>(g.n());
    const int N = knob(o.N, select_fourier_cutoff(g.n(), t.iv_hat, t.omega2_hat), 1, static_cast<int>(n / 2), "N", s,
                       "feasible");
    const int M = knob(o.M, std::floor(std::sqrt(static_cast<double>(N))), 0, N, "M", s, "default");
    const auto X = return_fourier_coefficients(g.returns());
    auto coef = [&](long k) { return X[static_cast<size_t>(((k % n) + n) % n)]; };

    std::vector<std::complex<double>> c(2 * M + 1);
    const double norm = 1.0 / (2.0 * std::numbers::pi * (2.0 * N + 1.0));
    for (int k = -M; k <= M; ++k) {
        std::complex<double> acc = 0.0;
        for (int j = -N; j <= N; ++j) acc += coef(j) * coef(k - j);
        c[k + M] = acc * norm;
    }
    const double H = g.horizon();
    const double to_seconds = 2.0 * std::numbers::pi / H;
    double max_re = 0.0, max_im = 0.0;
    for (size_t j = 0; j < out.size(); ++j) {
        const double theta = 2.0 * std::numbers::pi * out[j] / H;
        std::complex<double> v = 0.0;
        for (int k = -M; k <= M; ++k)
            v += (1.0 - std::abs(k) / (M + 1.0)) * std::polar(1.0, k * theta) * c[k + M];
        s.values[j] = v.real() * to_seconds;
        max_re = std::max(max_re, std::abs(v.real()));
        max_im = std::max(max_im, std::abs(v.imag()));
    }
    s.diagnostics["imag_residual"] = max_re > 0.0 ? max_im / max_re : max_im;
    return s;
}

SpotPath spot_regularized(const LogPriceGrid& g, const std::vector<double>& out, const TuningInputs&,
                          const EstimatorParams& o) {
    check_inputs(g, out);
    auto sp = start("spot.regularized", out, o);
    const auto n = static_cast<long>(g.n());
    const auto nt = static_cast<double>(out.size());
    const int q = knob(o.q, std::floor(n / nt), 1, static_cast<int>(n / 4), "q", sp, "default");
    const int s = knob(o.s, 2.0 * q, 1, static_cast<int>(n / 2), "s", sp, "default");
    const double C = 3.0 * s * s / (static_cast<double>(q) * (3.0 * s * q - static_cast<double>(q) * q + 1.0));
    const Prefix cp(g.values, g.values[0]);

    // Block averages over the s prices ending at index i*q.
    const long blocks = n / q;
    std::vector<double> dbar, centers;
    double prev = 0.0;
    bool have = false;
    for (long i = 1; i <= blocks; ++i) {
        const long end = i * q;
        if (end - s + 1 < 0) continue;
        const double avg = cp.sum(end - s + 1, end + 1) / s;
        if (have) {
            dbar.push_back((avg - prev) * (avg - prev));
            centers.push_back((static_cast<double>(end) - 0.5 * (q + s)) * g.mesh);
        }
        prev = avg;
        have = true;
    }
    if (dbar.empty()) throw std::invalid_argument("spot_regularized: grid too short for q, s");
    const int L = knob(std::nullopt, std::floor(std::sqrt(static_cast<double>(n) / q)), 1,
                       static_cast<int>(dbar.size()), "L", sp, "default");
    const Prefix cd(dbar);
    const auto m = static_cast<long>(dbar.size());
    for (size_t j = 0; j < out.size(); ++j) {
        // Nearest block to t, then L blocks centered on it.
        const auto it = std::lower_bound(centers.begin(), centers.end(), out[j]);
        long c = std::clamp<long>(it - centers.begin(), 0, m - 1);
        if (c > 0 && std::abs(centers[c - 1] - out[j]) <= std::abs(centers[c] - out[j])) --c;
        long a = c - L / 2;
        a = std::clamp<long>(a, 0, m - L);
        sp.values[j] = C * cd.sum(a, a + L) / L / g.mesh;
        sp.edge[j] = a != c - L / 2;
    }
    return sp;
}

SpotPath spot_kernel(const LogPriceGrid& g, const std::vector<double>& out, const TuningInputs&,
                     const EstimatorParams& o) {
    check_inputs(g, out);
    auto sp = start("spot.kernel", out, o);
    sp.params_used.kernel = "epanechnikov";
    const auto n = static_cast<long>(g.n());
    const double nd = static_cast<double>(n);
    const int q = knob(o.q, std::floor(std::sqrt(nd) / std::log(nd)), 1, static_cast<int>(n / 2), "q", sp, "default");
    const auto r = g.returns();
    const double hw = q * g.mesh;
    for (size_t j = 0; j < out.size(); ++j) {
        const auto [a, b] = window(out[j], hw, g.mesh, 0.5, n);
        double num = 0.0, den = 0.0;
        for (long i = a; i < b; ++i) {
            const double x = ((i + 0.5) * g.mesh - out[j]) / hw;
            const double w = 0.75 * (1.0 - x * x);
            if (w <= 0.0) continue;
            num += w * r[i] * r[i];
            den += w;
        }
        sp.values[j] = den > 0.0 ? num / den / g.mesh : 0.0;
    }
    mark_edges(sp, hw, g.horizon());
    return sp;
}

SpotPath spot_preaveraging(const LogPriceGrid& g, const std::vector<double>& out, const TuningInputs&,
                           const EstimatorParams& o) {
    check_inputs(g, out);
    auto sp = start("spot.preavg", out, o);
    const auto n = static_cast<long>(g.n());
    const double nd = static_cast<double>(n);
    const double c1 = o.c1.value_or(1.0 / 3.0), c2 = o.c2.value_or(1.0);
    sp.params_used.c1 = c1;
    sp.params_used.c2 = c2;
    int h = knob(o.s, std::floor(c2 * std::sqrt(nd)), 2, static_cast<int>(n / 4), "s", sp, "default");
    if (h % 2) {
        --h;
        sp.diagnostics["s"] = h;
    }
    const int q = knob(o.q, std::floor(c1 * std::pow(nd, 0.75)), h, static_cast<int>(n), "q", sp, "default");
    const int half = h / 2;
    const Prefix cp(g.values, g.values[0]);
    const long windows = n - h + 2;
    std::vector<double> d2(windows);
    for (long s0 = 0; s0 < windows; ++s0) {
        const double first = cp.sum(s0, s0 + half) / half;
        const double second = cp.sum(s0 + half, s0 + h) / half;
        d2[s0] = (second - first) * (second - first);
    }
    auto r = g.returns();
    for (double& x : r) x *= x;
    const Prefix cd(d2), cr(r);
    const double hw = 0.5 * q * g.mesh;
    for (size_t j = 0; j < out.size(); ++j) {
        // Window s0 is centered at (s0 + h/2) * mesh; return i at (i + 0.5) * mesh.
        const auto [wa, wb] = window(out[j], hw, g.mesh, 0.5 * h, windows);
        const auto [ra, rb] = window(out[j], hw, g.mesh, 0.5, n);
        if (wb <= wa || rb <= ra) continue;
        const double mean_d2 = cd.sum(wa, wb) / static_cast<double>(wb - wa);
        const double mean_r2 = cr.sum(ra, rb) / static_cast<double>(rb - ra);
        sp.values[j] = (3.0 / h * mean_d2 - 6.0 / (static_cast<double>(h) * h) * mean_r2) / g.mesh;
    }
    mark_edges(sp, hw + 0.5 * h * g.mesh, g.horizon());
    return sp;
}

double two_scale_gamma(const LogPriceGrid& g, int window) {
    const auto n = static_cast<long>(g.n());
    if (window < 1 || window > n) throw std::invalid_argument("two_scale_gamma: bad window");
    auto r = g.returns();
    for (double& x : r) x *= x;
    // Rolling variance in units of the whole horizon.
    const double scale = static_cast<double>(n) / window;
    // Direct window sums.
    auto wsum = [&](long end) { return std::accumulate(r.begin() + (end - window), r.begin() + end, 0.0); };
    double gamma = 0.0, prev = wsum(window) * scale;
    for (long i = window; i < n; ++i) {
        const double v = wsum(i + 1) * scale;
        gamma += (v - prev) * (v - prev);
        prev = v;
    }
    return gamma;
}

SpotPath spot_two_scale(const LogPriceGrid& g, const std::vector<double>& out, const TuningInputs& t,
                        const EstimatorParams& o) {
    check_inputs(g, out);
    auto sp = start("spot.two_scale", out, o);
    const auto n = static_cast<long>(g.n());
    const double nd = static_cast<double>(n);
    const double q0 = t.iq_hat > 0.0 ? std::cbrt(12.0 * t.omega4_hat / t.iq_hat) : 0.0;
    const int q = knob(o.q, q0 * std::pow(nd, 2.0 / 3.0), 2, std::max(2, static_cast<int>(n / 40)), "q", sp,
                       "feasible");
    const int pilot = std::max(1, static_cast<int>(std::floor(std::sqrt(nd))));
    const double gamma = two_scale_gamma(g, pilot);
    sp.diagnostics["gamma"] = gamma;
    sp.diagnostics["q0"] = q0;
    double s_steps = std::numeric_limits<double>::infinity();
    if (gamma > 0.0 && q0 > 0.0) {
        const double s0 = std::sqrt((8.0 * t.omega4_hat / (q0 * q0) + 4.0 / 3.0 * q0 * t.iq_hat) / (gamma / 3.0));
        sp.diagnostics["s0"] = s0;
        s_steps = s0 * std::pow(nd, -1.0 / 6.0) * nd;
    }
    const int lo = std::max(4 * q, 30);
    const int hi = std::max(lo, static_cast<int>(n / 10));
    const int s = knob(o.s, std::min(s_steps, 1e9), lo, hi, "s", sp, "feasible");

    const auto& p = g.values;
    std::vector<double> dq(n + 1, 0.0), r2(n + 1, 0.0);
    for (long j = q; j <= n; ++j) dq[j] = (p[j] - p[j - q]) * (p[j] - p[j - q]);
    for (long j = 1; j <= n; ++j) r2[j] = (p[j] - p[j - 1]) * (p[j] - p[j - 1]);
    const Prefix cq(dq), cr(r2);
    const double hw = 0.5 * s * g.mesh;
    for (size_t j = 0; j < out.size(); ++j) {
        // Returns a..b-1 in 0-based return numbering are p-increments a+1..b.
        const auto [a, b] = window(out[j], hw, g.mesh, 0.5, n);
        const long ns = b - a;
        if (ns <= q) continue;
        const double slow = cq.sum(a + q, b + 1) / static_cast<double>(ns - q + 1);
        const double fast = cr.sum(a + 1, b + 1) / static_cast<double>(ns);
        sp.values[j] = (slow - fast) / (q - 1.0) / g.mesh;
    }
    mark_edges(sp, hw, g.horizon());
    return sp;
}

SpotPath spot_preavg_kernel(const LogPriceGrid& g, const std::vector<double>& out, const TuningInputs&,
                            const EstimatorParams& o) {
    check_inputs(g, out);
    auto sp = start("spot.preavg_kernel", out, o);
    sp.params_used.kernel = "exponential";
    const auto n = static_cast<long>(g.n());
    const double nd = static_cast<double>(n);
    const int s = knob(o.s, std::sqrt(nd) / 5.0, 2, static_cast<int>(n / 4), "s", sp, "default");
    const double bw = o.bandwidth.value_or(300.0);
    sp.params_used.bandwidth = bw;
    sp.diagnostics["bandwidth"] = bw;
    if (!(bw > 0.0)) throw std::invalid_argument("spot_preavg_kernel: bandwidth must be > 0");

    auto gfun = [](double x) { return std::min(2.0 * x, 1.0 - x); };
    std::vector<double> dg(s + 1, 0.0);
    double fg = 0.0;
    for (int i = 1; i <= s; ++i) {
        dg[i] = gfun(static_cast<double>(i) / s) - gfun(static_cast<double>(i - 1) / s);
        fg += gfun(static_cast<double>(i) / s) * gfun(static_cast<double>(i) / s);
    }
    const auto& p = g.values;
    const long blocks = n - s + 1;
    std::vector<double> term(blocks);
    for (long j = 1; j <= blocks; ++j) {
        double bar = 0.0, hat = 0.0;
        for (int i = 1; i <= s; ++i) {
            bar -= dg[i] * (p[i + j - 2] - p[0]);
            const double d = p[i + j - 1] - p[i + j - 2];
            hat += dg[i] * dg[i] * d * d;
        }
        term[j - 1] = bar * bar - 0.5 * hat;
    }
    const double reach = 20.0 * bw;
    for (size_t k = 0; k < out.size(); ++k) {
        // Block j sits at t_{j-1} = (j-1) * mesh.
        const auto [a, b] = window(out[k], reach, g.mesh, 0.0, blocks);
        double num = 0.0, den = 0.0;
        for (long j = a; j < b; ++j) {
            const double w = 0.5 * std::exp(-std::abs(j * g.mesh - out[k]) / bw);
            num += w * term[j];
            den += w;
        }
        sp.values[k] = den > 0.0 ? num / den / fg / g.mesh : 0.0;
    }
    mark_edges(sp, 3.0 * bw, g.horizon());
    return sp;
}

SpotMetrics integrated_metrics(const SpotPath& spot, const SpotPath& truth) {
    return integrated_metrics(std::vector<SpotPath>{spot}, truth);
}

SpotMetrics integrated_metrics(const std::vector<SpotPath>& spots, const SpotPath& truth) {
    if (spots.empty()) throw std::invalid_argument("integrated_metrics: no paths");
    const size_t m = truth.values.size();
    for (const auto& s : spots)
        if (s.values.size() != m) throw std::invalid_argument("integrated_metrics: grids differ");
    for (double v : truth.values)
        if (v == 0.0) throw std::invalid_argument("integrated_metrics: zero truth value");
    SpotMetrics res;
    const auto P = static_cast<double>(spots.size());
    for (size_t j = 0; j < m; ++j) {
        const double tv = truth.values[j];
        double mean = 0.0, mse = 0.0;
        for (const auto& s : spots) {
            mean += s.values[j];
            mse += (s.values[j] - tv) * (s.values[j] - tv);
        }
        res.rel_int_bias += (mean / P - tv) / tv;
        res.rel_int_mse += mse / P / (tv * tv);
    }
    res.rel_int_bias /= static_cast<double>(m);
    res.rel_int_mse /= static_cast<double>(m);
    return res;
}

double trapezoid_integral(const SpotPath& s, double horizon) {
    const size_t m = s.values.size();
    if (m == 0) return 0.0;
    // Constant extension from the first and last points to the interval ends.
    double total = s.values.front() * s.times.front() + s.values.back() * (horizon - s.times.back());
    for (size_t j = 1; j < m; ++j) total += 0.5 * (s.values[j] + s.values[j - 1]) * (s.times[j] - s.times[j - 1]);
    return total;
}

}  // namespace qrvol
