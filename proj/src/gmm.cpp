#include "qrvol/calibration.hpp"
#include "qrvol/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace qrvol {

MomentFn qr_moment_fn(const QRParams& model, const GMMSettings& settings) {
    return [model, settings](double theta, double theta_reinit, int t) {
        QRParams p = model;
        p.theta = theta;
        p.theta_reinit = theta_reinit;
        QRSimulator sim(p, RegimeSchedule::constant(theta, theta_reinit), settings.horizon,
                        derive_seed(settings.seed, static_cast<uint64_t>(t)));
        MidGridRecorder rec(1.0, settings.horizon);
        sim.emit_initial(&rec);
        sim.run_until(settings.horizon, &rec);
        return grid_moments(rec.finish());
    };
}

GMMPoint nelder_mead_box(const std::function<double(double, double)>& f, GMMPoint start, double step, int max_evals,
                         double tol, int* evals) {
    struct P {
        double x, y, v;
    };
    int count = 0;
    auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
    auto eval = [&](double x, double y) {
        ++count;
        return P{clamp01(x), clamp01(y), f(clamp01(x), clamp01(y))};
    };
    auto offset = [&](double v) { return v + step <= 1.0 ? v + step : v - step; };
    std::vector<P> s = {{start.theta, start.theta_reinit, start.objective},
                        eval(offset(start.theta), start.theta_reinit),
                        eval(start.theta, offset(start.theta_reinit))};
    while (count < max_evals) {
        std::sort(s.begin(), s.end(), [](const P& a, const P& b) { return a.v < b.v; });
        const double size = std::max({std::hypot(s[1].x - s[0].x, s[1].y - s[0].y),
                                      std::hypot(s[2].x - s[0].x, s[2].y - s[0].y)});
        if (size < tol) break;
        const double cx = 0.5 * (s[0].x + s[1].x), cy = 0.5 * (s[0].y + s[1].y);
        const P r = eval(cx + (cx - s[2].x), cy + (cy - s[2].y));
        if (r.v < s[0].v) {
            const P e = eval(cx + 2.0 * (cx - s[2].x), cy + 2.0 * (cy - s[2].y));
            s[2] = e.v < r.v ? e : r;
        } else if (r.v < s[1].v) {
            s[2] = r;
        } else {
            const bool outside = r.v < s[2].v;
            const P c = outside ? eval(cx + 0.5 * (r.x - cx), cy + 0.5 * (r.y - cy))
                                : eval(cx + 0.5 * (s[2].x - cx), cy + 0.5 * (s[2].y - cy));
            if (c.v < std::min(r.v, s[2].v)) {
                s[2] = c;
            } else {
                for (int k = 1; k < 3; ++k) s[k] = eval(0.5 * (s[0].x + s[k].x), 0.5 * (s[0].y + s[k].y));
            }
        }
    }
    std::sort(s.begin(), s.end(), [](const P& a, const P& b) { return a.v < b.v; });
    if (evals) *evals += count;
    return {s[0].x, s[0].y, s[0].v};
}

namespace {

class MomentCache {
public:
    MomentCache(const MomentFn& fn, int T) : fn_(fn), T_(T) {}

    const std::vector<GMMMoments>& get(double theta, double theta_reinit) {
        const auto key = std::make_pair(std::llround(theta * 1e9), std::llround(theta_reinit * 1e9));
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        std::vector<GMMMoments> m(T_);
        parallel_for(static_cast<size_t>(T_), [&](size_t t) { m[t] = fn_(theta, theta_reinit, static_cast<int>(t)); });
        ++evaluations;
        return cache_.emplace(key, std::move(m)).first->second;
    }

    int evaluations = 0;

private:
    const MomentFn& fn_;
    int T_;
    std::map<std::pair<long long, long long>, std::vector<GMMMoments>> cache_;
};

std::array<double, 2> mean_g(const std::vector<GMMMoments>& m, const GMMMoments& tg) {
    double gs = 0.0, gz = 0.0;
    for (const auto& x : m) {
        gs += x.sigma / tg.sigma - 1.0;
        gz += x.zeta / tg.zeta - 1.0;
    }
    const auto T = static_cast<double>(m.size());
    return {gs / T, gz / T};
}

GMMPoint grid_then_refine(const std::function<double(double, double)>& f, const GMMSettings& s, int* evals) {
    const int steps = std::max(1, static_cast<int>(std::llround(1.0 / s.grid_step)));
    GMMPoint best{0.0, 0.0, std::numeric_limits<double>::infinity()};
    for (int i = 0; i <= steps; ++i)
        for (int j = 0; j <= steps; ++j) {
            const double a = static_cast<double>(i) / steps, b = static_cast<double>(j) / steps;
            const double v = f(a, b);
            if (v < best.objective) best = {a, b, v};
        }
    return nelder_mead_box(f, best, 0.5 * s.grid_step, s.nm_max_evals, s.nm_tol, evals);
}

}  // namespace

GMMResult calibrate_theta_gmm(const MomentFn& moments, GMMMoments targets, const GMMSettings& settings) {
    if (!(targets.sigma > 0.0) || !(targets.zeta > 0.0))
        throw std::invalid_argument("calibrate_theta_gmm: targets must be > 0");
    if (settings.T < 1) throw std::invalid_argument("calibrate_theta_gmm: T must be >= 1");
    GMMResult res;
    if (settings.T < 2) res.warnings.push_back("T < 2: weight matrix is rank-deficient");
    MomentCache cache(moments, settings.T);

    auto step1 = [&](double a, double b) {
        const auto g = mean_g(cache.get(a, b), targets);
        return g[0] * g[0] + g[1] * g[1];
    };
    int nm_evals = 0;
    const GMMPoint p1 = grid_then_refine(step1, settings, &nm_evals);
    res.step1_theta = p1.theta;
    res.step1_theta_reinit = p1.theta_reinit;
    res.step1_objective = p1.objective;

    // W^{-1} = average outer product of the moment vectors at the step-1 point.
    double s11 = 0.0, s12 = 0.0, s22 = 0.0;
    const auto& m1 = cache.get(p1.theta, p1.theta_reinit);
    for (const auto& x : m1) {
        const double a = x.sigma / targets.sigma - 1.0, b = x.zeta / targets.zeta - 1.0;
        s11 += a * a;
        s12 += a * b;
        s22 += b * b;
    }
    const auto T = static_cast<double>(m1.size());
    s11 /= T;
    s12 /= T;
    s22 /= T;
    const double det = s11 * s22 - s12 * s12;
    const double scale = s11 + s22;
    if (!(scale > 0.0) || !(det > 1e-10 * scale * scale) || settings.T < 2) {
        res.identity_fallback = true;
        res.warnings.push_back("singular moment covariance: identity weight used");
        res.W = {{{1.0, 0.0}, {0.0, 1.0}}};
    } else {
        res.W = {{{s22 / det, -s12 / det}, {-s12 / det, s11 / det}}};
    }

    const auto W = res.W;
    auto step2 = [&](double a, double b) {
        const auto g = mean_g(cache.get(a, b), targets);
        return g[0] * (W[0][0] * g[0] + W[0][1] * g[1]) + g[1] * (W[1][0] * g[0] + W[1][1] * g[1]);
    };
    const GMMPoint p2 = grid_then_refine(step2, settings, &nm_evals);
    res.theta = p2.theta;
    res.theta_reinit = p2.theta_reinit;
    res.step2_objective = std::max(0.0, p2.objective);
    res.moments = cache.get(p2.theta, p2.theta_reinit);
    res.evaluations = cache.evaluations;
    return res;
}

GMMResult calibrate_theta_gmm(const QRParams& model, GMMMoments targets, const GMMSettings& settings) {
    return calibrate_theta_gmm(qr_moment_fn(model, settings), targets, settings);
}

}  // namespace qrvol
