#include "qrvol/registry.hpp"
#include "qrvol/sim_engine.hpp"
#include "qrvol/spot_estimators.hpp"
#include "qrvol/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace qrvol;

namespace {

constexpr double kHorizon = 23400.0;

LogPriceGrid surrogate_grid(std::vector<double> sigma2, std::vector<double> breaks, double omega, uint64_t seed) {
    SurrogateParams p;
    p.sigma2 = std::move(sigma2);
    p.breakpoints = std::move(breaks);
    p.omega = omega;
    return sample_grid(simulate_surrogate(p, kHorizon, seed), 1.0, SeriesKind::mid);
}

SpotPath constant_truth(const std::vector<double>& t, double v) {
    SpotPath s;
    s.times = t;
    s.values.assign(t.size(), v);
    s.edge.assign(t.size(), false);
    return s;
}

EstimatorParams fixed_knobs(const SpotPath& s) {
    EstimatorParams o;
    for (const auto& [k, v] : s.diagnostics) {
        const int iv = static_cast<int>(v);
        if (k == "q") o.q = iv;
        if (k == "s") o.s = iv;
        if (k == "N") o.N = iv;
        if (k == "M") o.M = iv;
    }
    return o;
}

}  // namespace

TEST(SpotGrid, MinuteMidpoints) {
    const auto t = spot_output_grid(kHorizon);
    ASSERT_EQ(t.size(), 390u);
    EXPECT_DOUBLE_EQ(t.front(), 30.0);
    EXPECT_DOUBLE_EQ(t.back(), kHorizon - 30.0);
}

TEST(SpotEstimators, ConstantGridGivesZeroPath) {
    LogPriceGrid g;
    g.values.assign(23401, std::log(50.0));
    const TuningInputs t = feasible_tuning(g);
    const auto out = spot_output_grid(kHorizon);
    for (const auto& e : spot_registry()) {
        const SpotPath s = e.fn(g, out, t, {});
        ASSERT_EQ(s.values.size(), out.size()) << e.id;
        ASSERT_EQ(s.edge.size(), out.size()) << e.id;
        for (double v : s.values) EXPECT_EQ(v, 0.0) << e.id;
    }
}

TEST(SpotEstimators, NoisyConstantVarianceWithinEnvelopeAndFinite) {
    const auto out = spot_output_grid(kHorizon);
    const SpotPath truth = constant_truth(out, 1e-8);
    std::map<std::string, std::vector<SpotPath>> paths;
    for (int i = 0; i < 30; ++i) {
        const LogPriceGrid g = surrogate_grid({1e-8}, {}, 5e-5, derive_seed(500, i));
        const TuningInputs t = feasible_tuning(g);
        for (const auto& e : spot_registry()) {
            SpotPath s = e.fn(g, out, t, {});
            for (double v : s.values) ASSERT_TRUE(std::isfinite(v)) << e.id;
            paths[e.id].push_back(std::move(s));
        }
    }
    double best = 1e300;
    std::string best_id;
    for (const auto& [id, v] : paths) {
        const SpotMetrics m = integrated_metrics(v, truth);
        if (id == "spot.kernel") {
            // Not noise robust: picks up the full 2nω²/IV.
            EXPECT_NEAR(m.rel_int_bias, 2.0 * 23400 * 2.5e-9 / (1e-8 * kHorizon), 0.1);
            continue;
        }
        EXPECT_LT(std::abs(m.rel_int_bias), 0.3) << id;
        if (m.rel_int_mse < best) {
            best = m.rel_int_mse;
            best_id = id;
        }
    }
    EXPECT_EQ(best_id, "spot.fourier");
}

TEST(SpotEstimators, StepVarianceLevelRatio) {
    // Variance jumps tenfold at mid-day; compare interior levels away from the
    // break and the day edges.
    const auto out = spot_output_grid(kHorizon);
    std::map<std::string, std::vector<double>> ratios;
    for (int i = 0; i < 6; ++i) {
        const LogPriceGrid g = surrogate_grid({1e-8, 1e-7}, {0.5}, 0.0, derive_seed(600, i));
        const TuningInputs t = feasible_tuning(g);
        for (const auto& e : spot_registry()) {
            if (e.id == "spot.fourier") continue;
            const SpotPath s = e.fn(g, out, t, {});
            double lo = 0.0, hi = 0.0;
            int nl = 0, nh = 0;
            for (size_t j = 0; j < out.size(); ++j) {
                const double f = out[j] / kHorizon;
                if (f > 0.1 && f < 0.4) lo += s.values[j], ++nl;
                if (f > 0.6 && f < 0.9) hi += s.values[j], ++nh;
            }
            ratios[e.id].push_back((hi / nh) / (lo / nl));
        }
    }
    for (const auto& [id, r] : ratios) EXPECT_NEAR(mean(r), 10.0, 3.5) << id;
}

TEST(SpotFourier, RealReconstruction) {
    const LogPriceGrid g = surrogate_grid({1e-8}, {}, 5e-5, 7);
    const SpotPath s = spot_fourier(g, spot_output_grid(kHorizon), feasible_tuning(g));
    EXPECT_LT(s.diagnostics.at("imag_residual"), 1e-12);
}

TEST(SpotFourier, IntegratesToIntegratedFourier) {
    for (int i = 0; i < 3; ++i) {
        const LogPriceGrid g = surrogate_grid({1e-8}, {}, 0.0, 80 + i);
        const TuningInputs t = feasible_tuning(g);
        const SpotPath s = spot_fourier(g, spot_output_grid(kHorizon), t);
        EstimatorParams o;
        o.N = static_cast<int>(s.diagnostics.at("N"));
        const double iv = iv_fourier(g, t, o).value;
        EXPECT_NEAR(trapezoid_integral(s, kHorizon) / iv, 1.0, 0.10);
    }
}

TEST(SpotFourier, MatchesDirectFejerSum) {
    // Naive evaluation of the Fejér inversion from convolved coefficients.
    std::mt19937_64 eng(3);
    std::normal_distribution<double> z(0.0, 1e-4);
    LogPriceGrid g;
    g.values.assign(201, 0.0);
    for (size_t i = 1; i < g.values.size(); ++i) g.values[i] = g.values[i - 1] + z(eng) * (i < 100 ? 1.0 : 2.0);
    const auto r = g.returns();
    const int n = static_cast<int>(r.size()), N = 60, M = 7;
    const double pi = 3.14159265358979323846;
    auto X = [&](int k) {
        std::complex<double> s = 0.0;
        for (int j = 0; j < n; ++j) s += std::polar(1.0, -2.0 * pi * k * (j + 1) / n) * r[j];
        return s;
    };
    std::vector<std::complex<double>> Xk(n);
    for (int k = 0; k < n; ++k) Xk[k] = X(k);
    auto Xm = [&](int k) { return Xk[((k % n) + n) % n]; };
    std::vector<std::complex<double>> c(2 * M + 1);
    for (int k = -M; k <= M; ++k) {
        std::complex<double> s = 0.0;
        for (int l = -N; l <= N; ++l) s += Xm(l) * Xm(k - l);
        c[k + M] = s / (2.0 * pi * (2 * N + 1));
    }
    EstimatorParams o;
    o.N = N;
    o.M = M;
    const std::vector<double> out = {10.0, 50.0, 150.0, 190.0};
    const SpotPath s = spot_fourier(g, out, {}, o);
    for (size_t j = 0; j < out.size(); ++j) {
        std::complex<double> v = 0.0;
        const double theta = 2.0 * pi * out[j] / g.horizon();
        for (int k = -M; k <= M; ++k) v += (1.0 - std::abs(k) / (M + 1.0)) * std::polar(1.0, k * theta) * c[k + M];
        const double want = v.real() * 2.0 * pi / g.horizon();
        EXPECT_NEAR(s.values[j], want, 1e-9 * std::abs(want));
    }
}

TEST(SpotTwoScale, GammaPilotOracle) {
    // For constant variance the rolling-RV pilot has increments driven only by
    // the fourth moment of the returns: E[gamma] = 4 IV^2 (n - w) / w^2.
    std::vector<double> g_ratio;
    const int w = 152;
    for (int i = 0; i < 20; ++i) {
        const LogPriceGrid g = surrogate_grid({1e-8}, {}, 0.0, 900 + i);
        const double iv = 1e-8 * kHorizon;
        g_ratio.push_back(two_scale_gamma(g, w) / (4.0 * iv * iv * (kHorizon - w) / (w * w)));
    }
    EXPECT_NEAR(mean(g_ratio), 1.0, 3.0 * standard_error(g_ratio) + 0.02);
}

TEST(SpotTwoScale, FlatRoughnessCapsWindow) {
    // Returns of constant magnitude give a pilot roughness of zero up to
    // rounding, so the window falls back to its cap.
    std::mt19937_64 eng(4);
    LogPriceGrid g;
    g.values.assign(23401, 0.0);
    for (size_t i = 1; i < g.values.size(); ++i) g.values[i] = g.values[i - 1] + ((eng() & 1) ? 1e-4 : -1e-4);
    EXPECT_LT(two_scale_gamma(g, 152), 1e-30);
    TuningInputs t = feasible_tuning(g);
    const SpotPath s = spot_two_scale(g, spot_output_grid(kHorizon), t);
    EXPECT_EQ(s.diagnostics.at("s"), 2340.0);
}

TEST(SpotEstimators, ShiftAndScaleInvariance) {
    const LogPriceGrid g = surrogate_grid({1e-8}, {}, 3e-5, 21);
    const TuningInputs t = feasible_tuning(g);
    const auto out = spot_output_grid(kHorizon);
    LogPriceGrid shifted = g, scaled = g;
    for (auto& v : shifted.values) v += 1.25;
    for (auto& v : scaled.values) v *= 3.0;
    for (const auto& e : spot_registry()) {
        const EstimatorParams o = fixed_knobs(e.fn(g, out, t, {}));
        const SpotPath a = e.fn(g, out, t, o), b = e.fn(shifted, out, t, o), c = e.fn(scaled, out, t, o);
        double scale = 0.0;
        for (double v : a.values) scale = std::max(scale, std::abs(v));
        for (size_t j = 0; j < out.size(); ++j) {
            EXPECT_NEAR(b.values[j], a.values[j], 1e-7 * scale) << e.id;
            EXPECT_NEAR(c.values[j], 9.0 * a.values[j], 1e-7 * 9.0 * scale) << e.id;
        }
    }
}

TEST(SpotEstimators, StationaryOnConstantVariance) {
    const auto out = spot_output_grid(kHorizon);
    std::map<std::string, std::vector<SpotPath>> paths;
    for (int i = 0; i < 20; ++i) {
        const LogPriceGrid g = surrogate_grid({1e-8}, {}, 2e-5, derive_seed(700, i));
        const TuningInputs t = feasible_tuning(g);
        for (const auto& e : spot_registry()) paths[e.id].push_back(e.fn(g, out, t, {}));
    }
    for (const auto& [id, ps] : paths) {
        double pointwise = 0.0, across = 0.0;
        int m = 0;
        for (size_t j = 0; j < out.size(); ++j) {
            if (ps[0].edge[j]) continue;
            std::vector<double> col;
            for (const auto& p : ps) col.push_back(p.values[j]);
            pointwise += std::sqrt(sample_variance(col));
            ++m;
        }
        pointwise /= m;
        for (const auto& p : ps) {
            std::vector<double> row;
            for (size_t j = 0; j < out.size(); ++j)
                if (!p.edge[j]) row.push_back(p.values[j]);
            across += std::sqrt(sample_variance(row)) / static_cast<double>(ps.size());
        }
        EXPECT_LT(across, 3.0 * pointwise) << id;
    }
}

TEST(SpotEstimators, EdgesFlaggedForWindowEstimators) {
    const LogPriceGrid g = surrogate_grid({1e-8}, {}, 0.0, 8);
    EstimatorParams p;
    p.q = 100;
    const SpotPath s = spot_kernel(g, spot_output_grid(kHorizon), feasible_tuning(g), p);
    EXPECT_TRUE(s.edge.front());
    EXPECT_TRUE(s.edge.back());
    EXPECT_FALSE(s.edge[195]);
}

TEST(SpotPath, FlooredViewKeepsRaw) {
    SpotPath s;
    s.times = {1, 2, 3};
    s.values = {-1.0, 2.0, 0.0};
    s.edge = {false, false, false};
    EXPECT_EQ(s.floored(), (std::vector<double>{0.0, 2.0, 0.0}));
    EXPECT_EQ(s.values[0], -1.0);
    EXPECT_NEAR(s.day_average(), 1.0 / 3.0, 1e-15);
}

TEST(IntegratedMetrics, Arithmetic) {
    const auto t = spot_output_grid(kHorizon);
    SpotPath truth = constant_truth(t, 2e-8);
    const SpotMetrics zero = integrated_metrics(truth, truth);
    EXPECT_EQ(zero.rel_int_bias, 0.0);
    EXPECT_EQ(zero.rel_int_mse, 0.0);
    SpotPath up = constant_truth(t, 2.4e-8);
    const SpotMetrics m = integrated_metrics(up, truth);
    EXPECT_NEAR(m.rel_int_bias, 0.2, 1e-12);
    EXPECT_NEAR(m.rel_int_mse, 0.04, 1e-12);
}

TEST(IntegratedMetrics, AcrossPathsBiasOfMeanMseOfPaths) {
    const std::vector<double> t = {1.0, 2.0};
    const SpotPath truth = constant_truth(t, 1.0);
    const SpotPath a = constant_truth(t, 1.5), b = constant_truth(t, 0.5);
    const SpotMetrics m = integrated_metrics(std::vector<SpotPath>{a, b}, truth);
    EXPECT_NEAR(m.rel_int_bias, 0.0, 1e-15);
    EXPECT_NEAR(m.rel_int_mse, 0.25, 1e-15);
}

TEST(IntegratedMetrics, Errors) {
    const std::vector<double> t = {1.0, 2.0};
    EXPECT_THROW(integrated_metrics(constant_truth(t, 1.0), constant_truth(t, 0.0)), std::invalid_argument);
    EXPECT_THROW(integrated_metrics(constant_truth(t, 1.0), constant_truth({1.0}, 1.0)), std::invalid_argument);
}

TEST(TrapezoidIntegral, ConstantPath) {
    const auto t = spot_output_grid(kHorizon);
    EXPECT_NEAR(trapezoid_integral(constant_truth(t, 3e-8), kHorizon), 3e-8 * kHorizon, 1e-12 * 3e-8 * kHorizon);
}
