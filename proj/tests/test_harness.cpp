#include "qrvol/harness.hpp"
#include "qrvol/report.hpp"
#include "qrvol/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

using namespace qrvol;

namespace {

ScenarioConfig surrogate_scenario(double omega, int paths) {
    ScenarioConfig c;
    SurrogateParams p;
    p.sigma2 = {1e-8};
    p.omega = omega;
    c.model = SurrogateModel{p};
    c.n_paths = paths;
    c.series = {SeriesKind::mid};
    c.seed = 17;
    return c;
}

TickPath locked(std::vector<std::pair<double, double>> spreads, double horizon) {
    TickPath p;
    p.horizon = horizon;
    p.tick_size = 0.01;
    for (const auto& [t, s] : spreads) p.quotes.push_back({10.0, 10.0 + 0.01 * s, 1, 1, t});
    return p;
}

}  // namespace

TEST(RunScenario, ConstantPriceGivesZeroEstimatesAndBiasMinusOne) {
    ScenarioConfig c = surrogate_scenario(0.0, 1);
    std::get<SurrogateModel>(c.model).params.sigma2 = {0.0};
    c.truth = TruthSource::given;
    c.truth_values = {{1e-8, 1e-8, 1e-8}};
    const ExperimentReport r = run_scenario(c);
    for (const auto& row : r.rows) {
        ASSERT_EQ(row.n_ok, 1) << row.estimator_id;
        EXPECT_EQ(row.estimates[0], 0.0) << row.estimator_id;
        EXPECT_DOUBLE_EQ(row.rel_bias, -1.0) << row.estimator_id;
    }
}

TEST(RunScenario, RealizedVarianceBiasMatchesAnalytic) {
    ScenarioConfig c = surrogate_scenario(5e-5, 40);
    c.estimators = {"iv.rv", "iv.kernel"};
    const ExperimentReport r = run_scenario(c);
    const auto* rv = r.find("iv.rv", SeriesKind::mid);
    ASSERT_NE(rv, nullptr);
    const double analytic = 2.0 * 23400 * 2.5e-9 / (1e-8 * 23400);
    EXPECT_NEAR(rv->rel_bias, analytic, 3.0 * standard_error(rv->estimates) / rv->truth + 1e-3);
    for (const auto& row : r.rows) EXPECT_GE(row.rel_mse + 1e-12, row.rel_bias * row.rel_bias);
}

TEST(RunScenario, QRReportShape) {
    ScenarioConfig c;
    c.model = QRModel{default_qr_params(), RegimeSchedule::constant(0.6, 0.85)};
    c.n_paths = 2;
    c.horizon = 3600;
    c.estimators = {"iv.*"};
    c.truth = TruthSource::simulated;
    c.truth_m = 1800;
    c.truth_sims = 10;
    const ExperimentReport r = run_scenario(c);
    EXPECT_EQ(r.rows.size(), 33u);
    int groups = 0;
    for (const auto& rk : r.rankings) {
        if (rk.metric != "bias") continue;
        ++groups;
        EXPECT_EQ(rk.order.size(), 10u);
        const std::set<std::string> uniq(rk.order.begin(), rk.order.end());
        EXPECT_EQ(uniq.size(), rk.order.size());
    }
    EXPECT_EQ(groups, 3);
    EXPECT_GT(r.average_spread, 1.0);
    const std::string tables = render_ranking_tables(r);
    EXPECT_NE(tables.find("trade"), std::string::npos);
}

TEST(RunScenario, EstimatorFailuresAreRecorded) {
    ScenarioConfig c = surrogate_scenario(0.0, 3);
    c.horizon = 600;  // too short for feasible tuning
    c.estimators = {"iv.rv"};
    const ExperimentReport r = run_scenario(c);
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_EQ(r.rows[0].n_ok, 0);
    EXPECT_EQ(r.rows[0].n_failed, 3);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(RunScenario, BitReproducible) {
    ScenarioConfig c = surrogate_scenario(2e-5, 3);
    c.estimators = {"iv.two_scale", "spot.kernel"};
    const ExperimentReport a = run_scenario(c), b = run_scenario(c);
    std::ostringstream sa, sb;
    write_estimates_csv(a, sa);
    write_estimates_csv(b, sb);
    EXPECT_EQ(sa.str(), sb.str());
    EXPECT_FALSE(sa.str().empty());
}

TEST(RunScenario, InvalidConfig) {
    ScenarioConfig c = surrogate_scenario(0.0, 0);
    EXPECT_THROW(run_scenario(c), std::invalid_argument);
    c.n_paths = 1;
    c.estimators = {"iv.unknown"};
    EXPECT_THROW(run_scenario(c), std::invalid_argument);
}

TEST(Rankings, StableUnderRelabeling) {
    std::vector<EstimatorSummary> rows;
    const double vals[4] = {0.3, -0.1, 0.05, 0.2};
    for (int i = 0; i < 4; ++i) {
        EstimatorSummary r;
        r.estimator_id = "iv.e" + std::to_string(i);
        r.rel_bias = vals[i];
        r.rel_mse = vals[i] * vals[i] + 0.01 * i;
        r.n_ok = 5;
        rows.push_back(r);
    }
    auto relabeled = rows;
    for (auto& r : relabeled) r.estimator_id = "iv.z" + r.estimator_id.substr(4);
    const auto a = compute_rankings(rows), b = compute_rankings(relabeled);
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a[0].order, (std::vector<std::string>{"iv.e2", "iv.e1", "iv.e3", "iv.e0"}));
    for (size_t k = 0; k < a.size(); ++k)
        for (size_t j = 0; j < a[k].order.size(); ++j)
            EXPECT_EQ("iv.z" + a[k].order[j].substr(4), b[k].order[j]);
}

TEST(PairwiseTTests, IdenticalAndDisjoint) {
    ExperimentReport rep;
    EstimatorSummary a, b, c;
    a.estimator_id = "iv.a";
    b.estimator_id = "iv.b";
    c.estimator_id = "iv.c";
    a.estimates = {1, 2, 3, 4};
    b.estimates = {1, 2, 3, 4};
    c.estimates = {100, 100, 100, 100};
    for (auto* r : {&a, &b, &c}) r->n_ok = 4;
    rep.rows = {a, b, c};
    rep.rankings = compute_rankings(rep.rows);
    const auto m = pairwise_ttests(rep);
    ASSERT_EQ(m.size(), 1u);
    const auto& ids = m[0].ids;
    auto idx = [&](const std::string& s) { return std::find(ids.begin(), ids.end(), s) - ids.begin(); };
    EXPECT_DOUBLE_EQ(m[0].p[idx("iv.a")][idx("iv.b")], 1.0);
    EXPECT_LT(m[0].p[idx("iv.a")][idx("iv.c")], 1e-4);
}

TEST(WelchTTest, ConstantSamples) {
    EXPECT_EQ(welch_ttest({2, 2, 2}, {2, 2}).p_value, 1.0);
    EXPECT_EQ(welch_ttest({2, 2, 2}, {3, 3}).p_value, 0.0);
}

TEST(WelchTTest, KnownValue) {
    // Reference computed by hand: t = -2.0, df = 8 for these samples.
    const auto r = welch_ttest({1, 2, 3, 4, 5}, {3, 4, 5, 6, 7});
    EXPECT_NEAR(r.statistic, -2.0, 1e-12);
    EXPECT_NEAR(r.df, 8.0, 1e-12);
    EXPECT_NEAR(r.p_value, 0.0805, 1e-3);
}

TEST(WelchTTest, UniformPValuesUnderNull) {
    std::mt19937_64 eng(99);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> p;
    for (int r = 0; r < 1000; ++r) {
        std::vector<double> a(30), b(20);
        for (auto& x : a) x = 1.0 + z(eng);
        for (auto& x : b) x = 1.0 + 2.0 * z(eng);
        p.push_back(welch_ttest(a, b).p_value);
    }
    EXPECT_GT(ks_test(p, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value, 0.01);
}

TEST(KSTest, DetectsWrongDistributionAndTailSeries) {
    std::mt19937_64 eng(1);
    std::exponential_distribution<double> e(2.0);
    std::vector<double> x(2000);
    for (auto& v : x) v = e(eng);
    EXPECT_GT(ks_test(x, [](double t) { return 1 - std::exp(-2 * t); }).p_value, 0.01);
    EXPECT_LT(ks_test(x, [](double t) { return 1 - std::exp(-2.5 * t); }).p_value, 1e-4);
    // Known quantiles of the Kolmogorov distribution.
    EXPECT_NEAR(kolmogorov_tail(1.3581), 0.05, 1e-4);
    EXPECT_NEAR(kolmogorov_tail(1.6276), 0.01, 1e-4);
}

TEST(FiveRegimes, ConfigAndTruth) {
    ScenarioConfig c = five_regime_scenario();
    const auto& qr = std::get<QRModel>(c.model);
    ASSERT_EQ(qr.schedule.intervals.size(), 5u);
    double total = 0.0;
    for (const auto& iv : qr.schedule.intervals) total += iv.end - iv.start;
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_EQ(qr.schedule.intervals[2].theta, 0.6);
    EXPECT_EQ(qr.schedule.intervals[2].theta_reinit, 0.85);
    c.truth_m = 1000;
    c.truth_sims = 6;
    const Truth t = resolve_truth(c);
    ASSERT_EQ(t.sigma2.size(), 5u);
    const auto grid = spot_output_grid(23400);
    const SpotPath s = t.spot(SeriesKind::mid, grid, 23400);
    const std::set<double> levels(s.values.begin(), s.values.end());
    EXPECT_EQ(levels.size(), 5u);
}

TEST(SpreadStatistics, HandWeighting) {
    EXPECT_NEAR(spread_statistics(locked({{0.0, 1.0}}, 100.0)), 1.0, 1e-12);
    EXPECT_NEAR(spread_statistics(locked({{0.0, 1.0}, {50.0, 2.0}}, 100.0)), 1.5, 1e-12);
    EXPECT_NEAR(spread_statistics(std::vector<TickPath>{locked({{0.0, 1.0}}, 10.0), locked({{0.0, 2.0}}, 10.0)}), 1.5,
                1e-12);
}
