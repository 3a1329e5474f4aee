#include "qrvol/calibration.hpp"
#include "qrvol/execution.hpp"
#include "qrvol/harness.hpp"
#include "qrvol/noise_test.hpp"
#include "qrvol/report.hpp"
#include "qrvol/rng.hpp"
#include "qrvol/stats.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace qrvol;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

ScenarioConfig surrogate(double sigma2, double omega, int paths, uint64_t seed) {
    ScenarioConfig c;
    SurrogateParams p;
    p.sigma2 = {sigma2};
    p.omega = omega;
    c.model = SurrogateModel{p};
    c.n_paths = paths;
    c.series = {SeriesKind::mid};
    c.seed = seed;
    return c;
}

QRModel default_model() {
    const QRParams& p = default_qr_params();
    return QRModel{p, RegimeSchedule::constant(p.theta, p.theta_reinit)};
}

// Frozen-state waits against the exponential law; ZI event counts against Poisson.
Outcome simulator_oracles() {
    const QRParams& p = default_qr_params();
    QRSimulator sim(p, RegimeSchedule::constant(p.theta, p.theta_reinit), 100.0, 101);
    const double rate = sim.total_rate();
    std::vector<double> w;
    for (int i = 0; i < 10000; ++i) w.push_back(sim.draw_next_event().wait);
    const double ks_p = ks_test(w, [rate](double x) { return 1.0 - std::exp(-rate * x); }).p_value;

    ZIParams z;
    const double T = 500.0, lambda = (z.lambda_L + z.lambda_C + z.lambda_M) * T;
    const int runs = 200;
    double sum = 0.0;
    for (int r = 0; r < runs; ++r) {
        SimDiagnostics d;
        simulate_zi(z, T, derive_seed(102, r), &d);
        sum += static_cast<double>(d.events);
    }
    const double z_score = (sum / runs - lambda) / std::sqrt(lambda / runs);
    return {ks_p > 0.01 && std::abs(z_score) < 3.0, "KS p=" + fmt_g(ks_p) + ", event-count z=" + fmt_g(z_score)};
}

Outcome ground_truth_agreement() {
    const TrueVariance tv = estimate_true_variance(default_model(), 18000.0, 500, 201);
    bool ok = !tv.below_stabilization;
    std::string d = "sigma2 mid/micro/trade = " + fmt_g(tv.value[0]) + "/" + fmt_g(tv.value[1]) + "/" +
                    fmt_g(tv.value[2]);
    double worst = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
            const double se = std::max(tv.std_error[a], tv.std_error[b]);
            const double k = std::abs(tv.value[a] - tv.value[b]) / se;
            worst = std::max(worst, k);
            ok = ok && k < 3.0;
        }
    return {ok, d + ", max pairwise gap " + fmt_g(worst) + " s.e."};
}

Outcome integrated_estimators() {
    const double sigma2 = 1e-8, omega = 5e-5, H = 23400.0, n = 23400.0;
    ScenarioConfig clean = surrogate(sigma2, 0.0, 500, 301);
    clean.estimators = {"iv.*"};
    ScenarioConfig noisy = surrogate(sigma2, omega, 500, 302);
    noisy.estimators = {"iv.*"};
    const ExperimentReport rc = run_scenario(clean), rn = run_scenario(noisy);

    bool ok = true;
    std::string bad;
    for (const auto& row : rc.rows)
        if (!(std::abs(row.rel_bias) < 0.05) || row.n_failed > 0) {
            ok = false;
            bad += " clean:" + row.estimator_id + "=" + fmt_g(row.rel_bias);
        }
    const double analytic = 2.0 * n * omega * omega / (sigma2 * H);
    double rv_gap = 0.0;
    for (const auto& row : rn.rows) {
        if (row.estimator_id == "iv.rv") {
            const double se = standard_error(row.estimates) / row.truth;
            rv_gap = (row.rel_bias - analytic) / se;
            if (!(std::abs(rv_gap) < 3.0)) {
                ok = false;
                bad += " rv_gap=" + fmt_g(rv_gap);
            }
        } else if (!(std::abs(row.rel_bias) < 0.15) || row.n_failed > 0) {
            ok = false;
            bad += " noisy:" + row.estimator_id + "=" + fmt_g(row.rel_bias);
        }
    }
    return {ok, "rv bias vs analytic " + fmt_g(analytic) + ": " + fmt_g(rv_gap) + " s.e." +
                    (bad.empty() ? "" : ";" + bad)};
}

Outcome spot_estimators() {
    ScenarioConfig c = surrogate(1e-8, 5e-5, 250, 401);
    c.estimators = {"spot.*"};
    const ExperimentReport r = run_scenario(c);
    const EstimatorSummary* f = r.find("spot.fourier", SeriesKind::mid);
    if (!f) return {false, "spot.fourier missing"};
    std::string order;
    for (const auto& rk : r.rankings)
        if (rk.spot && rk.metric == "mse")
            for (const auto& id : rk.order) order += (order.empty() ? "" : " < ") + id;
    bool best = true;
    for (const auto& row : r.rows)
        if (row.spot && row.estimator_id != "spot.fourier" && !(f->rel_mse < row.rel_mse)) best = false;
    return {std::abs(f->rel_bias) < 0.05 && best && f->n_failed == 0,
            "fourier bias " + fmt_g(f->rel_bias) + ", mse " + fmt_g(f->rel_mse) + "; mse order: " + order};
}

double rejection_rate(const std::vector<NoiseTestResult>& v) {
    double k = 0.0;
    for (const auto& r : v) k += r.reject_at_5pct ? 1.0 : 0.0;
    return k / static_cast<double>(v.size());
}

Outcome hausman_characteristics() {
    std::vector<NoiseTestResult> null_runs, alt_runs;
    SurrogateParams clean;
    for (int i = 0; i < 1000; ++i)
        null_runs.push_back(hausman_test(sample_grid(simulate_surrogate(clean, 23400.0, derive_seed(501, i)), 1.0,
                                                     SeriesKind::mid)));
    SurrogateParams noisy;
    noisy.omega = 5e-5;
    for (int i = 0; i < 200; ++i)
        alt_runs.push_back(hausman_test(sample_grid(simulate_surrogate(noisy, 23400.0, derive_seed(502, i)), 1.0,
                                                    SeriesKind::mid)));
    const double size = rejection_rate(null_runs), power = rejection_rate(alt_runs);

    // Majority vote over QR paths at the two ends of the sweep.
    const QRModel m = default_model();
    std::vector<NoiseTestResult> at1, at60;
    for (int i = 0; i < 20; ++i) {
        const auto sweep = frequency_sweep(simulate(m, 23400.0, derive_seed(503, i)), SeriesKind::mid, {1.0, 60.0});
        at1.push_back(sweep[0]);
        at60.push_back(sweep[1]);
    }
    const double r1 = rejection_rate(at1), r60 = rejection_rate(at60);
    const bool ok = size >= 0.02 && size <= 0.09 && power > 0.9 && r1 > 0.5 && r60 < 0.5;
    return {ok, "size " + fmt_g(size) + ", power " + fmt_g(power) + ", QR reject rate 1s " + fmt_g(r1) + " / 60s " +
                    fmt_g(r60)};
}

Outcome gmm_self_calibration() {
    const QRParams& p = default_qr_params();
    GMMSettings target_settings;
    target_settings.seed = 601;
    const MomentFn gen = qr_moment_fn(p, target_settings);
    GMMMoments target;
    const int n_target = 200;
    for (int t = 0; t < n_target; ++t) {
        const GMMMoments m = gen(0.6, 0.85, t);
        target.sigma += m.sigma / n_target;
        target.zeta += m.zeta / n_target;
    }
    GMMSettings s;
    s.T = 50;
    s.seed = 602;
    const GMMResult g = calibrate_theta_gmm(p, target, s);
    const bool ok = std::abs(g.theta - 0.6) <= 0.1 && std::abs(g.theta_reinit - 0.85) <= 0.15;
    return {ok, "theta " + fmt_g(g.theta) + ", theta_reinit " + fmt_g(g.theta_reinit) + " (" +
                    std::to_string(g.evaluations) + " evaluations)"};
}

Outcome execution_variance() {
    const ExecutionSpec spec = ExecutionSpec::vwap(60, 12000, 600);
    SurrogateParams a, b;
    a.sigma2 = {2e-8};
    b.sigma2 = {1e-8};
    a.mesh = b.mesh = 10.0;
    VarianceRatioSettings s;
    s.n_runs = 5000;
    s.spot_estimator = "truth";
    s.seed = 701;
    const VarianceRatioResult r = variance_ratio_experiment(SurrogateModel{a}, SurrogateModel{b}, spec, s);
    const double p0 = b.start_price;
    const double ac = ac_variance(ACModel{b.sigma2[0] * p0 * p0}, spec);
    const double ac_gap = std::abs(r.var_b / ac - 1.0);
    const double ratio_gap = std::abs(r.empirical_ratio / 2.0 - 1.0);

    // Closed form against an explicit quadratic form on random schedules.
    std::mt19937_64 eng(702);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int N = 1 + static_cast<int>(u(eng) * 40);
        ExecutionSpec e;
        e.tau = 1.0 + u(eng) * 100.0;
        e.horizon = e.tau * N;
        e.schedule.resize(N);
        for (double& v : e.schedule) v = u(eng) * 10.0;
        e.total_shares = 0.0;
        for (double v : e.schedule) e.total_shares += v;
        const double sig = 1e-6 + u(eng);
        double quad = 0.0;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) quad += e.schedule[i] * e.schedule[j] * std::min(i + 1, j + 1);
        const double want = sig * e.tau * quad;
        worst = std::max(worst, std::abs(ac_variance(ACModel{sig}, e) / want - 1.0));
        const double vw = ac_variance_vwap_closed_form(sig, e.total_shares, e.tau, N);
        const ExecutionSpec flat = ExecutionSpec::vwap(e.total_shares, e.horizon, e.tau);
        worst = std::max(worst, std::abs(vw / ac_variance(ACModel{sig}, flat) - 1.0));
    }
    const bool ok = ratio_gap < 0.15 && ac_gap < 0.10 && worst < 1e-12;
    return {ok, "ratio " + fmt_g(r.empirical_ratio) + ", var_b/ac " + fmt_g(r.var_b / ac) +
                    ", closed-form rel err " + fmt_g(worst)};
}

// Reference values from the calibrated setting cannot be reproduced here; they
// are printed next to ours and only the report format is checked.
Outcome format_anchors() {
    ScenarioConfig c;
    c.model = default_model();
    c.n_paths = 2;
    c.truth = TruthSource::simulated;
    c.truth_m = 1800.0;
    c.truth_sims = 10;
    c.seed = 801;
    const ExperimentReport r = run_scenario(c);
    const std::string tables = render_ranking_tables(r);
    std::ostringstream summary;
    write_summary_csv(r, summary);
    bool ok = summary.str().rfind("estimator,series,type,n_ok,n_failed,truth,mean_estimate,rel_bias,rel_mse\n", 0) == 0;
    for (const char* title : {"Integrated variance estimators - relative bias", "Spot variance estimators - relative integrated MSE"})
        ok = ok && tables.find(title) != std::string::npos;
    for (const char* series : {"mid", "micro", "trade"}) ok = ok && tables.find(series) != std::string::npos;
    int ranked = 0;
    for (const auto& rk : r.rankings) ranked += static_cast<int>(rk.order.size());
    ok = ok && ranked == 2 * 3 * (10 + 6);

    struct Anchor {
        const char* id;
        const char* what;
        double reference;
    };
    const Anchor anchors[] = {{"spot.fourier", "mid relative integrated bias", 0.00362},
                              {"spot.fourier", "mid relative integrated MSE", 0.03095},
                              {"spot.two_scale", "mid relative integrated bias", -0.24781}};
    for (const auto& a : anchors) {
        const EstimatorSummary* row = r.find(a.id, SeriesKind::mid);
        const double ours = !row ? NAN : (std::string(a.what).find("MSE") != std::string::npos ? row->rel_mse : row->rel_bias);
        std::printf("  anchor %-15s %-30s reference %9.5f  this run %9.5f\n", a.id, a.what, a.reference, ours);
    }
    std::printf("  anchor vwap variance ratio (0.6,0.85) vs (0.4,0.6): empirical 1.397, fourier 1.235, two-scale 1.030\n");
    return {ok, "report layout checks; reference values are not reproducible and not asserted"};
}

std::vector<char> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
    const fs::path work = fs::temp_directory_path() / "qrvol_acceptance_determinism";
    fs::remove_all(work);
    const std::string config = std::string(QRVOL_SOURCE_DIR) + "/configs/determinism.json";
    for (const char* run : {"a", "b"}) {
        const std::string cmd = std::string("\"") + QRVOL_CLI_PATH + "\" rank --config \"" + config + "\" --out \"" +
                                (work / run).string() + "\" > /dev/null";
        if (std::system(cmd.c_str()) != 0) return {false, "cli run failed: " + cmd};
    }
    int files = 0;
    for (const auto& e : fs::directory_iterator(work / "a")) {
        const fs::path other = work / "b" / e.path().filename();
        if (!fs::exists(other) || slurp(e.path()) != slurp(other))
            return {false, "differs: " + e.path().filename().string()};
        ++files;
    }
    fs::remove_all(work);
    return {files > 0, std::to_string(files) + " output files byte-identical"};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, 60, simulator_oracles},          {2, 600, ground_truth_agreement}, {3, 900, integrated_estimators},
        {4, 1200, spot_estimators},          {5, 600, hausman_characteristics}, {6, 1800, gmm_self_calibration},
        {7, 600, execution_variance},        {8, 600, format_anchors},          {9, 600, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& ex) {
            o = {false, std::string("exception: ") + ex.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.limit_s) {
            o.pass = false;
            o.detail += "; over time limit";
        }
        failed += o.pass ? 0 : 1;
        std::printf("criterion %d: %s  %s  [%.1fs of %.0fs]\n", c.id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
                    c.limit_s);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
