#include "qrvol/calibration.hpp"
#include "qrvol/config.hpp"
#include "qrvol/data_io.hpp"
#include "qrvol/execution.hpp"
#include "qrvol/harness.hpp"
#include "qrvol/noise_test.hpp"
#include "qrvol/parallel.hpp"
#include "qrvol/registry.hpp"
#include "qrvol/report.hpp"
#include "qrvol/rng.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace qrvol;
namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    return os;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
    return out;
}

struct Common {
    std::string config;
    std::string out = "out";
    std::optional<uint64_t> seed;
    std::optional<int> paths;
};

ScenarioConfig scenario_from(const Common& c) {
    ScenarioConfig cfg = c.config.empty() ? ScenarioConfig{} : load_scenario(c.config);
    if (c.seed) cfg.seed = *c.seed;
    if (c.paths) cfg.n_paths = *c.paths;
    cfg.validate();
    return cfg;
}

int cmd_simulate(const Common& c, std::optional<double> mesh, const std::string& series) {
    const ScenarioConfig cfg = scenario_from(c);
    const fs::path dir(c.out);
    for (int i = 0; i < cfg.n_paths; ++i) {
        const TickPath path = simulate(cfg.model, cfg.horizon, derive_seed(cfg.seed, static_cast<uint64_t>(i)));
        const std::string stem = "path_" + std::to_string(i);
        if (mesh) {
            auto os = open_out(dir, stem + "_" + series + ".csv");
            write_grid_csv(sample_grid(path, *mesh, series_kind_from_string(series)), os);
        } else {
            auto os = open_out(dir, stem + ".csv");
            write_tickpath_csv(path, os);
        }
    }
    std::cout << "wrote " << cfg.n_paths << " paths to " << dir.string() << '\n';
    return 0;
}

int cmd_estimate(const Common& c, const std::vector<std::string>& patterns) {
    ScenarioConfig cfg = scenario_from(c);
    if (!patterns.empty()) cfg.estimators = patterns;
    const auto ids = resolve_estimator_ids(cfg.estimators);
    const auto out_grid = spot_output_grid(cfg.horizon, cfg.n_t);
    const TickPath path = simulate(cfg.model, cfg.horizon, derive_seed(cfg.seed, 0));
    auto est = open_out(c.out, "estimates.csv");
    auto spots = open_out(c.out, "spot_paths.csv");
    est << "estimator,series,value,flags\n";
    spots << "estimator,series,time,value,edge\n";
    for (SeriesKind kind : cfg.series) {
        const LogPriceGrid g = sample_grid(path, cfg.mesh, kind);
        const TuningInputs t = feasible_tuning(g, cfg.tuning);
        for (const auto& id : ids) {
            const auto ov = cfg.overrides.count(id) ? cfg.overrides.at(id) : EstimatorParams{};
            try {
                if (const auto* sp = find_spot(id)) {
                    const SpotPath s = sp->fn(g, out_grid, t, ov);
                    est << id << ',' << to_string(kind) << ',' << fmt(s.day_average()) << ',' << s.flags.size() << '\n';
                    for (size_t j = 0; j < s.times.size(); ++j)
                        spots << id << ',' << to_string(kind) << ',' << fmt(s.times[j]) << ',' << fmt(s.values[j])
                              << ',' << (s.edge[j] ? 1 : 0) << '\n';
                } else {
                    const IVEstimate e = find_iv(id)->fn(g, t, ov);
                    est << id << ',' << to_string(kind) << ',' << fmt(e.value) << ',' << e.flags.size() << '\n';
                }
            } catch (const std::exception& ex) {
                est << id << ',' << to_string(kind) << ",nan,error\n";
                std::cerr << id << "/" << to_string(kind) << ": " << ex.what() << '\n';
            }
        }
    }
    std::cout << "wrote estimates to " << c.out << '\n';
    return 0;
}

int cmd_rank(const Common& c, bool dump_paths, bool full_scale) {
    ScenarioConfig cfg = scenario_from(c);
    if (full_scale && !c.paths) cfg.n_paths = 2500;
    if (dump_paths) cfg.keep_spot_paths = true;
    const ExperimentReport rep = run_scenario(cfg);
    const fs::path dir(c.out);
    {
        auto os = open_out(dir, "summary.csv");
        write_summary_csv(rep, os);
    }
    {
        auto os = open_out(dir, "rankings.csv");
        write_rankings_csv(rep, os);
    }
    {
        auto os = open_out(dir, "ttests.csv");
        write_ttests_csv(pairwise_ttests(rep), os);
    }
    {
        auto os = open_out(dir, "estimates.csv");
        write_estimates_csv(rep, os);
    }
    {
        auto os = open_out(dir, "truth.csv");
        write_truth_csv(rep.truth, os);
    }
    if (cfg.keep_spot_paths) {
        auto os = open_out(dir, "spot_paths.csv");
        write_spot_paths_csv(rep, os);
    }
    const std::string tables = render_ranking_tables(rep);
    {
        auto os = open_out(dir, "tables.txt");
        os << tables << "average spread (ticks): " << fmt(rep.average_spread) << '\n';
        for (const auto& w : rep.warnings) os << "warning: " << w << '\n';
    }
    std::cout << tables;
    return 0;
}

int cmd_noisetest(const Common& c, const std::string& freqs) {
    const ScenarioConfig cfg = scenario_from(c);
    const auto f = parse_list(freqs);
    std::vector<std::vector<std::vector<NoiseTestResult>>> per_path(static_cast<size_t>(cfg.n_paths));
    parallel_for(per_path.size(), [&](size_t i) {
        const TickPath path = simulate(cfg.model, cfg.horizon, derive_seed(cfg.seed, i));
        for (SeriesKind k : cfg.series) per_path[i].push_back(frequency_sweep(path, k, f));
    });
    std::vector<std::string> labels;
    for (SeriesKind k : cfg.series) labels.push_back(to_string(k));
    {
        auto os = open_out(c.out, "noise_tests.csv");
        os << "path,";
        std::ostringstream tmp;
        write_noise_csv(labels, per_path.front(), tmp);
        os << tmp.str().substr(0, tmp.str().find('\n')) << '\n';
        for (size_t i = 0; i < per_path.size(); ++i) {
            std::ostringstream body;
            write_noise_csv(labels, per_path[i], body);
            std::string line;
            std::istringstream in(body.str());
            std::getline(in, line);
            while (std::getline(in, line)) os << i << ',' << line << '\n';
        }
    }
    // Majority vote across paths.
    std::vector<std::vector<NoiseTestResult>> summary = per_path.front();
    auto os = open_out(c.out, "rejection_rates.csv");
    os << "series,frequency,rejection_rate\n";
    for (size_t s = 0; s < labels.size(); ++s)
        for (size_t j = 0; j < f.size(); ++j) {
            int rej = 0;
            for (const auto& p : per_path) rej += p[s][j].reject_at_5pct;
            const double rate = static_cast<double>(rej) / static_cast<double>(per_path.size());
            summary[s][j].reject_at_5pct = rate >= 0.5;
            os << labels[s] << ',' << fmt(f[j]) << ',' << fmt(rate) << '\n';
        }
    const std::string table = render_noise_table(labels, summary);
    auto ts = open_out(c.out, "noise_table.txt");
    ts << table;
    std::cout << table;
    return 0;
}

int cmd_vwap(const std::string& a, const std::string& b, const std::string& exec_cfg, const std::string& estimator,
             int runs, int est_paths, uint64_t seed, const std::string& out) {
    const ModelSpec ma = load_model(a), mb = load_model(b);
    ExecutionSpec spec = ExecutionSpec::vwap(60.0, 12000.0, 600.0);
    if (!exec_cfg.empty()) {
        const Json j = load_json(exec_cfg);
        spec = parse_execution(j.contains("execution") ? j.at("execution") : j);
    }
    VarianceRatioSettings s;
    s.n_runs = runs;
    s.spot_estimator = estimator;
    s.estimation_paths = est_paths;
    s.seed = seed;
    const VarianceRatioResult r = variance_ratio_experiment(ma, mb, spec, s);
    {
        auto os = open_out(out, "vwap_ratio.csv");
        write_vwap_csv(r, os);
    }
    {
        auto os = open_out(out, "shortfalls.csv");
        write_shortfalls_csv(r, os);
    }
    std::cout << "empirical ratio " << fmt(r.empirical_ratio) << ", predicted (" << estimator << ") "
              << fmt(r.predicted_ratio) << '\n';
    return 0;
}

int cmd_calibrate(const Common& c, GMMSettings g, std::optional<double> target_sigma, std::optional<double> target_zeta,
                  const std::string& messages, const std::string& book, int levels, int target_paths) {
    const fs::path dir(c.out);
    if (c.seed) g.seed = *c.seed;
    QRParams model = default_qr_params();
    GMMMoments targets;
    if (!messages.empty()) {
        const LobsterSession sess = trim_session(load_lobster(messages, book, levels));
        const EventConversion conv = to_event_records(sess, model.K);
        const IntensityEstimate est = estimate_qr_intensities(conv.events);
        {
            auto os = open_out(dir, "intensities.csv");
            write_intensity_csv(est.table, os);
        }
        model.intensities = est.table;
        model.invariant_dist = estimate_invariant_distribution(model, 1000.0, 200000.0, g.seed);
        const TickPath path = session_to_tickpath(sess);
        targets = grid_moments(sample_grid(path, 1.0, SeriesKind::mid));
    } else if (!c.config.empty()) {
        const ModelSpec spec = load_model(c.config);
        const auto* qr = std::get_if<QRModel>(&spec);
        if (!qr) throw std::invalid_argument("calibrate: config must describe a QR model");
        model = qr->params;
        // Targets from the configured model itself, on streams disjoint from the GMM ones.
        const MomentFn fn = qr_moment_fn(model, GMMSettings{g.T, g.horizon, g.grid_step, derive_seed(g.seed, 99)});
        double s = 0.0, z = 0.0;
        for (int t = 0; t < target_paths; ++t) {
            const GMMMoments m = fn(model.theta, model.theta_reinit, t);
            s += m.sigma;
            z += m.zeta;
        }
        targets = {s / target_paths, z / target_paths};
    }
    if (target_sigma) targets.sigma = *target_sigma;
    if (target_zeta) targets.zeta = *target_zeta;
    const GMMResult res = calibrate_theta_gmm(model, targets, g);
    {
        auto os = open_out(dir, "gmm.csv");
        os << "quantity,value\ntarget_sigma," << fmt(targets.sigma) << "\ntarget_zeta," << fmt(targets.zeta) << '\n';
        std::ostringstream body;
        write_gmm_csv(res, body);
        os << body.str().substr(body.str().find('\n') + 1);
    }
    std::cout << "theta " << fmt(res.theta) << ", theta_reinit " << fmt(res.theta_reinit) << '\n';
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
    return 0;
}

int cmd_ingest(const std::string& messages, const std::string& book, int levels, bool no_trim, int K,
               const std::string& out) {
    LobsterSession s = load_lobster(messages, book, levels);
    for (const auto& r : s.rejected) std::cerr << "rejected line " << r.line << ": " << r.reason << '\n';
    if (!no_trim) s = trim_session(s);
    const EventConversion conv = to_event_records(s, K);
    {
        auto os = open_out(out, "events.csv");
        os << "time,level,kind,size,own_q,opp_q,best_empty\n";
        for (const auto& e : conv.events)
            os << fmt(e.timestamp) << ',' << e.level << ',' << to_string(e.kind) << ',' << e.size << ',' << e.own_q
               << ',' << e.opp_q << ',' << (e.best_empty ? 1 : 0) << '\n';
    }
    {
        auto os = open_out(out, "tickpath.csv");
        write_tickpath_csv(session_to_tickpath(s), os);
    }
    {
        auto os = open_out(out, "ingest_summary.csv");
        os << "quantity,value\nmessages," << s.messages.size() << "\nevents," << conv.events.size()
           << "\nunit_size," << fmt(conv.unit_size) << "\nskipped_hidden," << conv.skipped_hidden
           << "\nskipped_unmapped," << conv.skipped_unmapped << "\nskipped_outside," << conv.skipped_outside
           << "\nskipped_no_state," << conv.skipped_no_state << "\nrejected_rows," << s.rejected.size() << '\n';
    }
    std::cout << conv.events.size() << " events written to " << out << '\n';
    return 0;
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "Scenario config (JSON)");
    app->add_option("--out", c.out, "Output directory");
    app->add_option("--seed", c.seed, "Override the config seed");
    app->add_option("--paths", c.paths, "Override the number of paths");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Order-book simulation and volatility estimation laboratory"};
    app.require_subcommand(1);

    Common sim_c, est_c, rank_c, noise_c, cal_c;
    std::optional<double> sim_mesh;
    std::string sim_series = "mid";
    auto* sim = app.add_subcommand("simulate", "Simulate paths from a model");
    add_common(sim, sim_c);
    sim->add_option("--mesh", sim_mesh, "Write sampled log-price grids with this mesh instead of tick paths");
    sim->add_option("--series", sim_series, "mid, micro or trade");

    std::vector<std::string> est_ids;
    auto* est = app.add_subcommand("estimate", "Run estimators on one simulated path");
    add_common(est, est_c);
    est->add_option("--estimators", est_ids, "Estimator ids or globs");

    bool dump = false;
    auto* rank = app.add_subcommand("rank", "Monte Carlo ranking of estimators");
    add_common(rank, rank_c);
    rank->add_flag("--dump-paths", dump, "Write one sample spot path per estimator and series");
    bool full_scale = false;
    rank->add_flag("--full-scale", full_scale, "Use 2500 paths unless --paths is given");

    std::string freqs = "1,2,5,10,15,30,60";
    auto* noise = app.add_subcommand("noisetest", "Hausman noise test across sampling frequencies");
    add_common(noise, noise_c);
    noise->add_option("--frequencies", freqs, "Comma-separated sampling intervals in seconds");

    std::string va, vb, vexec, vest = "spot.fourier", vout = "out";
    int vruns = 100, vest_paths = 20;
    uint64_t vseed = 1;
    auto* vwap = app.add_subcommand("vwap-experiment", "VWAP shortfall variance ratio between two models");
    vwap->add_option("--model-a", va, "Model config A")->required();
    vwap->add_option("--model-b", vb, "Model config B")->required();
    vwap->add_option("--execution", vexec, "Execution config (JSON)");
    vwap->add_option("--estimator", vest, "Spot estimator id, or 'truth' for surrogates");
    vwap->add_option("--runs", vruns, "Executions per model");
    vwap->add_option("--estimation-paths", vest_paths, "Paths per model for the variance prediction");
    vwap->add_option("--seed", vseed, "Seed");
    vwap->add_option("--out", vout, "Output directory");

    GMMSettings gmm;
    std::optional<double> tsig, tzeta;
    std::string cal_msg, cal_book;
    int cal_levels = 5, cal_target_paths = 200;
    auto* cal = app.add_subcommand("calibrate", "Two-step GMM calibration of theta and theta_reinit");
    add_common(cal, cal_c);
    cal->add_option("--T", gmm.T, "Simulations per moment evaluation");
    cal->add_option("--grid-step", gmm.grid_step, "Grid step of the initial search");
    cal->add_option("--horizon", gmm.horizon, "Simulated seconds per moment evaluation");
    cal->add_option("--target-sigma", tsig, "Target return standard deviation (1-second grid)");
    cal->add_option("--target-zeta", tzeta, "Target mean-reversion ratio");
    cal->add_option("--target-paths", cal_target_paths, "Paths used to compute targets from a model config");
    cal->add_option("--messages", cal_msg, "LOBSTER message file");
    cal->add_option("--book", cal_book, "LOBSTER orderbook file");
    cal->add_option("--levels", cal_levels, "Levels in the orderbook file");

    std::string in_msg, in_book, in_out = "out";
    int in_levels = 5, in_K = 2;
    bool no_trim = false;
    auto* ing = app.add_subcommand("ingest", "Convert LOBSTER files to event records and quotes");
    ing->add_option("--messages", in_msg, "LOBSTER message file")->required();
    ing->add_option("--book", in_book, "LOBSTER orderbook file")->required();
    ing->add_option("--levels", in_levels, "Levels in the orderbook file");
    ing->add_option("--K", in_K, "Levels per side kept in event records");
    ing->add_flag("--no-trim", no_trim, "Keep the first hour and last 30 minutes");
    ing->add_option("--out", in_out, "Output directory");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*sim) return cmd_simulate(sim_c, sim_mesh, sim_series);
        if (*est) return cmd_estimate(est_c, est_ids);
        if (*rank) return cmd_rank(rank_c, dump, full_scale);
        if (*noise) return cmd_noisetest(noise_c, freqs);
        if (*vwap) return cmd_vwap(va, vb, vexec, vest, vruns, vest_paths, vseed, vout);
        if (*cal) {
            if (!cal_msg.empty() && cal_book.empty()) throw std::invalid_argument("--messages needs --book");
            return cmd_calibrate(cal_c, gmm, tsig, tzeta, cal_msg, cal_book, cal_levels, cal_target_paths);
        }
        if (*ing) return cmd_ingest(in_msg, in_book, in_levels, no_trim, in_K, in_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
