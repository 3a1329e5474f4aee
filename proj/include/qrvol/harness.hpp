#pragma once

#include "qrvol/execution.hpp"
#include "qrvol/iv_estimators.hpp"
#include "qrvol/sim_engine.hpp"
#include "qrvol/spot_estimators.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qrvol {

enum class TruthSource { closed_form, simulated, given };

std::string to_string(TruthSource s);
TruthSource truth_source_from_string(const std::string& s);

struct ScenarioConfig {
    std::string name = "scenario";
    ModelSpec model = SurrogateModel{};
    int n_paths = 250;
    double horizon = 23400.0;
    double mesh = 1.0;
    std::vector<SeriesKind> series = {SeriesKind::mid, SeriesKind::micro, SeriesKind::trade};
    std::vector<std::string> estimators = {"iv.*", "spot.*"};
    TruthSource truth = TruthSource::closed_form;
    double truth_m = 18000.0;
    int truth_sims = 500;
    // For TruthSource::given: one {mid, micro, trade} triple per regime.
    std::vector<std::array<double, 3>> truth_values;
    int n_t = 390;
    uint64_t seed = 1;
    TuningOptions tuning;
    std::map<std::string, EstimatorParams> overrides;
    bool keep_spot_paths = false;

    void validate() const;
};

// Piecewise-constant variance per second, per series.
struct Truth {
    std::vector<double> boundaries = {0.0, 1.0};  // fractions, size = regimes + 1
    std::vector<std::array<double, 3>> sigma2;
    std::vector<std::array<double, 3>> std_error;

    double sigma2_at(SeriesKind kind, double frac) const;
    double integrated(SeriesKind kind, double horizon) const;
    SpotPath spot(SeriesKind kind, const std::vector<double>& times, double horizon) const;
};

Truth resolve_truth(const ScenarioConfig& cfg);

struct EstimatorSummary {
    std::string estimator_id;
    SeriesKind series = SeriesKind::mid;
    bool spot = false;
    int n_ok = 0;
    int n_failed = 0;
    double rel_bias = 0.0;
    double rel_mse = 0.0;
    double mean_estimate = 0.0;
    double truth = 0.0;            // integrated truth; day-average truth for spot
    std::vector<double> estimates;  // per successful path; day-average for spot
    std::vector<int> path_index;
    std::vector<std::string> failures;
    std::optional<SpotPath> sample_path;  // first successful path when kept
};

struct Ranking {
    SeriesKind series = SeriesKind::mid;
    bool spot = false;
    std::string metric;  // "bias" or "mse"
    std::vector<std::string> order;
    std::vector<double> values;
};

struct ExperimentReport {
    std::string name;
    std::string model;
    int n_paths = 0;
    double horizon = 0.0;
    double mesh = 0.0;
    uint64_t seed = 0;
    Truth truth;
    std::vector<EstimatorSummary> rows;
    std::vector<Ranking> rankings;
    double average_spread = 0.0;
    std::vector<std::string> warnings;

    const EstimatorSummary* find(const std::string& id, SeriesKind kind) const;
};

ExperimentReport run_scenario(const ScenarioConfig& cfg);
// Same, reusing an already resolved truth.
ExperimentReport run_scenario(const ScenarioConfig& cfg, const Truth& truth);

std::vector<Ranking> compute_rankings(const std::vector<EstimatorSummary>& rows);

struct PValueMatrix {
    SeriesKind series = SeriesKind::mid;
    bool spot = false;
    std::vector<std::string> ids;
    std::vector<std::vector<double>> p;
};

std::vector<PValueMatrix> pairwise_ttests(const ExperimentReport& report);

ScenarioConfig five_regime_scenario();

double spread_statistics(const TickPath& path);
double spread_statistics(const std::vector<TickPath>& paths);

}  // namespace qrvol
