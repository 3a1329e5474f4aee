#pragma once

#include "qrvol/calibration.hpp"
#include "qrvol/execution.hpp"
#include "qrvol/harness.hpp"
#include "qrvol/noise_test.hpp"

#include <ostream>
#include <string>

namespace qrvol {

// Locale-independent, round-trippable number formatting.
std::string fmt(double v);

void write_summary_csv(const ExperimentReport& r, std::ostream& os);
void write_rankings_csv(const ExperimentReport& r, std::ostream& os);
void write_ttests_csv(const std::vector<PValueMatrix>& m, std::ostream& os);
void write_estimates_csv(const ExperimentReport& r, std::ostream& os);
void write_spot_paths_csv(const ExperimentReport& r, std::ostream& os);
void write_truth_csv(const Truth& t, std::ostream& os);
// Rankings laid out as one column block per series, best first.
std::string render_ranking_tables(const ExperimentReport& r);

void write_noise_csv(const std::vector<std::string>& labels, const std::vector<std::vector<NoiseTestResult>>& rows,
                     std::ostream& os);
void write_gmm_csv(const GMMResult& g, std::ostream& os);
void write_vwap_csv(const VarianceRatioResult& v, std::ostream& os);
void write_shortfalls_csv(const VarianceRatioResult& v, std::ostream& os);
void write_tickpath_csv(const TickPath& p, std::ostream& os);
void write_grid_csv(const LogPriceGrid& g, std::ostream& os);
void write_spot_path_csv(const SpotPath& s, std::ostream& os);

}  // namespace qrvol
