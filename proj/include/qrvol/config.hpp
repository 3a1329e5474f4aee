#pragma once

#include "qrvol/calibration.hpp"
#include "qrvol/execution.hpp"
#include "qrvol/harness.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace qrvol {

using Json = nlohmann::json;

Json load_json(const std::filesystem::path& file);

// Relative file names inside a config are resolved against base_dir.
ModelSpec parse_model(const Json& j, const std::filesystem::path& base_dir = {});
ScenarioConfig parse_scenario(const Json& j, const std::filesystem::path& base_dir = {});
ExecutionSpec parse_execution(const Json& j);
GMMSettings parse_gmm(const Json& j);
EstimatorParams parse_estimator_params(const Json& j);
std::vector<SeriesKind> parse_series(const Json& j);

ScenarioConfig load_scenario(const std::filesystem::path& file);
ModelSpec load_model(const std::filesystem::path& file);

}  // namespace qrvol
