#pragma once

#include "qrvol/iv_estimators.hpp"
#include "qrvol/spot_estimators.hpp"

#include <functional>
#include <string>
#include <vector>

namespace qrvol {

using IVFn = std::function<IVEstimate(const LogPriceGrid&, const TuningInputs&, const EstimatorParams&)>;
using SpotFn = std::function<SpotPath(const LogPriceGrid&, const std::vector<double>&, const TuningInputs&,
                                      const EstimatorParams&)>;

struct IVEntry {
    std::string id;
    std::string label;
    IVFn fn;
};

struct SpotEntry {
    std::string id;
    std::string label;
    SpotFn fn;
};

const std::vector<IVEntry>& iv_registry();
const std::vector<SpotEntry>& spot_registry();

const IVEntry* find_iv(const std::string& id);
const SpotEntry* find_spot(const std::string& id);

// Matches '*' and '?' wildcards.
bool glob_match(const std::string& pattern, const std::string& text);

// Expands patterns against all registered ids, in registry order, without
// duplicates.  Throws if a pattern matches nothing.
std::vector<std::string> resolve_estimator_ids(const std::vector<std::string>& patterns);

bool is_spot_id(const std::string& id);

}  // namespace qrvol
