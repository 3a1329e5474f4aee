#include "qrvol/sim_engine.hpp"

#include <cmath>
#include <stdexcept>

namespace qrvol {

RegimeSchedule RegimeSchedule::constant(double theta, double theta_reinit) {
    RegimeSchedule s;
    s.intervals.push_back({0.0, 1.0, theta, theta_reinit});
    return s;
}

RegimeSchedule RegimeSchedule::five_regimes() {
    const double pairs[5][2] = {{0.7, 0.6}, {0.4, 0.6}, {0.6, 0.85}, {0.4, 0.9}, {0.8, 0.9}};
    RegimeSchedule s;
    for (int k = 0; k < 5; ++k) s.intervals.push_back({k / 5.0, (k + 1) / 5.0, pairs[k][0], pairs[k][1]});
    s.intervals.back().end = 1.0;
    return s;
}

void RegimeSchedule::validate() const {
    if (intervals.empty()) throw std::invalid_argument("RegimeSchedule: no intervals");
    double prev = 0.0;
    for (const auto& iv : intervals) {
        if (std::abs(iv.start - prev) > 1e-12 || !(iv.end > iv.start))
            throw std::invalid_argument("RegimeSchedule: intervals must partition [0,1]");
        if (iv.theta < 0 || iv.theta > 1 || iv.theta_reinit < 0 || iv.theta_reinit > 1)
            throw std::invalid_argument("RegimeSchedule: probabilities must lie in [0,1]");
        prev = iv.end;
    }
    if (std::abs(prev - 1.0) > 1e-12) throw std::invalid_argument("RegimeSchedule: intervals must end at 1");
}

TickPath simulate(const ModelSpec& model, double horizon, uint64_t seed) {
    return std::visit(
        [&](const auto& m) -> TickPath {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ZIModel>) return simulate_zi(m.params, horizon, seed);
            else if constexpr (std::is_same_v<T, QRModel>) return simulate_qr(m.params, m.schedule, horizon, seed);
            else return simulate_surrogate(m.params, horizon, seed);
        },
        model);
}

std::string model_name(const ModelSpec& model) {
    switch (model.index()) {
        case 0: return "zi";
        case 1: return "qr";
        default: return "surrogate";
    }
}

}  // namespace qrvol
