#include "qrvol/sim_engine.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace qrvol {

namespace {

struct ZIBook {
    std::map<int64_t, int> bids;  // price ticks -> volume
    std::map<int64_t, int> asks;
    int64_t last_bid = 0;
    int64_t last_ask = 0;

    int64_t best_bid() const { return bids.rbegin()->first; }
    int64_t best_ask() const { return asks.begin()->first; }
};

void emit_quote(const ZIBook& b, double t, double tick, TickPath& path) {
    PriceQuote q;
    q.best_bid = static_cast<double>(b.best_bid()) * tick;
    q.best_ask = static_cast<double>(b.best_ask()) * tick;
    q.bid_vol = b.bids.rbegin()->second;
    q.ask_vol = b.asks.begin()->second;
    q.timestamp = t;
    if (!path.quotes.empty()) {
        const auto& l = path.quotes.back();
        if (l.best_bid == q.best_bid && l.best_ask == q.best_ask && l.bid_vol == q.bid_vol && l.ask_vol == q.ask_vol)
            return;
    }
    path.quotes.push_back(q);
}

}  // namespace

TickPath simulate_zi(const ZIParams& p, double horizon, uint64_t seed, SimDiagnostics* diag) {
    if (!(horizon > 0.0)) throw std::invalid_argument("simulate_zi: horizon must be > 0");
    if (p.lambda_L < 0 || p.lambda_C < 0 || p.lambda_M < 0) throw std::invalid_argument("simulate_zi: negative rate");
    const double total = p.lambda_L + p.lambda_C + p.lambda_M;
    if (!(total > 0.0)) throw std::invalid_argument("simulate_zi: all rates zero");
    if (p.K < 1) throw std::invalid_argument("simulate_zi: K must be >= 1");

    Rng rng(seed);
    SimDiagnostics d;
    TickPath path;
    path.horizon = horizon;
    path.tick_size = p.tick_size;

    ZIBook b;
    const int64_t start = std::llround(p.start_price / p.tick_size);
    for (int i = 0; i < p.K; ++i) {
        b.asks[start + i] = p.initial_depth;
        b.bids[start - 1 - i] = p.initial_depth;
    }
    b.last_bid = b.best_bid();
    b.last_ask = b.best_ask();
    emit_quote(b, 0.0, p.tick_size, path);

    double t = 0.0;
    while (true) {
        t += rng.exponential(total);
        if (t > horizon) break;
        ++d.events;
        const double u = rng.uniform() * total;
        const bool buy_side = rng.uniform() < 0.5;
        const int i = 1 + static_cast<int>(rng.uniform() * p.K);
        if (u < p.lambda_L) {
            if (buy_side) b.bids[b.best_ask() - i] += 1;
            else b.asks[b.best_bid() + i] += 1;
        } else if (u < p.lambda_L + p.lambda_C) {
            auto& side = buy_side ? b.bids : b.asks;
            const int64_t px = buy_side ? b.best_bid() - (i - 1) : b.best_ask() + (i - 1);
            auto it = side.find(px);
            if (it != side.end() && --(it->second) == 0) side.erase(it);
        } else {
            // A buy market order consumes the best ask.
            auto& side = buy_side ? b.asks : b.bids;
            auto it = buy_side ? side.begin() : std::prev(side.end());
            const int64_t px = it->first;
            if (--(it->second) == 0) side.erase(it);
            path.trades.push_back({t, static_cast<double>(px) * p.tick_size, 1.0});
        }
        if (b.bids.empty()) {
            b.bids[b.last_bid] = p.initial_depth;
            ++d.side_refills;
        }
        if (b.asks.empty()) {
            b.asks[b.last_ask] = p.initial_depth;
            ++d.side_refills;
        }
        b.last_bid = b.best_bid();
        b.last_ask = b.best_ask();
        emit_quote(b, t, p.tick_size, path);
    }
    if (diag) *diag = d;
    return path;
}

}  // namespace qrvol
