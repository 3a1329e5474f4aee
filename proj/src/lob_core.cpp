#include "qrvol/lob_core.hpp"

#include <cmath>
#include <stdexcept>

namespace qrvol {

std::string to_string(SeriesKind kind) {
    switch (kind) {
        case SeriesKind::mid: return "mid";
        case SeriesKind::micro: return "micro";
        case SeriesKind::trade: return "trade";
    }
    return "mid";
}

SeriesKind series_kind_from_string(const std::string& s) {
    if (s == "mid") return SeriesKind::mid;
    if (s == "micro") return SeriesKind::micro;
    if (s == "trade") return SeriesKind::trade;
    throw std::invalid_argument("unknown series kind: " + s);
}

OrderBookState::OrderBookState(int K, int64_t ref_price, double tick_size)
    : K_(K), ref_price_(ref_price), tick_size_(tick_size), queues_(2 * K, 0) {
    if (K < 1) throw std::invalid_argument("OrderBookState: K must be >= 1");
    if (!(tick_size > 0.0)) throw std::invalid_argument("OrderBookState: tick_size must be > 0");
}

int OrderBookState::index_of(int level, int K) {
    if (level >= 1 && level <= K) return K + level - 1;
    if (level <= -1 && level >= -K) return K + level;
    throw std::out_of_range("OrderBookState: level out of range");
}

void OrderBookState::set_queue(int level, int volume) {
    if (volume < 0) throw std::invalid_argument("OrderBookState: negative volume");
    queues_[index(level)] = volume;
}

void OrderBookState::add(int level, int delta) {
    int& q = queues_[index(level)];
    if (q + delta < 0) throw std::logic_error("OrderBookState: queue would become negative");
    q += delta;
}

int OrderBookState::best_bid_level() const {
    for (int i = 1; i <= K_; ++i)
        if (queues_[K_ - i] > 0) return -i;
    return 0;
}

int OrderBookState::best_ask_level() const {
    for (int i = 1; i <= K_; ++i)
        if (queues_[K_ + i - 1] > 0) return i;
    return 0;
}

int64_t OrderBookState::level_price_ticks(int level) const {
    if (level > 0) return ref_price_ + level - 1;
    if (level < 0) return ref_price_ + level;
    throw std::logic_error("OrderBookState: price of an empty side");
}

void OrderBookState::shift(int direction) {
    // Slot order is bid -K..-1 then ask 1..K, i.e. ascending price.
    const int n = 2 * K_;
    if (direction > 0) {
        for (int j = 0; j + 1 < n; ++j) queues_[j] = queues_[j + 1];
        queues_[n - 1] = 0;
        ref_price_ += 1;
    } else if (direction < 0) {
        for (int j = n - 1; j > 0; --j) queues_[j] = queues_[j - 1];
        queues_[0] = 0;
        ref_price_ -= 1;
    }
}

std::vector<double> LogPriceGrid::returns() const {
    std::vector<double> r;
    if (values.size() < 2) return r;
    r.resize(values.size() - 1);
    for (size_t i = 1; i < values.size(); ++i) r[i - 1] = values[i] - values[i - 1];
    return r;
}

double mid_price(const PriceQuote& q) { return 0.5 * (q.best_bid + q.best_ask); }

double micro_price(const PriceQuote& q) {
    const double tot = q.bid_vol + q.ask_vol;
    if (!(tot > 0.0)) throw std::invalid_argument("micro_price: zero total volume");
    return (q.best_bid * q.ask_vol + q.best_ask * q.bid_vol) / tot;
}

namespace {

struct Obs {
    double t;
    double price;
};

std::vector<Obs> observations(const TickPath& path, SeriesKind kind) {
    std::vector<Obs> obs;
    if (kind == SeriesKind::trade) {
        obs.reserve(path.trades.size());
        for (const auto& tr : path.trades) obs.push_back({tr.timestamp, tr.price});
    } else {
        obs.reserve(path.quotes.size());
        for (const auto& q : path.quotes)
            obs.push_back({q.timestamp, kind == SeriesKind::mid ? mid_price(q) : micro_price(q)});
    }
    return obs;
}

}  // namespace

LogPriceGrid sample_grid(const TickPath& path, double mesh, SeriesKind kind) {
    if (!(mesh > 0.0)) throw std::invalid_argument("sample_grid: mesh must be > 0");
    auto obs = observations(path, kind);
    if (obs.empty()) throw std::invalid_argument("sample_grid: no observations for series " + to_string(kind));

    const auto n = static_cast<size_t>(std::floor(path.horizon / mesh + 1e-9));
    LogPriceGrid g;
    g.mesh = mesh;
    g.kind = kind;
    g.values.resize(n + 1);
    size_t j = 0;
    double last = obs.front().price;
    for (size_t i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) * mesh;
        while (j < obs.size() && obs[j].t <= t + 1e-9) last = obs[j++].price;
        if (!(last > 0.0)) throw std::invalid_argument("sample_grid: non-positive price");
        g.values[i] = std::log(last);
    }
    return g;
}

LogPriceGrid resample(const LogPriceGrid& grid, double mesh) {
    const double ratio = mesh / grid.mesh;
    const auto step = static_cast<size_t>(std::llround(ratio));
    if (step < 1 || std::abs(ratio - static_cast<double>(step)) > 1e-9)
        throw std::invalid_argument("resample: mesh must be an integer multiple of the grid mesh");
    LogPriceGrid g;
    g.mesh = mesh;
    g.kind = grid.kind;
    for (size_t i = 0; i < grid.values.size(); i += step) g.values.push_back(grid.values[i]);
    return g;
}

TickPath path_from_grid(const LogPriceGrid& grid) {
    TickPath p;
    p.horizon = grid.horizon();
    p.quotes.reserve(grid.values.size());
    p.trades.reserve(grid.values.size());
    for (size_t i = 0; i < grid.values.size(); ++i) {
        const double t = static_cast<double>(i) * grid.mesh;
        const double px = std::exp(grid.values[i]);
        p.quotes.push_back({px, px, 1.0, 1.0, t});
        p.trades.push_back({t, px, 1.0});
    }
    return p;
}

void validate(const TickPath& path) {
    double prev = 0.0;
    for (const auto& q : path.quotes) {
        if (q.timestamp < prev || q.timestamp > path.horizon + 1e-9)
            throw std::invalid_argument("TickPath: quote timestamps out of order or range");
        if (q.best_ask < q.best_bid) throw std::invalid_argument("TickPath: crossed quote");
        prev = q.timestamp;
    }
    prev = 0.0;
    for (const auto& t : path.trades) {
        if (t.timestamp < prev || t.timestamp > path.horizon + 1e-9)
            throw std::invalid_argument("TickPath: trade timestamps out of order or range");
        prev = t.timestamp;
    }
}

}  // namespace qrvol
