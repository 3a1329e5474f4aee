#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qrvol {

enum class SeriesKind { mid, micro, trade };

std::string to_string(SeriesKind kind);
SeriesKind series_kind_from_string(const std::string& s);

// Queue vector of 2K levels around a reference price.  Ask level i (1..K)
// sits at ref_price + i - 1 ticks, bid level -i at ref_price - i ticks, so
// the book centre is ref_price - 1/2.
class OrderBookState {
public:
    OrderBookState() = default;
    OrderBookState(int K, int64_t ref_price, double tick_size);

    int K() const { return K_; }
    int64_t ref_price() const { return ref_price_; }
    void set_ref_price(int64_t p) { ref_price_ = p; }
    double tick_size() const { return tick_size_; }

    int queue(int level) const { return queues_[index(level)]; }
    void set_queue(int level, int volume);
    void add(int level, int delta);

    const std::vector<int>& raw() const { return queues_; }

    // 0 when the side is empty.
    int best_bid_level() const;
    int best_ask_level() const;
    bool degenerate() const { return best_bid_level() == 0 || best_ask_level() == 0; }

    int64_t level_price_ticks(int level) const;
    int64_t best_bid_ticks() const { return level_price_ticks(best_bid_level()); }
    int64_t best_ask_ticks() const { return level_price_ticks(best_ask_level()); }
    // Twice the mid-price in ticks, exact.
    int64_t mid_twice_ticks() const { return best_bid_ticks() + best_ask_ticks(); }

    // Scroll the window one tick up (+1) or down (-1).  Levels leaving the
    // window are dropped; newly exposed slots are set to zero.
    void shift(int direction);

    static int index_of(int level, int K);

private:
    int index(int level) const { return index_of(level, K_); }

    int K_ = 0;
    int64_t ref_price_ = 0;
    double tick_size_ = 0.01;
    std::vector<int> queues_;
};

struct PriceQuote {
    double best_bid = 0.0;
    double best_ask = 0.0;
    double bid_vol = 0.0;
    double ask_vol = 0.0;
    double timestamp = 0.0;
};

struct Trade {
    double timestamp = 0.0;
    double price = 0.0;
    double volume = 0.0;
};

struct TickPath {
    std::vector<PriceQuote> quotes;
    std::vector<Trade> trades;
    double horizon = 0.0;
    double tick_size = 0.0;  // 0 for continuous-price surrogates
};

struct LogPriceGrid {
    std::vector<double> values;
    double mesh = 1.0;
    SeriesKind kind = SeriesKind::mid;

    size_t n() const { return values.empty() ? 0 : values.size() - 1; }
    double horizon() const { return mesh * static_cast<double>(n()); }
    std::vector<double> returns() const;
};

double mid_price(const PriceQuote& q);
double micro_price(const PriceQuote& q);

LogPriceGrid sample_grid(const TickPath& path, double mesh, SeriesKind kind);

// Coarsen a grid by an integer multiple of its mesh.
LogPriceGrid resample(const LogPriceGrid& grid, double mesh);

// TickPath with one zero-spread quote per grid point.
TickPath path_from_grid(const LogPriceGrid& grid);

void validate(const TickPath& path);

}  // namespace qrvol
