#include "qrvol/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qrvol {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

template <class T>
bool parse(const std::string& s, T& v) {
    std::istringstream ss(s);
    ss >> v;
    return !ss.fail() && (ss >> std::ws).eof();
}

std::vector<std::string> read_lines(std::istream& in) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

std::string parse_message(const std::string& line, LobsterMessage& m) {
    const auto c = split_csv(line);
    if (c.size() != 6) return "expected 6 message columns, got " + std::to_string(c.size());
    if (!parse(c[0], m.time) || !parse(c[1], m.event_type) || !parse(c[2], m.order_id) || !parse(c[3], m.size) ||
        !parse(c[4], m.price) || !parse(c[5], m.direction))
        return "unparsable message field";
    if (m.direction != 1 && m.direction != -1) return "direction must be 1 or -1";
    if (m.size < 0) return "negative size";
    return {};
}

std::string parse_book(const std::string& line, int levels, LobsterBookRow& b) {
    const auto c = split_csv(line);
    if (c.size() != static_cast<size_t>(4 * levels))
        return "expected " + std::to_string(4 * levels) + " book columns, got " + std::to_string(c.size());
    b.ask_price.resize(levels);
    b.ask_size.resize(levels);
    b.bid_price.resize(levels);
    b.bid_size.resize(levels);
    for (int k = 0; k < levels; ++k)
        if (!parse(c[4 * k], b.ask_price[k]) || !parse(c[4 * k + 1], b.ask_size[k]) ||
            !parse(c[4 * k + 2], b.bid_price[k]) || !parse(c[4 * k + 3], b.bid_size[k]))
            return "unparsable book field";
    return {};
}

}  // namespace

LobsterSession load_lobster(std::istream& messages, std::istream& books, int levels) {
    if (levels < 1) throw std::invalid_argument("load_lobster: levels must be >= 1");
    const auto ml = read_lines(messages);
    const auto bl = read_lines(books);
    if (ml.size() != bl.size())
        throw std::runtime_error("load_lobster: " + std::to_string(ml.size()) + " message rows but " +
                                 std::to_string(bl.size()) + " book rows");
    LobsterSession s;
    s.levels = levels;
    double last_time = -INFINITY;
    for (size_t i = 0; i < ml.size(); ++i) {
        LobsterMessage m;
        LobsterBookRow b;
        std::string err = parse_message(ml[i], m);
        if (err.empty()) err = parse_book(bl[i], levels, b);
        if (err.empty() && m.time < last_time) err = "time decreases";
        if (!err.empty()) {
            s.rejected.push_back({i + 1, err});
            continue;
        }
        last_time = m.time;
        s.messages.push_back(m);
        s.books.push_back(std::move(b));
    }
    return s;
}

LobsterSession load_lobster(const std::filesystem::path& message_file, const std::filesystem::path& book_file,
                            int levels) {
    std::ifstream m(message_file), b(book_file);
    if (!m) throw std::runtime_error("cannot open " + message_file.string());
    if (!b) throw std::runtime_error("cannot open " + book_file.string());
    return load_lobster(m, b, levels);
}

void write_lobster(const LobsterSession& s, std::ostream& mo, std::ostream& bo) {
    char buf[64];
    for (size_t i = 0; i < s.messages.size(); ++i) {
        const auto& m = s.messages[i];
        std::snprintf(buf, sizeof buf, "%.9f", m.time);
        mo << buf << ',' << m.event_type << ',' << m.order_id << ',' << m.size << ',' << m.price << ',' << m.direction
           << '\n';
        const auto& b = s.books[i];
        for (int k = 0; k < s.levels; ++k) {
            if (k) bo << ',';
            bo << b.ask_price[k] << ',' << b.ask_size[k] << ',' << b.bid_price[k] << ',' << b.bid_size[k];
        }
        bo << '\n';
    }
}

LobsterSession trim_session(const LobsterSession& s, double open, double close, double skip_open, double skip_close) {
    LobsterSession out;
    out.levels = s.levels;
    out.rejected = s.rejected;
    const double lo = open + skip_open, hi = close - skip_close;
    for (size_t i = 0; i < s.messages.size(); ++i) {
        if (s.messages[i].time < lo || s.messages[i].time > hi) continue;
        out.messages.push_back(s.messages[i]);
        out.books.push_back(s.books[i]);
    }
    return out;
}

namespace {

// Queue sizes of the QR window around the book's mid, slots -K..-1, 1..K.
struct Window {
    int64_t ref = 0;
    std::vector<int64_t> raw;
};

bool window_of(const LobsterBookRow& b, int K, int64_t tick, Window& w) {
    if (b.ask_price.empty() || b.ask_size[0] <= 0 || b.bid_size[0] <= 0) return false;
    const int64_t ask = b.ask_price[0] / tick, bid = b.bid_price[0] / tick;
    if (ask <= bid) return false;
    w.ref = (ask + bid) / 2 + 1;
    w.raw.assign(2 * K, 0);
    for (size_t k = 0; k < b.ask_price.size(); ++k) {
        const int64_t ai = b.ask_price[k] / tick - w.ref + 1;
        if (b.ask_size[k] > 0 && ai >= 1 && ai <= K) w.raw[OrderBookState::index_of(static_cast<int>(ai), K)] = b.ask_size[k];
        const int64_t bi = w.ref - b.bid_price[k] / tick;
        if (b.bid_size[k] > 0 && bi >= 1 && bi <= K)
            w.raw[OrderBookState::index_of(-static_cast<int>(bi), K)] = b.bid_size[k];
    }
    return true;
}

int units(int64_t size, double unit) {
    if (size <= 0) return 0;
    return std::max(1, static_cast<int>(std::llround(static_cast<double>(size) / unit)));
}

}  // namespace

EventConversion to_event_records(const LobsterSession& s, int K, int64_t tick, bool median_size_normalization) {
    if (K < 1 || tick < 1) throw std::invalid_argument("to_event_records: K and tick must be >= 1");
    EventConversion out;
    if (median_size_normalization) {
        std::vector<int64_t> sizes;
        for (const auto& m : s.messages)
            if ((m.event_type >= 1 && m.event_type <= 4) && m.size > 0) sizes.push_back(m.size);
        if (!sizes.empty()) {
            std::sort(sizes.begin(), sizes.end());
            const size_t n = sizes.size();
            out.unit_size = n % 2 ? static_cast<double>(sizes[n / 2])
                                  : 0.5 * static_cast<double>(sizes[n / 2 - 1] + sizes[n / 2]);
        }
    }
    const double t0 = s.messages.empty() ? 0.0 : s.messages.front().time;
    for (size_t i = 0; i < s.messages.size(); ++i) {
        const auto& m = s.messages[i];
        EventKind kind;
        switch (m.event_type) {
            case 1: kind = EventKind::limit; break;
            case 2:
            case 3: kind = EventKind::cancel; break;
            case 4: kind = EventKind::market; break;
            case 5: ++out.skipped_hidden; continue;
            default: ++out.skipped_unmapped; continue;
        }
        Window w;
        if (i == 0 || !window_of(s.books[i - 1], K, tick, w)) {
            ++out.skipped_no_state;
            continue;
        }
        const int64_t px = m.price / tick;
        // Sell limit orders rest on the ask side; executions hit the side of the resting order.
        const bool ask_side = m.direction == -1;
        const int64_t lvl = ask_side ? px - w.ref + 1 : -(w.ref - px);
        if (lvl == 0 || lvl > K || lvl < -K) {
            ++out.skipped_outside;
            continue;
        }
        EventRecord ev;
        ev.timestamp = m.time - t0;
        ev.level = static_cast<int>(lvl);
        ev.kind = kind;
        ev.size = units(m.size, out.unit_size);
        ev.book.resize(2 * K);
        for (int k = 0; k < 2 * K; ++k) ev.book[k] = units(w.raw[k], out.unit_size);
        auto q = [&](int level) { return ev.book[OrderBookState::index_of(level, K)]; };
        ev.own_q = q(ev.level);
        ev.opp_q = q(-ev.level);
        ev.best_empty = std::abs(ev.level) > 1 && q(ev.level > 0 ? 1 : -1) == 0;
        out.events.push_back(std::move(ev));
    }
    return out;
}

TickPath session_to_tickpath(const LobsterSession& s, int64_t tick) {
    TickPath p;
    p.tick_size = static_cast<double>(tick) / 1e4;
    if (s.messages.empty()) return p;
    const double t0 = s.messages.front().time;
    for (size_t i = 0; i < s.messages.size(); ++i) {
        const auto& b = s.books[i];
        const double t = s.messages[i].time - t0;
        if (!b.ask_price.empty() && b.ask_size[0] > 0 && b.bid_size[0] > 0) {
            const PriceQuote q{static_cast<double>(b.bid_price[0]) / 1e4, static_cast<double>(b.ask_price[0]) / 1e4,
                               static_cast<double>(b.bid_size[0]), static_cast<double>(b.ask_size[0]), t};
            if (p.quotes.empty() || q.best_bid != p.quotes.back().best_bid || q.best_ask != p.quotes.back().best_ask ||
                q.bid_vol != p.quotes.back().bid_vol || q.ask_vol != p.quotes.back().ask_vol)
                p.quotes.push_back(q);
        }
        if (s.messages[i].event_type == 4)
            p.trades.push_back({t, static_cast<double>(s.messages[i].price) / 1e4, static_cast<double>(s.messages[i].size)});
    }
    p.horizon = s.messages.back().time - t0;
    return p;
}

}  // namespace qrvol
