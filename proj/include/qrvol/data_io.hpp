#pragma once

#include "qrvol/sim_engine.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace qrvol {

struct LobsterMessage {
    double time = 0.0;  // seconds after midnight
    int event_type = 0;
    int64_t order_id = 0;
    int64_t size = 0;
    int64_t price = 0;  // dollars x 10^4
    int direction = 0;  // 1 buy limit order, -1 sell limit order
};

struct LobsterBookRow {
    std::vector<int64_t> ask_price, ask_size, bid_price, bid_size;  // one entry per level
};

struct RejectedRow {
    size_t line = 0;
    std::string reason;
};

struct LobsterSession {
    int levels = 0;
    std::vector<LobsterMessage> messages;
    std::vector<LobsterBookRow> books;  // state after the message with the same index
    std::vector<RejectedRow> rejected;
};

LobsterSession load_lobster(std::istream& messages, std::istream& books, int levels);
LobsterSession load_lobster(const std::filesystem::path& message_file, const std::filesystem::path& book_file,
                            int levels);
void write_lobster(const LobsterSession& s, std::ostream& messages, std::ostream& books);

// Keeps rows with open + skip_open <= time <= close - skip_close.
LobsterSession trim_session(const LobsterSession& s, double open = 34200.0, double close = 57600.0,
                            double skip_open = 3600.0, double skip_close = 1800.0);

struct EventConversion {
    std::vector<EventRecord> events;
    double unit_size = 1.0;  // median event size used for normalization
    int skipped_hidden = 0;
    int skipped_unmapped = 0;
    int skipped_outside = 0;  // price outside the K-level window
    int skipped_no_state = 0;
};

// Times are rebased so the first message sits at 0.
EventConversion to_event_records(const LobsterSession& s, int K = 2, int64_t tick = 100,
                                 bool median_size_normalization = true);

// Best quotes after every message and visible executions as trades.
TickPath session_to_tickpath(const LobsterSession& s, int64_t tick = 100);

}  // namespace qrvol
