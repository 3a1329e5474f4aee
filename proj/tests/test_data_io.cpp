#include "qrvol/data_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qrvol;

namespace {

// Two levels: ask 100.01 x100, 100.02 x300; bid 100.00 x200, 99.99 x100.
const char* kBook =
    "1000100,100,1000000,200,1000200,300,999900,100\n"
    "1000100,100,1000000,300,1000200,300,999900,100\n"
    "1000100,100,1000000,300,1000200,300,999900,100\n";

const char* kMessages =
    "34200.5,1,1,100,1000100,-1\n"
    "34201.0,1,2,100,1000000,1\n"
    "34202.25,4,3,100,1000100,-1\n";

LobsterSession fixture() {
    std::istringstream m(kMessages), b(kBook);
    return load_lobster(m, b, 2);
}

}  // namespace

TEST(LoadLobster, EmptyFiles) {
    std::istringstream m, b;
    const LobsterSession s = load_lobster(m, b, 5);
    EXPECT_TRUE(s.messages.empty());
    EXPECT_TRUE(s.rejected.empty());
    EXPECT_THROW(load_lobster(m, b, 0), std::invalid_argument);
}

TEST(LoadLobster, ParsesFixture) {
    const LobsterSession s = fixture();
    ASSERT_EQ(s.messages.size(), 3u);
    EXPECT_DOUBLE_EQ(s.messages[2].time, 34202.25);
    EXPECT_EQ(s.messages[2].event_type, 4);
    EXPECT_EQ(s.messages[1].direction, 1);
    EXPECT_EQ(s.books[0].ask_price[1], 1000200);
    EXPECT_EQ(s.books[1].bid_size[0], 300);
}

TEST(LoadLobster, RoundTrip) {
    const LobsterSession s = fixture();
    std::ostringstream mo, bo;
    write_lobster(s, mo, bo);
    std::istringstream mi(mo.str()), bi(bo.str());
    const LobsterSession t = load_lobster(mi, bi, 2);
    ASSERT_EQ(t.messages.size(), s.messages.size());
    for (size_t i = 0; i < s.messages.size(); ++i) {
        EXPECT_DOUBLE_EQ(t.messages[i].time, s.messages[i].time);
        EXPECT_EQ(t.messages[i].order_id, s.messages[i].order_id);
        EXPECT_EQ(t.messages[i].price, s.messages[i].price);
        EXPECT_EQ(t.books[i].ask_size, s.books[i].ask_size);
        EXPECT_EQ(t.books[i].bid_price, s.books[i].bid_price);
    }
}

TEST(LoadLobster, FilesOnDisk) {
    const auto dir = std::filesystem::temp_directory_path() / "qrvol_data_io_test";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "m.csv") << kMessages;
    std::ofstream(dir / "b.csv") << kBook;
    EXPECT_EQ(load_lobster(dir / "m.csv", dir / "b.csv", 2).messages.size(), 3u);
    EXPECT_THROW(load_lobster(dir / "missing.csv", dir / "b.csv", 2), std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST(LoadLobster, RowCountMismatchThrows) {
    std::istringstream m(kMessages), b("1000100,100,1000000,200,1000200,300,999900,100\n");
    EXPECT_THROW(load_lobster(m, b, 2), std::runtime_error);
}

TEST(LoadLobster, MalformedRowsRejectedWithLineNumbers) {
    std::istringstream m(
        "34200.5,1,1,100,1000100,-1\n"
        "34201.0,1,2,abc,1000000,1\n"
        "34201.5,1,2,100,1000000,0\n"
        "34202.0,1,2,100,1000000,1\n"
        "34100.0,1,2,100,1000000,1\n");
    std::istringstream b(
        "1000100,100,1000000,200,1000200,300,999900,100\n"
        "1000100,100,1000000,200,1000200,300,999900,100\n"
        "1000100,100,1000000,200,1000200,300,999900,100\n"
        "1000100,100,1000000,200\n"
        "1000100,100,1000000,200,1000200,300,999900,100\n");
    const LobsterSession s = load_lobster(m, b, 2);
    EXPECT_EQ(s.messages.size(), 1u);
    ASSERT_EQ(s.rejected.size(), 4u);
    EXPECT_EQ(s.rejected[0].line, 2u);
    EXPECT_EQ(s.rejected[1].line, 3u);
    EXPECT_EQ(s.rejected[2].line, 4u);
    EXPECT_NE(s.rejected[2].reason.find("book columns"), std::string::npos);
    EXPECT_EQ(s.rejected[3].line, 5u);
    EXPECT_EQ(s.rejected[3].reason, "time decreases");
}

TEST(ToEventRecords, MapsLimitAndExecution) {
    const EventConversion c = to_event_records(fixture(), 2, 100, false);
    // The first message has no preceding book state.
    EXPECT_EQ(c.skipped_no_state, 1);
    ASSERT_EQ(c.events.size(), 2u);
    const EventRecord& lim = c.events[0];
    EXPECT_EQ(lim.kind, EventKind::limit);
    EXPECT_EQ(lim.level, -1);
    EXPECT_DOUBLE_EQ(lim.timestamp, 0.5);
    EXPECT_EQ(lim.book, (std::vector<int>{100, 200, 100, 300}));
    EXPECT_EQ(lim.own_q, 200);
    EXPECT_EQ(lim.opp_q, 100);
    const EventRecord& mkt = c.events[1];
    EXPECT_EQ(mkt.kind, EventKind::market);
    EXPECT_EQ(mkt.level, 1);
    EXPECT_EQ(mkt.own_q, 100);
    EXPECT_EQ(mkt.opp_q, 300);
}

TEST(ToEventRecords, MedianNormalization) {
    const EventConversion c = to_event_records(fixture(), 2, 100, true);
    EXPECT_DOUBLE_EQ(c.unit_size, 100.0);
    ASSERT_EQ(c.events.size(), 2u);
    EXPECT_EQ(c.events[0].book, (std::vector<int>{1, 2, 1, 3}));
    EXPECT_EQ(c.events[0].size, 1);
}

TEST(ToEventRecords, SkipsHiddenUnmappedAndOutside) {
    std::istringstream m(
        "34200.0,1,1,100,1000100,-1\n"
        "34201.0,5,9,100,1000050,1\n"
        "34202.0,7,0,0,-1,-1\n"
        "34203.0,1,4,100,1000500,-1\n"
        "34204.0,3,5,100,999900,1\n");
    std::string books;
    for (int i = 0; i < 5; ++i) books += "1000100,100,1000000,200,1000200,300,999900,100\n";
    std::istringstream bb(books);
    const EventConversion c = to_event_records(load_lobster(m, bb, 2), 2, 100, false);
    EXPECT_EQ(c.skipped_hidden, 1);
    EXPECT_EQ(c.skipped_unmapped, 1);
    EXPECT_EQ(c.skipped_outside, 1);
    ASSERT_EQ(c.events.size(), 1u);
    EXPECT_EQ(c.events[0].kind, EventKind::cancel);
    EXPECT_EQ(c.events[0].level, -2);
    EXPECT_FALSE(c.events[0].best_empty);
    EXPECT_THROW(to_event_records(fixture(), 0), std::invalid_argument);
}

TEST(TrimSession, KeepsWindowInclusive) {
    LobsterSession s;
    s.levels = 1;
    for (double t : {34200.0, 37799.0, 37800.0, 50000.0, 55800.0, 55801.0}) {
        s.messages.push_back({t, 1, 1, 100, 1000000, 1});
        s.books.push_back({{1000100}, {1}, {1000000}, {1}});
    }
    const LobsterSession t = trim_session(s);
    ASSERT_EQ(t.messages.size(), 3u);
    EXPECT_DOUBLE_EQ(t.messages.front().time, 37800.0);
    EXPECT_DOUBLE_EQ(t.messages.back().time, 55800.0);
    EXPECT_EQ(t.books.size(), t.messages.size());
}

TEST(SessionToTickPath, QuotesAndTrades) {
    const TickPath p = session_to_tickpath(fixture());
    EXPECT_DOUBLE_EQ(p.tick_size, 0.01);
    EXPECT_DOUBLE_EQ(p.horizon, 1.75);
    // Rows 2 and 3 have the same best quotes.
    ASSERT_EQ(p.quotes.size(), 2u);
    EXPECT_DOUBLE_EQ(p.quotes[0].best_ask, 100.01);
    EXPECT_DOUBLE_EQ(p.quotes[0].best_bid, 100.0);
    EXPECT_DOUBLE_EQ(p.quotes[1].bid_vol, 300.0);
    ASSERT_EQ(p.trades.size(), 1u);
    EXPECT_DOUBLE_EQ(p.trades[0].timestamp, 1.75);
    EXPECT_DOUBLE_EQ(p.trades[0].price, 100.01);
    EXPECT_TRUE(session_to_tickpath(LobsterSession{}).quotes.empty());
}
