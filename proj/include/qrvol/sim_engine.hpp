#pragma once

#include "qrvol/lob_core.hpp"
#include "qrvol/rng.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace qrvol {

enum class EventKind { limit = 0, cancel = 1, market = 2 };
enum class Regime { Q0 = 0, Qminus = 1, Qbar = 2, Qplus = 3 };

std::string to_string(EventKind k);
std::string to_string(Regime r);

struct EventRecord {
    double timestamp = 0.0;
    int level = 1;  // signed, -K..-1 bid, 1..K ask
    EventKind kind = EventKind::limit;
    int size = 1;
    int own_q = 0;
    int opp_q = 0;
    bool best_empty = false;
    std::vector<int> book;  // pre-event queue vector, slots -K..-1, 1..K
};

struct ZIParams {
    double lambda_L = 1.5;
    double lambda_C = 0.8;
    double lambda_M = 0.4;
    int K = 2;
    double tick_size = 0.01;
    double start_price = 50.0;
    int initial_depth = 5;
};

class QRIntensityTable {
public:
    QRIntensityTable() = default;
    QRIntensityTable(int K, int q_max, int m, int l);

    int K() const { return K_; }
    int q_max() const { return q_max_; }
    int m() const { return m_; }
    int l() const { return l_; }
    void set_thresholds(int m, int l);

    double lambda_M_buy = 0.3;
    double lambda_M_sell = 0.3;

    Regime regime(int opposite_q) const {
        if (opposite_q <= 0) return Regime::Q0;
        if (opposite_q <= m_) return Regime::Qminus;
        if (opposite_q <= l_) return Regime::Qbar;
        return Regime::Qplus;
    }

    // level is the absolute level 1..K; best_empty is ignored for level 1.
    double rate(int level, EventKind kind, int q, Regime reg, bool best_empty) const {
        return rates_[offset(level, kind, q, reg, best_empty)];
    }
    void set_rate(int level, EventKind kind, int q, Regime reg, bool best_empty, double value);

    void validate() const;

private:
    size_t offset(int level, EventKind kind, int q, Regime reg, bool best_empty) const {
        const int qq = q < q_max_ ? q : q_max_;
        const int be = (level > 1 && best_empty) ? 1 : 0;
        return ((((static_cast<size_t>(level - 1) * 2 + static_cast<size_t>(kind)) * (q_max_ + 1) + qq) * 4 +
                 static_cast<size_t>(reg)) * 2) + be;
    }

    int K_ = 0;
    int q_max_ = 0;
    int m_ = 0;
    int l_ = 0;
    std::vector<double> rates_;
};

// CSV columns: level,kind,own_q,opposite_regime,best_empty,rate
void write_intensity_csv(const QRIntensityTable& table, std::ostream& os);
QRIntensityTable read_intensity_csv(std::istream& is, int K, int q_max, int m, int l,
                                    double lambda_M_buy, double lambda_M_sell);

QRIntensityTable default_intensity_table();

using InvariantDist = std::vector<std::vector<double>>;  // [level-1][q], q = 0..q_max

struct QRParams {
    QRIntensityTable intensities;
    double theta = 0.6;
    double theta_reinit = 0.85;
    InvariantDist invariant_dist;
    int K = 2;
    double tick_size = 0.01;
    double start_price = 50.0;
    uint64_t rng_seed = 0;
};

struct RegimeInterval {
    double start = 0.0;  // fraction of horizon
    double end = 1.0;
    double theta = 0.6;
    double theta_reinit = 0.85;
};

struct RegimeSchedule {
    std::vector<RegimeInterval> intervals;

    static RegimeSchedule constant(double theta, double theta_reinit);
    static RegimeSchedule five_regimes();
    void validate() const;
};

struct SimDiagnostics {
    uint64_t events = 0;
    uint64_t ref_moves = 0;
    uint64_t reinits = 0;
    uint64_t side_redraws = 0;
    uint64_t trader_redraws = 0;
    uint64_t side_refills = 0;  // ZI only
};

class QRObserver {
public:
    virtual ~QRObserver() = default;
    virtual void on_quote(double t, const OrderBookState& book) = 0;
    virtual void on_trade(double /*t*/, double /*price*/, double /*volume*/) {}
    virtual bool wants_events() const { return false; }
    virtual void on_event(const EventRecord& /*ev*/) {}
};

// Records a TickPath; quotes are emitted only when the best quote changes.
class TickPathRecorder : public QRObserver {
public:
    explicit TickPathRecorder(double horizon, double tick_size);
    void on_quote(double t, const OrderBookState& book) override;
    void on_trade(double t, double price, double volume) override;
    TickPath take() { return std::move(path_); }

private:
    TickPath path_;
};

// Samples the log mid-price on a fixed grid with the last-tick rule.
class MidGridRecorder : public QRObserver {
public:
    MidGridRecorder(double mesh, double horizon);
    void on_quote(double t, const OrderBookState& book) override;
    LogPriceGrid finish();

private:
    LogPriceGrid grid_;
    size_t next_ = 0;
    double last_ = 0.0;
    bool started_ = false;
};

class EventLogRecorder : public QRObserver {
public:
    void on_quote(double, const OrderBookState&) override {}
    bool wants_events() const override { return true; }
    void on_event(const EventRecord& ev) override { events.push_back(ev); }
    std::vector<EventRecord> events;
};

class MultiObserver : public QRObserver {
public:
    explicit MultiObserver(std::vector<QRObserver*> obs) : obs_(std::move(obs)) {}
    void on_quote(double t, const OrderBookState& b) override { for (auto* o : obs_) o->on_quote(t, b); }
    void on_trade(double t, double p, double v) override { for (auto* o : obs_) o->on_trade(t, p, v); }
    bool wants_events() const override {
        for (auto* o : obs_) if (o->wants_events()) return true;
        return false;
    }
    void on_event(const EventRecord& ev) override { for (auto* o : obs_) if (o->wants_events()) o->on_event(ev); }

private:
    std::vector<QRObserver*> obs_;
};

struct PendingEvent {
    double wait = 0.0;
    int slot = 0;
    EventKind kind = EventKind::limit;
};

struct FillResult {
    double avg_price = 0.0;  // volume-weighted, cash units
    int units = 0;
    bool redrawn = false;
};

class QRSimulator {
public:
    // When estimation_mode is set, θ is ignored (no reference moves) and
    // empty sides are kept instead of redrawn; the invariant distribution
    // may be empty, in which case every queue starts at initial_queue.
    QRSimulator(const QRParams& params, const RegimeSchedule& schedule, double horizon, uint64_t seed,
                bool estimation_mode = false, int initial_queue = 3);

    void run_until(double t_end, QRObserver* obs);
    FillResult market_buy(int units, QRObserver* obs);

    double time() const { return t_; }
    const OrderBookState& book() const { return book_; }
    void set_book(const OrderBookState& b) { book_ = b; }
    double total_rate() const;
    // Draws a waiting time and event choice without changing the state.
    PendingEvent draw_next_event();
    const SimDiagnostics& diagnostics() const { return diag_; }

    void emit_initial(QRObserver* obs);

private:
    void compute_rates();
    void apply_event(const PendingEvent& ev, QRObserver* obs);
    void after_change(int64_t old_mid2, QRObserver* obs);
    void redraw_book();
    void redraw_side(int sign);
    int draw_queue(int level_abs);
    void update_regime();
    int slot_level(int slot) const { return slot < K_ ? -(K_ - slot) : slot - K_ + 1; }

    QRParams p_;
    RegimeSchedule schedule_;
    double horizon_;
    bool estimation_mode_;
    Rng rng_;
    OrderBookState book_;
    int K_;
    double t_ = 0.0;
    size_t regime_idx_ = 0;
    double theta_ = 0.0;
    double theta_reinit_ = 0.0;
    double next_boundary_ = 0.0;
    std::vector<double> limit_rates_, cancel_rates_;
    double mbuy_ = 0.0, msell_ = 0.0;
    int best_ask_slot_ = -1, best_bid_slot_ = -1;
    double total_ = 0.0;
    std::vector<std::vector<double>> cdf_;
    SimDiagnostics diag_;
};

TickPath simulate_zi(const ZIParams& params, double horizon, uint64_t seed, SimDiagnostics* diag = nullptr);
TickPath simulate_qr(const QRParams& params, const RegimeSchedule& schedule, double horizon, uint64_t seed,
                     SimDiagnostics* diag = nullptr);

// Time-weighted histogram of queue sizes per level (sides pooled) from a run
// with θ = 0.
InvariantDist estimate_invariant_distribution(const QRParams& params, double burn_in, double sample_horizon,
                                              uint64_t seed);

// Default table with its invariant distribution attached (computed once).
const QRParams& default_qr_params();
QRParams make_qr_params(double theta, double theta_reinit);

struct SurrogateParams {
    double start_price = 50.0;
    std::vector<double> sigma2 = {1e-8};       // variance per second, one value per regime
    std::vector<double> breakpoints = {};      // fractions in (0,1), size = sigma2.size() - 1
    double omega = 0.0;                        // i.i.d. noise std in log-price units
    double mesh = 1.0;                         // observation spacing, seconds

    double sigma2_at(double frac) const;
    double integrated_variance(double horizon) const;
    double integrated_quarticity(double horizon) const;
};

TickPath simulate_surrogate(const SurrogateParams& params, double horizon, uint64_t seed);

struct ZIModel { ZIParams params; };
struct QRModel { QRParams params; RegimeSchedule schedule; };
struct SurrogateModel { SurrogateParams params; };
using ModelSpec = std::variant<ZIModel, QRModel, SurrogateModel>;

TickPath simulate(const ModelSpec& model, double horizon, uint64_t seed);
std::string model_name(const ModelSpec& model);

struct TrueVariance {
    std::array<double, 3> value{};  // indexed by SeriesKind
    std::array<double, 3> std_error{};
    int n_sims = 0;
    double m = 0.0;
    bool below_stabilization = false;
};

TrueVariance estimate_true_variance(const ModelSpec& model, double m, int n_sims, uint64_t seed);

}  // namespace qrvol
