#include "qrvol/sim_engine.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qrvol {

TickPathRecorder::TickPathRecorder(double horizon, double tick_size) {
    path_.horizon = horizon;
    path_.tick_size = tick_size;
}

void TickPathRecorder::on_quote(double t, const OrderBookState& book) {
    const int bl = book.best_bid_level();
    const int al = book.best_ask_level();
    if (bl == 0 || al == 0) return;
    PriceQuote q;
    q.best_bid = static_cast<double>(book.level_price_ticks(bl)) * book.tick_size();
    q.best_ask = static_cast<double>(book.level_price_ticks(al)) * book.tick_size();
    q.bid_vol = book.queue(bl);
    q.ask_vol = book.queue(al);
    q.timestamp = t;
    if (!path_.quotes.empty()) {
        const auto& b = path_.quotes.back();
        if (b.best_bid == q.best_bid && b.best_ask == q.best_ask && b.bid_vol == q.bid_vol && b.ask_vol == q.ask_vol)
            return;
    }
    path_.quotes.push_back(q);
}

void TickPathRecorder::on_trade(double t, double price, double volume) { path_.trades.push_back({t, price, volume}); }

MidGridRecorder::MidGridRecorder(double mesh, double horizon) {
    grid_.mesh = mesh;
    grid_.kind = SeriesKind::mid;
    const auto n = static_cast<size_t>(std::floor(horizon / mesh + 1e-9));
    grid_.values.assign(n + 1, 0.0);
}

void MidGridRecorder::on_quote(double t, const OrderBookState& book) {
    if (book.degenerate()) return;
    const double v = std::log(0.5 * static_cast<double>(book.mid_twice_ticks()) * book.tick_size());
    if (!started_) {
        started_ = true;
        last_ = v;
    }
    while (next_ < grid_.values.size() && static_cast<double>(next_) * grid_.mesh < t) grid_.values[next_++] = last_;
    last_ = v;
}

LogPriceGrid MidGridRecorder::finish() {
    while (next_ < grid_.values.size()) grid_.values[next_++] = last_;
    return std::move(grid_);
}

QRSimulator::QRSimulator(const QRParams& params, const RegimeSchedule& schedule, double horizon, uint64_t seed,
                         bool estimation_mode, int initial_queue)
    : p_(params),
      schedule_(schedule),
      horizon_(horizon),
      estimation_mode_(estimation_mode),
      rng_(seed),
      K_(params.K) {
    if (!(horizon > 0.0)) throw std::invalid_argument("simulate_qr: horizon must be > 0");
    if (p_.intensities.K() < K_) throw std::invalid_argument("simulate_qr: intensity table has fewer levels than K");
    p_.intensities.validate();
    if (schedule_.intervals.empty()) schedule_ = RegimeSchedule::constant(p_.theta, p_.theta_reinit);
    schedule_.validate();
    book_ = OrderBookState(K_, std::llround(p_.start_price / p_.tick_size), p_.tick_size);
    limit_rates_.assign(2 * K_, 0.0);
    cancel_rates_.assign(2 * K_, 0.0);

    const bool have_dist = !p_.invariant_dist.empty();
    if (have_dist) {
        if (static_cast<int>(p_.invariant_dist.size()) < K_)
            throw std::invalid_argument("simulate_qr: invariant distribution has fewer levels than K");
        for (int i = 0; i < K_; ++i) {
            const auto& d = p_.invariant_dist[i];
            double acc = 0.0, pos = 0.0;
            std::vector<double> c(d.size());
            for (size_t q = 0; q < d.size(); ++q) {
                if (!(d[q] >= 0.0)) throw std::invalid_argument("simulate_qr: invalid invariant distribution");
                acc += d[q];
                if (q > 0) pos += d[q];
                c[q] = acc;
            }
            if (std::abs(acc - 1.0) > 1e-6) throw std::invalid_argument("simulate_qr: invariant distribution must sum to 1");
            if (i == 0 && !(pos > 0.0)) throw std::invalid_argument("simulate_qr: degenerate invariant distribution");
            cdf_.push_back(std::move(c));
        }
    } else if (!estimation_mode_) {
        throw std::invalid_argument("simulate_qr: invariant distribution required");
    }

    if (have_dist && !estimation_mode_) {
        redraw_book();
    } else {
        for (int s = 0; s < 2 * K_; ++s) book_.set_queue(slot_level(s), initial_queue);
    }
    update_regime();
}

void QRSimulator::update_regime() {
    const auto& iv = schedule_.intervals[regime_idx_];
    theta_ = estimation_mode_ ? 0.0 : iv.theta;
    theta_reinit_ = iv.theta_reinit;
    next_boundary_ = regime_idx_ + 1 < schedule_.intervals.size() ? iv.end * horizon_
                                                                  : std::numeric_limits<double>::infinity();
}

int QRSimulator::draw_queue(int level_abs) {
    const auto& c = cdf_[level_abs - 1];
    const double u = rng_.uniform() * c.back();
    size_t q = 0;
    while (q + 1 < c.size() && c[q] < u) ++q;
    return static_cast<int>(q);
}

void QRSimulator::redraw_side(int sign) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        bool any = false;
        for (int i = 1; i <= K_; ++i) {
            const int q = draw_queue(i);
            book_.set_queue(sign * i, q);
            any = any || q > 0;
        }
        if (any) return;
    }
    book_.set_queue(sign, 1);
}

void QRSimulator::redraw_book() {
    redraw_side(-1);
    redraw_side(+1);
}

void QRSimulator::compute_rates() {
    const auto& tab = p_.intensities;
    const auto& q = book_.raw();
    total_ = 0.0;
    for (int s = 0; s < 2 * K_; ++s) {
        const int lvl = slot_level(s);
        const int i = lvl > 0 ? lvl : -lvl;
        const int own = q[s];
        const int opp = q[OrderBookState::index_of(-lvl, K_)];
        const Regime reg = tab.regime(opp);
        const bool be = i > 1 && q[OrderBookState::index_of(lvl > 0 ? 1 : -1, K_)] == 0;
        limit_rates_[s] = tab.rate(i, EventKind::limit, own, reg, be);
        cancel_rates_[s] = own > 0 ? tab.rate(i, EventKind::cancel, own, reg, be) : 0.0;
        total_ += limit_rates_[s] + cancel_rates_[s];
    }
    best_ask_slot_ = -1;
    best_bid_slot_ = -1;
    const int al = book_.best_ask_level();
    const int bl = book_.best_bid_level();
    mbuy_ = msell_ = 0.0;
    if (al != 0) {
        best_ask_slot_ = OrderBookState::index_of(al, K_);
        mbuy_ = tab.lambda_M_buy;
    }
    if (bl != 0) {
        best_bid_slot_ = OrderBookState::index_of(bl, K_);
        msell_ = tab.lambda_M_sell;
    }
    total_ += mbuy_ + msell_;
}

double QRSimulator::total_rate() const {
    auto* self = const_cast<QRSimulator*>(this);
    self->compute_rates();
    return total_;
}

PendingEvent QRSimulator::draw_next_event() {
    compute_rates();
    if (!(total_ > 0.0)) throw std::runtime_error("simulate_qr: zero total rate");
    PendingEvent ev;
    ev.wait = rng_.exponential(total_);
    double u = rng_.uniform() * total_;
    for (int s = 0; s < 2 * K_; ++s) {
        if (u < limit_rates_[s]) {
            ev.slot = s;
            ev.kind = EventKind::limit;
            return ev;
        }
        u -= limit_rates_[s];
        if (u < cancel_rates_[s]) {
            ev.slot = s;
            ev.kind = EventKind::cancel;
            return ev;
        }
        u -= cancel_rates_[s];
    }
    ev.kind = EventKind::market;
    if (best_ask_slot_ >= 0 && (u < mbuy_ || best_bid_slot_ < 0)) {
        ev.slot = best_ask_slot_;
    } else if (best_bid_slot_ >= 0) {
        ev.slot = best_bid_slot_;
    } else {
        // Rounding left no mass for the last bucket; fall back to a limit.
        ev.kind = EventKind::limit;
        ev.slot = 2 * K_ - 1;
    }
    return ev;
}

void QRSimulator::emit_initial(QRObserver* obs) {
    if (obs) obs->on_quote(t_, book_);
}

void QRSimulator::run_until(double t_end, QRObserver* obs) {
    while (t_ < t_end) {
        compute_rates();
        if (!(total_ > 0.0)) {
            if (book_.best_ask_level() == 0 && book_.best_bid_level() == 0)
                throw std::runtime_error("simulate_qr: zero total rate with both sides empty");
            t_ = t_end;
            return;
        }
        const double wait = rng_.exponential(total_);
        const double bound = std::min(t_end, next_boundary_);
        if (t_ + wait > bound) {
            t_ = bound;
            if (bound >= next_boundary_) {
                ++regime_idx_;
                update_regime();
            }
            continue;
        }
        t_ += wait;
        PendingEvent ev;
        double u = rng_.uniform() * total_;
        bool chosen = false;
        for (int s = 0; s < 2 * K_ && !chosen; ++s) {
            if (u < limit_rates_[s]) {
                ev.slot = s;
                ev.kind = EventKind::limit;
                chosen = true;
                break;
            }
            u -= limit_rates_[s];
            if (u < cancel_rates_[s]) {
                ev.slot = s;
                ev.kind = EventKind::cancel;
                chosen = true;
                break;
            }
            u -= cancel_rates_[s];
        }
        if (!chosen) {
            ev.kind = EventKind::market;
            if (best_ask_slot_ >= 0 && (u < mbuy_ || best_bid_slot_ < 0)) ev.slot = best_ask_slot_;
            else if (best_bid_slot_ >= 0) ev.slot = best_bid_slot_;
            else continue;
        }
        apply_event(ev, obs);
    }
}

void QRSimulator::apply_event(const PendingEvent& ev, QRObserver* obs) {
    const bool had_mid = !book_.degenerate();
    const int64_t old_mid2 = had_mid ? book_.mid_twice_ticks() : 0;
    const int lvl = slot_level(ev.slot);
    if (obs && obs->wants_events()) {
        EventRecord rec;
        rec.timestamp = t_;
        rec.level = lvl;
        rec.kind = ev.kind;
        rec.size = 1;
        rec.own_q = book_.queue(lvl);
        rec.opp_q = book_.queue(-lvl);
        rec.best_empty = (lvl > 1 || lvl < -1) && book_.queue(lvl > 0 ? 1 : -1) == 0;
        rec.book = book_.raw();
        obs->on_event(rec);
    }
    ++diag_.events;
    if (ev.kind == EventKind::limit) {
        book_.add(lvl, 1);
    } else {
        book_.add(lvl, -1);
        if (ev.kind == EventKind::market && obs)
            obs->on_trade(t_, static_cast<double>(book_.level_price_ticks(lvl)) * p_.tick_size, 1.0);
    }
    if (had_mid) after_change(old_mid2, obs);
    else if (obs) obs->on_quote(t_, book_);
}

void QRSimulator::after_change(int64_t old_mid2, QRObserver* obs) {
    if (estimation_mode_) {
        if (obs) obs->on_quote(t_, book_);
        return;
    }
    if (book_.degenerate()) {
        redraw_book();
        ++diag_.side_redraws;
        if (obs) obs->on_quote(t_, book_);
        return;
    }
    const int64_t new_mid2 = book_.mid_twice_ticks();
    if (new_mid2 != old_mid2) {
        const int d = new_mid2 > old_mid2 ? 1 : -1;
        const int64_t centre2 = 2 * book_.ref_price() - 1;
        const bool away = d > 0 ? new_mid2 > centre2 : new_mid2 < centre2;
        if (away && rng_.uniform() < theta_) {
            book_.shift(d);
            ++diag_.ref_moves;
            book_.set_queue(d > 0 ? K_ : -K_, draw_queue(K_));
            if (rng_.uniform() < theta_reinit_) {
                redraw_book();
                ++diag_.reinits;
            } else if (book_.degenerate()) {
                redraw_book();
                ++diag_.side_redraws;
            }
        }
    }
    if (obs) obs->on_quote(t_, book_);
}

FillResult QRSimulator::market_buy(int units, QRObserver* obs) {
    FillResult res;
    if (units <= 0) return res;
    const int64_t old_mid2 = book_.mid_twice_ticks();
    int remaining = units;
    int64_t cost_ticks = 0;
    while (remaining > 0) {
        for (int i = 1; i <= K_ && remaining > 0; ++i) {
            const int take = std::min(remaining, book_.queue(i));
            if (take == 0) continue;
            book_.add(i, -take);
            cost_ticks += static_cast<int64_t>(take) * book_.level_price_ticks(i);
            remaining -= take;
        }
        if (remaining > 0) {
            redraw_book();
            ++diag_.trader_redraws;
            res.redrawn = true;
        }
    }
    res.units = units;
    res.avg_price = static_cast<double>(cost_ticks) * p_.tick_size / units;
    if (obs) obs->on_trade(t_, res.avg_price, units);
    after_change(old_mid2, obs);
    return res;
}

TickPath simulate_qr(const QRParams& params, const RegimeSchedule& schedule, double horizon, uint64_t seed,
                     SimDiagnostics* diag) {
    QRSimulator sim(params, schedule, horizon, seed);
    TickPathRecorder rec(horizon, params.tick_size);
    sim.emit_initial(&rec);
    sim.run_until(horizon, &rec);
    if (diag) *diag = sim.diagnostics();
    return rec.take();
}

namespace {

class HoldingTimeHistogram : public QRObserver {
public:
    HoldingTimeHistogram(int K, int q_max, double t0) : K_(K), q_max_(q_max), last_t_(t0), hist_(K, std::vector<double>(q_max + 1, 0.0)) {}
    void on_quote(double, const OrderBookState&) override {}
    bool wants_events() const override { return true; }
    void on_event(const EventRecord& ev) override {
        add(ev.book, ev.timestamp - last_t_);
        last_t_ = ev.timestamp;
        ++events_;
    }
    void add(const std::vector<int>& book, double dt) {
        for (int i = 1; i <= K_; ++i) {
            hist_[i - 1][std::min(book[OrderBookState::index_of(i, K_)], q_max_)] += dt;
            hist_[i - 1][std::min(book[OrderBookState::index_of(-i, K_)], q_max_)] += dt;
        }
    }
    double last_t() const { return last_t_; }
    uint64_t events() const { return events_; }
    InvariantDist normalized() const {
        InvariantDist d = hist_;
        for (auto& row : d) {
            double s = 0.0;
            for (double x : row) s += x;
            for (double& x : row) x /= s;
        }
        return d;
    }

private:
    int K_, q_max_;
    double last_t_;
    uint64_t events_ = 0;
    std::vector<std::vector<double>> hist_;
};

}  // namespace

InvariantDist estimate_invariant_distribution(const QRParams& params, double burn_in, double sample_horizon,
                                              uint64_t seed) {
    if (!(sample_horizon > 0.0) || burn_in < 0.0)
        throw std::invalid_argument("estimate_invariant_distribution: invalid horizons");
    QRParams p = params;
    p.invariant_dist.clear();
    const double horizon = burn_in + sample_horizon;
    QRSimulator sim(p, RegimeSchedule::constant(0.0, 0.0), horizon, seed, true, 3);
    sim.run_until(burn_in, nullptr);
    HoldingTimeHistogram h(p.K, p.intensities.q_max(), sim.time());
    sim.run_until(horizon, &h);
    h.add(sim.book().raw(), horizon - h.last_t());
    if (h.events() < static_cast<uint64_t>(10 * p.intensities.q_max()))
        throw std::runtime_error("estimate_invariant_distribution: insufficient samples");
    return h.normalized();
}

const QRParams& default_qr_params() {
    static const QRParams params = [] {
        QRParams p;
        p.intensities = default_intensity_table();
        p.K = 2;
        p.tick_size = 0.01;
        p.start_price = 50.0;
        p.invariant_dist = estimate_invariant_distribution(p, 1000.0, 200000.0, 20240601);
        return p;
    }();
    return params;
}

QRParams make_qr_params(double theta, double theta_reinit) {
    QRParams p = default_qr_params();
    p.theta = theta;
    p.theta_reinit = theta_reinit;
    return p;
}

}  // namespace qrvol
