#include "qrvol/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qrvol {

ZIParams estimate_zi_rates(const std::vector<EventRecord>& events) {
    if (events.size() < 2) throw std::invalid_argument("estimate_zi_rates: need at least 2 events");
    double t_min = events.front().timestamp, t_max = t_min;
    int nL = 0, nC = 0, nM = 0, K = 1;
    for (const auto& e : events) {
        t_min = std::min(t_min, e.timestamp);
        t_max = std::max(t_max, e.timestamp);
        K = std::max(K, std::abs(e.level));
        switch (e.kind) {
            case EventKind::limit: ++nL; break;
            case EventKind::cancel: ++nC; break;
            case EventKind::market: ++nM; break;
        }
    }
    const double gap = (t_max - t_min) / static_cast<double>(events.size() - 1);
    if (!(gap > 0.0)) throw std::invalid_argument("estimate_zi_rates: zero elapsed time");
    const double nO = static_cast<double>(nL + nC + nM);
    ZIParams p;
    p.lambda_L = nL / (nO * gap);
    p.lambda_C = nC / (nO * gap);
    p.lambda_M = nM / (nO * gap);
    p.K = K;
    return p;
}

size_t IntensityEstimate::cell_index(int level, EventKind kind, int q, Regime reg, bool best_empty) const {
    const int qq = std::min(q, table.q_max());
    const int be = (level > 1 && best_empty) ? 1 : 0;
    return ((((static_cast<size_t>(level - 1) * 2 + static_cast<size_t>(kind)) * (table.q_max() + 1) + qq) * 4 +
             static_cast<size_t>(reg)) * 2) + be;
}

namespace {

int lower_quantile(std::vector<int> v, double p) {
    std::sort(v.begin(), v.end());
    auto k = static_cast<long>(std::ceil(p * static_cast<double>(v.size()))) - 1;
    k = std::clamp<long>(k, 0, static_cast<long>(v.size()) - 1);
    return v[static_cast<size_t>(k)];
}

}  // namespace

IntensityEstimate estimate_qr_intensities(const std::vector<EventRecord>& events_in, const IntensityOptions& opts) {
    const int K = opts.K;
    IntensityEstimate est;
    std::vector<EventRecord> events = events_in;
    std::stable_sort(events.begin(), events.end(),
                     [](const EventRecord& a, const EventRecord& b) { return a.timestamp < b.timestamp; });

    std::vector<int> opp;
    for (const auto& e : events)
        if (e.opp_q > 0) opp.push_back(e.opp_q);
    int m = 0, l = 0;
    if (opts.m_override >= 0 && opts.l_override >= 0) {
        m = opts.m_override;
        l = opts.l_override;
    } else if (!opp.empty()) {
        m = lower_quantile(opp, opts.m_l_quantile);
        l = lower_quantile(opp, 1.0 - opts.m_l_quantile);
    }
    est.table = QRIntensityTable(K, opts.q_max, m, l);
    const size_t cells = static_cast<size_t>(K) * 2 * (opts.q_max + 1) * 4 * 2;
    est.exposure.assign(cells, 0.0);
    est.counts.assign(cells, 0);

    const auto& tab = est.table;
    double total_time = 0.0;
    int n_market = 0;
    for (size_t j = 1; j < events.size(); ++j) {
        const auto& e = events[j];
        if (static_cast<int>(e.book.size()) != 2 * K)
            throw std::invalid_argument("estimate_qr_intensities: events must carry a 2K pre-event book");
        const double dt = e.timestamp - events[j - 1].timestamp;
        total_time += dt;
        for (int s = 0; s < 2 * K; ++s) {
            const int lvl = s < K ? -(K - s) : s - K + 1;
            const int i = std::abs(lvl);
            const int own = e.book[s];
            const Regime reg = tab.regime(e.book[OrderBookState::index_of(-lvl, K)]);
            const bool be = i > 1 && e.book[OrderBookState::index_of(lvl > 0 ? 1 : -1, K)] == 0;
            est.exposure[est.cell_index(i, EventKind::limit, own, reg, be)] += dt;
            if (own > 0) est.exposure[est.cell_index(i, EventKind::cancel, own, reg, be)] += dt;
        }
        const int i = std::abs(e.level);
        if (i < 1 || i > K) continue;
        if (e.kind == EventKind::market) {
            ++n_market;
            continue;
        }
        est.counts[est.cell_index(i, e.kind, e.own_q, tab.regime(e.opp_q), e.best_empty)] += 1;
    }

    for (int i = 1; i <= K; ++i)
        for (EventKind k : {EventKind::limit, EventKind::cancel})
            for (int q = 0; q <= opts.q_max; ++q)
                for (int r = 0; r < 4; ++r)
                    for (int be = 0; be < (i > 1 ? 2 : 1); ++be) {
                        const auto reg = static_cast<Regime>(r);
                        const size_t c = est.cell_index(i, k, q, reg, be == 1);
                        double rate = 0.0;
                        if (est.exposure[c] > 0.0) {
                            rate = est.counts[c] / est.exposure[c];
                        } else {
                            ++est.empty_cells;
                            est.flags.push_back("empty cell: level " + std::to_string(i) + " " + to_string(k) +
                                                " q=" + std::to_string(q) + " " + to_string(reg) +
                                                " best_empty=" + std::to_string(be));
                        }
                        est.table.set_rate(i, k, q, reg, be == 1, rate);
                        if (i == 1) est.table.set_rate(i, k, q, reg, true, rate);
                    }
    const double lm = total_time > 0.0 ? n_market / (2.0 * total_time) : 0.0;
    est.table.lambda_M_buy = lm;
    est.table.lambda_M_sell = lm;
    return est;
}

double mean_reversion_ratio(const std::vector<double>& moves) {
    long nc = 0, na = 0;
    int prev = 0;
    for (double r : moves) {
        if (r == 0.0) continue;
        const int s = r > 0.0 ? 1 : -1;
        if (prev != 0) {
            if (s == prev) ++nc;
            else ++na;
        }
        prev = s;
    }
    if (na == 0) throw std::domain_error("mean_reversion_ratio: no alternations");
    return static_cast<double>(nc) / (2.0 * static_cast<double>(na));
}

double mean_reversion_ratio(const LogPriceGrid& grid) { return mean_reversion_ratio(grid.returns()); }

GMMMoments grid_moments(const LogPriceGrid& grid) {
    const auto r = grid.returns();
    GMMMoments m;
    if (r.empty()) return m;
    double s = 0.0, s2 = 0.0;
    for (double x : r) {
        s += x;
        s2 += x * x;
    }
    const auto n = static_cast<double>(r.size());
    const double mean = s / n;
    m.sigma = std::sqrt(std::max(0.0, s2 / n - mean * mean));
    try {
        m.zeta = mean_reversion_ratio(r);
    } catch (const std::domain_error&) {
        m.zeta = 0.0;
    }
    return m;
}

}  // namespace qrvol
