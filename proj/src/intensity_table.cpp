#include "qrvol/sim_engine.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qrvol {

std::string to_string(EventKind k) {
    switch (k) {
        case EventKind::limit: return "limit";
        case EventKind::cancel: return "cancel";
        case EventKind::market: return "market";
    }
    return "limit";
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::Q0: return "Q0";
        case Regime::Qminus: return "Qminus";
        case Regime::Qbar: return "Qbar";
        case Regime::Qplus: return "Qplus";
    }
    return "Q0";
}

namespace {

EventKind kind_from_string(const std::string& s) {
    if (s == "limit") return EventKind::limit;
    if (s == "cancel") return EventKind::cancel;
    if (s == "market") return EventKind::market;
    throw std::invalid_argument("unknown event kind: " + s);
}

Regime regime_from_string(const std::string& s) {
    if (s == "Q0") return Regime::Q0;
    if (s == "Qminus") return Regime::Qminus;
    if (s == "Qbar") return Regime::Qbar;
    if (s == "Qplus") return Regime::Qplus;
    throw std::invalid_argument("unknown regime: " + s);
}

}  // namespace

QRIntensityTable::QRIntensityTable(int K, int q_max, int m, int l)
    : K_(K), q_max_(q_max), rates_(static_cast<size_t>(K) * 2 * (q_max + 1) * 4 * 2, 0.0) {
    if (K < 1 || q_max < 1) throw std::invalid_argument("QRIntensityTable: K and q_max must be >= 1");
    set_thresholds(m, l);
}

void QRIntensityTable::set_thresholds(int m, int l) {
    if (m < 0 || l < m) throw std::invalid_argument("QRIntensityTable: need 0 <= m <= l");
    m_ = m;
    l_ = l;
}

void QRIntensityTable::set_rate(int level, EventKind kind, int q, Regime reg, bool best_empty, double value) {
    if (level < 1 || level > K_) throw std::out_of_range("QRIntensityTable: level out of range");
    if (kind == EventKind::market) throw std::invalid_argument("QRIntensityTable: market rates are scalars");
    if (q < 0 || q > q_max_) throw std::out_of_range("QRIntensityTable: queue bucket out of range");
    if (!(value >= 0.0) || !std::isfinite(value)) throw std::invalid_argument("QRIntensityTable: rate must be finite and >= 0");
    rates_[offset(level, kind, q, reg, best_empty)] = value;
}

void QRIntensityTable::validate() const {
    if (rates_.empty()) throw std::invalid_argument("QRIntensityTable: empty table");
    for (double r : rates_)
        if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("QRIntensityTable: invalid rate");
    if (!(lambda_M_buy >= 0.0) || !(lambda_M_sell >= 0.0))
        throw std::invalid_argument("QRIntensityTable: invalid market rate");
}

void write_intensity_csv(const QRIntensityTable& t, std::ostream& os) {
    os << "level,kind,own_q,opposite_regime,best_empty,rate\n";
    os.precision(17);
    for (int i = 1; i <= t.K(); ++i)
        for (EventKind k : {EventKind::limit, EventKind::cancel})
            for (int q = 0; q <= t.q_max(); ++q)
                for (int r = 0; r < 4; ++r)
                    for (int be = 0; be < (i > 1 ? 2 : 1); ++be)
                        os << i << ',' << to_string(k) << ',' << q << ',' << to_string(static_cast<Regime>(r))
                           << ',' << be << ',' << t.rate(i, k, q, static_cast<Regime>(r), be == 1) << '\n';
    os << "0,market,0,buy,0," << t.lambda_M_buy << '\n';
    os << "0,market,0,sell,0," << t.lambda_M_sell << '\n';
}

QRIntensityTable read_intensity_csv(std::istream& is, int K, int q_max, int m, int l, double lambda_M_buy,
                                    double lambda_M_sell) {
    QRIntensityTable t(K, q_max, m, l);
    t.lambda_M_buy = lambda_M_buy;
    t.lambda_M_sell = lambda_M_sell;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line.rfind("level", 0) == 0) continue;
        std::stringstream ss(line);
        std::string f[6];
        for (auto& x : f)
            if (!std::getline(ss, x, ',')) throw std::invalid_argument("intensity csv: short row at line " + std::to_string(lineno));
        const EventKind kind = kind_from_string(f[1]);
        const double rate = std::stod(f[5]);
        if (kind == EventKind::market) {
            if (f[3] == "buy") t.lambda_M_buy = rate;
            else t.lambda_M_sell = rate;
            continue;
        }
        const int level = std::stoi(f[0]);
        const int q = std::stoi(f[2]);
        const Regime reg = regime_from_string(f[3]);
        const bool be = f[4] == "1";
        if (level > K || q > q_max) continue;
        t.set_rate(level, kind, q, reg, be, rate);
        if (level == 1) t.set_rate(level, kind, q, reg, true, rate);
    }
    t.validate();
    return t;
}

QRIntensityTable default_intensity_table() {
    QRIntensityTable t(2, 30, 2, 5);
    t.lambda_M_buy = 0.3;
    t.lambda_M_sell = 0.3;
    const double mL[4] = {1.3, 1.1, 1.0, 0.9};
    const double mC[4] = {1.2, 1.05, 1.0, 0.95};
    for (int q = 0; q <= t.q_max(); ++q) {
        for (int r = 0; r < 4; ++r) {
            const auto reg = static_cast<Regime>(r);
            const double l1 = q == 0 ? 3.0 : 1.0 / (1.0 + 0.3 * q);
            const double c1 = 0.25 * q;
            for (bool be : {false, true}) {
                t.set_rate(1, EventKind::limit, q, reg, be, l1 * mL[r]);
                t.set_rate(1, EventKind::cancel, q, reg, be, c1 * mC[r]);
                const double f = be ? 1.2 : 1.0;
                t.set_rate(2, EventKind::limit, q, reg, be, f * mL[r] / (1.0 + 0.1 * q));
                t.set_rate(2, EventKind::cancel, q, reg, be, f * 0.1 * q * mC[r]);
            }
        }
    }
    return t;
}

}  // namespace qrvol
