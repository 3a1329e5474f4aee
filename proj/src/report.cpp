#include "qrvol/report.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace qrvol {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_summary_csv(const ExperimentReport& r, std::ostream& os) {
    os << "estimator,series,type,n_ok,n_failed,truth,mean_estimate,rel_bias,rel_mse\n";
    for (const auto& row : r.rows)
        os << row.estimator_id << ',' << to_string(row.series) << ',' << (row.spot ? "spot" : "integrated") << ','
           << row.n_ok << ',' << row.n_failed << ',' << fmt(row.truth) << ',' << fmt(row.mean_estimate) << ','
           << fmt(row.rel_bias) << ',' << fmt(row.rel_mse) << '\n';
}

void write_rankings_csv(const ExperimentReport& r, std::ostream& os) {
    os << "type,series,metric,rank,estimator,value\n";
    for (const auto& rk : r.rankings)
        for (size_t i = 0; i < rk.order.size(); ++i)
            os << (rk.spot ? "spot" : "integrated") << ',' << to_string(rk.series) << ',' << rk.metric << ','
               << i + 1 << ',' << rk.order[i] << ',' << fmt(rk.values[i]) << '\n';
}

void write_ttests_csv(const std::vector<PValueMatrix>& ms, std::ostream& os) {
    os << "type,series,estimator_a,estimator_b,p_value\n";
    for (const auto& m : ms)
        for (size_t i = 0; i < m.ids.size(); ++i)
            for (size_t j = i + 1; j < m.ids.size(); ++j)
                os << (m.spot ? "spot" : "integrated") << ',' << to_string(m.series) << ',' << m.ids[i] << ','
                   << m.ids[j] << ',' << fmt(m.p[i][j]) << '\n';
}

void write_estimates_csv(const ExperimentReport& r, std::ostream& os) {
    os << "estimator,series,path,estimate\n";
    for (const auto& row : r.rows)
        for (size_t i = 0; i < row.estimates.size(); ++i)
            os << row.estimator_id << ',' << to_string(row.series) << ',' << row.path_index[i] << ','
               << fmt(row.estimates[i]) << '\n';
}

void write_spot_paths_csv(const ExperimentReport& r, std::ostream& os) {
    os << "estimator,series,time,value,truth,edge\n";
    for (const auto& row : r.rows) {
        if (!row.sample_path) continue;
        const auto& p = *row.sample_path;
        for (size_t j = 0; j < p.times.size(); ++j)
            os << row.estimator_id << ',' << to_string(row.series) << ',' << fmt(p.times[j]) << ','
               << fmt(p.values[j]) << ',' << fmt(r.truth.sigma2_at(row.series, p.times[j] / r.horizon)) << ','
               << (p.edge[j] ? 1 : 0) << '\n';
    }
}

void write_truth_csv(const Truth& t, std::ostream& os) {
    os << "regime,start,end,series,sigma2,std_error\n";
    for (size_t k = 0; k < t.sigma2.size(); ++k)
        for (int s = 0; s < 3; ++s)
            os << k << ',' << fmt(t.boundaries[k]) << ',' << fmt(t.boundaries[k + 1]) << ','
               << to_string(static_cast<SeriesKind>(s)) << ',' << fmt(t.sigma2[k][s]) << ','
               << fmt(t.std_error[k][s]) << '\n';
}

std::string render_ranking_tables(const ExperimentReport& r) {
    std::ostringstream os;
    const char* titles[2][2] = {{"Integrated variance estimators - relative bias",
                                 "Integrated variance estimators - relative MSE"},
                                {"Spot variance estimators - relative integrated bias",
                                 "Spot variance estimators - relative integrated MSE"}};
    for (int spot = 0; spot < 2; ++spot) {
        for (int metric = 0; metric < 2; ++metric) {
            std::vector<const Ranking*> cols;
            for (const auto& rk : r.rankings)
                if (rk.spot == (spot == 1) && rk.metric == (metric ? "mse" : "bias")) cols.push_back(&rk);
            if (cols.empty()) continue;
            os << titles[spot][metric] << '\n';
            for (const auto* c : cols) os << std::left << std::setw(36) << to_string(c->series);
            os << '\n';
            size_t depth = 0;
            for (const auto* c : cols) depth = std::max(depth, c->order.size());
            for (size_t i = 0; i < depth; ++i) {
                for (const auto* c : cols) {
                    std::string cell;
                    if (i < c->order.size()) {
                        // Show the signed bias.
                        double v = c->values[i];
                        if (metric == 0) {
                            for (const auto& row : r.rows)
                                if (row.estimator_id == c->order[i] && row.series == c->series) v = row.rel_bias;
                        }
                        std::ostringstream cs;
                        cs << std::left << std::setw(20) << c->order[i] << std::right << std::setw(14) << fmt(v);
                        cell = cs.str();
                    }
                    os << std::left << std::setw(36) << cell;
                }
                os << '\n';
            }
            os << '\n';
        }
    }
    return os.str();
}

void write_noise_csv(const std::vector<std::string>& labels, const std::vector<std::vector<NoiseTestResult>>& rows,
                     std::ostream& os) {
    os << "series,frequency,statistic,p_value,reject,regularized\n";
    for (size_t i = 0; i < rows.size(); ++i)
        for (const auto& r : rows[i])
            os << labels[i] << ',' << fmt(r.frequency) << ',' << fmt(r.statistic) << ',' << fmt(r.p_value) << ','
               << (r.reject_at_5pct ? 1 : 0) << ',' << (r.regularized ? 1 : 0) << '\n';
}

void write_gmm_csv(const GMMResult& g, std::ostream& os) {
    os << "quantity,value\n";
    os << "theta," << fmt(g.theta) << '\n';
    os << "theta_reinit," << fmt(g.theta_reinit) << '\n';
    os << "step1_theta," << fmt(g.step1_theta) << '\n';
    os << "step1_theta_reinit," << fmt(g.step1_theta_reinit) << '\n';
    os << "step1_objective," << fmt(g.step1_objective) << '\n';
    os << "step2_objective," << fmt(g.step2_objective) << '\n';
    os << "W11," << fmt(g.W[0][0]) << "\nW12," << fmt(g.W[0][1]) << "\nW22," << fmt(g.W[1][1]) << '\n';
    os << "identity_fallback," << (g.identity_fallback ? 1 : 0) << '\n';
    os << "evaluations," << g.evaluations << '\n';
}

void write_vwap_csv(const VarianceRatioResult& v, std::ostream& os) {
    os << "quantity,value\n";
    os << "var_a," << fmt(v.var_a) << "\nvar_b," << fmt(v.var_b) << '\n';
    os << "empirical_ratio," << fmt(v.empirical_ratio) << '\n';
    os << "sigma2_a," << fmt(v.sigma2_a) << "\nsigma2_b," << fmt(v.sigma2_b) << '\n';
    os << "predicted_ratio," << fmt(v.predicted_ratio) << '\n';
}

void write_shortfalls_csv(const VarianceRatioResult& v, std::ostream& os) {
    os << "model,run,shortfall\n";
    for (size_t i = 0; i < v.shortfalls_a.size(); ++i) os << "A," << i << ',' << fmt(v.shortfalls_a[i]) << '\n';
    for (size_t i = 0; i < v.shortfalls_b.size(); ++i) os << "B," << i << ',' << fmt(v.shortfalls_b[i]) << '\n';
}

void write_tickpath_csv(const TickPath& p, std::ostream& os) {
    os << "type,time,bid_or_price,ask_or_volume,bid_vol,ask_vol\n";
    for (const auto& q : p.quotes)
        os << "Q," << fmt(q.timestamp) << ',' << fmt(q.best_bid) << ',' << fmt(q.best_ask) << ',' << fmt(q.bid_vol)
           << ',' << fmt(q.ask_vol) << '\n';
    for (const auto& t : p.trades) os << "T," << fmt(t.timestamp) << ',' << fmt(t.price) << ',' << fmt(t.volume) << ",,\n";
}

void write_grid_csv(const LogPriceGrid& g, std::ostream& os) {
    os << "time,log_price\n";
    for (size_t i = 0; i < g.values.size(); ++i) os << fmt(static_cast<double>(i) * g.mesh) << ',' << fmt(g.values[i]) << '\n';
}

void write_spot_path_csv(const SpotPath& s, std::ostream& os) {
    os << "time,value\n";
    for (size_t j = 0; j < s.times.size(); ++j) os << fmt(s.times[j]) << ',' << fmt(s.values[j]) << '\n';
}

}  // namespace qrvol
