#include "qrvol/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qrvol {

double mean(const std::vector<double>& x) {
    if (x.empty()) throw std::invalid_argument("mean: empty sample");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double sample_variance(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double standard_error(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    return std::sqrt(sample_variance(x) / static_cast<double>(x.size()));
}

TTestResult welch_ttest(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_ttest: need at least two values per sample");
    const double ma = mean(a), mb = mean(b);
    const double va = sample_variance(a) / static_cast<double>(a.size());
    const double vb = sample_variance(b) / static_cast<double>(b.size());
    TTestResult r;
    const double se2 = va + vb;
    if (!(se2 > 0.0)) {
        r.p_value = ma == mb ? 1.0 : 0.0;
        r.statistic = ma == mb ? 0.0 : std::copysign(INFINITY, ma - mb);
        return r;
    }
    r.statistic = (ma - mb) / std::sqrt(se2);
    r.df = se2 * se2 /
           (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
    const boost::math::students_t dist(r.df);
    r.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic))), 0.0, 1.0);
    return r;
}

double kolmogorov_tail(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 0.2) return 1.0;
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

KSResult ks_test(std::vector<double> x, const std::function<double(double)>& cdf) {
    if (x.empty()) throw std::invalid_argument("ks_test: empty sample");
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    KSResult r;
    r.statistic = d;
    const double sn = std::sqrt(n);
    r.p_value = kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
    return r;
}

}  // namespace qrvol
