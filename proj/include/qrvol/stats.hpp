#pragma once

#include <functional>
#include <vector>

namespace qrvol {

double mean(const std::vector<double>& x);
// Unbiased (n-1) sample variance; 0 for fewer than two values.
double sample_variance(const std::vector<double>& x);
double standard_error(const std::vector<double>& x);

struct TTestResult {
    double statistic = 0.0;
    double df = 0.0;
    double p_value = 1.0;
};

// Welch two-sample t-test, two-sided.  Zero variance in both samples gives
// p = 1 for equal means and p = 0 otherwise.
TTestResult welch_ttest(const std::vector<double>& a, const std::vector<double>& b);

struct KSResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// One-sample Kolmogorov-Smirnov test against a continuous CDF.
KSResult ks_test(std::vector<double> x, const std::function<double(double)>& cdf);

// Asymptotic Kolmogorov tail P(K > λ).
double kolmogorov_tail(double lambda);

}  // namespace qrvol
