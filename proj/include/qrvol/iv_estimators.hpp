#pragma once

#include "qrvol/lob_core.hpp"

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qrvol {

enum class IQVariant { as_printed, textbook };

struct EstimatorParams {
    std::optional<int> q;
    std::optional<int> N;
    std::optional<int> M;
    std::optional<int> h;
    std::optional<int> s;
    std::optional<int> m_scales;
    std::optional<double> c1;
    std::optional<double> c2;
    std::optional<double> bandwidth;  // seconds
    std::string kernel;
    // knob -> "feasible", "override", "default", "clamped", "fallback"
    std::map<std::string, std::string> provenance;
};

struct TuningInputs {
    double iv_hat = 0.0;
    double iq_hat = 0.0;
    double omega2_hat = 0.0;
    double omega4_hat = 0.0;
    size_t n = 0;
    double ma1_phi = 0.0;
    double ma1_sigma2 = 0.0;
    std::map<std::string, std::string> source;
    std::vector<std::string> diagnostics;
};

struct IVEstimate {
    double value = 0.0;
    std::string estimator_id;
    EstimatorParams params_used;
    std::map<std::string, double> diagnostics;
    std::vector<std::string> flags;
};

struct MA1Fit {
    double phi = 0.0;
    double sigma2_w = 0.0;
    double neg_loglik = 0.0;  // profile value per observation
    bool ok = false;
};

// Exact Gaussian MA(1) maximum likelihood, x_t = w_t + φ w_{t-1}, no mean.
MA1Fit fit_ma1(const std::vector<double>& x);

struct TuningOptions {
    double subsample_seconds = 300.0;
    IQVariant iq_variant = IQVariant::as_printed;
};

TuningInputs feasible_tuning(const LogPriceGrid& grid, const TuningOptions& opts = {});

// (1/q) Σ_{j=q}^{n} (p_j - p_{j-q})^2, i.e. the average over the q offsets
// of sparse realized variances.
double subsampled_sum(const std::vector<double>& p, size_t q);

// Fourier machinery shared with the spot estimator.
// X_k = Σ_j exp(-i k t_j) Δp_j with t_j = 2πj/n, for k = 0..n-1.
std::vector<std::complex<double>> return_fourier_coefficients(const std::vector<double>& returns);
// Cut-off minimizing the Gaussian-circulant MSE of the Fejér estimator.
int select_fourier_cutoff(size_t n, double iv_hat, double omega2_hat);

// Tukey-Hanning-2 kernel and its constants a, b, c.
double tukey_hanning2(double x);
struct KernelConstants {
    double a, b, c;
};
const KernelConstants& th2_constants();

IVEstimate iv_realized(const LogPriceGrid& g, const TuningInputs& t, const EstimatorParams& o = {});
IVEstimate iv_bias_corrected(const LogPriceGrid& g, const TuningInputs& t, const EstimatorParams& o = {});
IVEstimate iv_fourier(const LogPriceGrid& g, const TuningInputs& t, const EstimatorParams& o = {});
IVEstimate iv_mle(const LogPriceGrid& g, const TuningInputs& t, const EstimatorParams& o = {});
IVEstimate iv_two_scale(const LogPriceGrid& g, const TuningInputs& t, const EstimatorParams& o = {});
IVEstimate iv_multi_scale(const LogPriceGrid& g, const TuningInputs& t, const EstimatorParams& o = {});
IVEstimate iv_kernel(const LogPriceGrid& g, const TuningInputs& t, const EstimatorParams& o = {});
IVEstimate iv_preaveraging(const LogPriceGrid& g, const TuningInputs& t, const EstimatorParams& o = {});
IVEstimate iv_alternation(const LogPriceGrid& g, const TuningInputs& t, const EstimatorParams& o = {});
IVEstimate iv_range(const LogPriceGrid& g, const TuningInputs& t, const EstimatorParams& o = {});
IVEstimate iv_unified(const LogPriceGrid& g, const TuningInputs& t, const EstimatorParams& o = {});

std::vector<double> multi_scale_weights(int q);

}  // namespace qrvol
