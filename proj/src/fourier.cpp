#include "qrvol/iv_estimators.hpp"

#include <fftw3.h>

#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace qrvol {

namespace {
std::mutex fftw_mu;
}

std::vector<std::complex<double>> return_fourier_coefficients(const std::vector<double>& r) {
    const int n = static_cast<int>(r.size());
    std::vector<std::complex<double>> X(n);
    if (n == 0) return X;
    std::vector<double> in(r);
    std::vector<fftw_complex> out(n / 2 + 1);
    fftw_plan plan;
    {
        // The planner is not thread-safe; execution is.
        std::lock_guard<std::mutex> lk(fftw_mu);
        plan = fftw_plan_dft_r2c_1d(n, in.data(), out.data(), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lk(fftw_mu);
        fftw_destroy_plan(plan);
    }
    // Returns are indexed j = 1..n, hence the extra phase exp(-2πik/n).
    for (int k = 0; k <= n / 2; ++k) {
        const double ang = -2.0 * std::numbers::pi * k / n;
        const std::complex<double> ph(std::cos(ang), std::sin(ang));
        X[k] = ph * std::complex<double>(out[k][0], out[k][1]);
        if (k > 0 && k < n - k) X[n - k] = std::conj(X[k]);
    }
    return X;
}

int select_fourier_cutoff(size_t n_sz, double iv_hat, double omega2_hat) {
    const auto n = static_cast<long>(n_sz);
    const long lo = std::max<long>(1, n / 100), hi = n / 2;
    if (hi < lo || !(iv_hat > 0.0)) return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(n)))));
    const double v = iv_hat / static_cast<double>(n);
    const double w2 = std::max(0.0, omega2_hat);
    // Prefix sums over |k| <= N of g, |k| g, λ², |k| λ², k² λ², with
    // g_k = 1 - cos(2πk/n) and λ_k = v + 2ω²g_k.
    double A0 = 0, A1 = 0, B0 = 0, B1 = 0, B2 = 0;
    long bestN = hi;
    double best = std::numeric_limits<double>::infinity();
    const double nn = static_cast<double>(n);
    for (long k = 0; k <= hi; ++k) {
        const double g = 1.0 - std::cos(2.0 * std::numbers::pi * k / nn);
        const double lam = v + 2.0 * w2 * g;
        const double mult = k == 0 ? 1.0 : 2.0;
        const double kd = static_cast<double>(k);
        A0 += mult * g;
        A1 += mult * kd * g;
        B0 += mult * lam * lam;
        B1 += mult * kd * lam * lam;
        B2 += mult * kd * kd * lam * lam;
        if (k < lo) continue;
        const double a = kd + 1.0;
        const double bias = 2.0 * nn * w2 / a * (A0 - A1 / a);
        const double var = 2.0 * (nn / a) * (nn / a) * (B0 - 2.0 * B1 / a + B2 / (a * a));
        const double mse = bias * bias + var;
        if (mse < best) {
            best = mse;
            bestN = k;
        }
    }
    return static_cast<int>(bestN);
}

}  // namespace qrvol
