#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace orbgrand {

/// splitmix64 finalizer; full-avalanche 64-bit mix.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Per-trial seed: splitmix64(splitmix64(splitmix64(base) ^ cell) ^ trial).
/// Each cell gets an independent stream, so adding cells to a config never
/// perturbs the trials of existing cells.
inline std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t cell_id, std::uint64_t trial_index) {
    return splitmix64(splitmix64(splitmix64(base_seed) ^ cell_id) ^ trial_index);
}

namespace detail {

// Regularized incomplete beta via Lentz continued fraction.
inline double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-14, kFpMin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double reg_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("reg_incomplete_beta: a, b > 0 required");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(a, b, x) / a;
    return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

/// One-sided Clopper-Pearson upper confidence bound on a binomial proportion:
/// the Beta(errors+1, trials-errors) quantile at `confidence`.
inline double clopper_pearson_upper(std::uint64_t errors, std::uint64_t trials, double confidence = 0.95) {
    if (trials == 0) throw std::invalid_argument("clopper_pearson_upper: trials must be positive");
    if (errors > trials) throw std::invalid_argument("clopper_pearson_upper: errors > trials");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("clopper_pearson_upper: confidence must be in (0,1)");
    if (errors == trials) return 1.0;
    const double a = double(errors) + 1.0, b = double(trials - errors);
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (reg_incomplete_beta(a, b, mid) < confidence)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace orbgrand
