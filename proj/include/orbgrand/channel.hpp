#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "orbgrand/linear_code.hpp"

namespace orbgrand {

/// Highest correlation accepted by config validation; keeps block covariances
/// well-conditioned.
inline constexpr double kMaxRho = 0.999;

/// Stationary Gauss-Markov (AR(1)) noise statistics. `sigma2_real` is the
/// per-real-dimension variance on a linear scale; each component of the
/// complex noise has covariance sigma2_real * rho^|i-j|.
struct GaussMarkovChannel {
    double rho;
    double sigma2_real;

    GaussMarkovChannel(double rho_, double sigma2) : rho(rho_), sigma2_real(sigma2) {
        if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("channel: rho must be in [0, 1)");
        if (!(sigma2_real > 0.0)) throw std::invalid_argument("channel: sigma2_real must be positive");
    }
};

enum class Modulation { Bpsk };

struct SymbolVector {
    std::vector<std::complex<double>> values;
    Modulation modulation = Modulation::Bpsk;
    int bits_per_symbol = 1;
};

struct ReceivedSignal {
    std::vector<std::complex<double>> values;
};

/// BPSK mapping convention: bit 0 -> +1, bit 1 -> -1 (real axis, unit energy).
inline SymbolVector modulate_bpsk(const Codeword& c) {
    SymbolVector x;
    x.values.resize(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) x.values[i] = {c.get(i) ? -1.0 : 1.0, 0.0};
    return x;
}

/// Hard bit decisions from the real parts; Re >= 0 demaps to bit 0.
inline Codeword demap_bpsk(std::span<const std::complex<double>> values) {
    Codeword c(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i].real() < 0.0) c.set(i, true);
    return c;
}

inline Codeword demap_bpsk(const SymbolVector& x) { return demap_bpsk(std::span(x.values)); }
inline Codeword demap_bpsk(const ReceivedSignal& y) { return demap_bpsk(std::span(y.values)); }

/// Eb/N0 calibration used throughout: unit symbol energy, complex noise with
/// variance sigma2 per real dimension, so
///   sigma2 = 1 / (2 * rate * bits_per_symbol * 10^(ebno_db/10)).
inline double ebno_to_sigma2(double ebno_db, double rate, int bits_per_symbol) {
    if (!(rate > 0.0 && rate <= 1.0)) throw std::invalid_argument("ebno_to_sigma2: rate must be in (0, 1]");
    if (bits_per_symbol < 1) throw std::invalid_argument("ebno_to_sigma2: bits_per_symbol must be >= 1");
    if (!std::isfinite(ebno_db)) throw std::invalid_argument("ebno_to_sigma2: ebno_db must be finite");
    return 1.0 / (2.0 * rate * double(bits_per_symbol) * std::pow(10.0, ebno_db / 10.0));
}

/// Complex Gauss-Markov noise: real and imaginary parts are independent
/// stationary AR(1) chains,
///   N_1 ~ Normal(0, sigma2),  N_t = rho N_{t-1} + sqrt(1 - rho^2) W_t,
/// with W_t ~ Normal(0, sigma2), giving covariance sigma2 * rho^|i-j| exactly.
/// Draw order per position: real innovation, then imaginary.
inline std::vector<std::complex<double>> gm_noise(std::size_t n_s, const GaussMarkovChannel& ch,
                                                  std::mt19937_64& rng) {
    if (n_s == 0) throw std::invalid_argument("gm_noise: length must be >= 1");
    std::normal_distribution<double> gauss(0.0, std::sqrt(ch.sigma2_real));
    std::vector<std::complex<double>> out(n_s);
    const double blend = std::sqrt(1.0 - ch.rho * ch.rho);
    double re = gauss(rng);
    double im = gauss(rng);
    out[0] = {re, im};
    for (std::size_t t = 1; t < n_s; ++t) {
        re = ch.rho * re + blend * gauss(rng);
        im = ch.rho * im + blend * gauss(rng);
        out[t] = {re, im};
    }
    return out;
}

/// Y = x + N with identity channel matrix.
inline ReceivedSignal transmit(const SymbolVector& x, const GaussMarkovChannel& ch, std::mt19937_64& rng) {
    ReceivedSignal y;
    y.values = gm_noise(x.values.size(), ch, rng);
    for (std::size_t i = 0; i < x.values.size(); ++i) y.values[i] += x.values[i];
    return y;
}

namespace detail {

// In-place lower Cholesky factor of a row-major b x b SPD matrix.
inline std::vector<double> cholesky(std::size_t b, const std::vector<double>& m) {
    std::vector<double> l(b * b, 0.0);
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = m[i * b + j];
            for (std::size_t t = 0; t < j; ++t) s -= l[i * b + t] * l[j * b + t];
            if (i == j) {
                if (!(s > 0.0)) throw std::runtime_error("cholesky: matrix not positive definite");
                l[i * b + i] = std::sqrt(s);
            } else {
                l[i * b + j] = s / l[j * b + j];
            }
        }
    }
    return l;
}

// Inverse of an SPD matrix from its lower Cholesky factor (solve L L^T X = I).
inline std::vector<double> spd_inverse(std::size_t b, const std::vector<double>& l) {
    std::vector<double> inv(b * b, 0.0);
    std::vector<double> col(b);
    for (std::size_t c = 0; c < b; ++c) {
        for (std::size_t i = 0; i < b; ++i) {
            double s = (i == c) ? 1.0 : 0.0;
            for (std::size_t t = 0; t < i; ++t) s -= l[i * b + t] * col[t];
            col[i] = s / l[i * b + i];
        }
        for (std::size_t ii = b; ii-- > 0;) {
            double s = col[ii];
            for (std::size_t t = ii + 1; t < b; ++t) s -= l[t * b + ii] * col[t];
            col[ii] = s / l[ii * b + ii];
        }
        for (std::size_t i = 0; i < b; ++i) inv[i * b + c] = col[i];
    }
    return inv;
}

}  // namespace detail

/// Toeplitz noise covariance of a b-symbol block, its precision (inverse),
/// and log-determinant.
struct BlockCovariance {
    std::size_t b = 0;
    std::vector<double> matrix;     // row-major, entries sigma2 * rho^|i-j|
    std::vector<double> precision;  // row-major inverse
    double log_det = 0.0;
};

inline BlockCovariance block_covariance(std::size_t b, const GaussMarkovChannel& ch) {
    if (b < 1) throw std::invalid_argument("block_covariance: b must be >= 1");
    BlockCovariance cov;
    cov.b = b;
    cov.matrix.resize(b * b);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < b; ++j)
            cov.matrix[i * b + j] = ch.sigma2_real * std::pow(ch.rho, double(i > j ? i - j : j - i));
    const auto l = detail::cholesky(b, cov.matrix);
    cov.precision = detail::spd_inverse(b, l);
    cov.log_det = 0.0;
    for (std::size_t i = 0; i < b; ++i) cov.log_det += 2.0 * std::log(l[i * b + i]);
    return cov;
}

/// Normalized differential entropy rate of the length-n Gauss-Markov noise,
/// nats per symbol per real component:
///   1/2 log(2 e pi) + 1/2 log(sigma2) + 1/2 (1 - 1/n) log(1 - rho^2).
inline double entropy_rate(std::size_t n, const GaussMarkovChannel& ch) {
    if (n < 1) throw std::invalid_argument("entropy_rate: n must be >= 1");
    return 0.5 * std::log(2.0 * std::numbers::e * std::numbers::pi) + 0.5 * std::log(ch.sigma2_real) +
           0.5 * (1.0 - 1.0 / double(n)) * std::log(1.0 - ch.rho * ch.rho);
}

/// Same expression with the correlation-term multiplier (1 - 1/b): the
/// entropy rate when the noise is truly independent across b-symbol blocks.
inline double block_entropy_rate(std::size_t b, const GaussMarkovChannel& ch) {
    if (b < 1) throw std::invalid_argument("block_entropy_rate: b must be >= 1");
    return 0.5 * std::log(2.0 * std::numbers::e * std::numbers::pi) + 0.5 * std::log(ch.sigma2_real) +
           0.5 * (1.0 - 1.0 / double(b)) * std::log(1.0 - ch.rho * ch.rho);
}

}  // namespace orbgrand
