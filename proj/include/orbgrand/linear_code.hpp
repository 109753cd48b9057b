#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "orbgrand/bits.hpp"
#include "orbgrand/stats.hpp"

namespace orbgrand {

using InfoWord = BitVector;
using Codeword = BitVector;

/// Default degree-12 CRC generator (x^12 + x^11 + x^3 + x^2 + x + 1), the
/// classic telecom CRC-12. Any proper generator of matching degree works.
inline constexpr std::uint64_t kDefaultCrc12Poly = 0x180F;

enum class CodeKind { Rlc, Crc, FullSpace };

inline const char* to_string(CodeKind k) {
    switch (k) {
        case CodeKind::Rlc: return "rlc";
        case CodeKind::Crc: return "crc";
        case CodeKind::FullSpace: return "full";
    }
    return "?";
}

/// Construction metadata, serializable as flat `code.*` config keys.
struct CodeDescriptor {
    CodeKind kind = CodeKind::Rlc;
    std::size_t n = 0;
    std::size_t k = 0;
    std::uint64_t seed = 0;  // RLC only
    std::uint64_t poly = 0;  // CRC only: coefficient mask, bit i = coefficient of x^i

    std::string to_config() const {
        std::ostringstream os;
        os << "code.kind = " << orbgrand::to_string(kind) << '\n';
        os << "code.n = " << n << '\n';
        os << "code.k = " << k << '\n';
        if (kind == CodeKind::Rlc) os << "code.seed = " << seed << '\n';
        if (kind == CodeKind::Crc) {
            os << "code.poly = 0x" << std::hex << std::uppercase << poly << '\n';
        }
        return os.str();
    }

    std::uint64_t stable_hash() const {
        std::uint64_t h = splitmix64(std::uint64_t(kind) + 1);
        h = splitmix64(h ^ n);
        h = splitmix64(h ^ k);
        h = splitmix64(h ^ (kind == CodeKind::Crc ? poly : seed));
        return h;
    }
};

/// Binary linear block code: systematic generator G = [I_k | P],
/// parity check H = [P^T | I_{n-k}], and the membership function H c^T = 0.
class LinearCode {
public:
    /// Random linear code. P is filled with fair coin flips from a
    /// std::mt19937_64 seeded with `seed`, row-major, one engine draw per bit
    /// (LSB of each draw). Same (n, k, seed) always yields the same code.
    static LinearCode random_linear(std::size_t n, std::size_t k, std::uint64_t seed) {
        check_dims(n, k);
        BitMatrix p(k, n - k);
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < n - k; ++j) p.set(i, j, rng() & 1u);
        return LinearCode({CodeKind::Rlc, n, k, seed, 0}, p);
    }

    /// Systematic CRC code: codeword = [data | remainder of data * x^{n-k} mod poly].
    /// `poly` is the full coefficient mask (bit i = coefficient of x^i); its degree
    /// must equal n-k and both the leading and trailing coefficients must be 1.
    /// Info bit i carries the coefficient of x^{n-1-i} (transmission order =
    /// descending powers), so membership is equivalent to a zero CRC remainder.
    static LinearCode crc(std::size_t n, std::size_t k, std::uint64_t poly) {
        check_dims(n, k);
        const std::size_t r = n - k;
        if (r > 63) throw std::invalid_argument("crc: n-k must be <= 63");
        if (poly == 0 || std::size_t(std::bit_width(poly)) - 1 != r)
            throw std::invalid_argument("crc: polynomial degree must equal n-k");
        if (!(poly & 1u)) throw std::invalid_argument("crc: trailing coefficient must be 1");
        BitMatrix p(k, r);
        for (std::size_t i = 0; i < k; ++i) {
            // remainder of x^{n-1-i} mod poly; parity bit j holds the x^{r-1-j} coefficient
            const std::uint64_t rem = x_pow_mod(n - 1 - i, poly, r);
            for (std::size_t j = 0; j < r; ++j) p.set(i, j, (rem >> (r - 1 - j)) & 1u);
        }
        return LinearCode({CodeKind::Crc, n, k, 0, poly}, p);
    }

    /// The trivial k = n code whose codebook is the whole space (H has no rows).
    /// Used for uncoded baselines; every word passes the membership check.
    static LinearCode full_space(std::size_t n) {
        if (n == 0) throw std::invalid_argument("full_space: n must be positive");
        LinearCode c;
        c.desc_ = {CodeKind::FullSpace, n, n, 0, 0};
        c.generator_ = BitMatrix::identity(n);
        c.parity_check_ = BitMatrix(0, n);
        return c;
    }

    static LinearCode from_descriptor(const CodeDescriptor& d) {
        switch (d.kind) {
            case CodeKind::Rlc: return random_linear(d.n, d.k, d.seed);
            case CodeKind::Crc: return crc(d.n, d.k, d.poly);
            case CodeKind::FullSpace: return full_space(d.n);
        }
        throw std::invalid_argument("from_descriptor: bad kind");
    }

    std::size_t length() const noexcept { return desc_.n; }
    std::size_t dimension() const noexcept { return desc_.k; }
    std::size_t redundancy() const noexcept { return desc_.n - desc_.k; }
    double rate() const noexcept { return double(desc_.k) / double(desc_.n); }
    const CodeDescriptor& descriptor() const noexcept { return desc_; }
    const BitMatrix& generator() const noexcept { return generator_; }
    const BitMatrix& parity_check() const noexcept { return parity_check_; }

    /// c = u G over GF(2).
    Codeword encode(const InfoWord& u) const {
        if (u.size() != desc_.k) throw std::invalid_argument("encode: info word length mismatch");
        return gf2_vecmat(u, generator_);
    }

    BitVector syndrome(const Codeword& c) const {
        if (c.size() != desc_.n) throw std::invalid_argument("syndrome: word length mismatch");
        return gf2_matvec(parity_check_, c);
    }

    /// Membership check: H c^T = 0. Costs O(n (n-k) / w) word operations.
    bool is_codeword(const Codeword& c) const {
        if (c.size() != desc_.n) throw std::invalid_argument("is_codeword: word length mismatch");
        for (std::size_t i = 0; i < parity_check_.rows(); ++i)
            if (and_parity(parity_check_.row(i), c.words())) return false;
        return true;
    }

private:
    LinearCode() = default;

    LinearCode(CodeDescriptor desc, const BitMatrix& p) : desc_(desc) {
        const std::size_t n = desc.n, k = desc.k, r = n - k;
        generator_ = BitMatrix(k, n);
        parity_check_ = BitMatrix(r, n);
        for (std::size_t i = 0; i < k; ++i) {
            generator_.set(i, i, true);
            for (std::size_t j = 0; j < r; ++j) generator_.set(i, k + j, p.get(i, j));
        }
        for (std::size_t j = 0; j < r; ++j) {
            parity_check_.set(j, k + j, true);
            for (std::size_t i = 0; i < k; ++i) parity_check_.set(j, i, p.get(i, j));
        }
        // G H^T = 0 by construction; verify by direct multiplication anyway.
        if (!gf2_mul_bt(generator_, parity_check_).none())
            throw std::logic_error("linear code construction: G H^T != 0");
    }

    static void check_dims(std::size_t n, std::size_t k) {
        if (k == 0 || k >= n) throw std::invalid_argument("linear code: need 0 < k < n");
    }

    // remainder of x^e mod poly (deg = degree of poly), as a deg-bit value
    static std::uint64_t x_pow_mod(std::size_t e, std::uint64_t poly, std::size_t deg) {
        std::uint64_t rem = 1;  // x^0
        for (std::size_t t = 0; t < e; ++t) {
            rem <<= 1;
            if (rem >> deg) rem ^= poly;
        }
        return rem;
    }

    CodeDescriptor desc_;
    BitMatrix generator_;
    BitMatrix parity_check_;
};

}  // namespace orbgrand
