#pragma once

#include <algorithm>
#include <bit>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbgrand {

/// Bit vector over GF(2), packed 64 bits per word, LSB-first within a word.
/// Bits past size() are kept zero so whole-word operations need no masking.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t n) : n_(n), w_(word_count(n), 0) {}

    static BitVector from_bits(std::initializer_list<int> bits) {
        BitVector v(bits.size());
        std::size_t i = 0;
        for (int b : bits) v.set(i++, b != 0);
        return v;
    }

    std::size_t size() const noexcept { return n_; }

    bool get(std::size_t i) const {
        assert(i < n_);
        return (w_[i >> 6] >> (i & 63)) & 1u;
    }

    void set(std::size_t i, bool v) {
        assert(i < n_);
        const std::uint64_t m = std::uint64_t(1) << (i & 63);
        if (v)
            w_[i >> 6] |= m;
        else
            w_[i >> 6] &= ~m;
    }

    void flip(std::size_t i) {
        assert(i < n_);
        w_[i >> 6] ^= std::uint64_t(1) << (i & 63);
    }

    void clear() { std::fill(w_.begin(), w_.end(), 0); }

    bool none() const {
        for (std::uint64_t w : w_)
            if (w) return false;
        return true;
    }

    std::size_t popcount() const {
        std::size_t c = 0;
        for (std::uint64_t w : w_) c += std::size_t(std::popcount(w));
        return c;
    }

    BitVector& operator^=(const BitVector& o) {
        assert(n_ == o.n_);
        for (std::size_t i = 0; i < w_.size(); ++i) w_[i] ^= o.w_[i];
        return *this;
    }

    friend bool operator==(const BitVector&, const BitVector&) = default;

    std::span<const std::uint64_t> words() const noexcept { return w_; }
    std::span<std::uint64_t> words() noexcept { return w_; }

    std::string to_string() const {
        std::string s(n_, '0');
        for (std::size_t i = 0; i < n_; ++i)
            if (get(i)) s[i] = '1';
        return s;
    }

    static std::size_t word_count(std::size_t n) { return (n + 63) / 64; }

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

/// Parity of the AND of two equal-length word spans (i.e. <a, b> over GF(2)).
inline bool and_parity(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
    assert(a.size() == b.size());
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc ^= a[i] & b[i];
    return std::popcount(acc) & 1u;
}

/// Dense GF(2) matrix, rows packed like BitVector.
class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), stride_(BitVector::word_count(cols)), w_(rows * stride_, 0) {}

    static BitMatrix identity(std::size_t n) {
        BitMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    bool get(std::size_t r, std::size_t c) const {
        assert(r < rows_ && c < cols_);
        return (w_[r * stride_ + (c >> 6)] >> (c & 63)) & 1u;
    }

    void set(std::size_t r, std::size_t c, bool v) {
        assert(r < rows_ && c < cols_);
        const std::uint64_t m = std::uint64_t(1) << (c & 63);
        if (v)
            w_[r * stride_ + (c >> 6)] |= m;
        else
            w_[r * stride_ + (c >> 6)] &= ~m;
    }

    std::span<const std::uint64_t> row(std::size_t r) const {
        assert(r < rows_);
        return {w_.data() + r * stride_, stride_};
    }

    std::span<std::uint64_t> row(std::size_t r) {
        assert(r < rows_);
        return {w_.data() + r * stride_, stride_};
    }

    friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

    bool none() const {
        for (std::uint64_t w : w_)
            if (w) return false;
        return true;
    }

private:
    std::size_t rows_ = 0, cols_ = 0, stride_ = 0;
    std::vector<std::uint64_t> w_;
};

/// v * M over GF(2); v has M.rows() bits, result has M.cols() bits.
inline BitVector gf2_vecmat(const BitVector& v, const BitMatrix& m) {
    if (v.size() != m.rows()) throw std::invalid_argument("gf2_vecmat: dimension mismatch");
    BitVector out(m.cols());
    auto ow = out.words();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (!v.get(i)) continue;
        auto r = m.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) ow[j] ^= r[j];
    }
    return out;
}

/// M * v^T over GF(2); v has M.cols() bits, result has M.rows() bits.
/// Costs rows * cols/64 word operations.
inline BitVector gf2_matvec(const BitMatrix& m, const BitVector& v) {
    if (v.size() != m.cols()) throw std::invalid_argument("gf2_matvec: dimension mismatch");
    BitVector out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        if (and_parity(m.row(i), v.words())) out.set(i, true);
    return out;
}

/// A * B^T over GF(2); A is a x n, B is b x n, result a x b.
inline BitMatrix gf2_mul_bt(const BitMatrix& a, const BitMatrix& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("gf2_mul_bt: dimension mismatch");
    BitMatrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j)
            if (and_parity(a.row(i), b.row(j))) out.set(i, j, true);
    return out;
}

}  // namespace orbgrand
