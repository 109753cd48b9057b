#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace orbgrand {

/// Ascending stable ordering of reliability weights.
/// order[r-1] is the 0-based candidate index holding rank r (rank 1 = least
/// reliable); ties keep the lower candidate index at the lower rank.
struct RankPermutation {
    std::vector<std::uint32_t> order;
    std::vector<double> weights;  // the penalties, sorted nondecreasing
};

inline RankPermutation rank_sort(std::span<const double> weights) {
    RankPermutation rp;
    rp.order.resize(weights.size());
    std::iota(rp.order.begin(), rp.order.end(), 0u);
    for (double w : weights)
        if (std::isnan(w)) throw std::invalid_argument("rank_sort: NaN weight");
    std::stable_sort(rp.order.begin(), rp.order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return weights[a] < weights[b]; });
    rp.weights.resize(weights.size());
    for (std::size_t r = 0; r < rp.order.size(); ++r) rp.weights[r] = weights[rp.order[r]];
    return rp;
}

/// A set of distinct rank indices in [1, mu]; the logistic weight is the sum
/// of the ranks. The empty pattern has weight 0.
struct Pattern {
    std::vector<std::uint32_t> ranks;  // strictly increasing
    std::uint64_t weight = 0;
};

/// Emits every subset of {1..mu} with logistic weight <= max_weight, each
/// exactly once, in nondecreasing weight; within equal weight, fewer elements
/// first, then lexicographically smallest rank-set first. State is O(mu):
/// only the cursor tuple is kept, never a materialized pattern list.
class PatternEnumerator {
public:
    explicit PatternEnumerator(std::uint32_t mu)
        : PatternEnumerator(mu, std::uint64_t(mu) * (std::uint64_t(mu) + 1) / 2) {}

    PatternEnumerator(std::uint32_t mu, std::uint64_t max_weight)
        : mu_(mu), max_weight_(std::min(max_weight, std::uint64_t(mu) * (std::uint64_t(mu) + 1) / 2)) {}

    std::uint32_t mu() const noexcept { return mu_; }
    std::uint64_t max_weight() const noexcept { return max_weight_; }
    std::uint64_t emitted() const noexcept { return emitted_; }

    /// Next pattern in order, or nullptr once exhausted. The returned pattern
    /// is owned by the enumerator and valid until the next call.
    const Pattern* next() {
        if (exhausted_) return nullptr;
        if (!started_) {
            started_ = true;
            current_.ranks.clear();
            current_.weight = 0;  // the empty pattern comes first
        } else if (!advance()) {
            exhausted_ = true;
            return nullptr;
        }
        ++emitted_;
        return &current_;
    }

private:
    using i64 = std::int64_t;

    static i64 min_sum(i64 m) { return m * (m + 1) / 2; }
    i64 max_sum(i64 m) const { return m * i64(mu_) - m * (m - 1) / 2; }

    // Smallest-lex fill of positions [p, m) given previous part value and the
    // remaining sum; preconditions guarantee feasibility.
    void fill_suffix(std::size_t p, i64 prev, i64 remaining) {
        auto& r = current_.ranks;
        const std::size_t m = r.size();
        for (std::size_t q = p; q < m; ++q) {
            const i64 c = i64(m - q);
            // v must leave room for c-1 strictly larger parts <= mu
            i64 v = prev + 1;
            const i64 lo = remaining - (c - 1) * i64(mu_) + (c - 1) * (c - 2) / 2;
            if (lo > v) v = lo;
            r[q] = std::uint32_t(v);
            prev = v;
            remaining -= v;
        }
    }

    // First tuple of the (weight, m) cell; cell feasibility already checked.
    void enter_cell(std::uint64_t w, std::size_t m) {
        current_.weight = w;
        current_.ranks.resize(m);
        fill_suffix(0, 0, i64(w));
    }

    // Lexicographic successor within the current cell, if any.
    bool next_in_cell() {
        auto& r = current_.ranks;
        const std::size_t m = r.size();
        if (m < 2) return false;
        i64 suffix = i64(r[m - 1]);  // sum of parts from position j onward
        for (std::size_t j = m - 1; j-- > 0;) {
            suffix += i64(r[j]);
            const i64 c = i64(m - j);
            i64 v = i64(r[j]) + 1;
            const i64 lo = suffix - (c - 1) * i64(mu_) + (c - 1) * (c - 2) / 2;
            if (lo > v) v = lo;
            const i64 cap = std::min<i64>(i64(mu_), (suffix - c * (c - 1) / 2) / c);
            if (v <= cap) {
                r[j] = std::uint32_t(v);
                fill_suffix(j + 1, v, suffix - v);
                return true;
            }
        }
        return false;
    }

    bool advance() {
        if (next_in_cell()) return true;
        // next cardinality for this weight (feasible m are contiguous)
        std::uint64_t w = current_.weight;
        std::size_t m = current_.ranks.size();
        if (w > 0 && m + 1 <= mu_ && min_sum(i64(m + 1)) <= i64(w)) {
            enter_cell(w, m + 1);
            return true;
        }
        // next weight with any feasible cardinality
        for (++w; w <= max_weight_; ++w) {
            for (std::size_t mm = 1; mm <= mu_; ++mm) {
                if (min_sum(i64(mm)) > i64(w)) break;
                if (max_sum(i64(mm)) >= i64(w)) {
                    enter_cell(w, mm);
                    return true;
                }
            }
        }
        return false;
    }

    std::uint32_t mu_;
    std::uint64_t max_weight_;
    std::uint64_t emitted_ = 0;
    bool started_ = false;
    bool exhausted_ = false;
    Pattern current_;
};

}  // namespace orbgrand
