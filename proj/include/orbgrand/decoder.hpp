#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "orbgrand/channel.hpp"
#include "orbgrand/linear_code.hpp"
#include "orbgrand/pattern.hpp"

namespace orbgrand {

/// Abandonment threshold default: patterns fetched before declaring failure.
inline constexpr std::uint64_t kDefaultTau = 1'000'000;

/// Penalties below this clamp to zero so likelihood ties rank determinately.
inline constexpr double kPenaltyClampEps = 1e-12;

/// Candidate-id convention (BPSK): bit p of the id is the demapped bit of
/// symbol p within the block, so id 0 is the all (+1) tuple and the id's bits
/// are exactly the codeword bits the block contributes.
struct BlockCandidate {
    std::uint32_t block;    // 0-based block index
    std::uint32_t symbols;  // canonical candidate id of the b-symbol tuple
    double penalty;         // log-likelihood gap to the block's hard demodulation, >= 0
};

/// Hard demodulations plus the mu = (2^b - 1) * n_s / b alternative block
/// substitutions, rank-sorted by penalty. Candidates are stored block-major
/// with ids ascending, skipping each block's hard id.
struct CandidateTable {
    std::size_t block_size = 0;
    std::size_t num_blocks = 0;
    std::vector<std::uint32_t> hard;          // per-block hard demod id
    std::vector<BlockCandidate> candidates;   // size mu
    RankPermutation rank;

    std::size_t mu() const noexcept { return candidates.size(); }
};

/// Contiguous non-overlapping b-symbol views in transmission order.
inline std::vector<std::span<const std::complex<double>>> partition_blocks(const ReceivedSignal& y,
                                                                           std::size_t b) {
    if (b < 1) throw std::invalid_argument("partition_blocks: b must be >= 1");
    if (y.values.size() % b != 0)
        throw std::invalid_argument("partition_blocks: b must divide the signal length");
    std::vector<std::span<const std::complex<double>>> blocks;
    blocks.reserve(y.values.size() / b);
    for (std::size_t off = 0; off < y.values.size(); off += b)
        blocks.push_back(std::span(y.values).subspan(off, b));
    return blocks;
}

/// Joint log-likelihood of every candidate tuple t in {0,1}^b for a received
/// block, up to a constant shared by all candidates:
///   log p(y | t) = -1/2 (Re(y) - s(t))^T precision (Re(y) - s(t)) + const.
/// The imaginary component carries no BPSK signal and contributes equally to
/// every candidate, so it is dropped. Uniform prior: posterior ordering
/// equals likelihood ordering.
inline std::vector<double> block_log_likelihoods(std::span<const std::complex<double>> y_block,
                                                 const BlockCovariance& cov,
                                                 Modulation mod = Modulation::Bpsk) {
    if (mod != Modulation::Bpsk) throw std::invalid_argument("block_log_likelihoods: only BPSK supported");
    const std::size_t b = y_block.size();
    if (b != cov.b) throw std::invalid_argument("block_log_likelihoods: block/covariance size mismatch");
    if (b > 16) throw std::invalid_argument("block_log_likelihoods: candidate set exceeds 2^16 cap");
    const std::size_t num = std::size_t(1) << b;
    std::vector<double> ll(num);
    std::vector<double> diff(b);
    for (std::size_t t = 0; t < num; ++t) {
        for (std::size_t p = 0; p < b; ++p) {
            const double s = ((t >> p) & 1u) ? -1.0 : 1.0;
            diff[p] = y_block[p].real() - s;
        }
        double q = 0.0;
        for (std::size_t i = 0; i < b; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < b; ++j) row += cov.precision[i * b + j] * diff[j];
            q += diff[i] * row;
        }
        ll[t] = -0.5 * q;
    }
    return ll;
}

/// Argmax candidate id; ties break toward the earliest id in the canonical
/// enumeration.
inline std::uint32_t hard_demod_block(std::span<const double> log_likelihoods) {
    if (log_likelihoods.empty()) throw std::invalid_argument("hard_demod_block: empty likelihood map");
    std::uint32_t best = 0;
    for (std::uint32_t t = 1; t < log_likelihoods.size(); ++t)
        if (log_likelihoods[t] > log_likelihoods[best]) best = t;
    return best;
}

inline CandidateTable build_candidate_table(const ReceivedSignal& y, std::size_t b,
                                            const BlockCovariance& cov) {
    CandidateTable table;
    table.block_size = b;
    const auto blocks = partition_blocks(y, b);
    table.num_blocks = blocks.size();
    table.hard.reserve(blocks.size());
    table.candidates.reserve(blocks.size() * ((std::size_t(1) << b) - 1));
    std::vector<double> penalties;
    penalties.reserve(table.candidates.capacity());
    for (std::uint32_t i = 0; i < blocks.size(); ++i) {
        const auto ll = block_log_likelihoods(blocks[i], cov);
        const std::uint32_t star = hard_demod_block(ll);
        table.hard.push_back(star);
        for (std::uint32_t t = 0; t < ll.size(); ++t) {
            if (t == star) continue;
            double pen = ll[star] - ll[t];
            if (pen < kPenaltyClampEps) pen = 0.0;
            table.candidates.push_back({i, t, pen});
            penalties.push_back(pen);
        }
    }
    table.rank = rank_sort(penalties);
    return table;
}

inline CandidateTable build_candidate_table(const ReceivedSignal& y, std::size_t b,
                                            const GaussMarkovChannel& ch) {
    return build_candidate_table(y, b, block_covariance(b, ch));
}

/// Substitute the pattern's candidate blocks into the hard-demodulated
/// sequence and demap to bits; nullopt if the pattern addresses a block twice.
inline std::optional<Codeword> substitute_and_demap(const CandidateTable& table, const Pattern& pattern) {
    const std::size_t b = table.block_size;
    std::vector<std::uint32_t> ids = table.hard;
    std::vector<bool> touched(table.num_blocks, false);
    for (std::uint32_t r : pattern.ranks) {
        if (r < 1 || r > table.mu()) throw std::invalid_argument("substitute_and_demap: rank out of range");
        const BlockCandidate& cand = table.candidates[table.rank.order[r - 1]];
        if (touched[cand.block]) return std::nullopt;  // substitution conflict
        touched[cand.block] = true;
        ids[cand.block] = cand.symbols;
    }
    Codeword c(table.num_blocks * b);
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t p = 0; p < b; ++p)
            if ((ids[i] >> p) & 1u) c.set(i * b + p, true);
    return c;
}

enum class DecodeStatus { Found, Abandoned };

struct DecodeResult {
    std::optional<Codeword> codeword;  // present iff status == Found
    std::uint64_t guesses = 0;         // patterns fetched, conflicted ones included
    DecodeStatus status = DecodeStatus::Abandoned;
};

/// ORBGRAND-AI decoder bound to a code, channel statistics, block size and
/// abandonment threshold. The block precision matrix is computed once here
/// and shared across decode calls; each call owns its enumerator and scratch.
class Decoder {
public:
    Decoder(const LinearCode& code, const GaussMarkovChannel& ch, std::size_t b,
            std::uint64_t tau = kDefaultTau)
        : code_(&code), ch_(ch), b_(b), tau_(tau), cov_(block_covariance(b, ch)) {
        if (tau < 1) throw std::invalid_argument("decoder: tau must be >= 1");
        if (b > 16) throw std::invalid_argument("decoder: b > 16 exceeds the 2^16 per-block candidate cap");
        if (code.length() % b != 0) throw std::invalid_argument("decoder: b must divide the code length");
        const BitMatrix& h = code.parity_check();
        syn_words_ = BitVector::word_count(h.rows());
        col_syndromes_.assign(code.length() * syn_words_, 0);
        for (std::size_t r = 0; r < h.rows(); ++r)
            for (std::size_t c = 0; c < h.cols(); ++c)
                if (h.get(r, c)) col_syndromes_[c * syn_words_ + (r >> 6)] ^= std::uint64_t(1) << (r & 63);
    }

    const GaussMarkovChannel& channel() const noexcept { return ch_; }
    std::size_t block_size() const noexcept { return b_; }
    std::uint64_t tau() const noexcept { return tau_; }
    const BlockCovariance& covariance() const noexcept { return cov_; }

    DecodeResult decode(const ReceivedSignal& y) const {
        const std::size_t n = code_->length();
        if (y.values.size() != n) throw std::invalid_argument("decode: received length mismatch");

        const CandidateTable table = build_candidate_table(y, b_, cov_);
        const std::size_t mu = table.mu();

        // Hard-demodulated word and its syndrome; every later guess applies
        // per-candidate bit/syndrome deltas instead of re-demapping in full.
        Codeword hard_bits(n);
        for (std::size_t i = 0; i < table.num_blocks; ++i)
            for (std::size_t p = 0; p < b_; ++p)
                if ((table.hard[i] >> p) & 1u) hard_bits.set(i * b_ + p, true);
        const BitVector base_syndrome = code_->syndrome(hard_bits);

        std::vector<std::uint64_t> delta_syn(mu * syn_words_, 0);
        std::vector<std::uint32_t> cand_block(mu);
        std::vector<std::uint32_t> cand_flip(mu);  // bit flips within the block
        for (std::size_t j = 0; j < mu; ++j) {
            const BlockCandidate& cand = table.candidates[j];
            cand_block[j] = cand.block;
            const std::uint32_t flips = cand.symbols ^ table.hard[cand.block];
            cand_flip[j] = flips;
            for (std::size_t p = 0; p < b_; ++p) {
                if (!((flips >> p) & 1u)) continue;
                const std::size_t col = cand.block * b_ + p;
                for (std::size_t w = 0; w < syn_words_; ++w)
                    delta_syn[j * syn_words_ + w] ^= col_syndromes_[col * syn_words_ + w];
            }
        }

        PatternEnumerator patterns{std::uint32_t(mu)};
        std::vector<std::uint64_t> block_stamp(table.num_blocks, 0);
        std::vector<std::uint64_t> syn(syn_words_);
        std::uint64_t d = 0;
        while (d < tau_) {
            ++d;
            const Pattern* pat = patterns.next();
            if (!pat) return {std::nullopt, d - 1, DecodeStatus::Abandoned};  // pattern space exhausted

            std::copy(base_syndrome.words().begin(), base_syndrome.words().end(), syn.begin());
            bool conflict = false;
            for (std::uint32_t r : pat->ranks) {
                const std::uint32_t j = table.rank.order[r - 1];
                if (block_stamp[cand_block[j]] == d) {
                    conflict = true;  // same block targeted twice: discard pattern
                    break;
                }
                block_stamp[cand_block[j]] = d;
                for (std::size_t w = 0; w < syn_words_; ++w) syn[w] ^= delta_syn[j * syn_words_ + w];
            }
            if (conflict) continue;

            bool zero = true;
            for (std::uint64_t w : syn)
                if (w) {
                    zero = false;
                    break;
                }
            if (zero) {
                Codeword c = hard_bits;
                for (std::uint32_t r : pat->ranks) {
                    const std::uint32_t j = table.rank.order[r - 1];
                    for (std::size_t p = 0; p < b_; ++p)
                        if ((cand_flip[j] >> p) & 1u) c.flip(cand_block[j] * b_ + p);
                }
                return {std::move(c), d, DecodeStatus::Found};
            }
        }
        return {std::nullopt, tau_, DecodeStatus::Abandoned};
    }

private:
    const LinearCode* code_;
    GaussMarkovChannel ch_;
    std::size_t b_;
    std::uint64_t tau_;
    BlockCovariance cov_;
    std::size_t syn_words_;
    std::vector<std::uint64_t> col_syndromes_;  // parity-check columns, packed
};

/// One-shot convenience decode: build the candidate table, then test
/// patterns in nondecreasing logistic weight until the membership check
/// passes or tau patterns have been fetched.
inline DecodeResult decode(const ReceivedSignal& y, const LinearCode& code, const GaussMarkovChannel& ch,
                           std::size_t b, std::uint64_t tau = kDefaultTau) {
    return Decoder(code, ch, b, tau).decode(y);
}

}  // namespace orbgrand
