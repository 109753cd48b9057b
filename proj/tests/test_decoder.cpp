#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "orbgrand/decoder.hpp"
#include "orbgrand/stats.hpp"

using namespace orbgrand;

namespace {

InfoWord random_info(std::size_t k, std::mt19937_64& rng) {
    InfoWord u(k);
    for (std::size_t i = 0; i < k; ++i) u.set(i, rng() & 1u);
    return u;
}

// Literal composition of the public operations: fetch patterns, substitute
// and demap, run the membership check. The production decoder must match
// this query-for-query.
DecodeResult reference_decode(const ReceivedSignal& y, const LinearCode& code,
                              const GaussMarkovChannel& ch, std::size_t b, std::uint64_t tau) {
    const CandidateTable table = build_candidate_table(y, b, ch);
    PatternEnumerator patterns{std::uint32_t(table.mu())};
    std::uint64_t d = 0;
    while (d < tau) {
        ++d;
        const Pattern* p = patterns.next();
        if (!p) return {std::nullopt, d - 1, DecodeStatus::Abandoned};
        const auto word = substitute_and_demap(table, *p);
        if (!word) continue;
        if (code.is_codeword(*word)) return {*word, d, DecodeStatus::Found};
    }
    return {std::nullopt, tau, DecodeStatus::Abandoned};
}

// Bit-level basic ORBGRAND: per-bit |LLR| reliabilities, same rank ordering
// and pattern generator, patterns flip individual bits.
DecodeResult bit_orbgrand(const ReceivedSignal& y, const LinearCode& code, double sigma2,
                          std::uint64_t tau) {
    const std::size_t n = y.values.size();
    const Codeword hard = demap_bpsk(y);
    std::vector<double> weights(n);
    for (std::size_t i = 0; i < n; ++i) {
        weights[i] = std::abs(2.0 * y.values[i].real() / sigma2);
        if (weights[i] < kPenaltyClampEps) weights[i] = 0.0;
    }
    const RankPermutation rp = rank_sort(weights);
    PatternEnumerator patterns{std::uint32_t(n)};
    std::uint64_t d = 0;
    while (d < tau) {
        ++d;
        const Pattern* p = patterns.next();
        if (!p) return {std::nullopt, d - 1, DecodeStatus::Abandoned};
        Codeword c = hard;
        for (std::uint32_t r : p->ranks) c.flip(rp.order[r - 1]);
        if (code.is_codeword(c)) return {c, d, DecodeStatus::Found};
    }
    return {std::nullopt, tau, DecodeStatus::Abandoned};
}

// Exhaustive maximum likelihood under the block-product metric, with a
// closed-form 2x2 precision; independent of the library factorization.
Codeword ml_oracle_b2(const ReceivedSignal& y, const LinearCode& code, double rho, double sigma2) {
    const double f = 1.0 / (sigma2 * (1.0 - rho * rho));
    const double p00 = f, p01 = -f * rho;
    const std::size_t n = code.length(), k = code.dimension();
    Codeword best;
    double best_metric = -std::numeric_limits<double>::infinity();
    for (std::uint64_t u = 0; u < (std::uint64_t(1) << k); ++u) {
        InfoWord info(k);
        for (std::size_t i = 0; i < k; ++i) info.set(i, (u >> i) & 1u);
        const Codeword c = code.encode(info);
        double metric = 0.0;
        for (std::size_t off = 0; off < n; off += 2) {
            const double d0 = y.values[off].real() - (c.get(off) ? -1.0 : 1.0);
            const double d1 = y.values[off + 1].real() - (c.get(off + 1) ? -1.0 : 1.0);
            metric += -0.5 * (p00 * (d0 * d0 + d1 * d1) + 2.0 * p01 * d0 * d1);
        }
        if (metric > best_metric) {
            best_metric = metric;
            best = c;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("partition blocks") {
    ReceivedSignal y;
    y.values.resize(128);
    REQUIRE(partition_blocks(y, 4).size() == 32);
    REQUIRE(partition_blocks(y, 1).size() == 128);
    REQUIRE(partition_blocks(y, 128).size() == 1);
    ReceivedSignal bad;
    bad.values.resize(6);
    REQUIRE_THROWS_AS(partition_blocks(bad, 4), std::invalid_argument);
    REQUIRE_THROWS_AS(partition_blocks(y, 0), std::invalid_argument);
}

TEST_CASE("block log likelihoods, diagonal case separates per symbol") {
    const GaussMarkovChannel ch(0.0, 0.7);
    const BlockCovariance cov = block_covariance(2, ch);
    const std::complex<double> yb[] = {{0.4, 0.2}, {-0.9, -0.1}};
    const auto ll = block_log_likelihoods(yb, cov);
    REQUIRE(ll.size() == 4);
    // sum of per-symbol scalar terms
    for (std::uint32_t t = 0; t < 4; ++t) {
        const double s0 = (t & 1u) ? -1.0 : 1.0;
        const double s1 = (t & 2u) ? -1.0 : 1.0;
        const double want =
            -0.5 * ((0.4 - s0) * (0.4 - s0) + (-0.9 - s1) * (-0.9 - s1)) / 0.7;
        REQUIRE(ll[t] == Catch::Approx(want).margin(1e-12));
    }
    // ordering matches per-symbol Euclidean distance: (+1, -1) wins
    REQUIRE(hard_demod_block(ll) == 2u);
}

TEST_CASE("block log likelihoods, hand-computed correlated case") {
    // rho = 0.5, sigma2 = 1, y = (+0.1, -0.1): precision = (4/3) [[1,-1/2],[-1/2,1]]
    const GaussMarkovChannel ch(0.5, 1.0);
    const BlockCovariance cov = block_covariance(2, ch);
    const std::complex<double> yb[] = {{0.1, 0.0}, {-0.1, 0.0}};
    const auto ll = block_log_likelihoods(yb, cov);
    REQUIRE(ll[0] == Catch::Approx(-0.6866666666666668).margin(1e-12));
    REQUIRE(ll[1] == Catch::Approx(-2.42).margin(1e-12));
    REQUIRE(ll[2] == Catch::Approx(-1.62).margin(1e-12));
    REQUIRE(ll[3] == Catch::Approx(-0.6866666666666668).margin(1e-12));
    // exact likelihood tie between ids 0 and 3: canonical tie-break picks 0
    REQUIRE(hard_demod_block(ll) == 0u);

    // a received point exactly on a constellation tuple is its own argmax
    const std::complex<double> on[] = {{-1.0, 0.0}, {1.0, 0.0}};
    REQUIRE(hard_demod_block(block_log_likelihoods(on, cov)) == 1u);
}

TEST_CASE("joint hard demodulation can differ from symbol-wise decisions") {
    const GaussMarkovChannel ch(0.9, 1.0);
    const BlockCovariance cov = block_covariance(2, ch);

    auto joint = [&](double y0, double y1) {
        const std::complex<double> yb[] = {{y0, 0.0}, {y1, 0.0}};
        return hard_demod_block(block_log_likelihoods(yb, cov));
    };
    auto brute = [&](double y0, double y1) {
        const double f = 1.0 / (1.0 - 0.81);
        std::uint32_t best = 0;
        double best_ll = -1e300;
        for (std::uint32_t t = 0; t < 4; ++t) {
            const double d0 = y0 - ((t & 1u) ? -1.0 : 1.0);
            const double d1 = y1 - ((t & 2u) ? -1.0 : 1.0);
            const double ll = -0.5 * f * (d0 * d0 + d1 * d1 - 2.0 * 0.9 * d0 * d1);
            if (ll > best_ll) {
                best_ll = ll;
                best = t;
            }
        }
        return best;
    };

    REQUIRE(joint(0.05, -1.0) == brute(0.05, -1.0));
    // symbol-wise decisions would give (+1, -1) here; channel memory pulls
    // the weakly positive symbol along with its strongly negative neighbor
    REQUIRE(joint(0.01, -0.95) == 3u);
    REQUIRE(brute(0.01, -0.95) == 3u);

    // rho = 0 reduces to symbol-wise nearest-point decisions
    const BlockCovariance white = block_covariance(2, GaussMarkovChannel(0.0, 1.0));
    const std::complex<double> yb[] = {{0.01, 0.0}, {-0.95, 0.0}};
    REQUIRE(hard_demod_block(block_log_likelihoods(yb, white)) == 2u);
}

TEST_CASE("candidate table counts and penalties") {
    std::mt19937_64 rng(41);
    const auto code = LinearCode::random_linear(128, 116, 1);
    const GaussMarkovChannel ch(0.5, 0.3);
    const Codeword sent = code.encode(random_info(116, rng));
    const ReceivedSignal y = transmit(modulate_bpsk(sent), ch, rng);

    const CandidateTable table = build_candidate_table(y, 4, ch);
    REQUIRE(table.num_blocks == 32);
    REQUIRE(table.mu() == 480);  // 32 blocks x 15 alternatives
    std::vector<std::set<std::uint32_t>> seen(32);
    for (const BlockCandidate& c : table.candidates) {
        REQUIRE(c.penalty >= 0.0);
        REQUIRE(c.symbols != table.hard[c.block]);
        REQUIRE(seen[c.block].insert(c.symbols).second);  // each pair exactly once
    }
    for (const auto& s : seen) REQUIRE(s.size() == 15);
    REQUIRE(std::is_sorted(table.rank.weights.begin(), table.rank.weights.end()));
}

TEST_CASE("noiseless table hard-demods the transmitted word") {
    std::mt19937_64 rng(43);
    const auto code = LinearCode::random_linear(16, 8, 5);
    const Codeword sent = code.encode(random_info(8, rng));
    std::mt19937_64 noise_rng(1);
    const GaussMarkovChannel quiet(0.5, 1e-20);
    const ReceivedSignal y = transmit(modulate_bpsk(sent), quiet, noise_rng);
    const CandidateTable table = build_candidate_table(y, 4, quiet);
    for (std::size_t i = 0; i < table.num_blocks; ++i)
        for (std::size_t p = 0; p < 4; ++p)
            REQUIRE(bool((table.hard[i] >> p) & 1u) == sent.get(i * 4 + p));
    for (const BlockCandidate& c : table.candidates) REQUIRE(c.penalty > 1e6);
}

TEST_CASE("b = 1 penalties equal absolute bit LLRs") {
    std::mt19937_64 rng(47);
    const double sigma2 = 0.7;
    const GaussMarkovChannel ch(0.0, sigma2);
    ReceivedSignal y;
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < 16; ++i) y.values.push_back({g(rng), g(rng)});
    const CandidateTable table = build_candidate_table(y, 1, ch);
    REQUIRE(table.mu() == 16);
    for (const BlockCandidate& c : table.candidates) {
        const double abs_llr = std::abs(2.0 * y.values[c.block].real() / sigma2);
        REQUIRE(c.penalty == Catch::Approx(abs_llr).epsilon(1e-9));
    }
}

TEST_CASE("substitute and demap") {
    std::mt19937_64 rng(53);
    const auto code = LinearCode::random_linear(32, 26, 3);
    const GaussMarkovChannel ch(0.5, 0.25);
    const Codeword sent = code.encode(random_info(26, rng));
    const ReceivedSignal y = transmit(modulate_bpsk(sent), ch, rng);
    const CandidateTable table = build_candidate_table(y, 4, ch);

    // empty pattern: pure hard demodulation
    const auto base = substitute_and_demap(table, Pattern{});
    REQUIRE(base.has_value());
    for (std::size_t i = 0; i < table.num_blocks; ++i)
        for (std::size_t p = 0; p < 4; ++p)
            REQUIRE(base->get(i * 4 + p) == bool((table.hard[i] >> p) & 1u));

    // single substitution changes exactly the selected block
    std::uint32_t top_rank_block3 = 0;
    for (std::uint32_t r = 1; r <= table.mu(); ++r)
        if (table.candidates[table.rank.order[r - 1]].block == 3) {
            top_rank_block3 = r;
            break;
        }
    Pattern single;
    single.ranks = {top_rank_block3};
    single.weight = top_rank_block3;
    const auto sub = substitute_and_demap(table, single);
    REQUIRE(sub.has_value());
    bool changed = false;
    for (std::size_t i = 0; i < 32; ++i) {
        const bool differs = sub->get(i) != base->get(i);
        if (i / 4 == 3)
            changed = changed || differs;
        else
            REQUIRE_FALSE(differs);
    }
    REQUIRE(changed);

    // two candidates for the same block conflict
    std::uint32_t second_rank_block3 = 0;
    for (std::uint32_t r = top_rank_block3 + 1; r <= table.mu(); ++r)
        if (table.candidates[table.rank.order[r - 1]].block == 3) {
            second_rank_block3 = r;
            break;
        }
    Pattern clash;
    clash.ranks = {std::min(top_rank_block3, second_rank_block3),
                   std::max(top_rank_block3, second_rank_block3)};
    REQUIRE_FALSE(substitute_and_demap(table, clash).has_value());

    Pattern bad;
    bad.ranks = {std::uint32_t(table.mu() + 1)};
    REQUIRE_THROWS_AS(substitute_and_demap(table, bad), std::invalid_argument);
}

TEST_CASE("decode basics") {
    std::mt19937_64 rng(59);
    const auto code = LinearCode::random_linear(16, 8, 5);

    // noiseless: found on the first query
    {
        const Codeword sent = code.encode(random_info(8, rng));
        std::mt19937_64 noise_rng(2);
        const GaussMarkovChannel quiet(0.25, 1e-20);
        const ReceivedSignal y = transmit(modulate_bpsk(sent), quiet, noise_rng);
        const DecodeResult res = decode(y, code, quiet, 2, 100);
        REQUIRE(res.status == DecodeStatus::Found);
        REQUIRE(res.guesses == 1);
        REQUIRE(*res.codeword == sent);
    }

    // the full space decodes every channel output at the first query
    {
        const auto trivial = LinearCode::full_space(16);
        const GaussMarkovChannel loud(0.5, 4.0);
        std::mt19937_64 noise_rng(3);
        const Codeword sent = trivial.encode(random_info(16, rng));
        const ReceivedSignal y = transmit(modulate_bpsk(sent), loud, noise_rng);
        const DecodeResult res = decode(y, trivial, loud, 2, 100);
        REQUIRE(res.status == DecodeStatus::Found);
        REQUIRE(res.guesses == 1);
    }

    // tau = 1 abandons as soon as the hard demodulation misses
    {
        const GaussMarkovChannel ch(0.0, 1.0);
        std::mt19937_64 noise_rng(4);
        for (;;) {
            const Codeword sent = code.encode(random_info(8, rng));
            const ReceivedSignal y = transmit(modulate_bpsk(sent), ch, noise_rng);
            if (code.is_codeword(demap_bpsk(y))) continue;
            const DecodeResult res = decode(y, code, ch, 2, 1);
            REQUIRE(res.status == DecodeStatus::Abandoned);
            REQUIRE(res.guesses == 1);
            REQUIRE_FALSE(res.codeword.has_value());
            break;
        }
    }
}

TEST_CASE("decode matches the public-operation composition query-for-query") {
    std::mt19937_64 rng(61);
    const auto code = LinearCode::random_linear(16, 10, 9);
    for (double rho : {0.0, 0.5, 0.8}) {
        const GaussMarkovChannel ch(rho, 0.5);
        const Decoder decoder(code, ch, 2, 5000);
        for (int t = 0; t < 100; ++t) {
            const Codeword sent = code.encode(random_info(10, rng));
            const ReceivedSignal y = transmit(modulate_bpsk(sent), ch, rng);
            const DecodeResult fast = decoder.decode(y);
            const DecodeResult ref = reference_decode(y, code, ch, 2, 5000);
            REQUIRE(fast.status == ref.status);
            REQUIRE(fast.guesses == ref.guesses);
            if (fast.status == DecodeStatus::Found) {
                REQUIRE(*fast.codeword == *ref.codeword);
                REQUIRE(code.is_codeword(*fast.codeword));
            }
        }
    }
}

TEST_CASE("decode is deterministic") {
    std::mt19937_64 rng(67);
    const auto code = LinearCode::random_linear(32, 26, 3);
    const GaussMarkovChannel ch(0.5, 0.4);
    const Codeword sent = code.encode(random_info(26, rng));
    const ReceivedSignal y = transmit(modulate_bpsk(sent), ch, rng);
    const DecodeResult a = decode(y, code, ch, 4, 10000);
    const DecodeResult b = decode(y, code, ch, 4, 10000);
    REQUIRE(a.status == b.status);
    REQUIRE(a.guesses == b.guesses);
    REQUIRE(a.codeword == b.codeword);
}

TEST_CASE("b = 1, rho = 0 reduces to bit-level basic ORBGRAND") {
    std::mt19937_64 rng(71);
    const auto code = LinearCode::random_linear(16, 8, 5);
    const double sigma2 = 0.9;
    const GaussMarkovChannel ch(0.0, sigma2);
    const Decoder decoder(code, ch, 1, 1 << 16);
    for (int t = 0; t < 200; ++t) {
        const Codeword sent = code.encode(random_info(8, rng));
        const ReceivedSignal y = transmit(modulate_bpsk(sent), ch, rng);
        const DecodeResult blockwise = decoder.decode(y);
        const DecodeResult bitwise = bit_orbgrand(y, code, sigma2, 1 << 16);
        REQUIRE(blockwise.status == bitwise.status);
        REQUIRE(blockwise.guesses == bitwise.guesses);
        if (blockwise.status == DecodeStatus::Found) REQUIRE(*blockwise.codeword == *bitwise.codeword);
    }
}

TEST_CASE("decode agrees with the exhaustive block-product ML oracle") {
    std::mt19937_64 rng(73);
    const auto code = LinearCode::random_linear(8, 4, 7);
    const double sigma2 = ebno_to_sigma2(4.0, 0.5, 1);
    for (double rho : {0.0, 0.9}) {
        const GaussMarkovChannel ch(rho, sigma2);
        const Decoder decoder(code, ch, 2, 1 << 13);
        int agree = 0;
        constexpr int kTrials = 1500;
        for (int t = 0; t < kTrials; ++t) {
            const Codeword sent = code.encode(random_info(4, rng));
            const ReceivedSignal y = transmit(modulate_bpsk(sent), ch, rng);
            const DecodeResult res = decoder.decode(y);
            REQUIRE(res.status == DecodeStatus::Found);
            if (*res.codeword == ml_oracle_b2(y, code, rho, sigma2)) ++agree;
        }
        // sanity bar; the acceptance suite runs the full 10^4-trial version
        REQUIRE(double(agree) / kTrials >= 0.98);
    }
}

TEST_CASE("correlation strictly improves BLER at fixed Eb/N0", "[slow]") {
    const auto code = LinearCode::random_linear(128, 116, 1);
    const double sigma_base = ebno_to_sigma2(3.0, code.rate(), 1);

    struct Cell {
        double bler, se;
    };
    auto run = [&](double rho, std::uint64_t seed_salt) {
        const GaussMarkovChannel ch(rho, sigma_base);
        const Decoder decoder(code, ch, 4, 100000);
        std::uint64_t errors = 0;
        constexpr std::uint64_t kTrials = 3000;
        for (std::uint64_t t = 0; t < kTrials; ++t) {
            std::mt19937_64 rng(trial_seed(2024, seed_salt, t));
            const Codeword sent = code.encode(random_info(116, rng));
            const ReceivedSignal y = transmit(modulate_bpsk(sent), ch, rng);
            const DecodeResult res = decoder.decode(y);
            if (res.status != DecodeStatus::Found || *res.codeword != sent) ++errors;
        }
        const double p = double(errors) / double(kTrials);
        return Cell{p, std::sqrt(p * (1.0 - p) / double(kTrials))};
    };

    const Cell c0 = run(0.0, 1), c5 = run(0.5, 2), c75 = run(0.75, 3);
    REQUIRE(c0.bler - c5.bler > 3.0 * std::sqrt(c0.se * c0.se + c5.se * c5.se));
    REQUIRE(c5.bler - c75.bler > 3.0 * std::sqrt(c5.se * c5.se + c75.se * c75.se));
}
