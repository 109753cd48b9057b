#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <exception>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "orbgrand/channel.hpp"
#include "orbgrand/config.hpp"
#include "orbgrand/decoder.hpp"
#include "orbgrand/stats.hpp"

namespace orbgrand {

/// One estimated grid cell. A block error is a decoded codeword that differs
/// from the transmitted one; abandoned decodes count as block errors.
struct BlerPoint {
    double rho = 0.0;
    double ebno_db = 0.0;
    std::size_t b = 0;
    std::size_t n = 0;
    std::size_t k = 0;
    double rate = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t block_errors = 0;
    double bler = 0.0;
    double mean_guesses = 0.0;
    double abandon_rate = 0.0;
};

namespace detail {

// Trials are committed in fixed-size chunks; the stopping rule is evaluated
// at chunk boundaries, so the executed trial set is independent of the
// worker count (min_errors may overshoot by at most one chunk).
inline constexpr std::uint64_t kTrialChunk = 4096;

struct CellAccum {
    std::uint64_t trials = 0;
    std::uint64_t errors = 0;
    std::uint64_t abandons = 0;
    std::uint64_t sum_guesses = 0;

    void operator+=(const CellAccum& o) {
        trials += o.trials;
        errors += o.errors;
        abandons += o.abandons;
        sum_guesses += o.sum_guesses;
    }
};

inline std::uint64_t cell_id(const CodeDescriptor& code, double rho, double ebno_db, std::size_t b) {
    std::uint64_t h = code.stable_hash();
    h = splitmix64(h ^ std::bit_cast<std::uint64_t>(rho));
    h = splitmix64(h ^ std::bit_cast<std::uint64_t>(ebno_db));
    h = splitmix64(h ^ std::uint64_t(b));
    return h;
}

inline CellAccum run_trial_range(const Decoder& decoder, const LinearCode& code, std::uint64_t cell,
                                 std::uint64_t base_seed, std::uint64_t first, std::uint64_t last,
                                 std::uint64_t stride) {
    CellAccum acc;
    const std::size_t k = code.dimension();
    for (std::uint64_t t = first; t < last; t += stride) {
        std::mt19937_64 rng(trial_seed(base_seed, cell, t));
        InfoWord u(k);
        for (std::size_t i = 0; i < k; ++i) u.set(i, rng() & 1u);
        const Codeword sent = code.encode(u);
        const ReceivedSignal y = transmit(modulate_bpsk(sent), decoder.channel(), rng);
        const DecodeResult res = decoder.decode(y);
        ++acc.trials;
        acc.sum_guesses += res.guesses;
        if (res.status == DecodeStatus::Abandoned) {
            ++acc.abandons;
            ++acc.errors;
        } else if (*res.codeword != sent) {
            ++acc.errors;
        }
    }
    return acc;
}

inline unsigned resolve_threads(unsigned requested) {
    if (requested) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1u;
}

}  // namespace detail

/// Estimate the BLER of one (rho, ebno_db, b) cell for `code` under the
/// config's stopping rule. Deterministic in (config, code): trial t of a cell
/// is seeded as trial_seed(base_seed, cell_id, t) regardless of threading.
inline BlerPoint run_cell(const ExperimentConfig& cfg, const LinearCode& code, double rho, double ebno_db,
                          std::size_t b) {
    const double sigma2 = ebno_to_sigma2(ebno_db, code.rate(), 1);
    const GaussMarkovChannel ch(rho, sigma2);
    const Decoder decoder(code, ch, b, cfg.tau);
    const std::uint64_t cell = detail::cell_id(code.descriptor(), rho, ebno_db, b);
    const unsigned threads = detail::resolve_threads(cfg.threads);

    detail::CellAccum total;
    while (total.trials < cfg.max_trials && total.errors < cfg.min_errors) {
        const std::uint64_t begin = total.trials;
        const std::uint64_t end = std::min<std::uint64_t>(cfg.max_trials, begin + detail::kTrialChunk);
        if (threads <= 1 || end - begin < 2 * threads) {
            total += detail::run_trial_range(decoder, code, cell, cfg.base_seed, begin, end, 1);
        } else {
            std::vector<detail::CellAccum> parts(threads);
            std::vector<std::exception_ptr> errors(threads);
            std::vector<std::thread> pool;
            pool.reserve(threads);
            for (unsigned w = 0; w < threads; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        parts[w] = detail::run_trial_range(decoder, code, cell, cfg.base_seed, begin + w,
                                                           end, threads);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
            for (auto& th : pool) th.join();
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
            for (const auto& p : parts) total += p;
        }
    }

    BlerPoint pt;
    pt.rho = rho;
    pt.ebno_db = ebno_db;
    pt.b = b;
    pt.n = code.length();
    pt.k = code.dimension();
    pt.rate = code.rate();
    pt.trials = total.trials;
    pt.block_errors = total.errors;
    pt.bler = double(total.errors) / double(total.trials);
    pt.mean_guesses = double(total.sum_guesses) / double(total.trials);
    pt.abandon_rate = double(total.abandons) / double(total.trials);
    return pt;
}

/// Full grid sweep over config.rho x config.ebno_db x config.b.
inline std::vector<BlerPoint> run_bler(const ExperimentConfig& cfg) {
    cfg.validate();
    const LinearCode code = LinearCode::from_descriptor(cfg.code);
    std::vector<BlerPoint> points;
    points.reserve(cfg.rho.size() * cfg.ebno_db.size() * cfg.b.size());
    for (double rho : cfg.rho)
        for (double ebno : cfg.ebno_db)
            for (std::size_t b : cfg.b) points.push_back(run_cell(cfg, code, rho, ebno, b));
    return points;
}

/// Highest-rate search result at (rho, b, target_ebno_db). `best_rate` is
/// empty when no grid rate meets the target with 95% confidence.
struct RateSearchResult {
    double rho = 0.0;
    std::size_t b = 0;
    double target_bler = 0.0;
    double target_ebno_db = 0.0;
    std::optional<std::size_t> best_k;
    std::optional<double> best_rate;
    std::vector<BlerPoint> per_rate;
    std::vector<double> upper_bounds;  // 95% Clopper-Pearson, aligned with per_rate
};

/// Scan config.k_grid (same n, RLC construction, the config seed) and return
/// the largest rate whose 95% Clopper-Pearson upper BLER bound meets
/// target_bler at target_ebno_db.
inline RateSearchResult rate_search(const ExperimentConfig& cfg, double target_bler,
                                    double target_ebno_db) {
    if (!(target_bler > 0.0 && target_bler <= 1.0))
        throw ConfigError("rate_search: target_bler must be in (0, 1]");
    if (cfg.code.kind != CodeKind::Rlc)
        throw ConfigError("rate_search: only RLC codes support a rate grid");
    if (cfg.k_grid.empty()) throw ConfigError("rate_search: k_grid must be nonempty");
    ExperimentConfig scan = cfg;
    scan.ebno_db = {target_ebno_db};
    scan.code.k = cfg.k_grid.front();  // the grid supersedes code.k
    scan.validate();

    RateSearchResult res;
    res.rho = cfg.rho.front();
    res.b = cfg.b.front();
    res.target_bler = target_bler;
    res.target_ebno_db = target_ebno_db;

    std::vector<std::size_t> grid = cfg.k_grid;
    std::sort(grid.begin(), grid.end());
    for (std::size_t k : grid) {
        const LinearCode code = LinearCode::random_linear(cfg.code.n, k, cfg.code.seed);
        const BlerPoint pt = run_cell(scan, code, res.rho, target_ebno_db, res.b);
        const double ub = clopper_pearson_upper(pt.block_errors, pt.trials, 0.95);
        res.per_rate.push_back(pt);
        res.upper_bounds.push_back(ub);
        if (ub <= target_bler) {
            res.best_k = k;
            res.best_rate = pt.rate;
        }
    }
    return res;
}

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

inline void sort_points(std::vector<BlerPoint>& pts) {
    std::sort(pts.begin(), pts.end(), [](const BlerPoint& a, const BlerPoint& b) {
        if (a.rho != b.rho) return a.rho < b.rho;
        if (a.ebno_db != b.ebno_db) return a.ebno_db < b.ebno_db;
        if (a.b != b.b) return a.b < b.b;
        return a.rate < b.rate;
    });
}

}  // namespace detail

inline constexpr const char* kCsvHeader = "rho,ebno_db,b,n,k,rate,trials,errors,bler,mean_guesses,abandon_rate";

/// CSV emission; rows ordered lexicographically in (rho, ebno_db, b, rate).
/// Doubles use shortest round-trip formatting, so output is byte-stable.
inline std::string to_csv(std::span<const BlerPoint> points) {
    std::vector<BlerPoint> pts(points.begin(), points.end());
    detail::sort_points(pts);
    std::string out = kCsvHeader;
    out += '\n';
    for (const BlerPoint& p : pts) {
        out += detail::format_double(p.rho);
        out += ',';
        out += detail::format_double(p.ebno_db);
        out += ',';
        out += std::to_string(p.b);
        out += ',';
        out += std::to_string(p.n);
        out += ',';
        out += std::to_string(p.k);
        out += ',';
        out += detail::format_double(p.rate);
        out += ',';
        out += std::to_string(p.trials);
        out += ',';
        out += std::to_string(p.block_errors);
        out += ',';
        out += detail::format_double(p.bler);
        out += ',';
        out += detail::format_double(p.mean_guesses);
        out += ',';
        out += detail::format_double(p.abandon_rate);
        out += '\n';
    }
    return out;
}

inline std::string to_json(std::span<const BlerPoint> points) {
    std::vector<BlerPoint> pts(points.begin(), points.end());
    detail::sort_points(pts);
    nlohmann::json arr = nlohmann::json::array();
    for (const BlerPoint& p : pts) {
        arr.push_back({{"rho", p.rho},
                       {"ebno_db", p.ebno_db},
                       {"b", p.b},
                       {"n", p.n},
                       {"k", p.k},
                       {"rate", p.rate},
                       {"trials", p.trials},
                       {"errors", p.block_errors},
                       {"bler", p.bler},
                       {"mean_guesses", p.mean_guesses},
                       {"abandon_rate", p.abandon_rate}});
    }
    return arr.dump(2) + "\n";
}

inline void emit_results(std::span<const BlerPoint> points, OutputFormat format, const std::string& path) {
    if (points.empty()) throw std::invalid_argument("emit_results: empty result set");
    const std::string body = format == OutputFormat::Csv ? to_csv(points) : to_json(points);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_results: cannot open '" + path + "' for writing");
    out << body;
    if (!out) throw std::runtime_error("emit_results: write failed for '" + path + "'");
}

}  // namespace orbgrand
