#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "orbgrand/channel.hpp"
#include "orbgrand/linear_code.hpp"

namespace orbgrand {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class OutputFormat { Csv, Json };

/// One Monte Carlo experiment: the (rho, ebno_db, b) grid for a code, the
/// stopping rule and the seeding. Parsed from a flat key = value file;
/// unknown keys fail fast.
struct ExperimentConfig {
    CodeDescriptor code{CodeKind::Rlc, 128, 110, 1, 0};
    Modulation modulation = Modulation::Bpsk;
    std::vector<double> rho{0.5};
    std::vector<double> ebno_db{3.7};
    std::vector<std::size_t> b{4};
    std::uint64_t tau = 1'000'000;
    std::uint64_t max_trials = 10'000'000;
    std::uint64_t min_errors = 100;
    std::uint64_t base_seed = 0;
    unsigned threads = 0;  // 0 = hardware concurrency
    std::vector<std::size_t> k_grid;  // rate-search only
    std::string out;       // output path; empty = stdout
    OutputFormat format = OutputFormat::Csv;

    void validate() const {
        if (code.n == 0 || code.k == 0 || code.k > code.n)
            throw ConfigError("config: code dimensions require 0 < k <= n");
        if (code.kind != CodeKind::FullSpace && code.k == code.n)
            throw ConfigError("config: k = n needs code.kind = full");
        if (code.kind == CodeKind::FullSpace && code.k != code.n)
            throw ConfigError("config: code.kind = full requires k = n");
        if (min_errors < 1) throw ConfigError("config: min_errors must be >= 1");
        if (max_trials < min_errors) throw ConfigError("config: max_trials must be >= min_errors");
        if (tau < 1) throw ConfigError("config: tau must be >= 1");
        if (rho.empty() || ebno_db.empty() || b.empty())
            throw ConfigError("config: rho, ebno_db and b must be nonempty");
        for (double r : rho)
            if (!(r >= 0.0 && r <= kMaxRho))
                throw ConfigError("config: rho must be in [0, " + std::to_string(kMaxRho) + "]");
        for (std::size_t bb : b) {
            if (bb < 1) throw ConfigError("config: b must be >= 1");
            if (bb > 16) throw ConfigError("config: b > 16 exceeds the 2^16 per-block candidate cap");
            if (code.n % bb != 0) throw ConfigError("config: every b must divide the symbol count");
        }
        for (std::size_t k : k_grid)
            if (k == 0 || k >= code.n) throw ConfigError("config: k_grid entries must satisfy 0 < k < n");
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    while (!s.empty()) {
        const auto pos = s.find(',');
        out.push_back(trim(s.substr(0, pos)));
        if (pos == std::string_view::npos) break;
        s.remove_prefix(pos + 1);
    }
    return out;
}

inline double parse_double(std::string_view v, const std::string& key) {
    try {
        std::size_t used = 0;
        const double d = std::stod(std::string(v), &used);
        if (used != v.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + std::string(v) + "'");
    }
}

inline std::uint64_t parse_uint(std::string_view v, const std::string& key) {
    std::uint64_t x = 0;
    int base = 10;
    if (v.starts_with("0x") || v.starts_with("0X")) {
        v.remove_prefix(2);
        base = 16;
    }
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x, base);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("config: bad integer value for " + key + ": '" + std::string(v) + "'");
    return x;
}

}  // namespace detail

/// Apply one `key = value` assignment. Shared by the file parser and by CLI
/// overrides so both accept identical spellings.
inline void apply_config_entry(ExperimentConfig& cfg, std::string_view key_sv, std::string_view value_sv) {
    using detail::parse_double;
    using detail::parse_uint;
    using detail::split_list;
    const std::string key(detail::trim(key_sv));
    const std::string_view value = detail::trim(value_sv);
    if (key == "code.kind") {
        if (value == "rlc")
            cfg.code.kind = CodeKind::Rlc;
        else if (value == "crc")
            cfg.code.kind = CodeKind::Crc;
        else if (value == "full")
            cfg.code.kind = CodeKind::FullSpace;
        else
            throw ConfigError("config: code.kind must be rlc, crc or full");
    } else if (key == "code.n") {
        cfg.code.n = parse_uint(value, key);
    } else if (key == "code.k") {
        cfg.code.k = parse_uint(value, key);
    } else if (key == "code.seed") {
        cfg.code.seed = parse_uint(value, key);
    } else if (key == "code.poly") {
        cfg.code.poly = parse_uint(value, key);
    } else if (key == "modulation") {
        if (value != "bpsk") throw ConfigError("config: modulation must be bpsk");
        cfg.modulation = Modulation::Bpsk;
    } else if (key == "rho") {
        cfg.rho.clear();
        for (auto v : split_list(value)) cfg.rho.push_back(parse_double(v, key));
    } else if (key == "ebno_db") {
        cfg.ebno_db.clear();
        for (auto v : split_list(value)) cfg.ebno_db.push_back(parse_double(v, key));
    } else if (key == "b") {
        cfg.b.clear();
        for (auto v : split_list(value)) cfg.b.push_back(parse_uint(v, key));
    } else if (key == "k_grid") {
        cfg.k_grid.clear();
        for (auto v : split_list(value)) cfg.k_grid.push_back(parse_uint(v, key));
    } else if (key == "tau") {
        cfg.tau = parse_uint(value, key);
    } else if (key == "max_trials") {
        cfg.max_trials = parse_uint(value, key);
    } else if (key == "min_errors") {
        cfg.min_errors = parse_uint(value, key);
    } else if (key == "base_seed") {
        cfg.base_seed = parse_uint(value, key);
    } else if (key == "threads") {
        cfg.threads = unsigned(parse_uint(value, key));
    } else if (key == "out") {
        cfg.out = std::string(value);
    } else if (key == "format") {
        if (value == "csv")
            cfg.format = OutputFormat::Csv;
        else if (value == "json")
            cfg.format = OutputFormat::Json;
        else
            throw ConfigError("config: format must be csv or json");
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig cfg = {}) {
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view stripped = detail::trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value'");
        const std::string key(detail::trim(stripped.substr(0, eq)));
        if (!seen.insert(key).second)
            throw ConfigError("config: duplicate key '" + key + "' at line " + std::to_string(lineno));
        apply_config_entry(cfg, key, stripped.substr(eq + 1));
    }
    return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path, ExperimentConfig cfg = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    return parse_config(in, std::move(cfg));
}

}  // namespace orbgrand
