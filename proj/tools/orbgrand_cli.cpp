// Command line front end: `simulate`, `rate-search`, `entropy` and `gen-code`
// subcommands around the orbgrand library. Exit code 0 on success, 1 on
// config or I/O errors.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "orbgrand/channel.hpp"
#include "orbgrand/config.hpp"
#include "orbgrand/harness.hpp"
#include "orbgrand/linear_code.hpp"

namespace {

using namespace orbgrand;

// CLI flags share the config-file spellings; set flags override file values.
struct Overrides {
    std::vector<std::pair<std::string, std::string>> entries;

    void add(CLI::App* cmd, const std::string& flag, const std::string& key, const std::string& help) {
        cmd->add_option_function<std::string>(
               flag, [this, key](const std::string& v) { entries.emplace_back(key, v); }, help)
            ->type_name("TEXT");
    }

    void apply(ExperimentConfig& cfg) const {
        for (const auto& [key, value] : entries) apply_config_entry(cfg, key, value);
    }
};

void write_or_print(const std::string& body, const std::string& path) {
    if (path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << body;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string format_double(double v) { return detail::format_double(v); }

int run_simulate(const std::string& config_path, const Overrides& overrides) {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = parse_config_file(config_path);
    overrides.apply(cfg);
    cfg.validate();
    const std::vector<BlerPoint> points = run_bler(cfg);
    const std::string body = cfg.format == OutputFormat::Csv ? to_csv(points) : to_json(points);
    write_or_print(body, cfg.out);
    return 0;
}

int run_rate_search(const std::string& config_path, const Overrides& overrides, double target_bler,
                    double target_ebno) {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = parse_config_file(config_path);
    overrides.apply(cfg);
    const RateSearchResult res = rate_search(cfg, target_bler, target_ebno);

    std::string body = cfg.format == OutputFormat::Csv ? to_csv(res.per_rate) : to_json(res.per_rate);
    write_or_print(body, cfg.out);
    if (res.best_rate) {
        std::cerr << "rate-search: best_rate = " << format_double(*res.best_rate) << " (k = " << *res.best_k
                  << ") meets BLER <= " << format_double(target_bler) << " at "
                  << format_double(target_ebno) << " dB\n";
    } else {
        std::cerr << "rate-search: no rate on the grid meets the target\n";
    }
    return 0;
}

int run_entropy(const std::vector<double>& rhos, const std::vector<std::size_t>& ns,
                const std::vector<std::size_t>& bs, double sigma2, const std::string& out_path) {
    std::string body = "n_or_b,rho,sigma2,entropy_nats\n";
    auto row = [&](std::size_t len, double rho, double h) {
        body += std::to_string(len);
        body += ',';
        body += format_double(rho);
        body += ',';
        body += format_double(sigma2);
        body += ',';
        body += format_double(h);
        body += '\n';
    };
    for (std::size_t n : ns)
        for (double rho : rhos) row(n, rho, entropy_rate(n, GaussMarkovChannel(rho, sigma2)));
    for (std::size_t b : bs)
        for (double rho : rhos) row(b, rho, block_entropy_rate(b, GaussMarkovChannel(rho, sigma2)));
    write_or_print(body, out_path);
    return 0;
}

int run_gen_code(const std::string& kind, std::size_t n, std::size_t k, std::uint64_t seed,
                 std::uint64_t poly, bool poly_given) {
    CodeDescriptor desc;
    desc.n = n;
    desc.k = k;
    if (kind == "rlc") {
        desc.kind = CodeKind::Rlc;
        desc.seed = seed;
    } else if (kind == "crc") {
        desc.kind = CodeKind::Crc;
        if (!poly_given) {
            if (n - k != 12)
                throw ConfigError("gen-code: --poly is required unless n-k = 12 (default 0x180F)");
            poly = kDefaultCrc12Poly;
        }
        desc.poly = poly;
    } else if (kind == "full") {
        desc.kind = CodeKind::FullSpace;
    } else {
        throw ConfigError("gen-code: --kind must be rlc, crc or full");
    }
    LinearCode::from_descriptor(desc);  // construct to validate
    std::cout << desc.to_config();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ORBGRAND-AI decoding experiments on Gauss-Markov channels"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte Carlo BLER sweep over (rho, ebno_db, b)");
    std::string sim_config;
    sim->add_option("--config", sim_config, "flat key = value config file");
    Overrides sim_over;
    sim_over.add(sim, "--rho", "rho", "comma list of correlation coefficients");
    sim_over.add(sim, "--ebno", "ebno_db", "comma list of Eb/N0 points in dB");
    sim_over.add(sim, "--b", "b", "comma list of block sizes in symbols");
    sim_over.add(sim, "--tau", "tau", "abandonment threshold (patterns fetched)");
    sim_over.add(sim, "--max-trials", "max_trials", "trial cap per cell");
    sim_over.add(sim, "--min-errors", "min_errors", "stop a cell after this many block errors");
    sim_over.add(sim, "--base-seed", "base_seed", "base seed for the trial streams");
    sim_over.add(sim, "--threads", "threads", "worker threads (0 = hardware)");
    sim_over.add(sim, "--out", "out", "output path (default stdout)");
    sim_over.add(sim, "--format", "format", "csv or json");
    sim_over.add(sim, "--code-kind", "code.kind", "rlc, crc or full");
    sim_over.add(sim, "--n", "code.n", "code length in bits");
    sim_over.add(sim, "--k", "code.k", "code dimension in bits");
    sim_over.add(sim, "--seed", "code.seed", "RLC construction seed");
    sim_over.add(sim, "--poly", "code.poly", "CRC generator polynomial (hex, incl. leading term)");

    // rate-search
    auto* rs = app.add_subcommand("rate-search", "highest rate meeting a BLER target at one Eb/N0");
    std::string rs_config;
    double rs_target = 1e-3, rs_ebno = 3.7;
    rs->add_option("--config", rs_config, "flat key = value config file");
    rs->add_option("--target-bler", rs_target, "BLER target")->required();
    rs->add_option("--ebno", rs_ebno, "Eb/N0 operating point in dB")->required();
    Overrides rs_over;
    rs_over.add(rs, "--rho", "rho", "correlation coefficient");
    rs_over.add(rs, "--b", "b", "block size in symbols");
    rs_over.add(rs, "--n", "code.n", "code length in bits");
    rs_over.add(rs, "--k-grid", "k_grid", "comma list of dimensions to scan");
    rs_over.add(rs, "--seed", "code.seed", "RLC construction seed");
    rs_over.add(rs, "--max-trials", "max_trials", "trial cap per rate");
    rs_over.add(rs, "--min-errors", "min_errors", "stop a rate after this many block errors");
    rs_over.add(rs, "--base-seed", "base_seed", "base seed for the trial streams");
    rs_over.add(rs, "--threads", "threads", "worker threads (0 = hardware)");
    rs_over.add(rs, "--out", "out", "output path (default stdout)");
    rs_over.add(rs, "--format", "format", "csv or json");

    // entropy
    auto* ent = app.add_subcommand("entropy", "Gauss-Markov differential entropy rate table");
    std::vector<double> ent_rho{0.0};
    std::vector<std::size_t> ent_n, ent_b;
    double ent_sigma2 = 1.0;
    std::string ent_out;
    ent->add_option("--rho", ent_rho, "correlation coefficients")->delimiter(',');
    ent->add_option("--n", ent_n, "sequence lengths (full entropy rate rows)")->delimiter(',');
    ent->add_option("--b", ent_b, "block sizes (block-independent entropy rate rows)")->delimiter(',');
    ent->add_option("--sigma2", ent_sigma2, "per-real-dimension noise variance");
    ent->add_option("--out", ent_out, "output path (default stdout)");

    // gen-code
    auto* gen = app.add_subcommand("gen-code", "print a code descriptor for archival");
    std::string gen_kind = "rlc";
    std::size_t gen_n = 128, gen_k = 116;
    std::uint64_t gen_seed = 1, gen_poly = 0;
    gen->add_option("--kind", gen_kind, "rlc, crc or full");
    gen->add_option("--n", gen_n, "code length in bits");
    gen->add_option("--k", gen_k, "code dimension in bits");
    gen->add_option("--seed", gen_seed, "RLC construction seed");
    auto* poly_opt = gen->add_option("--poly", gen_poly, "CRC generator polynomial (hex, incl. leading term)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(sim_config, sim_over);
        if (rs->parsed()) return run_rate_search(rs_config, rs_over, rs_target, rs_ebno);
        if (ent->parsed()) return run_entropy(ent_rho, ent_n, ent_b, ent_sigma2, ent_out);
        if (gen->parsed()) return run_gen_code(gen_kind, gen_n, gen_k, gen_seed, gen_poly, poly_opt->count() > 0);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
