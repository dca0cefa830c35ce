#pragma once

// Command-line front end. Every subcommand is a thin wrapper over a library
// operation; this header owns argument parsing, file plumbing, and the exit
// code contract (0 success, 2 validation error, 1 runtime failure).
//
// Output locations: a relative --out path is taken under $TWOPHOTON_OUT_DIR
// when that variable is set; absolute paths are used as given.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "twophoton/analysis.hpp"
#include "twophoton/sweep.hpp"

namespace twophoton {

inline constexpr std::string_view kOutDirEnvVar = "TWOPHOTON_OUT_DIR";
inline constexpr std::string_view kCountsCsvHeader = "outcome,count";

inline std::string resolve_out_path(const std::string& path) {
    if (path.empty()) return path;
    const std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    const char* dir = std::getenv(std::string(kOutDirEnvVar).c_str());
    if (dir == nullptr || *dir == '\0') return path;
    return (std::filesystem::path(dir) / p).string();
}

inline std::string counts_to_table(const CountVector& counts) {
    std::string table(kCountsCsvHeader);
    table += '\n';
    const auto& outcomes = supported_outcomes();
    for (int i = 0; i < kNumOutcomes; ++i) {
        table += occupation_to_string(outcomes[static_cast<std::size_t>(i)]);
        table += ',';
        table += std::to_string(counts.counts[static_cast<std::size_t>(i)]);
        table += '\n';
    }
    return table;
}

inline CountVector read_counts_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open counts file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty counts file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCountsCsvHeader) {
        throw std::runtime_error("unexpected counts header in " + path + ": '" + line + "'");
    }
    CountVector counts;
    const auto& outcomes = supported_outcomes();
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto fields = detail::split_fields(line);
        if (fields.size() != 2) {
            throw std::runtime_error("counts row needs 'outcome,count', got '" + line + "'");
        }
        int index = -1;
        for (int i = 0; i < kNumOutcomes; ++i) {
            if (occupation_to_string(outcomes[static_cast<std::size_t>(i)]) == fields[0]) {
                index = i;
                break;
            }
        }
        if (index < 0) {
            throw std::runtime_error("unknown outcome label '" + std::string(fields[0]) + "'");
        }
        counts.counts[static_cast<std::size_t>(index)] =
            detail::parse_integer<std::int64_t>(fields[1]);
    }
    return counts;
}

namespace detail {

// Writes to the resolved --out path when one was given, otherwise to stdout.
inline void deliver_table(const std::string& out, const std::string& table) {
    if (out.empty()) {
        std::cout << table;
        return;
    }
    write_table(out, table);
    std::cout << "wrote " << out << '\n';
}

inline int run_qfim(double indist, const std::string& out) {
    const FisherMatrix qfim = qfim_closed_form(indist);
    std::string table = "indist,qfi_indist,qfi_phi\n";
    table += format_double(indist);
    table += ',';
    table += format_info(qfim.ind_ind());
    table += ',';
    table += format_info(qfim.phi_phi());
    table += '\n';
    deliver_table(out, table);
    return 0;
}

inline int run_probs(double indist, double phi, const std::string& out) {
    const OutcomeDistribution dist = outcome_distribution(ParamPoint(indist, phi));
    std::string table = "outcome,probability\n";
    const auto& outcomes = supported_outcomes();
    for (int i = 0; i < kNumOutcomes; ++i) {
        table += occupation_to_string(outcomes[static_cast<std::size_t>(i)]);
        table += ',';
        table += format_double(dist.probs[static_cast<std::size_t>(i)]);
        table += '\n';
    }
    deliver_table(out, table);
    return 0;
}

inline int run_simulate(double indist, double phi, std::int64_t samples, std::uint64_t seed,
                        const std::string& out) {
    const OutcomeDistribution dist = outcome_distribution(ParamPoint(indist, phi));
    SplitMix64 stream = derive_stream(seed, 0);
    const CountVector counts = sample_counts(dist, samples, stream);
    deliver_table(out, counts_to_table(counts));
    return 0;
}

inline int run_mle(const std::string& in, const std::string& out) {
    const CountVector counts = read_counts_csv(in);
    const ParamPoint estimate = mle(counts);
    std::string table = "est_indist,est_phi,n_samples\n";
    table += format_double(estimate.indist);
    table += ',';
    table += format_double(estimate.phi);
    table += ',';
    table += std::to_string(counts.total());
    table += '\n';
    deliver_table(out, table);
    return 0;
}

inline int run_sweep_command(const SweepConfig& config) {
    const SweepResult result = run_sweep(config);
    std::cout << "cells total=" << result.stats.cells_total
              << " computed=" << result.stats.cells_computed
              << " resumed=" << result.stats.cells_resumed << '\n';
    if (!config.out.empty()) std::cout << "wrote " << config.out << '\n';
    return 0;
}

inline int run_figure_data(const std::string& in, const std::string& figure,
                           const std::string& out) {
    const std::vector<SweepRecord> records = read_sweep_csv(in);
    const std::string table = emit_figure_data(records, figure);
    deliver_table(out, table);
    return 0;
}

inline int run_qcr_check(const std::string& in, const std::string& out) {
    const std::vector<SweepRecord> records = read_sweep_csv(in);
    const QcrReport report = qcr_check(records);
    const std::string table = qcr_report_table(report);
    if (out.empty()) {
        std::cout << table;
    } else {
        write_table(out, table);
        std::cout << "wrote " << out << '\n';
        std::cout << "# phi: pass=" << report.phi.pass << " fail=" << report.phi.fail
                  << " excluded=" << report.phi.excluded << '\n';
        std::cout << "# indist: pass=" << report.indist.pass << " fail=" << report.indist.fail
                  << " excluded=" << report.indist.excluded << '\n';
    }
    return 0;
}

}  // namespace detail

// Parses and executes one invocation; `args` excludes the program name.
inline int run_cli(std::vector<std::string> args) {
    CLI::App app{"Two-photon interferometry simulator"};
    app.require_subcommand(1);

    double indist = 0.0;
    double phi = 0.0;
    std::int64_t samples = 750;
    std::uint64_t seed = 12345;
    std::string out;
    std::string in;
    std::string config_path;
    std::string figure;
    std::string phases_text;
    std::string indists_text;
    std::int64_t experiments = 10000;
    unsigned threads = 0;

    CLI::App* qfim_cmd = app.add_subcommand("qfim", "Closed-form quantum Fisher information");
    qfim_cmd->add_option("--indist", indist, "Indistinguishability in [0, 1]")->required();
    qfim_cmd->add_option("--out", out, "Output file (default: stdout)");

    CLI::App* probs_cmd = app.add_subcommand("probs", "Outcome probabilities at a point");
    probs_cmd->add_option("--indist", indist, "Indistinguishability in [0, 1]")->required();
    probs_cmd->add_option("--phi", phi, "Phase in [0, pi]")->required();
    probs_cmd->add_option("--out", out, "Output file (default: stdout)");

    CLI::App* sim_cmd = app.add_subcommand("simulate", "Sample one experiment's counts");
    sim_cmd->add_option("--indist", indist, "Indistinguishability in [0, 1]")->required();
    sim_cmd->add_option("--phi", phi, "Phase in [0, pi]")->required();
    sim_cmd->add_option("--samples", samples, "Detected pairs per experiment (default 750)");
    sim_cmd->add_option("--seed", seed, "Random seed (default 12345)");
    sim_cmd->add_option("--out", out, "Output file (default: stdout)");

    CLI::App* mle_cmd = app.add_subcommand("mle", "Maximum-likelihood estimate from counts");
    mle_cmd->add_option("--in", in, "Counts file (outcome,count rows)")->required();
    mle_cmd->add_option("--out", out, "Output file (default: stdout)");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo over a parameter grid");
    sweep_cmd->add_option("--config", config_path, "Config file (key = value lines)");
    sweep_cmd->add_option("--out", out, "Dataset file (default sweep.csv)");
    sweep_cmd->add_option("--seed", seed, "Master seed");
    sweep_cmd->add_option("--samples", samples, "Detected pairs per experiment");
    sweep_cmd->add_option("--experiments", experiments, "Experiments per cell");
    sweep_cmd->add_option("--threads", threads, "Worker threads (0 = hardware)");
    sweep_cmd->add_option("--phases", phases_text,
                          "Phase list: comma-separated or linspace(a,b,k)");
    sweep_cmd->add_option("--indists", indists_text, "Indistinguishability list");

    CLI::App* fig_cmd = app.add_subcommand("figure-data", "Tables derived from a sweep dataset");
    fig_cmd->add_option("--in", in, "Sweep dataset file")->required();
    fig_cmd->add_option("--figure", figure, "estimates | fisher-vs-phase | fisher-vs-indist")
        ->required();
    fig_cmd->add_option("--out", out, "Output file (default: stdout)");

    CLI::App* qcr_cmd = app.add_subcommand("qcr-check", "Cramer-Rao ratio report for a dataset");
    qcr_cmd->add_option("--in", in, "Sweep dataset file")->required();
    qcr_cmd->add_option("--out", out, "Output file (default: stdout)");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const std::string resolved_out = resolve_out_path(out);
        if (app.got_subcommand(qfim_cmd)) return detail::run_qfim(indist, resolved_out);
        if (app.got_subcommand(probs_cmd)) return detail::run_probs(indist, phi, resolved_out);
        if (app.got_subcommand(sim_cmd)) {
            return detail::run_simulate(indist, phi, samples, seed, resolved_out);
        }
        if (app.got_subcommand(mle_cmd)) return detail::run_mle(in, resolved_out);
        if (app.got_subcommand(sweep_cmd)) {
            SweepConfig config;
            if (!config_path.empty()) config = load_config_file(config_path);
            if (sweep_cmd->count("--seed") > 0) config.master_seed = seed;
            if (sweep_cmd->count("--samples") > 0) config.n_samples = samples;
            if (sweep_cmd->count("--experiments") > 0) config.n_experiments = experiments;
            if (sweep_cmd->count("--threads") > 0) config.threads = threads;
            // Route list flags through the config parser so the accepted
            // syntax stays identical between flags and files.
            if (sweep_cmd->count("--phases") > 0) {
                apply_config_text("phases = " + phases_text, config);
            }
            if (sweep_cmd->count("--indists") > 0) {
                apply_config_text("indistinguishabilities = " + indists_text, config);
            }
            if (sweep_cmd->count("--out") > 0) config.out = out;
            if (config.out.empty()) config.out = "sweep.csv";
            config.out = resolve_out_path(config.out);
            return detail::run_sweep_command(config);
        }
        if (app.got_subcommand(fig_cmd)) return detail::run_figure_data(in, figure, resolved_out);
        if (app.got_subcommand(qcr_cmd)) return detail::run_qcr_check(in, resolved_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace twophoton
