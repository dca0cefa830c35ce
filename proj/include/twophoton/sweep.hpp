#pragma once

// Parameter sweeps over (indistinguishability, phase) cells, one Monte Carlo
// run per cell, persisted as a delimiter-separated dataset.
//
// File contract: UTF-8, LF line endings, first line the fixed column header,
// second line a schema stamp comment, then one row per cell. Numbers are
// written with 17 significant digits so they round-trip bit-exactly; infinite
// information entries appear as "inf". Writes go to a temporary file that is
// renamed into place, and a ".partial" sidecar makes interrupted sweeps
// resumable per completed cell.

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "twophoton/estimation.hpp"

namespace twophoton {

inline constexpr std::string_view kSweepCsvHeader =
    "set_indist,set_phi,est_indist,est_phi,var_indist,var_phi,fml_indist,fml_phi,"
    "qfi_indist,qfi_phi,n_samples,n_experiments,seed";
inline constexpr std::string_view kSweepSchemaStamp = "# schema twophoton-sweep 1";

// 17 significant digits: enough to reproduce any double exactly on re-read.
inline std::string format_double(double v) {
    std::array<char, 64> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                   std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw std::runtime_error("malformed number: '" + std::string(text) + "'");
    }
    return v;
}

inline std::string format_info(const InfoValue& v) {
    return v.infinite ? "inf" : format_double(v.value);
}

inline InfoValue parse_info(std::string_view text) {
    const double v = parse_double(text);
    return std::isinf(v) ? InfoValue::unbounded() : InfoValue::finite(v);
}

struct SweepConfig {
    std::vector<double> indistinguishabilities = {0.1, 0.3, 0.5, 0.7, 0.9};
    std::vector<double> phases;
    std::int64_t n_samples = 750;
    std::int64_t n_experiments = 10000;
    std::uint64_t master_seed = 12345;
    std::string out;
    unsigned threads = 0;

    SweepConfig() {
        for (int k = 0; k <= 44; ++k) {
            phases.push_back(std::numbers::pi * (static_cast<double>(k) / 44.0));
        }
    }
};

inline void validate_config(const SweepConfig& config) {
    if (config.phases.empty()) throw std::invalid_argument("config field 'phases': empty list");
    for (double p : config.phases) {
        if (!(p >= 0.0 && p <= std::numbers::pi)) {
            throw std::invalid_argument("config field 'phases': value " + format_double(p) +
                                        " outside [0, pi]");
        }
    }
    if (config.indistinguishabilities.empty()) {
        throw std::invalid_argument("config field 'indistinguishabilities': empty list");
    }
    for (double i : config.indistinguishabilities) {
        if (!(i >= 0.0 && i <= 1.0)) {
            throw std::invalid_argument("config field 'indistinguishabilities': value " +
                                        format_double(i) + " outside [0, 1]");
        }
    }
    if (config.n_samples < 1) {
        throw std::invalid_argument("config field 'samples': must be at least 1");
    }
    if (config.n_experiments < 2) {
        throw std::invalid_argument("config field 'experiments': must be at least 2");
    }
}

// Identity of a sweep's numerical content; resuming demands an exact match.
inline std::uint64_t config_fingerprint(const SweepConfig& config) {
    std::uint64_t h = 0x8BADF00DDEADBEEFull;
    const auto fold = [&h](std::uint64_t v) { h = mix64(h ^ v); };
    const auto fold_double = [&](double d) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(d));
        __builtin_memcpy(&bits, &d, sizeof(bits));
        fold(bits);
    };
    fold(static_cast<std::uint64_t>(config.n_samples));
    fold(static_cast<std::uint64_t>(config.n_experiments));
    fold(config.master_seed);
    fold(static_cast<std::uint64_t>(config.phases.size()));
    for (double p : config.phases) fold_double(p);
    fold(static_cast<std::uint64_t>(config.indistinguishabilities.size()));
    for (double i : config.indistinguishabilities) fold_double(i);
    return h;
}

// Seed handed to monte_carlo for one cell; a fixed function of the sweep's
// master seed and the cell's position so layouts never shift results.
inline std::uint64_t cell_seed(std::uint64_t master_seed, std::uint64_t cell_index) {
    return mix64(master_seed + 0xD1B54A32D192ED03ull * (cell_index + 1));
}

struct SweepRecord {
    double set_indist = 0.0;
    double set_phi = 0.0;
    double est_indist = 0.0;
    double est_phi = 0.0;
    double var_indist = 0.0;
    double var_phi = 0.0;
    InfoValue fml_indist;
    InfoValue fml_phi;
    InfoValue qfi_indist;
    InfoValue qfi_phi;
    std::int64_t n_samples = 0;
    std::int64_t n_experiments = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const SweepRecord&, const SweepRecord&) = default;
};

inline std::string record_to_row(const SweepRecord& r) {
    std::string row;
    row += format_double(r.set_indist);
    row += ',';
    row += format_double(r.set_phi);
    row += ',';
    row += format_double(r.est_indist);
    row += ',';
    row += format_double(r.est_phi);
    row += ',';
    row += format_double(r.var_indist);
    row += ',';
    row += format_double(r.var_phi);
    row += ',';
    row += format_info(r.fml_indist);
    row += ',';
    row += format_info(r.fml_phi);
    row += ',';
    row += format_info(r.qfi_indist);
    row += ',';
    row += format_info(r.qfi_phi);
    row += ',';
    row += std::to_string(r.n_samples);
    row += ',';
    row += std::to_string(r.n_experiments);
    row += ',';
    row += std::to_string(r.seed);
    return row;
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

template <typename T>
T parse_integer(std::string_view text) {
    T v{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw std::runtime_error("malformed integer: '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace detail

inline SweepRecord parse_record(std::string_view line) {
    const auto f = detail::split_fields(line);
    if (f.size() != 13) {
        throw std::runtime_error("dataset row has " + std::to_string(f.size()) +
                                 " fields, expected 13");
    }
    SweepRecord r;
    r.set_indist = parse_double(f[0]);
    r.set_phi = parse_double(f[1]);
    r.est_indist = parse_double(f[2]);
    r.est_phi = parse_double(f[3]);
    r.var_indist = parse_double(f[4]);
    r.var_phi = parse_double(f[5]);
    r.fml_indist = parse_info(f[6]);
    r.fml_phi = parse_info(f[7]);
    r.qfi_indist = parse_info(f[8]);
    r.qfi_phi = parse_info(f[9]);
    r.n_samples = detail::parse_integer<std::int64_t>(f[10]);
    r.n_experiments = detail::parse_integer<std::int64_t>(f[11]);
    r.seed = detail::parse_integer<std::uint64_t>(f[12]);
    return r;
}

inline void write_sweep_csv(const std::string& path, const std::vector<SweepRecord>& records) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write dataset file: " + tmp);
        out << kSweepCsvHeader << '\n' << kSweepSchemaStamp << '\n';
        for (const SweepRecord& r : records) out << record_to_row(r) << '\n';
        out.flush();
        if (!out) throw std::runtime_error("failed writing dataset file: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw std::runtime_error("cannot move dataset into place: " + path + ": " + ec.message());
}

inline std::vector<SweepRecord> read_sweep_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kSweepCsvHeader) {
        throw std::runtime_error("unexpected dataset header in " + path + ": '" + line + "'");
    }
    std::vector<SweepRecord> records;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        records.push_back(parse_record(line));
    }
    return records;
}

struct SweepStats {
    std::int64_t cells_total = 0;
    std::int64_t cells_computed = 0;
    std::int64_t cells_resumed = 0;
};

struct SweepResult {
    std::vector<SweepRecord> records;
    SweepStats stats;
};

// Runs one Monte Carlo per (indistinguishability, phase) cell, outer loop
// over indistinguishability. With a nonempty output path the dataset is
// written atomically at the end; completed cells are appended to a sidecar
// as the run progresses, and a later run with the same config picks up from
// there instead of recomputing.
inline SweepResult run_sweep(const SweepConfig& config) {
    validate_config(config);
    const std::int64_t total = static_cast<std::int64_t>(config.indistinguishabilities.size()) *
                               static_cast<std::int64_t>(config.phases.size());
    const std::string partial_path = config.out.empty() ? "" : config.out + ".partial";
    const std::string stamp = "# twophoton-sweep-partial " + std::to_string(config_fingerprint(config));

    std::map<std::int64_t, SweepRecord> done;
    if (!partial_path.empty() && std::filesystem::exists(partial_path)) {
        std::ifstream in(partial_path, std::ios::binary);
        std::string line;
        if (in && std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line == stamp) {
                // A crash can truncate the final line; stop at the first
                // row that fails to parse and recompute from there.
                while (std::getline(in, line)) {
                    if (!line.empty() && line.back() == '\r') line.pop_back();
                    if (line.empty()) continue;
                    try {
                        const std::size_t comma = line.find(',');
                        if (comma == std::string::npos) break;
                        const std::int64_t idx = detail::parse_integer<std::int64_t>(
                            std::string_view(line).substr(0, comma));
                        if (idx < 0 || idx >= total) break;
                        done[idx] = parse_record(std::string_view(line).substr(comma + 1));
                    } catch (const std::runtime_error&) {
                        break;
                    }
                }
            }
        }
    }

    // Rewrite the sidecar from the rows that survived so it is clean again.
    std::ofstream partial;
    if (!partial_path.empty()) {
        partial.open(partial_path, std::ios::binary | std::ios::trunc);
        if (!partial) throw std::runtime_error("cannot write sidecar file: " + partial_path);
        partial << stamp << '\n';
        for (const auto& [idx, record] : done) partial << idx << ',' << record_to_row(record) << '\n';
        partial.flush();
        if (!partial) throw std::runtime_error("failed writing sidecar file: " + partial_path);
    }

    SweepResult result;
    result.stats.cells_total = total;
    result.records.reserve(static_cast<std::size_t>(total));
    std::int64_t index = 0;
    for (double ind : config.indistinguishabilities) {
        const FisherMatrix qfim = qfim_closed_form(ind);
        for (double phi : config.phases) {
            const auto found = done.find(index);
            if (found != done.end()) {
                result.records.push_back(found->second);
                ++result.stats.cells_resumed;
                ++index;
                continue;
            }
            const std::uint64_t seed = cell_seed(config.master_seed, static_cast<std::uint64_t>(index));
            const MonteCarloResult mc = monte_carlo(ParamPoint(ind, phi), config.n_samples,
                                                    config.n_experiments, seed, config.threads);
            SweepRecord r;
            r.set_indist = ind;
            r.set_phi = phi;
            r.est_indist = mc.mean_indist;
            r.est_phi = mc.mean_phi;
            r.var_indist = mc.var_indist;
            r.var_phi = mc.var_phi;
            r.fml_indist = mc.fisher_ml_indist;
            r.fml_phi = mc.fisher_ml_phi;
            r.qfi_indist = qfim.ind_ind();
            r.qfi_phi = qfim.phi_phi();
            r.n_samples = config.n_samples;
            r.n_experiments = config.n_experiments;
            r.seed = seed;
            result.records.push_back(r);
            ++result.stats.cells_computed;
            if (partial.is_open()) {
                partial << index << ',' << record_to_row(r) << '\n';
                partial.flush();
                if (!partial) throw std::runtime_error("failed writing sidecar file: " + partial_path);
            }
            ++index;
        }
    }

    if (!config.out.empty()) {
        partial.close();
        write_sweep_csv(config.out, result.records);
        std::error_code ec;
        std::filesystem::remove(partial_path, ec);
    }
    return result;
}

// Flat key-value config text: one `key = value` per line, '#' comments,
// lists comma-separated, linspace(a,b,k) accepted for numeric lists.
// Unknown keys are rejected by name. Keys not present keep the defaults
// already in `config`.
inline void apply_config_text(const std::string& text, SweepConfig& config) {
    const auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
        return s;
    };
    const auto parse_list = [&](std::string_view value, const char* field) {
        std::vector<double> out;
        value = trim(value);
        if (value.rfind("linspace(", 0) == 0) {
            if (value.back() != ')') {
                throw std::invalid_argument(std::string("config field '") + field +
                                            "': malformed linspace expression");
            }
            const auto args = detail::split_fields(value.substr(9, value.size() - 10));
            if (args.size() != 3) {
                throw std::invalid_argument(std::string("config field '") + field +
                                            "': linspace takes (start, stop, count)");
            }
            const double a = parse_double(trim(args[0]));
            const double b = parse_double(trim(args[1]));
            const std::int64_t k = detail::parse_integer<std::int64_t>(trim(args[2]));
            if (k < 2) {
                throw std::invalid_argument(std::string("config field '") + field +
                                            "': linspace count must be at least 2");
            }
            for (std::int64_t i = 0; i < k; ++i) {
                out.push_back(a + (b - a) * (static_cast<double>(i) /
                                             static_cast<double>(k - 1)));
            }
            return out;
        }
        for (std::string_view tok : detail::split_fields(value)) out.push_back(parse_double(trim(tok)));
        return out;
    };

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        try {
            if (key == "phases") {
                config.phases = parse_list(value, "phases");
            } else if (key == "indistinguishabilities") {
                config.indistinguishabilities = parse_list(value, "indistinguishabilities");
            } else if (key == "samples") {
                config.n_samples = detail::parse_integer<std::int64_t>(value);
            } else if (key == "experiments") {
                config.n_experiments = detail::parse_integer<std::int64_t>(value);
            } else if (key == "seed") {
                config.master_seed = detail::parse_integer<std::uint64_t>(value);
            } else if (key == "out") {
                config.out = std::string(value);
            } else {
                throw std::invalid_argument("unknown config key '" + key + "'");
            }
        } catch (const std::runtime_error& e) {
            throw std::invalid_argument("config field '" + key + "': " + e.what());
        }
    }
}

inline SweepConfig load_config_file(const std::string& path, SweepConfig base = SweepConfig()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    apply_config_text(text.str(), base);
    return base;
}

}  // namespace twophoton
