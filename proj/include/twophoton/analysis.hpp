#pragma once

// Figure-ready tables and the Cramer-Rao ratio report, both computed from a
// sweep dataset.
//
// Phases 0, pi/2, and pi are degenerate for phase estimation: the likelihood
// ridge flattens, estimates pile onto the stationary point, and the
// 1/(N*variance) reading of Fisher information stops tracking the bound.
// Cells within kDegenerateRadius of those phases are excluded from the
// quantitative checks and from the "interior" averages; the tables report
// inclusive and interior-only averages side by side.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "twophoton/sweep.hpp"

namespace twophoton {

inline constexpr double kDegenerateRadius = 0.15;

inline double degenerate_phase_distance(double phi) {
    return std::min({std::abs(phi), std::abs(phi - std::numbers::pi / 2.0),
                     std::abs(phi - std::numbers::pi)});
}

inline bool is_interior_phase(double phi) {
    return degenerate_phase_distance(phi) > kDegenerateRadius;
}

namespace detail {

inline void write_table(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write table file: " + tmp);
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("failed writing table file: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw std::runtime_error("cannot move table into place: " + path + ": " + ec.message());
}

// Average information over cells as the inverse of the mean rescaled
// variance. Near-degenerate cells then contribute their (tiny) variances
// instead of astronomically large information values that would swamp an
// arithmetic mean.
inline std::string averaged_info(const std::vector<const SweepRecord*>& cells, bool use_phi) {
    if (cells.empty()) return "nan";
    double mean_scaled_var = 0.0;
    for (const SweepRecord* r : cells) {
        const double var = use_phi ? r->var_phi : r->var_indist;
        mean_scaled_var += static_cast<double>(r->n_samples) * var;
    }
    mean_scaled_var /= static_cast<double>(cells.size());
    if (mean_scaled_var == 0.0) return "inf";
    return format_double(1.0 / mean_scaled_var);
}

}  // namespace detail

// Builds one of the three figure tables. Returns the table text; writes it
// to out_path when nonempty.
//
//   estimates        per set value and parameter: mean and pooled std of the
//                    estimates, plus the least-squares fit of mean estimate
//                    against set value for that parameter
//   fisher-vs-phase  per cell: both information readings beside the QFI
//   fisher-vs-indist per indistinguishability: phase-averaged information,
//                    inclusive and interior-only, beside the QFI
inline std::string emit_figure_data(const std::vector<SweepRecord>& records,
                                    const std::string& figure, const std::string& out_path = "") {
    if (records.empty()) throw std::invalid_argument("figure data: empty dataset");
    std::string table;

    if (figure == "estimates") {
        table = "param,set_value,mean_estimate,std_estimate,fit_slope,fit_intercept,"
                "fit_slope_se,fit_intercept_se\n";
        const auto emit_param = [&](const char* name, bool use_phi) {
            std::map<double, std::vector<const SweepRecord*>> by_set;
            for (const SweepRecord& r : records) {
                by_set[use_phi ? r.set_phi : r.set_indist].push_back(&r);
            }
            std::vector<double> xs, ys;
            std::vector<double> stds;
            for (const auto& [set_value, cells] : by_set) {
                double mean = 0.0, var = 0.0;
                for (const SweepRecord* r : cells) {
                    mean += use_phi ? r->est_phi : r->est_indist;
                    var += use_phi ? r->var_phi : r->var_indist;
                }
                mean /= static_cast<double>(cells.size());
                var /= static_cast<double>(cells.size());
                xs.push_back(set_value);
                ys.push_back(mean);
                stds.push_back(std::sqrt(var));
            }
            double slope = std::nan(""), intercept = std::nan("");
            double slope_se = std::nan(""), intercept_se = std::nan("");
            if (xs.size() >= 3) {
                const LinearFit fit = linear_fit(xs, ys);
                slope = fit.slope;
                intercept = fit.intercept;
                slope_se = fit.slope_se;
                intercept_se = fit.intercept_se;
            }
            for (std::size_t i = 0; i < xs.size(); ++i) {
                table += name;
                table += ',';
                table += format_double(xs[i]);
                table += ',';
                table += format_double(ys[i]);
                table += ',';
                table += format_double(stds[i]);
                table += ',';
                table += format_double(slope);
                table += ',';
                table += format_double(intercept);
                table += ',';
                table += format_double(slope_se);
                table += ',';
                table += format_double(intercept_se);
                table += '\n';
            }
        };
        emit_param("indist", false);
        emit_param("phi", true);
    } else if (figure == "fisher-vs-phase") {
        table = "set_indist,set_phi,fml_phi,fml_indist,qfi_phi,qfi_indist\n";
        for (const SweepRecord& r : records) {
            table += format_double(r.set_indist);
            table += ',';
            table += format_double(r.set_phi);
            table += ',';
            table += format_info(r.fml_phi);
            table += ',';
            table += format_info(r.fml_indist);
            table += ',';
            table += format_info(r.qfi_phi);
            table += ',';
            table += format_info(r.qfi_indist);
            table += '\n';
        }
    } else if (figure == "fisher-vs-indist") {
        table = "set_indist,fml_phi_inclusive,fml_phi_interior,qfi_phi,"
                "fml_indist_inclusive,fml_indist_interior,qfi_indist\n";
        std::map<double, std::vector<const SweepRecord*>> by_ind;
        for (const SweepRecord& r : records) by_ind[r.set_indist].push_back(&r);
        for (const auto& [ind, cells] : by_ind) {
            std::vector<const SweepRecord*> interior;
            for (const SweepRecord* r : cells) {
                if (is_interior_phase(r->set_phi)) interior.push_back(r);
            }
            table += format_double(ind);
            table += ',';
            table += detail::averaged_info(cells, true);
            table += ',';
            table += detail::averaged_info(interior, true);
            table += ',';
            table += format_info(cells.front()->qfi_phi);
            table += ',';
            table += detail::averaged_info(cells, false);
            table += ',';
            table += detail::averaged_info(interior, false);
            table += ',';
            table += format_info(cells.front()->qfi_indist);
            table += '\n';
        }
    } else {
        throw std::invalid_argument("unknown figure id '" + figure +
                                    "' (expected estimates, fisher-vs-phase, or fisher-vs-indist)");
    }

    if (!out_path.empty()) detail::write_table(out_path, table);
    return table;
}

struct QcrCellStatus {
    double set_indist = 0.0;
    double set_phi = 0.0;
    double ratio_phi = 0.0;
    double ratio_indist = 0.0;
    std::string status_phi;
    std::string status_indist;
};

struct QcrSummary {
    std::int64_t pass = 0;
    std::int64_t fail = 0;
    std::int64_t excluded = 0;
};

struct QcrReport {
    std::vector<QcrCellStatus> cells;
    QcrSummary phi;
    QcrSummary indist;
};

inline constexpr double kQcrBandLow = 0.9;
inline constexpr double kQcrBandHigh = 1.3;

// Checks N * variance * information against [0.9, 1.3] cell by cell. The
// phase ratio is excluded near degenerate phases; the indistinguishability
// ratio is excluded where its QFI diverges (set indistinguishability 0 or 1).
inline QcrReport qcr_check(const std::vector<SweepRecord>& records) {
    if (records.empty()) throw std::invalid_argument("qcr check: empty dataset");
    QcrReport report;
    const auto band_status = [](double ratio) {
        return ratio >= kQcrBandLow && ratio <= kQcrBandHigh ? "pass" : "fail";
    };
    for (const SweepRecord& r : records) {
        QcrCellStatus cell;
        cell.set_indist = r.set_indist;
        cell.set_phi = r.set_phi;
        const double n = static_cast<double>(r.n_samples);
        cell.ratio_phi = r.qfi_phi.infinite ? std::numeric_limits<double>::infinity()
                                            : n * r.var_phi * r.qfi_phi.value;
        cell.ratio_indist = r.qfi_indist.infinite ? std::numeric_limits<double>::infinity()
                                                  : n * r.var_indist * r.qfi_indist.value;

        if (!is_interior_phase(r.set_phi)) {
            cell.status_phi = "excluded: degenerate phase";
            ++report.phi.excluded;
        } else {
            cell.status_phi = band_status(cell.ratio_phi);
            ++(cell.status_phi == "pass" ? report.phi.pass : report.phi.fail);
        }
        if (r.qfi_indist.infinite) {
            cell.status_indist = "excluded: divergent QFI";
            ++report.indist.excluded;
        } else {
            cell.status_indist = band_status(cell.ratio_indist);
            ++(cell.status_indist == "pass" ? report.indist.pass : report.indist.fail);
        }
        report.cells.push_back(std::move(cell));
    }
    return report;
}

// Serializes a report: one row per cell, then '#' summary lines.
inline std::string qcr_report_table(const QcrReport& report, const std::string& out_path = "") {
    std::string table = "set_indist,set_phi,ratio_phi,status_phi,ratio_indist,status_indist\n";
    for (const QcrCellStatus& c : report.cells) {
        table += format_double(c.set_indist);
        table += ',';
        table += format_double(c.set_phi);
        table += ',';
        table += format_double(c.ratio_phi);
        table += ',';
        table += c.status_phi;
        table += ',';
        table += format_double(c.ratio_indist);
        table += ',';
        table += c.status_indist;
        table += '\n';
    }
    const auto summary_line = [&table](const char* name, const QcrSummary& s) {
        table += "# ";
        table += name;
        table += ": pass=";
        table += std::to_string(s.pass);
        table += " fail=";
        table += std::to_string(s.fail);
        table += " excluded=";
        table += std::to_string(s.excluded);
        table += '\n';
    };
    summary_line("phi", report.phi);
    summary_line("indist", report.indist);
    if (!out_path.empty()) detail::write_table(out_path, table);
    return table;
}

}  // namespace twophoton
