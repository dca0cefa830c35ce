// Acceptance gate: eight end-to-end checks across the whole stack, printing
// exactly one [PASS]/[FAIL] line per criterion and exiting nonzero if any
// fail. Every tolerance is pinned here, next to the check that uses it.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "twophoton/analysis.hpp"
#include "twophoton/estimation.hpp"
#include "twophoton/fisher.hpp"
#include "twophoton/interferometer.hpp"
#include "twophoton/sweep.hpp"

using namespace twophoton;

namespace {

constexpr double pi = std::numbers::pi;

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream out;
    out << std::setprecision(precision) << v;
    return out.str();
}

std::string fmt_seconds(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << v;
    return out.str();
}

// The shared evaluation grid: interior points away from every divergence.
const std::vector<double>& grid_indists() {
    static const std::vector<double> v = [] {
        std::vector<double> g;
        for (int i = 1; i <= 9; ++i) g.push_back(i / 10.0);
        return g;
    }();
    return v;
}

const std::vector<double>& grid_phases() {
    static const std::vector<double> v = [] {
        std::vector<double> g;
        for (int j = 1; j <= 15; ++j) g.push_back(j / 5.0);
        return g;
    }();
    return v;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

bool overall_ok = true;

void report(int criterion, bool ok, const std::string& text) {
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << text
              << std::endl;
    if (!ok) overall_ok = false;
}

void note(const std::string& text) { std::cout << "       " << text << std::endl; }

// 1. Numeric quantum Fisher information against the closed form.
void criterion_1() {
    const auto start = std::chrono::steady_clock::now();
    const auto state_fn = [](const ParamPoint& p) { return output_state(PairCount(1), p); };
    double worst_phi = 0.0, worst_ind_rel = 0.0, worst_off = 0.0;
    for (double ind : grid_indists()) {
        for (double phi : grid_phases()) {
            const FisherMatrix numeric = qfim_pure_numeric(state_fn, ParamPoint(ind, phi));
            const double ref_phi = 2.0 * (ind + 1.0);
            const double ref_ind = 1.0 / (ind * (1.0 - ind));
            worst_phi = std::max(worst_phi, std::abs(numeric.phi_phi().value - ref_phi));
            worst_ind_rel =
                std::max(worst_ind_rel, std::abs(numeric.ind_ind().value - ref_ind) / ref_ind);
            worst_off = std::max({worst_off, std::abs(numeric.at(0, 1).value),
                                  std::abs(numeric.at(1, 0).value)});
        }
    }
    const double elapsed = seconds_since(start);
    const bool ok =
        worst_phi <= 1e-6 && worst_ind_rel <= 1e-5 && worst_off <= 1e-8 && elapsed < 1.0;
    report(1, ok,
           "numeric QFI matrix matches closed form on the 9x15 grid (worst phase abs " +
               fmt(worst_phi, 2) + " <= 1e-6, worst indist rel " + fmt(worst_ind_rel, 2) +
               " <= 1e-5, worst off-diag " + fmt(worst_off, 2) + " <= 1e-8, " + fmt(elapsed, 2) +
               " s < 1 s)");
}

// 2. The counting measurement extracts all the quantum information.
void criterion_2() {
    double worst_analytic = 0.0, worst_numeric = 0.0;
    for (double ind : grid_indists()) {
        const FisherMatrix closed = qfim_closed_form(ind);
        for (double phi : grid_phases()) {
            const ParamPoint p(ind, phi);
            const FisherMatrix analytic = cfim_analytic(p);
            const FisherMatrix numeric = cfim_numeric(p);
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j) {
                    worst_analytic = std::max(
                        worst_analytic, std::abs(analytic.at(i, j).value - closed.at(i, j).value));
                    worst_numeric = std::max(
                        worst_numeric, std::abs(numeric.at(i, j).value - closed.at(i, j).value));
                }
            }
        }
    }
    const bool ok = worst_analytic <= 1e-12 && worst_numeric <= 1e-6;
    report(2, ok,
           "classical Fisher matrix equals the quantum one (analytic worst " +
               fmt(worst_analytic, 2) + " <= 1e-12, numeric worst " + fmt(worst_numeric, 2) +
               " <= 1e-6)");
}

// 3. Output-state amplitudes against the outcome-probability formulas.
void criterion_3() {
    SplitMix64 rng(20240817);
    double worst_prob = 0.0, worst_norm = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const ParamPoint p(rng.next_double(), pi * rng.next_double());
        const FockKet ket = output_state(PairCount(1), p);
        const OutcomeDistribution dist = outcome_distribution(p);
        double norm = 0.0;
        for (int i = 0; i < kNumOutcomes; ++i) {
            const double sq = std::norm(ket.amplitude(supported_outcomes()[i]));
            worst_prob = std::max(worst_prob, std::abs(sq - dist.probs[i]));
            norm += sq;
        }
        worst_norm = std::max(worst_norm, std::abs(norm - 1.0));
    }
    // The operator route and the written-out single-pair state agree up to
    // one global sign, the same at every grid point.
    double worst_sign = 0.0;
    for (double ind : grid_indists()) {
        for (double phi : grid_phases()) {
            const ParamPoint p(ind, phi);
            const FockKet op = output_state(PairCount(1), p);
            const FockKet closed = output_state_closed_form(p);
            for (const auto& [occ, amp] : closed.amplitudes()) {
                worst_sign = std::max(worst_sign, std::abs(op.amplitude(occ) + amp));
            }
        }
    }
    const bool ok = worst_prob <= 1e-12 && worst_norm <= 1e-12 && worst_sign <= 1e-12;
    report(3, ok,
           "squared amplitudes match outcome probabilities at 10^4 random points (worst " +
               fmt(worst_prob, 2) + " <= 1e-12, norm defect " + fmt(worst_norm, 2) +
               " <= 1e-12, sign-relation defect " + fmt(worst_sign, 2) + " <= 1e-12)");
}

// 4. Generator-variance QFI at the distinguishable and bosonic endpoints.
void criterion_4() {
    double worst = 0.0;
    for (int n = 1; n <= 3; ++n) {
        const double at_zero =
            qfi_from_generator(output_state(PairCount(n), ParamPoint(0.0, 0.7)), PairCount(n));
        const double at_one =
            qfi_from_generator(output_state(PairCount(n), ParamPoint(1.0, 0.7)), PairCount(n));
        worst = std::max(worst, std::abs(at_zero - 2.0 * n));
        worst = std::max(worst, std::abs(at_one - 2.0 * n * (n + 1.0)));
    }
    const bool ok = worst <= 1e-6;
    report(4, ok,
           "per-pair-count phase QFI hits 2n and 2n(n+1) at the endpoints for n = 1, 2, 3 "
           "(worst abs " +
               fmt(worst, 2) + " <= 1e-6)");
}

// 5. Monte Carlo Fisher information reaches the quantum bound at scale.
void criterion_5() {
    const auto start = std::chrono::steady_clock::now();
    double worst_phi = 0.0, worst_ind = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < 5; ++i) {
        const double ind = 0.1 + 0.2 * static_cast<double>(i);
        const MonteCarloResult mc =
            monte_carlo(ParamPoint(ind, 0.7), 750, 10000, cell_seed(12345, i));
        const double ref_phi = 2.0 * (ind + 1.0);
        const double ref_ind = 1.0 / (ind * (1.0 - ind));
        if (mc.fisher_ml_phi.infinite || mc.fisher_ml_indist.infinite) {
            finite = false;
            continue;
        }
        worst_phi = std::max(worst_phi, std::abs(mc.fisher_ml_phi.value - ref_phi) / ref_phi);
        worst_ind = std::max(worst_ind, std::abs(mc.fisher_ml_indist.value - ref_ind) / ref_ind);
    }
    const double elapsed = seconds_since(start);
    const bool ok = finite && worst_phi <= 0.10 && worst_ind <= 0.10 && elapsed < 120.0;
    report(5, ok,
           "ML Fisher information within 10% of the QFI at N=750, M=10^4, phi=0.7 "
           "(worst phase dev " +
               fmt(worst_phi, 3) + ", worst indist dev " + fmt(worst_ind, 3) + ", " +
               fmt(elapsed, 3) + " s < 120 s)");
}

struct FitSummary {
    LinearFit fit;
    double sigma = 0.0;
};

// Each sweep record already carries the mean estimate over M experiments, so
// the slope check fits those per-cell means against the set values directly,
// one point per cell.
FitSummary slope_fit(const std::vector<SweepRecord>& records, bool use_phi) {
    std::vector<double> xs, ys;
    for (const SweepRecord& r : records) {
        xs.push_back(use_phi ? r.set_phi : r.set_indist);
        ys.push_back(use_phi ? r.est_phi : r.est_indist);
    }
    FitSummary s;
    s.fit = linear_fit(xs, ys);
    s.sigma = std::abs(s.fit.slope - 1.0) / s.fit.slope_se;
    return s;
}

// 6. Mean estimates against set values over the default sweep.
void criterion_6(const std::vector<SweepRecord>& records) {
    const FitSummary phi = slope_fit(records, true);
    const FitSummary ind = slope_fit(records, false);
    const bool ok = phi.sigma <= 2.0 && ind.sigma <= 2.0;
    report(6, ok,
           "estimate-vs-set slopes within 2 standard errors of 1 (phase " + fmt(phi.fit.slope, 6) +
               " +/- " + fmt(phi.fit.slope_se, 3) + " = " + fmt(phi.sigma, 3) +
               " se away; indist " + fmt(ind.fit.slope, 6) + " +/- " + fmt(ind.fit.slope_se, 3) +
               " = " + fmt(ind.sigma, 3) + " se away)");
    if (!ok) {
        note("the phase MLE is attracted toward the interior at the cells nearest 0 and pi "
             "(clamped grid-plus-simplex search on a bounded box), which tilts the fitted "
             "slope; M=10^4 repetitions per cell shrink the standard error enough to resolve "
             "that small bias, so the phase slope lands outside the 2-se band");
        note("no fit variant passes both parameters: per-set-value averaging dilutes the "
             "phase bias below 2 se but its 5-point indist fit leaves only 3 residual dof, "
             "and restricting to interior phases resolves the phase bias beyond 5 se");
    }
}

// 7. Cramer-Rao band occupancy, degenerate-cell flagging, and the dip.
void criterion_7(const std::vector<SweepRecord>& records) {
    const QcrReport qcr = qcr_check(records);

    std::int64_t band_cells = 0, band_good = 0, degenerate = 0, flagged = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const QcrCellStatus& cell = qcr.cells[i];
        const bool phi_scored = cell.status_phi == "pass" || cell.status_phi == "fail";
        const bool ind_scored = cell.status_indist == "pass" || cell.status_indist == "fail";
        if (phi_scored && ind_scored) {
            ++band_cells;
            if (cell.status_phi == "pass" && cell.status_indist == "pass") ++band_good;
        }
        if (degenerate_phase_distance(records[i].set_phi) <= kDegenerateRadius) {
            ++degenerate;
            if (cell.status_phi == "excluded: degenerate phase") ++flagged;
        }
    }
    const double frac = band_cells > 0 ? static_cast<double>(band_good) / band_cells : 0.0;
    const bool band_ok = frac >= 0.90;
    const bool flag_ok = degenerate > 0 && flagged == degenerate;

    // Divergence signature at the exact ends of the phase range: the ML
    // variance collapses there, so the mapped information is either flagged
    // infinite or orders of magnitude above the finite quantum value.
    bool ends_ok = true;
    for (const SweepRecord& r : records) {
        if (r.set_phi != 0.0 && r.set_phi != pi) continue;
        if (!(r.fml_phi.infinite || r.fml_phi.value >= 100.0 * r.qfi_phi.value)) ends_ok = false;
    }

    // The dip: cells next to a degenerate phase carry less phase information
    // than the interior average, row by row.
    bool dip_ok = true;
    std::string dip_text;
    for (double ind : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        double neighbor_sum = 0.0, interior_sum = 0.0;
        int neighbor_count = 0, interior_count = 0;
        for (const SweepRecord& r : records) {
            if (r.set_indist != ind || r.fml_phi.infinite) continue;
            const double dist = degenerate_phase_distance(r.set_phi);
            if (dist > kDegenerateRadius) {
                interior_sum += r.fml_phi.value;
                ++interior_count;
            } else if (dist > 0.0) {
                neighbor_sum += r.fml_phi.value;
                ++neighbor_count;
            }
        }
        const double neighbor = neighbor_sum / neighbor_count;
        const double interior = interior_sum / interior_count;
        if (!(neighbor < interior)) dip_ok = false;
        dip_text += " I=" + fmt(ind, 1) + ": " + fmt(neighbor, 3) + " < " + fmt(interior, 3) + ";";
    }

    const bool ok = band_ok && flag_ok && ends_ok && dip_ok;
    report(7, ok,
           "QCR band N*var*F in [0.9, 1.3] holds on " + std::to_string(band_good) + "/" +
               std::to_string(band_cells) + " interior cells (" + fmt(100.0 * frac, 3) +
               "% >= 90%), " + std::to_string(flagged) + "/" + std::to_string(degenerate) +
               " degenerate cells flagged, phase-information dip reproduced next to every "
               "degenerate phase");
    note("neighbor-vs-interior mean ML phase information:" + dip_text);
    std::string half_text;
    for (const SweepRecord& r : records) {
        if (r.set_phi != pi * 0.5) continue;
        half_text += " I=" + fmt(r.set_indist, 1) + ": " +
                     (r.fml_phi.infinite ? std::string("inf") : fmt(r.fml_phi.value, 4)) +
                     " (2/(1-I) = " + fmt(2.0 / (1.0 - r.set_indist), 4) + ");";
    }
    note("at the central degenerate phase the ML value tracks 2/(1-I), not the QFI:" + half_text);
}

// 8. Byte-identical datasets independent of the worker count.
void criterion_8(const std::string& path_a, const SweepConfig& base,
                 const std::string& path_b) {
    SweepConfig config = base;
    config.out = path_b;
    config.threads = 3;
    run_sweep(config);
    const bool ok = slurp(path_a) == slurp(path_b);
    report(8, ok,
           std::string("default sweep datasets byte-identical across worker counts (") +
               (ok ? "files match" : "files differ") + ")");
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "twophoton_acceptance";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);

    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();

    SweepConfig config;  // experiment-scale defaults: 45 phases x 5 indists, N=750, M=10^4
    config.out = (dir / "sweep_a.csv").string();
    config.threads = 1;
    const SweepResult sweep = run_sweep(config);
    note("default sweep: " + std::to_string(sweep.stats.cells_computed) + " cells computed in " +
         fmt_seconds(seconds_since(start)) + " s total so far");

    criterion_6(sweep.records);
    criterion_7(sweep.records);
    criterion_8(config.out, config, (dir / "sweep_b.csv").string());

    std::cout << (overall_ok ? "acceptance: all criteria passed" : "acceptance: FAILURES above")
              << " (" << fmt_seconds(seconds_since(start)) << " s)" << std::endl;
    return overall_ok ? 0 : 1;
}
