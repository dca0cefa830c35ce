#pragma once

// Maximum-likelihood estimation of (indistinguishability, phase) from
// measured coincidence counts, plus the Monte Carlo experiment driver.
//
// The estimator follows a fixed two-stage recipe: an exhaustive scan over a
// 361 x 201 grid (phase step pi/360, indistinguishability step 1/200),
// followed by a bounded Nelder-Mead refinement from the best grid point down
// to parameter tolerance 1e-6. Ties on the grid resolve to the smallest
// phase, then the smallest indistinguishability.
//
// The log-likelihood separates into a phase-only part and an
// indistinguishability-only part: every outcome probability is a product of
// a function of indist and a function of phase, so the 2-D grid argmax (with
// the lexicographic tie-break above) equals the pair of 1-D axis argmaxes.
// The scan below exploits that and touches 562 points instead of 72561.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <vector>

#include "twophoton/fisher.hpp"
#include "twophoton/random.hpp"

namespace twophoton {

// Counts per outcome, aligned with supported_outcomes() order.
struct CountVector {
    std::array<std::int64_t, kNumOutcomes> counts{};

    std::int64_t total() const {
        std::int64_t sum = 0;
        for (std::int64_t c : counts) {
            if (c < 0) throw std::invalid_argument("CountVector: negative count");
            sum += c;
        }
        return sum;
    }

    std::int64_t& at(const OccupationVector& occupation) {
        return counts[static_cast<std::size_t>(outcome_index(occupation))];
    }

    std::int64_t at(const OccupationVector& occupation) const {
        return counts[static_cast<std::size_t>(outcome_index(occupation))];
    }

    static int outcome_index(const OccupationVector& occupation) {
        const auto& outcomes = supported_outcomes();
        for (int i = 0; i < kNumOutcomes; ++i) {
            if (outcomes[static_cast<std::size_t>(i)] == occupation) return i;
        }
        throw std::invalid_argument("CountVector: occupation " + occupation_to_string(occupation) +
                                    " is not a supported outcome");
    }
};

// Draws n_samples outcomes by CDF inversion and accumulates counts.
// Consumes exactly n_samples values from the stream.
inline CountVector sample_counts(const OutcomeDistribution& distribution, std::int64_t n_samples,
                                 SplitMix64& rng) {
    if (n_samples < 1) throw std::invalid_argument("sample_counts: n_samples must be at least 1");
    double sum = 0.0;
    int last_positive = -1;
    std::array<double, kNumOutcomes> cdf{};
    for (int i = 0; i < kNumOutcomes; ++i) {
        const double p = distribution.probs[static_cast<std::size_t>(i)];
        if (!(p >= 0.0)) throw std::invalid_argument("sample_counts: negative or NaN probability");
        sum += p;
        cdf[static_cast<std::size_t>(i)] = sum;
        if (p > 0.0) last_positive = i;
    }
    if (std::abs(sum - 1.0) > 1e-9 || last_positive < 0) {
        throw std::invalid_argument("sample_counts: probabilities do not sum to 1");
    }

    CountVector out;
    for (std::int64_t s = 0; s < n_samples; ++s) {
        const double u = rng.next_double();
        int drawn = last_positive;
        for (int i = 0; i < kNumOutcomes; ++i) {
            if (u < cdf[static_cast<std::size_t>(i)] &&
                distribution.probs[static_cast<std::size_t>(i)] > 0.0) {
                drawn = i;
                break;
            }
        }
        ++out.counts[static_cast<std::size_t>(drawn)];
    }
    return out;
}

// Sum of count * log(probability) over the observed outcomes. A zero count
// contributes zero regardless of the probability; a positive count on a
// zero-probability outcome makes the whole likelihood -infinity.
inline double log_likelihood(const CountVector& counts, const ParamPoint& point) {
    const OutcomeDistribution distribution = outcome_distribution(point);
    double ll = 0.0;
    for (int i = 0; i < kNumOutcomes; ++i) {
        const std::int64_t c = counts.counts[static_cast<std::size_t>(i)];
        if (c < 0) throw std::invalid_argument("log_likelihood: negative count");
        if (c == 0) continue;
        const double p = distribution.probs[static_cast<std::size_t>(i)];
        if (p <= 0.0) return -std::numeric_limits<double>::infinity();
        ll += static_cast<double>(c) * std::log(p);
    }
    return ll;
}

namespace detail {

inline constexpr int kGridPhasePoints = 361;
inline constexpr int kGridIndistPoints = 201;
inline constexpr double kRefineTolerance = 1e-6;
inline constexpr int kRefineMaxIterations = 500;

// Sufficient statistics of the factored log-likelihood.
//
// Splitting the counts by which parameter shapes them:
//   indist part:  s_ind * log(indist) + s_dist * log(1 - indist)
//   phase part:   q * log(sin(phi/2)) + p * log(cos(phi/2))
//                 + r * log(|cos(phi)|) + k0
struct LikelihoodStats {
    double s_ind;   // counts on outcomes whose probability carries indist
    double s_dist;  // counts on outcomes whose probability carries 1 - indist
    double q;       // coefficient of log(sin(phi/2))
    double p;       // coefficient of log(cos(phi/2))
    double r;       // coefficient of log(|cos(phi)|)
    double k0;      // constant offset
};

inline LikelihoodStats likelihood_stats(const CountVector& counts) {
    // Outcome order: 2000, 1100, 1010, 1001, 0200, 0110, 0101.
    const auto& c = counts.counts;
    for (std::int64_t v : c) {
        if (v < 0) throw std::invalid_argument("mle: negative count");
    }
    const double both_same_mode = static_cast<double>(c[0] + c[4]);  // indist * sin(phi)^2 / 2
    const double cross_pairs = static_cast<double>(c[2] + c[6]);     // (1-indist) * sin(phi)^2 / 4
    const double coincide = static_cast<double>(c[1]);               // indist * cos(phi)^2
    const double anti_low = static_cast<double>(c[3]);               // (1-indist) * cos(phi/2)^4
    const double anti_high = static_cast<double>(c[5]);              // (1-indist) * sin(phi/2)^4

    LikelihoodStats st;
    st.s_ind = both_same_mode + coincide;
    st.s_dist = cross_pairs + anti_low + anti_high;
    // sin(phi)^2 = 4 sin(phi/2)^2 cos(phi/2)^2
    st.q = 2.0 * (both_same_mode + cross_pairs) + 4.0 * anti_high;
    st.p = 2.0 * (both_same_mode + cross_pairs) + 4.0 * anti_low;
    st.r = 2.0 * coincide;
    st.k0 = both_same_mode * std::log(2.0);
    return st;
}

// coefficient * log_value with the convention 0 * (-inf) == 0. The naive
// product is NaN under IEEE rules, which would poison the whole scan.
inline double weighted_log(double coefficient, double log_value) {
    return coefficient == 0.0 ? 0.0 : coefficient * log_value;
}

inline double indist_part(const LikelihoodStats& st, double indist) {
    return weighted_log(st.s_ind, std::log(indist)) +
           weighted_log(st.s_dist, std::log1p(-indist));
}

inline double phase_part(const LikelihoodStats& st, double phi) {
    const double half = 0.5 * phi;
    return weighted_log(st.q, std::log(std::sin(half))) +
           weighted_log(st.p, std::log(std::cos(half))) +
           weighted_log(st.r, std::log(std::abs(std::cos(phi)))) + st.k0;
}

struct GridTables {
    std::array<double, kGridPhasePoints> phase_value;
    std::array<double, kGridIndistPoints> indist_value;
};

inline const GridTables& grid_tables() {
    static const GridTables tables = [] {
        GridTables t;
        for (int j = 0; j < kGridPhasePoints; ++j) {
            // pi * (j/360) never rounds above pi itself, so every grid phase
            // is a valid parameter value.
            t.phase_value[static_cast<std::size_t>(j)] =
                std::numbers::pi * (static_cast<double>(j) / 360.0);
        }
        for (int k = 0; k < kGridIndistPoints; ++k) {
            t.indist_value[static_cast<std::size_t>(k)] = static_cast<double>(k) / 200.0;
        }
        return t;
    }();
    return tables;
}

struct GridArgmax {
    int phase_index;
    int indist_index;
    double value;
};

inline GridArgmax grid_argmax(const LikelihoodStats& st) {
    const GridTables& grid = grid_tables();
    int best_j = 0;
    double best_phase = phase_part(st, grid.phase_value[0]);
    for (int j = 1; j < kGridPhasePoints; ++j) {
        const double value = phase_part(st, grid.phase_value[static_cast<std::size_t>(j)]);
        if (value > best_phase) {
            best_phase = value;
            best_j = j;
        }
    }
    int best_k = 0;
    double best_indist = indist_part(st, grid.indist_value[0]);
    for (int k = 1; k < kGridIndistPoints; ++k) {
        const double value = indist_part(st, grid.indist_value[static_cast<std::size_t>(k)]);
        if (value > best_indist) {
            best_indist = value;
            best_k = k;
        }
    }
    return GridArgmax{best_j, best_k, best_phase + best_indist};
}

// Nelder-Mead on the negated factored log-likelihood, with every candidate
// vertex projected back into [0, pi] x [0, 1]. Plain accept/reflect/expand/
// contract/shrink with standard coefficients.
inline ParamPoint refine(const LikelihoodStats& st, double phi0, double ind0) {
    struct Vertex {
        double phi, ind, cost;
    };
    const auto clamp_phi = [](double v) { return std::clamp(v, 0.0, std::numbers::pi); };
    const auto clamp_ind = [](double v) { return std::clamp(v, 0.0, 1.0); };
    const auto cost = [&st](double phi, double ind) {
        return -(phase_part(st, phi) + indist_part(st, ind));
    };
    const auto make = [&](double phi, double ind) {
        phi = clamp_phi(phi);
        ind = clamp_ind(ind);
        return Vertex{phi, ind, cost(phi, ind)};
    };

    const double phi_step = std::numbers::pi / 360.0;
    const double ind_step = 1.0 / 200.0;
    std::array<Vertex, 3> simplex = {
        make(phi0, ind0),
        make(phi0 + (phi0 + phi_step <= std::numbers::pi ? phi_step : -phi_step), ind0),
        make(phi0, ind0 + (ind0 + ind_step <= 1.0 ? ind_step : -ind_step)),
    };

    const auto better = [](const Vertex& a, const Vertex& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.phi != b.phi) return a.phi < b.phi;
        return a.ind < b.ind;
    };

    for (int iter = 0; iter < kRefineMaxIterations; ++iter) {
        std::sort(simplex.begin(), simplex.end(), better);
        const double spread = std::max(
            {std::abs(simplex[1].phi - simplex[0].phi), std::abs(simplex[2].phi - simplex[0].phi),
             std::abs(simplex[1].ind - simplex[0].ind), std::abs(simplex[2].ind - simplex[0].ind)});
        if (spread < kRefineTolerance) break;

        const double cphi = 0.5 * (simplex[0].phi + simplex[1].phi);
        const double cind = 0.5 * (simplex[0].ind + simplex[1].ind);
        const Vertex reflected = make(cphi + (cphi - simplex[2].phi), cind + (cind - simplex[2].ind));
        if (better(reflected, simplex[0])) {
            const Vertex expanded =
                make(cphi + 2.0 * (cphi - simplex[2].phi), cind + 2.0 * (cind - simplex[2].ind));
            simplex[2] = better(expanded, reflected) ? expanded : reflected;
        } else if (better(reflected, simplex[1])) {
            simplex[2] = reflected;
        } else {
            const Vertex contracted =
                make(cphi + 0.5 * (simplex[2].phi - cphi), cind + 0.5 * (simplex[2].ind - cind));
            if (better(contracted, simplex[2])) {
                simplex[2] = contracted;
            } else {
                simplex[1] = make(simplex[0].phi + 0.5 * (simplex[1].phi - simplex[0].phi),
                                  simplex[0].ind + 0.5 * (simplex[1].ind - simplex[0].ind));
                simplex[2] = make(simplex[0].phi + 0.5 * (simplex[2].phi - simplex[0].phi),
                                  simplex[0].ind + 0.5 * (simplex[2].ind - simplex[0].ind));
            }
        }
    }
    std::sort(simplex.begin(), simplex.end(), better);
    return ParamPoint(simplex[0].ind, simplex[0].phi);
}

}  // namespace detail

// Maximum-likelihood estimate from one experiment's counts.
inline ParamPoint mle(const CountVector& counts) {
    if (counts.total() < 1) throw std::invalid_argument("mle: no counts");
    const detail::LikelihoodStats st = detail::likelihood_stats(counts);
    const detail::GridTables& grid = detail::grid_tables();
    const detail::GridArgmax best = detail::grid_argmax(st);
    return detail::refine(st, grid.phase_value[static_cast<std::size_t>(best.phase_index)],
                          grid.indist_value[static_cast<std::size_t>(best.indist_index)]);
}

// 1 / (n_samples * variance) with an explicit flag when the variance is zero.
inline InfoValue fisher_from_ml(double variance, std::int64_t n_samples) {
    if (n_samples < 1) throw std::invalid_argument("fisher_from_ml: n_samples must be at least 1");
    if (!(variance >= 0.0)) {
        throw std::invalid_argument("fisher_from_ml: variance must be non-negative");
    }
    if (variance == 0.0) return InfoValue::unbounded();
    return InfoValue::finite(1.0 / (static_cast<double>(n_samples) * variance));
}

struct MonteCarloResult {
    ParamPoint set_point{0.0, 0.0};
    std::int64_t n_samples = 0;
    std::int64_t n_experiments = 0;
    std::uint64_t master_seed = 0;
    double mean_indist = 0.0;
    double mean_phi = 0.0;
    double var_indist = 0.0;  // unbiased, divisor n_experiments - 1
    double var_phi = 0.0;
    InfoValue fisher_ml_indist;
    InfoValue fisher_ml_phi;
};

// Runs n_experiments independent experiments of n_samples draws each and
// summarizes the ML estimates. Experiment i always uses the stream derived
// from (master_seed, i) and aggregation walks results in index order, so the
// output is bitwise identical for every thread count.
inline MonteCarloResult monte_carlo(const ParamPoint& set_point, std::int64_t n_samples,
                                    std::int64_t n_experiments, std::uint64_t master_seed,
                                    unsigned threads = 0) {
    if (n_samples < 1) throw std::invalid_argument("monte_carlo: n_samples must be at least 1");
    if (n_experiments < 2) {
        throw std::invalid_argument("monte_carlo: n_experiments must be at least 2");
    }
    const OutcomeDistribution distribution = outcome_distribution(set_point);

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(
        std::min<std::int64_t>(n_experiments, static_cast<std::int64_t>(threads)));

    std::vector<ParamPoint> estimates(static_cast<std::size_t>(n_experiments),
                                      ParamPoint(0.0, 0.0));
    const auto run_range = [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) {
            SplitMix64 stream = derive_stream(master_seed, static_cast<std::uint64_t>(i));
            const CountVector counts = sample_counts(distribution, n_samples, stream);
            estimates[static_cast<std::size_t>(i)] = mle(counts);
        }
    };
    if (threads <= 1) {
        run_range(0, n_experiments);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        const std::int64_t chunk = (n_experiments + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::int64_t lo = static_cast<std::int64_t>(t) * chunk;
            const std::int64_t hi = std::min<std::int64_t>(lo + chunk, n_experiments);
            if (lo >= hi) break;
            pool.emplace_back(run_range, lo, hi);
        }
        for (std::thread& t : pool) t.join();
    }

    MonteCarloResult result;
    result.set_point = set_point;
    result.n_samples = n_samples;
    result.n_experiments = n_experiments;
    result.master_seed = master_seed;

    double sum_ind = 0.0, sum_phi = 0.0;
    for (const ParamPoint& e : estimates) {
        sum_ind += e.indist;
        sum_phi += e.phi;
    }
    const double m = static_cast<double>(n_experiments);
    result.mean_indist = sum_ind / m;
    result.mean_phi = sum_phi / m;

    double ss_ind = 0.0, ss_phi = 0.0;
    for (const ParamPoint& e : estimates) {
        const double di = e.indist - result.mean_indist;
        const double dp = e.phi - result.mean_phi;
        ss_ind += di * di;
        ss_phi += dp * dp;
    }
    result.var_indist = ss_ind / (m - 1.0);
    result.var_phi = ss_phi / (m - 1.0);
    result.fisher_ml_indist = fisher_from_ml(result.var_indist, n_samples);
    result.fisher_ml_phi = fisher_from_ml(result.var_phi, n_samples);
    return result;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double intercept_se = 0.0;
};

// Ordinary least squares with standard errors from the residual variance.
inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("linear_fit: size mismatch");
    const std::size_t n = x.size();
    if (n < 3) throw std::invalid_argument("linear_fit: need at least 3 points");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
            throw std::invalid_argument("linear_fit: non-finite input");
        }
    }
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mean_x) * (x[i] - mean_x);
        sxy += (x[i] - mean_x) * (y[i] - mean_y);
    }
    if (sxx <= 0.0) throw std::invalid_argument("linear_fit: degenerate x values");

    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;

    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        rss += r * r;
    }
    const double sigma2 = rss / static_cast<double>(n - 2);
    fit.slope_se = std::sqrt(sigma2 / sxx);
    fit.intercept_se =
        std::sqrt(sigma2 * (1.0 / static_cast<double>(n) + mean_x * mean_x / sxx));
    return fit;
}

}  // namespace twophoton
