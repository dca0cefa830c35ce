#pragma once

// Quantum and classical Fisher information for the two-photon interferometer.
// Matrices are 2x2 over the parameter order (phi, indistinguishability);
// the indistinguishability diagonal diverges at the domain endpoints and is
// carried as an explicit flag rather than a large float.

#include <functional>

#include "twophoton/interferometer.hpp"

namespace twophoton {

struct InfoValue {
    double value = 0.0;
    bool infinite = false;

    static InfoValue finite(double v) { return {v, false}; }
    static InfoValue unbounded() { return {0.0, true}; }

    friend bool operator==(const InfoValue&, const InfoValue&) = default;
};

// Index order: 0 = phi, 1 = indistinguishability.
struct FisherMatrix {
    InfoValue entries[2][2]{};

    const InfoValue& at(int i, int j) const { return entries[i][j]; }
    InfoValue& at(int i, int j) { return entries[i][j]; }

    const InfoValue& phi_phi() const { return entries[0][0]; }
    const InfoValue& ind_ind() const { return entries[1][1]; }
};

// Single-pair detection patterns with nonzero probability, in canonical
// basis order. The remaining three two-photon patterns (0020, 0011, 0002)
// never fire.
inline const std::vector<OccupationVector>& supported_outcomes() {
    static const std::vector<OccupationVector> outcomes = {
        {2, 0, 0, 0}, {1, 1, 0, 0}, {1, 0, 1, 0}, {1, 0, 0, 1},
        {0, 2, 0, 0}, {0, 1, 1, 0}, {0, 1, 0, 1},
    };
    return outcomes;
}

inline constexpr int kNumOutcomes = 7;

// Probabilities of the ten two-photon patterns; the seven supported ones sum
// to one. Index order of probs matches supported_outcomes().
struct OutcomeDistribution {
    std::array<double, kNumOutcomes> probs{};

    double probability(const OccupationVector& occ) const {
        const auto& outcomes = supported_outcomes();
        for (int i = 0; i < kNumOutcomes; ++i)
            if (outcomes[static_cast<std::size_t>(i)] == occ)
                return probs[static_cast<std::size_t>(i)];
        return 0.0;
    }
};

// Single-pair outcome probabilities:
//   p(2000) = p(0200) = I sin^2(phi) / 2
//   p(1100) = I cos^2(phi)
//   p(1010) = p(0101) = (1-I) sin^2(phi) / 4
//   p(1001) = (1-I) cos^4(phi/2)
//   p(0110) = (1-I) sin^4(phi/2)
inline OutcomeDistribution outcome_distribution(const ParamPoint& p) {
    const double ind = p.indist;
    const double s = std::sin(p.phi);
    const double c = std::cos(p.phi);
    const double ch = std::cos(0.5 * p.phi);
    const double sh = std::sin(0.5 * p.phi);

    OutcomeDistribution d;
    d.probs[0] = ind * s * s * 0.5;
    d.probs[1] = ind * c * c;
    d.probs[2] = (1.0 - ind) * s * s * 0.25;
    d.probs[3] = (1.0 - ind) * ch * ch * ch * ch;
    d.probs[4] = d.probs[0];
    d.probs[5] = (1.0 - ind) * sh * sh * sh * sh;
    d.probs[6] = d.probs[2];
    return d;
}

// diag(2(I+1), 1/(I(1-I))); the second entry diverges at I in {0, 1}.
inline FisherMatrix qfim_closed_form(double indist) {
    if (!(indist >= 0.0 && indist <= 1.0))
        throw std::invalid_argument("indistinguishability outside [0, 1]");
    FisherMatrix f;
    f.at(0, 0) = InfoValue::finite(2.0 * (indist + 1.0));
    f.at(0, 1) = InfoValue::finite(0.0);
    f.at(1, 0) = InfoValue::finite(0.0);
    if (indist == 0.0 || indist == 1.0) f.at(1, 1) = InfoValue::unbounded();
    else f.at(1, 1) = InfoValue::finite(1.0 / (indist * (1.0 - indist)));
    return f;
}

namespace detail {

inline void check_step_distance(const ParamPoint& p, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
    if (p.indist < 10.0 * step || 1.0 - p.indist < 10.0 * step)
        throw std::invalid_argument("point too close to indistinguishability boundary for "
                                    "finite differences");
    if (p.phi < 10.0 * step || std::numbers::pi - p.phi < 10.0 * step)
        throw std::invalid_argument("point too close to phase boundary for finite differences");
}

}  // namespace detail

// Pure-state quantum Fisher information by central differences on the state
// amplitudes: F_ij = 4 Re(<d_i|d_j> - <d_i|psi><psi|d_j>). The state map must
// return normalized kets; parameter index order is (phi, indist).
inline FisherMatrix qfim_pure_numeric(const std::function<FockKet(const ParamPoint&)>& state_fn,
                                      const ParamPoint& p, double step = 1e-5) {
    detail::check_step_distance(p, step);

    auto state_at = [&](double phi, double ind) {
        FockKet k = state_fn(ParamPoint(ind, phi));
        if (std::abs(k.norm2() - 1.0) > 1e-9)
            throw std::invalid_argument("state map returned a non-normalized ket");
        return k;
    };

    FockKet center = state_at(p.phi, p.indist);
    const double inv2h = 1.0 / (2.0 * step);
    FockKet d_phi = ket_scale(
        ket_add(state_at(p.phi + step, p.indist), ket_scale(state_at(p.phi - step, p.indist), -1.0)),
        inv2h);
    FockKet d_ind = ket_scale(
        ket_add(state_at(p.phi, p.indist + step), ket_scale(state_at(p.phi, p.indist - step), -1.0)),
        inv2h);

    const FockKet* d[2] = {&d_phi, &d_ind};
    complex overlap[2] = {inner(center, d_phi), inner(center, d_ind)};

    FisherMatrix f;
    for (int i = 0; i < 2; ++i) {
        for (int j = i; j < 2; ++j) {
            complex raw = inner(*d[i], *d[j]) - std::conj(overlap[i]) * overlap[j];
            double v = 4.0 * raw.real();
            f.at(i, j) = InfoValue::finite(v);
            f.at(j, i) = InfoValue::finite(v);
        }
    }
    return f;
}

namespace detail {

struct ProbDerivatives {
    std::array<double, kNumOutcomes> p{};
    std::array<double, kNumOutcomes> d_phi{};
    std::array<double, kNumOutcomes> d_ind{};
};

inline ProbDerivatives analytic_prob_derivatives(const ParamPoint& pt) {
    const double ind = pt.indist;
    const double s = std::sin(pt.phi);
    const double c = std::cos(pt.phi);
    const double ch = std::cos(0.5 * pt.phi);
    const double sh = std::sin(0.5 * pt.phi);

    ProbDerivatives d;
    d.p = outcome_distribution(pt).probs;

    // 2000 and 0200
    d.d_phi[0] = d.d_phi[4] = ind * s * c;
    d.d_ind[0] = d.d_ind[4] = s * s * 0.5;
    // 1100
    d.d_phi[1] = -2.0 * ind * c * s;
    d.d_ind[1] = c * c;
    // 1010 and 0101
    d.d_phi[2] = d.d_phi[6] = (1.0 - ind) * s * c * 0.5;
    d.d_ind[2] = d.d_ind[6] = -s * s * 0.25;
    // 1001
    d.d_phi[3] = -2.0 * (1.0 - ind) * ch * ch * ch * sh;
    d.d_ind[3] = -ch * ch * ch * ch;
    // 0110
    d.d_phi[5] = 2.0 * (1.0 - ind) * sh * sh * sh * ch;
    d.d_ind[5] = -sh * sh * sh * sh;
    return d;
}

inline FisherMatrix cfim_from_derivatives(const ProbDerivatives& d) {
    double f[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (int m = 0; m < kNumOutcomes; ++m) {
        const std::size_t mi = static_cast<std::size_t>(m);
        if (d.p[mi] <= 0.0) {
            // An outcome probability can only vanish where its gradient does;
            // the limit of the summand is zero there.
            if (std::abs(d.d_phi[mi]) > 1e-9 || std::abs(d.d_ind[mi]) > 1e-9)
                throw std::logic_error("vanishing probability with nonzero gradient");
            continue;
        }
        const double grad[2] = {d.d_phi[mi], d.d_ind[mi]};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) f[i][j] += grad[i] * grad[j] / d.p[mi];
    }
    FisherMatrix out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.at(i, j) = InfoValue::finite(f[i][j]);
    return out;
}

}  // namespace detail

// Classical Fisher information of the detection statistics from the exact
// probability derivatives. The indistinguishability endpoints are excluded:
// the information diverges there along with the quantum bound.
inline FisherMatrix cfim_analytic(const ParamPoint& p) {
    if (p.indist == 0.0 || p.indist == 1.0)
        throw std::invalid_argument("classical information diverges at the "
                                    "indistinguishability boundary");
    return detail::cfim_from_derivatives(detail::analytic_prob_derivatives(p));
}

// Same quantity with the derivatives replaced by central differences of the
// outcome probabilities.
inline FisherMatrix cfim_numeric(const ParamPoint& p, double step = 1e-5) {
    detail::check_step_distance(p, step);
    detail::ProbDerivatives d;
    d.p = outcome_distribution(p).probs;
    const double inv2h = 1.0 / (2.0 * step);
    auto plus_phi = outcome_distribution(ParamPoint(p.indist, p.phi + step)).probs;
    auto minus_phi = outcome_distribution(ParamPoint(p.indist, p.phi - step)).probs;
    auto plus_ind = outcome_distribution(ParamPoint(p.indist + step, p.phi)).probs;
    auto minus_ind = outcome_distribution(ParamPoint(p.indist - step, p.phi)).probs;
    for (std::size_t m = 0; m < kNumOutcomes; ++m) {
        d.d_phi[m] = (plus_phi[m] - minus_phi[m]) * inv2h;
        d.d_ind[m] = (plus_ind[m] - minus_ind[m]) * inv2h;
    }
    // Central differences leave harmless residues on vanished outcomes; the
    // analytic zero-gradient guard does not apply here.
    double f[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (std::size_t m = 0; m < kNumOutcomes; ++m) {
        if (d.p[m] <= 0.0) continue;
        const double grad[2] = {d.d_phi[m], d.d_ind[m]};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) f[i][j] += grad[i] * grad[j] / d.p[m];
    }
    FisherMatrix out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.at(i, j) = InfoValue::finite(f[i][j]);
    return out;
}

// Phase generator on the four modes: J_mu + J_nu with
// J = -i(alpha+ beta - alpha beta+)/2 per block.
inline ModeUnitary phase_generator_matrix() {
    ModeUnitary g(kNumModes, std::vector<complex>(16, complex{0.0, 0.0}));
    for (int base : {0, 2}) {
        g.entry(base, base + 1) = complex{0.0, -0.5};
        g.entry(base + 1, base) = complex{0.0, 0.5};
    }
    return g;
}

// Phase QFI of a normalized pure state: 4 Var(H) under the phase generator.
inline double qfi_from_generator(const FockKet& ket, PairCount n) {
    if (ket.num_modes() != kNumModes)
        throw std::invalid_argument("generator QFI needs a four-mode state");
    if (!ket.is_normalized(1e-12)) throw std::invalid_argument("ket is not normalized");
    for (const auto& [occ, a] : ket.amplitudes())
        if (total_photons(occ) != 2 * n.pairs)
            throw std::invalid_argument("ket photon number does not match pair count");

    ModeUnitary g = phase_generator_matrix();
    FockKet hk = apply_one_body(g, ket);
    double mean = inner(ket, hk).real();
    double second = inner(hk, hk).real();
    return 4.0 * (second - mean * mean);
}

}  // namespace twophoton
