#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "twophoton/interferometer.hpp"

using namespace twophoton;

namespace {
constexpr double pi = std::numbers::pi;

// 9 x 15 interior parameter grid shared by several suites.
std::vector<ParamPoint> interior_grid() {
    std::vector<ParamPoint> pts;
    for (int i = 1; i <= 9; ++i)
        for (int j = 1; j <= 15; ++j)
            pts.emplace_back(0.1 * i, 0.2 * j);
    return pts;
}
}  // namespace

TEST_CASE("probe state is n photons in each mu mode") {
    CHECK(probe_state(PairCount(1)).amplitude({1, 1, 0, 0}) == complex{1.0, 0.0});
    CHECK(probe_state(PairCount(3)).amplitude({3, 3, 0, 0}) == complex{1.0, 0.0});
    CHECK(probe_state(PairCount(8)).amplitude({8, 8, 0, 0}) == complex{1.0, 0.0});
    CHECK_THROWS_AS(PairCount(0), std::invalid_argument);
    CHECK_THROWS_AS(PairCount(9), std::invalid_argument);
}

TEST_CASE("parameter domain validation") {
    CHECK_THROWS_AS(ParamPoint(-0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ParamPoint(1.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ParamPoint(0.5, -0.01), std::invalid_argument);
    CHECK_THROWS_AS(ParamPoint(0.5, pi + 0.01), std::invalid_argument);
    CHECK_NOTHROW(ParamPoint(0.0, 0.0));
    CHECK_NOTHROW(ParamPoint(1.0, pi));
}

TEST_CASE("indistinguishability unitary endpoints") {
    ModeUnitary full = indistinguishability_unitary(1.0);
    CHECK(full.entry(1, 1) == complex{1.0, 0.0});
    CHECK(full.entry(3, 3) == complex{-1.0, 0.0});
    CHECK(full.entry(1, 3) == complex{0.0, 0.0});

    ModeUnitary none = indistinguishability_unitary(0.0);
    CHECK(none.entry(1, 3) == complex{1.0, 0.0});
    CHECK(none.entry(3, 1) == complex{1.0, 0.0});
    CHECK(none.entry(1, 1) == complex{0.0, 0.0});

    CHECK_THROWS_AS(indistinguishability_unitary(-0.01), std::invalid_argument);
    CHECK_THROWS_AS(indistinguishability_unitary(1.01), std::invalid_argument);
}

TEST_CASE("indistinguishability unitary is unitary across the range") {
    for (int k = 0; k <= 100; ++k)
        CHECK(indistinguishability_unitary(k / 100.0).is_unitary(1e-10));
}

TEST_CASE("balanced mixing splits the probe evenly") {
    FockKet mixed = apply_mode_unitary(indistinguishability_unitary(0.5), probe_state(PairCount(1)));
    const double r = std::sqrt(0.5);
    CHECK(std::abs(mixed.amplitude({1, 1, 0, 0}) - complex{r, 0.0}) < 1e-15);
    CHECK(std::abs(mixed.amplitude({1, 0, 0, 1}) - complex{r, 0.0}) < 1e-15);
    CHECK(mixed.amplitudes().size() == 2);
}

TEST_CASE("phase rotation acts by half angle per block") {
    ModeUnitary u = phase_mode_rotation(1.0);
    const double c = std::cos(0.5);
    const double s = std::sin(0.5);
    for (int base : {0, 2}) {
        CHECK(std::abs(u.entry(base, base) - complex{c, 0.0}) < 1e-15);
        CHECK(std::abs(u.entry(base, base + 1) - complex{-s, 0.0}) < 1e-15);
        CHECK(std::abs(u.entry(base + 1, base) - complex{s, 0.0}) < 1e-15);
        CHECK(std::abs(u.entry(base + 1, base + 1) - complex{c, 0.0}) < 1e-15);
    }
    // Off-block entries stay zero.
    CHECK(u.entry(0, 2) == complex{0.0, 0.0});
    CHECK(u.entry(1, 3) == complex{0.0, 0.0});
}

TEST_CASE("phase rotation at characteristic angles") {
    // phi = pi maps alpha+ to beta+ with a plus sign.
    ModeUnitary half_turn = phase_mode_rotation(pi);
    CHECK(std::abs(half_turn.entry(1, 0) - complex{1.0, 0.0}) < 1e-15);
    CHECK(std::abs(half_turn.entry(0, 1) - complex{-1.0, 0.0}) < 1e-15);
    CHECK(std::abs(half_turn.entry(0, 0)) < 1e-15);

    // phi = 2 pi negates every mode operator, which is the identity on any
    // even photon number sector.
    ModeUnitary full_turn = phase_mode_rotation(2.0 * pi);
    for (int d = 0; d < 4; ++d) CHECK(std::abs(full_turn.entry(d, d) - complex{-1.0, 0.0}) < 1e-15);
    FockKet two_photon = probe_state(PairCount(1));
    FockKet rotated = apply_mode_unitary(full_turn, two_photon);
    CHECK(std::abs(rotated.amplitude({1, 1, 0, 0}) - complex{1.0, 0.0}) < 1e-12);
}

TEST_CASE("phase rotations compose additively") {
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> dist(0.0, pi);
    for (int trial = 0; trial < 50; ++trial) {
        double p1 = dist(gen);
        double p2 = dist(gen);
        ModeUnitary lhs = phase_mode_rotation(p1) * phase_mode_rotation(p2);
        ModeUnitary rhs = phase_mode_rotation(p1 + p2);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) CHECK(std::abs(lhs.entry(r, c) - rhs.entry(r, c)) < 1e-12);
    }
}

TEST_CASE("output state at characteristic points") {
    // Fully indistinguishable at phi = pi/2: photon bunching, equal weight on
    // double occupations of the mu arms.
    FockKet bunched = output_state(PairCount(1), ParamPoint(1.0, 0.5 * pi));
    CHECK(std::norm(bunched.amplitude({2, 0, 0, 0})) == Catch::Approx(0.5).margin(1e-12));
    CHECK(std::norm(bunched.amplitude({0, 2, 0, 0})) == Catch::Approx(0.5).margin(1e-12));
    CHECK(std::norm(bunched.amplitude({1, 1, 0, 0})) < 1e-24);

    // Fully distinguishable at phi = 0: all weight on one photon per arm of
    // different labels.
    FockKet separated = output_state(PairCount(1), ParamPoint(0.0, 0.0));
    CHECK(std::norm(separated.amplitude({1, 0, 0, 1})) == Catch::Approx(1.0).margin(1e-12));

    // Balanced indistinguishability at phi = pi.
    FockKet mixed = output_state(PairCount(1), ParamPoint(0.5, pi));
    CHECK(std::norm(mixed.amplitude({1, 1, 0, 0})) == Catch::Approx(0.5).margin(1e-12));
    CHECK(std::norm(mixed.amplitude({0, 1, 1, 0})) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("closed form at characteristic points") {
    FockKet bunched = output_state_closed_form(ParamPoint(1.0, 0.5 * pi));
    const double r = std::sqrt(0.5);
    CHECK(std::abs(bunched.amplitude({2, 0, 0, 0}) - complex{r, 0.0}) < 1e-12);
    CHECK(std::abs(bunched.amplitude({0, 2, 0, 0}) - complex{-r, 0.0}) < 1e-12);

    FockKet separated = output_state_closed_form(ParamPoint(0.0, 0.0));
    CHECK(std::abs(separated.amplitude({1, 0, 0, 1}) - complex{-1.0, 0.0}) < 1e-12);

    FockKet mixed = output_state_closed_form(ParamPoint(0.5, pi));
    CHECK(std::abs(mixed.amplitude({1, 1, 0, 0}) - complex{r, 0.0}) < 1e-12);
    CHECK(std::abs(mixed.amplitude({0, 1, 1, 0}) - complex{r, 0.0}) < 1e-12);
}

TEST_CASE("closed form is normalized") {
    for (const auto& p : interior_grid())
        CHECK(output_state_closed_form(p).norm2() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("operator route matches closed form up to one constant sign matrix") {
    auto basis = enumerate_basis(kNumModes, 2);
    std::map<OccupationVector, double> signs;

    // Determine the per-ket sign from the first grid point where that ket has
    // appreciable weight, then require the same signs to work everywhere.
    for (const auto& p : interior_grid()) {
        FockKet got = output_state(PairCount(1), p);
        FockKet want = output_state_closed_form(p);
        for (const auto& occ : basis) {
            complex a = got.amplitude(occ);
            complex b = want.amplitude(occ);
            if (signs.find(occ) == signs.end() && std::abs(b) > 1e-6)
                signs[occ] = (a.real() / b.real() > 0.0) ? 1.0 : -1.0;
        }
    }
    REQUIRE(signs.size() == 7);

    for (const auto& p : interior_grid()) {
        FockKet got = output_state(PairCount(1), p);
        FockKet want = output_state_closed_form(p);
        for (const auto& occ : basis) {
            double s = signs.count(occ) ? signs[occ] : 1.0;
            CHECK(std::abs(got.amplitude(occ) - s * want.amplitude(occ)) < 1e-12);
        }
    }

    // With this operator convention the sign matrix is a single global flip.
    for (const auto& [occ, s] : signs) CHECK(s == -1.0);
}

TEST_CASE("output state is normalized for larger pair counts") {
    for (int n = 1; n <= 4; ++n) {
        FockKet out = output_state(PairCount(n), ParamPoint(0.37, 1.1));
        CHECK(out.norm2() == Catch::Approx(1.0).margin(1e-12));
        for (const auto& [occ, a] : out.amplitudes()) CHECK(total_photons(occ) == 2 * n);
    }
}

TEST_CASE("half wave plate mapping") {
    CHECK(hwp_to_indistinguishability(0.25 * pi) == Catch::Approx(1.0).margin(1e-12));
    CHECK(hwp_to_indistinguishability(0.0) == Catch::Approx(0.0).margin(1e-12));
    CHECK(hwp_to_indistinguishability(0.125 * pi) == Catch::Approx(0.5).margin(1e-12));
    // Periodic and bounded.
    for (int k = 0; k <= 40; ++k) {
        double v = hwp_to_indistinguishability(-2.0 + 0.1 * k);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}
