#pragma once

// Truncated bosonic Fock space over a fixed number of optical modes.
// States are sparse maps from occupation vectors to complex amplitudes;
// mode unitaries act through their induced transformation of creation
// operators.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace twophoton {

using complex = std::complex<double>;

// Occupation numbers per mode, e.g. {1,1,0,0} for one photon in each of the
// first two modes.
using OccupationVector = std::vector<int>;

// Hard truncation: states with more total photons are rejected outright.
inline constexpr int kMaxTotalPhotons = 16;

inline int total_photons(const OccupationVector& occ) {
    int total = 0;
    for (int n : occ) total += n;
    return total;
}

inline std::string occupation_to_string(const OccupationVector& occ) {
    std::string s;
    for (int n : occ) {
        if (n > 9) {
            s += '(' + std::to_string(n) + ')';
        } else {
            s += static_cast<char>('0' + n);
        }
    }
    return s;
}

namespace detail {

inline const std::array<double, kMaxTotalPhotons + 2>& factorial_table() {
    static const auto table = [] {
        std::array<double, kMaxTotalPhotons + 2> t{};
        t[0] = 1.0;
        for (std::size_t k = 1; k < t.size(); ++k) t[k] = t[k - 1] * static_cast<double>(k);
        return t;
    }();
    return table;
}

inline double sqrt_factorial_product(const OccupationVector& occ) {
    double p = 1.0;
    for (int n : occ) p *= factorial_table()[static_cast<std::size_t>(n)];
    return std::sqrt(p);
}

inline void check_occupation(const OccupationVector& occ, int num_modes) {
    if (static_cast<int>(occ.size()) != num_modes)
        throw std::invalid_argument("occupation vector has " + std::to_string(occ.size()) +
                                    " modes, expected " + std::to_string(num_modes));
    for (int n : occ)
        if (n < 0) throw std::invalid_argument("negative occupation number");
    if (total_photons(occ) > kMaxTotalPhotons)
        throw std::invalid_argument("total photon number exceeds truncation limit " +
                                    std::to_string(kMaxTotalPhotons));
}

}  // namespace detail

// Sparse ket over the occupation basis. All stored keys share the same mode
// count and the same total photon number; exact-zero amplitudes are pruned.
class FockKet {
  public:
    explicit FockKet(int num_modes) : num_modes_(num_modes) {
        if (num_modes < 1) throw std::invalid_argument("need at least one mode");
    }

    FockKet(int num_modes, std::map<OccupationVector, complex> amplitudes)
        : num_modes_(num_modes), amp_(std::move(amplitudes)) {
        if (num_modes < 1) throw std::invalid_argument("need at least one mode");
        int total = -1;
        for (const auto& [occ, a] : amp_) {
            detail::check_occupation(occ, num_modes_);
            if (total < 0) total = total_photons(occ);
            else if (total_photons(occ) != total)
                throw std::invalid_argument("mixed total photon numbers in one ket");
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
                throw std::invalid_argument("non-finite amplitude");
        }
        prune();
    }

    static FockKet vacuum(int num_modes) {
        FockKet k(num_modes);
        k.amp_[OccupationVector(static_cast<std::size_t>(num_modes), 0)] = 1.0;
        return k;
    }

    static FockKet basis_state(const OccupationVector& occ) {
        FockKet k(static_cast<int>(occ.size()));
        detail::check_occupation(occ, k.num_modes_);
        k.amp_[occ] = 1.0;
        return k;
    }

    int num_modes() const { return num_modes_; }
    const std::map<OccupationVector, complex>& amplitudes() const { return amp_; }
    bool empty() const { return amp_.empty(); }

    complex amplitude(const OccupationVector& occ) const {
        auto it = amp_.find(occ);
        return it == amp_.end() ? complex{0.0, 0.0} : it->second;
    }

    // Accumulates c into the amplitude of occ, keeping the invariants.
    void add_term(const OccupationVector& occ, complex c) {
        detail::check_occupation(occ, num_modes_);
        if (!amp_.empty() && total_photons(amp_.begin()->first) != total_photons(occ))
            throw std::invalid_argument("mixed total photon numbers in one ket");
        auto [it, inserted] = amp_.try_emplace(occ, c);
        if (!inserted) {
            it->second += c;
            if (it->second == complex{0.0, 0.0}) amp_.erase(it);
        } else if (c == complex{0.0, 0.0}) {
            amp_.erase(it);
        }
    }

    double norm2() const {
        double s = 0.0;
        for (const auto& [occ, a] : amp_) s += std::norm(a);
        return s;
    }

    bool is_normalized(double tol = 1e-12) const { return std::abs(norm2() - 1.0) <= tol; }

  private:
    void prune() {
        for (auto it = amp_.begin(); it != amp_.end();) {
            if (it->second == complex{0.0, 0.0}) it = amp_.erase(it);
            else ++it;
        }
    }

    int num_modes_;
    std::map<OccupationVector, complex> amp_;
};

inline FockKet ket_scale(const FockKet& k, complex factor) {
    FockKet out(k.num_modes());
    for (const auto& [occ, a] : k.amplitudes()) out.add_term(occ, factor * a);
    return out;
}

inline FockKet ket_add(const FockKet& a, const FockKet& b) {
    if (a.num_modes() != b.num_modes())
        throw std::invalid_argument("mode count mismatch in ket_add");
    FockKet out = a;
    for (const auto& [occ, amp] : b.amplitudes()) out.add_term(occ, amp);
    return out;
}

// <a|b>; both kets must live over the same number of modes.
inline complex inner(const FockKet& a, const FockKet& b) {
    if (a.num_modes() != b.num_modes())
        throw std::invalid_argument("mode count mismatch in inner product");
    const auto& small = a.amplitudes().size() <= b.amplitudes().size() ? a : b;
    const auto& large = (&small == &a) ? b : a;
    complex s{0.0, 0.0};
    for (const auto& [occ, amp] : small.amplitudes()) {
        complex other = large.amplitude(occ);
        if (&small == &a) s += std::conj(amp) * other;
        else s += std::conj(other) * amp;
    }
    return s;
}

// Canonical basis enumeration for a fixed photon-number sector. States come
// out in descending lexicographic order of the occupation vector, so photons
// fill the lowest modes first: (4,2) starts 2000, 1100, 1010, 1001, 0200, ...
inline std::vector<OccupationVector> enumerate_basis(int num_modes, int total) {
    if (num_modes < 1) throw std::invalid_argument("need at least one mode");
    if (total < 0) throw std::invalid_argument("negative photon number");
    if (total > kMaxTotalPhotons)
        throw std::invalid_argument("total photon number exceeds truncation limit " +
                                    std::to_string(kMaxTotalPhotons));
    std::vector<OccupationVector> basis;
    OccupationVector occ(static_cast<std::size_t>(num_modes), 0);
    auto rec = [&](auto&& self, int mode, int remaining) -> void {
        if (mode == num_modes - 1) {
            occ[static_cast<std::size_t>(mode)] = remaining;
            basis.push_back(occ);
            return;
        }
        for (int n = remaining; n >= 0; --n) {
            occ[static_cast<std::size_t>(mode)] = n;
            self(self, mode + 1, remaining - n);
        }
    };
    rec(rec, 0, total);
    return basis;
}

// Creation operator on one mode: |n> -> sqrt(n+1)|n+1>.
inline FockKet create(const FockKet& k, int mode) {
    if (mode < 0 || mode >= k.num_modes()) throw std::invalid_argument("mode index out of range");
    FockKet out(k.num_modes());
    for (const auto& [occ, a] : k.amplitudes()) {
        OccupationVector up = occ;
        up[static_cast<std::size_t>(mode)] += 1;
        out.add_term(up, a * std::sqrt(static_cast<double>(up[static_cast<std::size_t>(mode)])));
    }
    return out;
}

// Annihilation operator on one mode: |n> -> sqrt(n)|n-1>.
inline FockKet annihilate(const FockKet& k, int mode) {
    if (mode < 0 || mode >= k.num_modes()) throw std::invalid_argument("mode index out of range");
    FockKet out(k.num_modes());
    for (const auto& [occ, a] : k.amplitudes()) {
        int n = occ[static_cast<std::size_t>(mode)];
        if (n == 0) continue;
        OccupationVector down = occ;
        down[static_cast<std::size_t>(mode)] -= 1;
        out.add_term(down, a * std::sqrt(static_cast<double>(n)));
    }
    return out;
}

// Single-particle unitary on the mode space. Entries are stored row-major;
// column i holds the image of mode i's creation operator (see
// apply_mode_unitary).
class ModeUnitary {
  public:
    ModeUnitary(int dim, std::vector<complex> entries) : dim_(dim), a_(std::move(entries)) {
        if (dim < 1 || static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim) != a_.size())
            throw std::invalid_argument("mode matrix dimension mismatch");
    }

    static ModeUnitary identity(int dim) {
        std::vector<complex> e(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim),
                               complex{0.0, 0.0});
        for (int i = 0; i < dim; ++i) e[static_cast<std::size_t>(i * dim + i)] = 1.0;
        return ModeUnitary(dim, std::move(e));
    }

    // Validating factory; plain construction leaves the check to the caller.
    static ModeUnitary from_matrix(int dim, std::vector<complex> entries, double tol = 1e-10) {
        ModeUnitary u(dim, std::move(entries));
        if (!u.is_unitary(tol)) throw std::invalid_argument("matrix is not unitary");
        return u;
    }

    int dim() const { return dim_; }

    complex entry(int row, int col) const {
        return a_[static_cast<std::size_t>(row * dim_ + col)];
    }

    complex& entry(int row, int col) { return a_[static_cast<std::size_t>(row * dim_ + col)]; }

    bool is_unitary(double tol = 1e-10) const {
        for (int i = 0; i < dim_; ++i) {
            for (int j = 0; j < dim_; ++j) {
                complex s{0.0, 0.0};
                for (int k = 0; k < dim_; ++k) s += std::conj(entry(k, i)) * entry(k, j);
                complex want = (i == j) ? complex{1.0, 0.0} : complex{0.0, 0.0};
                if (std::abs(s - want) > tol) return false;
            }
        }
        return true;
    }

    ModeUnitary operator*(const ModeUnitary& rhs) const {
        if (dim_ != rhs.dim_) throw std::invalid_argument("mode matrix dimension mismatch");
        std::vector<complex> out(a_.size(), complex{0.0, 0.0});
        for (int i = 0; i < dim_; ++i)
            for (int k = 0; k < dim_; ++k) {
                complex aik = entry(i, k);
                if (aik == complex{0.0, 0.0}) continue;
                for (int j = 0; j < dim_; ++j)
                    out[static_cast<std::size_t>(i * dim_ + j)] += aik * rhs.entry(k, j);
            }
        return ModeUnitary(dim_, std::move(out));
    }

  private:
    int dim_;
    std::vector<complex> a_;
};

// Lifts a mode unitary to the multi-photon space. Convention: the creation
// operator of mode i maps to sum_j U(j,i) * (creation operator of mode j),
// i.e. columns of U hold the images. Each basis ket is expanded as a
// creation-operator monomial on the vacuum and the substituted product is
// multiplied out, with sqrt(n!) weights converting between monomial
// coefficients and ket amplitudes.
inline FockKet apply_mode_unitary(const ModeUnitary& u, const FockKet& k) {
    if (u.dim() != k.num_modes())
        throw std::invalid_argument("mode matrix dimension does not match ket");
    if (!u.is_unitary(1e-10)) throw std::invalid_argument("matrix is not unitary");

    const int m = k.num_modes();
    FockKet out(m);
    for (const auto& [occ, amp] : k.amplitudes()) {
        // Monomial coefficients relative to prod_j (a_j^dag)^{m_j} |0>.
        std::map<OccupationVector, complex> poly;
        poly[OccupationVector(static_cast<std::size_t>(m), 0)] =
            amp / detail::sqrt_factorial_product(occ);
        for (int i = 0; i < m; ++i) {
            for (int rep = 0; rep < occ[static_cast<std::size_t>(i)]; ++rep) {
                std::map<OccupationVector, complex> next;
                for (const auto& [mono, c] : poly) {
                    for (int j = 0; j < m; ++j) {
                        complex uji = u.entry(j, i);
                        if (uji == complex{0.0, 0.0}) continue;
                        OccupationVector up = mono;
                        up[static_cast<std::size_t>(j)] += 1;
                        next[up] += c * uji;
                    }
                }
                poly.swap(next);
            }
        }
        for (const auto& [mono, c] : poly)
            out.add_term(mono, c * detail::sqrt_factorial_product(mono));
    }
    return out;
}

// One-body operator sum_{ij} G(j,i) a_j^dag a_i applied to a ket. Used for
// generator matrix elements; G follows the same row/column convention as
// ModeUnitary entries.
inline FockKet apply_one_body(const ModeUnitary& g, const FockKet& k) {
    if (g.dim() != k.num_modes())
        throw std::invalid_argument("mode matrix dimension does not match ket");
    FockKet out(k.num_modes());
    for (int i = 0; i < k.num_modes(); ++i) {
        FockKet lowered = annihilate(k, i);
        if (lowered.empty()) continue;
        for (int j = 0; j < k.num_modes(); ++j) {
            complex gji = g.entry(j, i);
            if (gji == complex{0.0, 0.0}) continue;
            FockKet raised = create(lowered, j);
            for (const auto& [occ, a] : raised.amplitudes()) out.add_term(occ, gji * a);
        }
    }
    return out;
}

}  // namespace twophoton
