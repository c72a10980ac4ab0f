#pragma once

#include <cassert>
#include <cmath>
#include <stdexcept>

#include "becho/core.hpp"
#include "becho/fft.hpp"

namespace becho {

enum class Basis { position, momentum };

/// One-particle state on the torus grid, amplitudes indexed by site.
struct WaveFunction1P {
    cvector amp;
    Basis basis = Basis::position;

    int n() const { return static_cast<int>(amp.size()); }
};

/// Two-particle state on the N x N grid, row-major with the particle-1
/// index major: amp[m1 * n + m2].
struct JointState {
    int n = 0;
    cvector amp;
    Basis basis1 = Basis::position;
    Basis basis2 = Basis::position;
};

inline double norm_sq(const cvector& a) {
    double s = 0.0;
    for (const cplx& z : a) s += std::norm(z);
    return s;
}

inline double norm(const WaveFunction1P& psi) { return std::sqrt(norm_sq(psi.amp)); }
inline double norm(const JointState& psi) { return std::sqrt(norm_sq(psi.amp)); }

inline void normalize(cvector& a) {
    double s = std::sqrt(norm_sq(a));
    if (s == 0.0) throw std::invalid_argument("normalize: zero state");
    double inv = 1.0 / s;
    for (cplx& z : a) z *= inv;
}

inline cplx inner(const WaveFunction1P& a, const WaveFunction1P& b) {
    assert(a.n() == b.n() && a.basis == b.basis);
    cplx s = 0.0;
    for (int m = 0; m < a.n(); ++m) s += std::conj(a.amp[m]) * b.amp[m];
    return s;
}

inline void to_momentum(WaveFunction1P& psi) {
    if (psi.basis == Basis::momentum) return;
    fft::to_momentum_1d(psi.amp.data(), psi.n());
    psi.basis = Basis::momentum;
}

inline void to_position(WaveFunction1P& psi) {
    if (psi.basis == Basis::position) return;
    fft::to_position_1d(psi.amp.data(), psi.n());
    psi.basis = Basis::position;
}

/// psi1 (x) phi2 as a joint position-basis state.
inline JointState outer_product(const WaveFunction1P& psi1, const WaveFunction1P& phi2) {
    if (psi1.basis != Basis::position || phi2.basis != Basis::position)
        throw std::logic_error("outer_product: states must be in the position basis");
    if (psi1.n() != phi2.n())
        throw std::invalid_argument("outer_product: dimension mismatch");
    int n = psi1.n();
    JointState out;
    out.n = n;
    out.amp.resize(static_cast<std::size_t>(n) * n);
    for (int m1 = 0; m1 < n; ++m1) {
        cplx a = psi1.amp[m1];
        const cplx* src = phi2.amp.data();
        cplx* dst = out.amp.data() + static_cast<std::size_t>(m1) * n;
        for (int m2 = 0; m2 < n; ++m2) dst[m2] = a * src[m2];
    }
    return out;
}

/// <psi1| Tr_2[|Psi><Psi|] |psi1> for a pure joint state: sum_j |<psi1|Psi(.,j)>|^2.
inline double reduced_overlap(const WaveFunction1P& psi1, const JointState& joint) {
    if (joint.basis1 != Basis::position || psi1.basis != Basis::position)
        throw std::logic_error("reduced_overlap: position basis required on axis 1");
    if (psi1.n() != joint.n)
        throw std::invalid_argument("reduced_overlap: dimension mismatch");
    int n = joint.n;
    cvector c(n, cplx(0.0));
    for (int m1 = 0; m1 < n; ++m1) {
        cplx w = std::conj(psi1.amp[m1]);
        const cplx* row = joint.amp.data() + static_cast<std::size_t>(m1) * n;
        for (int j = 0; j < n; ++j) c[j] += w * row[j];
    }
    return norm_sq(c);
}

/// Reduced density matrix of particle 1 (n x n, row-major).
inline cvector reduced_density_1(const JointState& joint) {
    int n = joint.n;
    cvector rho(static_cast<std::size_t>(n) * n, cplx(0.0));
    for (int m = 0; m < n; ++m) {
        const cplx* row_m = joint.amp.data() + static_cast<std::size_t>(m) * n;
        for (int mp = 0; mp < n; ++mp) {
            const cplx* row_mp = joint.amp.data() + static_cast<std::size_t>(mp) * n;
            cplx s = 0.0;
            for (int j = 0; j < n; ++j) s += row_m[j] * std::conj(row_mp[j]);
            rho[static_cast<std::size_t>(m) * n + mp] = s;
        }
    }
    return rho;
}

}  // namespace becho
