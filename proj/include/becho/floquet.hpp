#pragma once

#include <cmath>
#include <stdexcept>

#include "becho/core.hpp"
#include "becho/fft.hpp"
#include "becho/model.hpp"
#include "becho/state.hpp"

// One-period Floquet propagation of the coupled kicked rotators.
//
// The delta-kicked Floquet operator factorizes exactly into a joint
// position-diagonal kick phase and momentum-diagonal free phases, so the
// split-step application below has no time-discretization error.
//
// Conventions (fixed across the project):
//   forward period  = kick phase, then free phase,
//   backward period = free phase, then kick phase, with every particle-1
//                     phase complex-conjugated at strength K1 + sigma1.
// With sigma1 = 0 and eps = 0 a backward period is the exact inverse of a
// forward period on the particle-1 factor.

namespace becho {

enum class Direction { forward, backward };

/// Precomputed diagonal phase tables for one kick period.  Immutable after
/// construction; safe to share across threads.
struct FloquetStep {
    Direction direction = Direction::forward;
    int n = 0;
    cvector kick_phase;    // n*n joint position-diagonal factor
    cvector free_phase_1;  // length n, momentum-diagonal, particle 1
    cvector free_phase_2;  // length n, momentum-diagonal, particle 2
};

/// One-particle analogue used by the Loschmidt reference path.
struct Step1P {
    Direction direction = Direction::forward;
    int n = 0;
    cvector kick_phase;
    cvector free_phase;
};

namespace detail {

// Momentum p_n = 2*pi*n/N gives the free phase exp(-i p_n^2 T / (2 hbar))
// = exp(-i pi n^2 T / N).
inline cvector free_phase_table(int n, double period, bool conjugated) {
    cvector f(n);
    double c = std::numbers::pi * period / n * (conjugated ? 1.0 : -1.0);
    for (int k = 0; k < n; ++k) f[k] = std::polar(1.0, c * double(k) * double(k));
    return f;
}

inline cvector kick_phase_table_1p(int n, double strength, bool conjugated) {
    cvector k(n);
    double pref = strength * n / two_pi * (conjugated ? 1.0 : -1.0);
    for (int m = 0; m < n; ++m)
        k[m] = std::polar(1.0, pref * std::cos(two_pi * m / n));
    return k;
}

}  // namespace detail

inline FloquetStep build_forward_step(const ModelParams& p) {
    p.validate();
    int n = p.n;
    double inv_h = 1.0 / p.hbar_eff();
    FloquetStep s;
    s.direction = Direction::forward;
    s.n = n;
    s.kick_phase.resize(static_cast<std::size_t>(n) * n);
    for (int m1 = 0; m1 < n; ++m1) {
        double x1 = two_pi * m1 / n;
        double a1 = p.k1 * std::cos(x1);
        cplx* row = s.kick_phase.data() + static_cast<std::size_t>(m1) * n;
        for (int m2 = 0; m2 < n; ++m2) {
            double x2 = two_pi * m2 / n;
            double v = a1 + p.k2 * std::cos(x2) +
                       p.eps_f * std::sin(x1 - x2 - p.phase_offset);
            row[m2] = std::polar(1.0, -v * inv_h);
        }
    }
    s.free_phase_1 = detail::free_phase_table(n, p.period, false);
    s.free_phase_2 = detail::free_phase_table(n, p.period, false);
    return s;
}

inline FloquetStep build_backward_step(const ModelParams& p) {
    p.validate();
    int n = p.n;
    double inv_h = 1.0 / p.hbar_eff();
    FloquetStep s;
    s.direction = Direction::backward;
    s.n = n;
    s.kick_phase.resize(static_cast<std::size_t>(n) * n);
    double k1b = p.k1 + p.sigma1;  // particle 1 runs conjugated (time-reversed)
    double k2b = p.k2 + p.sigma2;  // particle 2 keeps evolving forward
    for (int m1 = 0; m1 < n; ++m1) {
        double x1 = two_pi * m1 / n;
        double a1 = -k1b * std::cos(x1);
        cplx* row = s.kick_phase.data() + static_cast<std::size_t>(m1) * n;
        for (int m2 = 0; m2 < n; ++m2) {
            double x2 = two_pi * m2 / n;
            double v = a1 + k2b * std::cos(x2) +
                       p.eps_b * std::sin(x1 - x2 - p.phase_offset);
            row[m2] = std::polar(1.0, -v * inv_h);
        }
    }
    s.free_phase_1 = detail::free_phase_table(n, p.period, true);
    s.free_phase_2 = detail::free_phase_table(n, p.period, false);
    return s;
}

/// Apply one kick period in place.  Input and output are position/position;
/// the unitary DFT normalization is fused into the free-phase pass.
inline void apply_step(const FloquetStep& s, JointState& psi) {
    if (psi.basis1 != Basis::position || psi.basis2 != Basis::position)
        throw std::logic_error("apply_step: joint state must be in the position basis");
    if (psi.n != s.n) throw std::invalid_argument("apply_step: dimension mismatch");
    int n = s.n;
    cplx* a = psi.amp.data();
    std::size_t total = static_cast<std::size_t>(n) * n;

    auto kick = [&] {
        const cplx* k = s.kick_phase.data();
        for (std::size_t i = 0; i < total; ++i) a[i] *= k[i];
    };
    auto free_phases = [&] {
        double scale = 1.0 / (double(n) * double(n));
        for (int n1 = 0; n1 < n; ++n1) {
            cplx f1 = s.free_phase_1[n1] * scale;
            cplx* row = a + static_cast<std::size_t>(n1) * n;
            const cplx* f2 = s.free_phase_2.data();
            for (int n2 = 0; n2 < n; ++n2) row[n2] *= f1 * f2[n2];
        }
    };

    if (s.direction == Direction::forward) kick();
    fft::raw_rows(a, n, FFTW_FORWARD);
    fft::raw_cols(a, n, FFTW_FORWARD);
    free_phases();
    fft::raw_cols(a, n, FFTW_BACKWARD);
    fft::raw_rows(a, n, FFTW_BACKWARD);
    if (s.direction == Direction::backward) kick();
}

/// One-particle forward period at kick strength `k`.
inline Step1P build_forward_step_1p(int n, double k, double period = 1.0) {
    Step1P s;
    s.direction = Direction::forward;
    s.n = n;
    s.kick_phase = detail::kick_phase_table_1p(n, k, false);
    s.free_phase = detail::free_phase_table(n, period, false);
    return s;
}

/// One-particle backward period: conjugated phases at strength `k`, order
/// reversed, so it inverts the forward period exactly when strengths match.
inline Step1P build_backward_step_1p(int n, double k, double period = 1.0) {
    Step1P s;
    s.direction = Direction::backward;
    s.n = n;
    s.kick_phase = detail::kick_phase_table_1p(n, k, true);
    s.free_phase = detail::free_phase_table(n, period, true);
    return s;
}

inline void apply_step_1p(const Step1P& s, WaveFunction1P& psi) {
    if (psi.basis != Basis::position)
        throw std::logic_error("apply_step_1p: state must be in the position basis");
    if (psi.n() != s.n) throw std::invalid_argument("apply_step_1p: dimension mismatch");
    int n = s.n;
    cplx* a = psi.amp.data();
    double scale = 1.0 / double(n);

    if (s.direction == Direction::forward)
        for (int m = 0; m < n; ++m) a[m] *= s.kick_phase[m];
    fft::raw_1d(a, n, FFTW_FORWARD);
    for (int k = 0; k < n; ++k) a[k] *= s.free_phase[k] * scale;
    fft::raw_1d(a, n, FFTW_BACKWARD);
    if (s.direction == Direction::backward)
        for (int m = 0; m < n; ++m) a[m] *= s.kick_phase[m];
}

}  // namespace becho
