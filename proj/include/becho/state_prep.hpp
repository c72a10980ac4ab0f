#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "becho/core.hpp"
#include "becho/rng.hpp"
#include "becho/state.hpp"

namespace becho {

/// Gaussian wavepacket on the torus.  An unset width defaults to the
/// minimal-uncertainty scale sqrt(hbar_eff).
struct WavepacketSpec {
    double r0 = std::numbers::pi;
    double p0 = 0.0;
    std::optional<double> sigma_x;
};

enum class Rho2Kind { wavepacket, random_pure, random_mixture, thermal };

/// How to sample the uncontrolled system-2 state.  Mixtures are realized by
/// pure-state sampling; the echo is linear in rho_2, so averaging the echo
/// over samples is unbiased.
struct Rho2Spec {
    Rho2Kind kind = Rho2Kind::random_pure;
    WavepacketSpec wavepacket;
    std::vector<double> mixture_weights;  // empty = uniform over sites
    double beta = 1.0;                    // thermal inverse temperature
    int sample_count = 1;
    std::uint64_t seed = 0;
};

/// Periodized Gaussian wavepacket, windings w in {-1, 0, 1}; the truncation
/// error is below exp(-(pi/sigma_x)^2), negligible for any narrow packet.
inline WaveFunction1P make_wavepacket(const WavepacketSpec& spec, int n) {
    if (n < 2) throw std::invalid_argument("make_wavepacket: N >= 2 required");
    if (spec.sigma_x && *spec.sigma_x <= 0.0)
        throw std::invalid_argument("make_wavepacket: sigma_x must be > 0");
    double hbar = two_pi / n;
    double sigma = spec.sigma_x.value_or(std::sqrt(hbar));

    WaveFunction1P psi;
    psi.amp.resize(n);
    for (int m = 0; m < n; ++m) {
        double x = two_pi * m / n;
        cplx a = 0.0;
        for (int w = -1; w <= 1; ++w) {
            double d = x + two_pi * w - spec.r0;
            a += std::polar(std::exp(-d * d / (2.0 * sigma * sigma)), spec.p0 * d / hbar);
        }
        psi.amp[m] = a;
    }
    normalize(psi.amp);
    return psi;
}

/// Deterministic sample `index` from the rho_2 ensemble, as a position-basis
/// pure state.
inline WaveFunction1P sample_rho2(const Rho2Spec& spec, int n, int index) {
    if (index < 0 || index >= spec.sample_count)
        throw std::invalid_argument("sample_rho2: index " + std::to_string(index) +
                                    " outside sample_count " + std::to_string(spec.sample_count));
    WaveFunction1P phi;
    phi.amp.assign(n, cplx(0.0));
    RandomStream rng = derive_stream(spec.seed, stream_tag::phi2_sample, std::uint64_t(index));

    switch (spec.kind) {
        case Rho2Kind::wavepacket:
            return make_wavepacket(spec.wavepacket, n);
        case Rho2Kind::random_pure:
            for (int m = 0; m < n; ++m) phi.amp[m] = rng.complex_normal();
            normalize(phi.amp);
            return phi;
        case Rho2Kind::random_mixture: {
            std::vector<double> w = spec.mixture_weights;
            if (w.empty()) w.assign(n, 1.0);
            if (static_cast<int>(w.size()) > n)
                throw std::invalid_argument("sample_rho2: more mixture weights than sites");
            for (double v : w)
                if (v < 0.0) throw std::invalid_argument("sample_rho2: negative mixture weight");
            phi.amp[rng.discrete(w)] = 1.0;
            return phi;
        }
        case Rho2Kind::thermal: {
            // Free-rotor momentum eigenstates |n> with E_n = p_n^2 / 2,
            // p_n = 2 pi n / N; weights exp(-beta E_n), ground state n = 0.
            std::vector<double> w(n);
            w[0] = 1.0;  // E_0 = 0; also keeps beta = inf well-defined
            for (int k = 1; k < n; ++k) {
                double p = two_pi * k / n;
                w[k] = std::exp(-spec.beta * p * p / 2.0);
            }
            int pick = rng.discrete(w);
            double s = 1.0 / std::sqrt(double(n));
            for (int m = 0; m < n; ++m)
                phi.amp[m] = std::polar(s, two_pi * double(pick) * double(m) / n);
            return phi;
        }
    }
    throw std::invalid_argument("sample_rho2: unknown rho2 kind");
}

}  // namespace becho
