#pragma once

#include <cmath>
#include <stdexcept>

#include "becho/core.hpp"

namespace becho {

/// Physical parameters of the coupled kicked rotators on the torus.
///
/// Both rotators live on an N-site position/momentum grid with effective
/// Planck constant hbar_eff = 2*pi/N.  k1, k2 are the kick strengths,
/// sigma1, sigma2 the time-reversal imperfections (K -> K + sigma on the
/// backward leg), eps_f/eps_b the coupling strengths of the forward and
/// backward legs.
struct ModelParams {
    int n = 0;
    double k1 = 0.0;
    double k2 = 0.0;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double eps_f = 0.0;
    double eps_b = 0.0;
    double phase_offset = 0.33;
    double period = 1.0;

    double hbar_eff() const { return two_pi / n; }

    void validate() const {
        if (n < 2 || (n & (n - 1)) != 0)
            throw std::invalid_argument("ModelParams: N must be a power of two >= 2");
        for (double v : {k1, k2, sigma1, sigma2, eps_f, eps_b, phase_offset, period})
            if (!std::isfinite(v))
                throw std::invalid_argument("ModelParams: non-finite parameter");
        if (eps_f < 0.0 || eps_b < 0.0)
            throw std::invalid_argument("ModelParams: coupling strengths must be >= 0");
        if (period <= 0.0)
            throw std::invalid_argument("ModelParams: kick period must be > 0");
    }
};

}  // namespace becho
