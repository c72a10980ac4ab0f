#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "becho/core.hpp"
#include "becho/rng.hpp"

// Classical companion of the quantum model: standard-map dynamics, the
// largest Lyapunov exponent from the tangent map, and action-correlator
// estimates of the golden-rule rates.  Rates are reported per kick period
// with the quantum prefactor (strength / hbar_eff)^2, so they compare
// directly against fitted quantum decay rates.

namespace becho::classical {

/// One period of the standard map: p' = p + K sin x, x' = x + p' (mod 2 pi).
inline std::pair<double, double> standard_map_step(double x, double p, double k) {
    double p1 = wrap_2pi(p + k * std::sin(x));
    double x1 = wrap_2pi(x + p1);
    return {x1, p1};
}

struct LyapunovEstimate {
    double lambda = 0.0;
    double stderr_ = 0.0;
    int n_trajectories = 0;
    int transient_discard = 0;
};

/// Mean log growth rate of the tangent map [[1 + K cos x, 1], [K cos x, 1]],
/// renormalized every step, averaged over random initial conditions.
inline LyapunovEstimate lyapunov_exponent(double k, int n_traj, int t_steps,
                                          std::uint64_t seed, int transient = 100) {
    if (k <= 0.0) throw std::invalid_argument("lyapunov_exponent: K > 0 required");
    if (n_traj < 1 || t_steps <= transient)
        throw std::invalid_argument("lyapunov_exponent: need t_steps > transient");

    double sum = 0.0, sum_sq = 0.0;
    for (int traj = 0; traj < n_traj; ++traj) {
        RandomStream rng = derive_stream(seed, stream_tag::classical, std::uint64_t(traj));
        double x = rng.uniform(0.0, two_pi);
        double p = rng.uniform(0.0, two_pi);
        double v0 = rng.normal(), v1 = rng.normal();
        double s = std::sqrt(v0 * v0 + v1 * v1);
        v0 /= s; v1 /= s;

        double acc = 0.0;
        for (int step = 0; step < t_steps; ++step) {
            double c = k * std::cos(x);
            double w0 = (1.0 + c) * v0 + v1;
            double w1 = c * v0 + v1;
            double g = std::sqrt(w0 * w0 + w1 * w1);
            v0 = w0 / g; v1 = w1 / g;
            if (step >= transient) acc += std::log(g);
            auto [x1, p1] = standard_map_step(x, p, k);
            x = x1; p = p1;
        }
        double lam = acc / (t_steps - transient);
        sum += lam;
        sum_sq += lam * lam;
    }
    LyapunovEstimate est;
    est.lambda = sum / n_traj;
    est.n_trajectories = n_traj;
    est.transient_discard = transient;
    if (n_traj > 1) {
        double var = (sum_sq - sum * sum / n_traj) / (n_traj - 1);
        est.stderr_ = std::sqrt(std::max(0.0, var) / n_traj);
    }
    return est;
}

struct RateEstimate {
    double gamma = 0.0;
    double correlator_sum = 0.0;
    std::vector<double> correlators;         // C(0), C(1), ..., C(max_lag)
    std::vector<double> correlator_stderr;
    int n_trajectories = 0;
    int truncation_lag = 0;
};

namespace detail {

/// gamma = (strength / hbar)^2 * sum_{m=-L..L} C(m) with C(-m) = C(m).
inline RateEstimate assemble(double strength, double hbar_eff,
                             const std::vector<double>& sum,
                             const std::vector<double>& sum_sq, int n_traj) {
    RateEstimate est;
    est.n_trajectories = n_traj;
    est.truncation_lag = static_cast<int>(sum.size()) - 1;
    est.correlators.resize(sum.size());
    est.correlator_stderr.resize(sum.size());
    for (std::size_t m = 0; m < sum.size(); ++m) {
        est.correlators[m] = sum[m] / n_traj;
        double var = n_traj > 1
                         ? (sum_sq[m] - sum[m] * sum[m] / n_traj) / (n_traj - 1)
                         : 0.0;
        est.correlator_stderr[m] = std::sqrt(std::max(0.0, var) / n_traj);
    }
    est.correlator_sum = est.correlators[0];
    for (std::size_t m = 1; m < est.correlators.size(); ++m)
        est.correlator_sum += 2.0 * est.correlators[m];
    est.gamma = sqr(strength / hbar_eff) * est.correlator_sum;
    return est;
}

}  // namespace detail

/// Golden-rule rate of the time-reversal imperfection Sigma_1 = sigma1 cos x:
/// C(m) = <cos x_0 cos x_m> over standard-map trajectories at K1.
inline RateEstimate gamma_sigma1(double sigma1, double k1, double hbar_eff,
                                 int n_traj, int max_lag, std::uint64_t seed) {
    if (sigma1 < 0.0 || max_lag < 0 || n_traj < 1)
        throw std::invalid_argument("gamma_sigma1: bad arguments");
    std::vector<double> c(max_lag + 1, 0.0), c_sq(max_lag + 1, 0.0);
    for (int traj = 0; traj < n_traj; ++traj) {
        RandomStream rng = derive_stream(seed, stream_tag::classical, std::uint64_t(traj));
        double x = rng.uniform(0.0, two_pi);
        double p = rng.uniform(0.0, two_pi);
        double f0 = std::cos(x);
        for (int m = 0; m <= max_lag; ++m) {
            double v = f0 * std::cos(x);
            c[m] += v;
            c_sq[m] += v * v;
            auto [x1, p1] = standard_map_step(x, p, k1);
            x = x1; p = p1;
        }
    }
    return detail::assemble(sigma1, hbar_eff, c, c_sq, n_traj);
}

/// Golden-rule rate of the coupling U = eps sin(x1 - x2 - phase_offset):
/// D(m) = <sin Delta_0 sin Delta_m> over independent trajectory pairs.
inline RateEstimate gamma_coupling(double eps, double k1, double k2, double phase_offset,
                                   double hbar_eff, int n_traj, int max_lag,
                                   std::uint64_t seed) {
    if (eps < 0.0 || max_lag < 0 || n_traj < 1)
        throw std::invalid_argument("gamma_coupling: bad arguments");
    std::vector<double> d(max_lag + 1, 0.0), d_sq(max_lag + 1, 0.0);
    for (int traj = 0; traj < n_traj; ++traj) {
        RandomStream rng = derive_stream(seed, stream_tag::classical, std::uint64_t(traj));
        double x1 = rng.uniform(0.0, two_pi), p1 = rng.uniform(0.0, two_pi);
        double x2 = rng.uniform(0.0, two_pi), p2 = rng.uniform(0.0, two_pi);
        double f0 = std::sin(x1 - x2 - phase_offset);
        for (int m = 0; m <= max_lag; ++m) {
            double v = f0 * std::sin(x1 - x2 - phase_offset);
            d[m] += v;
            d_sq[m] += v * v;
            auto [a, b] = standard_map_step(x1, p1, k1);
            x1 = a; p1 = b;
            auto [cx, cp] = standard_map_step(x2, p2, k2);
            x2 = cx; p2 = cp;
        }
    }
    return detail::assemble(eps, hbar_eff, d, d_sq, n_traj);
}

}  // namespace becho::classical
