#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "becho/floquet.hpp"
#include "becho/model.hpp"
#include "becho/state_prep.hpp"

// The Boltzmann-echo protocol: evolve psi_1 (x) phi_2 forward for t periods,
// backward for t periods with the partially time-reversed step, then project
// the reduced particle-1 state back onto psi_1.
//
// Curves measure M_B at a grid of times from a single forward pass per
// realization: at each measurement time the forward state is copied and the
// copy is run backward, so the cost is O(t_max + sum_i t_i) periods instead
// of O(sum_i 2 t_i).

namespace becho {

struct BudgetError : std::runtime_error {
    std::uint64_t needed, budget;
    BudgetError(std::uint64_t needed_, std::uint64_t budget_)
        : std::runtime_error("step budget exceeded: needs " + std::to_string(needed_) +
                             " Floquet periods, budget " + std::to_string(budget_)),
          needed(needed_), budget(budget_) {}
};

inline constexpr std::uint64_t default_step_budget = 1'000'000'000ull;

struct EchoRunSpec {
    ModelParams params;
    WavepacketSpec psi1;          // sigma_x is used; centers are drawn per realization
    Rho2Spec rho2;
    std::vector<int> times;
    int realizations = 1;
    std::uint64_t seed = 0;
    std::uint64_t max_steps = default_step_budget;
    bool keep_realization_values = false;
};

struct EchoCurve {
    std::vector<int> times;
    std::vector<double> mean;
    std::vector<double> stderr_;
    int realizations = 0;
    ModelParams params;
    // realization-major sample matrix, kept only on request
    std::vector<double> realization_values;
};

namespace detail {

inline void check_times(const std::vector<int>& times) {
    if (times.empty()) throw std::invalid_argument("echo: empty measurement-time list");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0) throw std::invalid_argument("echo: negative measurement time");
        if (i > 0 && times[i] <= times[i - 1])
            throw std::invalid_argument("echo: times must be strictly increasing");
    }
}

/// Cost of one realization in Floquet periods (forward pass + backward legs).
inline std::uint64_t periods_per_realization(const std::vector<int>& times) {
    std::uint64_t total = times.back();
    for (int t : times) total += std::uint64_t(t);
    return total;
}

inline void check_normalized(double nrm, const char* who) {
    if (std::abs(nrm - 1.0) > 1e-8)
        throw std::invalid_argument(std::string(who) + ": input state not normalized");
}

/// Deterministic reduction of the per-realization value matrix
/// (values[r * nt + i]), independent of how work was partitioned.
inline EchoCurve reduce_curve(const std::vector<int>& times, const std::vector<double>& values,
                              int realizations, const ModelParams& params) {
    std::size_t nt = times.size();
    EchoCurve curve;
    curve.times = times;
    curve.realizations = realizations;
    curve.params = params;
    curve.mean.resize(nt);
    curve.stderr_.resize(nt);
    for (std::size_t i = 0; i < nt; ++i) {
        double m = 0.0;
        for (int r = 0; r < realizations; ++r) m += values[std::size_t(r) * nt + i];
        m /= realizations;
        double ss = 0.0;
        for (int r = 0; r < realizations; ++r) ss += sqr(values[std::size_t(r) * nt + i] - m);
        curve.mean[i] = m;
        curve.stderr_[i] = realizations > 1
                               ? std::sqrt(ss / (realizations - 1) / realizations)
                               : 0.0;
    }
    return curve;
}

template <class PerRealization>
inline void parallel_realizations(int realizations, int workers, PerRealization&& body) {
    workers = std::max(1, std::min(workers, realizations));
    if (workers == 1) {
        for (int r = 0; r < realizations; ++r) body(r);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (int r = w; r < realizations; r += workers) body(r);
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

/// M_B for one realization with prebuilt steps.  t = 0 is exactly 1.
inline double boltzmann_echo_single(const FloquetStep& forward, const FloquetStep& backward,
                                    const WaveFunction1P& psi1_state,
                                    const WaveFunction1P& phi2_state, int t) {
    if (t < 0) throw std::invalid_argument("boltzmann_echo_single: t >= 0 required");
    detail::check_normalized(norm(psi1_state), "boltzmann_echo_single(psi1)");
    detail::check_normalized(norm(phi2_state), "boltzmann_echo_single(phi2)");
    if (t == 0) return 1.0;
    JointState joint = outer_product(psi1_state, phi2_state);
    for (int k = 0; k < t; ++k) apply_step(forward, joint);
    for (int k = 0; k < t; ++k) apply_step(backward, joint);
    return reduced_overlap(psi1_state, joint);
}

inline double boltzmann_echo_single(const ModelParams& params, const WaveFunction1P& psi1_state,
                                    const WaveFunction1P& phi2_state, int t) {
    FloquetStep fwd = build_forward_step(params);
    FloquetStep bwd = build_backward_step(params);
    return boltzmann_echo_single(fwd, bwd, psi1_state, phi2_state, t);
}

/// Ensemble echo curve.  Realization r draws the psi_1 center uniformly on
/// the torus from stream (seed, psi1, r) and phi_2 from the rho_2 ensemble;
/// output is deterministic for a given seed, whatever the worker count.
inline EchoCurve boltzmann_echo_curve(const EchoRunSpec& spec, int workers = 1) {
    spec.params.validate();
    detail::check_times(spec.times);
    if (spec.realizations < 1)
        throw std::invalid_argument("echo: realizations must be >= 1");

    std::uint64_t cost = std::uint64_t(spec.realizations) *
                         detail::periods_per_realization(spec.times);
    if (cost > spec.max_steps) throw BudgetError(cost, spec.max_steps);

    Rho2Spec rho2 = spec.rho2;
    if (rho2.sample_count < spec.realizations) rho2.sample_count = spec.realizations;

    const FloquetStep fwd = build_forward_step(spec.params);
    const FloquetStep bwd = build_backward_step(spec.params);
    std::size_t nt = spec.times.size();
    std::vector<double> values(std::size_t(spec.realizations) * nt);

    detail::parallel_realizations(spec.realizations, workers, [&](int r) {
        RandomStream centers = derive_stream(spec.seed, stream_tag::psi1_center, std::uint64_t(r));
        WavepacketSpec wp = spec.psi1;
        wp.r0 = centers.uniform(0.0, two_pi);
        wp.p0 = centers.uniform(0.0, two_pi);
        WaveFunction1P psi1 = make_wavepacket(wp, spec.params.n);
        WaveFunction1P phi2 = sample_rho2(rho2, spec.params.n, r);

        JointState state = outer_product(psi1, phi2);
        JointState work;
        int t_now = 0;
        for (std::size_t i = 0; i < nt; ++i) {
            int t = spec.times[i];
            for (; t_now < t; ++t_now) apply_step(fwd, state);
            if (t == 0) {
                values[std::size_t(r) * nt + i] = 1.0;
                continue;
            }
            work = state;
            for (int k = 0; k < t; ++k) apply_step(bwd, work);
            values[std::size_t(r) * nt + i] = reduced_overlap(psi1, work);
        }
    });

    EchoCurve curve = detail::reduce_curve(spec.times, values, spec.realizations, spec.params);
    if (spec.keep_realization_values) curve.realization_values = std::move(values);
    return curve;
}

struct LoschmidtRunSpec {
    int n = 0;
    double k1 = 0.0;
    double sigma1 = 0.0;
    double period = 1.0;
    WavepacketSpec psi1;
    std::vector<int> times;
    int realizations = 1;
    std::uint64_t seed = 0;
    std::uint64_t max_steps = default_step_budget;
    bool keep_realization_values = false;
};

/// One-particle Loschmidt echo |<psi_0| (backward at K1+sigma1)^t (forward at
/// K1)^t |psi_0>|^2, sharing the psi_1 center stream with the Boltzmann curve
/// so the eps = 0 limit can be compared realization by realization.
inline EchoCurve loschmidt_echo_curve(const LoschmidtRunSpec& spec, int workers = 1) {
    detail::check_times(spec.times);
    if (spec.realizations < 1)
        throw std::invalid_argument("echo: realizations must be >= 1");
    std::uint64_t cost = std::uint64_t(spec.realizations) *
                         detail::periods_per_realization(spec.times);
    if (cost > spec.max_steps) throw BudgetError(cost, spec.max_steps);

    const Step1P fwd = build_forward_step_1p(spec.n, spec.k1, spec.period);
    const Step1P bwd = build_backward_step_1p(spec.n, spec.k1 + spec.sigma1, spec.period);
    std::size_t nt = spec.times.size();
    std::vector<double> values(std::size_t(spec.realizations) * nt);

    detail::parallel_realizations(spec.realizations, workers, [&](int r) {
        RandomStream centers = derive_stream(spec.seed, stream_tag::psi1_center, std::uint64_t(r));
        WavepacketSpec wp = spec.psi1;
        wp.r0 = centers.uniform(0.0, two_pi);
        wp.p0 = centers.uniform(0.0, two_pi);
        WaveFunction1P psi0 = make_wavepacket(wp, spec.n);

        WaveFunction1P state = psi0;
        WaveFunction1P work;
        int t_now = 0;
        for (std::size_t i = 0; i < nt; ++i) {
            int t = spec.times[i];
            for (; t_now < t; ++t_now) apply_step_1p(fwd, state);
            if (t == 0) {
                values[std::size_t(r) * nt + i] = 1.0;
                continue;
            }
            work = state;
            for (int k = 0; k < t; ++k) apply_step_1p(bwd, work);
            values[std::size_t(r) * nt + i] = std::norm(inner(psi0, work));
        }
    });

    ModelParams p;
    p.n = spec.n;
    p.k1 = p.k2 = spec.k1;
    p.sigma1 = spec.sigma1;
    p.period = spec.period;
    EchoCurve curve = detail::reduce_curve(spec.times, values, spec.realizations, p);
    if (spec.keep_realization_values) curve.realization_values = std::move(values);
    return curve;
}

}  // namespace becho
