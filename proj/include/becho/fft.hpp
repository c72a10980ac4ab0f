#pragma once

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "becho/core.hpp"

// Discrete Fourier transforms between the position and momentum grids,
// x_m = 2*pi*m/N  <->  p_n = 2*pi*n/N.  The position->momentum kernel is
// exp(-2*pi*i*n*m/N) (FFTW_FORWARD sign); unitary variants carry 1/sqrt(N).
//
// Plans are created once per (length, layout, sign) with FFTW_ESTIMATE and
// cached; ESTIMATE keeps plan selection deterministic so repeated runs are
// bit-identical.  Execution through the new-array interface is thread-safe.

namespace becho::fft {

namespace detail {

struct PlanKey {
    int len, howmany, stride, dist, sign;
    auto operator<=>(const PlanKey&) const = default;
};

inline fftw_plan get_plan(const PlanKey& k) {
    static std::map<PlanKey, fftw_plan> cache;
    static std::mutex mtx;
    std::lock_guard lock(mtx);
    auto it = cache.find(k);
    if (it != cache.end()) return it->second;

    std::size_t span = static_cast<std::size_t>(k.len) * k.howmany;
    fftw_complex* probe = fftw_alloc_complex(span);
    int n = k.len;
    fftw_plan p = fftw_plan_many_dft(1, &n, k.howmany, probe, nullptr, k.stride,
                                     k.dist, probe, nullptr, k.stride, k.dist,
                                     k.sign, FFTW_ESTIMATE);
    fftw_free(probe);
    if (!p) throw std::runtime_error("fft: plan creation failed");
    cache.emplace(k, p);
    return p;
}

inline void execute(const PlanKey& k, cplx* a) {
    fftw_plan p = get_plan(k);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(a),
                     reinterpret_cast<fftw_complex*>(a));
}

}  // namespace detail

/// In-place unnormalized DFT of a single length-n vector.
inline void raw_1d(cplx* a, int n, int sign) {
    detail::execute({n, 1, 1, n, sign}, a);
}

/// Rows of a row-major n x n grid (particle-2 axis), unnormalized.
inline void raw_rows(cplx* a, int n, int sign) {
    detail::execute({n, n, 1, n, sign}, a);
}

/// Columns of a row-major n x n grid (particle-1 axis), unnormalized.
inline void raw_cols(cplx* a, int n, int sign) {
    detail::execute({n, n, n, 1, sign}, a);
}

/// Unitary position->momentum transform of a length-n vector.
inline void to_momentum_1d(cplx* a, int n) {
    raw_1d(a, n, FFTW_FORWARD);
    double s = 1.0 / std::sqrt(double(n));
    for (int i = 0; i < n; ++i) a[i] *= s;
}

/// Unitary momentum->position transform of a length-n vector.
inline void to_position_1d(cplx* a, int n) {
    raw_1d(a, n, FFTW_BACKWARD);
    double s = 1.0 / std::sqrt(double(n));
    for (int i = 0; i < n; ++i) a[i] *= s;
}

}  // namespace becho::fft
