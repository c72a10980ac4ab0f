#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <new>
#include <numbers>
#include <vector>

namespace becho {

using cplx = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// 64-byte aligned allocator so complex grids satisfy any SIMD alignment
/// class the FFT backend planned for.
template <class T>
struct AlignedAlloc {
    using value_type = T;
    AlignedAlloc() = default;
    template <class U>
    AlignedAlloc(const AlignedAlloc<U>&) {}
    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t(64)));
    }
    void deallocate(T* p, std::size_t) noexcept {
        ::operator delete(p, std::align_val_t(64));
    }
    template <class U>
    bool operator==(const AlignedAlloc<U>&) const { return true; }
};

using cvector = std::vector<cplx, AlignedAlloc<cplx>>;

/// Wrap into [0, 2*pi).
inline double wrap_2pi(double x) {
    double y = std::fmod(x, two_pi);
    return y < 0.0 ? y + two_pi : y;
}

inline double sqr(double x) { return x * x; }

}  // namespace becho
