#pragma once

#include <cmath>
#include <cstdint>

#include "becho/core.hpp"

// Seeded random streams with a fully specified algorithm (splitmix64 +
// Box-Muller), so "same seed => bitwise-identical samples" holds regardless
// of standard-library internals.  Streams for distinct purposes are derived
// from (seed, tag, index) and can be drawn in any order across workers.

namespace becho {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

struct RandomStream {
    std::uint64_t state;

    explicit RandomStream(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() { return splitmix64(state); }

    /// Uniform in [0, 1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (pairs drawn eagerly, one cached).
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1, u2;
        do { u1 = uniform(); } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        cached_ = r * std::sin(two_pi * u2);
        have_cached_ = true;
        return r * std::cos(two_pi * u2);
    }

    cplx complex_normal() {
        double re = normal();
        double im = normal();
        return {re, im};
    }

    /// Index draw from unnormalized non-negative weights.
    int discrete(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size()) - 1;
    }

private:
    double cached_ = 0.0;
    bool have_cached_ = false;
};

namespace stream_tag {
inline constexpr std::uint64_t psi1_center = 0x70736931ull;   // "psi1"
inline constexpr std::uint64_t phi2_sample = 0x70686932ull;   // "phi2"
inline constexpr std::uint64_t classical = 0x636c6173ull;     // "clas"
}  // namespace stream_tag

/// Independent stream for work item `index` under `tag`.
inline RandomStream derive_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= tag * 0x9e3779b97f4a7c15ull;
    std::uint64_t b = splitmix64(s);
    s ^= index * 0xd1342543de82ef95ull;
    std::uint64_t c = splitmix64(s);
    return RandomStream(a ^ (b << 1) ^ c);
}

}  // namespace becho
