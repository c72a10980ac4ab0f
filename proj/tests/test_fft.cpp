#include <catch2/catch_amalgamated.hpp>

#include "becho/dense_oracle.hpp"
#include "becho/fft.hpp"
#include "becho/rng.hpp"
#include "becho/state.hpp"

using namespace becho;

namespace {

cvector random_state(int n, std::uint64_t seed) {
    RandomStream rng(seed);
    cvector v(n);
    for (auto& z : v) z = rng.complex_normal();
    normalize(v);
    return v;
}

}  // namespace

TEST_CASE("position-momentum round trip is the identity", "[fft]") {
    for (int n : {4, 8, 64, 256}) {
        cvector v = random_state(n, 17 + n);
        cvector orig = v;
        fft::to_momentum_1d(v.data(), n);
        fft::to_position_1d(v.data(), n);
        double worst = 0.0;
        for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(v[i] - orig[i]));
        REQUIRE(worst < 1e-13);
    }
}

TEST_CASE("unitary transform preserves the norm", "[fft]") {
    cvector v = random_state(128, 3);
    fft::to_momentum_1d(v.data(), 128);
    REQUIRE(std::abs(norm_sq(v) - 1.0) < 1e-13);
}

TEST_CASE("transform matches the dense DFT matrix", "[fft]") {
    int n = 16;
    cvector v = random_state(n, 11);
    Eigen::VectorXcd x(n);
    for (int i = 0; i < n; ++i) x(i) = v[i];
    Eigen::VectorXcd y = dense_dft_matrix(n) * x;

    fft::to_momentum_1d(v.data(), n);
    for (int i = 0; i < n; ++i) REQUIRE(std::abs(v[i] - y(i)) < 1e-13);
}

TEST_CASE("row and column transforms act on the right axes", "[fft]") {
    int n = 8;
    // A product grid a[m1]*b[m2] must stay a product grid with each factor
    // transformed independently.
    cvector a = random_state(n, 5), b = random_state(n, 6);
    cvector grid(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) grid[i * n + j] = a[i] * b[j];

    fft::raw_rows(grid.data(), n, FFTW_FORWARD);
    cvector bt = b;
    fft::raw_1d(bt.data(), n, FFTW_FORWARD);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            REQUIRE(std::abs(grid[i * n + j] - a[i] * bt[j]) < 1e-12);

    fft::raw_cols(grid.data(), n, FFTW_FORWARD);
    cvector at = a;
    fft::raw_1d(at.data(), n, FFTW_FORWARD);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            REQUIRE(std::abs(grid[i * n + j] - at[i] * bt[j]) < 1e-11);
}
