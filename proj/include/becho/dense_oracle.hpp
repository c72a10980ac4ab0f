#pragma once

#include <Eigen/Dense>

#include <stdexcept>

#include "becho/floquet.hpp"

// Dense-matrix oracle for small N.  Builds the one-period unitary explicitly
// from diagonal factors and dense DFT matrices, with no shared code with the
// split-step path, so the two routes check each other.

namespace becho {

inline constexpr int dense_oracle_max_n = 32;

/// Unitary position->momentum DFT matrix, F(k, m) = exp(-2 pi i k m / n) / sqrt(n).
inline Eigen::MatrixXcd dense_dft_matrix(int n) {
    Eigen::MatrixXcd f(n, n);
    double s = 1.0 / std::sqrt(double(n));
    for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m)
            f(k, m) = std::polar(s, -two_pi * k * m / n);
    return f;
}

/// Explicit N^2 x N^2 one-period unitary of a joint Floquet step.
/// Joint index convention matches JointState: i = m1 * n + m2.
inline Eigen::MatrixXcd dense_propagator(const FloquetStep& s) {
    if (s.n > dense_oracle_max_n)
        throw std::invalid_argument("dense_propagator: N > 32 refused (O(N^4) memory)");
    int n = s.n;
    int dim = n * n;

    Eigen::MatrixXcd f1 = dense_dft_matrix(n);
    Eigen::MatrixXcd ff(dim, dim);  // F (x) F
    for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2)
            for (int j1 = 0; j1 < n; ++j1)
                for (int j2 = 0; j2 < n; ++j2)
                    ff(i1 * n + i2, j1 * n + j2) = f1(i1, j1) * f1(i2, j2);

    Eigen::VectorXcd kick(dim), free(dim);
    for (int m1 = 0; m1 < n; ++m1)
        for (int m2 = 0; m2 < n; ++m2) {
            kick(m1 * n + m2) = s.kick_phase[static_cast<std::size_t>(m1) * n + m2];
            free(m1 * n + m2) = s.free_phase_1[m1] * s.free_phase_2[m2];
        }

    Eigen::MatrixXcd spectral = ff.adjoint() * free.asDiagonal() * ff;
    if (s.direction == Direction::forward)
        return spectral * kick.asDiagonal();
    return kick.asDiagonal() * spectral;
}

/// One-particle dense period unitary (Loschmidt reference oracle).
inline Eigen::MatrixXcd dense_propagator_1p(const Step1P& s) {
    if (s.n > dense_oracle_max_n * dense_oracle_max_n)
        throw std::invalid_argument("dense_propagator_1p: N refused");
    int n = s.n;
    Eigen::MatrixXcd f = dense_dft_matrix(n);
    Eigen::VectorXcd kick(n), free(n);
    for (int m = 0; m < n; ++m) {
        kick(m) = s.kick_phase[m];
        free(m) = s.free_phase[m];
    }
    Eigen::MatrixXcd spectral = f.adjoint() * free.asDiagonal() * f;
    if (s.direction == Direction::forward)
        return spectral * kick.asDiagonal();
    return kick.asDiagonal() * spectral;
}

}  // namespace becho
