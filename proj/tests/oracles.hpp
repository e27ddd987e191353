// oracles.hpp — test-only reference implementations, kept independent of the
// library code paths they check.

#pragma once

#include "glh/common.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using glh::Complex;
using glh::Matrix;
using glh::Vector;

// Embeds a k-local matrix on `support` into the full 2^n space by looping over
// global (row, col) pairs and testing agreement on untouched qubits.  This is
// deliberately the naive O(4^n) construction.
inline Matrix embed(const Matrix& m, const std::vector<int>& support, int n) {
    const glh::Index dim = glh::Index{1} << n;
    Matrix out = Matrix::Zero(dim, dim);
    const int k = static_cast<int>(support.size());
    for (glh::Index r = 0; r < dim; ++r) {
        for (glh::Index c = 0; c < dim; ++c) {
            bool rest_equal = true;
            for (int q = 0; q < n && rest_equal; ++q) {
                bool touched = false;
                for (int s : support) touched = touched || (s == q);
                if (!touched && glh::get_bit(static_cast<std::uint64_t>(r), q) !=
                                    glh::get_bit(static_cast<std::uint64_t>(c), q))
                    rest_equal = false;
            }
            if (!rest_equal) continue;
            glh::Index lr = 0, lc = 0;
            for (int j = 0; j < k; ++j) {
                lr |= glh::Index{glh::get_bit(static_cast<std::uint64_t>(r), support[static_cast<std::size_t>(j)])} << j;
                lc |= glh::Index{glh::get_bit(static_cast<std::uint64_t>(c), support[static_cast<std::size_t>(j)])} << j;
            }
            out(r, c) = m(lr, lc);
        }
    }
    return out;
}

// Sorted eigenvalues of a Hermitian matrix.
inline Eigen::VectorXd eigenvalues(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline double spectral_norm(const Matrix& m) {
    auto ev = eigenvalues(m);
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

// Random Hermitian matrix with entries of scale ~1.
inline Matrix random_hermitian(glh::Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix a(dim, dim);
    for (glh::Index r = 0; r < dim; ++r)
        for (glh::Index c = 0; c < dim; ++c) a(r, c) = Complex(g(rng), g(rng));
    return 0.5 * (a + Matrix(a.adjoint()));
}

// Random unitary via QR of a Ginibre matrix.
inline Matrix random_unitary(glh::Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix a(dim, dim);
    for (glh::Index r = 0; r < dim; ++r)
        for (glh::Index c = 0; c < dim; ++c) a(r, c) = Complex(g(rng), g(rng));
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (glh::Index i = 0; i < dim; ++i) {
        const Complex d = r(i, i);
        const Complex phase = (std::abs(d) > 0) ? d / std::abs(d) : Complex(1, 0);
        q.col(i) *= phase;
    }
    return q;
}

} // namespace oracle
