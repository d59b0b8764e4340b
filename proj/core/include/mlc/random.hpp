#pragma once

#include <cstdint>
#include <random>

#include <Eigen/QR>

#include "mlc/linalg.hpp"

namespace mlc {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Counter-based seed derivation: independent streams per (stream, index), so
/// parallel evaluation order cannot change any draw.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    return splitmix64(splitmix64(master ^ stream * 0xD1B54A32D192ED03ull) ^ index);
}

inline Matrix random_ginibre(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    Matrix g(d, d);
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            g(i, j) = Complex(n01(rng), n01(rng));
        }
    }
    return g;
}

inline Matrix random_hermitian(int d, std::mt19937_64& rng) {
    const Matrix g = random_ginibre(d, rng);
    return 0.5 * (g + g.adjoint().eval());
}

inline Vector haar_state_vector(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    Vector v(d);
    for (Index i = 0; i < d; ++i) v(i) = Complex(n01(rng), n01(rng));
    return v / v.norm();
}

inline Matrix haar_unitary(int d, std::mt19937_64& rng) {
    Eigen::HouseholderQR<Matrix> qr(random_ginibre(d, rng));
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index i = 0; i < d; ++i) {
        const Complex rii = r(i, i);
        q.col(i) *= (std::abs(rii) > 0) ? rii / std::abs(rii) : Complex(1, 0);
    }
    return q;
}

/// Uniform mixture-weighted blend of n_pure Haar-random pure states.
inline DensityMatrix random_mixture(int d, int n_pure, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<double> w(static_cast<size_t>(n_pure));
    double tot = 0.0;
    for (auto& x : w) tot += (x = u01(rng) + 1e-6);
    Matrix rho = Matrix::Zero(d, d);
    for (int i = 0; i < n_pure; ++i) {
        const Vector psi = haar_state_vector(d, rng);
        rho += (w[static_cast<size_t>(i)] / tot) * (psi * psi.adjoint());
    }
    return DensityMatrix(0.5 * (rho + rho.adjoint().eval()));
}

}  // namespace mlc
