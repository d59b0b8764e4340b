#include "mlc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mlc {

void check_finite(const Matrix& a, const char* what) {
    if (!a.allFinite()) {
        throw ValidationError(std::string(what) + ": non-finite entries");
    }
}

HermitianMatrix::HermitianMatrix(Matrix a, double tol) {
    if (a.rows() < 1 || a.rows() != a.cols()) {
        throw ValidationError("HermitianMatrix: need a square matrix of dim >= 1");
    }
    check_finite(a, "HermitianMatrix");
    const double violation = (a - a.adjoint()).cwiseAbs().maxCoeff();
    if (violation > tol) {
        throw ValidationError("HermitianMatrix: Hermiticity violation " +
                              std::to_string(violation) + " exceeds tolerance");
    }
    mat_ = 0.5 * (a + a.adjoint().eval());
}

DensityMatrix::DensityMatrix(Matrix rho) : DensityMatrix(HermitianMatrix(std::move(rho))) {}

DensityMatrix::DensityMatrix(const HermitianMatrix& h) : h_(h) {
    const double tr = h_.mat().trace().real();
    if (std::abs(tr - 1.0) > kTraceTol) {
        throw ValidationError("DensityMatrix: trace " + std::to_string(tr) + " is not 1");
    }
    const double lo = min_eigenvalue(h_.mat());
    if (lo < -kPsdTol) {
        throw ValidationError("DensityMatrix: smallest eigenvalue " + std::to_string(lo) +
                              " below -1e-9");
    }
}

double DensityMatrix::purity() const { return (mat() * mat()).trace().real(); }

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> eig_solver(const Matrix& a, bool vectors) {
    Eigen::SelfAdjointEigenSolver<Matrix> es;
    es.compute(a, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw NumericalError("eig_hermitian: no convergence within " +
                             std::to_string(30 * a.rows()) + " implicit QR iterations");
    }
    return es;
}

}  // namespace

Spectrum eig_hermitian(const HermitianMatrix& a) {
    auto es = eig_solver(a.mat(), true);
    return Spectrum{es.eigenvalues(), es.eigenvectors()};
}

double min_eigenvalue(const Matrix& hermitian) {
    return eig_solver(hermitian, false).eigenvalues().minCoeff();
}

double max_eigenvalue(const Matrix& hermitian) {
    return eig_solver(hermitian, false).eigenvalues().maxCoeff();
}

bool is_psd(const HermitianMatrix& a, double tol) {
    if (tol < 0) throw ValidationError("is_psd: tol must be >= 0");
    return min_eigenvalue(a.mat()) >= -tol;
}

HermitianMatrix comparison_matrix(const HermitianMatrix& a) {
    const Index d = a.dim();
    Matrix m(d, d);
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            const double mag = std::abs(a.mat()(i, j));
            m(i, j) = (i == j) ? mag : -mag;
        }
    }
    return HermitianMatrix(std::move(m));
}

Matrix principal_submatrix(const Matrix& a, std::span<const int> indices) {
    if (indices.empty()) throw ValidationError("principal_submatrix: empty index set");
    std::vector<int> seen(static_cast<size_t>(a.rows()), 0);
    for (int i : indices) {
        if (i < 0 || i >= a.rows()) throw ValidationError("principal_submatrix: index out of range");
        if (seen[static_cast<size_t>(i)]++) {
            throw ValidationError("principal_submatrix: duplicate index");
        }
    }
    const Index k = static_cast<Index>(indices.size());
    Matrix block(k, k);
    for (Index r = 0; r < k; ++r) {
        for (Index c = 0; c < k; ++c) {
            block(r, c) = a(indices[static_cast<size_t>(r)], indices[static_cast<size_t>(c)]);
        }
    }
    return block;
}

HermitianMatrix principal_submatrix(const HermitianMatrix& a, std::span<const int> indices) {
    return HermitianMatrix(principal_submatrix(a.mat(), indices));
}

Matrix sqrt_psd(const Matrix& hermitian) {
    auto es = eig_solver(hermitian, true);
    RealVector lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw ValidationError("fidelity: dimension mismatch");
    const Matrix root = sqrt_psd(rho.mat());
    const Matrix inner = root * sigma.mat() * root;
    auto es = eig_solver(0.5 * (inner + inner.adjoint().eval()), false);
    const double f = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return std::clamp(f, 0.0, 1.0);
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw ValidationError("trace_distance: dimension mismatch");
    auto es = eig_solver(rho.mat() - sigma.mat(), false);
    return std::clamp(0.5 * es.eigenvalues().cwiseAbs().sum(), 0.0, 1.0);
}

}  // namespace mlc
