#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mlc/errors.hpp"

namespace mlc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Repo-wide tolerances. States produced by the conic solver carry ~1e-7
// feasibility error, so PSD checks run one order looser than that.
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;
inline constexpr double kEigResidualTol = 1e-10;

/// Throws ValidationError if any entry is NaN or infinite.
void check_finite(const Matrix& a, const char* what);

/// Hermitian matrix. Construction symmetrizes (A+A^H)/2 when the violation
/// max_ij |A_ij - conj(A_ji)| is below kHermitianTol and rejects otherwise.
class HermitianMatrix {
  public:
    explicit HermitianMatrix(Matrix a, double tol = kHermitianTol);

    Index dim() const { return mat_.rows(); }
    const Matrix& mat() const { return mat_; }

  private:
    Matrix mat_;
};

/// Density matrix: Hermitian, unit trace (within kTraceTol), smallest
/// eigenvalue >= -kPsdTol. Stored exactly as validated, never renormalized.
class DensityMatrix {
  public:
    explicit DensityMatrix(Matrix rho);
    explicit DensityMatrix(const HermitianMatrix& h);

    Index dim() const { return h_.dim(); }
    const Matrix& mat() const { return h_.mat(); }
    const HermitianMatrix& hermitian() const { return h_; }

    double purity() const;

  private:
    HermitianMatrix h_;
};

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues, unitary
/// eigenvector columns, reconstruction residual <= kEigResidualTol * max(1, |A|_F).
struct Spectrum {
    RealVector eigenvalues;
    Matrix eigenvectors;
};

Spectrum eig_hermitian(const HermitianMatrix& a);

/// Smallest/largest eigenvalue helpers (eigenvalues only, no vectors).
double min_eigenvalue(const Matrix& hermitian);
double max_eigenvalue(const Matrix& hermitian);

bool is_psd(const HermitianMatrix& a, double tol = kPsdTol);

/// M(A): |A_ii| on the diagonal, -|A_ij| off it. Output is real symmetric.
HermitianMatrix comparison_matrix(const HermitianMatrix& a);

/// Rows and columns of `a` restricted to `indices` (order preserved).
HermitianMatrix principal_submatrix(const HermitianMatrix& a, std::span<const int> indices);
Matrix principal_submatrix(const Matrix& a, std::span<const int> indices);

/// Uhlmann fidelity F(rho, sigma) = Tr sqrt(sqrt(rho) sigma sqrt(rho)), in [0,1].
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Trace distance (1/2)|rho - sigma|_1, in [0,1].
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Hermitian square root via eigendecomposition, negative eigenvalues clamped to 0.
Matrix sqrt_psd(const Matrix& hermitian);

}  // namespace mlc
