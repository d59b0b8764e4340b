#include "mlc/states.hpp"

#include <cmath>
#include <string>

namespace mlc {

PureState::PureState(Vector amplitudes) : amp_(std::move(amplitudes)) {
    if (amp_.size() < 1) throw ValidationError("PureState: dim must be >= 1");
    if (!amp_.allFinite()) throw ValidationError("PureState: non-finite amplitude");
    const double norm2 = amp_.squaredNorm();
    if (std::abs(norm2 - 1.0) > 1e-10) {
        throw ValidationError("PureState: squared norm " + std::to_string(norm2) + " is not 1");
    }
}

DensityMatrix PureState::projector() const {
    Matrix p = amp_ * amp_.adjoint();
    // Unit trace up to roundoff in |c|^2; rescale so the invariant is exact.
    p /= p.trace().real();
    return DensityMatrix(std::move(p));
}

PureState max_coherent(int d) {
    if (d < 1) throw ValidationError("max_coherent: d must be >= 1");
    Vector c = Vector::Constant(d, Complex(1.0 / std::sqrt(static_cast<double>(d)), 0.0));
    return PureState(std::move(c));
}

DensityMatrix noisy_max_coherent(const NoisyMcsParams& params) {
    if (params.dim < 2) throw ValidationError("noisy_max_coherent: d must be >= 2");
    if (params.p < 0.0 || params.p > 1.0) {
        throw ValidationError("noisy_max_coherent: p must lie in [0,1]");
    }
    const double d = static_cast<double>(params.dim);
    Matrix rho = Matrix::Constant(params.dim, params.dim, Complex(params.p / d, 0.0));
    rho.diagonal().setConstant(Complex(1.0 / d, 0.0));
    return DensityMatrix(std::move(rho));
}

int coherence_rank(const PureState& psi, double amp_tol) {
    int rank = 0;
    for (Index i = 0; i < psi.dim(); ++i) {
        if (std::abs(psi.amplitudes()(i)) > amp_tol) ++rank;
    }
    return rank;
}

DensityMatrix dephase_full(const DensityMatrix& rho) {
    Matrix diag = rho.mat().diagonal().real().cast<Complex>().asDiagonal();
    return DensityMatrix(std::move(diag));
}

DensityMatrix dephase_k(const DensityMatrix& rho, int k) {
    const Index d = rho.dim();
    if (k < 1 || k > d) throw ValidationError("dephase_k: k out of range");
    if (d == 1) return rho;
    const double w = static_cast<double>(k - 1) / static_cast<double>(d - 1);
    Matrix out = w * rho.mat() + (1.0 - w) * Matrix(dephase_full(rho).mat());
    return DensityMatrix(std::move(out));
}

}  // namespace mlc
