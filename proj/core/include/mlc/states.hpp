#pragma once

#include "mlc/linalg.hpp"

namespace mlc {

/// Pure state |psi> = sum_i c_i |i> with sum |c_i|^2 = 1 (within 1e-10).
class PureState {
  public:
    explicit PureState(Vector amplitudes);

    Index dim() const { return amp_.size(); }
    const Vector& amplitudes() const { return amp_; }

    DensityMatrix projector() const;

  private:
    Vector amp_;
};

struct NoisyMcsParams {
    int dim = 2;      // d >= 2
    double p = 0.0;   // mixing parameter in [0,1]
};

/// |psi_d^+> = d^{-1/2} sum_i |i>.
PureState max_coherent(int d);

/// rho(p) = (1-p) I/d + p |psi_d^+><psi_d^+|: diagonal 1/d, off-diagonal p/d.
DensityMatrix noisy_max_coherent(const NoisyMcsParams& params);

inline constexpr double kAmplitudeTol = 1e-8;

/// Number of amplitudes with |c_i| > amp_tol. The notion is tolerance-dependent
/// for numerical states; the default separates exact zeros from roundoff.
int coherence_rank(const PureState& psi, double amp_tol = kAmplitudeTol);

/// Fully decohering map: keeps the diagonal, zeroes all off-diagonal entries.
DensityMatrix dephase_full(const DensityMatrix& rho);

/// k-level dephasing channel, evaluated through its convex form
///   (k-1)/(d-1) rho + (d-k)/(d-1) dephase_full(rho).
/// k=1 is full dephasing, k=d is the identity channel.
DensityMatrix dephase_k(const DensityMatrix& rho, int k);

}  // namespace mlc
