#pragma once

#include "mlc/linalg.hpp"
#include "mlc/states.hpp"

namespace mlc {

/// A (k+1)-level coherence witness: W with every k x k principal submatrix PSD
/// (membership in the dual cone of C_k). `normalized` records that W <= I was
/// verified, which makes -Tr(W rho) a valid lower bound on the robustness.
struct Witness {
    int level_k = 1;
    HermitianMatrix matrix;
    bool normalized = false;
};

/// Interval of expectation values an observable can reach on C_k states.
struct NumericalRange {
    int level_k = 1;
    double lo = 0.0;
    double hi = 0.0;
};

/// W_k(psi) = I - (sum of the k largest |c_i|^2)^{-1} |psi><psi|.
/// lambda_max(W) = 1 by construction, so the result is normalized.
Witness witness_from_pure(const PureState& psi, int k);

/// True iff every k x k principal submatrix of W is PSD within tol.
/// Enumerates binom(d,k) blocks; refuses beyond the combinatorial cutoff.
bool validate_witness(const HermitianMatrix& w, int k, double tol = kPsdTol);

struct WitnessEigReport {
    int n_negative = 0;
    double min_eig = 0.0;
    bool bound_ok = false;
};

/// Spectral constraints on a witness in C_k^*: at most d-k negative
/// eigenvalues, and lambda_min >= -(d-k)/k * lambda_max.
WitnessEigReport witness_eig_sanity(const Witness& w, double tol = kPsdTol);

/// [lambda^min_{C_k}(O), lambda^max_{C_k}(O)]: extreme eigenvalues over all
/// k x k principal submatrices of O.
NumericalRange k_numerical_range(const HermitianMatrix& o, int k);

struct SingleObservableBound {
    double value = 0.0;
    /// Set when a vanishing denominator made the bound uninformative and 0 was
    /// returned instead.
    bool no_information = false;
};

/// Robustness lower bound from one measured expectation value of O.
/// Zero whenever the value is inside the k-coherence numerical range.
SingleObservableBound single_observable_bound(const HermitianMatrix& o, double value, int k);

}  // namespace mlc
