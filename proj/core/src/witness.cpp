#include "mlc/witness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mlc/subsets.hpp"

namespace mlc {

Witness witness_from_pure(const PureState& psi, int k) {
    const Index d = psi.dim();
    if (k < 1 || k >= d) throw ValidationError("witness_from_pure: need 1 <= k < d");
    std::vector<double> mags(static_cast<size_t>(d));
    for (Index i = 0; i < d; ++i) mags[static_cast<size_t>(i)] = std::norm(psi.amplitudes()(i));
    // The witness depends only on the top-k sum, so any stable tie-break works.
    std::sort(mags.begin(), mags.end(), std::greater<>());
    const double top_k = std::accumulate(mags.begin(), mags.begin() + k, 0.0);
    if (top_k <= 0.0) throw ValidationError("witness_from_pure: zero top-k weight");
    Matrix w = Matrix::Identity(d, d) - (1.0 / top_k) * (psi.amplitudes() * psi.amplitudes().adjoint());
    return Witness{k, HermitianMatrix(std::move(w)), true};
}

bool validate_witness(const HermitianMatrix& w, int k, double tol) {
    const int d = static_cast<int>(w.dim());
    if (k < 1 || k > d) throw ValidationError("validate_witness: k out of range");
    for (const auto& subset : index_subsets(d, k)) {
        if (min_eigenvalue(principal_submatrix(w.mat(), subset)) < -tol) return false;
    }
    return true;
}

WitnessEigReport witness_eig_sanity(const Witness& w, double tol) {
    if (!validate_witness(w.matrix, w.level_k, tol)) {
        throw ValidationError("witness_eig_sanity: witness fails dual-cone validation");
    }
    const Index d = w.matrix.dim();
    const int k = w.level_k;
    const Spectrum spec = eig_hermitian(w.matrix);
    WitnessEigReport report;
    report.min_eig = spec.eigenvalues(0);
    for (Index i = 0; i < d; ++i) {
        if (spec.eigenvalues(i) < -tol) ++report.n_negative;
    }
    const double lam_max = spec.eigenvalues(d - 1);
    const double lower = -static_cast<double>(d - k) / static_cast<double>(k) * lam_max;
    report.bound_ok = (report.n_negative <= static_cast<int>(d) - k) &&
                      (report.min_eig >= lower - tol);
    return report;
}

NumericalRange k_numerical_range(const HermitianMatrix& o, int k) {
    const int d = static_cast<int>(o.dim());
    if (k < 1 || k > d) throw ValidationError("k_numerical_range: k out of range");
    NumericalRange range{k, std::numeric_limits<double>::infinity(),
                         -std::numeric_limits<double>::infinity()};
    for (const auto& subset : index_subsets(d, k)) {
        const Matrix block = principal_submatrix(o.mat(), subset);
        range.lo = std::min(range.lo, min_eigenvalue(block));
        range.hi = std::max(range.hi, max_eigenvalue(block));
    }
    return range;
}

SingleObservableBound single_observable_bound(const HermitianMatrix& o, double value, int k) {
    const Spectrum spec = eig_hermitian(o);
    const double lam_min = spec.eigenvalues(0);
    const double lam_max = spec.eigenvalues(o.dim() - 1);
    if (lam_max - lam_min <= kPsdTol) {
        throw ValidationError("single_observable_bound: fully degenerate observable");
    }
    if (value < lam_min - kPsdTol || value > lam_max + kPsdTol) {
        throw ValidationError("single_observable_bound: value outside the numerical range of O");
    }
    const NumericalRange nr = k_numerical_range(o, k);
    SingleObservableBound out;
    const double upper_den = nr.hi - lam_min;
    const double lower_den = lam_max - nr.lo;
    if (value > nr.hi) {
        if (upper_den <= kPsdTol) {
            out.no_information = true;
            return out;
        }
        out.value = (value - nr.hi) / upper_den;
    } else if (value < nr.lo) {
        if (lower_den <= kPsdTol) {
            out.no_information = true;
            return out;
        }
        out.value = (nr.lo - value) / lower_den;
    }
    out.value = std::max(out.value, 0.0);
    return out;
}

}  // namespace mlc
