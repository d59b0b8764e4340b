#include "mlc/criteria.hpp"

#include <limits>

#include "mlc/states.hpp"

namespace mlc {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::kCertifiedMember: return "CERTIFIED_MEMBER";
        case Verdict::kCertifiedNonmember: return "CERTIFIED_NONMEMBER";
        case Verdict::kInconclusive: return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

CertificateVerdict certify_c2_comparison(const DensityMatrix& rho, double tol) {
    const double margin = min_eigenvalue(comparison_matrix(rho.hermitian()).mat());
    const Verdict v = margin >= -tol ? Verdict::kCertifiedMember : Verdict::kCertifiedNonmember;
    return CertificateVerdict{v, "comparison", margin};
}

int classify_qutrit(const DensityMatrix& rho, double tol) {
    if (rho.dim() != 3) throw ValidationError("classify_qutrit: d must be 3");
    double off = 0.0;
    for (Index i = 0; i < 3; ++i) {
        for (Index j = 0; j < 3; ++j) {
            if (i != j) off = std::max(off, std::abs(rho.mat()(i, j)));
        }
    }
    if (off <= kDiagonalTol) return 1;
    return min_eigenvalue(comparison_matrix(rho.hermitian()).mat()) >= -tol ? 2 : 3;
}

CertificateVerdict purity_ball_check(const DensityMatrix& rho) {
    const Index d = rho.dim();
    const double threshold = d > 1 ? 1.0 / static_cast<double>(d - 1)
                                   : std::numeric_limits<double>::max();
    const double margin = threshold - rho.purity();
    const Verdict v = margin >= 0.0 ? Verdict::kCertifiedMember : Verdict::kInconclusive;
    return CertificateVerdict{v, "purity", margin};
}

CertificateVerdict sufficient_ck_check(const DensityMatrix& rho, int k, double tol) {
    const Index d = rho.dim();
    if (k < 1 || k > d) throw ValidationError("sufficient_ck_check: k out of range");
    const double w = d > 1 ? static_cast<double>(d - k) / static_cast<double>(d - 1) : 0.0;
    const Matrix gap = rho.mat() - w * Matrix(dephase_full(rho).mat());
    const double margin = min_eigenvalue(0.5 * (gap + gap.adjoint().eval()));
    if (margin >= -tol) return CertificateVerdict{Verdict::kCertifiedMember, "sufficient", margin};
    // Failing the inequality disproves membership only in the exact k=1 case.
    const Verdict v = (k == 1) ? Verdict::kCertifiedNonmember : Verdict::kInconclusive;
    return CertificateVerdict{v, "sufficient", margin};
}

}  // namespace mlc
