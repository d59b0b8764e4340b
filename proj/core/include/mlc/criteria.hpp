#pragma once

#include <string>

#include "mlc/linalg.hpp"

namespace mlc {

enum class Verdict { kCertifiedMember, kCertifiedNonmember, kInconclusive };

const char* to_string(Verdict v);

/// Outcome of an analytic certificate. `margin` is the signed distance to the
/// criterion threshold: positive for members, negative for non-members.
struct CertificateVerdict {
    Verdict verdict = Verdict::kInconclusive;
    std::string criterion;
    double margin = 0.0;
};

inline constexpr double kMarginTol = 1e-9;
inline constexpr double kDiagonalTol = 1e-10;

/// Comparison-matrix test: rho is in C_2 iff M(rho) is PSD. Necessary and
/// sufficient, so the verdict is never inconclusive. margin = lambda_min(M(rho)).
CertificateVerdict certify_c2_comparison(const DensityMatrix& rho, double tol = kMarginTol);

/// Full qutrit classification: 1 for diagonal states, 2 when M(rho) is PSD,
/// 3 otherwise. PSD is tested through lambda_min rather than the determinant,
/// which behaves better when 2x2 minors sit at zero up to roundoff.
int classify_qutrit(const DensityMatrix& rho, double tol = kMarginTol);

/// Purity ball: Tr(rho^2) <= 1/(d-1) puts rho inside C_2 for every basis.
/// One-sided; failure proves nothing. margin = 1/(d-1) - Tr(rho^2).
CertificateVerdict purity_ball_check(const DensityMatrix& rho);

/// Sufficient condition for C_k: rho >= (d-k)/(d-1) * dephase_full(rho).
/// Exact for k=1 (it then characterizes the diagonal states); one-sided for k>=2.
/// margin = lambda_min(rho - (d-k)/(d-1) * dephase_full(rho)).
CertificateVerdict sufficient_ck_check(const DensityMatrix& rho, int k, double tol = kMarginTol);

}  // namespace mlc
