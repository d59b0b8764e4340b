#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mlc/linalg.hpp"
#include "mlc/sdp.hpp"
#include "mlc/witness.hpp"

namespace mlc {

/// One component sigma_I of a primal decomposition, supported on `indices`.
struct RmcComponent {
    std::vector<int> indices;
    Matrix block;  // |I| x |I|, PSD
};

/// Robustness of (k+1)-level coherence. 0 <= value <= d/k - 1.
/// The dual route carries the optimal witness, the primal route the
/// decomposition; `gap` is the solver's |primal - dual|.
struct RmcResult {
    int k = 1;
    double value = 0.0;
    std::optional<Witness> witness;
    std::vector<RmcComponent> decomposition;
    double gap = 0.0;
};

/// min sum_I Tr(sigma_I) - 1  s.t.  sigma_I >= 0 supported on I,
///                                  sum_I sigma_I >= rho.
RmcResult rmc_primal(const DensityMatrix& rho, int k, const sdp::SdpOptions& options = {});

/// max -Tr(rho W)  s.t.  every k x k principal submatrix of W PSD,  W <= I.
/// Solved over Z = I - W >= 0; returns the optimal witness.
RmcResult rmc_dual(const DensityMatrix& rho, int k, const sdp::SdpOptions& options = {});

/// Closed form for noisy maximally coherent states:
///   max{ (p(d-1) - (k-1)) / k , 0 }.
double rmc_analytic_nmcs(int d, int k, double p);

inline constexpr double kMembershipTol = 1e-6;

/// Smallest k whose robustness at level k is <= tol.
int coherence_number(const DensityMatrix& rho, double tol = kMembershipTol);

/// A measured expectation value Tr(O rho) with one-sided uncertainties.
struct Observation {
    HermitianMatrix observable;
    double value = 0.0;
    double err_lo = 0.0;
    double err_hi = 0.0;
};

/// Minimal robustness over all states consistent with the observations
/// (a lower bound on the robustness of the true state). Throws
/// InfeasibleError when no state reproduces the data.
double rmc_from_observations(std::span<const Observation> obs, int k, int dim,
                             const sdp::SdpOptions& options = {});

struct ObservationBound {
    double value = 0.0;
    bool widened = false;  // error bars were widened x1.5 once to restore feasibility
};

/// rmc_from_observations with a single x1.5 error-bar widening retry on
/// infeasible data (measured data can be marginally inconsistent).
ObservationBound rmc_from_observations_retry(std::span<const Observation> obs, int k, int dim,
                                             const sdp::SdpOptions& options = {});

}  // namespace mlc
