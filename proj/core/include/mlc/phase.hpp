#pragma once

#include <span>
#include <utility>
#include <vector>

#include "mlc/linalg.hpp"
#include "mlc/sdp.hpp"

namespace mlc {

struct PhaseEntry {
    double prior = 0.0;
    double phase = 0.0;  // radians, stored in [0, 2*pi)
};

/// Discrimination task: phases phi_m drawn with priors p_m, generated by the
/// fixed Hamiltonian H = diag(0, 1, ..., d-1).
class PhaseTask {
  public:
    PhaseTask(std::vector<PhaseEntry> entries, int dim);

    const std::vector<PhaseEntry>& entries() const { return entries_; }
    int dim() const { return dim_; }
    std::size_t size() const { return entries_.size(); }

    /// Best classical (incoherent-probe) success probability: the largest prior.
    double p_max() const;

  private:
    std::vector<PhaseEntry> entries_;
    int dim_;
};

/// The d uniformly spaced phases {(1/d, 2 pi m / d)}, m = 1..d.
PhaseTask uniform_task(int d);

class Povm {
  public:
    explicit Povm(std::vector<Matrix> elements);

    const std::vector<Matrix>& elements() const { return elements_; }
    std::size_t size() const { return elements_.size(); }
    Index dim() const { return elements_.front().rows(); }

  private:
    std::vector<Matrix> elements_;
};

/// The measurement achieving the optimum for the uniform task:
/// M_m = U_{phi_m} |psi_d^+><psi_d^+| U_{phi_m}^dagger.
Povm uniform_optimal_povm(int d);

/// U_phi rho U_phi^dagger with U_phi = exp(-i H phi): entry (j,l) picks up
/// exp(-i (j-l) phi). Diagonal, trace, and spectrum are untouched.
DensityMatrix apply_phase(const DensityMatrix& rho, double phi);

/// sum_m p_m Tr(U_{phi_m}(rho) M_m).
double success_probability(const DensityMatrix& rho, const PhaseTask& task, const Povm& povm);

/// Optimal single-shot probability of identifying which ensemble member was
/// prepared: min{ p : rho_AB <= p I_A (x) sigma_B }, solved as an SDP.
double optimal_guess_probability(std::span<const std::pair<double, DensityMatrix>> ensemble,
                                 const sdp::SdpOptions& options = {});

/// Robustness lower bound from a phase-discrimination score:
/// max{0, p_succ / (k * p_max) - 1}.
double sdi_rmc_bound(double p_succ, double p_max, int k);

/// Replaces p_max by p_max (1 + d sqrt(1 - F_p^2)), capped at 1, to account
/// for phase devices that move incoherent states slightly.
double imperfection_corrected_pmax(double p_max, int d, double process_fidelity);

}  // namespace mlc
