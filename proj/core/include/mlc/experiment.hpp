#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mlc/linalg.hpp"
#include "mlc/phase.hpp"

namespace mlc {

/// Counts observed for one measurement setting. counts sum to shots.
struct CountRecord {
    int setting_id = 0;
    Povm povm;
    std::vector<std::int64_t> counts;
    std::int64_t shots = 0;
};

struct ConfidenceInterval {
    double point = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double sigma_level = 5.0;
};

/// Depolarizing noise plus a small seeded random unitary, tuned so the output
/// hits the requested fidelity-to-target and purity within 0.002.
/// Incompatible requests (purity above the target's, fidelity outside the
/// reachable bracket) are rejected.
DensityMatrix prepare_noisy(const DensityMatrix& target, double prep_fidelity, double purity,
                            std::uint64_t seed);

/// Multinomial draw with outcome probabilities Tr(M_m rho), clipped at zero
/// and renormalized. Reproducible per seed.
CountRecord simulate_counts(const DensityMatrix& rho, const Povm& povm, std::int64_t shots,
                            std::uint64_t seed, int setting_id = 0);

/// Real-valued variant of CountRecord used for exact-frequency likelihoods.
struct FrequencyRecord {
    Povm povm;
    std::vector<double> weights;
};

struct TomographyResult {
    DensityMatrix state;
    bool informationally_complete = true;
    bool converged = true;
    int iterations = 0;
    double log_likelihood = 0.0;
};

/// Diluted fixed-point likelihood ascent (R rho R). Likelihood never
/// decreases between iterations; stops when the gain drops below tol.
TomographyResult ml_tomography(std::span<const CountRecord> records, int dim, int max_iter = 5000,
                               double tol = 1e-10);
TomographyResult ml_tomography(std::span<const FrequencyRecord> records, int dim,
                               int max_iter = 5000, double tol = 1e-10);

/// Computational basis + both superposition bases for every index pair:
/// an informationally complete projective set of 1 + d(d-1) settings.
std::vector<Povm> pair_tomography_settings(int d);

using Estimator = std::function<double(const std::vector<CountRecord>&)>;

struct ResampleResult {
    ConfidenceInterval interval;
    int n_runs = 0;
    int failures = 0;
};

/// Monte-Carlo resampling: re-draws every record from its empirical
/// multinomial with counter-based per-run seeds, applies the estimator, and
/// returns point +- sigma_level * stddev. More than 1% failed runs aborts.
ResampleResult mc_resample(const std::vector<CountRecord>& records, const Estimator& estimator,
                           int n_runs, std::uint64_t seed, double sigma_level = 5.0);

enum class FigureId { kFig3, kFig4, kFig5, kFig6 };

FigureId figure_from_name(const std::string& name);

struct FigureConfig {
    int dim = 4;
    std::vector<double> p_grid;       // default {0, 0.1, ..., 1}
    std::int64_t shots = 100000;
    int mc_runs = 0;                  // 0: per-figure default (1e4 tomographic, 1e5 scalar)
    double sigma_level = 5.0;
    int n_observables = 30;           // fig5
    bool exact_observations = false;  // fig5: skip shot noise on expectation values
    double prep_fidelity = 1.0;       // 1.0 prepares the exact target
    double prep_purity = 1.0;
    double block_phase_jitter = 0.0;  // stddev (radians) of the |0,1> vs |2,3> phase wobble
    double process_fidelity = 0.9956; // fig6 imperfection-corrected series
};

struct FigureRow {
    std::string figure;
    std::string series;
    double x = 0.0;
    int k = 0;
    double theory = 0.0;
    double estimate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

std::vector<FigureRow> reproduce_figure(FigureId which, const FigureConfig& config,
                                        std::uint64_t seed);

/// CSV with header figure,series,x,k,theory,estimate,ci_lo,ci_hi.
void write_csv(std::ostream& out, std::span<const FigureRow> rows);

}  // namespace mlc
