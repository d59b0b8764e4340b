#include "mlc/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mlc/subsets.hpp"

namespace mlc {

namespace {

/// d x k injection sending the k x k block onto rows/columns `subset`.
Matrix embedding(int d, const std::vector<int>& subset) {
    Matrix e = Matrix::Zero(d, static_cast<Index>(subset.size()));
    for (size_t t = 0; t < subset.size(); ++t) {
        e(subset[t], static_cast<Index>(t)) = 1.0;
    }
    return e;
}

/// Accepts OPTIMAL, or a MAX_ITER iterate whose residuals are still usable.
void expect_usable(const sdp::SdpSolution& sol, const char* context) {
    if (sol.status == sdp::Status::kOptimal) return;
    if (sol.status == sdp::Status::kInfeasible) {
        throw InfeasibleError(std::string(context) + ": constraints admit no state");
    }
    if (sol.status == sdp::Status::kUnbounded) {
        throw SolverError(std::string(context) + ": program unbounded");
    }
    const double ref = 1.0 + std::abs(sol.primal_value);
    if (sol.feas_residual > 1e-6 || sol.gap > 1e-5 * ref) {
        throw SolverError(std::string(context) + ": solver stopped at MAX_ITER with gap " +
                          std::to_string(sol.gap) + " and residual " +
                          std::to_string(sol.feas_residual));
    }
}

double clamp_value(double v, const char* context) {
    if (v < -1e-5) throw SolverError(std::string(context) + ": negative robustness value");
    return std::max(v, 0.0);
}

}  // namespace

RmcResult rmc_primal(const DensityMatrix& rho, int k, const sdp::SdpOptions& options) {
    const int d = static_cast<int>(rho.dim());
    if (k < 1 || k > d) throw ValidationError("rmc_primal: k out of range");
    const auto subsets = index_subsets(d, k);

    sdp::SdpProblem prob;
    prob.sense = sdp::Sense::kMinimize;
    prob.offset = -1.0;
    std::vector<sdp::MatrixTerm> cover;
    for (const auto& subset : subsets) {
        const int blk = prob.add_block(k);
        prob.set_objective(blk, Matrix::Identity(k, k));
        cover.push_back(sdp::MatrixTerm{blk, 1.0, embedding(d, subset)});
    }
    prob.add_matrix_constraint(std::move(cover), sdp::Relation::kGeq, rho.mat());

    sdp::SdpSolution sol = sdp::solve(prob, options);
    expect_usable(sol, "rmc_primal");

    RmcResult result;
    result.k = k;
    result.value = clamp_value(sol.primal_value, "rmc_primal");
    result.gap = sol.gap;
    result.decomposition.reserve(subsets.size());
    for (size_t i = 0; i < subsets.size(); ++i) {
        result.decomposition.push_back(RmcComponent{subsets[i], sol.blocks[i]});
    }
    return result;
}

RmcResult rmc_dual(const DensityMatrix& rho, int k, const sdp::SdpOptions& options) {
    const int d = static_cast<int>(rho.dim());
    if (k < 1 || k > d) throw ValidationError("rmc_dual: k out of range");
    const auto subsets = index_subsets(d, k);

    // Substitute Z = I - W, Z >= 0: the witness constraints P_I W P_I >= 0
    // become Z[I,I] <= I_k, and -Tr(rho W) = Tr(rho Z) - 1.
    sdp::SdpProblem prob;
    prob.sense = sdp::Sense::kMaximize;
    prob.offset = -1.0;
    const int z = prob.add_block(d);
    prob.set_objective(z, rho.mat());
    for (const auto& subset : subsets) {
        const int y = prob.add_block(k);
        prob.add_matrix_constraint(
            {sdp::MatrixTerm{y, 1.0, {}}, sdp::MatrixTerm{z, 1.0, embedding(d, subset).adjoint()}},
            sdp::Relation::kEq, Matrix::Identity(k, k));
    }

    sdp::SdpSolution sol = sdp::solve(prob, options);
    expect_usable(sol, "rmc_dual");

    Matrix w = Matrix::Identity(d, d) - sol.blocks[0];
    const double lam_max = max_eigenvalue(0.5 * (w + w.adjoint().eval()));
    bool normalized = lam_max <= 1.0 + 1e-6;
    if (lam_max > 1.0) {
        // Roundoff can push the optimum just past W <= I; rescaling keeps the
        // witness valid and only weakens the reported bound.
        w /= lam_max;
        normalized = true;
    }
    Witness witness{k, HermitianMatrix(w, 1e-8), normalized};
    if (!validate_witness(witness.matrix, k, 1e-6)) {
        throw SolverError("rmc_dual: returned witness fails dual-cone validation");
    }

    RmcResult result;
    result.k = k;
    result.value = clamp_value(sol.primal_value, "rmc_dual");
    result.gap = sol.gap;
    result.witness = std::move(witness);
    return result;
}

double rmc_analytic_nmcs(int d, int k, double p) {
    if (d < 2) throw ValidationError("rmc_analytic_nmcs: d must be >= 2");
    if (k < 1 || k > d) throw ValidationError("rmc_analytic_nmcs: k out of range");
    if (p < 0.0 || p > 1.0) throw ValidationError("rmc_analytic_nmcs: p must lie in [0,1]");
    return std::max((p * (d - 1) - (k - 1)) / static_cast<double>(k), 0.0);
}

int coherence_number(const DensityMatrix& rho, double tol) {
    const int d = static_cast<int>(rho.dim());
    for (int k = 1; k < d; ++k) {
        if (rmc_dual(rho, k).value <= tol) return k;
    }
    return d;
}

namespace {

void validate_observation(const Observation& o, int dim) {
    if (o.observable.dim() != dim) {
        throw ValidationError("observation: observable dim mismatch");
    }
    if (o.err_lo < 0.0 || o.err_hi < 0.0) {
        throw ValidationError("observation: uncertainties must be >= 0");
    }
    const Spectrum s = eig_hermitian(o.observable);
    if (o.value < s.eigenvalues(0) - o.err_lo - 1e-9 ||
        o.value > s.eigenvalues(dim - 1) + o.err_hi + 1e-9) {
        throw ValidationError("observation: value outside the observable's range");
    }
}

}  // namespace

double rmc_from_observations(std::span<const Observation> obs, int k, int dim,
                             const sdp::SdpOptions& options) {
    if (dim < 1) throw ValidationError("rmc_from_observations: dim must be >= 1");
    if (k < 1 || k > dim) throw ValidationError("rmc_from_observations: k out of range");
    for (const auto& o : obs) validate_observation(o, dim);
    const auto subsets = index_subsets(dim, k);

    sdp::SdpProblem prob;
    prob.sense = sdp::Sense::kMinimize;
    prob.offset = -1.0;
    const int tau = prob.add_block(dim);
    std::vector<sdp::MatrixTerm> cover{sdp::MatrixTerm{tau, -1.0, {}}};
    for (const auto& subset : subsets) {
        const int blk = prob.add_block(k);
        prob.set_objective(blk, Matrix::Identity(k, k));
        cover.push_back(sdp::MatrixTerm{blk, 1.0, embedding(dim, subset)});
    }
    prob.add_matrix_constraint(std::move(cover), sdp::Relation::kGeq, Matrix::Zero(dim, dim));
    prob.add_scalar_constraint({sdp::ScalarTerm{tau, Matrix::Identity(dim, dim)}},
                               sdp::Relation::kEq, 1.0);
    for (const auto& o : obs) {
        if (o.err_lo == 0.0 && o.err_hi == 0.0) {
            prob.add_scalar_constraint({sdp::ScalarTerm{tau, o.observable.mat()}},
                                       sdp::Relation::kEq, o.value);
        } else {
            prob.add_scalar_constraint({sdp::ScalarTerm{tau, o.observable.mat()}},
                                       sdp::Relation::kLeq, o.value + o.err_hi);
            prob.add_scalar_constraint({sdp::ScalarTerm{tau, o.observable.mat()}},
                                       sdp::Relation::kGeq, o.value - o.err_lo);
        }
    }

    sdp::SdpSolution sol = sdp::solve(prob, options);
    expect_usable(sol, "rmc_from_observations");
    return clamp_value(sol.primal_value, "rmc_from_observations");
}

ObservationBound rmc_from_observations_retry(std::span<const Observation> obs, int k, int dim,
                                             const sdp::SdpOptions& options) {
    try {
        return ObservationBound{rmc_from_observations(obs, k, dim, options), false};
    } catch (const InfeasibleError&) {
        std::vector<Observation> widened(obs.begin(), obs.end());
        for (auto& o : widened) {
            o.err_lo *= 1.5;
            o.err_hi *= 1.5;
        }
        return ObservationBound{rmc_from_observations(widened, k, dim, options), true};
    }
}

}  // namespace mlc
