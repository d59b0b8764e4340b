#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "mlc/linalg.hpp"

namespace mlc::sdp {

enum class Sense { kMinimize, kMaximize };
enum class Status { kOptimal, kInfeasible, kUnbounded, kMaxIter };

const char* to_string(Status s);

enum class Relation { kEq, kGeq, kLeq };

/// One summand of a matrix-valued affine expression:
///   coeff * F * X_block * F^H
/// An empty transfer means F = identity (the block itself).
struct MatrixTerm {
    int block = 0;
    double coeff = 1.0;
    Matrix transfer;
};

/// sum of terms  REL  rhs, with rhs Hermitian.
struct MatrixConstraint {
    std::vector<MatrixTerm> terms;
    Relation rel = Relation::kEq;
    Matrix rhs;
};

/// One summand of a scalar affine expression: Tr(coeff * X_block), coeff Hermitian.
struct ScalarTerm {
    int block = 0;
    Matrix coeff;
};

struct ScalarConstraint {
    std::vector<ScalarTerm> terms;
    Relation rel = Relation::kEq;
    double rhs = 0.0;
};

/// Conic program over Hermitian PSD variable blocks:
///   min/max  sum_j Tr(C_j X_j) + offset
///   s.t.     matrix and scalar affine constraints,  X_j >= 0.
struct SdpProblem {
    Sense sense = Sense::kMinimize;
    double offset = 0.0;
    std::vector<int> block_dims;
    std::vector<Matrix> objective;  // per block; empty matrix = zero coefficient
    std::vector<MatrixConstraint> matrix_constraints;
    std::vector<ScalarConstraint> scalar_constraints;

    int add_block(int dim);
    void set_objective(int block, Matrix c);
    void add_matrix_constraint(std::vector<MatrixTerm> terms, Relation rel, Matrix rhs);
    void add_scalar_constraint(std::vector<ScalarTerm> terms, Relation rel, double rhs);
};

struct SdpOptions {
    double gap_tol = 1e-7;
    double feas_tol = 1e-7;
    int max_iter = 500;
    bool trace = false;  // per-iteration diagnostics on stderr
};

/// Multipliers are reported in the minimize convention: for a minimize problem
/// the dual objective is offset + sum_i <rhs_i, Lambda_i> + sum_l rhs_l * lambda_l,
/// and C_j - (adjoint of the constraint maps at the multipliers) is PSD on every
/// block. For a maximize problem the same data certifies the negated objective.
struct SdpSolution {
    Status status = Status::kMaxIter;
    double primal_value = 0.0;
    double dual_value = 0.0;
    double gap = 0.0;            // |primal - dual|
    double feas_residual = 0.0;  // worst violation over blocks and constraints
    int iterations = 0;
    std::vector<Matrix> blocks;        // optimal X_j (scaled back by tau)
    std::vector<Matrix> matrix_duals;  // one Hermitian multiplier per matrix constraint
    std::vector<double> scalar_duals;  // one per scalar constraint
};

/// Homogeneous self-dual interior-point solve. Deterministic: identity-based
/// initialization, no randomization. MAX_ITER returns the best iterate found
/// together with its honest residuals.
SdpSolution solve(const SdpProblem& problem, const SdpOptions& options = {});

/// Recomputes every feasibility residual, both objective values, and the gap
/// from the problem data and the solution alone.
bool verify_solution(const SdpProblem& problem, const SdpSolution& solution, double tol);

nlohmann::json problem_to_json(const SdpProblem& problem);
SdpProblem problem_from_json(const nlohmann::json& j);

}  // namespace mlc::sdp
