#include "mlc/phase.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mlc/states.hpp"

namespace mlc {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

PhaseTask::PhaseTask(std::vector<PhaseEntry> entries, int dim)
    : entries_(std::move(entries)), dim_(dim) {
    if (dim_ < 1) throw ValidationError("PhaseTask: dim must be >= 1");
    if (entries_.empty()) throw ValidationError("PhaseTask: empty task");
    double total = 0.0;
    for (auto& e : entries_) {
        if (!(e.prior >= 0.0)) throw ValidationError("PhaseTask: negative prior");
        total += e.prior;
        e.phase = std::fmod(e.phase, kTwoPi);
        if (e.phase < 0.0) e.phase += kTwoPi;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw ValidationError("PhaseTask: priors sum to " + std::to_string(total));
    }
}

double PhaseTask::p_max() const {
    double m = 0.0;
    for (const auto& e : entries_) m = std::max(m, e.prior);
    return m;
}

PhaseTask uniform_task(int d) {
    if (d < 1) throw ValidationError("uniform_task: d must be >= 1");
    std::vector<PhaseEntry> entries;
    entries.reserve(static_cast<size_t>(d));
    for (int m = 1; m <= d; ++m) {
        entries.push_back(PhaseEntry{1.0 / d, kTwoPi * m / d});
    }
    return PhaseTask(std::move(entries), d);
}

Povm::Povm(std::vector<Matrix> elements) : elements_(std::move(elements)) {
    if (elements_.empty()) throw ValidationError("Povm: no elements");
    const Index d = elements_.front().rows();
    Matrix sum = Matrix::Zero(d, d);
    for (auto& m : elements_) {
        if (m.rows() != d || m.cols() != d) throw ValidationError("Povm: element dim mismatch");
        check_finite(m, "Povm element");
        if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
            throw ValidationError("Povm: element not Hermitian");
        }
        m = 0.5 * (m + m.adjoint().eval());
        if (min_eigenvalue(m) < -1e-10) throw ValidationError("Povm: element not PSD");
        sum += m;
    }
    if ((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10) {
        throw ValidationError("Povm: elements do not sum to identity");
    }
}

Povm uniform_optimal_povm(int d) {
    const PhaseTask task = uniform_task(d);
    const DensityMatrix plus = max_coherent(d).projector();
    std::vector<Matrix> elements;
    elements.reserve(static_cast<size_t>(d));
    for (const auto& e : task.entries()) {
        elements.push_back(apply_phase(plus, e.phase).mat());
    }
    return Povm(std::move(elements));
}

DensityMatrix apply_phase(const DensityMatrix& rho, double phi) {
    const Index d = rho.dim();
    Matrix out(d, d);
    for (Index j = 0; j < d; ++j) {
        for (Index l = 0; l < d; ++l) {
            const double arg = -static_cast<double>(j - l) * phi;
            out(j, l) = rho.mat()(j, l) * Complex(std::cos(arg), std::sin(arg));
        }
    }
    return DensityMatrix(std::move(out));
}

double success_probability(const DensityMatrix& rho, const PhaseTask& task, const Povm& povm) {
    if (povm.size() != task.size()) {
        throw ValidationError("success_probability: measurement/task length mismatch");
    }
    if (povm.dim() != rho.dim() || task.dim() != rho.dim()) {
        throw ValidationError("success_probability: dimension mismatch");
    }
    double p = 0.0;
    for (size_t m = 0; m < task.size(); ++m) {
        const auto& e = task.entries()[m];
        p += e.prior * (apply_phase(rho, e.phase).mat() * povm.elements()[m]).trace().real();
    }
    return std::clamp(p, 0.0, 1.0);
}

double optimal_guess_probability(std::span<const std::pair<double, DensityMatrix>> ensemble,
                                 const sdp::SdpOptions& options) {
    if (ensemble.empty()) throw ValidationError("optimal_guess_probability: empty ensemble");
    const Index d = ensemble.front().second.dim();
    double total = 0.0;
    for (const auto& [prior, state] : ensemble) {
        if (prior < 0.0) throw ValidationError("optimal_guess_probability: negative prior");
        if (state.dim() != d) throw ValidationError("optimal_guess_probability: dim mismatch");
        total += prior;
    }
    if (std::abs(total - 1.0) > 1e-10) {
        throw ValidationError("optimal_guess_probability: priors sum to " + std::to_string(total));
    }

    // min{p : rho_AB <= p I_A (x) sigma_B}. The classical-quantum rho_AB is
    // block diagonal, so with X = p sigma the program is
    //   min Tr X  s.t.  X >= p_m rho_m for every m.
    sdp::SdpProblem prob;
    prob.sense = sdp::Sense::kMinimize;
    const int x = prob.add_block(static_cast<int>(d));
    prob.set_objective(x, Matrix::Identity(d, d));
    for (const auto& [prior, state] : ensemble) {
        prob.add_matrix_constraint({sdp::MatrixTerm{x, 1.0, {}}}, sdp::Relation::kGeq,
                                   prior * state.mat());
    }
    sdp::SdpSolution sol = sdp::solve(prob, options);
    if (sol.status != sdp::Status::kOptimal) {
        throw SolverError("optimal_guess_probability: solver returned " +
                          std::string(sdp::to_string(sol.status)));
    }
    return sol.primal_value;
}

double sdi_rmc_bound(double p_succ, double p_max, int k) {
    if (k < 1) throw ValidationError("sdi_rmc_bound: k must be >= 1");
    if (!(p_max > 0.0) || p_max > 1.0) throw ValidationError("sdi_rmc_bound: p_max must be in (0,1]");
    if (p_succ < 0.0 || p_succ > 1.0) throw ValidationError("sdi_rmc_bound: p_succ must be in [0,1]");
    return std::max(0.0, p_succ / (k * p_max) - 1.0);
}

double imperfection_corrected_pmax(double p_max, int d, double process_fidelity) {
    if (!(process_fidelity > 0.0) || process_fidelity > 1.0) {
        throw ValidationError("imperfection_corrected_pmax: process fidelity must be in (0,1]");
    }
    if (d < 1) throw ValidationError("imperfection_corrected_pmax: d must be >= 1");
    const double eps = std::sqrt(std::max(0.0, 1.0 - process_fidelity * process_fidelity));
    return std::min(1.0, p_max * (1.0 + d * eps));
}

}  // namespace mlc
