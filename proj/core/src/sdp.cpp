#include "mlc/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "mlc/io.hpp"

namespace mlc::sdp {

const char* to_string(Status s) {
    switch (s) {
        case Status::kOptimal: return "OPTIMAL";
        case Status::kInfeasible: return "INFEASIBLE";
        case Status::kUnbounded: return "UNBOUNDED";
        case Status::kMaxIter: return "MAX_ITER";
    }
    return "MAX_ITER";
}

int SdpProblem::add_block(int dim) {
    if (dim < 1) throw ValidationError("SdpProblem: block dim must be >= 1");
    block_dims.push_back(dim);
    objective.emplace_back();
    return static_cast<int>(block_dims.size()) - 1;
}

void SdpProblem::set_objective(int block, Matrix c) {
    objective.at(static_cast<size_t>(block)) = std::move(c);
}

void SdpProblem::add_matrix_constraint(std::vector<MatrixTerm> terms, Relation rel, Matrix rhs) {
    matrix_constraints.push_back(MatrixConstraint{std::move(terms), rel, std::move(rhs)});
}

void SdpProblem::add_scalar_constraint(std::vector<ScalarTerm> terms, Relation rel, double rhs) {
    scalar_constraints.push_back(ScalarConstraint{std::move(terms), rel, rhs});
}

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

int svec_dim(int n) { return n * n; }

Eigen::VectorXd svec(const Matrix& h) {
    const int n = static_cast<int>(h.rows());
    Eigen::VectorXd v(svec_dim(n));
    int t = 0;
    for (int i = 0; i < n; ++i) v(t++) = h(i, i).real();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            v(t++) = kSqrt2 * h(i, j).real();
            v(t++) = kSqrt2 * h(i, j).imag();
        }
    }
    return v;
}

Matrix smat(const Eigen::Ref<const Eigen::VectorXd>& v, int n) {
    Matrix h(n, n);
    int t = 0;
    for (int i = 0; i < n; ++i) h(i, i) = Complex(v(t++), 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double re = v(t++) / kSqrt2;
            const double im = v(t++) / kSqrt2;
            h(i, j) = Complex(re, im);
            h(j, i) = Complex(re, -im);
        }
    }
    return h;
}

Matrix hermitize(const Matrix& a) { return 0.5 * (a + a.adjoint().eval()); }

double block_dot(const Matrix& a, const Matrix& b) {
    return (a.conjugate().cwiseProduct(b)).sum().real();
}

struct RowGroup {
    bool scalar = false;
    int constraint_index = 0;
    int first_row = 0;
    int rows = 0;
    int dim = 1;           // rhs dimension
    int slack_block = -1;  // -1 for equality constraints
    double slack_sign = 0.0;
};

struct StandardForm {
    std::vector<int> dims;  // user blocks, then slack blocks
    int n_user = 0;
    int m = 0;
    std::vector<Eigen::MatrixXd> A;  // per block: m x dim^2
    Eigen::VectorXd b;
    std::vector<Eigen::VectorXd> c;     // per block, sense-folded (minimize convention)
    std::vector<Matrix> c_mat;          // same, as matrices
    double sign = 1.0;                  // +1 minimize, -1 maximize
    double offset = 0.0;
    std::vector<RowGroup> groups;
    double norm_b = 0.0, norm_c = 0.0;
};

void require_hermitian(const Matrix& a, const char* what) {
    if (a.rows() != a.cols()) throw ValidationError(std::string(what) + ": not square");
    check_finite(a, what);
    if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
        throw ValidationError(std::string(what) + ": not Hermitian");
    }
}

StandardForm build_standard_form(const SdpProblem& p) {
    StandardForm f;
    if (p.block_dims.empty()) throw ValidationError("SdpProblem: no variable blocks");
    if (p.objective.size() != p.block_dims.size()) {
        throw ValidationError("SdpProblem: objective list does not match blocks");
    }
    f.dims = p.block_dims;
    f.n_user = static_cast<int>(p.block_dims.size());
    f.sign = (p.sense == Sense::kMinimize) ? 1.0 : -1.0;
    f.offset = p.offset;

    // Row layout: matrix constraints (dim^2 rows each), then scalar constraints.
    int m = 0;
    for (size_t i = 0; i < p.matrix_constraints.size(); ++i) {
        const auto& mc = p.matrix_constraints[i];
        require_hermitian(mc.rhs, "matrix constraint rhs");
        const int md = static_cast<int>(mc.rhs.rows());
        if (mc.terms.empty()) throw ValidationError("matrix constraint: no terms");
        RowGroup g;
        g.scalar = false;
        g.constraint_index = static_cast<int>(i);
        g.first_row = m;
        g.rows = svec_dim(md);
        g.dim = md;
        if (mc.rel != Relation::kEq) {
            g.slack_block = static_cast<int>(f.dims.size());
            g.slack_sign = (mc.rel == Relation::kGeq) ? -1.0 : 1.0;
            f.dims.push_back(md);
        }
        f.groups.push_back(g);
        m += g.rows;
    }
    for (size_t i = 0; i < p.scalar_constraints.size(); ++i) {
        const auto& sc = p.scalar_constraints[i];
        if (sc.terms.empty()) throw ValidationError("scalar constraint: no terms");
        if (!std::isfinite(sc.rhs)) throw ValidationError("scalar constraint: rhs not finite");
        RowGroup g;
        g.scalar = true;
        g.constraint_index = static_cast<int>(i);
        g.first_row = m;
        g.rows = 1;
        g.dim = 1;
        if (sc.rel != Relation::kEq) {
            g.slack_block = static_cast<int>(f.dims.size());
            g.slack_sign = (sc.rel == Relation::kGeq) ? -1.0 : 1.0;
            f.dims.push_back(1);
        }
        f.groups.push_back(g);
        m += 1;
    }
    f.m = m;

    f.A.resize(f.dims.size());
    for (size_t j = 0; j < f.dims.size(); ++j) {
        f.A[j] = Eigen::MatrixXd::Zero(m, svec_dim(f.dims[j]));
    }
    f.b = Eigen::VectorXd::Zero(m);

    for (const auto& g : f.groups) {
        if (!g.scalar) {
            const auto& mc = p.matrix_constraints[static_cast<size_t>(g.constraint_index)];
            const int md = g.dim;
            for (const auto& term : mc.terms) {
                if (term.block < 0 || term.block >= f.n_user) {
                    throw ValidationError("matrix term: block index out of range");
                }
                const int nb = f.dims[static_cast<size_t>(term.block)];
                Matrix ft;  // F^H, nb x md
                if (term.transfer.size() == 0) {
                    if (nb != md) {
                        throw ValidationError("matrix term: identity transfer needs equal dims");
                    }
                    ft = Matrix::Identity(nb, nb);
                } else {
                    if (term.transfer.rows() != md || term.transfer.cols() != nb) {
                        throw ValidationError("matrix term: transfer must be rhs_dim x block_dim");
                    }
                    check_finite(term.transfer, "matrix term transfer");
                    ft = term.transfer.adjoint();
                }
                auto& Ab = f.A[static_cast<size_t>(term.block)];
                // Adjoint of X -> coeff * F X F^H on the svec basis of the rhs space.
                int r = g.first_row;
                for (int i = 0; i < md; ++i, ++r) {
                    Matrix h = term.coeff * (ft.col(i) * ft.col(i).adjoint());
                    Ab.row(r) += svec(h).transpose();
                }
                for (int i = 0; i < md; ++i) {
                    for (int j = i + 1; j < md; ++j) {
                        Matrix re = term.coeff / kSqrt2 *
                                    (ft.col(i) * ft.col(j).adjoint() + ft.col(j) * ft.col(i).adjoint());
                        Ab.row(r++) += svec(re).transpose();
                        Matrix im = term.coeff / kSqrt2 *
                                    (Complex(0, 1) * ft.col(i) * ft.col(j).adjoint() -
                                     Complex(0, 1) * ft.col(j) * ft.col(i).adjoint());
                        Ab.row(r++) += svec(im).transpose();
                    }
                }
            }
            if (g.slack_block >= 0) {
                f.A[static_cast<size_t>(g.slack_block)]
                    .block(g.first_row, 0, g.rows, g.rows) =
                    g.slack_sign * Eigen::MatrixXd::Identity(g.rows, g.rows);
            }
            f.b.segment(g.first_row, g.rows) = svec(hermitize(mc.rhs));
        } else {
            const auto& sc = p.scalar_constraints[static_cast<size_t>(g.constraint_index)];
            for (const auto& term : sc.terms) {
                if (term.block < 0 || term.block >= f.n_user) {
                    throw ValidationError("scalar term: block index out of range");
                }
                require_hermitian(term.coeff, "scalar term coefficient");
                if (term.coeff.rows() != f.dims[static_cast<size_t>(term.block)]) {
                    throw ValidationError("scalar term: coefficient dim mismatch");
                }
                f.A[static_cast<size_t>(term.block)].row(g.first_row) +=
                    svec(hermitize(term.coeff)).transpose();
            }
            if (g.slack_block >= 0) {
                f.A[static_cast<size_t>(g.slack_block)](g.first_row, 0) = g.slack_sign;
            }
            f.b(g.first_row) = sc.rhs;
        }
    }

    f.c.resize(f.dims.size());
    f.c_mat.resize(f.dims.size());
    for (size_t j = 0; j < f.dims.size(); ++j) {
        const int n = f.dims[j];
        if (j < static_cast<size_t>(f.n_user) && p.objective[j].size() != 0) {
            require_hermitian(p.objective[j], "objective coefficient");
            if (p.objective[j].rows() != n) {
                throw ValidationError("objective coefficient dim mismatch");
            }
            f.c_mat[j] = f.sign * hermitize(p.objective[j]);
        } else {
            f.c_mat[j] = Matrix::Zero(n, n);
        }
        f.c[j] = svec(f.c_mat[j]);
    }

    f.norm_b = f.b.norm();
    double c2 = 0.0;
    for (const auto& cj : f.c) c2 += cj.squaredNorm();
    f.norm_c = std::sqrt(c2);
    return f;
}

// ---- interior-point machinery ----------------------------------------------

struct EigPair {
    RealVector lam;
    Matrix vec;
};

EigPair eig(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) throw SolverError("sdp: eigendecomposition failed");
    return EigPair{es.eigenvalues(), es.eigenvectors()};
}

Matrix apply_spectral(const EigPair& e, const std::function<double(double)>& fn) {
    RealVector lam = e.lam;
    for (Index i = 0; i < lam.size(); ++i) lam(i) = fn(lam(i));
    return e.vec * lam.asDiagonal() * e.vec.adjoint();
}

struct BlockScaling {
    Matrix W, Wh, Wih, Sinv;
    EigPair Veig;  // eigensystem of V = W^{-1/2} X W^{-1/2}
};

BlockScaling nt_scaling(const Matrix& X, const Matrix& S) {
    const double floor_x = std::max(1e-14 * X.trace().real(), 1e-300);
    EigPair ex = eig(X);
    Matrix Xh = apply_spectral(ex, [&](double l) { return std::sqrt(std::max(l, floor_x)); });
    EigPair et = eig(hermitize(Xh * S * Xh));
    const double floor_t = std::max(1e-16 * et.lam.maxCoeff(), 1e-300);
    Matrix Tmh = apply_spectral(et, [&](double l) { return 1.0 / std::sqrt(std::max(l, floor_t)); });
    BlockScaling sc;
    sc.W = hermitize(Xh * Tmh * Xh);
    EigPair ew = eig(sc.W);
    const double floor_w = std::max(1e-16 * ew.lam.maxCoeff(), 1e-300);
    sc.Wh = apply_spectral(ew, [&](double l) { return std::sqrt(std::max(l, floor_w)); });
    sc.Wih = apply_spectral(ew, [&](double l) { return 1.0 / std::sqrt(std::max(l, floor_w)); });
    EigPair es = eig(S);
    const double floor_s = std::max(1e-14 * es.lam.maxCoeff(), 1e-300);
    sc.Sinv = apply_spectral(es, [&](double l) { return 1.0 / std::max(l, floor_s); });
    sc.Veig = eig(hermitize(sc.Wih * X * sc.Wih));
    return sc;
}

/// Largest step a in [0, cap] keeping X + a*dX PSD.
double max_step(const Matrix& X, const Matrix& dX, double cap) {
    EigPair ex = eig(X);
    const double floor_x = std::max(1e-14 * ex.lam.maxCoeff(), 1e-300);
    Matrix Xih = apply_spectral(ex, [&](double l) { return 1.0 / std::sqrt(std::max(l, floor_x)); });
    const double lo = eig(hermitize(Xih * dX * Xih)).lam.minCoeff();
    if (lo >= -1e-16) return cap;
    return std::min(cap, -1.0 / lo);
}

struct Iterate {
    std::vector<Matrix> X, S;
    Eigen::VectorXd y;
    double tau = 1.0, kappa = 1.0;
};

struct Direction {
    std::vector<Matrix> dX, dS;
    Eigen::VectorXd dy;
    double dtau = 0.0, dkappa = 0.0;
};

struct Residuals {
    Eigen::VectorXd rp;  // A x - tau b
    std::vector<Matrix> rd;  // A'y + S - tau C, per block
    double rg = 0.0;         // c'x - b'y + kappa
    double pres = 0.0, dres = 0.0;
    double pobj = 0.0, dobj = 0.0;  // internal, scaled by 1/tau
    double compl_gap = 0.0;         // <x,s>/tau^2
    double mu = 0.0;
};

class HsdSolver {
  public:
    HsdSolver(const StandardForm& f, const SdpOptions& opt) : f_(f), opt_(opt) {
        nblocks_ = static_cast<int>(f_.dims.size());
        nu_ = 1.0;
        for (int n : f_.dims) nu_ += n;
    }

    void run() {
        init();
        best_score_ = std::numeric_limits<double>::infinity();
        for (iter_ = 0; iter_ < opt_.max_iter; ++iter_) {
            Residuals res = residuals();
            track_best(res);
            if (opt_.trace) {
                std::fprintf(stderr,
                             "it %3d  mu %.3e  pres %.3e  dres %.3e  pobj %+.9e  dobj %+.9e  "
                             "tau %.3e  kappa %.3e\n",
                             iter_, res.mu, res.pres, res.dres, res.pobj, res.dobj, it_.tau,
                             it_.kappa);
            }
            if (check_optimal(res)) { status_ = Status::kOptimal; return; }
            if (check_certificates(res)) return;
            if (res.mu < 1e-16 && !progressing_) break;

            std::vector<BlockScaling> sc(static_cast<size_t>(nblocks_));
            for (int j = 0; j < nblocks_; ++j) {
                sc[static_cast<size_t>(j)] =
                    nt_scaling(it_.X[static_cast<size_t>(j)], it_.S[static_cast<size_t>(j)]);
            }
            if (!factorize(sc)) break;

            // Predictor.
            Direction aff = newton(sc, res, 1.0, 0.0, nullptr, 0.0);
            const double a_aff = step_length(aff, 1.0);
            const double mu_aff = merit_after(aff, a_aff);
            double sigma = std::pow(mu_aff / res.mu, 3.0);
            sigma = std::clamp(sigma, 1e-8, 0.999);

            // Combined corrector step.
            std::vector<Matrix> corr = corrector(sc, aff);
            const double corr_tau = aff.dtau * aff.dkappa;
            Direction dir = newton(sc, res, 1.0 - sigma, sigma * res.mu, &corr, corr_tau);
            double alpha = 0.98 * step_length(dir, 1.0 / 0.98);
            if (alpha < 1e-3 * a_aff || !std::isfinite(alpha)) {
                // Corrector overshoots; retreat to a damped predictor-centering step.
                dir = newton(sc, res, 1.0 - sigma, sigma * res.mu, nullptr, 0.0);
                alpha = 0.98 * step_length(dir, 1.0 / 0.98);
            }
            alpha = std::min(alpha, 1.0);
            progressing_ = alpha > 1e-7;
            take_step(dir, alpha);
        }
        status_ = Status::kMaxIter;
        restore_best();
    }

    Status status() const { return status_; }
    const Iterate& iterate() const { return it_; }
    int iterations() const { return iter_; }
    const Eigen::VectorXd& cert_y() const { return it_.y; }

  private:
    void init() {
        it_.X.clear();
        it_.S.clear();
        for (int n : f_.dims) {
            it_.X.push_back(Matrix::Identity(n, n));
            it_.S.push_back(Matrix::Identity(n, n));
        }
        it_.y = Eigen::VectorXd::Zero(f_.m);
        it_.tau = 1.0;
        it_.kappa = 1.0;
        progressing_ = true;
    }

    Eigen::VectorXd A_mul(const std::vector<Matrix>& Xs) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(f_.m);
        for (int j = 0; j < nblocks_; ++j) {
            out.noalias() += f_.A[static_cast<size_t>(j)] * svec(Xs[static_cast<size_t>(j)]);
        }
        return out;
    }

    std::vector<Matrix> At_mul(const Eigen::VectorXd& y) const {
        std::vector<Matrix> out(static_cast<size_t>(nblocks_));
        for (int j = 0; j < nblocks_; ++j) {
            out[static_cast<size_t>(j)] =
                smat(f_.A[static_cast<size_t>(j)].transpose() * y, f_.dims[static_cast<size_t>(j)]);
        }
        return out;
    }

    double c_dot(const std::vector<Matrix>& Xs) const {
        double v = 0.0;
        for (int j = 0; j < nblocks_; ++j) {
            v += block_dot(f_.c_mat[static_cast<size_t>(j)], Xs[static_cast<size_t>(j)]);
        }
        return v;
    }

    double xs_dot(const std::vector<Matrix>& a, const std::vector<Matrix>& b) const {
        double v = 0.0;
        for (int j = 0; j < nblocks_; ++j) {
            v += block_dot(a[static_cast<size_t>(j)], b[static_cast<size_t>(j)]);
        }
        return v;
    }

    Residuals residuals() const {
        Residuals r;
        r.rp = A_mul(it_.X) - it_.tau * f_.b;
        std::vector<Matrix> aty = At_mul(it_.y);
        r.rd.resize(static_cast<size_t>(nblocks_));
        double dres2 = 0.0;
        for (int j = 0; j < nblocks_; ++j) {
            r.rd[static_cast<size_t>(j)] = aty[static_cast<size_t>(j)] +
                                           it_.S[static_cast<size_t>(j)] -
                                           it_.tau * f_.c_mat[static_cast<size_t>(j)];
            dres2 += svec(r.rd[static_cast<size_t>(j)]).squaredNorm();
        }
        const double cx = c_dot(it_.X);
        const double by = f_.b.dot(it_.y);
        r.rg = cx - by + it_.kappa;
        r.pobj = cx / it_.tau;
        r.dobj = by / it_.tau;
        r.pres = r.rp.norm() / (it_.tau * (1.0 + f_.norm_b));
        r.dres = std::sqrt(dres2) / (it_.tau * (1.0 + f_.norm_c));
        r.compl_gap = xs_dot(it_.X, it_.S) / (it_.tau * it_.tau);
        r.mu = (xs_dot(it_.X, it_.S) + it_.tau * it_.kappa) / nu_;
        return r;
    }

    bool check_optimal(const Residuals& r) const {
        const double ref = 1.0 + std::abs(r.pobj);
        return r.pres <= opt_.feas_tol && r.dres <= opt_.feas_tol &&
               std::abs(r.pobj - r.dobj) <= opt_.gap_tol * ref &&
               r.compl_gap <= 10.0 * opt_.gap_tol * ref;
    }

    bool check_certificates(const Residuals&) {
        const double by = f_.b.dot(it_.y);
        if (by > 1e-10) {
            double res2 = 0.0;
            std::vector<Matrix> aty = At_mul(it_.y);
            for (int j = 0; j < nblocks_; ++j) {
                res2 += svec(aty[static_cast<size_t>(j)] + it_.S[static_cast<size_t>(j)]).squaredNorm();
            }
            if (std::sqrt(res2) <= opt_.feas_tol * (1.0 + f_.norm_c) * by) {
                status_ = Status::kInfeasible;
                cert_scale_ = by;
                return true;
            }
        }
        const double cx = c_dot(it_.X);
        if (cx < -1e-10) {
            const double res = A_mul(it_.X).norm();
            if (res <= opt_.feas_tol * (1.0 + f_.norm_b) * (-cx)) {
                status_ = Status::kUnbounded;
                cert_scale_ = -cx;
                return true;
            }
        }
        return false;
    }

    bool factorize(const std::vector<BlockScaling>& sc) {
        // Q = A (W (x)_s W) A'; G_j holds the scaled rows of A_j.
        G_.resize(static_cast<size_t>(nblocks_));
        Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(f_.m, f_.m);
        for (int j = 0; j < nblocks_; ++j) {
            const int n = f_.dims[static_cast<size_t>(j)];
            const auto& Aj = f_.A[static_cast<size_t>(j)];
            Eigen::MatrixXd& Gj = G_[static_cast<size_t>(j)];
            Gj.resize(f_.m, svec_dim(n));
            const Matrix& W = sc[static_cast<size_t>(j)].W;
            for (int r = 0; r < f_.m; ++r) {
                if (Aj.row(r).isZero(0.0)) {
                    Gj.row(r).setZero();
                } else {
                    Gj.row(r) = svec(hermitize(W * smat(Aj.row(r), n) * W)).transpose();
                }
            }
            Q.noalias() += Gj * Aj.transpose();
        }
        Q = 0.5 * (Q + Q.transpose().eval());
        double ridge = 0.0;
        for (int attempt = 0; attempt < 8; ++attempt) {
            llt_.compute(Q + ridge * Eigen::MatrixXd::Identity(f_.m, f_.m));
            if (llt_.info() == Eigen::Success) {
                // Scaled objective pieces reused by every direction this iteration.
                Mc_.resize(static_cast<size_t>(nblocks_));
                Eigen::VectorXd AMc = Eigen::VectorXd::Zero(f_.m);
                cMc_ = 0.0;
                for (int j = 0; j < nblocks_; ++j) {
                    const Matrix& W = sc[static_cast<size_t>(j)].W;
                    Mc_[static_cast<size_t>(j)] =
                        hermitize(W * f_.c_mat[static_cast<size_t>(j)] * W);
                    AMc.noalias() +=
                        f_.A[static_cast<size_t>(j)] * svec(Mc_[static_cast<size_t>(j)]);
                    cMc_ += block_dot(f_.c_mat[static_cast<size_t>(j)], Mc_[static_cast<size_t>(j)]);
                }
                AMc_ = AMc;
                u1_ = (f_.m > 0) ? Eigen::VectorXd(llt_.solve(AMc_ + f_.b))
                                 : Eigen::VectorXd(0);
                return true;
            }
            ridge = (ridge == 0.0) ? 1e-12 * (1.0 + Q.trace() / std::max(1, f_.m)) : ridge * 100.0;
        }
        return false;
    }

    Direction newton(const std::vector<BlockScaling>& sc, const Residuals& res, double eta,
                     double sigma_mu, const std::vector<Matrix>* corr, double corr_tau) {
        // Per-block centrality target R_c = sigma*mu*S^{-1} - X - CORR.
        std::vector<Matrix> Rc(static_cast<size_t>(nblocks_));
        for (int j = 0; j < nblocks_; ++j) {
            const size_t js = static_cast<size_t>(j);
            Rc[js] = -it_.X[js];
            if (sigma_mu > 0.0) Rc[js] += sigma_mu * sc[js].Sinv;
            if (corr) Rc[js] -= (*corr)[js];
        }
        const double r5 = sigma_mu - it_.tau * it_.kappa - corr_tau;

        Eigen::VectorXd Arc = A_mul(Rc);
        std::vector<Matrix> Mrd(static_cast<size_t>(nblocks_));
        Eigen::VectorXd AMrd = Eigen::VectorXd::Zero(f_.m);
        double cMrd = 0.0, c_rc = 0.0;
        for (int j = 0; j < nblocks_; ++j) {
            const size_t js = static_cast<size_t>(j);
            Mrd[js] = hermitize(sc[js].W * res.rd[js] * sc[js].W);
            AMrd.noalias() += f_.A[js] * svec(Mrd[js]);
            cMrd += block_dot(f_.c_mat[js], Mrd[js]);
            c_rc += block_dot(f_.c_mat[js], Rc[js]);
        }

        const Eigen::VectorXd v = -eta * res.rp - Arc - eta * AMrd;
        const Eigen::VectorXd u2 = (f_.m > 0) ? Eigen::VectorXd(llt_.solve(v)) : Eigen::VectorXd(0);

        const double g1u1 = (f_.m > 0) ? AMc_.dot(u1_) : 0.0;
        const double bu1 = (f_.m > 0) ? f_.b.dot(u1_) : 0.0;
        const double den = g1u1 - cMc_ - bu1 - it_.kappa / it_.tau;
        const double eta_rg = -eta * (c_dot(it_.X) - f_.b.dot(it_.y) + it_.kappa);
        double numer = eta_rg - c_rc - eta * cMrd - r5 / it_.tau;
        if (f_.m > 0) numer += -AMc_.dot(u2) + f_.b.dot(u2);

        Direction d;
        d.dtau = numer / den;
        d.dy = (f_.m > 0) ? Eigen::VectorXd(d.dtau * u1_ + u2) : Eigen::VectorXd(0);
        std::vector<Matrix> aty = At_mul(d.dy);
        d.dS.resize(static_cast<size_t>(nblocks_));
        d.dX.resize(static_cast<size_t>(nblocks_));
        for (int j = 0; j < nblocks_; ++j) {
            const size_t js = static_cast<size_t>(j);
            d.dS[js] = hermitize(-eta * res.rd[js] - aty[js] + d.dtau * f_.c_mat[js]);
            d.dX[js] = hermitize(Rc[js] - sc[js].W * d.dS[js] * sc[js].W);
        }
        d.dkappa = (r5 - it_.kappa * d.dtau) / it_.tau;
        return d;
    }

    std::vector<Matrix> corrector(const std::vector<BlockScaling>& sc, const Direction& aff) const {
        std::vector<Matrix> corr(static_cast<size_t>(nblocks_));
        for (int j = 0; j < nblocks_; ++j) {
            const size_t js = static_cast<size_t>(j);
            const Matrix dxh = hermitize(sc[js].Wih * aff.dX[js] * sc[js].Wih);
            const Matrix dsh = hermitize(sc[js].Wh * aff.dS[js] * sc[js].Wh);
            const Matrix h = 0.5 * (dxh * dsh + dsh * dxh);
            // Solve V Y + Y V = 2 H in the eigenbasis of V.
            const auto& ev = sc[js].Veig;
            Matrix ht = ev.vec.adjoint() * h * ev.vec;
            for (Index a = 0; a < ht.rows(); ++a) {
                for (Index b = 0; b < ht.cols(); ++b) {
                    ht(a, b) *= 2.0 / std::max(ev.lam(a) + ev.lam(b), 1e-300);
                }
            }
            corr[js] = hermitize(sc[js].Wh * (ev.vec * ht * ev.vec.adjoint()) * sc[js].Wh);
        }
        return corr;
    }

    double step_length(const Direction& d, double cap) const {
        double a = cap;
        for (int j = 0; j < nblocks_; ++j) {
            const size_t js = static_cast<size_t>(j);
            a = max_step(it_.X[js], d.dX[js], a);
            a = max_step(it_.S[js], d.dS[js], a);
        }
        if (d.dtau < 0.0) a = std::min(a, -it_.tau / d.dtau);
        if (d.dkappa < 0.0) a = std::min(a, -it_.kappa / d.dkappa);
        return a;
    }

    double merit_after(const Direction& d, double a) const {
        double dot = 0.0;
        for (int j = 0; j < nblocks_; ++j) {
            const size_t js = static_cast<size_t>(j);
            dot += block_dot(it_.X[js] + a * d.dX[js], it_.S[js] + a * d.dS[js]);
        }
        dot += (it_.tau + a * d.dtau) * (it_.kappa + a * d.dkappa);
        return dot / nu_;
    }

    void take_step(const Direction& d, double a) {
        for (int j = 0; j < nblocks_; ++j) {
            const size_t js = static_cast<size_t>(j);
            it_.X[js] = hermitize(it_.X[js] + a * d.dX[js]);
            it_.S[js] = hermitize(it_.S[js] + a * d.dS[js]);
        }
        it_.y += a * d.dy;
        it_.tau += a * d.dtau;
        it_.kappa += a * d.dkappa;
    }

    void track_best(const Residuals& r) {
        const double score = std::max({r.pres, r.dres,
                                       std::abs(r.pobj - r.dobj) / (1.0 + std::abs(r.pobj))});
        if (score < best_score_) {
            best_score_ = score;
            best_ = it_;
        }
    }

    void restore_best() {
        if (std::isfinite(best_score_)) it_ = best_;
    }

    const StandardForm& f_;
    const SdpOptions& opt_;
    int nblocks_ = 0;
    double nu_ = 1.0;
    Iterate it_, best_;
    double best_score_ = std::numeric_limits<double>::infinity();
    bool progressing_ = true;
    int iter_ = 0;
    Status status_ = Status::kMaxIter;
    double cert_scale_ = 1.0;

    Eigen::LLT<Eigen::MatrixXd> llt_;
    std::vector<Eigen::MatrixXd> G_;
    std::vector<Matrix> Mc_;
    Eigen::VectorXd AMc_, u1_;
    double cMc_ = 0.0;
};

double matrix_constraint_violation(const MatrixConstraint& mc, const std::vector<Matrix>& blocks) {
    Matrix expr = Matrix::Zero(mc.rhs.rows(), mc.rhs.cols());
    for (const auto& term : mc.terms) {
        const Matrix& x = blocks[static_cast<size_t>(term.block)];
        if (term.transfer.size() == 0) {
            expr += term.coeff * x;
        } else {
            expr += term.coeff * (term.transfer * x * term.transfer.adjoint());
        }
    }
    const Matrix gap = hermitize(expr - mc.rhs);
    switch (mc.rel) {
        case Relation::kEq: return gap.norm() / (1.0 + mc.rhs.norm());
        case Relation::kGeq: return std::max(0.0, -min_eigenvalue(gap)) / (1.0 + mc.rhs.norm());
        case Relation::kLeq: return std::max(0.0, max_eigenvalue(gap)) / (1.0 + mc.rhs.norm());
    }
    return 0.0;
}

double scalar_constraint_violation(const ScalarConstraint& sc, const std::vector<Matrix>& blocks) {
    double expr = 0.0;
    for (const auto& term : sc.terms) {
        expr += block_dot(hermitize(term.coeff), blocks[static_cast<size_t>(term.block)]);
    }
    const double gap = expr - sc.rhs;
    const double scale = 1.0 + std::abs(sc.rhs);
    switch (sc.rel) {
        case Relation::kEq: return std::abs(gap) / scale;
        case Relation::kGeq: return std::max(0.0, -gap) / scale;
        case Relation::kLeq: return std::max(0.0, gap) / scale;
    }
    return 0.0;
}

double solution_feas_residual(const SdpProblem& p, const std::vector<Matrix>& blocks) {
    double worst = 0.0;
    for (const auto& x : blocks) worst = std::max(worst, -std::min(0.0, min_eigenvalue(x)));
    for (const auto& mc : p.matrix_constraints) {
        worst = std::max(worst, matrix_constraint_violation(mc, blocks));
    }
    for (const auto& sc : p.scalar_constraints) {
        worst = std::max(worst, scalar_constraint_violation(sc, blocks));
    }
    return worst;
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SdpOptions& options) {
    const StandardForm f = build_standard_form(problem);
    HsdSolver solver(f, options);
    solver.run();

    SdpSolution sol;
    sol.status = solver.status();
    sol.iterations = solver.iterations();
    const Iterate& it = solver.iterate();

    if (sol.status == Status::kInfeasible || sol.status == Status::kUnbounded) {
        // Values are undefined; expose the Farkas certificate through the dual
        // slots (infeasibility) or the blocks (unboundedness), scaled to unit size.
        sol.primal_value = sol.dual_value = 0.0;
        sol.gap = 0.0;
    }

    const double tau = std::max(it.tau, 1e-300);
    sol.blocks.resize(static_cast<size_t>(f.n_user));
    for (int j = 0; j < f.n_user; ++j) {
        sol.blocks[static_cast<size_t>(j)] = it.X[static_cast<size_t>(j)] / tau;
    }
    sol.matrix_duals.assign(problem.matrix_constraints.size(), Matrix());
    sol.scalar_duals.assign(problem.scalar_constraints.size(), 0.0);
    for (const auto& g : f.groups) {
        const Eigen::VectorXd seg = it.y.segment(g.first_row, g.rows) / tau;
        if (g.scalar) {
            sol.scalar_duals[static_cast<size_t>(g.constraint_index)] = seg(0);
        } else {
            sol.matrix_duals[static_cast<size_t>(g.constraint_index)] = smat(seg, g.dim);
        }
    }

    if (sol.status == Status::kOptimal || sol.status == Status::kMaxIter) {
        double cx = 0.0;
        for (int j = 0; j < f.n_user; ++j) {
            cx += block_dot(f.c_mat[static_cast<size_t>(j)], it.X[static_cast<size_t>(j)]);
        }
        const double by = f.b.dot(it.y);
        sol.primal_value = f.offset + f.sign * (cx / tau);
        sol.dual_value = f.offset + f.sign * (by / tau);
        sol.gap = std::abs(sol.primal_value - sol.dual_value);
        sol.feas_residual = solution_feas_residual(problem, sol.blocks);
    }
    return sol;
}

bool verify_solution(const SdpProblem& problem, const SdpSolution& solution, double tol) {
    if (solution.status != Status::kOptimal) {
        throw ValidationError("verify_solution: solution is not OPTIMAL");
    }
    const StandardForm f = build_standard_form(problem);
    if (solution.blocks.size() != static_cast<size_t>(f.n_user)) return false;
    for (int j = 0; j < f.n_user; ++j) {
        const Matrix& x = solution.blocks[static_cast<size_t>(j)];
        if (x.rows() != f.dims[static_cast<size_t>(j)] || !x.allFinite()) return false;
        if (min_eigenvalue(hermitize(x)) < -tol) return false;
    }
    if (solution_feas_residual(problem, solution.blocks) > tol) return false;

    // Recompute the primal value.
    double cx = 0.0;
    for (int j = 0; j < f.n_user; ++j) {
        cx += block_dot(f.c_mat[static_cast<size_t>(j)], solution.blocks[static_cast<size_t>(j)]);
    }
    const double pval = f.offset + f.sign * cx;
    if (std::abs(pval - solution.primal_value) > tol * (1.0 + std::abs(pval))) return false;

    // Reassemble the dual vector and recompute dual value and dual feasibility.
    if (solution.matrix_duals.size() != problem.matrix_constraints.size()) return false;
    if (solution.scalar_duals.size() != problem.scalar_constraints.size()) return false;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(f.m);
    for (const auto& g : f.groups) {
        if (g.scalar) {
            y(g.first_row) = solution.scalar_duals[static_cast<size_t>(g.constraint_index)];
        } else {
            const Matrix& lam = solution.matrix_duals[static_cast<size_t>(g.constraint_index)];
            if (lam.rows() != g.dim) return false;
            y.segment(g.first_row, g.rows) = svec(hermitize(lam));
        }
    }
    const double dval = f.offset + f.sign * f.b.dot(y);
    if (std::abs(dval - solution.dual_value) > tol * (1.0 + std::abs(dval))) return false;
    if (std::abs(pval - dval) > tol * (1.0 + std::abs(pval))) return false;

    // Dual slack c - A'y must be PSD on every cone block (slacks included:
    // that is exactly the sign condition on inequality multipliers).
    for (size_t j = 0; j < f.dims.size(); ++j) {
        const Eigen::VectorXd s = f.c[j] - f.A[j].transpose() * y;
        if (min_eigenvalue(smat(s, f.dims[j])) < -tol * (1.0 + f.norm_c)) return false;
    }
    return true;
}

nlohmann::json problem_to_json(const SdpProblem& p) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["sense"] = (p.sense == Sense::kMinimize) ? "minimize" : "maximize";
    j["offset"] = p.offset;
    j["blocks"] = p.block_dims;
    nlohmann::json obj = nlohmann::json::array();
    for (size_t i = 0; i < p.objective.size(); ++i) {
        if (p.objective[i].size() == 0) continue;
        obj.push_back({{"block", i}, {"matrix", matrix_to_json(p.objective[i])}});
    }
    j["objective"] = std::move(obj);
    auto rel_name = [](Relation r) {
        return r == Relation::kEq ? "eq" : (r == Relation::kGeq ? "geq" : "leq");
    };
    nlohmann::json mcs = nlohmann::json::array();
    for (const auto& mc : p.matrix_constraints) {
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& t : mc.terms) {
            nlohmann::json tj = {{"block", t.block}, {"coeff", t.coeff}};
            if (t.transfer.size() != 0) tj["transfer"] = matrix_to_json(t.transfer);
            terms.push_back(std::move(tj));
        }
        mcs.push_back({{"terms", std::move(terms)},
                       {"rel", rel_name(mc.rel)},
                       {"rhs", matrix_to_json(mc.rhs)}});
    }
    j["matrix_constraints"] = std::move(mcs);
    nlohmann::json scs = nlohmann::json::array();
    for (const auto& sc : p.scalar_constraints) {
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& t : sc.terms) {
            terms.push_back({{"block", t.block}, {"coeff", matrix_to_json(t.coeff)}});
        }
        scs.push_back({{"terms", std::move(terms)}, {"rel", rel_name(sc.rel)}, {"rhs", sc.rhs}});
    }
    j["scalar_constraints"] = std::move(scs);
    return j;
}

SdpProblem problem_from_json(const nlohmann::json& j) {
    SdpProblem p;
    p.sense = (j.at("sense").get<std::string>() == "maximize") ? Sense::kMaximize : Sense::kMinimize;
    p.offset = j.value("offset", 0.0);
    for (int d : j.at("blocks")) p.add_block(d);
    for (const auto& o : j.at("objective")) {
        p.set_objective(o.at("block").get<int>(), matrix_from_json(o.at("matrix")));
    }
    auto parse_rel = [](const std::string& s) {
        if (s == "eq") return Relation::kEq;
        if (s == "geq") return Relation::kGeq;
        if (s == "leq") return Relation::kLeq;
        throw ValidationError("sdp json: unknown relation '" + s + "'");
    };
    for (const auto& mc : j.at("matrix_constraints")) {
        std::vector<MatrixTerm> terms;
        for (const auto& t : mc.at("terms")) {
            MatrixTerm term;
            term.block = t.at("block").get<int>();
            term.coeff = t.at("coeff").get<double>();
            if (t.contains("transfer")) term.transfer = matrix_from_json(t.at("transfer"));
            terms.push_back(std::move(term));
        }
        p.add_matrix_constraint(std::move(terms), parse_rel(mc.at("rel").get<std::string>()),
                                matrix_from_json(mc.at("rhs")));
    }
    for (const auto& sc : j.at("scalar_constraints")) {
        std::vector<ScalarTerm> terms;
        for (const auto& t : sc.at("terms")) {
            terms.push_back(ScalarTerm{t.at("block").get<int>(), matrix_from_json(t.at("coeff"))});
        }
        p.add_scalar_constraint(std::move(terms), parse_rel(sc.at("rel").get<std::string>()),
                                sc.at("rhs").get<double>());
    }
    return p;
}

}  // namespace mlc::sdp
