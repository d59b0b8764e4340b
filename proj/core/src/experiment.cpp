#include "mlc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "mlc/random.hpp"
#include "mlc/robustness.hpp"
#include "mlc/states.hpp"

namespace mlc {

namespace {

Matrix small_unitary(const Matrix& generator, double eps) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(generator);
    Vector phases(es.eigenvalues().size());
    for (Index i = 0; i < phases.size(); ++i) {
        const double a = -eps * es.eigenvalues()(i);
        phases(i) = Complex(std::cos(a), std::sin(a));
    }
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

DensityMatrix depolarize_and_rotate(const DensityMatrix& target, double lambda, const Matrix& u) {
    const Index d = target.dim();
    Matrix rho = (1.0 - lambda) * (u * target.mat() * u.adjoint()) +
                 lambda / static_cast<double>(d) * Matrix::Identity(d, d);
    return DensityMatrix(0.5 * (rho + rho.adjoint().eval()));
}

}  // namespace

DensityMatrix prepare_noisy(const DensityMatrix& target, double prep_fidelity, double purity,
                            std::uint64_t seed) {
    if (!(prep_fidelity > 0.0) || prep_fidelity > 1.0) {
        throw ValidationError("prepare_noisy: fidelity must be in (0,1]");
    }
    if (!(purity > 0.0) || purity > 1.0) {
        throw ValidationError("prepare_noisy: purity must be in (0,1]");
    }
    const Index d = target.dim();
    const double target_purity = target.purity();
    const double floor_purity = 1.0 / static_cast<double>(d);
    if (purity > target_purity + 1e-9) {
        throw ValidationError("prepare_noisy: requested purity exceeds the target's");
    }
    if (purity < floor_purity - 1e-12) {
        throw ValidationError("prepare_noisy: purity below the maximally mixed floor 1/d");
    }

    // Unitary wobble leaves purity alone; depolarizing strength fixes it:
    // purity(lambda) = 1/d + (1-lambda)^2 (target_purity - 1/d).
    double lambda = 0.0;
    if (target_purity - floor_purity > 1e-15) {
        const double ratio = std::clamp(
            (purity - floor_purity) / (target_purity - floor_purity), 0.0, 1.0);
        lambda = 1.0 - std::sqrt(ratio);
    }

    std::mt19937_64 rng(seed);
    const Matrix generator = random_hermitian(static_cast<int>(d), rng);
    const double f_max = fidelity(depolarize_and_rotate(target, lambda, Matrix::Identity(d, d)),
                                  target);
    if (prep_fidelity > f_max + 2e-3) {
        throw ValidationError("prepare_noisy: fidelity unreachable at the requested purity");
    }
    if (prep_fidelity >= f_max) {
        return depolarize_and_rotate(target, lambda, Matrix::Identity(d, d));
    }

    // Grow the rotation until fidelity drops past the request, then bisect.
    double eps_hi = 1e-3;
    while (fidelity(depolarize_and_rotate(target, lambda, small_unitary(generator, eps_hi)),
                    target) > prep_fidelity) {
        eps_hi *= 2.0;
        if (eps_hi > 64.0) {
            throw ValidationError("prepare_noisy: fidelity unreachable by small rotations");
        }
    }
    double eps_lo = 0.0;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (eps_lo + eps_hi);
        const double f = fidelity(depolarize_and_rotate(target, lambda, small_unitary(generator, mid)),
                                  target);
        (f > prep_fidelity ? eps_lo : eps_hi) = mid;
    }
    return depolarize_and_rotate(target, lambda, small_unitary(generator, eps_hi));
}

CountRecord simulate_counts(const DensityMatrix& rho, const Povm& povm, std::int64_t shots,
                            std::uint64_t seed, int setting_id) {
    if (shots < 0) throw ValidationError("simulate_counts: shots must be >= 0");
    if (povm.dim() != rho.dim()) throw ValidationError("simulate_counts: dimension mismatch");
    std::vector<double> probs(povm.size());
    double total = 0.0;
    for (size_t m = 0; m < povm.size(); ++m) {
        probs[m] = std::max(0.0, (povm.elements()[m] * rho.mat()).trace().real());
        total += probs[m];
    }
    if (total <= 0.0) throw ValidationError("simulate_counts: degenerate outcome distribution");
    for (auto& p : probs) p /= total;

    std::mt19937_64 rng(seed);
    CountRecord rec{setting_id, povm, std::vector<std::int64_t>(povm.size(), 0), shots};
    std::int64_t remaining = shots;
    double mass = 1.0;
    for (size_t m = 0; m + 1 < probs.size() && remaining > 0; ++m) {
        const double q = std::clamp(probs[m] / mass, 0.0, 1.0);
        std::binomial_distribution<std::int64_t> bin(remaining, q);
        const std::int64_t n = bin(rng);
        rec.counts[m] = n;
        remaining -= n;
        mass = std::max(mass - probs[m], 1e-300);
    }
    rec.counts.back() = remaining;
    return rec;
}

std::vector<Povm> pair_tomography_settings(int d) {
    if (d < 2) throw ValidationError("pair_tomography_settings: d must be >= 2");
    std::vector<Povm> settings;
    std::vector<Matrix> comp;
    for (int i = 0; i < d; ++i) {
        Matrix e = Matrix::Zero(d, d);
        e(i, i) = 1.0;
        comp.push_back(std::move(e));
    }
    settings.emplace_back(comp);
    const Complex im(0.0, 1.0);
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            for (int phase = 0; phase < 2; ++phase) {
                std::vector<Matrix> elems;
                const Complex w = (phase == 0) ? Complex(1.0, 0.0) : im;
                Vector plus = Vector::Zero(d), minus = Vector::Zero(d);
                plus(i) = 1.0 / std::sqrt(2.0);
                plus(j) = w / std::sqrt(2.0);
                minus(i) = 1.0 / std::sqrt(2.0);
                minus(j) = -w / std::sqrt(2.0);
                elems.push_back(plus * plus.adjoint());
                elems.push_back(minus * minus.adjoint());
                for (int l = 0; l < d; ++l) {
                    if (l == i || l == j) continue;
                    elems.push_back(comp[static_cast<size_t>(l)]);
                }
                settings.emplace_back(std::move(elems));
            }
        }
    }
    return settings;
}

namespace {

std::vector<FrequencyRecord> to_frequency(std::span<const CountRecord> records) {
    std::vector<FrequencyRecord> out;
    out.reserve(records.size());
    for (const auto& rec : records) {
        if (rec.counts.size() != rec.povm.size()) {
            throw ValidationError("ml_tomography: counts/povm length mismatch");
        }
        const std::int64_t sum = std::accumulate(rec.counts.begin(), rec.counts.end(),
                                                 std::int64_t{0});
        if (sum != rec.shots) throw ValidationError("ml_tomography: counts do not sum to shots");
        FrequencyRecord f{rec.povm, {}};
        f.weights.assign(rec.counts.begin(), rec.counts.end());
        out.push_back(std::move(f));
    }
    return out;
}

bool informationally_complete(std::span<const FrequencyRecord> records, int d) {
    std::vector<Eigen::VectorXd> rows;
    for (const auto& rec : records) {
        for (const auto& m : rec.povm.elements()) {
            Eigen::VectorXd v(2 * d * d);
            Index t = 0;
            for (Index i = 0; i < d; ++i) {
                for (Index j = 0; j < d; ++j) {
                    v(t++) = m(i, j).real();
                    v(t++) = m(i, j).imag();
                }
            }
            rows.push_back(std::move(v));
        }
    }
    Eigen::MatrixXd span(static_cast<Index>(rows.size()), 2 * d * d);
    for (size_t r = 0; r < rows.size(); ++r) span.row(static_cast<Index>(r)) = rows[r];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(span);
    qr.setThreshold(1e-10);
    return qr.rank() >= d * d;
}

double log_likelihood(std::span<const FrequencyRecord> records, const Matrix& rho) {
    double ll = 0.0;
    for (const auto& rec : records) {
        for (size_t m = 0; m < rec.povm.size(); ++m) {
            if (rec.weights[m] <= 0.0) continue;
            const double p = std::max((rec.povm.elements()[m] * rho).trace().real(), 1e-300);
            ll += rec.weights[m] * std::log(p);
        }
    }
    return ll;
}

Matrix likelihood_operator(std::span<const FrequencyRecord> records, const Matrix& rho,
                           double total) {
    const Index d = rho.rows();
    Matrix r = Matrix::Zero(d, d);
    for (const auto& rec : records) {
        for (size_t m = 0; m < rec.povm.size(); ++m) {
            if (rec.weights[m] <= 0.0) continue;
            const double p = std::max((rec.povm.elements()[m] * rho).trace().real(), 1e-300);
            r += (rec.weights[m] / p) * rec.povm.elements()[m];
        }
    }
    return r / total;
}

}  // namespace

TomographyResult ml_tomography(std::span<const FrequencyRecord> records, int dim, int max_iter,
                               double tol) {
    if (dim < 1) throw ValidationError("ml_tomography: dim must be >= 1");
    if (records.empty()) throw ValidationError("ml_tomography: no data");
    double total = 0.0;
    for (const auto& rec : records) {
        if (rec.weights.size() != rec.povm.size()) {
            throw ValidationError("ml_tomography: weights/povm length mismatch");
        }
        if (rec.povm.dim() != dim) throw ValidationError("ml_tomography: dimension mismatch");
        for (double w : rec.weights) {
            if (w < 0.0 || !std::isfinite(w)) throw ValidationError("ml_tomography: bad weight");
            total += w;
        }
    }
    if (total <= 0.0) throw ValidationError("ml_tomography: empty counts");

    Matrix rho = Matrix::Identity(dim, dim) / static_cast<double>(dim);
    double ll = log_likelihood(records, rho);
    int iter = 0;
    bool converged = false;
    for (; iter < max_iter; ++iter) {
        const Matrix r = likelihood_operator(records, rho, total);
        // Full R*rho*R step, diluted whenever it would lower the likelihood.
        Matrix candidate;
        double cand_ll = 0.0;
        bool accepted = false;
        for (double step = 1.0; step >= 1e-4; step *= 0.5) {
            const Matrix g = Matrix::Identity(dim, dim) + step * (r - Matrix::Identity(dim, dim));
            candidate = g * rho * g.adjoint();
            candidate = 0.5 * (candidate + candidate.adjoint().eval());
            candidate /= candidate.trace().real();
            cand_ll = log_likelihood(records, candidate);
            if (cand_ll >= ll - 1e-12 * std::abs(ll)) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            converged = true;
            break;
        }
        const double gain = cand_ll - ll;
        rho = candidate;
        ll = cand_ll;
        if (gain < tol * (1.0 + std::abs(ll))) {
            converged = true;
            ++iter;
            break;
        }
    }

    TomographyResult result{DensityMatrix(rho), informationally_complete(records, dim), converged,
                            iter, ll};
    return result;
}

TomographyResult ml_tomography(std::span<const CountRecord> records, int dim, int max_iter,
                               double tol) {
    const auto freq = to_frequency(records);
    return ml_tomography(std::span<const FrequencyRecord>(freq), dim, max_iter, tol);
}

namespace {

/// Shared resampling core: one redraw per run feeds every estimator, so a
/// common expensive stage (tomography) is paid once per run.
using MultiEstimator = std::function<std::vector<double>(const std::vector<CountRecord>&)>;

std::vector<ResampleResult> mc_resample_multi(const std::vector<CountRecord>& records,
                                              const MultiEstimator& estimator, int n_outputs,
                                              int n_runs, std::uint64_t seed, double sigma_level) {
    if (n_runs < 2) throw ValidationError("mc_resample: need at least 2 runs");
    if (records.empty()) throw ValidationError("mc_resample: no records");

    const std::vector<double> points = estimator(records);
    std::vector<std::vector<double>> samples(static_cast<size_t>(n_outputs));
    int failures = 0;
    for (int run = 0; run < n_runs; ++run) {
        std::vector<CountRecord> redrawn;
        redrawn.reserve(records.size());
        for (size_t rec_idx = 0; rec_idx < records.size(); ++rec_idx) {
            const auto& rec = records[rec_idx];
            if (rec.shots <= 0) {
                redrawn.push_back(rec);
                continue;
            }
            std::vector<double> freq(rec.counts.size());
            for (size_t m = 0; m < rec.counts.size(); ++m) {
                freq[m] = static_cast<double>(rec.counts[m]) / static_cast<double>(rec.shots);
            }
            std::mt19937_64 rng(derive_seed(seed, rec_idx + 1, static_cast<std::uint64_t>(run)));
            CountRecord re = rec;
            std::int64_t remaining = rec.shots;
            double mass = 1.0;
            for (size_t m = 0; m + 1 < freq.size(); ++m) {
                const double q = std::clamp(freq[m] / mass, 0.0, 1.0);
                std::binomial_distribution<std::int64_t> bin(remaining, q);
                const std::int64_t n = (remaining > 0) ? bin(rng) : 0;
                re.counts[m] = n;
                remaining -= n;
                mass = std::max(mass - freq[m], 1e-300);
            }
            re.counts.back() = remaining;
            redrawn.push_back(std::move(re));
        }
        try {
            const std::vector<double> vals = estimator(redrawn);
            for (int i = 0; i < n_outputs; ++i) {
                samples[static_cast<size_t>(i)].push_back(vals[static_cast<size_t>(i)]);
            }
        } catch (const Error&) {
            ++failures;
        }
        if (failures > std::max(1, n_runs / 100)) {
            throw NumericalError("mc_resample: more than 1% of runs failed");
        }
    }

    std::vector<ResampleResult> out(static_cast<size_t>(n_outputs));
    for (int i = 0; i < n_outputs; ++i) {
        const auto& s = samples[static_cast<size_t>(i)];
        const double n = static_cast<double>(s.size());
        const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
        double var = 0.0;
        for (double v : s) var += (v - mean) * (v - mean);
        var /= std::max(1.0, n - 1.0);
        const double sd = std::sqrt(var);
        const double point = points[static_cast<size_t>(i)];
        out[static_cast<size_t>(i)] =
            ResampleResult{ConfidenceInterval{point, point - sigma_level * sd,
                                              point + sigma_level * sd, sigma_level},
                           n_runs, failures};
    }
    return out;
}

}  // namespace

ResampleResult mc_resample(const std::vector<CountRecord>& records, const Estimator& estimator,
                           int n_runs, std::uint64_t seed, double sigma_level) {
    MultiEstimator wrap = [&estimator](const std::vector<CountRecord>& recs) {
        return std::vector<double>{estimator(recs)};
    };
    return mc_resample_multi(records, wrap, 1, n_runs, seed, sigma_level).front();
}

FigureId figure_from_name(const std::string& name) {
    if (name == "fig3") return FigureId::kFig3;
    if (name == "fig4") return FigureId::kFig4;
    if (name == "fig5") return FigureId::kFig5;
    if (name == "fig6") return FigureId::kFig6;
    throw ValidationError("unknown figure '" + name + "' (expected fig3|fig4|fig5|fig6)");
}

namespace {

std::vector<double> default_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
    return g;
}

DensityMatrix prepare_state(const FigureConfig& cfg, const DensityMatrix& target,
                            std::uint64_t seed) {
    DensityMatrix rho = (cfg.prep_fidelity >= 1.0 && cfg.prep_purity >= 1.0)
                            ? target
                            : prepare_noisy(target, cfg.prep_fidelity,
                                            std::min(cfg.prep_purity, target.purity()), seed);
    if (cfg.block_phase_jitter > 0.0) {
        // Beam-steering style wobble: a relative phase between the |0,1> and
        // |2,3> blocks, normal with the configured spread.
        std::mt19937_64 rng(derive_seed(seed, 0xb10c, 0));
        std::normal_distribution<double> n01(0.0, cfg.block_phase_jitter);
        const double theta = n01(rng);
        const Index d = rho.dim();
        Vector diag = Vector::Ones(d);
        for (Index i = d / 2; i < d; ++i) diag(i) = Complex(std::cos(theta), std::sin(theta));
        Matrix u = diag.asDiagonal();
        rho = DensityMatrix(u * rho.mat() * u.adjoint());
    }
    return rho;
}

std::vector<FigureRow> figure3(const FigureConfig& cfg) {
    std::vector<FigureRow> rows;
    const int d = cfg.dim;
    const auto grid = cfg.p_grid.empty() ? default_grid() : cfg.p_grid;
    for (double p : grid) {
        const DensityMatrix rho = noisy_max_coherent({d, p});
        for (int k = 1; k < d; ++k) {
            const double exact = rmc_dual(rho, k).value;
            rows.push_back(FigureRow{"fig3", "exact", p, k, rmc_analytic_nmcs(d, k, p), exact,
                                     exact, exact});
        }
    }
    return rows;
}

std::vector<FigureRow> figure4(const FigureConfig& cfg, std::uint64_t seed) {
    std::vector<FigureRow> rows;
    const int d = cfg.dim;
    const int mc_runs = cfg.mc_runs > 0 ? cfg.mc_runs : 10000;
    const auto grid = cfg.p_grid.empty() ? default_grid() : cfg.p_grid;
    const auto settings = pair_tomography_settings(d);
    for (size_t pi = 0; pi < grid.size(); ++pi) {
        const double p = grid[pi];
        const DensityMatrix rho =
            prepare_state(cfg, noisy_max_coherent({d, p}), derive_seed(seed, 1, pi));
        std::vector<CountRecord> records;
        for (size_t s = 0; s < settings.size(); ++s) {
            records.push_back(simulate_counts(rho, settings[s], cfg.shots,
                                              derive_seed(seed, 100 + pi, s),
                                              static_cast<int>(s)));
        }
        // One tomography per run feeds all coherence levels.
        MultiEstimator est = [d](const std::vector<CountRecord>& recs) {
            const TomographyResult tomo = ml_tomography(recs, d, 2000, 1e-9);
            std::vector<double> vals;
            for (int k = 1; k < d; ++k) vals.push_back(rmc_dual(tomo.state, k).value);
            return vals;
        };
        const std::vector<ResampleResult> rs = mc_resample_multi(
            records, est, d - 1, mc_runs, derive_seed(seed, 200 + pi, 0), cfg.sigma_level);
        for (int k = 1; k < d; ++k) {
            const auto& r = rs[static_cast<size_t>(k - 1)];
            rows.push_back(FigureRow{"fig4", "tomography", p, k, rmc_analytic_nmcs(d, k, p),
                                     r.interval.point, r.interval.lo, r.interval.hi});
        }
    }
    return rows;
}

std::vector<FigureRow> figure5(const FigureConfig& cfg, std::uint64_t seed) {
    std::vector<FigureRow> rows;
    const int d = cfg.dim;
    const DensityMatrix rho = max_coherent(d).projector();

    std::vector<Observation> obs;
    for (int i = 0; i < cfg.n_observables; ++i) {
        std::mt19937_64 rng(derive_seed(seed, 5, static_cast<std::uint64_t>(i)));
        const Vector v = haar_state_vector(d, rng);
        HermitianMatrix proj(v * v.adjoint());
        const double exact = (proj.mat() * rho.mat()).trace().real();
        if (cfg.exact_observations) {
            obs.push_back(Observation{proj, exact, 0.0, 0.0});
        } else {
            std::binomial_distribution<std::int64_t> bin(cfg.shots, std::clamp(exact, 0.0, 1.0));
            const double est = static_cast<double>(bin(rng)) / static_cast<double>(cfg.shots);
            const double sig = std::sqrt(std::max(est * (1.0 - est), 1.0 / cfg.shots) / cfg.shots);
            obs.push_back(Observation{proj, est, cfg.sigma_level * sig, cfg.sigma_level * sig});
        }
    }

    for (int n = 0; n <= cfg.n_observables; ++n) {
        const std::span<const Observation> head(obs.data(), static_cast<size_t>(n));
        for (int k = 1; k < d; ++k) {
            const double theory = static_cast<double>(d) / k - 1.0;
            const double bound = rmc_from_observations_retry(head, k, d).value;
            rows.push_back(FigureRow{"fig5", "bound", static_cast<double>(n), k, theory, bound,
                                     bound, bound});
        }
    }
    return rows;
}

std::vector<FigureRow> figure6(const FigureConfig& cfg, std::uint64_t seed) {
    std::vector<FigureRow> rows;
    const int d = cfg.dim;
    const int mc_runs = cfg.mc_runs > 0 ? cfg.mc_runs : 100000;
    const auto grid = cfg.p_grid.empty() ? default_grid() : cfg.p_grid;
    const PhaseTask task = uniform_task(d);
    const Povm povm = uniform_optimal_povm(d);
    const double p_max = task.p_max();
    const double corrected = imperfection_corrected_pmax(p_max, d, cfg.process_fidelity);

    for (size_t pi = 0; pi < grid.size(); ++pi) {
        const double p = grid[pi];
        const DensityMatrix rho =
            prepare_state(cfg, noisy_max_coherent({d, p}), derive_seed(seed, 2, pi));
        // One record per imprinted phase: the measurement statistics of the
        // fixed POVM on U_m rho U_m^dagger, with shots split by the priors.
        std::vector<CountRecord> records;
        for (size_t m = 0; m < task.size(); ++m) {
            const auto& entry = task.entries()[m];
            const auto shots_m =
                static_cast<std::int64_t>(std::llround(entry.prior * static_cast<double>(cfg.shots)));
            records.push_back(simulate_counts(apply_phase(rho, entry.phase), povm,
                                              std::max<std::int64_t>(shots_m, 1),
                                              derive_seed(seed, 300 + pi, m), static_cast<int>(m)));
        }
        auto p_succ_hat = [&task](const std::vector<CountRecord>& recs) {
            double ps = 0.0;
            for (size_t m = 0; m < recs.size(); ++m) {
                ps += task.entries()[m].prior * static_cast<double>(recs[m].counts[m]) /
                      static_cast<double>(recs[m].shots);
            }
            return std::clamp(ps, 0.0, 1.0);
        };
        MultiEstimator est = [&](const std::vector<CountRecord>& recs) {
            const double ps = p_succ_hat(recs);
            std::vector<double> vals;
            for (int k = 1; k < d; ++k) vals.push_back(sdi_rmc_bound(ps, p_max, k));
            for (int k = 1; k < d; ++k) vals.push_back(sdi_rmc_bound(ps, corrected, k));
            return vals;
        };
        const std::vector<ResampleResult> rs = mc_resample_multi(
            records, est, 2 * (d - 1), mc_runs, derive_seed(seed, 400 + pi, 0), cfg.sigma_level);
        for (int k = 1; k < d; ++k) {
            const double theory = rmc_analytic_nmcs(d, k, p);
            const auto& a = rs[static_cast<size_t>(k - 1)];
            const auto& b = rs[static_cast<size_t>(d - 1 + k - 1)];
            rows.push_back(FigureRow{"fig6", "sdi", p, k, theory, a.interval.point, a.interval.lo,
                                     a.interval.hi});
            rows.push_back(FigureRow{"fig6", "sdi_corrected", p, k, theory, b.interval.point,
                                     b.interval.lo, b.interval.hi});
        }
    }
    return rows;
}

}  // namespace

std::vector<FigureRow> reproduce_figure(FigureId which, const FigureConfig& config,
                                        std::uint64_t seed) {
    switch (which) {
        case FigureId::kFig3: return figure3(config);
        case FigureId::kFig4: return figure4(config, seed);
        case FigureId::kFig5: return figure5(config, seed);
        case FigureId::kFig6: return figure6(config, seed);
    }
    throw ValidationError("reproduce_figure: unknown figure");
}

void write_csv(std::ostream& out, std::span<const FigureRow> rows) {
    out << "figure,series,x,k,theory,estimate,ci_lo,ci_hi\n";
    out.precision(17);
    for (const auto& r : rows) {
        out << r.figure << ',' << r.series << ',' << r.x << ',' << r.k << ',' << r.theory << ','
            << r.estimate << ',' << r.ci_lo << ',' << r.ci_hi << '\n';
    }
}

}  // namespace mlc
