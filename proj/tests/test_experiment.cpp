#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "mlc/experiment.hpp"
#include "mlc/robustness.hpp"
#include "mlc/states.hpp"
#include "testutil.hpp"

using namespace mlc;

TEST_CASE("prepare_noisy") {
    const DensityMatrix target = max_coherent(4).projector();
    SUBCASE("perfect request returns the target exactly") {
        const DensityMatrix out = prepare_noisy(target, 1.0, 1.0, 7);
        CHECK((out.mat() - target.mat()).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("paper-level noise figures") {
        const DensityMatrix out = prepare_noisy(target, 0.997, 0.995, 7);
        const double f = fidelity(out, target);
        CHECK(f >= 0.995);
        CHECK(f <= 0.999);
        CHECK(out.purity() == doctest::Approx(0.995).epsilon(2e-3));
    }
    SUBCASE("deterministic per seed") {
        const DensityMatrix a = prepare_noisy(target, 0.99, 0.99, 42);
        const DensityMatrix b = prepare_noisy(target, 0.99, 0.99, 42);
        CHECK((a.mat() - b.mat()).cwiseAbs().maxCoeff() == 0.0);
        const DensityMatrix c = prepare_noisy(target, 0.99, 0.99, 43);
        CHECK((a.mat() - c.mat()).cwiseAbs().maxCoeff() > 0.0);
    }
    SUBCASE("incompatible combinations rejected") {
        CHECK_THROWS_AS(prepare_noisy(target, 1.0, 0.5, 7), ValidationError);   // F=1 needs purity 1
        CHECK_THROWS_AS(prepare_noisy(target, 0.2, 0.995, 7), ValidationError); // F too low at this purity
        const DensityMatrix mixed(Matrix::Identity(4, 4) / 4.0);
        CHECK_THROWS_AS(prepare_noisy(mixed, 0.99, 0.9, 7), ValidationError);   // purity above target's
    }
}

TEST_CASE("simulate_counts") {
    const int d = 2;
    Matrix e0 = Matrix::Zero(d, d), e1 = Matrix::Zero(d, d);
    e0(0, 0) = 1.0;
    e1(1, 1) = 1.0;
    const Povm comp(std::vector<Matrix>{e0, e1});

    SUBCASE("zero shots") {
        const CountRecord rec = simulate_counts(DensityMatrix(e0), comp, 0, 5);
        CHECK(rec.counts[0] == 0);
        CHECK(rec.counts[1] == 0);
    }
    SUBCASE("pure basis state lands every shot on its outcome") {
        const CountRecord rec = simulate_counts(DensityMatrix(e0), comp, 10000, 5);
        CHECK(rec.counts[0] == 10000);
        CHECK(rec.counts[1] == 0);
    }
    SUBCASE("balanced state within 5 sigma of half") {
        const CountRecord rec =
            simulate_counts(DensityMatrix(Matrix::Identity(2, 2) / 2.0), comp, 100000, 5);
        const double sigma = std::sqrt(100000 * 0.25);
        CHECK(std::abs(static_cast<double>(rec.counts[0]) - 50000.0) <= 5.0 * sigma);
        CHECK(rec.counts[0] + rec.counts[1] == 100000);
    }
    SUBCASE("reproducible per seed") {
        const DensityMatrix rho(Matrix::Identity(2, 2) / 2.0);
        const CountRecord a = simulate_counts(rho, comp, 1000, 11);
        const CountRecord b = simulate_counts(rho, comp, 1000, 11);
        CHECK(a.counts == b.counts);
    }
    SUBCASE("empirical distribution converges in total variation") {
        std::mt19937_64 rng(127);
        const DensityMatrix rho = testutil::random_state(4, rng);
        const auto settings = pair_tomography_settings(4);
        const Povm& povm = settings[3];
        const CountRecord rec = simulate_counts(rho, povm, 100000, 13);
        double tv = 0.0;
        for (size_t m = 0; m < povm.size(); ++m) {
            const double p = std::max(0.0, (povm.elements()[m] * rho.mat()).trace().real());
            tv += 0.5 * std::abs(p - static_cast<double>(rec.counts[m]) / 100000.0);
        }
        CHECK(tv < 0.01);
    }
}

TEST_CASE("pair tomography settings are informationally complete projective POVMs") {
    for (int d : {2, 3, 4}) {
        const auto settings = pair_tomography_settings(d);
        CHECK(static_cast<int>(settings.size()) == 1 + d * (d - 1));
        for (const auto& s : settings) CHECK(static_cast<Index>(s.dim()) == d);
    }
}

TEST_CASE("ml_tomography") {
    const int d = 4;
    const auto settings = pair_tomography_settings(d);
    SUBCASE("exact frequencies recover the state") {
        const DensityMatrix rho = noisy_max_coherent({d, 0.5});
        std::vector<FrequencyRecord> recs;
        for (const auto& s : settings) {
            FrequencyRecord f{s, {}};
            for (const auto& m : s.elements()) {
                f.weights.push_back(std::max(0.0, (m * rho.mat()).trace().real()));
            }
            recs.push_back(std::move(f));
        }
        const TomographyResult tomo = ml_tomography(recs, d, 20000, 1e-14);
        CHECK(tomo.informationally_complete);
        CHECK(trace_distance(tomo.state, rho) <= 1e-6);
    }
    SUBCASE("robustness of the reconstruction matches the true state") {
        const DensityMatrix rho = noisy_max_coherent({d, 0.887});
        std::vector<FrequencyRecord> recs;
        for (const auto& s : settings) {
            FrequencyRecord f{s, {}};
            for (const auto& m : s.elements()) {
                f.weights.push_back(std::max(0.0, (m * rho.mat()).trace().real()));
            }
            recs.push_back(std::move(f));
        }
        const TomographyResult tomo = ml_tomography(recs, d, 20000, 1e-14);
        for (int k : {1, 2, 3}) {
            CHECK(std::abs(rmc_dual(tomo.state, k).value - rmc_dual(rho, k).value) <= 1e-4);
        }
    }
    SUBCASE("shot-limited reconstruction is close at 1e5 shots") {
        const DensityMatrix rho = noisy_max_coherent({d, 0.887});
        std::vector<CountRecord> recs;
        for (size_t s = 0; s < settings.size(); ++s) {
            recs.push_back(simulate_counts(rho, settings[s], 100000, 1000 + s,
                                           static_cast<int>(s)));
        }
        const TomographyResult tomo = ml_tomography(recs, d);
        CHECK(fidelity(tomo.state, rho) >= 0.99);
    }
    SUBCASE("single setting flagged incomplete") {
        const DensityMatrix rho = noisy_max_coherent({d, 0.3});
        std::vector<CountRecord> recs{simulate_counts(rho, settings[0], 1000, 3)};
        const TomographyResult tomo = ml_tomography(recs, d);
        CHECK_FALSE(tomo.informationally_complete);
    }
}

TEST_CASE("mc_resample") {
    const int d = 2;
    Matrix e0 = Matrix::Zero(d, d), e1 = Matrix::Zero(d, d);
    e0(0, 0) = 1.0;
    e1(1, 1) = 1.0;
    const Povm comp(std::vector<Matrix>{e0, e1});
    const DensityMatrix rho(Matrix::Identity(2, 2) / 2.0);
    std::vector<CountRecord> recs{simulate_counts(rho, comp, 100000, 17)};

    SUBCASE("constant estimator collapses the interval") {
        const auto r = mc_resample(recs, [](const auto&) { return 1.5; }, 100, 3);
        CHECK(r.interval.lo == r.interval.point);
        CHECK(r.interval.hi == r.interval.point);
    }
    SUBCASE("frequency estimator: interval width scales like 1/sqrt(shots)") {
        const Estimator freq = [](const std::vector<CountRecord>& rs) {
            return static_cast<double>(rs[0].counts[0]) / static_cast<double>(rs[0].shots);
        };
        const auto narrow = mc_resample(recs, freq, 400, 5);
        std::vector<CountRecord> quarter{simulate_counts(rho, comp, 25000, 17)};
        const auto wide = mc_resample(quarter, freq, 400, 5);
        const double ratio = (wide.interval.hi - wide.interval.lo) /
                             (narrow.interval.hi - narrow.interval.lo);
        CHECK(ratio == doctest::Approx(2.0).epsilon(0.3));
    }
    SUBCASE("persistent failures abort") {
        int call = 0;
        const Estimator flaky = [&call](const std::vector<CountRecord>&) -> double {
            if (++call > 1) throw NumericalError("boom");
            return 0.0;
        };
        CHECK_THROWS_AS(mc_resample(recs, flaky, 100, 3), NumericalError);
    }
    SUBCASE("coverage of the true value at 2 sigma") {
        // Conservative stand-in for the 5-sigma claim, sized for test runtime.
        const Estimator freq = [](const std::vector<CountRecord>& rs) {
            return static_cast<double>(rs[0].counts[0]) / static_cast<double>(rs[0].shots);
        };
        int covered = 0;
        const int reps = 200;
        for (int rep = 0; rep < reps; ++rep) {
            std::vector<CountRecord> data{
                simulate_counts(rho, comp, 20000, derive_seed(99, 1, rep))};
            const auto r = mc_resample(data, freq, 200, derive_seed(99, 2, rep), 2.0);
            if (r.interval.lo <= 0.5 && 0.5 <= r.interval.hi) ++covered;
        }
        CHECK(static_cast<double>(covered) / reps >= 0.90);
    }
}

TEST_CASE("figure tables") {
    SUBCASE("fig3 theory columns match the closed form") {
        FigureConfig cfg;
        cfg.p_grid = {0.0, 0.5, 1.0};
        const auto rows = reproduce_figure(FigureId::kFig3, cfg, 1);
        CHECK(rows.size() == 9);
        for (const auto& r : rows) {
            CHECK(r.theory == doctest::Approx(rmc_analytic_nmcs(4, r.k, r.x)).epsilon(1e-12));
            CHECK(r.estimate == doctest::Approx(r.theory).epsilon(1e-5).scale(1.0));
        }
    }
    SUBCASE("fig5 bound starts at zero and is non-decreasing on exact data") {
        FigureConfig cfg;
        cfg.n_observables = 8;
        cfg.exact_observations = true;
        const auto rows = reproduce_figure(FigureId::kFig5, cfg, 2);
        double prev = -1.0;
        for (const auto& r : rows) {
            if (r.k != 2) continue;
            if (r.x == 0.0) CHECK(r.estimate <= 1e-7);
            CHECK(r.estimate >= prev - 1e-6);
            prev = r.estimate;
        }
    }
    SUBCASE("fig6 intervals cover theory on a small run") {
        FigureConfig cfg;
        cfg.p_grid = {0.0, 0.6, 1.0};
        cfg.shots = 20000;
        cfg.mc_runs = 400;
        const auto rows = reproduce_figure(FigureId::kFig6, cfg, 3);
        int ok = 0, total = 0;
        for (const auto& r : rows) {
            if (r.series != "sdi") continue;
            ++total;
            // The sdi bound equals the robustness for this family; the sampled
            // interval has to cover the theory value.
            if (r.ci_lo - 1e-9 <= r.theory && r.theory <= r.ci_hi + 1e-9) ++ok;
        }
        CHECK(total == 9);
        CHECK(ok >= 8);
        for (const auto& r : rows) {
            if (r.series == "sdi_corrected") CHECK(r.estimate <= r.theory + 1e-6);
        }
    }
    SUBCASE("csv writer emits one record per row") {
        FigureConfig cfg;
        cfg.p_grid = {0.0, 1.0};
        const auto rows = reproduce_figure(FigureId::kFig3, cfg, 1);
        std::ostringstream out;
        write_csv(out, rows);
        std::istringstream in(out.str());
        std::string line;
        int n = 0;
        while (std::getline(in, line)) ++n;
        CHECK(n == static_cast<int>(rows.size()) + 1);
        CHECK(out.str().rfind("figure,series,x,k,theory,estimate,ci_lo,ci_hi\n", 0) == 0);
    }
}

TEST_CASE("figure reproduction is deterministic per seed") {
    FigureConfig cfg;
    cfg.p_grid = {0.5};
    cfg.shots = 2000;
    cfg.mc_runs = 50;
    const auto a = reproduce_figure(FigureId::kFig6, cfg, 77);
    const auto b = reproduce_figure(FigureId::kFig6, cfg, 77);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].estimate == b[i].estimate);
        CHECK(a[i].ci_lo == b[i].ci_lo);
    }
}
