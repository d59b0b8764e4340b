#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mlc/states.hpp"
#include "testutil.hpp"

using namespace mlc;

TEST_CASE("max_coherent") {
    CHECK(max_coherent(1).amplitudes()(0) == Complex(1.0, 0.0));
    const PureState psi2 = max_coherent(2);
    CHECK(psi2.amplitudes()(0).real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(coherence_rank(max_coherent(4)) == 4);
    CHECK_THROWS_AS(max_coherent(0), ValidationError);
}

TEST_CASE("noisy_max_coherent") {
    SUBCASE("p=0 is maximally mixed") {
        const DensityMatrix rho = noisy_max_coherent({4, 0.0});
        CHECK((rho.mat() - Matrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff() <= 1e-15);
    }
    SUBCASE("p=1 is the maximally coherent projector") {
        const DensityMatrix rho = noisy_max_coherent({4, 1.0});
        CHECK((rho.mat() - max_coherent(4).projector().mat()).cwiseAbs().maxCoeff() <= 1e-15);
    }
    SUBCASE("p=1/2: diagonal 1/4, off-diagonal 1/8") {
        const DensityMatrix rho = noisy_max_coherent({4, 0.5});
        CHECK(rho.mat()(0, 0).real() == doctest::Approx(0.25));
        CHECK(rho.mat()(0, 3).real() == doctest::Approx(0.125));
    }
    SUBCASE("purity matches (1 + p^2 (d-1))/d") {
        for (int d = 2; d <= 6; ++d) {
            for (double p : {0.0, 0.3, 0.7, 1.0}) {
                const DensityMatrix rho = noisy_max_coherent({d, p});
                CHECK(rho.purity() == doctest::Approx((1.0 + p * p * (d - 1)) / d).epsilon(1e-12));
            }
        }
    }
    CHECK_THROWS_AS(noisy_max_coherent({4, 1.5}), ValidationError);
    CHECK_THROWS_AS(noisy_max_coherent({4, -0.1}), ValidationError);
}

TEST_CASE("coherence_rank") {
    Vector e0 = Vector::Zero(3);
    e0(0) = 1.0;
    CHECK(coherence_rank(PureState(e0)) == 1);

    SUBCASE("near-classical state keeps full rank") {
        const int d = 4;
        const double eps = 0.01;
        Vector c(d);
        c(0) = std::sqrt(1.0 - eps);
        for (int i = 1; i < d; ++i) c(i) = std::sqrt(eps / (d - 1));
        CHECK(coherence_rank(PureState(c), 1e-8) == 4);
    }
    SUBCASE("superposition of d-1 basis elements") {
        Vector c = Vector::Zero(4);
        for (int i = 1; i < 4; ++i) c(i) = 1.0 / std::sqrt(3.0);
        CHECK(coherence_rank(PureState(c)) == 3);
    }
    SUBCASE("amp_tol decides borderline amplitudes") {
        Vector c(2);
        c(0) = std::sqrt(1.0 - 1e-12);
        c(1) = 1e-6;
        CHECK(coherence_rank(PureState(c), 1e-8) == 2);
        CHECK(coherence_rank(PureState(c), 1e-5) == 1);
    }
}

TEST_CASE("dephase_full") {
    std::mt19937_64 rng(51);
    const DensityMatrix rho = testutil::random_state(4, rng);
    const DensityMatrix diag = dephase_full(rho);
    for (Index i = 0; i < 4; ++i) {
        for (Index j = 0; j < 4; ++j) {
            if (i == j) {
                CHECK(diag.mat()(i, i).real() == doctest::Approx(rho.mat()(i, i).real()));
            } else {
                CHECK(std::abs(diag.mat()(i, j)) == 0.0);
            }
        }
    }
    SUBCASE("noisy MCS dephases to I/d for every p") {
        for (double p : {0.0, 0.4, 1.0}) {
            const DensityMatrix nm = dephase_full(noisy_max_coherent({4, p}));
            CHECK((nm.mat() - Matrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff() <= 1e-15);
        }
    }
    SUBCASE("psi_2^+ dephases to I/2") {
        const DensityMatrix nm = dephase_full(max_coherent(2).projector());
        CHECK((nm.mat() - Matrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() <= 1e-15);
    }
}

TEST_CASE("dephase_k endpoints and the Delta_2 example") {
    std::mt19937_64 rng(53);
    const DensityMatrix rho = testutil::random_state(4, rng);
    CHECK((dephase_k(rho, 4).mat() - rho.mat()).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((dephase_k(rho, 1).mat() - dephase_full(rho).mat()).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK_THROWS_AS(dephase_k(rho, 0), ValidationError);
    CHECK_THROWS_AS(dephase_k(rho, 5), ValidationError);

    const DensityMatrix out = dephase_k(max_coherent(4).projector(), 2);
    const DensityMatrix expect = noisy_max_coherent({4, 1.0 / 3.0});
    CHECK((out.mat() - expect.mat()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("dephase_k agrees with the projector-average form") {
    std::mt19937_64 rng(55);
    for (int d = 2; d <= 6; ++d) {
        for (int k = 1; k <= d; ++k) {
            for (int t = 0; t < 100; ++t) {
                const DensityMatrix rho = testutil::random_state(d, rng);
                const DensityMatrix fast = dephase_k(rho, k);
                const DensityMatrix oracle = testutil::dephase_k_projector_oracle(rho, k);
                CHECK((fast.mat() - oracle.mat()).cwiseAbs().maxCoeff() <= 1e-12);
            }
        }
    }
}

TEST_CASE("dephase_k preserves trace and positivity") {
    std::mt19937_64 rng(57);
    for (int d = 2; d <= 5; ++d) {
        for (int k = 1; k <= d; ++k) {
            for (int t = 0; t < 20; ++t) {
                const DensityMatrix rho = testutil::random_state(d, rng);
                const DensityMatrix out = dephase_k(rho, k);  // ctor revalidates
                CHECK(out.mat().trace().real() == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(min_eigenvalue(out.mat()) >= -1e-12);
            }
        }
    }
}
