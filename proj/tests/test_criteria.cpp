#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mlc/criteria.hpp"
#include "mlc/states.hpp"
#include "testutil.hpp"

using namespace mlc;

TEST_CASE("comparison criterion on the Fig 1b pair") {
    SUBCASE("diagonal states are members") {
        Matrix diag = Matrix::Zero(4, 4);
        diag.diagonal() << 0.4, 0.3, 0.2, 0.1;
        const auto v = certify_c2_comparison(DensityMatrix(diag));
        CHECK(v.verdict == Verdict::kCertifiedMember);
        CHECK(v.margin >= 0.0);
    }
    SUBCASE("upper state: member with zero margin") {
        const auto v = certify_c2_comparison(testutil::fig1b_upper());
        CHECK(v.verdict == Verdict::kCertifiedMember);
        CHECK(v.margin == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("lower state: nonmember") {
        const auto v = certify_c2_comparison(testutil::fig1b_lower());
        CHECK(v.verdict == Verdict::kCertifiedNonmember);
        CHECK(v.margin < -1e-3);
    }
}

TEST_CASE("qutrit classification") {
    CHECK(classify_qutrit(DensityMatrix(Matrix::Identity(3, 3) / 3.0)) == 1);
    CHECK(classify_qutrit(testutil::fig1b_upper()) == 2);
    CHECK(classify_qutrit(testutil::fig1b_lower()) == 3);
    CHECK_THROWS_AS(classify_qutrit(DensityMatrix(Matrix::Identity(4, 4) / 4.0)), ValidationError);
}

TEST_CASE("purity ball") {
    SUBCASE("maximally mixed is inside at d=4") {
        const auto v = purity_ball_check(DensityMatrix(Matrix::Identity(4, 4) / 4.0));
        CHECK(v.verdict == Verdict::kCertifiedMember);
        CHECK(v.margin == doctest::Approx(1.0 / 3.0 - 0.25));
    }
    SUBCASE("boundary state (I - |0><0|)/3 has zero margin") {
        Matrix m = Matrix::Identity(4, 4) / 3.0;
        m(0, 0) = 0.0;
        const auto v = purity_ball_check(DensityMatrix(m));
        CHECK(v.verdict == Verdict::kCertifiedMember);
        CHECK(v.margin == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("maximally coherent state is inconclusive") {
        const auto v = purity_ball_check(max_coherent(4).projector());
        CHECK(v.verdict == Verdict::kInconclusive);
        CHECK(v.margin < 0.0);
    }
}

TEST_CASE("sufficient condition for C_k") {
    SUBCASE("maximally mixed state, k=2, d=4") {
        const auto v = sufficient_ck_check(DensityMatrix(Matrix::Identity(4, 4) / 4.0), 2);
        CHECK(v.verdict == Verdict::kCertifiedMember);
    }
    SUBCASE("noisy MCS threshold p <= (k-1)/(d-1)") {
        for (int k : {2, 3}) {
            const double thr = (k - 1) / 3.0;
            for (double p : {0.0, 0.2, 0.5, 0.8, 1.0}) {
                const auto v = sufficient_ck_check(noisy_max_coherent({4, p}), k);
                if (p <= thr + 1e-12) {
                    CHECK(v.verdict == Verdict::kCertifiedMember);
                } else {
                    CHECK(v.verdict == Verdict::kInconclusive);
                }
            }
        }
    }
    SUBCASE("pure maximally coherent state at k=3 is inconclusive") {
        const auto v = sufficient_ck_check(max_coherent(4).projector(), 3);
        CHECK(v.verdict == Verdict::kInconclusive);
    }
    SUBCASE("k=1 is exact: nondiagonal states are certified nonmembers") {
        const auto v = sufficient_ck_check(noisy_max_coherent({4, 0.5}), 1);
        CHECK(v.verdict == Verdict::kCertifiedNonmember);
        Matrix diag = Matrix::Zero(3, 3);
        diag.diagonal() << 0.2, 0.3, 0.5;
        CHECK(sufficient_ck_check(DensityMatrix(diag), 1).verdict == Verdict::kCertifiedMember);
    }
    CHECK_THROWS_AS(sufficient_ck_check(max_coherent(3).projector(), 4), ValidationError);
}

TEST_CASE("purity ball implies comparison membership") {
    std::mt19937_64 rng(61);
    for (int d = 3; d <= 5; ++d) {
        for (int t = 0; t < 40; ++t) {
            const DensityMatrix rho =
                testutil::shrink_to_purity(testutil::random_state(d, rng), 1.0 / (d - 1));
            REQUIRE(purity_ball_check(rho).verdict == Verdict::kCertifiedMember);
            CHECK(certify_c2_comparison(rho).verdict == Verdict::kCertifiedMember);
        }
    }
}
