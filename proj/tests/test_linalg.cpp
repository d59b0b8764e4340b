#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mlc/criteria.hpp"
#include "mlc/linalg.hpp"
#include "testutil.hpp"

using namespace mlc;

TEST_CASE("eig_hermitian basics") {
    HermitianMatrix id3(Matrix::Identity(3, 3));
    Spectrum s = eig_hermitian(id3);
    for (int i = 0; i < 3; ++i) CHECK(s.eigenvalues(i) == doctest::Approx(1.0));

    Matrix flip(2, 2);
    flip << 0, 1, 1, 0;
    Spectrum f = eig_hermitian(HermitianMatrix(flip));
    CHECK(f.eigenvalues(0) == doctest::Approx(-1.0));
    CHECK(f.eigenvalues(1) == doctest::Approx(1.0));
}

TEST_CASE("eig reconstruction residual on random Hermitian") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 2 + static_cast<int>(trial % 5);
        HermitianMatrix a(random_hermitian(d, rng));
        Spectrum s = eig_hermitian(a);
        const Matrix rec = s.eigenvectors * s.eigenvalues.cast<Complex>().asDiagonal() *
                           s.eigenvectors.adjoint();
        const double scale = std::max(1.0, a.mat().norm());
        CHECK((a.mat() - rec).norm() <= kEigResidualTol * scale);
        CHECK((s.eigenvectors.adjoint() * s.eigenvectors - Matrix::Identity(d, d)).norm() <= 1e-10);
        for (int i = 1; i < d; ++i) CHECK(s.eigenvalues(i) >= s.eigenvalues(i - 1));
    }
}

TEST_CASE("eig_hermitian deterministic") {
    std::mt19937_64 rng(3);
    HermitianMatrix a(random_hermitian(6, rng));
    Spectrum s1 = eig_hermitian(a);
    Spectrum s2 = eig_hermitian(a);
    CHECK((s1.eigenvectors - s2.eigenvectors).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s1.eigenvalues - s2.eigenvalues).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("non-Hermitian input rejected") {
    Matrix bad(2, 2);
    bad << 1, Complex(0, 1), Complex(0, 1), 1;  // conj-symmetry broken
    CHECK_THROWS_AS(HermitianMatrix{bad}, ValidationError);
    Matrix nan2 = Matrix::Identity(2, 2);
    nan2(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(HermitianMatrix{nan2}, ValidationError);
}

TEST_CASE("is_psd") {
    CHECK(is_psd(HermitianMatrix(Matrix::Identity(4, 4)), 0.0));
    Matrix m(2, 2);
    m << 1, 2, 2, 1;  // eigenvalues {-1, 3}
    CHECK_FALSE(is_psd(HermitianMatrix(m), 1e-9));
    CHECK_THROWS_AS(is_psd(HermitianMatrix(Matrix::Identity(2, 2)), -1.0), ValidationError);
}

TEST_CASE("comparison matrix") {
    SUBCASE("diagonal state is its own comparison matrix") {
        Matrix diag = Matrix::Zero(3, 3);
        diag.diagonal() << 0.5, 0.3, 0.2;
        HermitianMatrix m = comparison_matrix(HermitianMatrix(diag));
        CHECK((m.mat() - diag).norm() == doctest::Approx(0.0));
    }
    SUBCASE("two-level maximally coherent state") {
        const DensityMatrix psi2 = max_coherent(2).projector();
        HermitianMatrix m = comparison_matrix(psi2.hermitian());
        CHECK(m.mat()(0, 0).real() == doctest::Approx(0.5));
        CHECK(m.mat()(0, 1).real() == doctest::Approx(-0.5));
        Spectrum s = eig_hermitian(m);
        CHECK(s.eigenvalues(0) == doctest::Approx(0.0));
        CHECK(s.eigenvalues(1) == doctest::Approx(1.0));
    }
    SUBCASE("Fig 1b lower state: det M = -7/864, hence not PSD") {
        HermitianMatrix m = comparison_matrix(testutil::fig1b_lower().hermitian());
        CHECK(m.mat().determinant().real() == doctest::Approx(-7.0 / 864.0).epsilon(1e-12));
        CHECK_FALSE(is_psd(m, 1e-9));
    }
    SUBCASE("idempotent up to sign pattern and moment-preserving") {
        std::mt19937_64 rng(5);
        for (int t = 0; t < 30; ++t) {
            const DensityMatrix rho = testutil::random_state(4, rng);
            const HermitianMatrix m = comparison_matrix(rho.hermitian());
            const HermitianMatrix mm = comparison_matrix(m);
            CHECK((mm.mat().cwiseAbs() - m.mat().cwiseAbs()).cwiseAbs().maxCoeff() <= 1e-14);
            CHECK(m.mat().trace().real() == doctest::Approx(rho.mat().trace().real()));
            CHECK((m.mat() * m.mat()).trace().real() == doctest::Approx(rho.purity()));
        }
    }
}

TEST_CASE("principal submatrix") {
    std::mt19937_64 rng(7);
    HermitianMatrix a(random_hermitian(4, rng));
    SUBCASE("full index set returns the matrix") {
        std::vector<int> full{0, 1, 2, 3};
        CHECK((principal_submatrix(a, full).mat() - a.mat()).norm() == 0.0);
    }
    SUBCASE("singleton") {
        std::vector<int> one{2};
        CHECK(principal_submatrix(a, one).mat()(0, 0) == a.mat()(2, 2));
    }
    SUBCASE("witness block of W_2(psi_4^+)") {
        const DensityMatrix psi = max_coherent(4).projector();
        HermitianMatrix w(Matrix::Identity(4, 4) - 2.0 * psi.mat());
        std::vector<int> i01{0, 1};
        HermitianMatrix blk = principal_submatrix(w, i01);
        CHECK(blk.mat()(0, 0).real() == doctest::Approx(0.5));
        CHECK(blk.mat()(0, 1).real() == doctest::Approx(-0.5));
        CHECK(is_psd(blk, 1e-12));
    }
    SUBCASE("bad indices") {
        std::vector<int> out{4};
        CHECK_THROWS_AS(principal_submatrix(a, out), ValidationError);
        std::vector<int> dup{1, 1};
        CHECK_THROWS_AS(principal_submatrix(a, dup), ValidationError);
    }
}

TEST_CASE("fidelity and trace distance") {
    std::mt19937_64 rng(13);
    const DensityMatrix rho = testutil::random_state(3, rng);
    CHECK(fidelity(rho, rho) == doctest::Approx(1.0));
    CHECK(trace_distance(rho, rho) == doctest::Approx(0.0));

    Matrix e0 = Matrix::Zero(2, 2), e1 = Matrix::Zero(2, 2);
    e0(0, 0) = 1.0;
    e1(1, 1) = 1.0;
    const DensityMatrix zero{e0}, one{e1};
    CHECK(fidelity(zero, one) == doctest::Approx(0.0));
    CHECK(trace_distance(zero, one) == doctest::Approx(1.0));

    const DensityMatrix plus = max_coherent(2).projector();
    CHECK(fidelity(zero, plus) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(trace_distance(zero, plus) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("Fuchs-van de Graaf on random pairs") {
    std::mt19937_64 rng(17);
    int n = 0;
    for (int d = 2; d <= 6; ++d) {
        for (int t = 0; t < 40; ++t, ++n) {
            const DensityMatrix a = testutil::random_state(d, rng);
            const DensityMatrix b = testutil::random_state(d, rng);
            const double f = fidelity(a, b);
            // Tight for pure-state pairs, so allow eigensolver-level roundoff.
            CHECK(trace_distance(a, b) <= std::sqrt(1.0 - f * f) + 1e-7);
        }
    }
    CHECK(n == 200);
}

TEST_CASE("density matrix validation") {
    Matrix half = 0.5 * Matrix::Identity(2, 2);
    CHECK_NOTHROW(DensityMatrix{half});
    Matrix off = 0.6 * Matrix::Identity(2, 2);
    CHECK_THROWS_AS(DensityMatrix{off}, ValidationError);  // trace 1.2
    Matrix neg(2, 2);
    neg << 1.5, 1.0, 1.0, -0.5;
    CHECK_THROWS_AS(DensityMatrix{neg}, ValidationError);  // eigenvalue < 0
}
