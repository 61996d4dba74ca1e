#include <catch_amalgamated.hpp>

#include <random>

#include <Eigen/Eigenvalues>

#include "fmsync/errors.hpp"
#include "fmsync/linsolve.hpp"
#include "oracles.hpp"

using namespace fmsync;

namespace {

Mat random_hurwitz(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    Mat a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a(i, j) = g(rng);
    }
    Eigen::EigenSolver<Mat> es(a, false);
    const double shift = es.eigenvalues().real().maxCoeff() + 0.5;
    return a - shift * Mat::Identity(n, n);
}

Mat random_spd(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    Mat b(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) b(i, j) = g(rng);
    }
    return b * b.transpose() + Mat::Identity(n, n);
}

}  // namespace

TEST_CASE("Lyapunov solve matches the entrywise oracle", "[linsolve][property]") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + trial % 8;
        const Mat A = random_hurwitz(rng, n);
        const Mat R = random_spd(rng, n);
        const SymmetricPD P = solve_lyapunov(A, R);
        const Mat ref = oracle::lyapunov(A, R);
        REQUIRE(oracle::max_abs_diff(P.matrix(), ref) < 1e-9 * (1.0 + ref.norm()));
        REQUIRE(lyapunov_residual(P.matrix(), A, R) < 1e-9 * (1.0 + R.norm()));
        REQUIRE(P.eig_min() > 0.0);
    }
}

TEST_CASE("Lyapunov residual of the scalar case", "[linsolve]") {
    Mat A(1, 1);
    A << -2.0;
    Mat R(1, 1);
    R << 4.0;
    const SymmetricPD P = solve_lyapunov(A, R);
    REQUIRE(P.matrix()(0, 0) == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Lyapunov rejects non-Hurwitz A", "[linsolve]") {
    Mat A(2, 2);
    A << 0.0, 1.0, -1.0, 0.0;
    try {
        (void)solve_lyapunov(A, Mat::Identity(2, 2));
        FAIL("expected an error");
    } catch (const Error& e) {
        REQUIRE(e.kind() == ErrorKind::NoStableSolution);
    }
}

TEST_CASE("Riccati solution is stabilizing with small residual", "[linsolve]") {
    Mat S(2, 2);
    S << 0.0, 0.1, -0.1, 0.0;
    Mat B(2, 1);
    B << 1.0, 1.0;
    for (double ls : {0.25, 1.0, 3.0}) {
        for (double eps : {0.1, 1.0, 10.0}) {
            const SymmetricPD G = solve_riccati(S, B, ls, eps);
            REQUIRE(riccati_residual(G.matrix(), S, B, ls, eps) < 1e-8);
            REQUIRE(G.eig_min() > 0.0);
            const Mat closed = S - ls * B * B.transpose() * G.matrix();
            Eigen::EigenSolver<Mat> es(closed, false);
            REQUIRE(es.eigenvalues().real().maxCoeff() < 0.0);
        }
    }
}

TEST_CASE("Riccati of a scalar system matches the quadratic formula", "[linsolve]") {
    // 2 s g - l b^2 g^2 + e = 0  =>  g = (s + sqrt(s^2 + l b^2 e)) / (l b^2)
    const double s = 0.3, b = 2.0, l = 0.5, e = 1.5;
    Mat S(1, 1), B(1, 1);
    S << s;
    B << b;
    const double g = (s + std::sqrt(s * s + l * b * b * e)) / (l * b * b);
    REQUIRE(solve_riccati(S, B, l, e).matrix()(0, 0) == Catch::Approx(g).epsilon(1e-12));
}

TEST_CASE("Riccati rejects unstabilizable pairs", "[linsolve]") {
    Mat S(2, 2);
    S << 1.0, 0.0, 0.0, 2.0;
    Mat B(2, 1);
    B << 1.0, 0.0;
    REQUIRE_FALSE(is_stabilizable(S, B));
    REQUIRE_THROWS_AS(solve_riccati(S, B, 1.0, 1.0), Error);
}

TEST_CASE("closed-form 2x2 eigenvalues agree with the general solver", "[linsolve][property]") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    for (int k = 0; k < 200; ++k) {
        Mat a(2, 2);
        a << g(rng), g(rng), g(rng), g(rng);
        CVec closed = eigenvalues_2x2(a);
        CVec general = eigenvalues_general(a);
        auto key = [](const std::complex<double>& z) { return std::make_pair(z.real(), z.imag()); };
        if (key(closed(0)) > key(closed(1))) std::swap(closed(0), closed(1));
        if (key(general(0)) > key(general(1))) std::swap(general(0), general(1));
        REQUIRE(std::abs(closed(0) - general(0)) < 1e-10);
        REQUIRE(std::abs(closed(1) - general(1)) < 1e-10);
    }
}

TEST_CASE("spectral norm, abscissa and Kronecker product", "[linsolve]") {
    Mat a(2, 2);
    a << 3.0, 0.0, 0.0, -4.0;
    REQUIRE(spectral_norm(a) == Catch::Approx(4.0));
    REQUIRE(spectral_abscissa(a) == Catch::Approx(3.0));
    REQUIRE_FALSE(is_hurwitz(a));
    Mat b(1, 2);
    b << 1.0, 2.0;
    const Mat k = kron(a, b);
    REQUIRE(k.rows() == 2);
    REQUIRE(k.cols() == 4);
    REQUIRE(k(0, 1) == 6.0);
    REQUIRE(k(1, 3) == -8.0);
}

TEST_CASE("SymmetricPD rejects indefinite input and caches eigenvalues", "[linsolve]") {
    Mat m(2, 2);
    m << 1.0, 2.0, 2.0, 1.0;
    REQUIRE_THROWS_AS(SymmetricPD(m), Error);
    Mat d(2, 2);
    d << 2.0, 0.0, 0.0, 8.0;
    const SymmetricPD p(d);
    REQUIRE(p.eig_min() == Catch::Approx(2.0));
    REQUIRE(p.eig_max() == Catch::Approx(8.0));
    REQUIRE(condition_ratio(p) == Catch::Approx(4.0));
}
