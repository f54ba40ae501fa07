#include "oracles.hpp"

#include "sortwave/core.hpp"
#include "sortwave/error.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace sortwave;

TEST_SUITE("core") {

TEST_CASE("grid nodes and spacing") {
    const Grid1D g(-1.0, 3.0, 5);
    CHECK(g.spacing() == 1.0);
    CHECK(g.node(0) == -1.0);
    CHECK(g.node(4) == 3.0);
    CHECK(g.nodes().size() == 5);
    CHECK(g.shifted(0.5).node(0) == -0.5);
    CHECK_THROWS_AS(Grid1D(0.0, 1.0, 2), Error);
    CHECK_THROWS_AS(Grid1D(1.0, 1.0, 10), Error);
}

TEST_CASE("tridiagonal identity and 2x2") {
    TridiagonalSystem id{{0.0, 0.0}, {1.0, 1.0, 1.0}, {0.0, 0.0}, {1.0, 2.0, 3.0}};
    const auto x = tridiag_solve(id);
    CHECK(x == std::vector<double>{1.0, 2.0, 3.0});

    TridiagonalSystem two{{1.0}, {2.0, 2.0}, {1.0}, {3.0, 3.0}};
    const auto y = tridiag_solve(two);
    CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(y[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("tridiagonal solve matches dense LU on random dominant systems") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t n = 50;
    TridiagonalSystem sys;
    sys.sub.resize(n - 1);
    sys.sup.resize(n - 1);
    sys.diag.resize(n);
    sys.rhs.resize(n);
    for (auto& v : sys.sub) v = u(rng);
    for (auto& v : sys.sup) v = u(rng);
    for (auto& v : sys.diag) v = 2.5 + u(rng);
    for (auto& v : sys.rhs) v = u(rng);

    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        dense(r, r) = sys.diag[i];
        if (i > 0) dense(r, r - 1) = sys.sub[i - 1];
        if (i + 1 < n) dense(r, r + 1) = sys.sup[i];
    }
    const auto expected = oracle::dense_solve(dense, sys.rhs);
    const auto x = tridiag_solve(sys);
    double rhs_norm = 0.0;
    for (double v : sys.rhs) rhs_norm = std::max(rhs_norm, std::abs(v));
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(x[i] - expected[i]) <= 1e-10);

    // A * solve(b) == b
    const auto back = sys.multiply(x);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(back[i] - sys.rhs[i]) <= 1e-12 * rhs_norm);

    std::vector<double> b = sys.rhs;
    std::vector<double> scratch(n - 1);
    tridiag_solve_inplace(sys.sub, sys.diag, sys.sup, b, scratch);
    for (std::size_t i = 0; i < n; ++i) CHECK(b[i] == doctest::Approx(x[i]).epsilon(1e-14));
}

TEST_CASE("zero pivot is a singular system") {
    TridiagonalSystem sys{{1.0}, {0.0, 1.0}, {1.0}, {1.0, 1.0}};
    try {
        (void)tridiag_solve(sys);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::singular_system);
        CHECK(e.name() == "singular system");
    }
}

TEST_CASE("trapezoid rule") {
    const std::size_t n = 1001;
    const double h = 1.0 / static_cast<double>(n - 1);
    std::vector<double> one(n, 1.0), lin(n), sq(n);
    for (std::size_t j = 0; j < n; ++j) {
        lin[j] = static_cast<double>(j) * h;
        sq[j] = lin[j] * lin[j];
    }
    CHECK(trapezoid(one, h) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(trapezoid(lin, h) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(trapezoid(sq, h) - 1.0 / 3.0) <= 1e-6);
    CHECK(trapezoid(std::vector<double>{1.0, 1.0, 1.0}, 0.5) == 1.0);

    std::vector<double> sum(n);
    for (std::size_t j = 0; j < n; ++j) sum[j] = lin[j] + sq[j];
    CHECK(trapezoid(sum, h) == doctest::Approx(trapezoid(lin, h) + trapezoid(sq, h)).epsilon(1e-15));

    const auto w = trapezoid_weights(4, 0.5);
    CHECK(w == std::vector<double>{0.25, 0.5, 0.5, 0.25});
    CHECK_THROWS_AS(trapezoid(std::vector<double>{}, 1.0), Error);
}

TEST_CASE("depressed cubic root") {
    CHECK(depressed_cubic_root(0.0, -8.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(depressed_cubic_root(3.0, 0.0) == 0.0);
    CHECK(depressed_cubic_root(0.0, 0.0) == 0.0);

    const auto cubic = [](double p, double q) { return [p, q](double z) { return z * z * z + p * z + q; }; };
    const double z = depressed_cubic_root(12.0, -24.0);
    const double expected = oracle::bisect(cubic(12.0, -24.0), 0.0, 2.0);
    CHECK(std::abs(z - expected) <= 1e-12);
    CHECK(std::abs(cubic(12.0, -24.0)(z)) <= 1e-10 * 24.0);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> up(0.0, 50.0), uq(-200.0, 200.0);
    for (int k = 0; k < 500; ++k) {
        const double p = k % 10 == 0 ? 0.0 : up(rng);
        const double q = uq(rng);
        const double root = depressed_cubic_root(p, q);
        CHECK(std::abs(cubic(p, q)(root)) <= 1e-10 * std::max(1.0, std::abs(q)));
        CHECK(std::abs(depressed_cubic_root(p, -q) + root) <= 1e-12);
    }
}

}  // TEST_SUITE
