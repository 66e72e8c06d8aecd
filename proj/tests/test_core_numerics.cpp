#include "oracle_values.hpp"
#include "twf/core_numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace twf;

namespace {
constexpr double kSqrtPi = 1.7724538509055160273;
}

TEST_CASE("gauss_hermite_grid integrates Gaussian moments") {
    const QuadratureGrid g = gauss_hermite_grid(10, 1, 1.0);
    CHECK(std::abs(integrate(g, [](const RVector&) { return cd(1.0); }) - kSqrtPi) < 1e-14);
    CHECK(std::abs(integrate(g, [](const RVector& x) { return cd(x(0) * x(0)); }) - kSqrtPi / 2) < 1e-14);
}

TEST_CASE("gauss_hermite_grid matches the symbolic moment of a degree-5 polynomial") {
    const QuadratureGrid g = gauss_hermite_grid(3, 1, 1.0);
    const cd got = integrate(g, [](const RVector& x) {
        double acc = 0.0;
        for (int i = 5; i >= 0; --i) acc = acc * x(0) + oracle::kPolyCoeffs[i];
        return cd(acc);
    });
    CHECK(std::abs(got - oracle::kPolyMoment) < 1e-12);
}

TEST_CASE("quadrature exactness over a points/degree matrix") {
    for (int p = 2; p <= 12; ++p) {
        const QuadratureGrid g = gauss_hermite_grid(p, 1, 1.0);
        for (int k = 0; k <= 2 * p - 1; ++k) {
            const cd got = integrate(g, [k](const RVector& x) { return cd(std::pow(x(0), k)); });
            // Moments of exp(-x^2): Gamma((k+1)/2) for even k, zero for odd k; errors are measured
            // against the absolute moment, the size of the terms being summed.
            const double scale = std::tgamma((k + 1) / 2.0);
            const double want = k % 2 ? 0.0 : scale;
            CHECK(std::abs(got - want) < 1e-12 * scale);
        }
    }
}

TEST_CASE("scaled grid carries the exp(-|x/scale|^2) weight in several dimensions") {
    const QuadratureGrid g = gauss_hermite_grid(6, 2, 0.5);
    CHECK(g.size() == 36);
    const double want = kSqrtPi * kSqrtPi * 0.25;
    CHECK(std::abs(integrate(g, [](const RVector&) { return cd(1.0); }) - want) < 1e-14);
}

TEST_CASE("integrate: zero, oscillatory oracle, linearity, non-finite values") {
    const QuadratureGrid g = gauss_hermite_grid(40, 1, 1.0);
    CHECK(integrate(g, [](const RVector&) { return cd(0.0); }) == cd(0.0));
    const cd osc = integrate(g, [](const RVector& x) { return std::exp(cd(0.0, x(0))); });
    CHECK(std::abs(osc - oracle::kOscillatoryMoment) < 1e-13);
    const auto f = [](const RVector& x) { return cd(std::cos(x(0)), x(0)); };
    const auto h = [](const RVector& x) { return cd(x(0) * x(0), 1.0); };
    const cd a(0.3, -1.2), b(2.0, 0.5);
    const cd lhs = integrate(g, [&](const RVector& x) { return a * f(x) + b * h(x); });
    CHECK(std::abs(lhs - (a * integrate(g, f) + b * integrate(g, h))) < 1e-14);
    CHECK_THROWS_AS(integrate(g, [](const RVector&) { return cd(NAN, 0.0); }), NumericalError);
}

TEST_CASE("node budget rejects oversized grids") {
    const std::size_t saved = node_budget();
    set_node_budget(100);
    CHECK_THROWS_AS(gauss_hermite_grid(11, 2, 1.0), DomainError);
    CHECK_NOTHROW(gauss_hermite_grid(10, 2, 1.0));
    set_node_budget(saved);
    CHECK_THROWS_AS(gauss_hermite_grid(1, 1, 1.0), DomainError);
}

TEST_CASE("matrix_exp: trivial cases, nilpotent, frozen oracle, residual") {
    CHECK((matrix_exp(CMatrix::Zero(4, 4)) - CMatrix::Identity(4, 4)).norm() < 1e-15);
    CVector d(3);
    d << cd(0.5, 0.0), cd(-1.0, 0.3), cd(2.0, -1.0);
    const CMatrix D = matrix_exp(CMatrix(d.asDiagonal()));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(D(i, i) - std::exp(d(i))) < 1e-13 * std::abs(std::exp(d(i))));
    CMatrix N = CMatrix::Zero(2, 2);
    N(0, 1) = 1.0;
    CMatrix want(2, 2);
    want << 1.0, 1.0, 0.0, 1.0;
    CHECK((matrix_exp(N) - want).norm() < 1e-15);

    CMatrix A(3, 3), E(3, 3);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            A(r, c) = cd(oracle::kExpInput[r][c][0], oracle::kExpInput[r][c][1]);
            E(r, c) = cd(oracle::kExpOutput[r][c][0], oracle::kExpOutput[r][c][1]);
        }
    }
    CHECK((matrix_exp(A) - E).norm() / E.norm() < 1e-12);

    std::mt19937 rng(3);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 10; ++trial) {
        CMatrix R(6, 6);
        for (int i = 0; i < 36; ++i) R(i / 6, i % 6) = cd(nd(rng), nd(rng));
        R *= 5.0 / R.operatorNorm();
        CHECK((matrix_exp(R) * matrix_exp(-R) - CMatrix::Identity(6, 6)).norm() < 1e-10);
    }
    CHECK_THROWS_AS(matrix_exp(CMatrix::Zero(2, 3)), DomainError);
}

TEST_CASE("commutant_dimension examples") {
    CHECK(commutant_dimension({CMatrix::Identity(3, 3)}).dimension == 9);
    std::vector<CMatrix> units;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            CMatrix E = CMatrix::Zero(3, 3);
            E(i, j) = 1.0;
            units.push_back(E);
        }
    }
    CHECK(commutant_dimension(units).dimension == 1);
    CMatrix D = CMatrix::Zero(3, 3);
    D.diagonal() << 1.0, 1.0, 2.0;
    const CommutantResult r = commutant_dimension({D});
    CHECK(r.dimension == 5);
    CHECK_FALSE(r.indeterminate);
    CHECK_THROWS_AS(commutant_dimension({}), DomainError);
}

TEST_CASE("commutant_dimension is invariant under a change of basis") {
    std::mt19937 rng(11);
    std::normal_distribution<double> nd;
    CMatrix G(4, 4);
    for (int i = 0; i < 16; ++i) G(i / 4, i % 4) = cd(nd(rng), nd(rng));
    const CMatrix U = Eigen::HouseholderQR<CMatrix>(G).householderQ();
    CMatrix A = CMatrix::Zero(4, 4), B = CMatrix::Zero(4, 4);
    A.diagonal() << 1.0, 1.0, 3.0, 3.0;
    B(0, 1) = 1.0;
    const int before = commutant_dimension({A, B}).dimension;
    const int after = commutant_dimension({U * A * U.adjoint(), U * B * U.adjoint()}).dimension;
    CHECK(before == after);
}

TEST_CASE("holomorphic_derivative examples") {
    CVector z0(1);
    z0(0) = 1.0;
    CHECK(std::abs(holomorphic_derivative([](const CVector& z) { return z(0) * z(0); }, z0, 0).value - 2.0) < 1e-9);
    const cd c(0.4, -0.7);
    z0(0) = cd(0.2, 0.3);
    const cd d = holomorphic_derivative([c](const CVector& z) { return std::exp(c * z(0)); }, z0, 0).value;
    CHECK(std::abs(d - c * std::exp(c * z0(0))) < 1e-9);
    CHECK(std::abs(holomorphic_derivative([](const CVector&) { return cd(3.0); }, z0, 0).value) == 0.0);
    CHECK_THROWS_AS(holomorphic_derivative([](const CVector& z) { return z(0); }, z0, 1), DomainError);
}

TEST_CASE("tolerance profile and multi-index helpers") {
    ToleranceProfile t;
    CHECK_NOTHROW(t.validate());
    t.rel_tol = 0.0;
    CHECK_THROWS_AS(t.validate(), DomainError);
    CHECK(order({2, 3}) == 5);
    CHECK(multi_factorial({2, 3}) == doctest::Approx(12.0));
    CHECK(box_indices(2, 3).size() == 9);
    CHECK(graded_indices(2, 2).size() == 6);
}
