#include "oracle_values.hpp"
#include "twf/heisenberg.hpp"
#include "twf/hermite.hpp"

#include <doctest.h>

#include <cmath>

using namespace twf;

namespace {
constexpr double kPiD = 3.14159265358979323846;

CVector vec1(cd v) {
    CVector x(1);
    x(0) = v;
    return x;
}
}  // namespace

TEST_CASE("hermite_function matches the frozen oracle") {
    for (const auto& r : oracle::kHermite) {
        CHECK(std::abs(hermite_function(r.k, r.x) - r.value) < 1e-13);
    }
    CHECK(hermite_function(1, 0.0) == 0.0);
}

TEST_CASE("Hermite functions are orthonormal under quadrature") {
    const int N = 16;
    const QuadratureGrid g = lebesgue_hermite_grid(60, 1, 1.0);
    for (int j = 0; j < N; ++j) {
        for (int k = 0; k < N; ++k) {
            const cd v = integrate(g, [&](const RVector& x) { return cd(hermite_function(j, x(0)) * hermite_function(k, x(0))); });
            CHECK(std::abs(v - (j == k ? 1.0 : 0.0)) < 1e-10);
        }
    }
}

TEST_CASE("hermite_eigenvalue examples and finite-difference oracle") {
    CHECK(hermite_eigenvalue({0}, HermiteBasisSpec(1, 1.0, 8)) == doctest::Approx(1.0));
    CHECK(hermite_eigenvalue({3}, HermiteBasisSpec(1, 2.0, 8)) == doctest::Approx(14.0));
    CHECK(hermite_eigenvalue({1, 2}, HermiteBasisSpec(2, -0.5, 8)) == doctest::Approx(4.0));
    // -f'' + lambda^2 x^2 f against (2k+1)|lambda| f on a uniform grid.
    for (double lambda : {0.5, 1.0, -2.0}) {
        for (int k : {0, 2, 5}) {
            const double h = 2e-4;
            const double E = hermite_eigenvalue({k}, HermiteBasisSpec(1, lambda, 8));
            double num = 0.0, den = 0.0;
            for (double x = -6.0; x <= 6.0; x += 0.01) {
                const double f = scaled_hermite_function(k, lambda, x);
                const double d2 = (scaled_hermite_function(k, lambda, x + h) - 2 * f + scaled_hermite_function(k, lambda, x - h)) / (h * h);
                const double r = -d2 + lambda * lambda * x * x * f - E * f;
                num += r * r;
                den += f * f;
            }
            CHECK(std::sqrt(num / den) < 1e-6);
        }
    }
}

TEST_CASE("heat_semigroup: limits, semigroup law, trace") {
    const HermiteBasisSpec spec(1, 1.0, 16);
    CHECK((heat_semigroup(1e-14, spec) - CMatrix::Identity(16, 16)).norm() < 1e-12);
    const CMatrix a = heat_semigroup(0.3, spec), b = heat_semigroup(0.9, spec);
    CHECK((a * b - heat_semigroup(1.2, spec)).cwiseAbs().maxCoeff() < 1e-16);
    CHECK(std::abs(heat_semigroup(1.0, spec).trace() - oracle::kHeatTrace) < 1e-12);
    CHECK_THROWS_AS(heat_semigroup(0.0, spec), DomainError);
    const HermiteBasisSpec spec2(2, -0.7, 5);
    CHECK(heat_semigroup(0.5, spec2).rows() == 25);
}

TEST_CASE("heat_kernel matches the oracle, symmetry, small-lambda limit") {
    for (const auto& r : oracle::kHeat) {
        const cd v = heat_kernel(r.t, r.lambda, vec1(r.y), vec1(r.v));
        CHECK(std::abs(v - r.value) < 1e-14);
    }
    const CVector y = vec1(cd(0.4, -0.3)), v = vec1(cd(-1.1, 0.2));
    CHECK(std::abs(heat_kernel(0.7, 1.3, y, v) - heat_kernel(0.7, 1.3, v, y)) < 1e-16);
    CHECK(std::abs(heat_kernel(0.7, 1.3, -y, -v) - heat_kernel(0.7, 1.3, y, v)) < 1e-16);
    const double t = 0.8;
    const cd limit = std::exp(-(bilinear_square(y) + bilinear_square(v)) / (4 * t)) / (4 * kPiD * t);
    CHECK(std::abs(heat_kernel(t, 1e-6, y, v) - limit) < 1e-5 * std::abs(limit));
}

TEST_CASE("laguerre functions") {
    for (const auto& r : oracle::kLaguerre) {
        CHECK(std::abs(laguerre_polynomial(r.k, r.alpha, r.x) - r.value) < 1e-12 * std::max(1.0, std::abs(r.value)));
    }
    const double lambda = 1.5;
    const CVector x = vec1(0.7), u = vec1(-0.4);
    CHECK(std::abs(laguerre_phi(0, lambda, x, u) - std::exp(-lambda * (0.49 + 0.16) / 4)) < 1e-15);
    for (int n : {1, 2, 3}) {
        for (int k : {0, 1, 4}) {
            const double binom = std::tgamma(k + n) / (std::tgamma(k + 1) * std::tgamma(n));
            CHECK(std::abs(laguerre_phi(k, lambda, CVector::Zero(n), CVector::Zero(n)) - binom) < 1e-12);
        }
    }
}

TEST_CASE("laguerre_phi is proportional to the trace of pi_lambda(-x,-u) on an eigenspace") {
    const double lambda = 0.8;
    const HermiteBasisSpec spec(1, lambda, 28);
    for (int k : {0, 1, 3}) {
        cd ratio0 = 0.0;
        for (double x : {-0.8, 0.0, 0.5}) {
            for (double u : {-0.6, 0.3, 0.9}) {
                const CMatrix P = schrodinger_matrix(lambda, vec1(-x), vec1(-u), spec);
                const cd ratio = P(k, k) / laguerre_phi(k, lambda, vec1(x), vec1(u));
                if (ratio0 == 0.0) ratio0 = ratio;
                CHECK(std::abs(ratio - ratio0) < 1e-6 * std::abs(ratio0));
            }
        }
    }
}

TEST_CASE("spectral_multiplier") {
    const HermiteBasisSpec spec(2, 1.0, 4);
    const int d = spec.size();
    CHECK((spectral_multiplier([](double) { return cd(1.0); }, spec) - CMatrix::Identity(d, d)).norm() == 0.0);
    CHECK((spectral_multiplier([](double s) { return cd(std::exp(-0.4 * s)); }, spec) - heat_semigroup(0.4, spec)).norm() < 1e-15);
    // Lowest eigenvalue has multiplicity C(0+n-1, n-1) = 1.
    const CMatrix P = spectral_multiplier([](double s) { return cd(s < 2.5 ? 1.0 : 0.0); }, spec);
    CHECK(std::abs(P.trace() - 1.0) < 1e-15);
    const auto m1 = [](double s) { return cd(std::sin(s), 1.0); };
    const auto m2 = [](double s) { return cd(1.0 / (1.0 + s)); };
    const CMatrix prod = spectral_multiplier([&](double s) { return m1(s) * m2(s); }, spec);
    CHECK((prod - spectral_multiplier(m1, spec) * spectral_multiplier(m2, spec)).norm() < 1e-15);
}

TEST_CASE("ladder matrices") {
    const HermiteBasisSpec spec(2, 1.0, 6);
    const LadderMatrices L = ladder_matrices(spec);
    REQUIRE(L.Q.size() == 2);
    CHECK((L.Q[0] - L.Q[0].adjoint()).norm() < 1e-15);
    CHECK((L.Q[0] * L.Q[1] - L.Q[1] * L.Q[0]).norm() < 1e-14);
    // Skew-adjointness of D holds exactly on the truncation of the tridiagonal ladder form.
    CHECK((L.D[1] + L.D[1].adjoint()).norm() < 1e-14);
}

TEST_CASE("basis spec validation") {
    CHECK_THROWS_AS(HermiteBasisSpec(1, 0.0, 8), DomainError);
    CHECK_THROWS_AS(HermiteBasisSpec(0, 1.0, 8), DomainError);
    CHECK(HermiteBasisSpec(2, 1.0, 5).size() == 25);
    CHECK(HermiteBasisSpec(1, -2.0, 4).eigenvalues()(3) == doctest::Approx(14.0));
}
