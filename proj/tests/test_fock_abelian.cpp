#include "twf/fock_abelian.hpp"
#include "twf/hermite.hpp"

#include <doctest.h>

#include <cmath>

using namespace twf;

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;
constexpr int D = 24;

CVector vec1(cd v) {
    CVector x(1);
    x(0) = v;
    return x;
}

FockElement test_polynomial() {
    FockElement p(1, D);
    p.set({0}, cd(0.5, 0.1));
    p.set({1}, cd(-0.2, 0.3));
    p.set({3}, cd(0.05, 0.0));
    return p;
}

double max_nonconstant(const FockElement& F) {
    double m = 0.0;
    for (const auto& [alpha, c] : F.coefficients()) {
        if (order(alpha) > 0) m = std::max(m, std::abs(c));
    }
    return m;
}

double rel(const FockElement& a, const FockElement& b) { return fock_norm(a - b) / fock_norm(b); }

}  // namespace

TEST_CASE("fock_inner examples and Parseval against quadrature") {
    const FockElement one = FockElement::constant(1, D, 1.0);
    const FockElement z = FockElement::monomial(1, D, {1});
    CHECK(std::abs(fock_inner(one, one) - 1.0) < 1e-15);
    CHECK(std::abs(fock_inner(z, z) - 2.0) < 1e-15);
    CHECK(std::abs(fock_inner(z, FockElement::monomial(1, D, {2}))) == 0.0);
    CHECK(std::abs(fock_inner_quadrature(z, z, 30) - 2.0) < 1e-12);
    const FockElement p = test_polynomial();
    CHECK(std::abs(fock_inner(p, p) - fock_inner_quadrature(p, p, 30)) < 1e-8);
    FockElement q(2, 10);
    q.set({1, 0}, 1.0);
    q.set({1, 2}, cd(0.0, 0.5));
    CHECK(std::abs(fock_inner(q, q) - fock_inner_quadrature(q, q, 16)) < 1e-8);
}

TEST_CASE("bargmann: Gaussian to constant, linearity, isometry up to one constant") {
    const RealFunction g = [](const RVector& xi) { return cd(std::exp(-0.5 * xi.squaredNorm())); };
    const FockElement Bg = bargmann(g, 1, D);
    CHECK(std::abs(Bg.coefficient({0}) - kSqrtPi) < 1e-10);
    CHECK(max_nonconstant(Bg) < 1e-8);
    const RealFunction h1 = [](const RVector& xi) { return cd(hermite_function(1, xi(0))); };
    const cd a(0.4, 0.2), b(-1.0, 0.5);
    const FockElement lin = bargmann([&](const RVector& xi) { return a * g(xi) + b * h1(xi); }, 1, D);
    CHECK(rel(lin, bargmann(g, 1, D) * a + bargmann(h1, 1, D) * b) < 1e-12);
    double ratio0 = 0.0;
    for (int k = 0; k < 5; ++k) {
        const FockElement Bh = bargmann([k](const RVector& xi) { return cd(hermite_function(k, xi(0))); }, 1, D);
        const double ratio = fock_norm(Bh);  // Hermite functions have unit L2 norm
        if (k == 0) ratio0 = ratio;
        CHECK(std::abs(ratio - ratio0) < 1e-10 * ratio0);
    }
}

TEST_CASE("rho0: identity, isometry, projective composition") {
    const FockElement p = test_polynomial();
    CHECK(rel(rho0_apply(vec1(0.0), p), p) < 1e-15);
    for (cd w : {cd(0.5, 0.3), cd(-0.7, 0.6), cd(0.0, -1.0)}) {
        CHECK(std::abs(fock_norm(rho0_apply(vec1(w), p)) - fock_norm(p)) < 1e-6);
    }
    const cd w(0.3, -0.2), v(-0.1, 0.4);
    const FockElement lhs = rho0_apply(vec1(w), rho0_apply(vec1(v), p));
    const cd phase = std::exp(cd(0.0, -0.5) * (w * std::conj(v)).imag());
    const FockElement rhs = rho0_apply(vec1(w + v), p) * phase;
    CHECK(rel(lhs, rhs) < 1e-6);
}

TEST_CASE("gauss_bargmann: unit multiplier, linearity, algebra law") {
    const FockElement G1 = gauss_bargmann([](const RVector&) { return cd(1.0); }, 1, D);
    CHECK(std::abs(G1.coefficient({0}) - kSqrtPi) < 1e-10);
    CHECK(max_nonconstant(G1) < 1e-8);
    const RealFunction m1 = [](const RVector& xi) { return cd(std::exp(-0.5 * xi(0) * xi(0))); };
    const RealFunction m2 = [](const RVector& xi) { return cd(std::exp(-0.3 * xi(0) * xi(0)), 0.2 * xi(0) * std::exp(-0.3 * xi(0) * xi(0))); };
    const FockElement Gm1 = gauss_bargmann(m1, 1, D), Gm2 = gauss_bargmann(m2, 1, D);
    const FockElement Gsum = gauss_bargmann([&](const RVector& xi) { return m1(xi) + cd(0.0, 2.0) * m2(xi); }, 1, D);
    CHECK(rel(Gsum, Gm1 + Gm2 * cd(0.0, 2.0)) < 1e-12);
    // Algebra law in the forward direction: S_phi F = kappa sqrt(pi) G(m1 m2) for F = G m1, phi = G m2.
    // Both the inverse transform and the Fock norm weight high-order coefficients that sit below
    // the sampling roundoff here, so the law is compared pointwise on the unit disk.
    const FockElement S = s_phi(Gm2, Gm1);
    const FockElement prod = gauss_bargmann([&](const RVector& xi) { return m1(xi) * m2(xi); }, 1, D);
    const double scale = abelian_kernel_constant(1) * kSqrtPi;
    for (cd z : {cd(0.0), cd(0.6, 0.3), cd(-0.2, -0.9), cd(1.0, 0.0)}) {
        CHECK(std::abs(S(vec1(z)) - scale * prod(vec1(z))) < 1e-6 * std::abs(S(vec1(z))));
    }
    const RVector x = RVector::Constant(1, 0.4);
    CHECK(std::abs(gauss_bargmann_inverse(Gm2, x) - m2(x)) < 1e-8);
}
TEST_CASE("S_phi and its tilde: unit, zero, commutation classes") {
    const double kappa = abelian_kernel_constant(1);
    const FockElement phi = test_polynomial();
    const FockElement one = FockElement::constant(1, D, 1.0);
    CHECK(rel(s_phi(phi, one), phi * kappa) < 1e-6);
    CHECK(rel(s_tilde_phi(phi, one), phi * kappa) < 1e-6);
    CHECK(fock_norm(s_phi(FockElement(1, D), phi)) < 1e-14);
    const FockElement F = FockElement::monomial(1, D, {2}, cd(0.3, 0.0)) + FockElement::constant(1, D, 0.5);
    const CVector a = vec1(0.4), ib = vec1(cd(0.0, 0.4));
    CHECK(rel(s_phi(phi, rho0_apply(a, F)), rho0_apply(a, s_phi(phi, F))) < 1e-6);
    CHECK(rel(s_tilde_phi(phi, rho0_apply(ib, F)), rho0_apply(ib, s_tilde_phi(phi, F))) < 1e-6);
    // The commutation classes are distinct: S_phi does not commute with imaginary translations.
    CHECK(rel(s_phi(phi, rho0_apply(ib, F)), rho0_apply(ib, s_phi(phi, F))) > 1e-3);
    CHECK(std::abs(s_phi_at(phi, one, vec1(0.3), 40) - kappa * phi(vec1(0.3))) < 1e-8);
}

TEST_CASE("u_rotate") {
    const FockElement p = test_polynomial();
    CHECK(rel(u_rotate(u_rotate(u_rotate(u_rotate(p)))), p) == 0.0);
    const FockElement one = FockElement::constant(1, D, 1.0);
    CHECK(rel(u_rotate(one), one) == 0.0);
    CHECK(fock_norm(u_rotate(p)) == doctest::Approx(fock_norm(p)).epsilon(1e-15));
    CHECK(rel(u_rotate_inverse(u_rotate(p)), p) == 0.0);
    CHECK(std::abs(u_rotate(p)(vec1(0.4)) - p(vec1(cd(0.0, -0.4)))) < 1e-15);
}

TEST_CASE("first_order_action") {
    const FockElement c = FockElement::constant(1, D, cd(2.0, -1.0));
    const FockElement half = first_order_action(c, 0, -1);
    CHECK(std::abs(half.coefficient({1}) - cd(1.0, -0.5)) == 0.0);
    CHECK(std::abs(half.coefficient({0})) == 0.0);
    CHECK(fock_norm(first_order_action(c, 0, +1) - first_order_action(c, 0, -1)) == 0.0);
    const FockElement m = FockElement::monomial(1, D, {3});
    // (+d + z/2) - (-d + z/2) = 2 d
    const FockElement gap = first_order_action(m, 0, +1) - first_order_action(m, 0, -1);
    CHECK(std::abs(gap.coefficient({2}) - 6.0) == 0.0);
    CHECK(half_coordinate(1, D, 0).coefficient({1}) == cd(0.5));
    CHECK(default_degree_cap(1) == 24);
    CHECK(default_degree_cap(2) == 10);
}

TEST_CASE("Fock element plumbing") {
    CHECK_THROWS_AS(FockElement(0, 4), DomainError);
    FockElement p(1, 4);
    CHECK_THROWS_AS(p.set({5}, 1.0), DomainError);
    CHECK(p.degree() == -1);
    p.add({2}, 1.0);
    p.add({2}, 1.0);
    CHECK(p.coefficient({2}) == cd(2.0));
    CHECK(p.degree() == 2);
}
