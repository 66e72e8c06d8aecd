#include "twf/fock_twisted.hpp"
#include "twf/heisenberg.hpp"
#include "twf/hermite.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace twf;

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

CVector vec1(cd v) {
    CVector x(1);
    x(0) = v;
    return x;
}

CMatrix random_matrix(std::mt19937& g, int size, int block) {
    std::normal_distribution<double> nd;
    CMatrix M = CMatrix::Zero(size, size);
    for (int i = 0; i < block; ++i) {
        for (int j = 0; j < block; ++j) M(i, j) = cd(nd(g), nd(g)) / double(block);
    }
    return M;
}

std::vector<std::pair<CVector, CVector>> points(std::mt19937& g, int count, double r) {
    std::uniform_real_distribution<double> u(-r, r);
    std::vector<std::pair<CVector, CVector>> out;
    for (int i = 0; i < count; ++i) out.emplace_back(vec1(cd(u(g), u(g))), vec1(cd(u(g), u(g))));
    return out;
}

double max_gap(const TwistedFunction& a, const TwistedFunction& b, const std::vector<std::pair<CVector, CVector>>& pts) {
    double m = 0.0;
    for (const auto& [z, w] : pts) m = std::max(m, std::abs(a(z, w) - b(z, w)));
    return m;
}

}  // namespace

TEST_CASE("weight: small-lambda limit, positivity, swap symmetry") {
    std::mt19937 g(1);
    for (const auto& [z, w] : points(g, 20, 1.5)) {
        const double flat = std::exp(-0.5 * (z.squaredNorm() + w.squaredNorm()));
        CHECK(std::abs(weight_shape(1e-6, z, w) / flat - 1.0) < 1e-5);
    }
    for (const auto& [z, w] : points(g, 10000, 3.0)) CHECK(weight_shape(0.7, z, w) > 0.0);
    for (double lambda : {0.5, 1.0, 2.0}) {
        for (const auto& [z, w] : points(g, 20, 1.0)) {
            const double lhs = weight(lambda, w, z) / calibration(lambda, 1).c_lambda;
            const double rhs = weight(-lambda, z, w) / calibration(-lambda, 1).c_lambda;
            CHECK(std::abs(lhs - rhs) < 1e-14 * std::max(lhs, 1.0));
        }
    }
    CHECK_THROWS_AS(weight(1e-4, vec1(0.0), vec1(0.0)), DomainError);
}

TEST_CASE("calibration constants") {
    for (double lambda : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
        const CalibrationConstants& c = calibration(lambda, 1);
        CHECK(std::isfinite(c.c_lambda));
        CHECK(c.c_lambda > 0.0);
        CHECK(c.check_error < 1e-4);
        CHECK(std::abs(c.c_lambda / analytic_c_lambda(lambda, 1) - 1.0) < 1e-10);
        // d_lambda^2 times the Plancherel factor (2 pi/|lambda|)^n is one.
        CHECK(std::abs(c.d_lambda * c.d_lambda * kTwoPi / std::abs(lambda) - 1.0) < 1e-14);
        CHECK(std::abs(c.weight_mass / analytic_weight_mass(lambda, 1) - 1.0) < 1e-10);
    }
}

TEST_CASE("d_lambda makes the composite transform isometric on a Gaussian packet") {
    const double lambda = 1.0;
    const HermiteBasisSpec spec(1, lambda, 16);
    const RealFunction f = [](const RVector& p) { return std::exp(-0.25 * p.squaredNorm() + cd(0.0, 0.3) * p(0)); };
    const QuadratureGrid grid = lebesgue_hermite_grid(40, 2, 1.0 / std::sqrt(0.25 + 0.25));
    const SampledPlaneFunction s = sample_plane(grid, f);
    double l2 = 0.0;
    for (Eigen::Index i = 0; i < s.values.size(); ++i) l2 += grid.weights(i) * std::norm(s.values(i));
    const double d = calibration(lambda, 1).d_lambda;
    CHECK(std::abs(d * d * weyl_transform(lambda, s, spec).squaredNorm() / l2 - 1.0) < 1e-5);
}

TEST_CASE("gcal: zero, isometry, holomorphy, recovery") {
    const double lambda = 1.0;
    const int N = 6;
    std::mt19937 g(2);
    const TwistedFockElement zero = gcal(CMatrix::Zero(N, N), lambda, 1);
    CHECK(std::abs(zero(vec1(0.3), vec1(-0.2))) == 0.0);
    CMatrix H = random_matrix(g, N, N);
    H = (H + H.adjoint()).eval();
    const CMatrix G = gram_quadrature(lambda, 1, {H}, 24);
    CHECK(std::abs(G(0, 0).real() / H.squaredNorm() - 1.0) < 1e-5);
    const TwistedFockElement F = gcal(H, lambda, 1);
    CHECK(gcal_adjoint(F) == H);
    for (const auto& [z, w] : points(g, 5, 1.0)) {
        const HolomorphicFunction along_z = [&](const CVector& v) { return F(v, w); };
        const cd dz = holomorphic_derivative(along_z, z, 0).value;
        const double h = 1e-4;
        const cd dy = (F(z + vec1(cd(0.0, h)), w) - F(z - vec1(cd(0.0, h)), w)) / (2.0 * h);
        CHECK(std::abs(dy - cd(0.0, 1.0) * dz) < 1e-5 * std::max(1.0, std::abs(dz)));
    }
    const CMatrix R = gcal_adjoint_pointwise(F.function(), lambda, HermiteBasisSpec(1, lambda, N), 24);
    CHECK((R - H).cwiseAbs().maxCoeff() < 1e-5);
    const CMatrix K = random_matrix(g, N, N);
    const cd a(0.3, -0.7);
    const TwistedFockElement lin = gcal(H + a * K, lambda, 1);
    const TwistedFockElement FK = gcal(K, lambda, 1);
    CHECK(std::abs(lin(vec1(0.2), vec1(0.1)) - (F(vec1(0.2), vec1(0.1)) + a * FK(vec1(0.2), vec1(0.1)))) < 1e-12);
}

TEST_CASE("g_lambda: zero, round trip, factorization") {
    std::mt19937 g(3);
    const double lambda = -0.5;
    const int N = 8;
    const AlgebraElement z = g_lambda(CMatrix::Zero(N, N), lambda, 1);
    CHECK(z.phi.T().norm() == 0.0);
    const CMatrix M = random_matrix(g, N, N);
    const AlgebraElement phi = g_lambda(M, lambda, 1);
    CHECK((g_lambda_adjoint(phi.phi) - M).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((gcal_adjoint(phi.phi) - half_heat(lambda, 1, N) * M).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(phi.norm() == doctest::Approx(M.operatorNorm()));
}

TEST_CASE("rho: identity, unitarity, composition law, inverse, imaginary subgroup") {
    std::mt19937 g(4);
    const double lambda = 1.0;
    const int N = 8;
    const TwistedFockElement F = gcal(random_matrix(g, N, N), lambda, 1);
    const TwistedFockElement same = rho_apply(TwistedElement::identity(1), F);
    CHECK((pad_representative(F.T(), 1, same.cutoff()) - same.T()).norm() < 1e-14);
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    for (int i = 0; i < 5; ++i) {
        const TwistedElement real{vec1(u(g)), vec1(u(g)), u(g)};
        CHECK(std::abs(rho_apply(real, F).T().norm() / F.T().norm() - 1.0) < 1e-10);
        const TwistedElement x{vec1(cd(u(g), u(g))), vec1(cd(u(g), u(g))), u(g)};
        const TwistedElement y{vec1(cd(u(g), u(g))), vec1(cd(u(g), u(g))), u(g)};
        CHECK(composition_law_residual(lambda, x, y, F, points(g, 3, 0.8)) < 1e-7);
        CHECK(representation_residual(x, twisted_inverse(lambda, x), {F}) < 1e-7);
        const TwistedElement ia{vec1(cd(0.0, u(g))), vec1(cd(0.0, u(g))), 0.0};
        const TwistedElement ib{vec1(cd(0.0, u(g))), vec1(cd(0.0, u(g))), 0.0};
        CHECK(representation_residual(ia, ib, {F}) < 1e-7);
    }
}

TEST_CASE("S_phi: unit, identity multiplier, real commutation; tilde of zero") {
    std::mt19937 g(5);
    const double lambda = 2.0;
    const int N = 8;
    const AlgebraElement phi = g_lambda(random_matrix(g, N, N), lambda, 1);
    const TwistedFockElement one = gcal(constant_representative(lambda, 1, N), lambda, 1);
    const TwistedFockElement S1 = s_phi_twisted(phi, one);
    CHECK((unit_operator_constant(lambda, 1) * S1.T() - phi.phi.T()).norm() < 1e-5 * phi.phi.T().norm());
    const TwistedFockElement F = gcal(random_matrix(g, N, N), lambda, 1);
    CHECK((s_phi_twisted(g_lambda(CMatrix::Identity(N, N), lambda, 1), F).T() - F.T()).norm() < 1e-15);
    const TwistedElement a{vec1(0.3), vec1(-0.4), 0.2};
    const TwistedFockElement lhs = s_phi_twisted(phi, rho_apply(a, F));
    const TwistedFockElement rhs = rho_apply(a, s_phi_twisted(phi, F));
    CHECK((lhs.T() - rhs.T()).norm() < 1e-6 * rhs.T().norm());
    const TwistedFunction zero = s_tilde_twisted(lambda, constant_function(1, 0.0), F.function(), 8);
    CHECK(std::abs(zero(vec1(0.2), vec1(0.1))) == 0.0);
}

TEST_CASE("U rotation on the twisted space") {
    std::mt19937 g(6);
    const double lambda = 1.0;
    const TwistedFockElement F = gcal(random_matrix(g, 6, 6), lambda, 1);
    const TwistedFunction f = F.function();
    const TwistedFunction U4 = u_rotate_twisted(u_rotate_twisted(u_rotate_twisted(u_rotate_twisted(f))));
    const auto pts = points(g, 10, 1.0);
    CHECK(max_gap(U4, f, pts) < 1e-12);
    CHECK(max_gap(u_rotate_twisted_inverse(u_rotate_twisted(f)), f, pts) < 1e-12);
    const TwistedFunction c = constant_function(1, cd(0.4, 0.1));
    CHECK(max_gap(u_rotate_twisted(c), c, pts) == 0.0);
    const double nF = twisted_inner_quadrature(lambda, f, f, 24).real();
    const double nU = twisted_inner_quadrature(lambda, u_rotate_twisted(f), u_rotate_twisted(f), 24).real();
    CHECK(std::abs(nU / nF - 1.0) < 1e-5);
}

TEST_CASE("algebra product: identity, submultiplicativity, associativity") {
    std::mt19937 g(7);
    const double lambda = 0.5;
    const int N = 6;
    const AlgebraElement e = g_lambda(CMatrix::Identity(N, N), lambda, 1);
    const AlgebraElement p = g_lambda(random_matrix(g, N, N), lambda, 1);
    const AlgebraElement q = g_lambda(random_matrix(g, N, N), lambda, 1);
    const AlgebraElement r = g_lambda(random_matrix(g, N, N), lambda, 1);
    CHECK((algebra_mul(p, e).M - p.M).norm() == 0.0);
    CHECK(algebra_mul(p, q).norm() <= p.norm() * q.norm() * (1 + 1e-14));
    CHECK((algebra_mul(algebra_mul(p, q), r).M - algebra_mul(p, algebra_mul(q, r)).M).norm() < 1e-14);
}

TEST_CASE("commutative subalgebra and its Laguerre series") {
    const double lambda = 1.0;
    const HermiteBasisSpec spec(1, lambda, 16);
    const auto m = [](double s) { return cd(1.0 / (1.0 + s)); };
    const AlgebraElement p = a0_element(m, lambda, spec);
    const AlgebraElement q = a0_element([](double s) { return cd(std::cos(s)); }, lambda, spec);
    CHECK((algebra_mul(p, q).M - algebra_mul(q, p).M).norm() == 0.0);
    CHECK(a0_element([](double) { return cd(0.0); }, lambda, spec).phi.T().norm() == 0.0);
    std::mt19937 g(8);
    cd ratio0 = 0.0;
    for (const auto& [z, w] : points(g, 8, 0.6)) {
        const cd ratio = p.phi(z, w) / a0_series(m, 0.5, lambda, 1, 15, z, w, true);
        if (ratio0 == 0.0) ratio0 = ratio;
        CHECK(std::abs(ratio - ratio0) < 1e-4 * std::abs(ratio0));
    }
}

TEST_CASE("reproducing identity on zero") {
    std::mt19937 g(9);
    CHECK(reproduce_residual(g_lambda(CMatrix::Zero(6, 6), 1.0, 1), points(g, 2, 0.5), 10) == 0.0);
}

TEST_CASE("zeta functions") {
    const double lambda = 0.8;
    std::mt19937 g(10);
    const double coth = 1.0 / std::tanh(lambda);
    const TwistedFunction zz = zeta_function(1, 0, ZetaKind::ZType, lambda);
    const TwistedFunction zw = zeta_function(1, 0, ZetaKind::WType, lambda);
    const TwistedFunction zz2 = zeta_function(1, 0, ZetaKind::ZType, 2 * lambda);
    for (const auto& [z, w] : points(g, 100, 1.0)) {
        CHECK(std::abs(zz(z, w) - 0.5 * lambda * (coth * z(0) - cd(0.0, 1.0) * w(0))) < 1e-15);
        CHECK(std::abs(zw(z, w) - 0.5 * lambda * (coth * w(0) + cd(0.0, 1.0) * z(0))) < 1e-15);
        const double coth2 = 1.0 / std::tanh(2 * lambda);
        CHECK(std::abs(zz2(z, w) - lambda * (coth2 * z(0) - cd(0.0, 1.0) * w(0))) < 1e-15);
    }
    const int N = 10;
    const CMatrix R = zeta_representative(1, 0, ZetaKind::ZType, lambda, N);
    const CMatrix P = gcal_adjoint_pointwise(zz, lambda, HermiteBasisSpec(1, lambda, N), 40);
    CHECK((R - P).cwiseAbs().maxCoeff() < 1e-6 * R.cwiseAbs().maxCoeff());
}

TEST_CASE("first-order relations: identity element and constants") {
    std::mt19937 g(11);
    const double lambda = 1.0;
    const auto pts = points(g, 2, 0.5);
    const TwistedFunction id = g_lambda(CMatrix::Identity(12, 12), lambda, 1).phi.function();
    for (const auto& r : first_order_relations(lambda, id, pts)) {
        CHECK(r.s_residual < 1e-4);
        CHECK(r.s_tilde_residual < 1e-4);
    }
    for (const auto& r : first_order_relations(lambda, constant_function(1, 0.7), pts)) CHECK(r.derivative_gap < 1e-8);
}

TEST_CASE("invariant subspaces and certificates") {
    const double lambda = 1.0;
    const int N = 6;
    CHECK(invariant_range(CMatrix::Identity(N, N), lambda, 1).basis.size() == std::size_t(N * N));
    CMatrix P = CMatrix::Zero(N, N);
    P(0, 0) = 1.0;
    const InvariantSubspace V = invariant_range(P, lambda, 1);
    CHECK(V.basis.size() == std::size_t(N));
    const AlgebraElement phi = g_lambda(P, lambda, 1);
    CHECK((algebra_mul(phi, phi).M - phi.M).norm() == 0.0);
    CMatrix notP = P;
    notP(1, 1) = 0.5;
    CHECK_THROWS_AS(invariant_range(notP, lambda, 1), DomainError);
    const auto real = certificate_sample(1, SampleClass::Real, 7);
    CHECK(irreducibility_certificate(V, real).dimension == 1);
    // Complex group elements move {T M} outside the truncated range.
    CHECK_THROWS_AS(irreducibility_certificate(V, certificate_sample(1, SampleClass::Full, 7)), DomainError);
    CMatrix Q = CMatrix::Zero(N, N);
    Q(0, 0) = Q(1, 1) = 1.0;
    CHECK(irreducibility_certificate(invariant_range(Q, lambda, 1), real).dimension >= 2);
    const auto single = decompose(P, lambda, 1);
    REQUIRE(single.size() == 1);
    CHECK(single[0].irreducibles.size() == 1);
    CMatrix M = CMatrix::Zero(N, N);
    M.diagonal().head(3) << 1.0, 1.0, 2.0;
    const auto parts = decompose(M, lambda, 1);
    REQUIRE(parts.size() == 2);
    int ranks = 0;
    for (const auto& s : parts) ranks += s.rank * 10 + int(s.irreducibles.size());
    CHECK(ranks == 22 + 11);
    CHECK(full_space_commutant(lambda, 1, 4, real).dimension >= 4);
}
