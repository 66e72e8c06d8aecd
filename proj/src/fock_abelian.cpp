#include "twf/fock_abelian.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace twf {

FockElement::FockElement(int n, int degree_cap) : n_(n), degree_cap_(degree_cap) {
    if (n < 1) throw DomainError("FockElement: n must be positive");
    if (degree_cap < 0) throw DomainError("FockElement: degree cap must be non-negative");
}

FockElement FockElement::constant(int n, int degree_cap, cd c) {
    FockElement F(n, degree_cap);
    F.set(MultiIndex(static_cast<std::size_t>(n), 0), c);
    return F;
}

FockElement FockElement::monomial(int n, int degree_cap, const MultiIndex& alpha, cd c) {
    FockElement F(n, degree_cap);
    F.set(alpha, c);
    return F;
}

cd FockElement::coefficient(const MultiIndex& alpha) const {
    auto it = coeffs_.find(alpha);
    return it == coeffs_.end() ? cd(0.0) : it->second;
}

void FockElement::set(const MultiIndex& alpha, cd c) {
    if (static_cast<int>(alpha.size()) != n_) throw DomainError("FockElement: index dimension mismatch");
    for (int a : alpha) {
        if (a < 0) throw DomainError("FockElement: negative index");
    }
    if (order(alpha) > degree_cap_) throw DomainError("FockElement: index above the degree cap");
    if (c == cd(0.0)) {
        coeffs_.erase(alpha);
    } else {
        coeffs_[alpha] = c;
    }
}

void FockElement::add(const MultiIndex& alpha, cd c) { set(alpha, coefficient(alpha) + c); }

cd FockElement::operator()(const CVector& z) const {
    if (z.size() != n_) throw DomainError("FockElement: point dimension mismatch");
    cd acc = 0.0;
    for (const auto& [alpha, c] : coeffs_) {
        cd m = c;
        for (int j = 0; j < n_; ++j) m *= std::pow(z(j), alpha[static_cast<std::size_t>(j)]);
        acc += m;
    }
    return acc;
}

int FockElement::degree() const {
    int d = -1;
    for (const auto& [alpha, c] : coeffs_) d = std::max(d, order(alpha));
    return d;
}

FockElement FockElement::operator+(const FockElement& o) const {
    if (o.n_ != n_) throw DomainError("FockElement: dimension mismatch");
    FockElement r(n_, std::max(degree_cap_, o.degree_cap_));
    for (const auto& [a, c] : coeffs_) r.add(a, c);
    for (const auto& [a, c] : o.coeffs_) r.add(a, c);
    return r;
}

FockElement FockElement::operator-(const FockElement& o) const { return *this + o * cd(-1.0); }

FockElement FockElement::operator*(cd s) const {
    FockElement r(n_, degree_cap_);
    for (const auto& [a, c] : coeffs_) r.set(a, c * s);
    return r;
}

int default_degree_cap(int n) { return n == 1 ? 24 : 10; }

double monomial_norm_sq(const MultiIndex& alpha) {
    return std::ldexp(1.0, order(alpha)) * multi_factorial(alpha);
}

cd fock_inner(const FockElement& F, const FockElement& G) {
    if (F.n() != G.n()) throw DomainError("fock_inner: dimension mismatch");
    cd acc = 0.0;
    for (const auto& [alpha, c] : F.coefficients()) acc += c * std::conj(G.coefficient(alpha)) * monomial_norm_sq(alpha);
    return acc;
}

double fock_norm(const FockElement& F) { return std::sqrt(std::max(0.0, fock_inner(F, F).real())); }

namespace {

CVector complex_point(const RVector& node, int n) {
    CVector w(n);
    for (int j = 0; j < n; ++j) w(j) = cd(node(j), node(n + j));
    return w;
}

double binomial(int n, int k) { return std::round(std::tgamma(n + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0))); }

// Physicists' Hermite polynomials H_0..H_K at x.
std::vector<double> hermite_polys(int K, double x) {
    std::vector<double> H(static_cast<std::size_t>(K + 1));
    H[0] = 1.0;
    if (K >= 1) H[1] = 2.0 * x;
    for (int k = 1; k < K; ++k) H[static_cast<std::size_t>(k + 1)] = 2.0 * x * H[static_cast<std::size_t>(k)] - 2.0 * k * H[static_cast<std::size_t>(k - 1)];
    return H;
}

// c_alpha = scale(alpha) int g(xi) H_alpha(xi) e^{-|xi|^2} dxi
FockElement hermite_projection(const RealFunction& g, int n, int D, int points,
                               const std::function<cd(const MultiIndex&)>& scale) {
    const QuadratureGrid grid = gauss_hermite_grid(points, n, 1.0);
    FockElement out(n, D);
    const auto idx = graded_indices(n, D);
    std::vector<cd> acc(idx.size(), 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const RVector xi = grid.node(i);
        const cd gv = g(xi) * grid.weights(static_cast<Eigen::Index>(i));
        if (!std::isfinite(gv.real()) || !std::isfinite(gv.imag())) throw NumericalError("Hermite projection: non-finite sample");
        std::vector<std::vector<double>> H;
        for (int j = 0; j < n; ++j) H.push_back(hermite_polys(D, xi(j)));
        for (std::size_t k = 0; k < idx.size(); ++k) {
            double h = 1.0;
            for (int j = 0; j < n; ++j) h *= H[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx[k][static_cast<std::size_t>(j)])];
            acc[k] += gv * h;
        }
    }
    for (std::size_t k = 0; k < idx.size(); ++k) out.set(idx[k], acc[k] * scale(idx[k]));
    return out;
}

// Product truncated at `cap`; returns the norm of the discarded part.
double truncated_product(const FockElement& A, const FockElement& B, int cap, FockElement& out) {
    out = FockElement(A.n(), cap);
    FockElement dropped(A.n(), 2 * std::max(A.degree_cap(), B.degree_cap()) + 1);
    for (const auto& [a, ca] : A.coefficients()) {
        for (const auto& [b, cb] : B.coefficients()) {
            MultiIndex s(a.size());
            for (std::size_t j = 0; j < a.size(); ++j) s[j] = a[j] + b[j];
            if (order(s) <= cap) {
                out.add(s, ca * cb);
            } else {
                dropped.add(s, ca * cb);
            }
        }
    }
    return fock_norm(dropped);
}

// Recover coefficients of a polynomial of degree <= D from values on the unit polytorus.
FockElement recover_coefficients(int n, int D, const std::function<cd(const CVector&)>& F) {
    const int K = 2 * (D + 1);
    const auto torus = box_indices(n, K);
    std::vector<cd> values(torus.size());
    for (std::size_t t = 0; t < torus.size(); ++t) {
        CVector z(n);
        for (int j = 0; j < n; ++j) z(j) = std::polar(1.0, 2.0 * kPi * torus[t][static_cast<std::size_t>(j)] / K);
        values[t] = F(z);
    }
    double scale = 0.0;
    for (const cd& v : values) scale = std::max(scale, std::abs(v));
    // Coefficients below the DFT roundoff level are unresolved; keeping them would let the
    // 2^|a| a! weights of the Fock norm amplify noise.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * scale;
    FockElement out(n, D);
    double kept = 0.0, spill = 0.0;
    for (const auto& alpha : box_indices(n, K)) {
        cd c = 0.0;
        for (std::size_t t = 0; t < torus.size(); ++t) {
            double phase = 0.0;
            for (int j = 0; j < n; ++j) phase -= 2.0 * kPi * alpha[static_cast<std::size_t>(j)] * torus[t][static_cast<std::size_t>(j)] / K;
            c += values[t] * std::polar(1.0, phase);
        }
        c /= static_cast<double>(torus.size());
        if (order(alpha) <= D) {
            if (std::abs(c) > floor) out.set(alpha, c);
            kept = std::max(kept, std::abs(c));
        } else {
            spill = std::max(spill, std::abs(c));
        }
    }
    if (spill > 1e-8 * std::max(1.0, kept)) {
        std::ostringstream os;
        os << "coefficient recovery: energy " << spill << " above the degree cap " << D;
        throw NumericalError(os.str());
    }
    return out;
}

}  // namespace

cd fock_inner_quadrature(const FockElement& F, const FockElement& G, int points) {
    if (F.n() != G.n()) throw DomainError("fock_inner_quadrature: dimension mismatch");
    const int n = F.n();
    const QuadratureGrid grid = gauss_hermite_grid(points, 2 * n, std::sqrt(2.0));
    const cd I = integrate(grid, [&](const RVector& x) {
        const CVector w = complex_point(x, n);
        return F(w) * std::conj(G(w));
    });
    return I * std::pow(2.0 * kPi, -n);
}

FockElement bargmann(const RealFunction& f, int n, int degree_cap, int points) {
    // e^{z.xi - z^2/4} = sum_alpha H_alpha(xi) (z/2)^alpha / alpha!
    return hermite_projection(
        [&](const RVector& xi) { return f(xi) * std::exp(0.5 * xi.squaredNorm()); }, n, degree_cap, points,
        [](const MultiIndex& a) { return cd(1.0 / (std::ldexp(1.0, order(a)) * multi_factorial(a))); });
}

FockElement gauss_bargmann(const RealFunction& m, int n, int degree_cap, int points) {
    // e^{i z.xi + z^2/4} = sum_alpha H_alpha(xi) (iz/2)^alpha / alpha!
    return hermite_projection(m, n, degree_cap, points, [](const MultiIndex& a) {
        return std::pow(kI / 2.0, order(a)) / multi_factorial(a);
    });
}

cd gauss_bargmann_inverse(const FockElement& F, const RVector& xi) {
    if (xi.size() != F.n()) throw DomainError("gauss_bargmann_inverse: dimension mismatch");
    const int n = F.n();
    std::vector<std::vector<double>> H;
    for (int j = 0; j < n; ++j) H.push_back(hermite_polys(std::max(F.degree(), 0), xi(j)));
    cd acc = 0.0;
    for (const auto& [alpha, c] : F.coefficients()) {
        double h = 1.0;
        for (int j = 0; j < n; ++j) h *= H[static_cast<std::size_t>(j)][static_cast<std::size_t>(alpha[static_cast<std::size_t>(j)])];
        acc += c * std::pow(-kI, order(alpha)) * h;
    }
    return acc * std::pow(kPi, -0.5 * n);
}

FockElement rho0_apply(const CVector& w, const FockElement& F, double tail_tol) {
    const int n = F.n();
    const int D = F.degree_cap();
    if (w.size() != n) throw DomainError("rho0_apply: dimension mismatch");
    // F(z + w) by binomial expansion, exact within the cap.
    FockElement shifted(n, D);
    for (const auto& [alpha, c] : F.coefficients()) {
        for (const auto& beta : box_indices(n, D + 1)) {
            bool inside = true;
            for (int j = 0; j < n; ++j) inside = inside && beta[static_cast<std::size_t>(j)] <= alpha[static_cast<std::size_t>(j)];
            if (!inside) continue;
            cd term = c;
            for (int j = 0; j < n; ++j) {
                const int a = alpha[static_cast<std::size_t>(j)], b = beta[static_cast<std::size_t>(j)];
                term *= binomial(a, b) * std::pow(w(j), a - b);
            }
            shifted.add(beta, term);
        }
    }
    // e^{-z.conj(w)/2} to degree D
    FockElement ex(n, D);
    for (const auto& beta : graded_indices(n, D)) {
        cd t = 1.0;
        for (int j = 0; j < n; ++j) {
            t *= std::pow(-std::conj(w(j)) / 2.0, beta[static_cast<std::size_t>(j)]) / std::tgamma(beta[static_cast<std::size_t>(j)] + 1.0);
        }
        ex.set(beta, t);
    }
    FockElement out;
    const double dropped = truncated_product(shifted, ex, D, out);
    const double scale = std::exp(-w.squaredNorm() / 4.0);
    const double tail = dropped * scale;
    if (tail > tail_tol * std::max(1.0, fock_norm(F))) {
        std::ostringstream os;
        os << "rho0_apply: truncation tail " << tail << " too large for degree cap " << D;
        throw NumericalError(os.str());
    }
    return out * cd(scale);
}

double abelian_kernel_constant(int n) { return std::pow(2.0 * kPi, n); }

cd s_phi_at(const FockElement& phi, const FockElement& F, const CVector& z, int points, int sign) {
    const int n = F.n();
    if (phi.n() != n || z.size() != n) throw DomainError("s_phi: dimension mismatch");
    // Modulus e^{-|w|^2/2 + Re(z.conj w)/2} is centred at w = z/2.
    GaussianEnvelope env{0.5 * RMatrix::Identity(2 * n, 2 * n), RVector(2 * n)};
    for (int j = 0; j < n; ++j) {
        env.r(j) = 0.5 * z(j).real();
        env.r(n + j) = 0.5 * z(j).imag();
    }
    const QuadratureGrid grid = adapted_grid(env, points);
    return integrate(grid, [&](const RVector& x) {
        const CVector w = complex_point(x, n);
        const CVector arg = z + double(sign) * w.conjugate();
        const cd zw = (z.array() * w.array().conjugate()).sum();
        return F(w) * phi(arg) * std::exp(0.5 * zw - 0.5 * w.squaredNorm());
    });
}

namespace {

FockElement kernel_operator(const FockElement& phi, const FockElement& F, const KernelOptions& opts, int sign) {
    const int D = opts.degree_out >= 0 ? opts.degree_out : std::max(F.degree_cap(), phi.degree_cap());
    return recover_coefficients(F.n(), D, [&](const CVector& z) { return s_phi_at(phi, F, z, opts.points, sign); });
}

}  // namespace

FockElement s_phi(const FockElement& phi, const FockElement& F, const KernelOptions& opts) {
    return kernel_operator(phi, F, opts, -1);
}

FockElement s_tilde_phi(const FockElement& phi, const FockElement& F, const KernelOptions& opts) {
    return kernel_operator(phi, F, opts, +1);
}

FockElement u_rotate(const FockElement& F) {
    FockElement out(F.n(), F.degree_cap());
    for (const auto& [alpha, c] : F.coefficients()) out.set(alpha, c * std::pow(-kI, order(alpha)));
    return out;
}

FockElement u_rotate_inverse(const FockElement& F) {
    FockElement out(F.n(), F.degree_cap());
    for (const auto& [alpha, c] : F.coefficients()) out.set(alpha, c * std::pow(kI, order(alpha)));
    return out;
}

FockElement first_order_action(const FockElement& phi, int j, int sign) {
    const int n = phi.n();
    if (j < 0 || j >= n) throw DomainError("first_order_action: axis out of range");
    if (sign != 1 && sign != -1) throw DomainError("first_order_action: sign must be +1 or -1");
    FockElement out(n, phi.degree_cap() + 1);
    for (const auto& [alpha, c] : phi.coefficients()) {
        const int aj = alpha[static_cast<std::size_t>(j)];
        if (aj > 0) {
            MultiIndex lower = alpha;
            lower[static_cast<std::size_t>(j)] -= 1;
            out.add(lower, double(sign) * aj * c);
        }
        MultiIndex upper = alpha;
        upper[static_cast<std::size_t>(j)] += 1;
        out.add(upper, 0.5 * c);
    }
    return out;
}

FockElement half_coordinate(int n, int degree_cap, int j) {
    if (j < 0 || j >= n) throw DomainError("half_coordinate: axis out of range");
    MultiIndex e(static_cast<std::size_t>(n), 0);
    e[static_cast<std::size_t>(j)] = 1;
    return FockElement::monomial(n, degree_cap, e, 0.5);
}

}  // namespace twf
