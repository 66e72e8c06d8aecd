#pragma once

#include "twf/core_numerics.hpp"
#include "twf/heisenberg.hpp"

#include <map>

namespace twf {

// Polynomial element of the Fock space F(C^n), coefficients of z^alpha for |alpha| <= degree_cap.
class FockElement {
public:
    FockElement() = default;
    FockElement(int n, int degree_cap);

    static FockElement constant(int n, int degree_cap, cd c);
    static FockElement monomial(int n, int degree_cap, const MultiIndex& alpha, cd c = 1.0);

    int n() const { return n_; }
    int degree_cap() const { return degree_cap_; }
    const std::map<MultiIndex, cd>& coefficients() const { return coeffs_; }

    cd coefficient(const MultiIndex& alpha) const;
    void set(const MultiIndex& alpha, cd c);
    void add(const MultiIndex& alpha, cd c);

    cd operator()(const CVector& z) const;
    int degree() const;  // highest |alpha| with a nonzero coefficient, -1 for zero

    FockElement operator+(const FockElement& o) const;
    FockElement operator-(const FockElement& o) const;
    FockElement operator*(cd s) const;

private:
    int n_ = 1;
    int degree_cap_ = 24;
    std::map<MultiIndex, cd> coeffs_;
};

int default_degree_cap(int n);

// ||z^alpha||^2 = 2^{|alpha|} alpha! with ||1|| = 1.
double monomial_norm_sq(const MultiIndex& alpha);

cd fock_inner(const FockElement& F, const FockElement& G);
double fock_norm(const FockElement& F);
// Same inner product by quadrature against c_0 e^{-|w|^2/2}.
cd fock_inner_quadrature(const FockElement& F, const FockElement& G, int points);

// Bf(z) = e^{-z^2/4} int f(xi) e^{-|xi|^2/2} e^{z.xi} dxi, by quadrature against monomial duals.
FockElement bargmann(const RealFunction& f, int n, int degree_cap, int points = 60);

// rho_0(w)F(z) = e^{-|w|^2/4} F(z+w) e^{-z.conj(w)/2}, truncated to the degree cap.
FockElement rho0_apply(const CVector& w, const FockElement& F, double tail_tol = 1e-8);

// Gm(z) = e^{z^2/4} int m(xi) e^{i z.xi} e^{-|xi|^2} dxi
FockElement gauss_bargmann(const RealFunction& m, int n, int degree_cap, int points = 60);
// Pointwise inverse of the Gauss-Bargmann transform on polynomials.
cd gauss_bargmann_inverse(const FockElement& F, const RVector& xi);

struct KernelOptions {
    int points = 40;       // Gauss-Hermite points per real axis
    int degree_out = -1;   // degree cap of the result, defaults to the input cap
};

// S_phi F(z) = int F(w) phi(z - conj w) e^{z.conj(w)/2} e^{-|w|^2/2} dw
FockElement s_phi(const FockElement& phi, const FockElement& F, const KernelOptions& opts = {});
// Same with phi(z + conj w).
FockElement s_tilde_phi(const FockElement& phi, const FockElement& F, const KernelOptions& opts = {});
cd s_phi_at(const FockElement& phi, const FockElement& F, const CVector& z, int points, int sign = -1);

// Constant carried by the unnormalized kernels: S_phi 1 = kappa phi.
double abelian_kernel_constant(int n);

// UF(z) = F(-iz)
FockElement u_rotate(const FockElement& F);
FockElement u_rotate_inverse(const FockElement& F);

// (sign d/dz_j + z_j/2) phi
FockElement first_order_action(const FockElement& phi, int j, int sign);

// Degree-one test function w_j / 2.
FockElement half_coordinate(int n, int degree_cap, int j);

}  // namespace twf
