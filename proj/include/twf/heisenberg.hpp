#pragma once

#include "twf/core_numerics.hpp"
#include "twf/hermite.hpp"

#include <functional>

namespace twf {

// Element (a, b, t) of the complexified group with the lambda-twisted cocycle.
struct TwistedElement {
    CVector a;
    CVector b;
    double t = 0.0;

    static TwistedElement identity(int n);
    int n() const { return static_cast<int>(a.size()); }
    void validate() const;
};

TwistedElement twisted_mul(double lambda, const TwistedElement& g, const TwistedElement& h);
TwistedElement twisted_inverse(double lambda, const TwistedElement& g);
// The lambda -> 0 law: t + t' + Im(a.conj(a') + b.conj(b'))/2.
TwistedElement complex_heisenberg_mul(const TwistedElement& g, const TwistedElement& h);

// Real Heisenberg group: (x,y,t)(u,v,s) = (x+u, y+v, t+s+(u.y - x.v)/2).
struct HeisenbergElement {
    RVector x;
    RVector y;
    double t = 0.0;
};

HeisenbergElement heisenberg_mul(const HeisenbergElement& g, const HeisenbergElement& h);

using RealFunction = std::function<cd(const RVector&)>;

// pi_lambda(x,u,t) f(xi) = e^{i lambda t} e^{i lambda (x.xi + x.u/2)} f(xi + u)
RealFunction schrodinger_apply(double lambda, const RVector& x, const RVector& u, double t, RealFunction f);

struct SchrodingerOptions {
    double tolerance = 1e-9;  // entrywise change allowed when the working size doubles
};

// Matrix of pi_lambda(z,w,0) in the scaled Hermite basis, from truncated generator exponentials.
CMatrix schrodinger_matrix(double lambda, const CVector& z, const CVector& w, const HermiteBasisSpec& spec,
                           const SchrodingerOptions& opts = {});

// Per-axis trust radius for complex arguments.
double trust_radius(const HermiteBasisSpec& spec);

struct SampledPlaneFunction {
    QuadratureGrid grid;  // Lebesgue weights over R^{2n}, nodes ordered (x, u)
    CVector values;
};

SampledPlaneFunction sample_plane(const QuadratureGrid& grid, const RealFunction& f);

// pi_lambda(f) = int f(x,u) pi_lambda(x,u) dx du
CMatrix weyl_transform(double lambda, const SampledPlaneFunction& f, const HermiteBasisSpec& spec);

// tau(a,b) g(x,u) = g(x-a, u-b) e^{-i lambda/2 (u.a - x.b)}
RealFunction twisted_translation(double lambda, const RVector& a, const RVector& b, RealFunction f);

// f *_lambda g (x,u) = int f(x-a, u-b) g(a,b) e^{i lambda/2 (u.a - x.b)} da db over `grid`.
RealFunction twisted_convolution(double lambda, RealFunction f, RealFunction g, const QuadratureGrid& grid);

// Fraction of weighted mass on the outermost nodes of a tensor grid.
double boundary_fraction(const QuadratureGrid& grid, const CVector& values);

}  // namespace twf
