#pragma once

#include "twf/core_numerics.hpp"

#include <functional>
#include <vector>

namespace twf {

// Truncated Hermite basis of L^2(R^n) scaled to H(lambda) = -Delta + lambda^2 |x|^2.
struct HermiteBasisSpec {
    int n = 1;
    double lambda = 1.0;
    int cutoff = 16;

    HermiteBasisSpec() = default;
    HermiteBasisSpec(int n_, double lambda_, int cutoff_);

    void validate() const;
    int size() const;  // cutoff^n
    std::vector<MultiIndex> indices() const;
    RVector eigenvalues() const;
};

struct LadderMatrices {
    std::vector<CMatrix> Q;  // multiplication by x_j
    std::vector<CMatrix> D;  // d/dx_j
};

LadderMatrices ladder_matrices(const HermiteBasisSpec& spec);

// Annihilation operator on the first N Hermite functions.
RMatrix lowering_matrix(int N);

inline constexpr int kMaxHermiteDegree = 1024;

double hermite_function(int k, double xi);
// h_k^lambda(xi) = |lambda|^{1/4} h_k(sqrt|lambda| xi)
double scaled_hermite_function(int k, double lambda, double xi);
double scaled_hermite_function(const MultiIndex& alpha, double lambda, const RVector& xi);

double hermite_eigenvalue(const MultiIndex& alpha, const HermiteBasisSpec& spec);

CMatrix heat_semigroup(double t, const HermiteBasisSpec& spec);

// Holomorphic heat kernel of the special Hermite operator; squares are bilinear.
cd heat_kernel(double t, double lambda, const CVector& y, const CVector& v);

cd laguerre_polynomial(int k, double alpha, cd x);

cd laguerre_phi(int k, double lambda, const CVector& x, const CVector& u);

CMatrix spectral_multiplier(const std::function<cd(double)>& m, const HermiteBasisSpec& spec);

// Bilinear square sum_j z_j^2.
cd bilinear_square(const CVector& z);

}  // namespace twf
