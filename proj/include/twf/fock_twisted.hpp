#pragma once

#include "twf/core_numerics.hpp"
#include "twf/heisenberg.hpp"
#include "twf/hermite.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace twf {

// Twisted operations reject |lambda| below this (coth conditioning).
inline constexpr double kMinTwistedLambda = 1e-3;

void check_twisted_lambda(double lambda);

// Ladder coordinates of pi_lambda(-z,-w) = exp(alpha a^+ - beta a) on each axis.
void ladder_coordinates(double lambda, const CVector& z, const CVector& w, CVector& alpha, CVector& beta);

// Function on C^n x C^n stored as exp(log_part) * poly_part. The log part carries every
// Gaussian and linear exponent so quadrature can adapt its nodes to the real part.
struct TwistedFunction {
    int n = 1;
    std::function<cd(const CVector&, const CVector&)> log_part;
    std::function<cd(const CVector&, const CVector&)> poly_part;

    cd operator()(const CVector& z, const CVector& w) const { return std::exp(log_part(z, w)) * poly_part(z, w); }
};

TwistedFunction constant_function(int n, cd c);
TwistedFunction scaled(const TwistedFunction& F, cd c);
TwistedFunction product(const TwistedFunction& F, const TwistedFunction& G);
TwistedFunction sum(const TwistedFunction& F, const TwistedFunction& G);  // requires equal log parts

// Pointwise evaluator of G_lambda(T): monomial coefficients in (alpha, beta) precomputed once.
class GcalEvaluator {
public:
    GcalEvaluator(double lambda, int n, const CMatrix& T);

    int n() const { return n_; }
    double lambda() const { return lambda_; }
    cd log_part(const CVector& z, const CVector& w) const;
    cd poly_part(const CVector& z, const CVector& w) const;
    cd operator()(const CVector& z, const CVector& w) const;

    // Rows run over the alpha exponents in row_box(), columns over the beta exponents in col_box().
    const CMatrix& coefficients() const { return q_; }
    const std::vector<MultiIndex>& alpha_exponents() const { return pbox_; }
    const std::vector<MultiIndex>& beta_exponents() const { return qbox_; }

private:
    double lambda_;
    int n_;
    CMatrix q_;
    std::vector<MultiIndex> pbox_, qbox_;
    MultiIndex pext_, qext_;
};

// F = G_lambda(T), stored by its Hilbert-Schmidt representative.
class TwistedFockElement {
public:
    TwistedFockElement() = default;
    TwistedFockElement(double lambda, int n, CMatrix T);

    double lambda() const { return lambda_; }
    int n() const { return n_; }
    int cutoff() const { return cutoff_; }
    const CMatrix& T() const { return T_; }

    cd operator()(const CVector& z, const CVector& w) const { return eval_->operator()(z, w); }
    const GcalEvaluator& evaluator() const { return *eval_; }
    TwistedFunction function() const;

private:
    double lambda_ = 1.0;
    int n_ = 1;
    int cutoff_ = 0;
    CMatrix T_;
    std::shared_ptr<const GcalEvaluator> eval_;
};

// Zero-pad a representative to per-axis cutoff W.
CMatrix pad_representative(const CMatrix& T, int n, int W);
int representative_cutoff(const CMatrix& T, int n);

// c_lambda e^{lambda Im(z.conj w)} e^{-(lambda coth lambda)/2 |(z,w)|^2}, here with c_lambda = 1.
double weight_shape(double lambda, const CVector& z, const CVector& w);

struct CalibrationConstants {
    double c_lambda = 0.0;     // makes G_lambda isometric
    double d_lambda = 0.0;     // makes d_lambda G_lambda o pi_lambda isometric on L^2(R^{2n})
    double weight_mass = 0.0;  // integral of the calibrated weight
    double check_error = 0.0;  // disagreement of the second calibration element
};

// Quadrature calibration; throws NumericalError if the second element disagrees by > 1e-4.
CalibrationConstants calibrate(double lambda, int n, int points = 24);
// Cached calibration per (lambda, n).
const CalibrationConstants& calibration(double lambda, int n);

double weight(double lambda, const CVector& z, const CVector& w);

// Closed forms used only as oracles.
double analytic_c_lambda(double lambda, int n);
double analytic_weight_mass(double lambda, int n);

// Real coordinates (Re z, Im z, Re w, Im w) of R^{4n} to (z, w).
void split_point(const RVector& x, int n, CVector& z, CVector& w);

// Integral over C^{2n} of exp(log_part) * poly_part with nodes adapted to Re log_part.
cd integrate_split(int n, const std::function<cd(const CVector&, const CVector&)>& log_part,
                   const std::function<cd(const CVector&, const CVector&)>& poly_part, int points);

// Gram matrix <G T_i, G T_j> in F^lambda by quadrature against the calibrated weight.
CMatrix gram_quadrature(double lambda, int n, const std::vector<CMatrix>& Ts, int points,
                        std::size_t chunk = 4096);

// Inner product of two pointwise functions against the calibrated weight.
cd twisted_inner_quadrature(double lambda, const TwistedFunction& F, const TwistedFunction& G, int points);

// Representative of G_lambda(T).
TwistedFockElement gcal(const CMatrix& T, double lambda, int n);
// Stored representative.
const CMatrix& gcal_adjoint(const TwistedFockElement& F);
// Representative of a pointwise function by pairing with the images of matrix units.
CMatrix gcal_adjoint_pointwise(const TwistedFunction& F, double lambda, const HermiteBasisSpec& spec, int points = 20);

// Diagonal e^{-H(lambda)/2} on the basis.
CMatrix half_heat(double lambda, int n, int cutoff);

struct AlgebraElement {
    TwistedFockElement phi;
    CMatrix M;
    double norm() const;  // operator norm of M
};

// phi = G_lambda(e^{-H/2} M)
AlgebraElement g_lambda(const CMatrix& M, double lambda, int n);
// M recovered from phi through the invertible e^{-H/2} factor.
CMatrix g_lambda_adjoint(const TwistedFockElement& phi);

// Exact representative of the constant function 1.
CMatrix constant_representative(double lambda, int n, int cutoff);

// Operator-side rho_lambda(g); the result lives on a padded cutoff large enough for the
// displaced tail, and NumericalError reports when that cap is exceeded.
struct RhoOptions {
    double tail_tol = 1e-13;
    int max_cutoff = 200;
};
TwistedFockElement rho_apply(const TwistedElement& g, const TwistedFockElement& F, const RhoOptions& opts = {});
// Pointwise rho_lambda(g)F for any pointwise F.
TwistedFunction rho_pointwise(double lambda, const TwistedElement& g, const TwistedFunction& F);

// Matrices of rho_lambda(g) compressed to the leading cutoff^n block: T -> K D1 T D2.
struct RhoFactors {
    cd scalar;
    CMatrix left;
    CMatrix right;
};
RhoFactors rho_factors(double lambda, const TwistedElement& g, int n, int cutoff);
// The compressed action as a matrix on vec(T) (column-major).
CMatrix rho_compressed(double lambda, const TwistedElement& g, int n, int cutoff);

// Largest HS-relative residual of rho(g)rho(h)F - rho(gh)F over the test elements.
double representation_residual(const TwistedElement& g, const TwistedElement& h,
                               const std::vector<TwistedFockElement>& tests);

// Relative residual of the composition law e^{...} rho(a+a', b+b') with pointwise evaluation.
double composition_law_residual(double lambda, const TwistedElement& g, const TwistedElement& h,
                                const TwistedFockElement& F, const std::vector<std::pair<CVector, CVector>>& points);

// S_phi F = G_lambda(G_lambda^* F o M), both padded to the larger cutoff.
TwistedFockElement s_phi_twisted(const AlgebraElement& phi, const TwistedFockElement& F);

// Kernel operator constant: the pointwise kernel operators equal kernel_constant * s_phi_twisted.
double twisted_kernel_constant(double lambda, int n);
// Factor relating the operator with S_phi 1 = phi to the composition form.
double unit_operator_constant(double lambda, int n);

struct KernelPointOptions {
    int points = 14;  // nodes per real axis
    int sign = -1;    // -1: phi(z - conj a, w - conj b); +1: phi(z + conj a, w + conj b)
};
// Kernel integral against the calibrated weight at one point.
cd kernel_apply_at(double lambda, const TwistedFunction& phi, const TwistedFunction& F, const CVector& z,
                   const CVector& w, const KernelPointOptions& opts = {});

// The tilde operator as a pointwise function (kernel quadrature with phi(z + conj a, w + conj b)).
TwistedFunction s_tilde_twisted(double lambda, const TwistedFunction& phi, const TwistedFunction& F, int points = 14);

// UF(z,w) = F(-iz,-iw) and its inverse.
TwistedFunction u_rotate_twisted(const TwistedFunction& F);
TwistedFunction u_rotate_twisted_inverse(const TwistedFunction& F);

// Matrix of phi * psi: G^*(phi) G^*(psi).
AlgebraElement algebra_mul(const AlgebraElement& phi, const AlgebraElement& psi);

// M = m(H(lambda)) in the commutative subalgebra.
AlgebraElement a0_element(const std::function<cd(double)>& m, double lambda, const HermiteBasisSpec& spec);
// Laguerre series sum_k m((2k+n)|lambda|) e^{-2t(2k+n)|lambda|} phi_k(z,w) scaled by (2 pi)^{-n}|lambda|^n;
// with_heat_factor multiplies by p_1(z,w)^{-1}.
cd a0_series(const std::function<cd(double)>& m, double t_param, double lambda, int n, int kmax, const CVector& z,
             const CVector& w, bool with_heat_factor);

// max |phi - integral of phi against the reproducing kernel and unit-mass w_{-lambda}| over the points.
// kernel_sign = -1 flips the oscillating factor (negative control).
double reproduce_residual(const AlgebraElement& phi, const std::vector<std::pair<CVector, CVector>>& points,
                          int quad_points = 14, int kernel_sign = 1);

enum class ZetaKind { ZType, WType };
// (lambda/2)(coth(lambda) z_j - i w_j) or (lambda/2)(coth(lambda) w_j + i z_j)
TwistedFunction zeta_function(int n, int j, ZetaKind kind, double lambda);
// Exact representative built from the multiplication maps on the given cutoff.
CMatrix zeta_representative(int n, int j, ZetaKind kind, double lambda, int cutoff);

struct FirstOrderResidual {
    int axis = 0;
    ZetaKind kind = ZetaKind::ZType;
    double s_residual = 0.0;        // |S zeta - (-d phi + zeta phi)|
    double s_tilde_residual = 0.0;  // |S~ zeta - (d phi + zeta phi)|
    double derivative_gap = 0.0;    // |S~ zeta - S zeta| from the two kernels
};

struct FirstOrderOptions {
    int quad_points = 14;
    double h = 1e-3;
};
// Maximum residuals over the sample points, per axis and kind; phi given pointwise.
std::vector<FirstOrderResidual> first_order_relations(double lambda, const TwistedFunction& phi,
                                                      const std::vector<std::pair<CVector, CVector>>& points,
                                                      const FirstOrderOptions& opts = {});

// Invariant subspace V = {T M} of a projection M; basis in the padded-free truncation.
struct InvariantSubspace {
    double lambda = 1.0;
    int n = 1;
    int cutoff = 0;
    CMatrix projection;            // M
    std::vector<CMatrix> basis;    // orthonormal representatives spanning {T M}
};

InvariantSubspace invariant_range(const CMatrix& M, double lambda, int n, double tol = 1e-10);

struct CertificateResult {
    int dimension = 0;
    bool indeterminate = false;
    double gap_ratio = 0.0;
    double invariance_residual = 0.0;
};

// Commutant dimension of rho restricted to V over the sample; throws DomainError if V is not
// invariant under some sampled element.
CertificateResult irreducibility_certificate(const InvariantSubspace& V, const std::vector<TwistedElement>& sample,
                                             double invariance_tol = 1e-10, const ToleranceProfile& tol = {});

// Commutant dimension of rho compressed to the full truncated space.
CommutantResult full_space_commutant(double lambda, int n, int cutoff, const std::vector<TwistedElement>& sample,
                                     const ToleranceProfile& tol = {});

// Fixed-seed sample: +-1/2 coordinates (real or imaginary per class) plus random points.
enum class SampleClass { Real, Imaginary, Full };
std::vector<TwistedElement> certificate_sample(int n, SampleClass cls, unsigned seed = 7);

struct SpectralSummand {
    cd eigenvalue;
    int rank = 0;
    CMatrix projection;
    std::vector<InvariantSubspace> irreducibles;  // rank-one pieces
};

// Spectral projections of a normal M (nonzero clusters), each split into rank-one pieces.
std::vector<SpectralSummand> decompose(const CMatrix& M, double lambda, int n, double cluster_tol = 1e-8);

}  // namespace twf
