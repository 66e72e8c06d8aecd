#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace twf {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cd kI{0.0, 1.0};

// Bad arguments or configuration.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computation ran but its own accuracy check failed.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rank or cluster decisions that the data cannot settle.
class IndeterminateError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

struct ToleranceProfile {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    double svd_rank_threshold = 1e-7;

    void validate() const;
};

using MultiIndex = std::vector<int>;

int order(const MultiIndex& alpha);
double multi_factorial(const MultiIndex& alpha);
// All indices with every component < N, last axis fastest.
std::vector<MultiIndex> box_indices(int n, int N);
// All indices with |alpha| <= D, graded then lexicographic.
std::vector<MultiIndex> graded_indices(int n, int D);

struct QuadratureGrid {
    int dims = 0;
    RMatrix nodes;    // dims x count
    RVector weights;  // count
    // Set for isotropic tensor grids: the 1-D rule each axis uses.
    RVector axis_nodes;
    RVector axis_weights;

    std::size_t size() const { return static_cast<std::size_t>(weights.size()); }
    RVector node(std::size_t i) const { return nodes.col(static_cast<Eigen::Index>(i)); }
};

// Largest grid any constructor will build.
std::size_t node_budget();
void set_node_budget(std::size_t nodes);

// Nodes and weights of the rule for exp(-x^2) on R.
void gauss_hermite_rule(int points, RVector& nodes, RVector& weights);

// Tensor grid for the weight exp(-|x/scale|^2) on R^dims.
QuadratureGrid gauss_hermite_grid(int points_per_axis, int dims, double scale);

// Same nodes with Lebesgue weights, for integrands that carry their own decay.
QuadratureGrid lebesgue_hermite_grid(int points_per_axis, int dims, double scale);

// Quadratic model exp(-x^T A x + r^T x) of the modulus of an integrand.
struct GaussianEnvelope {
    RMatrix A;
    RVector r;

    RVector centre() const;
};

// Recover A and r from the real part of a log-integrand that is exactly
// quadratic in x; throws if A is not positive definite.
GaussianEnvelope fit_envelope(const std::function<double(const RVector&)>& log_modulus, int dims);

// Grid with Lebesgue weights adapted to exp(-x^T A x + r^T x).
// Exact for that envelope times polynomials of degree <= 2p-1 per rotated axis.
QuadratureGrid adapted_grid(const GaussianEnvelope& env, int points_per_axis);

cd integrate(const QuadratureGrid& grid, const std::function<cd(const RVector&)>& f);

// Weighted sum of precomputed node values with the same ordering rules.
cd weighted_sum(const QuadratureGrid& grid, const CVector& values);

CMatrix matrix_exp(const CMatrix& A, double residual_tol = 1e-10);

struct CommutantResult {
    int dimension = 0;
    bool indeterminate = false;
    double gap_ratio = 0.0;
    RVector singular_values;  // descending
};

CommutantResult commutant_dimension(const std::vector<CMatrix>& family,
                                    const ToleranceProfile& tol = {});

struct DerivativeResult {
    cd value;
    double error_estimate = 0.0;
};

using HolomorphicFunction = std::function<cd(const CVector&)>;

DerivativeResult holomorphic_derivative(const HolomorphicFunction& F, const CVector& z0, int j,
                                        double h = 1e-3, double tol = 1e-6);

}  // namespace twf
