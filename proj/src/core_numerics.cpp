#include "twf/core_numerics.hpp"

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace twf {

void ToleranceProfile::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || !(svd_rank_threshold > 0.0)) {
        throw DomainError("tolerance profile entries must be strictly positive");
    }
}

int order(const MultiIndex& alpha) {
    return std::accumulate(alpha.begin(), alpha.end(), 0);
}

double multi_factorial(const MultiIndex& alpha) {
    double f = 1.0;
    for (int a : alpha) f *= std::tgamma(a + 1.0);
    return f;
}

std::vector<MultiIndex> box_indices(int n, int N) {
    if (n < 1 || N < 1) throw DomainError("box_indices: n and N must be positive");
    std::vector<MultiIndex> out;
    MultiIndex cur(static_cast<std::size_t>(n), 0);
    while (true) {
        out.push_back(cur);
        int axis = n - 1;
        while (axis >= 0 && ++cur[static_cast<std::size_t>(axis)] == N) {
            cur[static_cast<std::size_t>(axis)] = 0;
            --axis;
        }
        if (axis < 0) break;
    }
    return out;
}

std::vector<MultiIndex> graded_indices(int n, int D) {
    if (n < 1 || D < 0) throw DomainError("graded_indices: bad arguments");
    std::vector<MultiIndex> out;
    for (const auto& a : box_indices(n, D + 1)) {
        if (order(a) <= D) out.push_back(a);
    }
    std::stable_sort(out.begin(), out.end(), [](const MultiIndex& a, const MultiIndex& b) {
        return order(a) < order(b);
    });
    return out;
}

namespace {
std::atomic<std::size_t> g_node_budget{6'000'000};
}

std::size_t node_budget() { return g_node_budget.load(); }
void set_node_budget(std::size_t nodes) {
    if (nodes == 0) throw DomainError("node budget must be positive");
    g_node_budget.store(nodes);
}

void gauss_hermite_rule(int points, RVector& nodes, RVector& weights) {
    if (points < 2) throw DomainError("gauss_hermite_rule: need at least 2 points");
    // Golub-Welsch start, then Newton on the orthonormal recurrence.
    RMatrix J = RMatrix::Zero(points, points);
    for (int k = 1; k < points; ++k) {
        J(k, k - 1) = J(k - 1, k) = std::sqrt(k / 2.0);
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> es(J);
    nodes = es.eigenvalues();
    weights.resize(points);
    const double p0 = std::pow(kPi, -0.25);
    for (int i = 0; i < points; ++i) {
        double x = nodes(i);
        double sumsq = 0.0;
        for (int it = 0; it < 4; ++it) {
            double pm1 = 0.0, p = p0;
            sumsq = p * p;
            for (int k = 0; k < points; ++k) {
                double pn = x * std::sqrt(2.0 / (k + 1)) * p - std::sqrt(double(k) / (k + 1)) * pm1;
                pm1 = p;
                p = pn;
                if (k + 1 < points) sumsq += p * p;
            }
            // p = phi_points(x), pm1 = phi_{points-1}(x)
            double dp = std::sqrt(2.0 * points) * pm1;
            x -= p / dp;
        }
        double pm1 = 0.0, p = p0;
        sumsq = p * p;
        for (int k = 0; k + 1 < points; ++k) {
            double pn = x * std::sqrt(2.0 / (k + 1)) * p - std::sqrt(double(k) / (k + 1)) * pm1;
            pm1 = p;
            p = pn;
            sumsq += p * p;
        }
        nodes(i) = x;
        weights(i) = 1.0 / sumsq;
    }
}

namespace {

std::size_t checked_count(int points, int dims) {
    if (dims < 1) throw DomainError("quadrature: dims must be positive");
    double count = std::pow(static_cast<double>(points), dims);
    if (count > static_cast<double>(node_budget())) {
        std::ostringstream os;
        os << "quadrature grid of " << points << "^" << dims << " nodes exceeds the node budget of "
           << node_budget();
        throw DomainError(os.str());
    }
    return static_cast<std::size_t>(count);
}

// Tensor product of a 1-D rule, last axis fastest.
void tensor_rule(const RVector& x, const RVector& w, int dims, RMatrix& Y, RVector& W) {
    const int p = static_cast<int>(x.size());
    const std::size_t count = checked_count(p, dims);
    Y.resize(dims, static_cast<Eigen::Index>(count));
    W.resize(static_cast<Eigen::Index>(count));
    std::vector<int> idx(static_cast<std::size_t>(dims), 0);
    for (std::size_t c = 0; c < count; ++c) {
        double wt = 1.0;
        for (int d = 0; d < dims; ++d) {
            Y(d, static_cast<Eigen::Index>(c)) = x(idx[static_cast<std::size_t>(d)]);
            wt *= w(idx[static_cast<std::size_t>(d)]);
        }
        W(static_cast<Eigen::Index>(c)) = wt;
        for (int d = dims - 1; d >= 0; --d) {
            if (++idx[static_cast<std::size_t>(d)] < p) break;
            idx[static_cast<std::size_t>(d)] = 0;
        }
    }
}

}  // namespace

QuadratureGrid gauss_hermite_grid(int points_per_axis, int dims, double scale) {
    if (!(scale > 0.0)) throw DomainError("gauss_hermite_grid: scale must be positive");
    RVector x, w;
    gauss_hermite_rule(points_per_axis, x, w);
    QuadratureGrid g;
    g.dims = dims;
    tensor_rule(x * scale, w * scale, dims, g.nodes, g.weights);
    g.axis_nodes = x * scale;
    g.axis_weights = w * scale;
    return g;
}

QuadratureGrid lebesgue_hermite_grid(int points_per_axis, int dims, double scale) {
    QuadratureGrid g = gauss_hermite_grid(points_per_axis, dims, scale);
    for (Eigen::Index c = 0; c < g.nodes.cols(); ++c) {
        g.weights(c) *= std::exp(g.nodes.col(c).squaredNorm() / (scale * scale));
    }
    for (Eigen::Index i = 0; i < g.axis_nodes.size(); ++i) {
        g.axis_weights(i) *= std::exp(g.axis_nodes(i) * g.axis_nodes(i) / (scale * scale));
    }
    return g;
}

RVector GaussianEnvelope::centre() const { return A.ldlt().solve(r) / 2.0; }

GaussianEnvelope fit_envelope(const std::function<double(const RVector&)>& log_modulus, int dims) {
    GaussianEnvelope env;
    env.A = RMatrix::Zero(dims, dims);
    env.r = RVector::Zero(dims);
    const RVector zero = RVector::Zero(dims);
    const double f0 = log_modulus(zero);
    std::vector<double> fp(static_cast<std::size_t>(dims)), fm(static_cast<std::size_t>(dims));
    for (int i = 0; i < dims; ++i) {
        RVector e = zero;
        e(i) = 1.0;
        fp[static_cast<std::size_t>(i)] = log_modulus(e);
        fm[static_cast<std::size_t>(i)] = log_modulus(-e);
        env.A(i, i) = -(fp[static_cast<std::size_t>(i)] + fm[static_cast<std::size_t>(i)] - 2.0 * f0) / 2.0;
        env.r(i) = (fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) / 2.0;
    }
    for (int i = 0; i < dims; ++i) {
        for (int j = i + 1; j < dims; ++j) {
            RVector e = zero;
            e(i) = 1.0;
            e(j) = 1.0;
            const double fij = log_modulus(e);
            env.A(i, j) = env.A(j, i) =
                -(fij - f0 - env.r(i) - env.r(j) + env.A(i, i) + env.A(j, j)) / 2.0;
        }
    }
    if (!env.A.allFinite() || !env.r.allFinite()) throw NumericalError("fit_envelope: non-finite exponent");
    Eigen::SelfAdjointEigenSolver<RMatrix> es(env.A);
    if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, es.eigenvalues().maxCoeff())) {
        throw NumericalError("fit_envelope: integrand is not Gaussian-decaying");
    }
    return env;
}

QuadratureGrid adapted_grid(const GaussianEnvelope& env, int points_per_axis) {
    const int dims = static_cast<int>(env.A.rows());
    RVector x, w;
    gauss_hermite_rule(points_per_axis, x, w);
    RMatrix Y;
    RVector W;
    tensor_rule(x, w, dims, Y, W);
    Eigen::LLT<RMatrix> llt(env.A);
    if (llt.info() != Eigen::Success) throw NumericalError("adapted_grid: envelope not positive definite");
    const RMatrix L = llt.matrixL();
    const RMatrix LinvT = L.triangularView<Eigen::Lower>().solve(RMatrix::Identity(dims, dims)).transpose();
    const double logdet = L.diagonal().array().log().sum();
    QuadratureGrid g;
    g.dims = dims;
    g.nodes = (LinvT * Y).colwise() + env.centre();
    g.weights.resize(W.size());
    for (Eigen::Index c = 0; c < W.size(); ++c) {
        g.weights(c) = std::exp(std::log(W(c)) + Y.col(c).squaredNorm() - logdet);
    }
    return g;
}

cd weighted_sum(const QuadratureGrid& grid, const CVector& values) {
    if (static_cast<std::size_t>(values.size()) != grid.size()) {
        throw DomainError("weighted_sum: value count does not match node count");
    }
    cd acc = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const cd v = values(i);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw NumericalError("integrate: non-finite integrand value at node " + std::to_string(i));
        }
        acc += grid.weights(i) * v;
    }
    return acc;
}

cd integrate(const QuadratureGrid& grid, const std::function<cd(const RVector&)>& f) {
    CVector values(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) values(static_cast<Eigen::Index>(i)) = f(grid.node(i));
    return weighted_sum(grid, values);
}

namespace {

CMatrix exp_scaled(const CMatrix& A) {
    const Eigen::Index n = A.rows();
    const double norm = A.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm > 0.25) s = static_cast<int>(std::ceil(std::log2(norm / 0.25)));
    const CMatrix B = A / std::ldexp(1.0, s);
    CMatrix sum = CMatrix::Identity(n, n);
    CMatrix term = CMatrix::Identity(n, n);
    for (int k = 1; k < 40; ++k) {
        term = term * B / static_cast<double>(k);
        sum += term;
        if (term.cwiseAbs().maxCoeff() <= 1e-18 * sum.cwiseAbs().maxCoeff()) break;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

}  // namespace

CMatrix matrix_exp(const CMatrix& A, double residual_tol) {
    if (A.rows() != A.cols()) throw DomainError("matrix_exp: matrix must be square");
    if (!A.allFinite()) throw DomainError("matrix_exp: non-finite input");
    const CMatrix E = exp_scaled(A);
    const CMatrix Einv = exp_scaled(-A);
    const double scale = std::max(1.0, E.norm() * Einv.norm() / std::sqrt(double(A.rows())));
    const double residual =
        (E * Einv - CMatrix::Identity(A.rows(), A.cols())).norm() / scale;
    if (!(residual <= residual_tol)) {
        std::ostringstream os;
        os << "matrix_exp: residual " << residual << " exceeds " << residual_tol;
        throw NumericalError(os.str());
    }
    return E;
}

namespace {

void accumulate_kron(CMatrix& G, const CMatrix& X, const CMatrix& Y, cd coeff) {
    const Eigen::Index d = X.rows();
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const cd x = coeff * X(i, j);
            if (x == cd(0.0)) continue;
            G.block(i * d, j * d, d, d) += x * Y;
        }
    }
}

RVector hermitian_eigenvalues(CMatrix G) {
    const lapack_int n = static_cast<lapack_int>(G.rows());
    RVector w(n);
    const lapack_int info =
        LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'U', n, G.data(), n, w.data());
    if (info != 0) throw NumericalError("commutant_dimension: eigenvalue solver failed");
    return w;
}

}  // namespace

CommutantResult commutant_dimension(const std::vector<CMatrix>& family, const ToleranceProfile& tol) {
    tol.validate();
    if (family.empty()) throw DomainError("commutant_dimension: empty family");
    const Eigen::Index d = family.front().rows();
    for (const auto& A : family) {
        if (A.rows() != d || A.cols() != d) throw DomainError("commutant_dimension: matrices must be square of equal size");
    }
    const Eigen::Index dd = d * d;
    // Gram matrix of the stacked map X -> X A - A X in column-major vec form:
    // L = A^T (x) I - I (x) A, L^H L = (conj(A) A^T) (x) I - conj(A) (x) A - A^T (x) A^H + I (x) A^H A.
    CMatrix G = CMatrix::Zero(dd, dd);
    CMatrix left = CMatrix::Zero(d, d);
    CMatrix right = CMatrix::Zero(d, d);
    const CMatrix I = CMatrix::Identity(d, d);
    for (const auto& A : family) {
        left += A.conjugate() * A.transpose();
        right += A.adjoint() * A;
        accumulate_kron(G, A.conjugate(), A, -1.0);
        accumulate_kron(G, A.transpose(), A.adjoint(), -1.0);
    }
    accumulate_kron(G, left, I, 1.0);
    accumulate_kron(G, I, right, 1.0);

    RVector ev = hermitian_eigenvalues(G);
    CommutantResult res;
    res.singular_values.resize(dd);
    for (Eigen::Index i = 0; i < dd; ++i) {
        res.singular_values(i) = std::sqrt(std::max(0.0, ev(dd - 1 - i)));
    }
    const double smax = res.singular_values(0);
    if (smax == 0.0) {
        res.dimension = static_cast<int>(dd);
        res.gap_ratio = std::numeric_limits<double>::infinity();
        return res;
    }
    const double thr = tol.svd_rank_threshold * smax;
    Eigen::Index rank = 0;
    while (rank < dd && res.singular_values(rank) > thr) ++rank;
    res.dimension = static_cast<int>(dd - rank);
    if (rank == dd) {
        res.gap_ratio = res.singular_values(dd - 1) / thr;
    } else {
        const double below = res.singular_values(rank);
        const double above = res.singular_values(rank - 1);
        res.gap_ratio = below > 0.0 ? above / below : std::numeric_limits<double>::infinity();
    }
    res.indeterminate = res.gap_ratio < 10.0;
    return res;
}

DerivativeResult holomorphic_derivative(const HolomorphicFunction& F, const CVector& z0, int j,
                                        double h, double tol) {
    if (j < 0 || j >= z0.size()) throw DomainError("holomorphic_derivative: axis out of range");
    if (!(h > 1e-8 && h < 1.0)) throw DomainError("holomorphic_derivative: step outside [1e-8, 1)");
    auto central = [&](double step) {
        CVector zp = z0, zm = z0;
        zp(j) += step;
        zm(j) -= step;
        return (F(zp) - F(zm)) / (2.0 * step);
    };
    const cd d1 = central(h);
    const cd d2 = central(h / 2.0);
    DerivativeResult out;
    out.value = (4.0 * d2 - d1) / 3.0;
    out.error_estimate = std::abs(d1 - d2) / 3.0;
    if (out.error_estimate > tol * std::max(1.0, std::abs(out.value))) {
        std::ostringstream os;
        os << "holomorphic_derivative: Richardson estimate " << out.error_estimate << " exceeds tolerance";
        throw NumericalError(os.str());
    }
    return out;
}

}  // namespace twf
