#include "twf/hermite.hpp"

#include <cmath>

namespace twf {

HermiteBasisSpec::HermiteBasisSpec(int n_, double lambda_, int cutoff_)
    : n(n_), lambda(lambda_), cutoff(cutoff_) {
    validate();
}

void HermiteBasisSpec::validate() const {
    if (n < 1) throw DomainError("HermiteBasisSpec: n must be positive");
    if (cutoff < 1) throw DomainError("HermiteBasisSpec: cutoff must be positive");
    if (!std::isfinite(lambda) || lambda == 0.0) throw DomainError("HermiteBasisSpec: lambda must be nonzero");
    if (std::pow(double(cutoff), n) > 1e6) throw DomainError("HermiteBasisSpec: basis too large");
}

int HermiteBasisSpec::size() const {
    int s = 1;
    for (int j = 0; j < n; ++j) s *= cutoff;
    return s;
}

std::vector<MultiIndex> HermiteBasisSpec::indices() const { return box_indices(n, cutoff); }

RVector HermiteBasisSpec::eigenvalues() const {
    const auto idx = indices();
    RVector ev(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
        ev(static_cast<Eigen::Index>(i)) = (2.0 * order(idx[i]) + n) * std::abs(lambda);
    }
    return ev;
}

RMatrix lowering_matrix(int N) {
    RMatrix a = RMatrix::Zero(N, N);
    for (int k = 1; k < N; ++k) a(k - 1, k) = std::sqrt(double(k));
    return a;
}

namespace {

// Kronecker product placing `one` on `axis` and identities elsewhere.
CMatrix embed_axis(const CMatrix& one, int axis, int n) {
    const Eigen::Index N = one.rows();
    CMatrix out = CMatrix::Identity(1, 1);
    for (int j = 0; j < n; ++j) {
        const CMatrix f = (j == axis) ? one : CMatrix::Identity(N, N);
        CMatrix next(out.rows() * N, out.cols() * N);
        for (Eigen::Index r = 0; r < out.rows(); ++r) {
            for (Eigen::Index c = 0; c < out.cols(); ++c) next.block(r * N, c * N, N, N) = out(r, c) * f;
        }
        out = std::move(next);
    }
    return out;
}

}  // namespace

LadderMatrices ladder_matrices(const HermiteBasisSpec& spec) {
    spec.validate();
    const double l = std::abs(spec.lambda);
    const RMatrix a = lowering_matrix(spec.cutoff);
    const CMatrix q = ((a + a.transpose()) / std::sqrt(2.0 * l)).cast<cd>();
    const CMatrix d = (std::sqrt(l / 2.0) * (a - a.transpose())).cast<cd>();
    LadderMatrices lm;
    for (int j = 0; j < spec.n; ++j) {
        lm.Q.push_back(embed_axis(q, j, spec.n));
        lm.D.push_back(embed_axis(d, j, spec.n));
    }
    return lm;
}

double hermite_function(int k, double xi) {
    if (k < 0 || k > kMaxHermiteDegree) throw DomainError("hermite_function: degree out of range");
    double hm1 = 0.0;
    double h = std::pow(kPi, -0.25) * std::exp(-0.5 * xi * xi);
    for (int j = 0; j < k; ++j) {
        const double hn = std::sqrt(2.0 / (j + 1)) * xi * h - std::sqrt(double(j) / (j + 1)) * hm1;
        hm1 = h;
        h = hn;
    }
    return h;
}

double scaled_hermite_function(int k, double lambda, double xi) {
    const double l = std::abs(lambda);
    return std::pow(l, 0.25) * hermite_function(k, std::sqrt(l) * xi);
}

double scaled_hermite_function(const MultiIndex& alpha, double lambda, const RVector& xi) {
    if (static_cast<Eigen::Index>(alpha.size()) != xi.size()) throw DomainError("scaled_hermite_function: dimension mismatch");
    double v = 1.0;
    for (std::size_t j = 0; j < alpha.size(); ++j) v *= scaled_hermite_function(alpha[j], lambda, xi(static_cast<Eigen::Index>(j)));
    return v;
}

double hermite_eigenvalue(const MultiIndex& alpha, const HermiteBasisSpec& spec) {
    if (static_cast<int>(alpha.size()) != spec.n) throw DomainError("hermite_eigenvalue: index dimension mismatch");
    for (int a : alpha) {
        if (a < 0 || a >= spec.cutoff) throw DomainError("hermite_eigenvalue: index outside basis");
    }
    return (2.0 * order(alpha) + spec.n) * std::abs(spec.lambda);
}

CMatrix heat_semigroup(double t, const HermiteBasisSpec& spec) {
    if (!(t > 0.0)) throw DomainError("heat_semigroup: t must be positive");
    return spectral_multiplier([t](double s) { return cd(std::exp(-t * s)); }, spec);
}

cd bilinear_square(const CVector& z) { return (z.array() * z.array()).sum(); }

cd heat_kernel(double t, double lambda, const CVector& y, const CVector& v) {
    if (y.size() != v.size() || y.size() == 0) throw DomainError("heat_kernel: dimension mismatch");
    const double lt = lambda * t;
    if (!(t > 0.0) || std::sinh(lt) == 0.0) throw DomainError("heat_kernel: sinh(lambda t) vanishes");
    const int n = static_cast<int>(y.size());
    const double ratio = lambda / std::sinh(lt);
    const double damp = lambda * std::cosh(lt) / std::sinh(lt);
    return std::pow(4.0 * kPi, -n) * std::pow(ratio, n) *
           std::exp(-0.25 * damp * (bilinear_square(y) + bilinear_square(v)));
}

cd laguerre_polynomial(int k, double alpha, cd x) {
    if (k < 0 || k > kMaxHermiteDegree) throw DomainError("laguerre_polynomial: degree out of range");
    cd lm1 = 0.0;
    cd l = 1.0;
    for (int j = 0; j < k; ++j) {
        const cd ln = ((2.0 * j + 1.0 + alpha - x) * l - (j + alpha) * lm1) / double(j + 1);
        lm1 = l;
        l = ln;
    }
    return l;
}

cd laguerre_phi(int k, double lambda, const CVector& x, const CVector& u) {
    if (x.size() != u.size() || x.size() == 0) throw DomainError("laguerre_phi: dimension mismatch");
    if (lambda == 0.0) throw DomainError("laguerre_phi: lambda must be nonzero");
    const int n = static_cast<int>(x.size());
    const cd s = bilinear_square(x) + bilinear_square(u);
    const double l = std::abs(lambda);
    return laguerre_polynomial(k, n - 1.0, 0.5 * l * s) * std::exp(-0.25 * l * s);
}

CMatrix spectral_multiplier(const std::function<cd(double)>& m, const HermiteBasisSpec& spec) {
    const RVector ev = spec.eigenvalues();
    CVector d(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) d(i) = m(ev(i));
    return d.asDiagonal();
}

}  // namespace twf
