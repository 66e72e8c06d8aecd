#include "twf/heisenberg.hpp"

#include <cmath>
#include <sstream>

namespace twf {

TwistedElement TwistedElement::identity(int n) {
    return TwistedElement{CVector::Zero(n), CVector::Zero(n), 0.0};
}

void TwistedElement::validate() const {
    if (a.size() != b.size() || a.size() == 0) throw DomainError("TwistedElement: a and b must have equal positive length");
    if (!a.allFinite() || !b.allFinite() || !std::isfinite(t)) throw DomainError("TwistedElement: non-finite coordinates");
}

namespace {

cd dotc(const CVector& u, const CVector& v) {  // sum u_j conj(v_j)
    return (u.array() * v.array().conjugate()).sum();
}

}  // namespace

TwistedElement twisted_mul(double lambda, const TwistedElement& g, const TwistedElement& h) {
    g.validate();
    h.validate();
    if (g.n() != h.n()) throw DomainError("twisted_mul: dimension mismatch");
    const double coth = std::cosh(lambda) / std::sinh(lambda);
    const double cross = (dotc(g.b, h.a) - dotc(g.a, h.b)).real();
    const double sym = (dotc(g.a, h.a) + dotc(g.b, h.b)).imag();
    // (lambda/2) coth(lambda) tends to 1/2 as lambda -> 0.
    const double half_c = (lambda == 0.0) ? 0.5 : 0.5 * lambda * coth;
    return TwistedElement{g.a + h.a, g.b + h.b, g.t + h.t - 0.5 * lambda * cross + half_c * sym};
}

TwistedElement twisted_inverse(double, const TwistedElement& g) {
    g.validate();
    return TwistedElement{-g.a, -g.b, -g.t};
}

TwistedElement complex_heisenberg_mul(const TwistedElement& g, const TwistedElement& h) {
    return twisted_mul(0.0, g, h);
}

HeisenbergElement heisenberg_mul(const HeisenbergElement& g, const HeisenbergElement& h) {
    if (g.x.size() != h.x.size() || g.y.size() != h.y.size() || g.x.size() != g.y.size()) {
        throw DomainError("heisenberg_mul: dimension mismatch");
    }
    return HeisenbergElement{g.x + h.x, g.y + h.y, g.t + h.t + 0.5 * (h.x.dot(g.y) - g.x.dot(h.y))};
}

RealFunction schrodinger_apply(double lambda, const RVector& x, const RVector& u, double t, RealFunction f) {
    if (x.size() != u.size()) throw DomainError("schrodinger_apply: dimension mismatch");
    return [=](const RVector& xi) {
        if (xi.size() != x.size()) throw DomainError("schrodinger_apply: point dimension mismatch");
        const double phase = lambda * (t + x.dot(xi) + 0.5 * x.dot(u));
        return std::exp(kI * phase) * f(xi + u);
    };
}

namespace {

// Spectral data of the truncated one-axis generators at working size W.
struct AxisGenerators {
    RMatrix V;      // eigenvectors of the position matrix
    RVector theta;  // its eigenvalues
    CMatrix U;      // eigenvectors of -i d/dx
    RVector mu;     // its eigenvalues
};

AxisGenerators axis_generators(double lambda, int W) {
    const double l = std::abs(lambda);
    const RMatrix a = lowering_matrix(W);
    const RMatrix q = (a + a.transpose()) / std::sqrt(2.0 * l);
    const CMatrix h = (-kI) * (std::sqrt(l / 2.0) * (a - a.transpose())).cast<cd>();
    Eigen::SelfAdjointEigenSolver<RMatrix> eq(q);
    Eigen::SelfAdjointEigenSolver<CMatrix> eh(h);
    return AxisGenerators{eq.eigenvectors(), eq.eigenvalues(), eh.eigenvectors(), eh.eigenvalues()};
}

CMatrix axis_matrix(double lambda, cd z, cd w, const AxisGenerators& g) {
    const CVector pz = (kI * lambda * z * g.theta.cast<cd>()).array().exp();
    const CVector pw = (kI * w * g.mu.cast<cd>()).array().exp();
    const CMatrix P = g.V.cast<cd>() * pz.asDiagonal() * g.V.transpose().cast<cd>();
    const CMatrix R = g.U * pw.asDiagonal() * g.U.adjoint();
    return std::exp(kI * lambda * z * w / 2.0) * P * R;
}

CMatrix kron(const CMatrix& A, const CMatrix& B) {
    CMatrix out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
    return out;
}

void check_converged(const CMatrix& coarse, const CMatrix& fine, double tol, const char* who) {
    const double scale = std::max(1.0, fine.cwiseAbs().maxCoeff());
    const double change = (coarse - fine).cwiseAbs().maxCoeff();
    if (!(change <= tol * scale)) {
        std::ostringstream os;
        os << who << ": truncation doubling changed the leading block by " << change;
        throw NumericalError(os.str());
    }
}

}  // namespace

double trust_radius(const HermiteBasisSpec& spec) { return std::sqrt(double(spec.cutoff)) / 4.0; }

CMatrix schrodinger_matrix(double lambda, const CVector& z, const CVector& w, const HermiteBasisSpec& spec,
                           const SchrodingerOptions& opts) {
    spec.validate();
    if (lambda != spec.lambda) throw DomainError("schrodinger_matrix: lambda differs from the basis lambda");
    if (z.size() != spec.n || w.size() != spec.n) throw DomainError("schrodinger_matrix: argument dimension mismatch");
    if (!z.allFinite() || !w.allFinite()) throw DomainError("schrodinger_matrix: non-finite argument");
    const int N = spec.cutoff;
    const AxisGenerators g1 = axis_generators(lambda, 2 * N + 8);
    const AxisGenerators g2 = axis_generators(lambda, 4 * N + 16);
    CMatrix out = CMatrix::Identity(1, 1);
    for (int j = 0; j < spec.n; ++j) {
        const CMatrix coarse = axis_matrix(lambda, z(j), w(j), g1).topLeftCorner(N, N);
        const CMatrix fine = axis_matrix(lambda, z(j), w(j), g2).topLeftCorner(N, N);
        check_converged(coarse, fine, opts.tolerance, "schrodinger_matrix");
        out = kron(out, fine);
    }
    return out;
}

SampledPlaneFunction sample_plane(const QuadratureGrid& grid, const RealFunction& f) {
    SampledPlaneFunction s{grid, CVector(static_cast<Eigen::Index>(grid.size()))};
    for (std::size_t i = 0; i < grid.size(); ++i) s.values(static_cast<Eigen::Index>(i)) = f(grid.node(i));
    return s;
}

double boundary_fraction(const QuadratureGrid& grid, const CVector& values) {
    if (grid.axis_nodes.size() == 0) return 0.0;
    const double lo = grid.axis_nodes.minCoeff();
    const double hi = grid.axis_nodes.maxCoeff();
    double edge = 0.0, total = 0.0;
    for (Eigen::Index c = 0; c < values.size(); ++c) {
        const double m = std::abs(grid.weights(c) * values(c));
        total += m;
        bool on_edge = false;
        for (int d = 0; d < grid.dims; ++d) {
            if (grid.nodes(d, c) == lo || grid.nodes(d, c) == hi) on_edge = true;
        }
        if (on_edge) edge += m;
    }
    return total > 0.0 ? edge / total : 0.0;
}

namespace {

CMatrix weyl_tensor_1d(double lambda, const SampledPlaneFunction& f, int W, int N) {
    const AxisGenerators g = axis_generators(lambda, W);
    const RVector& nodes = f.grid.axis_nodes;
    const Eigen::Index p = nodes.size();
    CMatrix C(p, p);
    for (Eigen::Index a = 0; a < p; ++a) {
        for (Eigen::Index b = 0; b < p; ++b) {
            const Eigen::Index c = a * p + b;
            C(a, b) = f.grid.weights(c) * f.values(c) * std::exp(kI * lambda * nodes(a) * nodes(b) / 2.0);
        }
    }
    CMatrix X(W, p), Y(p, W);
    for (int k = 0; k < W; ++k) {
        for (Eigen::Index a = 0; a < p; ++a) {
            X(k, a) = std::exp(kI * lambda * nodes(a) * g.theta(k));
            Y(a, k) = std::exp(kI * nodes(a) * g.mu(k));
        }
    }
    const CMatrix K = g.V.transpose().cast<cd>() * g.U;
    const CMatrix S = (X * C * Y).cwiseProduct(K);
    return (g.V.cast<cd>() * S * g.U.adjoint()).topLeftCorner(N, N);
}

}  // namespace

CMatrix weyl_transform(double lambda, const SampledPlaneFunction& f, const HermiteBasisSpec& spec) {
    spec.validate();
    if (lambda != spec.lambda) throw DomainError("weyl_transform: lambda differs from the basis lambda");
    if (f.grid.dims != 2 * spec.n || static_cast<std::size_t>(f.values.size()) != f.grid.size()) {
        throw DomainError("weyl_transform: sample does not live on R^{2n}");
    }
    const double escape = boundary_fraction(f.grid, f.values);
    if (escape > 1e-10) {
        std::ostringstream os;
        os << "weyl_transform: window escape, boundary mass fraction " << escape;
        throw NumericalError(os.str());
    }
    const int N = spec.cutoff;
    if (spec.n == 1 && f.grid.axis_nodes.size() > 0) {
        const CMatrix coarse = weyl_tensor_1d(lambda, f, 4 * N + 16, N);
        const CMatrix fine = weyl_tensor_1d(lambda, f, 8 * N + 32, N);
        check_converged(coarse, fine, 1e-9, "weyl_transform");
        return fine;
    }
    CMatrix out = CMatrix::Zero(spec.size(), spec.size());
    const int n = spec.n;
    for (std::size_t i = 0; i < f.grid.size(); ++i) {
        const cd c = f.grid.weights(static_cast<Eigen::Index>(i)) * f.values(static_cast<Eigen::Index>(i));
        if (c == cd(0.0)) continue;
        const RVector node = f.grid.node(i);
        out += c * schrodinger_matrix(lambda, node.head(n).cast<cd>(), node.tail(n).cast<cd>(), spec);
    }
    return out;
}

RealFunction twisted_translation(double lambda, const RVector& a, const RVector& b, RealFunction f) {
    if (a.size() != b.size()) throw DomainError("twisted_translation: dimension mismatch");
    const Eigen::Index n = a.size();
    return [=](const RVector& p) {
        if (p.size() != 2 * n) throw DomainError("twisted_translation: point dimension mismatch");
        const RVector x = p.head(n), u = p.tail(n);
        RVector q(2 * n);
        q << x - a, u - b;
        return f(q) * std::exp(-kI * (lambda / 2.0) * (u.dot(a) - x.dot(b)));
    };
}

RealFunction twisted_convolution(double lambda, RealFunction f, RealFunction g, const QuadratureGrid& grid) {
    if (grid.dims % 2 != 0) throw DomainError("twisted_convolution: grid must live on R^{2n}");
    const CVector gv = sample_plane(grid, g).values;
    const double escape = boundary_fraction(grid, gv);
    if (escape > 1e-10) {
        std::ostringstream os;
        os << "twisted_convolution: window escape, boundary mass fraction " << escape;
        throw NumericalError(os.str());
    }
    const Eigen::Index n = grid.dims / 2;
    return [=](const RVector& p) {
        const RVector x = p.head(n), u = p.tail(n);
        CVector vals(static_cast<Eigen::Index>(grid.size()));
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const RVector q = grid.node(i);
            const RVector a = q.head(n), b = q.tail(n);
            vals(static_cast<Eigen::Index>(i)) = f(p - q) * gv(static_cast<Eigen::Index>(i)) *
                                                 std::exp(kI * (lambda / 2.0) * (u.dot(a) - x.dot(b)));
        }
        return weighted_sum(grid, vals);
    };
}

}  // namespace twf
