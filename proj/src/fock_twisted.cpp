#include "twf/fock_twisted.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

namespace twf {

namespace {

struct Params {
    double lambda, l, sigma, s, k, c;
};

Params params(double lambda) {
    check_twisted_lambda(lambda);
    const double l = std::abs(lambda);
    const double k = 1.0 / std::tanh(l);
    return Params{lambda, l, lambda > 0 ? 1.0 : -1.0, std::sqrt(l / 2.0), k, l * k};
}

cd dotc(const CVector& u, const CVector& v) { return (u.array() * v.array().conjugate()).sum(); }

int int_root(Eigen::Index size, int n) {
    const int N = static_cast<int>(std::lround(std::pow(double(size), 1.0 / n)));
    Eigen::Index p = 1;
    for (int j = 0; j < n; ++j) p *= N;
    if (p != size) throw DomainError("representative size is not a perfect power of the dimension");
    return N;
}

Eigen::Index flat(const MultiIndex& J, const MultiIndex& ext) {
    Eigen::Index f = 0;
    for (std::size_t i = 0; i < J.size(); ++i) f = f * ext[i] + J[i];
    return f;
}

std::vector<MultiIndex> box_of(const MultiIndex& ext) {
    std::vector<MultiIndex> out;
    MultiIndex cur(ext.size(), 0);
    for (int e : ext) {
        if (e <= 0) return out;
    }
    while (true) {
        out.push_back(cur);
        int axis = static_cast<int>(ext.size()) - 1;
        while (axis >= 0 && ++cur[static_cast<std::size_t>(axis)] == ext[static_cast<std::size_t>(axis)]) {
            cur[static_cast<std::size_t>(axis)] = 0;
            --axis;
        }
        if (axis < 0) break;
    }
    return out;
}

// (-1)^q sqrt((p+m)!(q+m)!) / (m! p! q!)
double mono_coef(int p, int q, int m) {
    const double lg = 0.5 * (std::lgamma(p + m + 1.0) + std::lgamma(q + m + 1.0)) - std::lgamma(m + 1.0) -
                      std::lgamma(p + 1.0) - std::lgamma(q + 1.0);
    return (q % 2 ? -1.0 : 1.0) * std::exp(lg);
}

// Powers x^e for every exponent in the box, per axis product.
CVector monomials(const CVector& x, const std::vector<MultiIndex>& box, const MultiIndex& ext) {
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<cd>> pw(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& v = pw[static_cast<std::size_t>(i)];
        v.resize(static_cast<std::size_t>(std::max(ext[static_cast<std::size_t>(i)], 1)));
        v[0] = 1.0;
        for (std::size_t e = 1; e < v.size(); ++e) v[e] = v[e - 1] * x(i);
    }
    CVector out(static_cast<Eigen::Index>(box.size()));
    for (std::size_t b = 0; b < box.size(); ++b) {
        cd m = 1.0;
        for (int i = 0; i < n; ++i) m *= pw[static_cast<std::size_t>(i)][static_cast<std::size_t>(box[b][static_cast<std::size_t>(i)])];
        out(static_cast<Eigen::Index>(b)) = m;
    }
    return out;
}

// Normal-ordered exp(g a^+) exp(-d a) on the first N levels (exact entries).
CMatrix normal_ordered(cd g, cd d, int N) {
    CMatrix E = CMatrix::Zero(N, N);
    E(0, 0) = 1.0;
    for (int m = 1; m < N; ++m) E(m, 0) = E(m - 1, 0) * g / std::sqrt(double(m));
    for (int j = 0; j + 1 < N; ++j) {
        E(0, j + 1) = -d * E(0, j) / std::sqrt(double(j + 1));
        for (int m = 1; m < N; ++m) E(m, j + 1) = (std::sqrt(double(m)) * E(m - 1, j) - d * E(m, j)) / std::sqrt(double(j + 1));
    }
    return E;
}

CMatrix kron(const CMatrix& A, const CMatrix& B) {
    CMatrix out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
    return out;
}

CMatrix embed_axis(const CMatrix& one, int axis, int n) {
    const Eigen::Index N = one.rows();
    CMatrix out = CMatrix::Identity(1, 1);
    for (int j = 0; j < n; ++j) out = kron(out, j == axis ? one : CMatrix::Identity(N, N));
    return out;
}

// log of p_1(z,w)^{-1} e^{-alpha.beta/2}, the Gaussian part shared by every G_lambda(T).
cd gauss_log(const Params& P, int n, const CVector& alpha, const CVector& beta) {
    return double(n) * std::log(4.0 * kPi * std::sinh(P.l) / P.l) + 0.5 * (P.k - 1.0) * (alpha.array() * beta.array()).sum();
}

cd gauss_log_at(const Params& P, int n, const CVector& z, const CVector& w) {
    CVector al, be;
    ladder_coordinates(P.lambda, z, w, al, be);
    return gauss_log(P, n, al, be);
}

double log_weight_shape(const Params& P, const CVector& z, const CVector& w) {
    return P.lambda * dotc(z, w).imag() - 0.5 * P.c * (z.squaredNorm() + w.squaredNorm());
}

void check_finite(cd v, const char* who) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw NumericalError(std::string(who) + ": non-finite value");
}

}  // namespace

void check_twisted_lambda(double lambda) {
    if (!std::isfinite(lambda) || std::abs(lambda) < kMinTwistedLambda) {
        std::ostringstream os;
        os << "twisted operations need |lambda| >= " << kMinTwistedLambda << ", got " << lambda;
        throw DomainError(os.str());
    }
}

void ladder_coordinates(double lambda, const CVector& z, const CVector& w, CVector& alpha, CVector& beta) {
    if (z.size() != w.size()) throw DomainError("ladder_coordinates: dimension mismatch");
    const double l = std::abs(lambda);
    const double sg = lambda > 0 ? 1.0 : -1.0;
    const double s = std::sqrt(l / 2.0);
    alpha = s * (-kI * sg * z + w);
    beta = s * (kI * sg * z + w);
}

TwistedFunction constant_function(int n, cd c) {
    return TwistedFunction{n, [](const CVector&, const CVector&) { return cd(0.0); },
                           [c](const CVector&, const CVector&) { return c; }};
}

TwistedFunction scaled(const TwistedFunction& F, cd c) {
    auto poly = F.poly_part;
    return TwistedFunction{F.n, F.log_part, [poly, c](const CVector& z, const CVector& w) { return c * poly(z, w); }};
}

TwistedFunction product(const TwistedFunction& F, const TwistedFunction& G) {
    if (F.n != G.n) throw DomainError("product: dimension mismatch");
    auto fl = F.log_part, gl = G.log_part, fp = F.poly_part, gp = G.poly_part;
    return TwistedFunction{F.n, [fl, gl](const CVector& z, const CVector& w) { return fl(z, w) + gl(z, w); },
                           [fp, gp](const CVector& z, const CVector& w) { return fp(z, w) * gp(z, w); }};
}

TwistedFunction sum(const TwistedFunction& F, const TwistedFunction& G) {
    if (F.n != G.n) throw DomainError("sum: dimension mismatch");
    auto fl = F.log_part, gl = G.log_part, fp = F.poly_part, gp = G.poly_part;
    // Factor the first log part out; the second enters through the ratio.
    return TwistedFunction{F.n, fl, [fl, gl, fp, gp](const CVector& z, const CVector& w) {
                               return fp(z, w) + std::exp(gl(z, w) - fl(z, w)) * gp(z, w);
                           }};
}

GcalEvaluator::GcalEvaluator(double lambda, int n, const CMatrix& T) : lambda_(lambda), n_(n) {
    params(lambda);
    if (n < 1) throw DomainError("GcalEvaluator: n must be positive");
    if (T.rows() != T.cols()) throw DomainError("GcalEvaluator: representative must be square");
    const int N = int_root(T.rows(), n);
    const CMatrix X = T * half_heat(lambda, n, N);
    const auto idx = box_indices(n, N);
    pext_.assign(static_cast<std::size_t>(n), 0);
    qext_.assign(static_cast<std::size_t>(n), 0);
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        for (Eigen::Index c = 0; c < X.cols(); ++c) {
            if (X(r, c) == cd(0.0)) continue;
            for (int i = 0; i < n; ++i) {
                qext_[static_cast<std::size_t>(i)] = std::max(qext_[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] + 1);
                pext_[static_cast<std::size_t>(i)] = std::max(pext_[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] + 1);
            }
        }
    }
    pbox_ = box_of(pext_);
    qbox_ = box_of(qext_);
    q_ = CMatrix::Zero(static_cast<Eigen::Index>(pbox_.size()), static_cast<Eigen::Index>(qbox_.size()));
    const MultiIndex full(static_cast<std::size_t>(n), N);
    const auto mbox = box_indices(n, N);
    for (std::size_t ip = 0; ip < pbox_.size(); ++ip) {
        for (std::size_t iq = 0; iq < qbox_.size(); ++iq) {
            cd acc = 0.0;
            for (const auto& m : mbox) {
                MultiIndex row(static_cast<std::size_t>(n)), col(static_cast<std::size_t>(n));
                bool inside = true;
                double coef = 1.0;
                for (int i = 0; i < n && inside; ++i) {
                    const auto ui = static_cast<std::size_t>(i);
                    row[ui] = qbox_[iq][ui] + m[ui];
                    col[ui] = pbox_[ip][ui] + m[ui];
                    inside = row[ui] < N && col[ui] < N;
                    if (inside) coef *= mono_coef(pbox_[ip][ui], qbox_[iq][ui], m[ui]);
                }
                if (!inside) continue;
                const cd x = X(flat(row, full), flat(col, full));
                if (x != cd(0.0)) acc += x * coef;
            }
            q_(static_cast<Eigen::Index>(ip), static_cast<Eigen::Index>(iq)) = acc;
        }
    }
}

cd GcalEvaluator::log_part(const CVector& z, const CVector& w) const {
    return gauss_log_at(params(lambda_), n_, z, w);
}

cd GcalEvaluator::poly_part(const CVector& z, const CVector& w) const {
    if (z.size() != n_ || w.size() != n_) throw DomainError("GcalEvaluator: point dimension mismatch");
    if (pbox_.empty() || qbox_.empty()) return 0.0;
    CVector al, be;
    ladder_coordinates(lambda_, z, w, al, be);
    return monomials(al, pbox_, pext_).transpose() * q_ * monomials(be, qbox_, qext_);
}

cd GcalEvaluator::operator()(const CVector& z, const CVector& w) const {
    return std::exp(log_part(z, w)) * poly_part(z, w);
}

TwistedFockElement::TwistedFockElement(double lambda, int n, CMatrix T)
    : lambda_(lambda), n_(n), cutoff_(int_root(T.rows(), n)), T_(std::move(T)) {
    if (!T_.allFinite()) throw DomainError("TwistedFockElement: non-finite representative");
    eval_ = std::make_shared<const GcalEvaluator>(lambda_, n_, T_);
}

TwistedFunction TwistedFockElement::function() const {
    auto ev = eval_;
    return TwistedFunction{n_, [ev](const CVector& z, const CVector& w) { return ev->log_part(z, w); },
                           [ev](const CVector& z, const CVector& w) { return ev->poly_part(z, w); }};
}

int representative_cutoff(const CMatrix& T, int n) { return int_root(T.rows(), n); }

CMatrix pad_representative(const CMatrix& T, int n, int W) {
    const int N = int_root(T.rows(), n);
    if (W < N) throw DomainError("pad_representative: target cutoff smaller than source");
    if (W == N) return T;
    const auto idx = box_indices(n, N);
    const MultiIndex full(static_cast<std::size_t>(n), W);
    Eigen::Index size = 1;
    for (int j = 0; j < n; ++j) size *= W;
    CMatrix out = CMatrix::Zero(size, size);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        for (std::size_t c = 0; c < idx.size(); ++c) {
            out(flat(idx[r], full), flat(idx[c], full)) = T(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
    }
    return out;
}

double weight_shape(double lambda, const CVector& z, const CVector& w) {
    // Elementary in lambda, so valid down to lambda = 0 where lambda coth lambda -> 1.
    if (!std::isfinite(lambda)) throw DomainError("weight_shape: lambda must be finite");
    const double l = std::abs(lambda);
    const double c = l < 1e-4 ? 1.0 + l * l / 3.0 : l / std::tanh(l);
    return std::exp(lambda * dotc(z, w).imag() - 0.5 * c * (z.squaredNorm() + w.squaredNorm()));
}

void split_point(const RVector& x, int n, CVector& z, CVector& w) {
    z.resize(n);
    w.resize(n);
    for (int j = 0; j < n; ++j) {
        z(j) = cd(x(j), x(n + j));
        w(j) = cd(x(2 * n + j), x(3 * n + j));
    }
}

namespace {

int capped_points(int points, int dims) {
    int p = points;
    while (p > 2 && std::pow(double(p), dims) > double(node_budget())) --p;
    return p;
}

QuadratureGrid split_grid(int n, const std::function<double(const CVector&, const CVector&)>& log_modulus, int points) {
    const GaussianEnvelope env = fit_envelope(
        [&](const RVector& x) {
            CVector z, w;
            split_point(x, n, z, w);
            return log_modulus(z, w);
        },
        4 * n);
    return adapted_grid(env, points);
}

// Gram matrix against c * weight_shape.
CMatrix gram_with_constant(const Params& P, int n, const std::vector<CMatrix>& Ts, int points, std::size_t chunk,
                           double cw) {
    std::vector<GcalEvaluator> evs;
    evs.reserve(Ts.size());
    for (const auto& T : Ts) evs.emplace_back(P.lambda, n, T);
    MultiIndex pext(static_cast<std::size_t>(n), 1), qext(static_cast<std::size_t>(n), 1);
    for (const auto& e : evs) {
        for (const auto& a : e.alpha_exponents())
            for (int i = 0; i < n; ++i) pext[static_cast<std::size_t>(i)] = std::max(pext[static_cast<std::size_t>(i)], a[static_cast<std::size_t>(i)] + 1);
        for (const auto& b : e.beta_exponents())
            for (int i = 0; i < n; ++i) qext[static_cast<std::size_t>(i)] = std::max(qext[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(i)] + 1);
    }
    const auto pbox = box_of(pext), qbox = box_of(qext);
    const Eigen::Index nq = static_cast<Eigen::Index>(qbox.size());
    const Eigen::Index terms = static_cast<Eigen::Index>(pbox.size()) * nq;
    const Eigen::Index K = static_cast<Eigen::Index>(evs.size());
    CMatrix C = CMatrix::Zero(terms, K);
    for (Eigen::Index e = 0; e < K; ++e) {
        const auto& ev = evs[static_cast<std::size_t>(e)];
        for (std::size_t ip = 0; ip < ev.alpha_exponents().size(); ++ip) {
            for (std::size_t iq = 0; iq < ev.beta_exponents().size(); ++iq) {
                const Eigen::Index row = flat(ev.alpha_exponents()[ip], pext) * nq + flat(ev.beta_exponents()[iq], qext);
                C(row, e) = ev.coefficients()(static_cast<Eigen::Index>(ip), static_cast<Eigen::Index>(iq));
            }
        }
    }
    const QuadratureGrid grid = split_grid(
        n,
        [&](const CVector& z, const CVector& w) { return 2.0 * gauss_log_at(P, n, z, w).real() + log_weight_shape(P, z, w); },
        capped_points(points, 4 * n));
    CMatrix G = CMatrix::Zero(K, K);
    const std::size_t total = grid.size();
    for (std::size_t start = 0; start < total; start += chunk) {
        const std::size_t len = std::min(chunk, total - start);
        CMatrix mono(static_cast<Eigen::Index>(len), terms);
        RVector om(static_cast<Eigen::Index>(len));
        for (std::size_t i = 0; i < len; ++i) {
            CVector z, w, al, be;
            split_point(grid.node(start + i), n, z, w);
            ladder_coordinates(P.lambda, z, w, al, be);
            const CVector a = monomials(al, pbox, pext), b = monomials(be, qbox, qext);
            for (Eigen::Index r = 0; r < a.size(); ++r) mono.row(static_cast<Eigen::Index>(i)).segment(r * nq, nq) = a(r) * b.transpose();
            const double lg = 2.0 * gauss_log(P, n, al, be).real() + log_weight_shape(P, z, w);
            om(static_cast<Eigen::Index>(i)) = grid.weights(static_cast<Eigen::Index>(start + i)) * cw * std::exp(lg);
        }
        const CMatrix V = mono * C;
        G.noalias() += V.adjoint() * om.asDiagonal() * V;
    }
    if (!G.allFinite()) throw NumericalError("gram_quadrature: non-finite result");
    return G.transpose();  // G(i,j) = <F_i, F_j> = sum F_i conj(F_j)
}

}  // namespace

cd integrate_split(int n, const std::function<cd(const CVector&, const CVector&)>& log_part,
                   const std::function<cd(const CVector&, const CVector&)>& poly_part, int points) {
    const QuadratureGrid grid = split_grid(
        n, [&](const CVector& z, const CVector& w) { return log_part(z, w).real(); }, capped_points(points, 4 * n));
    cd acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CVector z, w;
        split_point(grid.node(i), n, z, w);
        const cd v = std::exp(log_part(z, w)) * poly_part(z, w);
        check_finite(v, "integrate_split");
        acc += grid.weights(static_cast<Eigen::Index>(i)) * v;
    }
    return acc;
}

CalibrationConstants calibrate(double lambda, int n, int points) {
    const Params P = params(lambda);
    if (n < 1) throw DomainError("calibrate: n must be positive");
    Eigen::Index size = 1;
    for (int j = 0; j < n; ++j) size *= 2;
    CMatrix E0 = CMatrix::Zero(size, size), E1 = CMatrix::Zero(size, size);
    E0(0, 0) = 1.0;
    MultiIndex one(static_cast<std::size_t>(n), 0);
    one[0] = 1;
    const Eigen::Index i1 = flat(one, MultiIndex(static_cast<std::size_t>(n), 2));
    E1(i1, i1) = 1.0;
    const CMatrix G = gram_with_constant(P, n, {E0, E1}, points, 4096, 1.0);
    CalibrationConstants cc;
    cc.c_lambda = 1.0 / G(0, 0).real();
    cc.check_error = std::abs(cc.c_lambda * G(1, 1).real() - 1.0);
    if (!(cc.c_lambda > 0.0) || !std::isfinite(cc.c_lambda) || cc.check_error > 1e-4) {
        std::ostringstream os;
        os << "calibrate: second element disagrees by " << cc.check_error;
        throw NumericalError(os.str());
    }
    cc.d_lambda = std::pow(P.l / (2.0 * kPi), 0.5 * n);
    const double lc = std::log(cc.c_lambda);
    cc.weight_mass = integrate_split(
                         n, [&](const CVector& z, const CVector& w) { return cd(lc + log_weight_shape(P, z, w)); },
                         [](const CVector&, const CVector&) { return cd(1.0); }, capped_points(8, 4 * n))
                         .real();
    return cc;
}

const CalibrationConstants& calibration(double lambda, int n) {
    static std::mutex mu;
    static std::map<std::pair<double, int>, CalibrationConstants> cache;
    std::lock_guard<std::mutex> lock(mu);
    const auto key = std::make_pair(lambda, n);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, calibrate(lambda, n)).first;
    return it->second;
}

double weight(double lambda, const CVector& z, const CVector& w) {
    return calibration(lambda, static_cast<int>(z.size())).c_lambda * weight_shape(lambda, z, w);
}

double analytic_c_lambda(double lambda, int n) {
    const double l = std::abs(lambda);
    return std::pow(std::pow(l, 4) / (32.0 * std::pow(kPi, 4) * std::pow(std::sinh(l), 3)), n);
}

double analytic_weight_mass(double lambda, int n) {
    const double l = std::abs(lambda);
    return std::pow(l * l / (8.0 * kPi * kPi * std::sinh(l)), n);
}

CMatrix gram_quadrature(double lambda, int n, const std::vector<CMatrix>& Ts, int points, std::size_t chunk) {
    return gram_with_constant(params(lambda), n, Ts, points, chunk, calibration(lambda, n).c_lambda);
}

cd twisted_inner_quadrature(double lambda, const TwistedFunction& F, const TwistedFunction& G, int points) {
    const Params P = params(lambda);
    if (F.n != G.n) throw DomainError("twisted_inner_quadrature: dimension mismatch");
    const double lc = std::log(calibration(lambda, F.n).c_lambda);
    return integrate_split(
        F.n,
        [&](const CVector& z, const CVector& w) {
            return F.log_part(z, w) + std::conj(G.log_part(z, w)) + lc + log_weight_shape(P, z, w);
        },
        [&](const CVector& z, const CVector& w) { return F.poly_part(z, w) * std::conj(G.poly_part(z, w)); }, points);
}

TwistedFockElement gcal(const CMatrix& T, double lambda, int n) { return TwistedFockElement(lambda, n, T); }

const CMatrix& gcal_adjoint(const TwistedFockElement& F) { return F.T(); }

CMatrix half_heat(double lambda, int n, int cutoff) {
    const double l = std::abs(lambda);
    const auto idx = box_indices(n, cutoff);
    CVector d(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) d(static_cast<Eigen::Index>(i)) = std::exp(-(2.0 * order(idx[i]) + n) * l / 2.0);
    return d.asDiagonal();
}

CMatrix gcal_adjoint_pointwise(const TwistedFunction& F, double lambda, const HermiteBasisSpec& spec, int points) {
    const Params P = params(lambda);
    spec.validate();
    const int n = spec.n, N = spec.cutoff;
    if (F.n != n) throw DomainError("gcal_adjoint_pointwise: dimension mismatch");
    const double lc = std::log(calibration(lambda, n).c_lambda);
    auto log_integrand = [&](const CVector& z, const CVector& w) {
        return F.log_part(z, w) + std::conj(gauss_log_at(P, n, z, w)) + lc + log_weight_shape(P, z, w);
    };
    const QuadratureGrid grid =
        split_grid(n, [&](const CVector& z, const CVector& w) { return log_integrand(z, w).real(); }, capped_points(points, 4 * n));
    CMatrix S = CMatrix::Zero(spec.size(), spec.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CVector z, w, al, be;
        split_point(grid.node(i), n, z, w);
        ladder_coordinates(lambda, z, w, al, be);
        const cd c = grid.weights(static_cast<Eigen::Index>(i)) * std::exp(log_integrand(z, w)) * F.poly_part(z, w);
        check_finite(c, "gcal_adjoint_pointwise");
        CMatrix Dh = CMatrix::Identity(1, 1);
        for (int j = 0; j < n; ++j) Dh = kron(Dh, normal_ordered(al(j), be(j), N));
        S.noalias() += c * Dh.conjugate();
    }
    // <F, G(E_JK)> = sum c conj(Dh_KJ) e^{-(2|K|+n) l/2}
    return (half_heat(lambda, n, N) * S).transpose();
}

double AlgebraElement::norm() const {
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(M);
    return svd.singularValues()(0);
}

AlgebraElement g_lambda(const CMatrix& M, double lambda, int n) {
    if (M.rows() != M.cols()) throw DomainError("g_lambda: M must be square");
    const int N = int_root(M.rows(), n);
    return AlgebraElement{gcal(half_heat(lambda, n, N) * M, lambda, n), M};
}

CMatrix g_lambda_adjoint(const TwistedFockElement& phi) {
    const CMatrix E = half_heat(phi.lambda(), phi.n(), phi.cutoff());
    return E.diagonal().cwiseInverse().asDiagonal() * phi.T();
}

CMatrix constant_representative(double lambda, int n, int cutoff) {
    return std::pow(std::abs(lambda) / (2.0 * kPi), n) * half_heat(lambda, n, cutoff);
}

namespace {

struct AxisRho {
    cd log_scalar;
    cd g1, d1, g2, d2;
};

AxisRho axis_rho(const Params& P, cd a, cd b) {
    const cd aa = P.s * (-kI * P.sigma * a + b);
    const cd ba = P.s * (kI * P.sigma * a + b);
    const double k = P.k;
    const cd g1 = -((k + 1.0) * std::conj(ba) - (k - 1.0) * aa) / 2.0;
    const cd d1 = ((k - 1.0) * std::conj(aa) - (k + 1.0) * ba) / 2.0;
    const cd g2p = -aa - g1, d2p = -ba - d1;
    const cd c1 = -(k / 2.0) * g1 * d1;
    const cd c2 = -(k / 2.0) * g2p * d2p;
    const cd lin2 = (g2p * d1 - d2p * g1) / 2.0 - (k / 2.0) * (g1 * d2p + g2p * d1);
    const cd ls = -(k / 4.0) * (std::norm(aa) + std::norm(ba)) - c1 - c2 - lin2;
    return AxisRho{ls, g1, d1, std::exp(-P.l) * g2p, std::exp(P.l) * d2p};
}

CMatrix displacement(cd g, cd d, int W) { return std::exp(-g * d / 2.0) * normal_ordered(g, d, W); }

}  // namespace

RhoFactors rho_factors(double lambda, const TwistedElement& g, int n, int cutoff) {
    const Params P = params(lambda);
    g.validate();
    if (g.n() != n) throw DomainError("rho_factors: dimension mismatch");
    cd ls = -kI * g.t + (lambda / 2.0) * dotc(g.a, g.b).imag();
    CMatrix L = CMatrix::Identity(1, 1), R = CMatrix::Identity(1, 1);
    for (int j = 0; j < n; ++j) {
        const AxisRho ax = axis_rho(P, g.a(j), g.b(j));
        ls += ax.log_scalar;
        L = kron(L, displacement(ax.g1, ax.d1, cutoff));
        R = kron(R, displacement(ax.g2, ax.d2, cutoff));
    }
    return RhoFactors{std::exp(ls), L, R};
}

CMatrix rho_compressed(double lambda, const TwistedElement& g, int n, int cutoff) {
    const RhoFactors f = rho_factors(lambda, g, n, cutoff);
    return f.scalar * kron(f.right.transpose(), f.left);
}

TwistedFockElement rho_apply(const TwistedElement& g, const TwistedFockElement& F, const RhoOptions& opts) {
    const Params P = params(F.lambda());
    g.validate();
    const int n = F.n(), N = F.cutoff();
    if (g.n() != n) throw DomainError("rho_apply: dimension mismatch");
    double spread = 0.0;
    for (int j = 0; j < n; ++j) {
        const AxisRho ax = axis_rho(P, g.a(j), g.b(j));
        spread = std::max({spread, std::norm(ax.g1) + std::norm(ax.d1), std::norm(ax.g2) + std::norm(ax.d2)});
    }
    int W = N + 16 + static_cast<int>(std::ceil(4.0 * spread));
    while (true) {
        if (W > opts.max_cutoff) {
            std::ostringstream os;
            os << "rho_apply: displaced tail needs a cutoff above " << opts.max_cutoff << " (outside the trust region)";
            throw NumericalError(os.str());
        }
        const RhoFactors f = rho_factors(F.lambda(), g, n, W);
        const CMatrix R = f.scalar * f.left * pad_representative(F.T(), n, W) * f.right;
        if (!R.allFinite()) throw NumericalError("rho_apply: non-finite result");
        // Mass on the outermost 6 levels of any axis.
        const auto idx = box_indices(n, W);
        double edge = 0.0;
        for (std::size_t r = 0; r < idx.size(); ++r) {
            for (std::size_t c = 0; c < idx.size(); ++c) {
                bool outer = false;
                for (int i = 0; i < n; ++i) {
                    outer = outer || idx[r][static_cast<std::size_t>(i)] >= W - 6 || idx[c][static_cast<std::size_t>(i)] >= W - 6;
                }
                if (outer) edge += std::norm(R(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
            }
        }
        if (std::sqrt(edge) <= opts.tail_tol * std::max(R.norm(), 1e-300)) return TwistedFockElement(F.lambda(), n, R);
        W += std::max(8, W / 2);
    }
}

TwistedFunction rho_pointwise(double lambda, const TwistedElement& g, const TwistedFunction& F) {
    const Params P = params(lambda);
    g.validate();
    if (g.n() != F.n) throw DomainError("rho_pointwise: dimension mismatch");
    const CVector a = g.a, b = g.b;
    const cd base = -kI * g.t + (lambda / 2.0) * dotc(a, b).imag() - (P.c / 4.0) * (a.squaredNorm() + b.squaredNorm());
    auto fl = F.log_part, fp = F.poly_part;
    return TwistedFunction{
        F.n,
        [=](const CVector& z, const CVector& w) {
            return fl(z - a, w - b) + base - kI * (lambda / 2.0) * (dotc(w, a) - dotc(z, b)) +
                   (P.c / 2.0) * (dotc(z, a) + dotc(w, b));
        },
        [=](const CVector& z, const CVector& w) { return fp(z - a, w - b); }};
}

double representation_residual(const TwistedElement& g, const TwistedElement& h,
                               const std::vector<TwistedFockElement>& tests) {
    double worst = 0.0;
    for (const auto& F : tests) {
        const TwistedFockElement A = rho_apply(g, rho_apply(h, F));
        const TwistedFockElement B = rho_apply(twisted_mul(F.lambda(), g, h), F);
        const int W = std::max(A.cutoff(), B.cutoff());
        const CMatrix diff = pad_representative(A.T(), F.n(), W) - pad_representative(B.T(), F.n(), W);
        worst = std::max(worst, diff.norm() / F.T().norm());
    }
    return worst;
}

double composition_law_residual(double lambda, const TwistedElement& g, const TwistedElement& h,
                                const TwistedFockElement& F, const std::vector<std::pair<CVector, CVector>>& points) {
    const Params P = params(lambda);
    const TwistedFunction f = F.function();
    const TwistedFunction lhs = rho_pointwise(lambda, g, rho_pointwise(lambda, h, f));
    const TwistedElement sum_el{g.a + h.a, g.b + h.b, 0.0};
    const TwistedFunction base = rho_pointwise(lambda, sum_el, f);
    const double phase_re = -(lambda / 2.0) * (dotc(g.a, h.b) - dotc(g.b, h.a)).real();
    const double phase_im = -(P.c / 2.0) * (dotc(g.a, h.a) + dotc(g.b, h.b)).imag();
    const cd factor = std::exp(kI * (phase_re + phase_im) - kI * (g.t + h.t));
    double worst = 0.0;
    for (const auto& [z, w] : points) {
        const cd l = lhs(z, w), r = factor * base(z, w);
        worst = std::max(worst, std::abs(l - r) / std::max(std::abs(r), 1e-300));
    }
    return worst;
}

TwistedFockElement s_phi_twisted(const AlgebraElement& phi, const TwistedFockElement& F) {
    if (phi.phi.lambda() != F.lambda() || phi.phi.n() != F.n()) throw DomainError("s_phi_twisted: lambda or dimension mismatch");
    // M is zero outside its block, so padding either side to the larger cutoff is exact.
    const int W = std::max(F.cutoff(), phi.phi.cutoff());
    return gcal(pad_representative(F.T(), F.n(), W) * pad_representative(phi.M, F.n(), W), F.lambda(), F.n());
}

double unit_operator_constant(double lambda, int n) { return std::pow(2.0 * kPi / std::abs(lambda), n); }

double twisted_kernel_constant(double lambda, int n) {
    return calibration(lambda, n).weight_mass * unit_operator_constant(lambda, n);
}

cd kernel_apply_at(double lambda, const TwistedFunction& phi, const TwistedFunction& F, const CVector& z,
                   const CVector& w, const KernelPointOptions& opts) {
    const Params P = params(lambda);
    if (phi.n != F.n || z.size() != F.n || w.size() != F.n) throw DomainError("kernel_apply_at: dimension mismatch");
    if (opts.sign != 1 && opts.sign != -1) throw DomainError("kernel_apply_at: sign must be +1 or -1");
    const double lc = std::log(calibration(lambda, F.n).c_lambda);
    const double sg = opts.sign;
    return integrate_split(
        F.n,
        [&](const CVector& a, const CVector& b) {
            const CVector ac = a.conjugate(), bc = b.conjugate();
            return F.log_part(a, b) + phi.log_part(z + sg * ac, w + sg * bc) + (P.c / 2.0) * (dotc(z, a) + dotc(w, b)) -
                   kI * (lambda / 2.0) * (dotc(w, a) - dotc(z, b)) + lc + log_weight_shape(P, a, b);
        },
        [&](const CVector& a, const CVector& b) {
            return F.poly_part(a, b) * phi.poly_part(z + sg * a.conjugate(), w + sg * b.conjugate());
        },
        opts.points);
}

TwistedFunction s_tilde_twisted(double lambda, const TwistedFunction& phi, const TwistedFunction& F, int points) {
    const double kappa = twisted_kernel_constant(lambda, F.n);
    return TwistedFunction{F.n, [](const CVector&, const CVector&) { return cd(0.0); },
                           [=](const CVector& z, const CVector& w) {
                               return kernel_apply_at(lambda, phi, F, z, w, KernelPointOptions{points, +1}) / kappa;
                           }};
}

TwistedFunction u_rotate_twisted(const TwistedFunction& F) {
    auto fl = F.log_part, fp = F.poly_part;
    return TwistedFunction{F.n, [fl](const CVector& z, const CVector& w) { return fl(-kI * z, -kI * w); },
                           [fp](const CVector& z, const CVector& w) { return fp(-kI * z, -kI * w); }};
}

TwistedFunction u_rotate_twisted_inverse(const TwistedFunction& F) {
    auto fl = F.log_part, fp = F.poly_part;
    return TwistedFunction{F.n, [fl](const CVector& z, const CVector& w) { return fl(kI * z, kI * w); },
                           [fp](const CVector& z, const CVector& w) { return fp(kI * z, kI * w); }};
}

AlgebraElement algebra_mul(const AlgebraElement& phi, const AlgebraElement& psi) {
    if (phi.phi.lambda() != psi.phi.lambda() || phi.phi.n() != psi.phi.n() || phi.M.rows() != psi.M.rows()) {
        throw DomainError("algebra_mul: operands live on different spaces");
    }
    return g_lambda(phi.M * psi.M, phi.phi.lambda(), phi.phi.n());
}

AlgebraElement a0_element(const std::function<cd(double)>& m, double lambda, const HermiteBasisSpec& spec) {
    spec.validate();
    if (spec.lambda != lambda) throw DomainError("a0_element: lambda differs from the basis lambda");
    return g_lambda(spectral_multiplier(m, spec), lambda, spec.n);
}

cd a0_series(const std::function<cd(double)>& m, double t_param, double lambda, int n, int kmax, const CVector& z,
             const CVector& w, bool with_heat_factor) {
    check_twisted_lambda(lambda);
    if (!(t_param > 0.0)) throw DomainError("a0_series: t must be positive");
    if (z.size() != n || w.size() != n) throw DomainError("a0_series: dimension mismatch");
    const double l = std::abs(lambda);
    cd acc = 0.0;
    for (int k = 0; k < kmax; ++k) {
        const double e = (2.0 * k + n) * l;
        acc += m(e) * std::exp(-2.0 * t_param * e) * laguerre_phi(k, lambda, z, w);
    }
    acc *= std::pow(l / (2.0 * kPi), n);
    if (with_heat_factor) acc /= heat_kernel(1.0, lambda, z, w);
    return acc;
}

double reproduce_residual(const AlgebraElement& phi, const std::vector<std::pair<CVector, CVector>>& points, int quad_points,
                          int kernel_sign) {
    const double lambda = phi.phi.lambda();
    const int n = phi.phi.n();
    const Params P = params(lambda);
    const Params Pm = params(-lambda);
    const CalibrationConstants& cc = calibration(lambda, n);
    const double lc = std::log(calibration(-lambda, n).c_lambda / cc.weight_mass);
    const TwistedFunction f = phi.phi.function();
    const double sg = kernel_sign;
    double worst = 0.0;
    for (const auto& [z, w] : points) {
        const cd I = integrate_split(
            n,
            [&](const CVector& a, const CVector& b) {
                return f.log_part(a, b) + (P.c / 2.0) * (dotc(z, a) + dotc(w, b)) +
                       sg * kI * (lambda / 2.0) * (dotc(w, a) - dotc(z, b)) + lc + log_weight_shape(Pm, a, b);
            },
            [&](const CVector& a, const CVector& b) { return f.poly_part(a, b); }, quad_points);
        worst = std::max(worst, std::abs(phi.phi(z, w) - I));
    }
    return worst;
}

TwistedFunction zeta_function(int n, int j, ZetaKind kind, double lambda) {
    check_twisted_lambda(lambda);
    if (j < 0 || j >= n) throw DomainError("zeta_function: axis out of range");
    const double ct = 1.0 / std::tanh(lambda);
    return TwistedFunction{n, [](const CVector&, const CVector&) { return cd(0.0); },
                           [=](const CVector& z, const CVector& w) {
                               if (kind == ZetaKind::ZType) return (lambda / 2.0) * (ct * z(j) - kI * w(j));
                               return (lambda / 2.0) * (ct * w(j) + kI * z(j));
                           }};
}

CMatrix zeta_representative(int n, int j, ZetaKind kind, double lambda, int cutoff) {
    const Params P = params(lambda);
    if (j < 0 || j >= n) throw DomainError("zeta_representative: axis out of range");
    const CMatrix a = embed_axis(lowering_matrix(cutoff).cast<cd>(), j, n);
    const CMatrix ad = a.adjoint();
    const CMatrix R1 = constant_representative(lambda, n, cutoff);
    // alpha G(T) = G(e^l T a - a T), beta G(T) = G(e^{-l} T a^+ - a^+ T)
    const CMatrix Ma = std::exp(P.l) * R1 * a - a * R1;
    const CMatrix Mb = std::exp(-P.l) * R1 * ad - ad * R1;
    const CMatrix Rz = (kI * P.sigma / (2.0 * P.s)) * (Ma - Mb);
    const CMatrix Rw = (Ma + Mb) / (2.0 * P.s);
    const double ct = 1.0 / std::tanh(lambda);
    if (kind == ZetaKind::ZType) return (lambda / 2.0) * (ct * Rz - kI * Rw);
    return (lambda / 2.0) * (ct * Rw + kI * Rz);
}

std::vector<FirstOrderResidual> first_order_relations(double lambda, const TwistedFunction& phi,
                                                      const std::vector<std::pair<CVector, CVector>>& points,
                                                      const FirstOrderOptions& opts) {
    const int n = phi.n;
    const double mass = calibration(lambda, n).weight_mass;
    std::vector<FirstOrderResidual> out;
    for (ZetaKind kind : {ZetaKind::ZType, ZetaKind::WType}) {
        for (int j = 0; j < n; ++j) {
            const TwistedFunction zeta = zeta_function(n, j, kind, lambda);
            FirstOrderResidual r;
            r.axis = j;
            r.kind = kind;
            for (const auto& [z, w] : points) {
                const cd S = kernel_apply_at(lambda, phi, zeta, z, w, KernelPointOptions{opts.quad_points, -1}) / mass;
                const cd St = kernel_apply_at(lambda, phi, zeta, z, w, KernelPointOptions{opts.quad_points, +1}) / mass;
                CVector zw(2 * n);
                zw << z, w;
                const int axis = kind == ZetaKind::ZType ? j : n + j;
                const DerivativeResult d = holomorphic_derivative(
                    [&](const CVector& p) { return phi(p.head(n), p.tail(n)); }, zw, axis, opts.h, 1e-6);
                const cd zp = zeta(z, w) * phi(z, w);
                r.s_residual = std::max(r.s_residual, std::abs(S - (-d.value + zp)));
                r.s_tilde_residual = std::max(r.s_tilde_residual, std::abs(St - (d.value + zp)));
                r.derivative_gap = std::max(r.derivative_gap, std::abs(St - S));
            }
            out.push_back(r);
        }
    }
    return out;
}

InvariantSubspace invariant_range(const CMatrix& M, double lambda, int n, double tol) {
    check_twisted_lambda(lambda);
    if (M.rows() != M.cols()) throw DomainError("invariant_range: M must be square");
    const double scale = std::max(1.0, M.norm());
    if ((M * M - M).norm() > tol * scale || (M - M.adjoint()).norm() > tol * scale) {
        throw DomainError("invariant_range: M is not an orthogonal projection");
    }
    const int N = int_root(M.rows(), n);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (M + M.adjoint()));
    InvariantSubspace V{lambda, n, N, M, {}};
    const Eigen::Index d = M.rows();
    for (Eigen::Index k = 0; k < d; ++k) {
        if (es.eigenvalues()(k) < 0.5) continue;
        const CVector u = es.eigenvectors().col(k);
        for (Eigen::Index i = 0; i < d; ++i) {
            CMatrix B = CMatrix::Zero(d, d);
            B.row(i) = u.adjoint();
            V.basis.push_back(B);
        }
    }
    return V;
}

CertificateResult irreducibility_certificate(const InvariantSubspace& V, const std::vector<TwistedElement>& sample,
                                             double invariance_tol, const ToleranceProfile& tol) {
    if (V.basis.empty()) throw DomainError("irreducibility_certificate: empty subspace");
    if (sample.empty()) throw DomainError("irreducibility_certificate: empty sample");
    const Eigen::Index dim = static_cast<Eigen::Index>(V.basis.size());
    CertificateResult res;
    std::vector<CMatrix> family;
    for (const auto& g : sample) {
        const RhoFactors f = rho_factors(V.lambda, g, V.n, V.cutoff);
        CMatrix R(dim, dim);
        for (Eigen::Index l = 0; l < dim; ++l) {
            const CMatrix img = f.scalar * f.left * V.basis[static_cast<std::size_t>(l)] * f.right;
            const double leak = (img - img * V.projection).norm() / std::max(img.norm(), 1e-300);
            res.invariance_residual = std::max(res.invariance_residual, leak);
            for (Eigen::Index k = 0; k < dim; ++k) R(k, l) = V.basis[static_cast<std::size_t>(k)].conjugate().cwiseProduct(img).sum();
        }
        family.push_back(R);
    }
    if (res.invariance_residual > invariance_tol) {
        std::ostringstream os;
        os << "irreducibility_certificate: subspace not invariant under the sample (leak " << res.invariance_residual << ")";
        throw DomainError(os.str());
    }
    const CommutantResult cr = commutant_dimension(family, tol);
    res.dimension = cr.dimension;
    res.indeterminate = cr.indeterminate;
    res.gap_ratio = cr.gap_ratio;
    return res;
}

CommutantResult full_space_commutant(double lambda, int n, int cutoff, const std::vector<TwistedElement>& sample,
                                     const ToleranceProfile& tol) {
    std::vector<CMatrix> family;
    for (const auto& g : sample) family.push_back(rho_compressed(lambda, g, n, cutoff));
    return commutant_dimension(family, tol);
}

std::vector<TwistedElement> certificate_sample(int n, SampleClass cls, unsigned seed) {
    if (n < 1) throw DomainError("certificate_sample: n must be positive");
    std::vector<TwistedElement> out;
    auto unit = [&](int c, double sgn, cd u) {
        TwistedElement g = TwistedElement::identity(n);
        if (c < n) g.a(c) = sgn * u; else g.b(c - n) = sgn * u;
        return g;
    };
    for (int c = 0; c < 2 * n; ++c) {
        switch (cls) {
            case SampleClass::Real: out.push_back(unit(c, 1, 0.5)); out.push_back(unit(c, -1, 0.5)); break;
            case SampleClass::Imaginary: out.push_back(unit(c, 1, 0.5 * kI)); out.push_back(unit(c, -1, 0.5 * kI)); break;
            case SampleClass::Full: out.push_back(unit(c, 1, 0.5)); out.push_back(unit(c, 1, 0.5 * kI)); break;
        }
    }
    const cd diag1 = cls == SampleClass::Real ? cd(0.5) : cls == SampleClass::Imaginary ? 0.5 * kI : cd(0.5, 0.5);
    const cd diag2 = cls == SampleClass::Real ? cd(-0.5) : cls == SampleClass::Imaginary ? -0.5 * kI : cd(-0.5, 0.5);
    for (cd d : {diag1, diag2}) out.push_back(TwistedElement{CVector::Constant(n, d), CVector::Constant(n, d), 0.0});
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    for (int r = 0; r < 8; ++r) {
        TwistedElement g = TwistedElement::identity(n);
        for (int j = 0; j < n; ++j) {
            const double x1 = U(rng), x2 = U(rng), y1 = U(rng), y2 = U(rng);
            switch (cls) {
                case SampleClass::Real: g.a(j) = x1; g.b(j) = x2; break;
                case SampleClass::Imaginary: g.a(j) = cd(0, x1); g.b(j) = cd(0, x2); break;
                case SampleClass::Full: g.a(j) = cd(x1, y1); g.b(j) = cd(x2, y2); break;
            }
        }
        out.push_back(g);
    }
    return out;
}

std::vector<SpectralSummand> decompose(const CMatrix& M, double lambda, int n, double cluster_tol) {
    check_twisted_lambda(lambda);
    if (M.rows() != M.cols()) throw DomainError("decompose: M must be square");
    const double scale = std::max(1.0, M.norm());
    if ((M * M.adjoint() - M.adjoint() * M).norm() > 1e-10 * scale * scale) throw DomainError("decompose: M is not normal");
    Eigen::ComplexSchur<CMatrix> schur(M);
    const CMatrix Q = schur.matrixU();
    const CVector ev = schur.matrixT().diagonal();
    std::vector<Eigen::Index> order_idx(static_cast<std::size_t>(ev.size()));
    for (Eigen::Index i = 0; i < ev.size(); ++i) order_idx[static_cast<std::size_t>(i)] = i;
    std::sort(order_idx.begin(), order_idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        return ev(a).real() != ev(b).real() ? ev(a).real() < ev(b).real() : ev(a).imag() < ev(b).imag();
    });
    const double tol = cluster_tol * scale;
    std::vector<std::vector<Eigen::Index>> clusters;
    for (Eigen::Index i : order_idx) {
        bool placed = false;
        for (auto& c : clusters) {
            const double d = std::abs(ev(i) - ev(c.front()));
            if (d <= tol) {
                c.push_back(i);
                placed = true;
                break;
            }
            if (d <= 100.0 * tol) throw IndeterminateError("decompose: eigenvalue gap too small to cluster");
        }
        if (!placed) clusters.push_back({i});
    }
    std::vector<SpectralSummand> out;
    for (const auto& c : clusters) {
        cd mean = 0.0;
        for (Eigen::Index i : c) mean += ev(i);
        mean /= double(c.size());
        if (std::abs(mean) <= tol) continue;
        SpectralSummand s;
        s.eigenvalue = mean;
        s.rank = static_cast<int>(c.size());
        s.projection = CMatrix::Zero(M.rows(), M.cols());
        for (Eigen::Index i : c) {
            const CMatrix P1 = Q.col(i) * Q.col(i).adjoint();
            s.projection += P1;
            s.irreducibles.push_back(invariant_range(P1, lambda, n));
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace twf
