#include "twf/verify.hpp"

#include "twf/fock_abelian.hpp"
#include "twf/fock_twisted.hpp"
#include "twf/heisenberg.hpp"
#include "twf/hermite.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace twf {

const std::vector<std::string>& registered_suites() {
    static const std::vector<std::string> names{"group_law",          "schrodinger",     "weyl",
                                                "abelian_fock",       "twisted_transforms", "representation",
                                                "convolution_ops",    "algebra",         "irreducibility"};
    return names;
}

void RunConfig::validate() const {
    if (n < 1 || n > 3) throw DomainError("config: n must lie in [1, 3]");
    if (lambdas.empty()) throw DomainError("config: lambda list is empty");
    for (double l : lambdas) {
        if (!std::isfinite(l) || std::abs(l) < kMinTwistedLambda) {
            throw DomainError("config: every lambda must be finite with |lambda| >= 1e-3");
        }
    }
    if (cutoff < 4) throw DomainError("config: cutoff must be at least 4");
    if (quad_points < 2) throw DomainError("config: quad_points must be at least 2");
    if (kernel_points < 2) throw DomainError("config: kernel_points must be at least 2");
    if (degree_cap < 4) throw DomainError("config: degree_cap must be at least 4");
    if (commutant_cutoff < 2) throw DomainError("config: commutant_cutoff must be at least 2");
    if (threads < 1) throw DomainError("config: threads must be positive");
    if (tolerance && !(*tolerance >= 0.0 && std::isfinite(*tolerance))) {
        throw DomainError("config: tolerance must be finite and non-negative");
    }
    if (suites.empty()) throw DomainError("config: suite list is empty");
    const auto& known = registered_suites();
    for (const auto& s : suites) {
        if (std::find(known.begin(), known.end(), s) == known.end()) throw DomainError("config: unknown suite '" + s + "'");
    }
}

int VerificationReport::passed() const {
    return static_cast<int>(std::count_if(records.begin(), records.end(), [](const CheckRecord& r) { return r.pass; }));
}

int VerificationReport::failed() const { return static_cast<int>(records.size()) - passed(); }

int VerificationReport::flagged() const {
    return static_cast<int>(std::count_if(records.begin(), records.end(), [](const CheckRecord& r) { return r.flagged; }));
}

int VerificationReport::exit_code() const {
    if (flagged() > 0) return 3;
    return failed() > 0 ? 1 : 0;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string lambda_tag(double lambda) {
    std::ostringstream os;
    os << "[lambda=" << lambda << "]";
    return os.str();
}

// Distance of an integer outcome from its target as a ratio, 1 when equal.
double count_ratio(int got, int want) {
    if (got <= 0 || want <= 0) return kInf;
    return std::max(double(got) / want, double(want) / got);
}

// Records for one suite; each check runs isolated so a numerical flag cannot abort its neighbours.
class SuiteRun {
public:
    SuiteRun(const RunConfig& cfg, std::string suite, std::size_t suite_index)
        : cfg_(cfg), suite_(std::move(suite)), suite_index_(suite_index) {}

    // Deterministic stream per (seed, suite, check).
    std::mt19937 rng() {
        std::seed_seq seq{cfg_.seed, static_cast<unsigned>(suite_index_), static_cast<unsigned>(counter_++)};
        return std::mt19937(seq);
    }

    void check(const std::string& id, const std::string& anchor, double tolerance, const std::function<double()>& body) {
        CheckRecord r;
        r.suite = suite_;
        r.check_id = id;
        r.anchor = anchor;
        r.tolerance = cfg_.tolerance ? *cfg_.tolerance : tolerance;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            r.max_residual = body();
            if (std::isnan(r.max_residual)) {
                r.flagged = true;
                r.message = "residual is NaN";
            }
        } catch (const NumericalError& e) {
            r.max_residual = kInf;
            r.flagged = true;
            r.message = e.what();
        } catch (const std::exception& e) {
            r.max_residual = kInf;
            r.message = e.what();
        }
        r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.pass = !r.flagged && r.max_residual <= r.tolerance;
        records_.push_back(std::move(r));
    }

    const RunConfig& cfg() const { return cfg_; }
    std::vector<CheckRecord> take() { return std::move(records_); }

private:
    const RunConfig& cfg_;
    std::string suite_;
    std::size_t suite_index_;
    int counter_ = 0;
    std::vector<CheckRecord> records_;
};

double unit_uniform(std::mt19937& g) { return std::uniform_real_distribution<double>(-1.0, 1.0)(g); }

// Complex coordinates with modulus at most 1.
CVector random_disk(std::mt19937& g, int n) {
    CVector v(n);
    for (int j = 0; j < n; ++j) {
        const double r = std::sqrt(0.5 * (unit_uniform(g) + 1.0));
        v(j) = std::polar(r, kPi * unit_uniform(g));
    }
    return v;
}

RVector random_real(std::mt19937& g, int n, double scale = 1.0) {
    RVector v(n);
    for (int j = 0; j < n; ++j) v(j) = scale * unit_uniform(g);
    return v;
}

enum class Argument { Real, Imaginary, Complex };

TwistedElement random_element(std::mt19937& g, int n, Argument kind) {
    TwistedElement e{random_disk(g, n), random_disk(g, n), unit_uniform(g)};
    if (kind == Argument::Real) {
        e.a = e.a.real().cast<cd>();
        e.b = e.b.real().cast<cd>();
    } else if (kind == Argument::Imaginary) {
        e.a = kI * e.a.imag().cast<cd>();
        e.b = kI * e.b.imag().cast<cd>();
    }
    return e;
}

CMatrix random_block(std::mt19937& g, int size, int block) {
    std::normal_distribution<double> normal;
    CMatrix M = CMatrix::Zero(size, size);
    for (int i = 0; i < block; ++i) {
        for (int j = 0; j < block; ++j) M(i, j) = cd(normal(g), normal(g));
    }
    return M / std::sqrt(double(block) * block);
}

// Random representative supported on the leading block^n levels.
CMatrix random_representative(std::mt19937& g, int n, int cutoff, int block) {
    const CMatrix small = random_block(g, int(std::pow(block, n)), int(std::pow(block, n)));
    return pad_representative(small, n, cutoff);
}

std::vector<std::pair<CVector, CVector>> sample_points(std::mt19937& g, int n, int count, double radius) {
    std::vector<std::pair<CVector, CVector>> pts;
    for (int i = 0; i < count; ++i) pts.emplace_back(radius * random_disk(g, n), radius * random_disk(g, n));
    return pts;
}

double max_abs(const CMatrix& M) { return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff(); }

CMatrix padded(const CMatrix& T, int n, int W) { return pad_representative(T, n, W); }

double hs_distance(const TwistedFockElement& A, const TwistedFockElement& B) {
    const int W = std::max(A.cutoff(), B.cutoff());
    return (padded(A.T(), A.n(), W) - padded(B.T(), B.n(), W)).norm();
}

cd hs_inner(const TwistedFockElement& A, const TwistedFockElement& B) {
    const int W = std::max(A.cutoff(), B.cutoff());
    return padded(A.T(), A.n(), W).cwiseProduct(padded(B.T(), B.n(), W).conjugate()).sum();
}

// ---------------------------------------------------------------- group_law

void suite_group_law(SuiteRun& run) {
    const int n = run.cfg().n;
    auto draw = [&](std::mt19937& g) { return TwistedElement{random_disk(g, n), random_disk(g, n), unit_uniform(g)}; };
    auto gap = [](const TwistedElement& x, const TwistedElement& y) {
        return std::max({(x.a - y.a).cwiseAbs().maxCoeff(), (x.b - y.b).cwiseAbs().maxCoeff(), std::abs(x.t - y.t)});
    };
    for (double lambda : run.cfg().lambdas) {
        run.check("associativity" + lambda_tag(lambda), "group law associativity", 1e-12, [&] {
            auto g = run.rng();
            double worst = 0.0;
            for (int i = 0; i < 1000; ++i) {
                const auto x = draw(g), y = draw(g), z = draw(g);
                worst = std::max(worst, gap(twisted_mul(lambda, twisted_mul(lambda, x, y), z),
                                            twisted_mul(lambda, x, twisted_mul(lambda, y, z))));
            }
            return worst;
        });
        run.check("inverse" + lambda_tag(lambda), "plumbing", 1e-14, [&] {
            auto g = run.rng();
            double worst = 0.0;
            const auto e = TwistedElement::identity(n);
            for (int i = 0; i < 1000; ++i) {
                const auto x = draw(g);
                worst = std::max({worst, gap(twisted_mul(lambda, x, twisted_inverse(lambda, x)), e),
                                  gap(twisted_mul(lambda, twisted_inverse(lambda, x), x), e)});
            }
            return worst;
        });
    }
    run.check("small_lambda_limit", "standard Heisenberg law as lambda -> 0", 1e-6, [&] {
        auto g = run.rng();
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const auto x = draw(g), y = draw(g);
            worst = std::max(worst, gap(twisted_mul(1e-6, x, y), complex_heisenberg_mul(x, y)));
        }
        return worst;
    });
}

// ---------------------------------------------------------------- schrodinger

void suite_schrodinger(SuiteRun& run) {
    const int n = run.cfg().n;
    const int N = run.cfg().cutoff;
    for (double lambda : run.cfg().lambdas) {
        // Working size 2N, compared on the leading N/2 levels per axis.
        const HermiteBasisSpec work(n, lambda, 2 * N);
        const int block = static_cast<int>(std::pow(N / 2, n));
        const auto lead = [&](const CMatrix& M) { return M.topLeftCorner(block, block); };
        const auto leading_indices = [&]() {
            std::vector<Eigen::Index> keep;
            const auto idx = work.indices();
            for (std::size_t i = 0; i < idx.size(); ++i) {
                if (*std::max_element(idx[i].begin(), idx[i].end()) < N / 2) keep.push_back(Eigen::Index(i));
            }
            return keep;
        }();
        const auto restrict = [&](const CMatrix& M) {
            if (n == 1) return CMatrix(lead(M));
            CMatrix R(leading_indices.size(), leading_indices.size());
            for (std::size_t i = 0; i < leading_indices.size(); ++i) {
                for (std::size_t j = 0; j < leading_indices.size(); ++j) R(i, j) = M(leading_indices[i], leading_indices[j]);
            }
            return R;
        };
        run.check("composition" + lambda_tag(lambda), "composition law of the Schrodinger representation", 1e-8, [&] {
            auto g = run.rng();
            double worst = 0.0;
            for (int i = 0; i < 50; ++i) {
                const RVector a = random_real(g, n), b = random_real(g, n), x = random_real(g, n), u = random_real(g, n);
                const CMatrix A = schrodinger_matrix(lambda, a.cast<cd>(), b.cast<cd>(), work);
                const CMatrix B = schrodinger_matrix(lambda, x.cast<cd>(), u.cast<cd>(), work);
                const CMatrix C = schrodinger_matrix(lambda, (a + x).cast<cd>(), (b + u).cast<cd>(), work);
                const cd phase = std::exp(-kI * lambda * (u.dot(a) - x.dot(b)) / 2.0);
                worst = std::max(worst, max_abs(restrict(A * B) - phase * restrict(C)));
            }
            return worst;
        });
        run.check("unitarity" + lambda_tag(lambda), "unitarity of the Schrodinger representation", 1e-8, [&] {
            auto g = run.rng();
            double worst = 0.0;
            for (int i = 0; i < 50; ++i) {
                const RVector a = random_real(g, n), b = random_real(g, n);
                const CMatrix A = schrodinger_matrix(lambda, a.cast<cd>(), b.cast<cd>(), work);
                const CMatrix P = restrict(A.adjoint() * A);
                worst = std::max(worst, max_abs(P - CMatrix::Identity(P.rows(), P.cols())));
            }
            return worst;
        });
        run.check("pointwise_composition" + lambda_tag(lambda), "composition law of the Schrodinger representation", 1e-12, [&] {
            auto g = run.rng();
            double worst = 0.0;
            const RealFunction f = [](const RVector& xi) {
                cd v = 1.0;
                for (Eigen::Index j = 0; j < xi.size(); ++j) v *= hermite_function(int(j) + 1, xi(j));
                return v;
            };
            for (int i = 0; i < 50; ++i) {
                const HeisenbergElement p{random_real(g, n), random_real(g, n), unit_uniform(g)};
                const HeisenbergElement q{random_real(g, n), random_real(g, n), unit_uniform(g)};
                const HeisenbergElement pq = heisenberg_mul(p, q);
                const RealFunction lhs = schrodinger_apply(lambda, p.x, p.y, p.t, schrodinger_apply(lambda, q.x, q.y, q.t, f));
                const RealFunction rhs = schrodinger_apply(lambda, pq.x, pq.y, pq.t, f);
                for (int k = 0; k < 5; ++k) {
                    const RVector xi = random_real(g, n, 2.0);
                    worst = std::max(worst, std::abs(lhs(xi) - rhs(xi)));
                }
            }
            return worst;
        });
    }
}

// ---------------------------------------------------------------- weyl

// Grid matched to f ~ exp(-rate |p|^2) times the Gaussian factor exp(-|lambda||p|^2/4) of the matrix entries.
QuadratureGrid weyl_grid(int points, int n, double rate, double lambda) {
    return lebesgue_hermite_grid(points, 2 * n, 1.0 / std::sqrt(rate + std::abs(lambda) / 4.0));
}

double l2_norm_sq(const SampledPlaneFunction& s) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s.values.size(); ++i) acc += s.grid.weights(i) * std::norm(s.values(i));
    return acc;
}

// Gaussian packet in lambda-scaled coordinates: width ratio s around the ground-state width.
RealFunction packet(double lambda, const RVector& centre, const RVector& freq, double s, double& rate) {
    rate = std::abs(lambda) / (4.0 * s);
    const double r = rate;
    return [=](const RVector& p) {
        const Eigen::Index n = centre.size();
        const RVector d = p.head(n) - centre;
        const RVector e = p.tail(n);
        return std::exp(-r * (d.squaredNorm() + e.squaredNorm()) + kI * freq.dot(p.head(n)));
    };
}

void suite_weyl(SuiteRun& run) {
    const int n = run.cfg().n;
    const int N = run.cfg().cutoff;
    const int P = run.cfg().quad_points;
    for (double lambda : run.cfg().lambdas) {
        const HermiteBasisSpec spec(n, lambda, N);
        const double l = std::abs(lambda);
        run.check("plancherel" + lambda_tag(lambda), "Plancherel theorem for the Weyl transform", 1e-6, [&] {
            auto g = run.rng();
            double worst = 0.0;
            for (int i = 0; i < 10; ++i) {
                double rate = 0.0;
                const RVector c = random_real(g, n, 0.5 / std::sqrt(l));
                const RVector k = random_real(g, n, 0.5 * std::sqrt(l));
                const double s = 1.0 + 0.25 * unit_uniform(g);
                RealFunction f = packet(lambda, c, k, s, rate);
                RealFunction shifted = [=](const RVector& p) {
                    RVector q = p;
                    q.tail(n) -= c;
                    return f(q);
                };
                const auto sample = sample_plane(weyl_grid(P, n, rate, lambda), shifted);
                const double expected = std::pow(2.0 * kPi / l, n) * l2_norm_sq(sample);
                const double got = weyl_transform(lambda, sample, spec).squaredNorm();
                worst = std::max(worst, std::abs(got - expected) / expected);
            }
            return worst;
        });
        run.check("heat_kernel_transform" + lambda_tag(lambda), "Weyl transform of the heat kernel is the Hermite semigroup", 1e-8, [&] {
            const double rate = l / (4.0 * std::tanh(l));
            const RealFunction p1 = [=](const RVector& p) {
                return heat_kernel(1.0, lambda, p.head(n).cast<cd>(), p.tail(n).cast<cd>());
            };
            const CMatrix W = weyl_transform(lambda, sample_plane(weyl_grid(P, n, rate, lambda), p1), spec);
            const CMatrix H = heat_semigroup(1.0, spec);
            const int b = std::min<int>(8, static_cast<int>(W.rows()));
            return max_abs(W.topLeftCorner(b, b) - H.topLeftCorner(b, b));
        });
        const HermiteBasisSpec work(n, lambda, 2 * N);
        const int block = n == 1 ? N / 2 : static_cast<int>(std::pow(N / 2, n));
        run.check("twisted_translation" + lambda_tag(lambda), "twisted translation intertwines with left multiplication", 1e-7, [&] {
            auto g = run.rng();
            double worst = 0.0;
            for (int i = 0; i < 3; ++i) {
                double rate = 0.0;
                const RealFunction f = packet(lambda, RVector::Zero(n), RVector::Zero(n), 1.0 + 0.25 * unit_uniform(g), rate);
                const RVector a = random_real(g, n, 0.5 / std::sqrt(l)), b = random_real(g, n, 0.5 / std::sqrt(l));
                const auto grid = weyl_grid(P, n, rate, lambda);
                const CMatrix lhs = schrodinger_matrix(lambda, a.cast<cd>(), b.cast<cd>(), work) *
                                    weyl_transform(lambda, sample_plane(grid, f), work);
                // The translated packet is re-sampled on a grid wide enough for its shifted centre.
                const auto wide = weyl_grid(P, n, rate / 2.0, lambda);
                const CMatrix rhs = weyl_transform(lambda, sample_plane(wide, twisted_translation(lambda, a, b, f)), work);
                worst = std::max(worst, max_abs(lhs.topLeftCorner(block, block) - rhs.topLeftCorner(block, block)));
            }
            return worst;
        });
        run.check("convolution_order" + lambda_tag(lambda), "twisted convolution maps to the operator product", 1e-6, [&] {
            auto g = run.rng();
            double rf = 0.0, rg = 0.0;
            const RealFunction f = packet(lambda, random_real(g, n, 0.3 / std::sqrt(l)), RVector::Zero(n), 1.2, rf);
            const RealFunction h = packet(lambda, RVector::Zero(n), random_real(g, n, 0.4 * std::sqrt(l)), 0.9, rg);
            const CMatrix Wf = weyl_transform(lambda, sample_plane(weyl_grid(P, n, rf, lambda), f), work);
            const CMatrix Wh = weyl_transform(lambda, sample_plane(weyl_grid(P, n, rg, lambda), h), work);
            const QuadratureGrid inner = lebesgue_hermite_grid(P, 2 * n, 1.0 / std::sqrt(rg));
            const RealFunction fh = twisted_convolution(lambda, f, h, inner);
            const double rc = 1.0 / (1.0 / rf + 1.0 / rg);
            const CMatrix Wfh = weyl_transform(lambda, sample_plane(weyl_grid(P, n, rc, lambda), fh), work);
            const double scale = std::max(1.0, max_abs(Wfh));
            return max_abs((Wfh - Wf * Wh).topLeftCorner(block, block)) / scale;
        });
    }
}

// ---------------------------------------------------------------- abelian_fock

double fock_relative(const FockElement& a, const FockElement& b) {
    return fock_norm(a - b) / std::max(1e-300, fock_norm(b));
}

std::vector<FockElement> abelian_tests(int n, int D) {
    std::vector<FockElement> out;
    FockElement p(n, D);
    p.set(MultiIndex(std::size_t(n), 0), 1.0);
    MultiIndex e1(std::size_t(n), 0);
    e1[0] = 1;
    p.set(e1, cd(0.3, 0.2));
    MultiIndex e2(std::size_t(n), 0);
    e2[std::size_t(n - 1)] += 2;
    p.set(e2, cd(-0.1, 0.05));
    out.push_back(p);
    FockElement q(n, D);
    MultiIndex e3(std::size_t(n), 0);
    e3[0] = 3;
    q.set(e3, cd(0.05, -0.02));
    q.set(e1, cd(0.0, 0.4));
    out.push_back(q);
    out.push_back(FockElement::constant(n, D, cd(0.7, -0.1)));
    return out;
}

void suite_abelian(SuiteRun& run) {
    const int n = run.cfg().n;
    const int D = run.cfg().degree_cap;
    KernelOptions ko;
    ko.points = run.cfg().quad_points;
    const double kappa = abelian_kernel_constant(n);
    const auto tests = abelian_tests(n, D);
    run.check("parseval", "plumbing", 1e-8, [&] {
        double worst = 0.0;
        for (const auto& F : tests) {
            for (const auto& G : tests) {
                worst = std::max(worst, std::abs(fock_inner(F, G) - fock_inner_quadrature(F, G, run.cfg().quad_points)));
            }
        }
        return worst;
    });
    run.check("s_phi_unit", "S_phi 1 = phi up to the kernel constant", 1e-6, [&] {
        double worst = 0.0;
        for (const auto& phi : tests) {
            worst = std::max(worst, fock_relative(s_phi(phi, FockElement::constant(n, D, 1.0), ko), phi * kappa));
        }
        return worst;
    });
    run.check("s_phi_zeta", "first-order identity for S_phi on coordinate functions", 1e-6, [&] {
        double worst = 0.0;
        for (const auto& phi : tests) {
            for (int j = 0; j < n; ++j) {
                worst = std::max(worst, fock_relative(s_phi(phi, half_coordinate(n, D, j), ko), first_order_action(phi, j, -1) * kappa));
            }
        }
        return worst;
    });
    run.check("s_tilde_zeta", "first-order identity for the tilde operator", 1e-6, [&] {
        double worst = 0.0;
        for (const auto& phi : tests) {
            for (int j = 0; j < n; ++j) {
                worst = std::max(worst, fock_relative(s_tilde_phi(phi, half_coordinate(n, D, j), ko), first_order_action(phi, j, +1) * kappa));
            }
        }
        return worst;
    });
    run.check("u_conjugation", "tilde operator as the U-conjugate of S", 1e-6, [&] {
        double worst = 0.0;
        for (const auto& phi : tests) {
            for (const auto& F : tests) {
                const FockElement lhs = s_tilde_phi(phi, F, ko);
                const FockElement rhs = u_rotate(s_phi(u_rotate_inverse(phi), u_rotate_inverse(F), ko));
                worst = std::max(worst, fock_relative(lhs, rhs));
            }
        }
        return worst;
    });
    run.check("bargmann_intertwining", "Bargmann transform intertwines pi with rho_0", 1e-6, [&] {
        auto g = run.rng();
        double worst = 0.0;
        for (int k = 0; k < 5; ++k) {
            const RealFunction f = [k](const RVector& xi) {
                cd v = hermite_function(k, xi(0));
                for (Eigen::Index j = 1; j < xi.size(); ++j) v *= hermite_function(0, xi(j));
                return v;
            };
            const RVector v = random_real(g, n, 0.5), u = random_real(g, n, 0.5);
            CVector w(n);
            for (int j = 0; j < n; ++j) w(j) = cd(u(j), v(j));
            const FockElement lhs = bargmann(schrodinger_apply(1.0, v, u, 0.0, f), n, D);
            const FockElement rhs = rho0_apply(w, bargmann(f, n, D));
            worst = std::max(worst, fock_relative(lhs, rhs));
        }
        return worst;
    });
    run.check("commutes_real_translations", "S_phi commutes with rho_0 at real arguments", 1e-6, [&] {
        auto g = run.rng();
        double worst = 0.0;
        const FockElement phi = tests[0];
        for (int i = 0; i < 3; ++i) {
            CVector a = random_real(g, n, 0.5).cast<cd>();
            const FockElement F = tests[1];
            worst = std::max(worst, fock_relative(s_phi(phi, rho0_apply(a, F), ko), rho0_apply(a, s_phi(phi, F, ko))));
        }
        return worst;
    });
    run.check("derivative_detector", "weaker Hardy mechanism", 1.0, [&] {
        // Ratio threshold/observed for non-constant monomials; constants must give exactly zero.
        double worst = 0.0;
        for (int d = 0; d <= 3; ++d) {
            for (int j = 0; j < n; ++j) {
                MultiIndex alpha(std::size_t(n), 0);
                alpha[std::size_t(j)] = d;
                const FockElement m = FockElement::monomial(n, D, alpha);
                const double gap = fock_norm(first_order_action(m, j, +1) - first_order_action(m, j, -1));
                worst = std::max(worst, d == 0 ? (gap == 0.0 ? 0.0 : kInf) : 1e-3 / gap);
            }
        }
        return worst;
    });
}

// ---------------------------------------------------------------- twisted_transforms

double cr_residual(const TwistedFockElement& F, const CVector& z, const CVector& w, double h) {
    double worst = 0.0;
    const double scale = std::max(1.0, std::abs(F(z, w)));
    for (int j = 0; j < 2 * F.n(); ++j) {
        auto at = [&](cd step) {
            CVector zz = z, ww = w;
            if (j < F.n()) zz(j) += step; else ww(j - F.n()) += step;
            return F(zz, ww);
        };
        const cd dx = (at(h) - at(-h)) / (2.0 * h);
        const cd dy = (at(kI * h) - at(-kI * h)) / (2.0 * kI * h);
        worst = std::max(worst, std::abs(dx - dy) / scale);
    }
    return worst;
}

void suite_twisted(SuiteRun& run) {
    const int n = run.cfg().n;
    const int N = run.cfg().cutoff;
    for (double lambda : run.cfg().lambdas) {
        run.check("calibration_crosscheck" + lambda_tag(lambda), "unitarity of the twisted Gauss-Bargmann transform", 1e-4,
                  [&] { return calibration(lambda, n).check_error; });
        run.check("calibration_closed_form" + lambda_tag(lambda), "plumbing", 1e-8, [&] {
            const double a = analytic_c_lambda(lambda, n);
            return std::abs(calibration(lambda, n).c_lambda - a) / a;
        });
        run.check("isometry" + lambda_tag(lambda), "unitarity of the twisted Gauss-Bargmann transform", 1e-4, [&] {
            auto g = run.rng();
            std::vector<CMatrix> Ts;
            for (int i = 0; i < 20; ++i) Ts.push_back(random_representative(g, n, N, N));
            const CMatrix G = gram_quadrature(lambda, n, Ts, run.cfg().quad_points);
            double worst = 0.0;
            for (int i = 0; i < 20; ++i) {
                const double hs = Ts[std::size_t(i)].squaredNorm();
                worst = std::max(worst, std::abs(G(i, i).real() - hs) / hs);
            }
            return worst;
        });
        run.check("holomorphy" + lambda_tag(lambda), "plumbing", 1e-5, [&] {
            auto g = run.rng();
            const TwistedFockElement F = gcal(random_representative(g, n, N, 6), lambda, n);
            double worst = 0.0;
            for (const auto& [z, w] : sample_points(g, n, 10, 1.0)) worst = std::max(worst, cr_residual(F, z, w, 1e-3));
            return worst;
        });
        run.check("pointwise_recovery" + lambda_tag(lambda), "plumbing", 1e-5, [&] {
            auto g = run.rng();
            const CMatrix T = random_representative(g, n, N, 6);
            const TwistedFockElement F = gcal(T, lambda, n);
            const CMatrix R = gcal_adjoint_pointwise(F.function(), lambda, HermiteBasisSpec(n, lambda, N), run.cfg().quad_points);
            return max_abs(R - T) / max_abs(T);
        });
        run.check("g_lambda_round_trip" + lambda_tag(lambda), "factorization through the half heat semigroup", 1e-6, [&] {
            auto g = run.rng();
            const CMatrix M = random_representative(g, n, N, N);
            return max_abs(g_lambda_adjoint(g_lambda(M, lambda, n).phi) - M);
        });
    }
}

// ---------------------------------------------------------------- representation

void suite_representation(SuiteRun& run) {
    const int n = run.cfg().n;
    const int N = run.cfg().cutoff;
    for (double lambda : run.cfg().lambdas) {
        run.check("composition" + lambda_tag(lambda), "composition law of rho_lambda", 1e-7, [&] {
            auto g = run.rng();
            const std::vector<TwistedFockElement> tests{gcal(random_representative(g, n, N, N), lambda, n)};
            double worst = 0.0;
            const Argument kinds[] = {Argument::Real, Argument::Imaginary, Argument::Complex};
            for (int i = 0; i < 100; ++i) {
                const Argument k = kinds[i % 3];
                worst = std::max(worst, representation_residual(random_element(g, n, k), random_element(g, n, k), tests));
            }
            return worst;
        });
        run.check("adjoint" + lambda_tag(lambda), "adjoint of rho_lambda(a,b) is rho_lambda(-a,-b)", 1e-5, [&] {
            auto g = run.rng();
            const TwistedFockElement F = gcal(random_representative(g, n, N, N), lambda, n);
            const TwistedFockElement G = gcal(random_representative(g, n, N, N), lambda, n);
            double worst = 0.0;
            for (int i = 0; i < 20; ++i) {
                TwistedElement x = random_element(g, n, Argument::Complex);
                x.t = 0.0;
                const TwistedElement y{-x.a, -x.b, 0.0};
                const TwistedFockElement RF = rho_apply(x, F);
                const cd lhs = hs_inner(RF, G);
                const cd rhs = hs_inner(F, rho_apply(y, G));
                const double scale = RF.T().norm() * G.T().norm();
                worst = std::max(worst, std::abs(lhs - rhs) / scale);
            }
            return worst;
        });
        run.check("operator_vs_pointwise" + lambda_tag(lambda), "pointwise formula of rho_lambda", 1e-8, [&] {
            auto g = run.rng();
            const TwistedFockElement F = gcal(random_representative(g, n, N, 6), lambda, n);
            double worst = 0.0;
            for (int i = 0; i < 10; ++i) {
                const TwistedElement x = random_element(g, n, Argument::Complex);
                const TwistedFockElement A = rho_apply(x, F);
                const TwistedFunction B = rho_pointwise(lambda, x, F.function());
                for (const auto& [z, w] : sample_points(g, n, 5, 1.0)) {
                    const cd b = B(z, w);
                    worst = std::max(worst, std::abs(A(z, w) - b) / std::max(1.0, std::abs(b)));
                }
            }
            return worst;
        });
        run.check("unitarity_real" + lambda_tag(lambda), "the operators rho_lambda(a,b) are unitary", 1e-10, [&] {
            auto g = run.rng();
            const TwistedFockElement F = gcal(random_representative(g, n, N, N / 2), lambda, n);
            double worst = 0.0;
            for (int i = 0; i < 10; ++i) {
                const TwistedFockElement R = rho_apply(random_element(g, n, Argument::Real), F);
                worst = std::max(worst, std::abs(R.T().norm() - F.T().norm()) / F.T().norm());
            }
            return worst;
        });
    }
}

// ---------------------------------------------------------------- convolution_ops

void suite_convolution(SuiteRun& run) {
    const int n = run.cfg().n;
    const int N = run.cfg().cutoff;
    KernelPointOptions minus{run.cfg().kernel_points, -1};
    KernelPointOptions plus{run.cfg().kernel_points, +1};
    for (double lambda : run.cfg().lambdas) {
        const double kappa = twisted_kernel_constant(lambda, n);
        run.check("kernel_crosscheck" + lambda_tag(lambda), "operator form of S_phi agrees with its integral kernel", 1e-4, [&] {
            auto g = run.rng();
            double worst = 0.0;
            for (int i = 0; i < 10; ++i) {
                const AlgebraElement phi = g_lambda(random_representative(g, n, N, 6), lambda, n);
                const TwistedFockElement F = gcal(random_representative(g, n, N, 6), lambda, n);
                const TwistedFockElement S = s_phi_twisted(phi, F);
                const TwistedFunction pf = phi.phi.function(), ff = F.function();
                double err = 0.0, scale = 1.0;
                for (const auto& [z, w] : sample_points(g, n, 50, 1.0)) {
                    const cd s = S(z, w);
                    err = std::max(err, std::abs(kernel_apply_at(lambda, pf, ff, z, w, minus) / kappa - s));
                    scale = std::max(scale, std::abs(s));
                }
                worst = std::max(worst, err / scale);
            }
            return worst;
        });
        run.check("unit_element" + lambda_tag(lambda), "S_phi 1 = phi", 1e-5, [&] {
            auto g = run.rng();
            const AlgebraElement phi = g_lambda(random_representative(g, n, N, N), lambda, n);
            const TwistedFockElement one = gcal(constant_representative(lambda, n, N), lambda, n);
            const TwistedFockElement S = s_phi_twisted(phi, one);
            return (unit_operator_constant(lambda, n) * S.T() - phi.phi.T()).norm() / phi.phi.T().norm();
        });
        run.check("commutes_real" + lambda_tag(lambda), "S_phi commutes with rho_lambda(a,b) for real a,b", 1e-6, [&] {
            auto g = run.rng();
            const AlgebraElement phi = g_lambda(random_representative(g, n, N, N), lambda, n);
            const TwistedFockElement F = gcal(random_representative(g, n, N, N), lambda, n);
            double worst = 0.0;
            for (int i = 0; i < 10; ++i) {
                const TwistedElement x = random_element(g, n, Argument::Real);
                const TwistedFockElement A = s_phi_twisted(phi, rho_apply(x, F));
                const TwistedFockElement B = rho_apply(x, s_phi_twisted(phi, F));
                worst = std::max(worst, hs_distance(A, B) / B.T().norm());
            }
            return worst;
        });
        run.check("tilde_commutes_imaginary" + lambda_tag(lambda), "tilde operator commutes with rho_lambda(ia,ib)", 1e-6, [&] {
            auto g = run.rng();
            const AlgebraElement phi = g_lambda(random_representative(g, n, N, 4), lambda, n);
            const TwistedFockElement F = gcal(random_representative(g, n, N, 4), lambda, n);
            const TwistedFunction pf = phi.phi.function();
            double worst = 0.0;
            for (int i = 0; i < 3; ++i) {
                const TwistedElement x = random_element(g, n, Argument::Imaginary);
                const TwistedFunction A = s_tilde_twisted(lambda, pf, rho_pointwise(lambda, x, F.function()), run.cfg().kernel_points);
                const TwistedFunction B = rho_pointwise(lambda, x, s_tilde_twisted(lambda, pf, F.function(), run.cfg().kernel_points));
                double err = 0.0, scale = 1.0;
                for (const auto& [z, w] : sample_points(g, n, 5, 1.0)) {
                    const cd b = B(z, w);
                    err = std::max(err, std::abs(A(z, w) - b));
                    scale = std::max(scale, std::abs(b));
                }
                worst = std::max(worst, err / scale);
            }
            return worst;
        });
        run.check("u_conjugation" + lambda_tag(lambda), "tilde operator as the U-conjugate of S", 1e-6, [&] {
            auto g = run.rng();
            const AlgebraElement phi = g_lambda(random_representative(g, n, N, 4), lambda, n);
            const TwistedFockElement F = gcal(random_representative(g, n, N, 4), lambda, n);
            const TwistedFunction UF = u_rotate_twisted(F.function());
            const TwistedFunction Uphi = u_rotate_twisted_inverse(phi.phi.function());
            double err = 0.0, scale = 1.0;
            for (const auto& [z, w] : sample_points(g, n, 5, 1.0)) {
                // (U* S_phi U F)(z,w) = (S_phi UF)(iz, iw)
                const cd lhs = kernel_apply_at(lambda, phi.phi.function(), UF, kI * z, kI * w, minus);
                const cd rhs = kernel_apply_at(lambda, Uphi, F.function(), z, w, plus);
                err = std::max(err, std::abs(lhs - rhs) / kappa);
                scale = std::max(scale, std::abs(rhs) / kappa);
            }
            return err / scale;
        });
    }
}

// ---------------------------------------------------------------- algebra

void suite_algebra(SuiteRun& run) {
    const int n = run.cfg().n;
    const int N = run.cfg().cutoff;
    FirstOrderOptions fo;
    fo.quad_points = run.cfg().kernel_points;
    for (double lambda : run.cfg().lambdas) {
        const HermiteBasisSpec spec(n, lambda, N);
        run.check("homomorphism" + lambda_tag(lambda), "convolution corresponds to the operator product", 1e-12, [&] {
            auto g = run.rng();
            const AlgebraElement phi = g_lambda(random_representative(g, n, N, N), lambda, n);
            const AlgebraElement psi = g_lambda(random_representative(g, n, N, N), lambda, n);
            const TwistedFockElement F = gcal(random_representative(g, n, N, N), lambda, n);
            const AlgebraElement prod = algebra_mul(phi, psi);
            const double a = max_abs(g_lambda_adjoint(prod.phi) - phi.M * psi.M) / max_abs(phi.M * psi.M);
            const TwistedFockElement lhs = s_phi_twisted(psi, s_phi_twisted(phi, F));
            const TwistedFockElement rhs = s_phi_twisted(prod, F);
            return std::max(a, hs_distance(lhs, rhs) / rhs.T().norm());
        });
        run.check("commutative_subalgebra" + lambda_tag(lambda), "spectral multipliers form a commutative subalgebra", 1e-14, [&] {
            const AlgebraElement p = a0_element([](double s) { return cd(std::exp(-0.3 * s)); }, lambda, spec);
            const AlgebraElement q = a0_element([](double s) { return cd(1.0 / (1.0 + s)); }, lambda, spec);
            return max_abs(algebra_mul(p, q).M - algebra_mul(q, p).M);
        });
        run.check("laguerre_series" + lambda_tag(lambda), "Laguerre series of the commutative subalgebra", 1e-4, [&] {
            auto g = run.rng();
            const auto m = [](double s) { return cd(std::exp(-0.3 * s)); };
            const AlgebraElement p = a0_element(m, lambda, spec);
            std::vector<cd> ratios;
            for (const auto& [z, w] : sample_points(g, n, 10, 0.7)) {
                ratios.push_back(p.phi(z, w) / a0_series(m, 0.5, lambda, n, N - 1, z, w, true));
            }
            cd mean = 0.0;
            for (const cd& r : ratios) mean += r;
            mean /= double(ratios.size());
            double spread = 0.0;
            for (const cd& r : ratios) spread = std::max(spread, std::abs(r - mean) / std::abs(mean));
            return spread;
        });
        run.check("reproducing_identity" + lambda_tag(lambda), "reproducing identity of algebra elements", 1e-4, [&] {
            auto g = run.rng();
            double worst = 0.0;
            for (int i = 0; i < 10; ++i) {
                const AlgebraElement phi = g_lambda(random_representative(g, n, N, 6), lambda, n);
                worst = std::max(worst, reproduce_residual(phi, sample_points(g, n, 3, 1.0), run.cfg().kernel_points));
            }
            return worst;
        });
        run.check("reproducing_negative_control" + lambda_tag(lambda), "plumbing", 1.0, [&] {
            auto g = run.rng();
            double least = kInf;
            for (int i = 0; i < 3; ++i) {
                const AlgebraElement phi = g_lambda(random_representative(g, n, N, 6), lambda, n);
                least = std::min(least, reproduce_residual(phi, sample_points(g, n, 3, 1.0), run.cfg().kernel_points, -1));
            }
            return 1e-1 / least;
        });
        run.check("first_order_relations" + lambda_tag(lambda), "first-order relations of S_phi and its tilde", 1e-4, [&] {
            auto g = run.rng();
            std::vector<TwistedFunction> phis{g_lambda(CMatrix::Identity(spec.size(), spec.size()), lambda, n).phi.function()};
            for (int i = 0; i < 3; ++i) phis.push_back(g_lambda(random_representative(g, n, N, 6), lambda, n).phi.function());
            double worst = 0.0;
            for (const auto& phi : phis) {
                for (const auto& r : first_order_relations(lambda, phi, sample_points(g, n, 3, 0.5), fo)) {
                    worst = std::max({worst, r.s_residual, r.s_tilde_residual});
                }
            }
            return worst;
        });
        run.check("derivative_detector_nonconstant" + lambda_tag(lambda), "irreducibility mechanism", 1.0, [&] {
            auto g = run.rng();
            const auto pts = sample_points(g, n, 3, 0.5);
            double worst = 0.0;
            const std::pair<int, int> units[] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {0, 2}};
            for (const auto& [r, c] : units) {
                CMatrix E = CMatrix::Zero(spec.size(), spec.size());
                E(r, c) = 1.0;
                double gap = 0.0;
                for (const auto& res : first_order_relations(lambda, g_lambda(E, lambda, n).phi.function(), pts, fo)) {
                    gap = std::max(gap, res.derivative_gap);
                }
                worst = std::max(worst, 1e-3 / gap);
            }
            return worst;
        });
        run.check("derivative_detector_constant" + lambda_tag(lambda), "irreducibility mechanism", 1e-8, [&] {
            auto g = run.rng();
            double worst = 0.0;
            for (const auto& r : first_order_relations(lambda, constant_function(n, cd(0.8, 0.3)), sample_points(g, n, 3, 0.5), fo)) {
                worst = std::max(worst, r.derivative_gap);
            }
            return worst;
        });
        run.check("zeta_round_trip" + lambda_tag(lambda), "plumbing", 1e-6, [&] {
            double worst = 0.0;
            for (int j = 0; j < n; ++j) {
                for (ZetaKind k : {ZetaKind::ZType, ZetaKind::WType}) {
                    const CMatrix R = zeta_representative(n, j, k, lambda, N);
                    const CMatrix P = gcal_adjoint_pointwise(zeta_function(n, j, k, lambda), lambda, spec);
                    worst = std::max(worst, max_abs(R - P) / max_abs(R));
                }
            }
            return worst;
        });
    }
}

// ---------------------------------------------------------------- irreducibility

void suite_irreducibility(SuiteRun& run) {
    const int n = run.cfg().n;
    const int N = run.cfg().cutoff;
    const double front = run.cfg().lambdas.front();
    const int C = run.cfg().commutant_cutoff;
    const auto flag_indeterminate = [](bool indeterminate) {
        if (indeterminate) throw IndeterminateError("commutant rank decision has no clear singular-value gap");
    };
    run.check("commutant_full" + lambda_tag(front), "rho_lambda is irreducible", 1.0, [&] {
        const CommutantResult r = full_space_commutant(front, n, C, certificate_sample(n, SampleClass::Full, run.cfg().seed));
        flag_indeterminate(r.indeterminate);
        return count_ratio(r.dimension, 1);
    });
    run.check("commutant_real" + lambda_tag(front), "restriction to real arguments is not irreducible", 1.0, [&] {
        const CommutantResult r = full_space_commutant(front, n, C, certificate_sample(n, SampleClass::Real, run.cfg().seed));
        flag_indeterminate(r.indeterminate);
        return r.dimension > 0 ? double(C) / r.dimension : kInf;
    });
    const auto real_sample = certificate_sample(n, SampleClass::Real, run.cfg().seed);
    for (double lambda : run.cfg().lambdas) {
        const int size = static_cast<int>(std::pow(N, n));
        run.check("rank_one_certificate" + lambda_tag(lambda), "invariant subspace is irreducible iff its projection has rank one", 1.0, [&] {
            CMatrix P = CMatrix::Zero(size, size);
            P(0, 0) = 1.0;
            const CertificateResult c = irreducibility_certificate(invariant_range(P, lambda, n), real_sample);
            flag_indeterminate(c.indeterminate);
            return count_ratio(c.dimension, 1);
        });
        run.check("rank_two_split" + lambda_tag(lambda), "invariant subspaces decompose along rank-one projections", 1.0, [&] {
            CMatrix P = CMatrix::Zero(size, size);
            P(0, 0) = P(1, 1) = 0.5;
            P(0, 1) = P(1, 0) = 0.5;
            P(2, 2) = 1.0;
            const auto parts = decompose(P, lambda, n);
            if (parts.size() != 1) return kInf;
            double worst = count_ratio(static_cast<int>(parts[0].irreducibles.size()), 2);
            for (const auto& V : parts[0].irreducibles) {
                const CertificateResult c = irreducibility_certificate(V, real_sample);
                flag_indeterminate(c.indeterminate);
                worst = std::max(worst, count_ratio(c.dimension, 1));
            }
            return worst;
        });
        run.check("rank_two_orthogonality" + lambda_tag(lambda), "invariant subspaces decompose along rank-one projections", 1e-6, [&] {
            CMatrix P = CMatrix::Zero(size, size);
            P(0, 0) = P(1, 1) = 0.5;
            P(0, 1) = P(1, 0) = 0.5;
            P(2, 2) = 1.0;
            const auto parts = decompose(P, lambda, n);
            if (parts.size() != 1 || parts[0].irreducibles.size() != 2) return kInf;
            // Leading basis elements of both summands, paired by quadrature in the twisted Fock space.
            std::vector<CMatrix> Ts;
            const int take = std::min<int>(3, static_cast<int>(parts[0].irreducibles[0].basis.size()));
            for (const auto& V : parts[0].irreducibles) {
                for (int k = 0; k < take; ++k) Ts.push_back(V.basis[std::size_t(k)]);
            }
            const CMatrix G = gram_quadrature(lambda, n, Ts, std::min(run.cfg().quad_points, 24));
            double worst = 0.0;
            for (int i = 0; i < take; ++i) {
                for (int j = take; j < 2 * take; ++j) worst = std::max(worst, std::abs(G(i, j)));
            }
            return worst;
        });
        run.check("spectral_decomposition" + lambda_tag(lambda), "invariant subspaces decompose along rank-one projections", 1.0, [&] {
            CMatrix M = CMatrix::Zero(size, size);
            M(0, 0) = M(1, 1) = 1.0;
            M(2, 2) = 2.0;
            int irreducible = 0;
            for (const auto& s : decompose(M, lambda, n)) {
                for (const auto& V : s.irreducibles) {
                    const CertificateResult c = irreducibility_certificate(V, real_sample);
                    flag_indeterminate(c.indeterminate);
                    if (c.dimension == 1) ++irreducible;
                }
            }
            return count_ratio(irreducible, 3);
        });
    }
}

using SuiteFn = void (*)(SuiteRun&);

SuiteFn suite_function(const std::string& name) {
    static const std::map<std::string, SuiteFn> table{
        {"group_law", suite_group_law},         {"schrodinger", suite_schrodinger},
        {"weyl", suite_weyl},                   {"abelian_fock", suite_abelian},
        {"twisted_transforms", suite_twisted},  {"representation", suite_representation},
        {"convolution_ops", suite_convolution}, {"algebra", suite_algebra},
        {"irreducibility", suite_irreducibility}};
    return table.at(name);
}

nlohmann::json record_json(const CheckRecord& r, bool include_time) {
    nlohmann::json out;
    out["suite"] = r.suite;
    out["check_id"] = r.check_id;
    out["anchor"] = r.anchor;
    if (std::isfinite(r.max_residual)) out["max_residual"] = r.max_residual; else out["max_residual"] = nullptr;
    out["tolerance"] = r.tolerance;
    out["pass"] = r.pass;
    out["flagged"] = r.flagged;
    if (!r.message.empty()) out["message"] = r.message;
    if (include_time) out["wall_time"] = r.wall_time;
    return out;
}

}  // namespace

VerificationReport run_verify(const RunConfig& config) {
    config.validate();
    // Calibrations are shared; compute them once up front so suites never race on the cache.
    const auto& known = registered_suites();
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < known.size(); ++i) {
        if (std::find(config.suites.begin(), config.suites.end(), known[i]) != config.suites.end()) order.push_back(i);
    }
    auto run_one = [&](std::size_t idx) {
        SuiteRun run(config, known[idx], idx);
        suite_function(known[idx])(run);
        return run.take();
    };
    std::vector<std::vector<CheckRecord>> parts(order.size());
    if (config.threads <= 1 || order.size() <= 1) {
        for (std::size_t i = 0; i < order.size(); ++i) parts[i] = run_one(order[i]);
    } else {
        std::size_t next = 0;
        while (next < order.size()) {
            std::vector<std::future<std::vector<CheckRecord>>> batch;
            const std::size_t start = next;
            for (int t = 0; t < config.threads && next < order.size(); ++t, ++next) {
                batch.push_back(std::async(std::launch::async, run_one, order[next]));
            }
            for (std::size_t b = 0; b < batch.size(); ++b) parts[start + b] = batch[b].get();
        }
    }
    VerificationReport report;
    for (auto& p : parts) {
        std::stable_sort(p.begin(), p.end(), [](const CheckRecord& a, const CheckRecord& b) { return a.check_id < b.check_id; });
        for (auto& r : p) report.records.push_back(std::move(r));
    }
    return report;
}

void write_ndjson(std::ostream& os, const VerificationReport& report, bool include_time) {
    for (const auto& r : report.records) os << record_json(r, include_time).dump() << '\n';
    nlohmann::json s;
    s["summary"] = {{"checks", report.records.size()},
                    {"passed", report.passed()},
                    {"failed", report.failed()},
                    {"flagged", report.flagged()},
                    {"exit_code", report.exit_code()}};
    os << s.dump() << '\n';
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

void write_csv(std::ostream& os, const VerificationReport& report) {
    os << "suite,check_id,anchor,max_residual,tolerance,pass,flagged,wall_time\n";
    os << std::setprecision(17);
    for (const auto& r : report.records) {
        os << csv_field(r.suite) << ',' << csv_field(r.check_id) << ',' << csv_field(r.anchor) << ',' << r.max_residual
           << ',' << r.tolerance << ',' << (r.pass ? "true" : "false") << ',' << (r.flagged ? "true" : "false") << ','
           << r.wall_time << '\n';
    }
}

void write_summary(std::ostream& os, const VerificationReport& report) {
    for (const auto& r : report.records) {
        os << (r.pass ? "PASS " : (r.flagged ? "FLAG " : "FAIL ")) << r.suite << '/' << r.check_id << "  residual "
           << std::setprecision(3) << std::scientific << r.max_residual << " tol " << r.tolerance << std::defaultfloat;
        if (!r.message.empty()) os << "  (" << r.message << ')';
        os << '\n';
    }
    os << report.passed() << " passed, " << report.failed() << " failed, " << report.flagged() << " flagged\n";
}

// ---------------------------------------------------------------- eval

EvalTarget parse_eval_target(const std::string& name) {
    if (name == "weight") return EvalTarget::Weight;
    if (name == "heat_kernel") return EvalTarget::HeatKernel;
    if (name == "laguerre") return EvalTarget::Laguerre;
    if (name == "gcal_element") return EvalTarget::GcalElement;
    throw DomainError("eval: unknown target '" + name + "'");
}

void EvalParams::validate() const {
    if (n < 1 || n > 3) throw DomainError("eval: n must lie in [1, 3]");
    if (!std::isfinite(lambda) || lambda == 0.0) throw DomainError("eval: lambda must be finite and nonzero");
    if (points < 1) throw DomainError("eval: points must be positive");
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("eval: slice window must satisfy lo <= hi");
    if (target == EvalTarget::HeatKernel && !(t > 0.0)) throw DomainError("eval: heat-kernel time must be positive");
    if (target == EvalTarget::Laguerre && (k < 0 || k > kMaxHermiteDegree)) throw DomainError("eval: Laguerre degree out of range");
    if (target == EvalTarget::GcalElement) {
        if (cutoff < 1) throw DomainError("eval: cutoff must be positive");
        const int size = static_cast<int>(std::pow(cutoff, n));
        if (row < 0 || col < 0 || row >= size || col >= size) throw DomainError("eval: matrix unit outside the basis");
    }
    if (target == EvalTarget::Weight || target == EvalTarget::GcalElement) check_twisted_lambda(lambda);
}

void run_eval(const EvalParams& p, std::ostream& os, std::ostream* matrix_os) {
    p.validate();
    std::optional<TwistedFockElement> F;
    if (p.target == EvalTarget::GcalElement) {
        const int size = static_cast<int>(std::pow(p.cutoff, p.n));
        CMatrix E = CMatrix::Zero(size, size);
        E(p.row, p.col) = 1.0;
        F = gcal(E, p.lambda, p.n);
    }
    // Trust radius of the truncated basis; points beyond it are flagged, still evaluated.
    const double radius = trust_radius(HermiteBasisSpec(p.n, p.lambda, p.cutoff)) * 4.0;
    os << "x,u,re,im,abs" << (F ? ",cr_residual" : "") << ",flag\n";
    os << std::setprecision(17);
    RMatrix modulus(p.points, p.points);
    for (int i = 0; i < p.points; ++i) {
        const double x = p.points == 1 ? p.lo : p.lo + (p.hi - p.lo) * i / (p.points - 1);
        for (int j = 0; j < p.points; ++j) {
            const double u = p.points == 1 ? p.lo : p.lo + (p.hi - p.lo) * j / (p.points - 1);
            CVector z = CVector::Zero(p.n), w = CVector::Zero(p.n);
            z(0) = x;
            w(0) = u;
            cd v;
            double cr = 0.0;
            switch (p.target) {
                case EvalTarget::Weight: v = weight(p.lambda, z, w); break;
                case EvalTarget::HeatKernel: v = heat_kernel(p.t, p.lambda, z, w); break;
                case EvalTarget::Laguerre: v = laguerre_phi(p.k, p.lambda, z, w); break;
                case EvalTarget::GcalElement:
                    v = (*F)(z, w);
                    cr = cr_residual(*F, z, w, 1e-3);
                    break;
            }
            const bool outside = std::hypot(x, u) > radius;
            modulus(i, j) = std::abs(v);
            os << x << ',' << u << ',' << v.real() << ',' << v.imag() << ',' << std::abs(v);
            if (F) os << ',' << cr;
            os << ',' << (outside ? "outside_trust_radius" : "ok") << '\n';
        }
    }
    if (matrix_os) {
        *matrix_os << std::setprecision(17);
        for (int i = 0; i < p.points; ++i) {
            for (int j = 0; j < p.points; ++j) *matrix_os << (j ? "," : "") << modulus(i, j);
            *matrix_os << '\n';
        }
    }
}

// ---------------------------------------------------------------- table

TableKind parse_table_kind(const std::string& name) {
    if (name == "commutant_dims") return TableKind::CommutantDims;
    if (name == "decomposition") return TableKind::Decomposition;
    throw DomainError("table: unknown kind '" + name + "'");
}

void TableParams::validate() const {
    if (n < 1 || n > 3) throw DomainError("table: n must lie in [1, 3]");
    if (lambdas.empty()) throw DomainError("table: lambda list is empty");
    for (double l : lambdas) check_twisted_lambda(l);
    if (cutoff < 2) throw DomainError("table: cutoff must be at least 2");
    if (kind == TableKind::Decomposition) {
        if (diagonal.empty()) throw DomainError("table: decomposition needs a diagonal");
        if (static_cast<double>(diagonal.size()) > std::pow(cutoff, n)) throw DomainError("table: diagonal longer than the basis");
    }
}

bool run_table(const TableParams& p, std::ostream& os) {
    p.validate();
    bool indeterminate = false;
    os << std::setprecision(17);
    if (p.kind == TableKind::CommutantDims) {
        os << "lambda,N,sample_class,dimension,gap_ratio,status\n";
        const std::pair<SampleClass, const char*> classes[] = {
            {SampleClass::Real, "real"}, {SampleClass::Imaginary, "imaginary"}, {SampleClass::Full, "full"}};
        for (double lambda : p.lambdas) {
            for (const auto& [cls, name] : classes) {
                const CommutantResult r = full_space_commutant(lambda, p.n, p.cutoff, certificate_sample(p.n, cls, p.seed));
                indeterminate = indeterminate || r.indeterminate;
                os << lambda << ',' << p.cutoff << ',' << name << ',' << r.dimension << ',' << r.gap_ratio << ','
                   << (r.indeterminate ? "indeterminate" : "ok") << '\n';
            }
        }
        return indeterminate;
    }
    os << "lambda,cluster,eigenvalue_re,eigenvalue_im,cluster_rank,irreducible,certificate,status\n";
    const int size = static_cast<int>(std::pow(p.cutoff, p.n));
    CMatrix M = CMatrix::Zero(size, size);
    for (std::size_t i = 0; i < p.diagonal.size(); ++i) M(Eigen::Index(i), Eigen::Index(i)) = p.diagonal[i];
    const auto sample = certificate_sample(p.n, SampleClass::Real, p.seed);
    for (double lambda : p.lambdas) {
        std::vector<SpectralSummand> parts;
        try {
            parts = decompose(M, lambda, p.n);
        } catch (const IndeterminateError& e) {
            os << lambda << ",,,,,,,indeterminate\n";
            indeterminate = true;
            continue;
        }
        for (std::size_t c = 0; c < parts.size(); ++c) {
            for (std::size_t k = 0; k < parts[c].irreducibles.size(); ++k) {
                const CertificateResult r = irreducibility_certificate(parts[c].irreducibles[k], sample);
                indeterminate = indeterminate || r.indeterminate;
                os << lambda << ',' << c << ',' << parts[c].eigenvalue.real() << ',' << parts[c].eigenvalue.imag() << ','
                   << parts[c].rank << ',' << k << ',' << r.dimension << ',' << (r.indeterminate ? "indeterminate" : "ok") << '\n';
            }
        }
    }
    return indeterminate;
}

}  // namespace twf
