#include "closedgeo/solver.hpp"

#include "closedgeo/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace closedgeo {

namespace {

constexpr double kFdStep = 1e-5;
constexpr double kPinvCut = 1e-6;
constexpr double kRechartRadius = 1.5;

struct ChordEval {
    double d2 = 0.0;
    Vec gp;  // d(d^2)/du at the first endpoint, chart coordinates
    Vec gq;
    Vec log;
};

ChordEval chord_eval(const ManifoldModel& m, const Point& a, const Point& b, const Vec* guess = nullptr) {
    const Vec p = m.to_ambient(a), q = m.to_ambient(b);
    ChordEval c;
    c.log = m.log_map(p, q, guess);
    Vec p1, w;
    m.exp_map(p, c.log, p1, w);
    c.d2 = m.inner(p, c.log, c.log);
    const Frame ja = m.chart_jacobian(a), jb = m.chart_jacobian(b);
    const int n = int(ja.cols());
    c.gp.resize(n);
    c.gq.resize(n);
    for (int k = 0; k < n; ++k) {
        c.gp(k) = -2.0 * m.inner(p, c.log, Vec(ja.col(k)));
        c.gq(k) = 2.0 * m.inner(q, w, Vec(jb.col(k)));
    }
    return c;
}

Point shifted(const Point& x, int k, double h) {
    Point y = x;
    y.coords(k) += h;
    return y;
}

// Hessian of d^2(a, b) in the chart coordinates (u_a, u_b): central differences
// of the exact gradient at steps h and h/2, one Richardson step
Eigen::MatrixXd chord_hessian(const ManifoldModel& m, const Point& a, const Point& b, const Vec& base_log) {
    const int n = int(a.coords.size());
    Eigen::MatrixXd H(2 * n, 2 * n);
    auto grad = [&](const Point& x, const Point& y) {
        const ChordEval c = chord_eval(m, x, y, &base_log);
        Eigen::VectorXd g(2 * n);
        g << c.gp, c.gq;
        return g;
    };
    for (int k = 0; k < 2 * n; ++k) {
        auto diff = [&](double h) {
            const bool first = k < n;
            const int kk = first ? k : k - n;
            const Eigen::VectorXd gplus = first ? grad(shifted(a, kk, h), b) : grad(a, shifted(b, kk, h));
            const Eigen::VectorXd gminus = first ? grad(shifted(a, kk, -h), b) : grad(a, shifted(b, kk, -h));
            return Eigen::VectorXd((gplus - gminus) / (2.0 * h));
        };
        H.col(k) = (4.0 * diff(0.5 * kFdStep) - diff(kFdStep)) / 3.0;
    }
    return 0.5 * (H + H.transpose());
}

// G^{-1/2} for the chart metric at x
Eigen::MatrixXd ortho_transform(const ManifoldModel& m, const Point& x) {
    const Vec p = m.to_ambient(x);
    const Frame j = m.chart_jacobian(x);
    const int n = int(j.cols());
    Eigen::MatrixXd G(n, n);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) G(k, l) = m.inner(p, Vec(j.col(k)), Vec(j.col(l)));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

EnergyDerivatives gradient_of(const ManifoldModel& m, const std::vector<Point>& x, std::vector<Vec>* logs = nullptr) {
    const int N = int(x.size()), n = m.dim();
    EnergyDerivatives ed;
    ed.gradient = Eigen::VectorXd::Zero(N * n);
    ed.gradient_ortho.resize(N * n);
    if (logs) logs->resize(std::size_t(N));
    double sum = 0.0;
    for (int i = 0; i < N; ++i) {
        const int j = (i + 1) % N;
        const ChordEval c = chord_eval(m, x[std::size_t(i)], x[std::size_t(j)]);
        sum += c.d2;
        ed.gradient.segment(i * n, n) += N * Eigen::VectorXd(c.gp);
        ed.gradient.segment(j * n, n) += N * Eigen::VectorXd(c.gq);
        if (logs) (*logs)[std::size_t(i)] = c.log;
    }
    ed.energy = N * sum;
    for (int i = 0; i < N; ++i)
        ed.gradient_ortho.segment(i * n, n) = ortho_transform(m, x[std::size_t(i)]) * ed.gradient.segment(i * n, n);
    ed.gradient_norm = ed.gradient_ortho.norm();
    return ed;
}

Eigen::MatrixXd hessian_of(const ManifoldModel& m, const std::vector<Point>& x, int mult) {
    const int N = int(x.size()), n = m.dim();
    const int M = N * mult;
    std::vector<Eigen::MatrixXd> blocks(static_cast<std::size_t>(N)), S(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        const Point& a = x[std::size_t(i)];
        const Point& b = x[std::size_t((i + 1) % N)];
        const Vec lg = m.log_map(m.to_ambient(a), m.to_ambient(b));
        blocks[std::size_t(i)] = chord_hessian(m, a, b, lg);
        S[std::size_t(i)] = ortho_transform(m, a);
    }
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(M * n, M * n);
    for (int c = 0; c < M; ++c) {
        const int i = c, j = (c + 1) % M;
        const Eigen::MatrixXd& B = blocks[std::size_t(c % N)];
        H.block(i * n, i * n, n, n) += B.topLeftCorner(n, n);
        H.block(i * n, j * n, n, n) += B.topRightCorner(n, n);
        H.block(j * n, i * n, n, n) += B.bottomLeftCorner(n, n);
        H.block(j * n, j * n, n, n) += B.bottomRightCorner(n, n);
    }
    H *= double(M);
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) {
            auto blk = H.block(a * n, b * n, n, n);
            blk = S[std::size_t(a % N)] * blk * S[std::size_t(b % N)];
        }
    return 0.5 * (H + H.transpose());
}

std::vector<Point> open_vertices(const DiscreteLoop& loop) {
    return std::vector<Point>(loop.vertices().begin(), loop.vertices().end() - 1);
}

Point normalize_chart(const ManifoldModel& m, const Point& x) {
    if (m.chart_count() == 1) return m.canonical(x);
    if (x.coords.norm() > kRechartRadius) return m.canonical(x);
    return x;
}

std::vector<Point> step_vertices(const ManifoldModel& m, const std::vector<Point>& x, const Eigen::VectorXd& du) {
    const int n = m.dim();
    std::vector<Point> y = x;
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i].coords += du.segment(int(i) * n, n);
        y[i] = normalize_chart(m, y[i]);
    }
    return y;
}

Eigen::VectorXd to_chart_step(const ManifoldModel& m, const std::vector<Point>& x, const Eigen::VectorXd& d_ortho) {
    const int n = m.dim();
    Eigen::VectorXd du(d_ortho.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        du.segment(int(i) * n, n) = ortho_transform(m, x[i]) * d_ortho.segment(int(i) * n, n);
    return du;
}

double root_energy_of(const EnergyDerivatives& ed) { return std::sqrt(std::max(0.0, ed.energy)); }

}  // namespace

EnergyDerivatives energy_gradient(const DiscreteLoop& loop) { return gradient_of(*loop.model(), open_vertices(loop)); }

Eigen::MatrixXd energy_hessian(const DiscreteLoop& loop, int m) {
    if (m < 1) throw PreconditionViolated(fmt::format("iterate index must be >= 1, got {}", m));
    return hessian_of(*loop.model(), open_vertices(loop), m);
}

IndexResult index_at(const DiscreteLoop& critical_loop, int m) {
    const Eigen::MatrixXd H = energy_hessian(critical_loop, m);
    const Eigen::VectorXd e = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H, Eigen::EigenvaluesOnly).eigenvalues();
    IndexResult r;
    r.m = m;
    r.N = critical_loop.N();
    r.max_abs = e.cwiseAbs().maxCoeff();
    r.eps_cut = 1e-6 * r.max_abs;
    r.below_cut = 0.0;
    r.above_cut = r.max_abs;
    for (int k = 0; k < e.size(); ++k) {
        const double a = std::abs(e(k));
        if (a > r.eps_cut / 10.0 && a < 10.0 * r.eps_cut)
            throw SpectralGapTooSmall(fmt::format("eigenvalue {:.4g} within a decade of eps_cut = {:.4g} (m = {}, N = {})", e(k),
                                                  r.eps_cut, m, r.N));
        if (a < r.eps_cut) {
            ++r.raw_kernel;
            r.below_cut = std::max(r.below_cut, a);
        } else {
            r.above_cut = std::min(r.above_cut, a);
            if (e(k) < 0) ++r.lambda;
        }
    }
    r.nu = r.raw_kernel - 1;
    return r;
}

DiscreteLoop polish_critical(const DiscreteLoop& loop, ConvergenceReport* report, const FindOptions& opts) {
    const ManifoldModel& m = *loop.model();
    std::vector<Point> x = open_vertices(loop);
    EnergyDerivatives ed = gradient_of(m, x);
    int steps = 0;
    for (; steps < opts.max_newton && ed.gradient_norm > opts.target_gradient; ++steps) {
        if (root_energy_of(ed) < kCollapseThreshold) break;
        const Eigen::MatrixXd H = hessian_of(m, x, 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        const Eigen::VectorXd& ev = es.eigenvalues();
        const double cut = kPinvCut * ev.cwiseAbs().maxCoeff();
        Eigen::VectorXd coef = es.eigenvectors().transpose() * ed.gradient_ortho;
        for (int k = 0; k < coef.size(); ++k) coef(k) = std::abs(ev(k)) > cut ? -coef(k) / ev(k) : 0.0;
        const Eigen::VectorXd du = to_chart_step(m, x, es.eigenvectors() * coef);
        double t = 1.0;
        bool improved = false;
        for (int bt = 0; bt < 30; ++bt, t *= 0.5) {
            std::vector<Point> y;
            EnergyDerivatives ey;
            try {
                y = step_vertices(m, x, t * du);
                ey = gradient_of(m, y);
            } catch (const PointsTooFar&) {
                continue;
            } catch (const NoConvergence&) {
                continue;
            }
            if (ey.gradient_norm < ed.gradient_norm) {
                x = std::move(y);
                ed = std::move(ey);
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    if (report) {
        report->gradient_norm = ed.gradient_norm;
        report->newton_steps = steps;
    }
    if (root_energy_of(ed) < kCollapseThreshold)
        throw CollapsedToConstant(fmt::format("loop shrank to F = {:.3g}", root_energy_of(ed)));
    if (!(ed.gradient_norm < opts.accept_gradient))
        throw NoConvergence(fmt::format("gradient norm {:.3g} after {} Newton steps", ed.gradient_norm, steps));
    return DiscreteLoop(loop.model(), std::move(x));
}

DiscreteLoop fix_gauge(const DiscreteLoop& loop) {
    int best = 0;
    Vec bp = loop.ambient(0);
    for (int i = 1; i < loop.N(); ++i) {
        const Vec p = loop.ambient(i);
        const bool lower = p(0) < bp(0) - 1e-9 || (std::abs(p(0) - bp(0)) <= 1e-9 && p(1) < bp(1));
        if (lower) {
            best = i;
            bp = p;
        }
    }
    return rotate(loop, best);
}

CriticalOrbit find_critical(const DiscreteLoop& seed, const FindOptions& opts) {
    const ManifoldModel& m = *seed.model();
    const int N = seed.N();
    const double F0 = metrics(seed).root_energy;
    if (F0 > std::sqrt(double(N)) * m.rho() * (1.0 + 1e-12))
        throw PreconditionViolated(fmt::format("seed F = {:.6g} exceeds sqrt(N) rho = {:.6g}", F0, std::sqrt(double(N)) * m.rho()));

    CriticalOrbit orbit{seed, 0.0, true, 1, {}, std::nullopt, {}, false, {}};
    std::vector<Point> x = open_vertices(seed);
    const double alpha = 1.0 / (8.0 * N);
    for (int s = 0; s < opts.descent_steps; ++s) {
        const EnergyDerivatives ed = gradient_of(m, x);
        if (ed.gradient_norm < opts.target_gradient) break;
        if (root_energy_of(ed) < kCollapseThreshold) throw CollapsedToConstant("seed shrank to a point loop");
        x = step_vertices(m, x, to_chart_step(m, x, -alpha * ed.gradient_ortho));
        orbit.convergence.descent_steps = s + 1;
    }
    const DiscreteLoop polished = polish_critical(DiscreteLoop(seed.model(), x), &orbit.convergence, opts);
    const LoopMetrics mt = metrics(polished);
    if (mt.root_energy < kCollapseThreshold) throw CollapsedToConstant("critical loop is constant");
    if (mt.length / mt.root_energy < 1.0 - 1e-8)
        throw NoConvergence(fmt::format("critical loop is not PPAL: L/F = {:.12g}", mt.length / mt.root_energy));
    orbit.loop = fix_gauge(polished);
    orbit.length = mt.length;

    // a loop traversing a shorter closed curve q times repeats with period N/q
    const double scale = 1e-6 * std::max(1.0, orbit.loop.ambient(0).norm());
    for (int q = N; q > 1; --q) {
        if (N % q) continue;
        const int shift = N / q;
        bool periodic = true;
        for (int i = 0; i < N && periodic; ++i)
            periodic = (orbit.loop.ambient((i + shift) % N) - orbit.loop.ambient(i)).norm() < scale;
        if (periodic) {
            orbit.multiplicity = q;
            break;
        }
    }
    orbit.prime = orbit.multiplicity == 1;
    return orbit;
}

int segments_for_iterate(const CriticalOrbit& orbit, int m) {
    const double rho = orbit.loop.model()->rho();
    int N = orbit.loop.N();
    while (orbit.length * std::sqrt(double(m)) > std::sqrt(double(N)) * rho * (1.0 + 1e-12)) N *= 2;
    return N;
}

DiscreteLoop refine_double(const DiscreteLoop& critical_loop) {
    const ManifoldModel& m = *critical_loop.model();
    std::vector<Point> x;
    x.reserve(std::size_t(2 * critical_loop.N()));
    for (int i = 0; i < critical_loop.N(); ++i) {
        x.push_back(critical_loop.vertex(i));
        x.push_back(short_geodesic(m, critical_loop.vertex(i), critical_loop.vertex(i + 1), 2).front());
    }
    return polish_critical(DiscreteLoop(critical_loop.model(), std::move(x)));
}

IndexResult hessian_index(CriticalOrbit& orbit, int m) {
    if (m < 1) throw PreconditionViolated(fmt::format("iterate index must be >= 1, got {}", m));
    const int target = segments_for_iterate(orbit, m);
    const DiscreteLoop* loop = &orbit.loop;
    while (loop->N() < target) {
        const int next = loop->N() * 2;
        auto it = orbit.refined.find(next);
        if (it == orbit.refined.end()) it = orbit.refined.emplace(next, refine_double(*loop)).first;
        loop = &it->second;
    }
    const IndexResult r = index_at(*loop, m);
    orbit.iterates[m] = r;
    return r;
}

Eigen::MatrixXd poincare_map(const CriticalOrbit& orbit, int steps) { return poincare_map(orbit.loop, steps); }

Eigen::MatrixXd poincare_map(const DiscreteLoop& loop, int steps) {
    const ManifoldModel& m = *loop.model();
    const int n = m.dim();
    const double L = metrics(loop).length;
    if (m.kind() == ModelKind::flat_torus) {
        Eigen::MatrixXd P = Eigen::MatrixXd::Identity(2 * (n - 1), 2 * (n - 1));
        P.topRightCorner(n - 1, n - 1) = L * Eigen::MatrixXd::Identity(n - 1, n - 1);
        return P;
    }
    if (m.closed_form() && m.all_geodesics_closed()) return Eigen::MatrixXd::Identity(2 * (n - 1), 2 * (n - 1));
    if (n != 2) throw PreconditionViolated("Poincare maps need n = 2 or a round sphere");

    const Vec p0 = loop.ambient(0);
    Vec v0 = m.log_map(p0, loop.ambient(1));
    v0 /= m.norm(p0, v0);

    // state: geodesic (p, v) with unit speed, then (y, y') for two Jacobi solutions
    using State = Eigen::Matrix<double, 10, 1>;
    auto rhs = [&](const State& s) {
        State d;
        const Vec p = s.segment<3>(0), v = s.segment<3>(3);
        const double K = m.gaussian_curvature(p);
        d.segment<3>(0) = v;
        d.segment<3>(3) = m.acceleration(p, v);
        d(6) = s(7);
        d(7) = -K * s(6);
        d(8) = s(9);
        d(9) = -K * s(8);
        return d;
    };
    State s;
    s << p0, v0, 1.0, 0.0, 0.0, 1.0;
    const double h = L / steps;
    for (int k = 0; k < steps; ++k) {
        const State k1 = rhs(s), k2 = rhs(s + 0.5 * h * k1), k3 = rhs(s + 0.5 * h * k2), k4 = rhs(s + h * k3);
        s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    const double gap = (Vec(s.segment<3>(0)) - p0).norm() + (Vec(s.segment<3>(3)) - v0).norm();
    if (gap > 1e-6) throw IntegrationFailure(fmt::format("geodesic does not close after one period (gap {:.3g})", gap));
    Eigen::MatrixXd P(2, 2);
    P << s(6), s(8), s(7), s(9);
    const double det = P.determinant();
    if (!(std::abs(det - 1.0) <= 1e-7)) throw IntegrationFailure(fmt::format("Poincare map determinant {:.12g}", det));
    return P;
}

bool orbit_less(const CriticalOrbit& a, const CriticalOrbit& b) {
    const double tol = 1e-9 * std::max(a.length, b.length);
    if (std::abs(a.length - b.length) > tol) return a.length < b.length;
    const int la = a.iterates.count(1) ? a.iterates.at(1).lambda : -1;
    const int lb = b.iterates.count(1) ? b.iterates.at(1).lambda : -1;
    if (la != lb) return la < lb;
    const Vec pa = a.loop.ambient(0), pb = b.loop.ambient(0);
    for (int k = 0; k < pa.size(); ++k)
        if (pa(k) != pb(k)) return pa(k) < pb(k);
    return false;
}

}  // namespace closedgeo
