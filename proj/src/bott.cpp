#include "closedgeo/bott.hpp"

#include "closedgeo/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace closedgeo {

namespace {

constexpr double kPi = std::numbers::pi;

double root_angle(int j, int m) { return 2.0 * kPi * double(std::min(j, m - j)) / double(m); }

// index of the break matching a, or -1
int match_break(const OmegaIndex& w, double a) {
    for (std::size_t k = 0; k < w.breaks.size(); ++k)
        if (std::abs(a - w.breaks[k]) <= kAngleMatch) return int(k);
    return -1;
}

int arc_of(const OmegaIndex& w, double a) {
    for (std::size_t k = 0; k + 1 < w.breaks.size(); ++k)
        if (a > w.breaks[k] && a < w.breaks[k + 1]) return int(k);
    return int(w.arc_values.size()) - 1;
}

OmegaIndex two_break(int at_one, int elsewhere, int null_at_one) {
    OmegaIndex w;
    w.breaks = {0.0, kPi};
    w.point_values = {at_one, elsewhere};
    w.arc_values = {elsewhere};
    w.nullity = {null_at_one, 0};
    return w;
}

}  // namespace

double fold_angle(double angle) {
    double a = std::fmod(angle, 2.0 * kPi);
    if (a < 0) a += 2.0 * kPi;
    if (a > kPi) a = 2.0 * kPi - a;
    return a;
}

OmegaIndex OmegaIndex::constant(int value) {
    OmegaIndex w = two_break(value, value, 0);
    w.kind = "constant";
    return w;
}

int OmegaIndex::operator()(double angle) const {
    const double a = fold_angle(angle);
    const int k = match_break(*this, a);
    if (k >= 0) return point_values[std::size_t(k)];
    return arc_values[std::size_t(arc_of(*this, a))];
}

int OmegaIndex::nullity_at(double angle) const {
    const int k = match_break(*this, fold_angle(angle));
    return k >= 0 && !nullity.empty() ? nullity[std::size_t(k)] : 0;
}

std::pair<int, int> OmegaIndex::splitting(std::size_t k) const {
    const std::size_t last = arc_values.size() - 1;
    const int below = k == 0 ? arc_values[0] : arc_values[k - 1];
    const int above = k > last ? arc_values[last] : arc_values[k];
    return {below - point_values[k], above - point_values[k]};
}

int bott_sum(const OmegaIndex& omega, int m) {
    if (m < 1) throw PreconditionViolated(fmt::format("bott_sum needs m >= 1, got {}", m));
    int s = 0;
    for (int j = 0; j < m; ++j) s += omega(root_angle(j, m));
    return s;
}

int nullity_sum(const OmegaIndex& omega, int m) {
    int s = 0;
    for (int j = 0; j < m; ++j) s += omega.nullity_at(root_angle(j, m));
    return s;
}

int upsilon_sum(const OmegaIndex& omega, int m) { return bott_sum(omega, m) + nullity_sum(omega, m); }

double average_index(const OmegaIndex& omega) {
    double s = 0.0;
    for (std::size_t k = 0; k < omega.arc_values.size(); ++k)
        s += omega.arc_values[k] * (omega.breaks[k + 1] - omega.breaks[k]);
    return s / kPi;
}

bool same_function(const OmegaIndex& a, const OmegaIndex& b) {
    std::vector<double> probe;
    for (const auto* w : {&a, &b})
        for (std::size_t k = 0; k < w->breaks.size(); ++k) {
            probe.push_back(w->breaks[k]);
            if (k + 1 < w->breaks.size()) probe.push_back(0.5 * (w->breaks[k] + w->breaks[k + 1]));
        }
    std::sort(probe.begin(), probe.end());
    std::vector<double> mids;
    for (std::size_t i = 0; i + 1 < probe.size(); ++i) mids.push_back(0.5 * (probe[i] + probe[i + 1]));
    probe.insert(probe.end(), mids.begin(), mids.end());
    for (double t : probe)
        if (a(t) != b(t)) return false;
    return true;
}

bool satisfies_bounds(const OmegaIndex& omega, int n) {
    int lo = omega.point_values[0], hi = lo;
    for (int v : omega.point_values) lo = std::min(lo, v), hi = std::max(hi, v);
    for (int v : omega.arc_values) lo = std::min(lo, v), hi = std::max(hi, v);
    if (hi - lo > n - 1) return false;
    for (std::size_t k = 0; k < omega.breaks.size(); ++k) {
        const auto [sm, sp] = omega.splitting(k);
        if (sm < 0 || sp < 0 || sm > n - 1 || sp > n - 1) return false;
    }
    return true;
}

double krein_value(const Eigen::Matrix2d& P) {
    const double theta = std::acos(std::clamp(0.5 * P.trace(), -1.0, 1.0));
    const std::complex<double> z = std::polar(1.0, theta);
    std::complex<double> v0, v1;
    if (std::abs(P(0, 1)) >= std::abs(P(1, 0))) {
        v0 = P(0, 1);
        v1 = z - P(0, 0);
    } else {
        v0 = z - P(1, 1);
        v1 = P(1, 0);
    }
    const double scale = std::sqrt(std::norm(v0) + std::norm(v1));
    v0 /= scale;
    v1 /= scale;
    // J = [[0, 1], [-1, 0]]: Jv = (v1, -v0)
    const std::complex<double> form = std::complex<double>(0, 1) * (v1 * std::conj(v0) - v0 * std::conj(v1));
    return form.real();
}

OmegaIndex omega_from_poincare(const Eigen::MatrixXd& P, int lambda1, int n) {
    const int d = 2 * (n - 1);
    if (P.rows() != d || P.cols() != d)
        throw PreconditionViolated(fmt::format("Poincare map must be {}x{} for n = {}", d, d, n));
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
    const double dev = (P - I).norm();
    if (n != 2) {
        if (dev < 1e-6) {
            OmegaIndex w = two_break(lambda1, lambda1 + (n - 1), d);
            w.kind = "identity";
            return w;
        }
        // block shear [[I, B], [0, I]] with B positive definite, as on flat tori
        const Eigen::MatrixXd B = P.topRightCorner(n - 1, n - 1);
        Eigen::MatrixXd R = P;
        R.topRightCorner(n - 1, n - 1).setZero();
        if ((R - I).norm() < 1e-9 && (B - B.transpose()).norm() < 1e-9 &&
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(B).eigenvalues().minCoeff() > 1e-4) {
            OmegaIndex w = two_break(lambda1, lambda1, n - 1);
            w.kind = "shear";
            return w;
        }
        throw PreconditionViolated("omega_from_poincare handles general maps only for n = 2");
    }

    const Eigen::Matrix2d Q = P;
    const double tr = Q.trace();
    if (std::abs(tr - 2.0) < 1e-8) {
        if (dev < 1e-6) {
            OmegaIndex w = two_break(lambda1, lambda1 + 1, 2);
            w.kind = "identity";
            return w;
        }
        if (dev < 1e-4)
            throw EigenvalueOnGridAmbiguous(fmt::format("trace {:.12g} at 2 with |P - I| = {:.3g}", tr, dev));
        Eigen::Matrix2d J;
        J << 0, 1, -1, 0;
        const Eigen::Matrix2d S = J * (Q - Eigen::Matrix2d::Identity());
        const double sign = (S + S.transpose()).trace();
        OmegaIndex w = sign <= 0 ? two_break(lambda1, lambda1, 1) : two_break(lambda1, lambda1 + 1, 1);
        w.kind = sign <= 0 ? "shear" : "shear+";
        return w;
    }
    if (std::abs(tr + 2.0) < 1e-8) {
        OmegaIndex w = OmegaIndex::constant(lambda1);
        w.kind = "parabolic-1";
        w.excluded = true;
        return w;
    }
    if (std::abs(tr) > 2.0) {
        OmegaIndex w = OmegaIndex::constant(lambda1);
        w.kind = "hyperbolic";
        return w;
    }
    const double theta = std::acos(0.5 * tr);
    const double kappa = krein_value(Q);
    if (std::abs(kappa) < 1e-8) throw EigenvalueOnGridAmbiguous(fmt::format("Krein value {:.3g} has no sign", kappa));
    OmegaIndex w;
    w.breaks = {0.0, theta, kPi};
    w.nullity = {0, 1, 0};
    w.kind = "elliptic";
    if (kappa > 0) {
        w.point_values = {lambda1, lambda1, lambda1 + 1};
        w.arc_values = {lambda1, lambda1 + 1};
    } else {
        w.point_values = {lambda1, lambda1 - 1, lambda1 - 1};
        w.arc_values = {lambda1, lambda1 - 1};
    }
    return w;
}

OmegaIndex omega_from_iterates(const std::vector<int>& lambda, const std::vector<double>& candidates) {
    if (lambda.empty()) throw InconsistentSystem("no iterate indices given");
    OmegaIndex w;
    std::vector<double> br = {0.0, kPi};
    for (double c : candidates) br.push_back(fold_angle(c));
    std::sort(br.begin(), br.end());
    for (double b : br)
        if (w.breaks.empty() || b - w.breaks.back() > kAngleMerge) w.breaks.push_back(b);
    if (kPi - w.breaks.back() > kAngleMerge) w.breaks.push_back(kPi);
    w.breaks.front() = 0.0;
    w.breaks.back() = kPi;
    const int B = int(w.breaks.size()), arcs = B - 1;

    std::vector<bool> free_point(std::size_t(B), false);
    for (double c : candidates) {
        const double a = fold_angle(c);
        for (int k = 0; k < B; ++k)
            if (std::abs(a - w.breaks[std::size_t(k)]) <= kAngleMerge) free_point[std::size_t(k)] = true;
    }
    std::vector<int> unknown_of_point(std::size_t(B), -1);
    int U = arcs;
    for (int k = 0; k < B; ++k)
        if (free_point[std::size_t(k)]) unknown_of_point[std::size_t(k)] = U++;

    const int M = int(lambda.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(M, U);
    for (int m = 1; m <= M; ++m)
        for (int j = 0; j < m; ++j) {
            const double a = root_angle(j, m);
            const int k = match_break(w, a);
            int col;
            if (k >= 0 && free_point[std::size_t(k)]) col = unknown_of_point[std::size_t(k)];
            else if (k == 0) col = 0;
            else if (k == B - 1) col = arcs - 1;
            else if (k >= 0) col = k;  // merged break lying on a root: tie to the arc above
            else col = arc_of(w, a);
            A(m - 1, col) += 1.0;
        }

    std::vector<int> active;
    for (int c = 0; c < U; ++c)
        if (A.col(c).cwiseAbs().sum() > 0) active.push_back(c);
    for (int c = 0; c < arcs; ++c)
        if (std::find(active.begin(), active.end(), c) == active.end())
            throw InconsistentSystem(fmt::format("arc ({:.6g}, {:.6g}) is not sampled by any root of order <= {}",
                                                 w.breaks[std::size_t(c)], w.breaks[std::size_t(c) + 1], M));
    Eigen::MatrixXd Aa(M, int(active.size()));
    for (std::size_t i = 0; i < active.size(); ++i) Aa.col(int(i)) = A.col(active[i]);
    Eigen::VectorXd rhs(M);
    for (int m = 0; m < M; ++m) rhs(m) = lambda[std::size_t(m)];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Aa);
    if (qr.rank() < int(active.size())) throw InconsistentSystem("iterate data does not determine the jump values");
    const Eigen::VectorXd sol = qr.solve(rhs);

    std::vector<long> x(std::size_t(U), 0);
    for (std::size_t i = 0; i < active.size(); ++i) x[std::size_t(active[i])] = std::lround(sol(int(i)));
    for (int m = 0; m < M; ++m) {
        long s = 0;
        for (int c = 0; c < U; ++c) s += long(std::lround(A(m, c))) * x[std::size_t(c)];
        if (s != lambda[std::size_t(m)])
            throw InconsistentSystem(fmt::format("no integer omega-index reproduces lambda_{} = {}", m + 1, lambda[std::size_t(m)]));
    }

    w.arc_values.assign(std::size_t(arcs), 0);
    for (int c = 0; c < arcs; ++c) w.arc_values[std::size_t(c)] = int(x[std::size_t(c)]);
    w.point_values.assign(std::size_t(B), 0);
    w.nullity.assign(std::size_t(B), 0);
    for (int k = 0; k < B; ++k) {
        const int below = k == 0 ? w.arc_values[0] : w.arc_values[std::size_t(k - 1)];
        const int above = k == B - 1 ? w.arc_values[std::size_t(arcs - 1)] : w.arc_values[std::size_t(k)];
        const int u = unknown_of_point[std::size_t(k)];
        if (u < 0) w.point_values[std::size_t(k)] = k == 0 ? above : below;
        else if (std::find(active.begin(), active.end(), u) != active.end()) w.point_values[std::size_t(k)] = int(x[std::size_t(u)]);
        else w.point_values[std::size_t(k)] = std::min(below, above);
    }
    w.kind = "iterates";
    return w;
}

GrowthBounds growth_bounds(int lambda1, int n, int m) {
    if (m < 1) throw PreconditionViolated(fmt::format("growth_bounds needs m >= 1, got {}", m));
    GrowthBounds g;
    g.min = m * lambda1 - (m - 1) * (n - 1);
    g.max = m * lambda1 + (m - 1) * (n - 1);
    g.clamped = g.min < 0;
    g.clamped_min = std::max(0, g.min);
    return g;
}

bool IterationReport::all_hold() const { return violations().empty(); }

std::vector<std::string> IterationReport::violations() const {
    std::vector<std::string> v;
    auto scan = [&](const std::vector<bool>& flags, const char* what) {
        for (std::size_t i = 0; i < flags.size(); ++i)
            if (!flags[i]) v.push_back(fmt::format("{} fails at m = {}", what, i + 1));
    };
    scan(index_bound, "index bound");
    scan(index_nullity_bound, "index-plus-nullity bound");
    scan(nullity_bound, "nullity bound");
    scan(above_min_propagates, "strict-above-min propagation");
    scan(below_max_propagates, "strict-below-max propagation");
    if (!average_bound) v.push_back("average index bound fails for lambda");
    if (!average_nullity_bound) v.push_back("average index bound fails for lambda + nu");
    return v;
}

IterationReport check_iteration(const std::vector<int>& lambda, const std::vector<int>& nu, int n, const OmegaIndex* omega) {
    if (lambda.empty()) throw PreconditionViolated("check_iteration needs a nonempty index sequence");
    if (nu.size() != lambda.size()) throw PreconditionViolated("index and nullity sequences differ in length");
    IterationReport r;
    r.n = n;
    r.lambda = lambda;
    r.nu = nu;
    const int M = int(lambda.size());
    const int l1 = lambda[0], n1 = nu[0];
    for (int m = 1; m <= M; ++m) {
        const int lm = lambda[std::size_t(m - 1)], nm = nu[std::size_t(m - 1)];
        const int slack = (m - 1) * (n - 1);
        const GrowthBounds g = growth_bounds(l1, n, m);
        r.index_bound.push_back(std::abs(lm - m * l1) <= slack);
        r.index_nullity_bound.push_back(std::abs(lm + nm - m * (l1 + n1)) <= slack);
        r.nullity_bound.push_back(nm >= 0 && nm <= 2 * (n - 1));
        r.at_min.push_back(lm == g.min);
        r.at_max.push_back(lm == g.max);
    }
    for (int m = 1; m <= M; ++m) {
        bool up = true, down = true;
        if (!r.at_min[std::size_t(m - 1)] && lambda[std::size_t(m - 1)] > growth_bounds(l1, n, m).min)
            for (int j = m + 1; j <= M; ++j) up = up && lambda[std::size_t(j - 1)] > growth_bounds(l1, n, j).min;
        if (!r.at_max[std::size_t(m - 1)] && lambda[std::size_t(m - 1)] < growth_bounds(l1, n, m).max)
            for (int j = m + 1; j <= M; ++j) down = down && lambda[std::size_t(j - 1)] < growth_bounds(l1, n, j).max;
        r.above_min_propagates.push_back(up);
        r.below_max_propagates.push_back(down);
    }
    // The oscillating remainder lambda_m - m lambda_av does not decay like 1/m,
    // so the plain quotient is the estimate; the Richardson value is reported only.
    const int h = M / 2;
    r.lambda_av_richardson = h >= 1 ? 2.0 * lambda[std::size_t(M - 1)] / M - double(lambda[std::size_t(h - 1)]) / h
                                    : double(lambda[0]);
    double tol;
    if (omega) {
        r.lambda_av = average_index(*omega);
        r.lambda_av_exact = true;
        r.lambda_av_error = 0.0;
        tol = 1e-12;
    } else {
        r.lambda_av = double(lambda[std::size_t(M - 1)]) / M;
        r.lambda_av_error = 2.0 * (n - 1) / M;
        tol = r.lambda_av_error;
    }
    r.average_bound = std::abs(l1 - r.lambda_av) <= (n - 1) + tol;
    r.average_nullity_bound = std::abs(l1 + n1 - r.lambda_av) <= (n - 1) + tol;
    return r;
}

int based_index(int lambda1, int lambda_n, int n, Growth growth) {
    const int sq = (n - 1) * (n - 1);
    if (growth == Growth::max) {
        if (lambda_n != n * lambda1 + sq)
            throw GrowthFlagInconsistent(fmt::format("maximal growth needs lambda_n = {}, got {}", n * lambda1 + sq, lambda_n));
        return lambda1;
    }
    if (lambda_n != n * lambda1 - sq)
        throw GrowthFlagInconsistent(fmt::format("minimal growth needs lambda_n = {}, got {}", n * lambda1 - sq, lambda_n));
    return lambda1 - (n - 1);
}

}  // namespace closedgeo
