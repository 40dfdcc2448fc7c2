#include "closedgeo/bott.hpp"
#include "closedgeo/errors.hpp"
#include "closedgeo/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace closedgeo;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Matrix2d rot(double t) {
    Eigen::Matrix2d R;
    R << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    return R;
}

OmegaIndex sphere_omega() { return omega_from_poincare(Eigen::Matrix2d::Identity(), 1, 2); }

std::vector<int> iterates(const OmegaIndex& w, int M) {
    std::vector<int> l;
    for (int m = 1; m <= M; ++m) l.push_back(bott_sum(w, m));
    return l;
}

std::vector<double> candidates_of(const OmegaIndex& w) {
    std::vector<double> c;
    for (std::size_t k = 0; k < w.breaks.size(); ++k)
        if (w.nullity.size() > k && w.nullity[k] > 0) c.push_back(w.breaks[k]);
    return c;
}

DiscreteLoop circle_seed(const ModelPtr& m, int N, int axis, double pert, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<Vec> pts;
    for (int i = 0; i < N; ++i) {
        const double t = 2 * kPi * i / N;
        Vec b = Vec::Zero(3);
        b((axis + 1) % 3) = std::cos(t);
        b((axis + 2) % 3) = std::sin(t);
        for (int k = 0; k < 3; ++k) b(k) += pert * g(rng);
        pts.push_back(m->embed_unit_sphere(b.normalized()));
    }
    return DiscreteLoop::from_ambient(m, pts);
}

}  // namespace

TEST_CASE("fold_angle") {
    CHECK(fold_angle(0.0) == 0.0);
    CHECK(std::abs(fold_angle(1.5 * kPi) - 0.5 * kPi) < 1e-15);
    CHECK(std::abs(fold_angle(-0.3) - 0.3) < 1e-15);
    CHECK(std::abs(fold_angle(2 * kPi + 0.2) - 0.2) < 1e-14);
}

TEST_CASE("bott_sum basic values") {
    const auto zero = OmegaIndex::constant(0);
    for (int m = 1; m <= 10; ++m) CHECK(bott_sum(zero, m) == 0);
    const auto s = sphere_omega();
    CHECK(bott_sum(s, 3) == 5);
    for (int m = 1; m <= 12; ++m) CHECK(bott_sum(s, m) == 2 * m - 1);
    CHECK(bott_sum(s, 1) == s(0.0));
    CHECK(s(0.0) == 1);
    CHECK(s(kPi) == 2);
    CHECK(s(-1.0) == 2);
    CHECK_THROWS_AS(bott_sum(s, 0), PreconditionViolated);
    CHECK(nullity_sum(s, 5) == 2);
    CHECK(std::abs(average_index(s) - 2.0) < 1e-15);
}

TEST_CASE("omega_from_poincare classification") {
    SUBCASE("identity") {
        const auto w = sphere_omega();
        CHECK(w.kind == "identity");
        const auto [sm, sp] = w.splitting(0);
        CHECK(sm == 1);
        CHECK(sp == 1);
        CHECK(satisfies_bounds(w, 2));
    }
    SUBCASE("hyperbolic") {
        Eigen::Matrix2d P;
        P << 2.0, 0.0, 0.0, 0.5;
        const auto w = omega_from_poincare(P, 0);
        CHECK(w.kind == "hyperbolic");
        for (int m = 1; m <= 8; ++m) CHECK(bott_sum(w, m) == 0);
    }
    SUBCASE("elliptic both Krein signs") {
        const double th = 0.9;
        CHECK(krein_value(rot(th)) > 0.5);
        CHECK(krein_value(rot(-th)) < -0.5);
        const auto p = omega_from_poincare(rot(th), 1);
        CHECK(p.kind == "elliptic");
        CHECK(std::abs(p.breaks[1] - th) < 1e-12);
        CHECK(p(0.0) == 1);
        CHECK(p(0.5) == 1);
        CHECK(p(th) == 1);
        CHECK(p(2.0) == 2);
        CHECK(satisfies_bounds(p, 2));
        const auto q = omega_from_poincare(rot(-th), 3);
        CHECK(q(0.5) == 3);
        CHECK(q(th) == 2);
        CHECK(q(kPi) == 2);
        CHECK(satisfies_bounds(q, 2));
        // jumps of size one at the eigenvalue pair
        CHECK(std::abs(p.arc_values[1] - p.arc_values[0]) == 1);
    }
    SUBCASE("flat torus shear") {
        Eigen::Matrix2d P;
        P << 1.0, 1.0, 0.0, 1.0;
        const auto w = omega_from_poincare(P, 0);
        CHECK(w.kind == "shear");
        for (int m = 1; m <= 8; ++m) {
            CHECK(bott_sum(w, m) == 0);
            CHECK(nullity_sum(w, m) == 1);
        }
    }
    SUBCASE("ambiguous and excluded") {
        Eigen::Matrix2d P = Eigen::Matrix2d::Identity();
        P(0, 1) = 1e-5;
        CHECK_THROWS_AS(omega_from_poincare(P, 1), EigenvalueOnGridAmbiguous);
        Eigen::Matrix2d Q;
        Q << -1.0, 1.0, 0.0, -1.0;
        const auto w = omega_from_poincare(Q, 1);
        CHECK(w.excluded);
        CHECK_THROWS_AS(omega_from_poincare(Eigen::Matrix3d::Identity(), 1), PreconditionViolated);
    }
    SUBCASE("identity in higher dimension") {
        const auto w = omega_from_poincare(Eigen::MatrixXd::Identity(4, 4), 2, 3);
        for (int m = 1; m <= 6; ++m) CHECK(bott_sum(w, m) == 2 + 4 * (m - 1));
        CHECK(nullity_sum(w, 3) == 4);
    }
}

TEST_CASE("omega_from_iterates") {
    CHECK(same_function(omega_from_iterates({0, 0, 0, 0}, {0.0}), OmegaIndex::constant(0)));
    const auto s = omega_from_iterates({1, 3, 5, 7}, {0.0});
    CHECK(same_function(s, sphere_omega()));
    CHECK(s(0.0) == 1);
    CHECK(s(1.0) == 2);
    CHECK_THROWS_AS(omega_from_iterates({1, 3, 6}, {0.0}), InconsistentSystem);
    CHECK_THROWS_AS(omega_from_iterates({}, {0.0}), InconsistentSystem);
}

TEST_CASE("omega_from_iterates inverts bott_sum") {
    std::vector<OmegaIndex> cases = {sphere_omega(), OmegaIndex::constant(2)};
    for (double th : {0.4, 1.1, 2.3, 2.9})
        for (int l1 : {1, 3}) {
            cases.push_back(omega_from_poincare(rot(th), l1));
            cases.push_back(omega_from_poincare(rot(-th), l1));
        }
    Eigen::Matrix2d shear;
    shear << 1.0, 0.7, 0.0, 1.0;
    cases.push_back(omega_from_poincare(shear, 0));
    for (const auto& w : cases) {
        const int M = 48;
        const auto back = omega_from_iterates(iterates(w, M), candidates_of(w));
        CHECK(same_function(back, w));
    }
}

TEST_CASE("growth_bounds") {
    auto g = growth_bounds(1, 2, 3);
    CHECK(g.min == 1);
    CHECK(g.max == 5);
    g = growth_bounds(4, 3, 1);
    CHECK(g.min == 4);
    CHECK(g.max == 4);
    g = growth_bounds(0, 3, 4);
    CHECK(g.min == -6);
    CHECK(g.max == 6);
    CHECK(g.clamped);
    CHECK(g.clamped_min == 0);
    CHECK_THROWS_AS(growth_bounds(1, 2, 0), PreconditionViolated);
}

TEST_CASE("check_iteration") {
    SUBCASE("round sphere data") {
        std::vector<int> l, nu;
        for (int m = 1; m <= 16; ++m) l.push_back(2 * m - 1), nu.push_back(2);
        const auto r = check_iteration(l, nu, 2);
        CHECK(r.all_hold());
        for (int m = 1; m <= 16; ++m) CHECK(r.at_max[std::size_t(m - 1)]);
        CHECK(std::abs(r.lambda_av - 2.0) <= r.lambda_av_error);
        CHECK(r.lambda_av_error == doctest::Approx(2.0 / 16).epsilon(1e-15));
        const auto s = sphere_omega();
        const auto e = check_iteration(l, nu, 2, &s);
        CHECK(e.lambda_av_exact);
        CHECK(e.lambda_av == 2.0);
        CHECK(std::abs(l[0] - e.lambda_av) == 1.0);
        CHECK(e.all_hold());
    }
    SUBCASE("flat torus data") {
        const auto r = check_iteration({0, 0, 0, 0, 0}, {1, 1, 1, 1, 1}, 2);
        CHECK(r.all_hold());
        CHECK(r.lambda_av == 0.0);
    }
    SUBCASE("violating sequence") {
        const auto r = check_iteration({2, 6}, {0, 0}, 2);
        CHECK_FALSE(r.index_bound[1]);
        CHECK(r.index_bound[0]);
        CHECK_FALSE(r.all_hold());
        CHECK_FALSE(r.violations().empty());
    }
    SUBCASE("propagation") {
        // strictly above min at m = 2 but back on the min at m = 3
        const auto r = check_iteration({1, 2, 1}, {0, 0, 0}, 2);
        CHECK_FALSE(r.above_min_propagates[1]);
    }
    SUBCASE("nullity bound") {
        const auto r = check_iteration({1, 3}, {2, 3}, 2);
        CHECK_FALSE(r.nullity_bound[1]);
    }
    CHECK_THROWS_AS(check_iteration({}, {}, 2), PreconditionViolated);
}

TEST_CASE("based_index") {
    CHECK(based_index(1, 3, 2, Growth::max) == 1);
    CHECK(based_index(3, 5, 3, Growth::min) == 1);
    CHECK(based_index(4, 4, 1, Growth::max) == 4);
    CHECK(based_index(4, 4, 1, Growth::min) == 4);
    CHECK_THROWS_AS(based_index(1, 2, 2, Growth::max), GrowthFlagInconsistent);
    CHECK_THROWS_AS(based_index(3, 9, 3, Growth::min), GrowthFlagInconsistent);
}

TEST_CASE("Bott formula reproduces Hessian indices of real orbits") {
    struct Case {
        ModelPtr model;
        int axis;
    };
    const auto ell = make_ellipsoid(1, 1.1, 1.3);
    const auto pert = make_perturbed_sphere(0.05);
    const std::vector<Case> cases = {{make_sphere(2), 2}, {ell, 0}, {ell, 2}, {pert, 0}, {pert, 1}, {pert, 2}};
    for (const auto& c : cases) {
        auto o = find_critical(circle_seed(c.model, 80, c.axis, 0.01, 2));
        const int l1 = hessian_index(o, 1).lambda;
        const auto w = omega_from_poincare(poincare_map(o), l1);
        REQUIRE_FALSE(w.excluded);
        CHECK(satisfies_bounds(w, 2));
        std::vector<int> lam, nu;
        for (int m = 1; m <= 5; ++m) {
            const auto r = hessian_index(o, m);
            CHECK(bott_sum(w, m) == r.lambda);
            CHECK(upsilon_sum(w, m) == r.lambda + r.nu);
            lam.push_back(r.lambda);
            nu.push_back(r.nu);
        }
        const auto rep = check_iteration(lam, nu, 2);
        CHECK(rep.all_hold());
        CHECK(std::abs(rep.lambda_av - average_index(w)) <= 2.0 / 5);
    }
}
