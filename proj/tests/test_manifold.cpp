#include "closedgeo/errors.hpp"
#include "closedgeo/manifold.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace closedgeo;

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}
Vec v3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

Point torus_pt(double a, double b) { return Point{0, v2(a, b)}; }

// arc length of the meridian x = sin t, z = c cos t between t0 and t1
double meridian_arc(double c, double t0, double t1) {
    auto f = [c](double t) { return std::hypot(std::cos(t), c * std::sin(t)); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, t0, t1, 12, 1e-15);
}

// shooting on the ellipsoid in spherical parameters with an adaptive integrator,
// independent of the library's own RK4/Gauss-Newton shooting
struct EllipsoidOracle {
    double a, b, c;
    using State = std::array<double, 6>;

    void rhs(const State& s, State& ds) const {
        const double px = s[0], py = s[1], pz = s[2];
        const double vx = s[3], vy = s[4], vz = s[5];
        const double gx = px / (a * a), gy = py / (b * b), gz = pz / (c * c);
        const double vhv = vx * vx / (a * a) + vy * vy / (b * b) + vz * vz / (c * c);
        const double lam = vhv / (gx * gx + gy * gy + gz * gz);
        ds = {vx, vy, vz, -lam * gx, -lam * gy, -lam * gz};
    }
    std::array<double, 3> endpoint(const std::array<double, 3>& p, const std::array<double, 3>& v) const {
        using namespace boost::numeric::odeint;
        State s{p[0], p[1], p[2], v[0], v[1], v[2]};
        auto stepper = make_controlled(1e-14, 1e-14, runge_kutta_dopri5<State>());
        integrate_adaptive(stepper, [this](const State& x, State& dx, double) { rhs(x, dx); }, s, 0.0, 1.0, 1e-3);
        return {s[0], s[1], s[2]};
    }
    double distance(const std::array<double, 3>& p, const std::array<double, 3>& q) const {
        // tangent basis at p
        const Eigen::Vector3d P(p[0], p[1], p[2]);
        const Eigen::Vector3d nrm = Eigen::Vector3d(p[0] / (a * a), p[1] / (b * b), p[2] / (c * c)).normalized();
        Eigen::Vector3d e1 = (Eigen::Vector3d(q[0], q[1], q[2]) - P);
        e1 = (e1 - e1.dot(nrm) * nrm).normalized();
        const Eigen::Vector3d e2 = nrm.cross(e1);
        Eigen::Vector2d x(std::sqrt((Eigen::Vector3d(q[0], q[1], q[2]) - P).squaredNorm()), 0.0);
        const Eigen::Vector3d Q(q[0], q[1], q[2]);
        for (int it = 0; it < 40; ++it) {
            auto shoot = [&](const Eigen::Vector2d& y) {
                const Eigen::Vector3d v = y(0) * e1 + y(1) * e2;
                const auto r = endpoint(p, {v(0), v(1), v(2)});
                return Eigen::Vector3d(r[0], r[1], r[2]);
            };
            const Eigen::Vector3d r0 = shoot(x);
            Eigen::Matrix<double, 3, 2> J;
            const double h = 1e-6;
            for (int k = 0; k < 2; ++k) {
                Eigen::Vector2d y = x;
                y(k) += h;
                Eigen::Vector2d z = x;
                z(k) -= h;
                J.col(k) = (shoot(y) - shoot(z)) / (2 * h);
            }
            const Eigen::Vector2d d = J.colPivHouseholderQr().solve(Q - r0);
            x += d;
            if (d.norm() < 1e-15) break;
        }
        return x.norm();
    }
};

}  // namespace

TEST_CASE("flat torus distance and straight segments") {
    auto m = make_flat_torus({1.0, 1.0});
    CHECK(local_distance(*m, torus_pt(0, 0), torus_pt(0.3, 0)) == doctest::Approx(0.3).epsilon(1e-15));
    // wraps through the boundary
    CHECK(local_distance(*m, torus_pt(0.05, 0), torus_pt(0.95, 0)) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_THROWS_AS(local_distance(*m, torus_pt(0, 0), torus_pt(0.45, 0.45)), PointsTooFar);

    const auto pts = short_geodesic(*m, torus_pt(0, 0), torus_pt(0.4, 0), 4);
    REQUIRE(pts.size() == 3);
    for (int j = 0; j < 3; ++j) {
        CHECK(pts[j].coords(0) == doctest::Approx(0.1 * (j + 1)).epsilon(1e-14));
        CHECK(std::abs(pts[j].coords(1)) < 1e-15);
    }
    const auto same = short_geodesic(*m, torus_pt(0.2, 0.7), torus_pt(0.2, 0.7), 5);
    REQUIRE(same.size() == 4);
    for (const auto& p : same) CHECK((p.coords - v2(0.2, 0.7)).norm() == 0.0);
}

TEST_CASE("round sphere distance and midpoint") {
    auto m = make_sphere(2, 1.0);
    const Point x = point_on_unit_sphere(*m, v3(1, 0, 0));
    const Point y = point_on_unit_sphere(*m, v3(std::cos(0.2), std::sin(0.2), 0));
    CHECK(local_distance(*m, x, y) == doctest::Approx(0.2).epsilon(1e-13));
    CHECK(local_distance(*m, y, x) == doctest::Approx(0.2).epsilon(1e-13));
    CHECK(local_distance(*m, x, x) == 0.0);

    const Point z = point_on_unit_sphere(*m, v3(std::cos(0.5), 0, std::sin(0.5)));
    const auto mid = short_geodesic(*m, x, z, 2);
    REQUIRE(mid.size() == 1);
    const Vec pm = m->to_ambient(mid[0]);
    CHECK((pm - v3(std::cos(0.25), 0, std::sin(0.25))).norm() < 1e-10);
}

TEST_CASE("ellipsoid distance against independent oracles") {
    auto m = make_ellipsoid(1, 1, 1.2);
    SUBCASE("meridian arc by quadrature") {
        const double t0 = 0.7, t1 = 1.1;
        const Point x = m->from_ambient(v3(std::sin(t0), 0, 1.2 * std::cos(t0)));
        const Point y = m->from_ambient(v3(std::sin(t1), 0, 1.2 * std::cos(t1)));
        CHECK(std::abs(local_distance(*m, x, y) - meridian_arc(1.2, t0, t1)) < 1e-8);
    }
    SUBCASE("generic pair by adaptive shooting") {
        const EllipsoidOracle oracle{1, 1, 1.2};
        auto on = [](double th, double ph) {
            return std::array<double, 3>{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), 1.2 * std::cos(th)};
        };
        const auto p = on(0.9, 0.2), q = on(1.25, 0.55);
        const double ref = oracle.distance(p, q);
        const double got = local_distance(*m, m->from_ambient(v3(p[0], p[1], p[2])), m->from_ambient(v3(q[0], q[1], q[2])));
        CHECK(std::abs(got - ref) < 1e-8);
    }
}

TEST_CASE("triangle inequality on random triples") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    for (auto m : {make_sphere(2), make_ellipsoid(1, 1.1, 1.3), make_perturbed_sphere(0.05)}) {
        int tested = 0;
        while (tested < 30) {
            Vec c = v3(g(rng), g(rng), g(rng)).normalized();
            auto near = [&]() { return point_on_unit_sphere(*m, c + 0.4 * v3(g(rng), g(rng), g(rng))); };
            const Point a = near(), b = near(), d = near();
            try {
                const double ab = local_distance(*m, a, b), bd = local_distance(*m, b, d), ad = local_distance(*m, a, d);
                CHECK(ad <= ab + bd + 1e-9);
                ++tested;
            } catch (const PointsTooFar&) {
            }
        }
    }
}

TEST_CASE("geodesic flow") {
    SUBCASE("torus translation") {
        auto m = make_flat_torus({1.0, 1.0});
        const TangentVector v{torus_pt(0, 0), v2(1, 0)};
        const auto w = geodesic_flow(*m, v, 0.5, 16);
        CHECK((w.base.coords - v2(0.5, 0)).norm() < 1e-15);
        CHECK((w.components - v2(1, 0)).norm() < 1e-15);
    }
    SUBCASE("t = 0 is the identity") {
        for (auto m : {make_sphere(2), make_ellipsoid(1, 1.1, 1.3)}) {
            const Point p = point_on_unit_sphere(*m, v3(0.3, 0.4, 0.8));
            const TangentVector v{p, v2(0.2, -0.1)};
            const auto w = geodesic_flow(*m, v, 0.0, 16);
            CHECK(w.base.chart == v.base.chart);
            CHECK((w.components - v.components).norm() == 0.0);
        }
    }
    SUBCASE("equator closes at 2 pi") {
        for (double R : {1.0, 2.5}) {
            auto m = make_sphere(2, R);
            const Vec p = v3(R, 0, 0), u = v3(0, 1, 0);
            const TangentVector v = tangent_from_ambient(*m, p, u);
            const auto w = geodesic_flow(*m, v, 2 * std::numbers::pi * R, 2000);
            CHECK((m->to_ambient(w.base) - p).norm() < 1e-8);
            CHECK((tangent_to_ambient(*m, w) - u).norm() < 1e-8);
        }
    }
    SUBCASE("speed conservation") {
        std::mt19937_64 rng(3);
        std::normal_distribution<double> g;
        for (auto m : {make_sphere(2), make_ellipsoid(1, 1.1, 1.3), make_perturbed_sphere(0.05)}) {
            for (int k = 0; k < 5; ++k) {
                const Vec p = m->embed_unit_sphere(v3(g(rng), g(rng), g(rng)).normalized());
                const Vec u = m->project_tangent(p, v3(g(rng), g(rng), g(rng)));
                const Vec un = u / m->norm(p, u);
                const auto w = geodesic_flow(*m, tangent_from_ambient(*m, p, un), 3.0, 3000);
                const Vec pw = m->to_ambient(w.base);
                CHECK(std::abs(m->norm(pw, tangent_to_ambient(*m, w)) - 1.0) < 1e-9);
            }
        }
    }
    SUBCASE("coarse steps are rejected") {
        auto m = make_ellipsoid(1, 1.1, 1.3);
        const Vec p = v3(1, 0, 0);
        const TangentVector v = tangent_from_ambient(*m, p, v3(0, 0.6, 0.8));
        CHECK_THROWS_AS(geodesic_flow(*m, v, 20.0, 16), StepTooCoarse);
        CHECK_THROWS_AS(geodesic_flow(*m, v, 1.0, 8), PreconditionViolated);
    }
}

TEST_CASE("config parsing") {
    const auto cfg = model_config_from(parse_key_values("kind = ellipsoid\naxes = 1, 1.1, 1.3  # waist\n"));
    CHECK(cfg.kind == ModelKind::ellipsoid);
    CHECK(cfg.axes.size() == 3);
    try {
        model_config_from(parse_key_values("kind = sphere\nradiuss = 2\n"));
        FAIL("accepted unknown key");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("radiuss") != std::string::npos);
    }
    CHECK_THROWS_AS(model_config_from(parse_key_values("kind = sphere\nradius = -1\n")), ConfigError);
    CHECK_THROWS_AS(model_config_from(parse_key_values("kind = flat_torus\n")), ConfigError);
    CHECK_THROWS_AS(make_perturbed_sphere(2.0), ConfigError);
    CHECK(make_sphere(2, 1.0)->hash() == make_sphere(2, 1.0)->hash());
    CHECK(make_sphere(2, 1.0)->hash() != make_sphere(2, 2.0)->hash());
}

TEST_CASE("curvature and rho") {
    CHECK(make_sphere(2, 2.0)->rho() == doctest::Approx(2 * std::numbers::pi));
    CHECK(make_flat_torus({1.0, 0.8})->rho() == doctest::Approx(0.4));
    auto e = make_ellipsoid(1, 1.1, 1.3);
    // K at the tip of the longest axis is a^2 / (b^2 c^2) with a = 1.3
    CHECK(e->gaussian_curvature(v3(0, 0, 1.3)) == doctest::Approx(1.3 * 1.3 / (1.1 * 1.1)));
    CHECK(e->rho() == doctest::Approx(std::numbers::pi * 1.1 / 1.3));
    CHECK_THROWS_AS(make_sphere(3)->embed_unit_sphere(v3(1, 0, 0)), PreconditionViolated);
    CHECK_THROWS_AS(make_flat_torus({1.0, 1.0})->embed_unit_sphere(v3(1, 0, 0)), PreconditionViolated);
    // Gauss-Bonnet: total curvature over the sphere is 4 pi
    auto ps = make_perturbed_sphere(0.05);
    const int nt = 200, np = 400;
    double total = 0.0;
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < np; ++j) {
            const double th = (i + 0.5) * std::numbers::pi / nt, ph = (j + 0.5) * 2 * std::numbers::pi / np;
            const Vec x = v3(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
            const double area = std::sin(th) * (std::numbers::pi / nt) * (2 * std::numbers::pi / np);
            // area element scales by the conformal factor e^{2 eps f}
            const double conf = ps->inner(x, v3(1, 0, 0) - x(0) * x, v3(1, 0, 0) - x(0) * x) /
                                (v3(1, 0, 0) - x(0) * x).squaredNorm();
            total += ps->gaussian_curvature(x) * conf * area;
        }
    CHECK(total == doctest::Approx(4 * std::numbers::pi).epsilon(1e-4));
}
