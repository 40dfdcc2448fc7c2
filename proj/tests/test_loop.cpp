#include "closedgeo/errors.hpp"
#include "closedgeo/loop.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace closedgeo;

namespace {

constexpr double kPi = std::numbers::pi;

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

// vertices at the given fractions of a horizontal straight loop on a torus of x-period L
DiscreteLoop torus_line(const ModelPtr& m, const std::vector<double>& fractions, double L, double y = 0.0) {
    std::vector<Vec> pts;
    for (double f : fractions) pts.push_back(v2(f * L, y));
    return DiscreteLoop::from_ambient(m, pts);
}

DiscreteLoop uniform_torus_line(const ModelPtr& m, int N, double L, bool vertical = false) {
    std::vector<Vec> pts;
    for (int i = 0; i < N; ++i) pts.push_back(vertical ? v2(0, L * i / N) : v2(L * i / N, 0));
    return DiscreteLoop::from_ambient(m, pts);
}

DiscreteLoop great_circle(const ModelPtr& m, int N, double phase = 0.0) {
    std::vector<Vec> pts;
    for (int i = 0; i < N; ++i) {
        const double t = 2 * kPi * i / N + phase;
        pts.push_back(m->embed_unit_sphere(v3(std::cos(t), std::sin(t), 0)));
    }
    return DiscreteLoop::from_ambient(m, pts);
}

// loop near a small circle of latitude with random radial and tangential jitter
DiscreteLoop random_sphere_loop(const ModelPtr& m, std::mt19937_64& rng, int N) {
    std::uniform_real_distribution<double> u(-1, 1);
    const double lat = 0.5 * u(rng);
    std::vector<Vec> pts;
    for (int i = 0; i < N; ++i) {
        const double t = 2 * kPi * (i + 0.3 * u(rng)) / N;
        const double z = lat + 0.05 * u(rng);
        const double r = std::sqrt(1 - z * z);
        pts.push_back(m->embed_unit_sphere(v3(r * std::cos(t), r * std::sin(t), z)));
    }
    return DiscreteLoop::from_ambient(m, pts);
}

double max_vertex_gap(const DiscreteLoop& a, const DiscreteLoop& b) {
    double g = 0.0;
    for (int i = 0; i <= a.N(); ++i) g = std::max(g, (a.ambient(i) - b.ambient(i)).norm());
    return g;
}

}  // namespace

TEST_CASE("loop construction") {
    auto m = make_flat_torus({1.0, 1.0});
    const auto loop = uniform_torus_line(m, 8, 1.0);
    CHECK(loop.N() == 8);
    CHECK(loop.vertex(8).coords == loop.vertex(0).coords);
    CHECK_THROWS_AS(uniform_torus_line(m, 4, 1.0), InvalidLoop);
    // a chord of length ~0.64 exceeds rho = 0.5
    std::vector<Vec> jump;
    for (int i = 0; i < 7; ++i) jump.push_back(v2(0.01 * i, 0));
    jump.push_back(v2(0.5, 0.45));
    CHECK_THROWS_AS(DiscreteLoop::from_ambient(m, jump), InvalidLoop);
}

TEST_CASE("metrics") {
    auto torus = make_flat_torus({1.0, 1.0});
    const auto c = metrics(DiscreteLoop::constant(torus, Point{0, v2(0.3, 0.3)}, 10));
    CHECK(c.energy == 0.0);
    CHECK(c.length == 0.0);
    CHECK(c.root_energy == 0.0);

    const auto t = metrics(uniform_torus_line(torus, 8, 1.0));
    CHECK(t.energy == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(t.length == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(t.is_ppal);

    // Riemannian chords: the discrete great circle has F = 2 pi R exactly
    for (double R : {1.0, 3.0}) {
        const auto g = metrics(great_circle(make_sphere(2, R), 64));
        CHECK(std::abs(g.root_energy - 2 * kPi * R) < 1e-12 * R);
        CHECK(g.is_ppal);
    }
}

TEST_CASE("Cauchy-Schwarz and the PPAL flag on random loops") {
    std::mt19937_64 rng(11);
    auto m = make_sphere(2);
    for (int k = 0; k < 200; ++k) {
        const auto loop = random_sphere_loop(m, rng, 16);
        const auto mt = metrics(loop);
        CHECK(mt.length * mt.length <= mt.energy * (1 + 1e-15));
        CHECK(!mt.is_ppal);
    }
    // metrics invariant under rotation
    const auto loop = random_sphere_loop(m, rng, 20);
    const auto a = metrics(loop), b = metrics(rotate(loop, 7));
    CHECK(b.energy == doctest::Approx(a.energy).epsilon(1e-14));
    CHECK(b.length == doctest::Approx(a.length).epsilon(1e-14));
}

TEST_CASE("ppal_reparam") {
    auto torus = make_flat_torus({1.0, 1.0});
    SUBCASE("uneven straight loop is resampled uniformly") {
        const auto loop = torus_line(torus, {0, 0.25, 0.3, 0.35, 0.5, 0.55, 0.6, 0.8}, 1.0, 0.2);
        const auto out = ppal_reparam(loop);
        for (int i = 0; i < 8; ++i) {
            CHECK(std::abs(out.ambient(i)(0) - i / 8.0) < 1e-12);
            CHECK(std::abs(out.ambient(i)(1) - 0.2) < 1e-14);
        }
        CHECK(metrics(out).length == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("already PPAL loops are unchanged") {
        const auto g = great_circle(make_sphere(2), 32, 0.1);
        CHECK(max_vertex_gap(ppal_reparam(g), g) < 1e-10);
        const auto e = great_circle(make_ellipsoid(1, 1.1, 1.3), 24);
        const auto ep = ppal_reparam(e);
        const auto pe = ppal_reparam(ep);
        CHECK(max_vertex_gap(pe, ep) < 1e-10);
    }
    SUBCASE("equal chords, basepoint kept, F does not increase") {
        std::mt19937_64 rng(5);
        auto m = make_sphere(2);
        for (int k = 0; k < 20; ++k) {
            const auto loop = random_sphere_loop(m, rng, 12);
            const auto out = ppal_reparam(loop);
            CHECK((out.ambient(0) - loop.ambient(0)).norm() == 0.0);
            const auto ch = out.chords();
            const auto [lo, hi] = std::minmax_element(ch.begin(), ch.end());
            CHECK((*hi - *lo) <= 1e-9 * *hi);
            const auto mi = metrics(loop), mo = metrics(out);
            CHECK(mo.is_ppal);
            CHECK(mo.root_energy < mi.root_energy);
            CHECK(std::abs(mo.root_energy - mo.length) <= 1e-9 * mo.length);
        }
    }
    SUBCASE("zero length") {
        CHECK_THROWS_AS(ppal_reparam(DiscreteLoop::constant(torus, Point{0, v2(0.1, 0.1)}, 8)), ZeroLengthLoop);
    }
}

TEST_CASE("concat_min") {
    SUBCASE("F(a) = 3, F(b) = 1") {
        auto m = make_flat_torus({3.0, 1.0});
        const auto a = uniform_torus_line(m, 12, 3.0);
        const auto b = uniform_torus_line(m, 8, 1.0, true);
        const auto r = concat_min(a, b);
        CHECK(r.s == doctest::Approx(0.75).epsilon(1e-15));
        CHECK(r.loop.N() == 20);
        CHECK(metrics(r.loop).root_energy == doctest::Approx(4.0).epsilon(1e-12));
        CHECK(metrics(r.loop).is_ppal);
    }
    SUBCASE("constant factor") {
        auto m = make_flat_torus({1.0, 1.0});
        const auto a = DiscreteLoop::constant(m, Point{0, v2(0, 0)}, 8);
        const auto b = uniform_torus_line(m, 8, 1.0);
        const auto r = concat_min(a, b);
        CHECK(r.s == 0.0);
        CHECK(metrics(r.loop).root_energy == doctest::Approx(1.0).epsilon(1e-12));
        const auto rb = concat_min(b, a);
        CHECK(rb.s == 1.0);
        const auto both = concat_min(a, a);
        CHECK(both.s == 0.0);
        CHECK(both.loop.N() == a.N());
    }
    SUBCASE("two great circles") {
        auto m = make_sphere(2);
        const auto g = great_circle(m, 64);
        const auto r = concat_min(g, g);
        CHECK(r.s == doctest::Approx(0.5));
        const double F = metrics(g).root_energy;
        CHECK(std::abs(metrics(r.loop).root_energy - 2 * F) <= 1e-6 * 2 * F);
    }
    SUBCASE("basepoint mismatch") {
        auto m = make_flat_torus({1.0, 1.0});
        const auto a = uniform_torus_line(m, 8, 1.0);
        const auto b = torus_line(m, {0, .125, .25, .375, .5, .625, .75, .875}, 1.0, 0.3);
        CHECK_THROWS_AS(concat_min(a, b), BasepointMismatch);
    }
    SUBCASE("rotating a glued pair by one half swaps the halves") {
        auto m = make_flat_torus({1.0, 1.0});
        const auto a = uniform_torus_line(m, 8, 1.0);
        const auto b = uniform_torus_line(m, 8, 1.0, true);
        const auto ab = concat_min(a, b).loop, ba = concat_min(b, a).loop;
        CHECK(max_vertex_gap(rotate(ab, 8), ba) < 1e-15);
    }
}

TEST_CASE("reparam_J") {
    auto m = make_flat_torus({4.0, 1.0});
    const auto loop = uniform_torus_line(m, 16, 4.0);
    SUBCASE("s = 1/2 is the identity") { CHECK(max_vertex_gap(reparam_J(loop, 0.5), loop) < 1e-12); }
    SUBCASE("half lengths split as s L and (1 - s) L") {
        const auto ch = reparam_J(loop, 0.25).chords();
        double first = 0, second = 0;
        for (int i = 0; i < 16; ++i) (i < 8 ? first : second) += ch[std::size_t(i)];
        CHECK(first == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(second == doctest::Approx(3.0).epsilon(1e-12));
    }
    SUBCASE("s = 0 is constant on the first half") {
        const auto out = reparam_J(loop, 0.0);
        for (int i = 0; i <= 8; ++i) CHECK((out.ambient(i) - loop.ambient(0)).norm() == 0.0);
    }
    SUBCASE("inverse family recovers the loop") {
        for (double s : {0.2, 0.4, 0.7}) CHECK(max_vertex_gap(reparam_J_inverse(reparam_J(loop, s), s), loop) < 1e-12);
        // on a curved loop the recovery error is second order in the chord
        auto sph = make_sphere(2);
        const auto g = great_circle(sph, 64);
        const double chord = 2 * kPi / 64;
        for (double s : {0.3, 0.6}) CHECK(max_vertex_gap(reparam_J_inverse(reparam_J(g, s), s), g) < chord * chord);
    }
}

TEST_CASE("rotate and iterate") {
    auto m = make_sphere(2);
    const auto g = great_circle(m, 64);
    CHECK(max_vertex_gap(rotate(g, 0), g) == 0.0);
    CHECK(max_vertex_gap(rotate(g, 64), g) == 0.0);
    CHECK(max_vertex_gap(iterate(g, 1), g) == 0.0);
    const auto g3 = iterate(g, 3);
    CHECK(g3.N() == 192);
    CHECK(std::abs(metrics(g3).root_energy - 3 * 2 * kPi) < 1e-11);
    CHECK(metrics(iterate(g, 2)).root_energy == doctest::Approx(2 * metrics(g).root_energy).epsilon(1e-14));
}

TEST_CASE("loop files round-trip bit-exactly") {
    std::mt19937_64 rng(2);
    for (auto m : {make_sphere(2), make_ellipsoid(1, 1.1, 1.3)}) {
        const auto loop = random_sphere_loop(m, rng, 16);
        const auto back = loop_from_string(loop_to_string(loop), m);
        REQUIRE(back.N() == loop.N());
        for (int i = 0; i <= loop.N(); ++i) {
            CHECK(back.vertex(i).chart == loop.vertex(i).chart);
            for (int k = 0; k < 2; ++k) CHECK(back.vertex(i).coords(k) == loop.vertex(i).coords(k));
        }
        CHECK(loop_to_string(back) == loop_to_string(loop));
    }
    const auto s = loop_to_string(great_circle(make_sphere(2), 16));
    CHECK_THROWS_AS(loop_from_string(s, make_sphere(2, 2.0)), ModelMismatch);
    CHECK_THROWS_AS(loop_from_string("closedgeo-loop 1\nmodel x\n", make_sphere(2)), ModelMismatch);
    CHECK_THROWS_AS(loop_from_string("nonsense\n", make_sphere(2)), ParseError);
}
