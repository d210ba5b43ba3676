#include <catch2/catch_amalgamated.hpp>

#include "mixlab/field.hpp"
#include "mixlab/lagrangian.hpp"

using namespace mixlab;

TEST_CASE("cellular field matches the printed formulas exactly") {
    auto f = cellular_field();
    Rng rng(12345);
    std::uniform_real_distribution<double> u(0.0, two_pi);
    for (int i = 0; i < 1000; ++i) {
        Vec2 x{u(rng), u(rng)};
        REQUIRE(f.eval(x) == Catch::Approx(std::sin(x.x) * std::sin(x.y)).margin(1e-15));
        Vec2 b = f.velocity(x);
        REQUIRE(b.x == Catch::Approx(-std::sin(x.x) * std::cos(x.y)).margin(1e-15));
        REQUIRE(b.y == Catch::Approx(std::cos(x.x) * std::sin(x.y)).margin(1e-15));
    }
}

TEST_CASE("orthogonality and speed identity at 1e4 random points") {
    auto f = cellular_field();
    Rng rng(777);
    std::uniform_real_distribution<double> u(0.0, two_pi);
    double max_dot = 0.0, max_speed_diff = 0.0;
    for (int i = 0; i < 10000; ++i) {
        Vec2 x{u(rng), u(rng)};
        Vec2 b = f.velocity(x), g = f.grad(x);
        max_dot = std::max(max_dot, std::abs(b.dot(g)));
        max_speed_diff = std::max(max_speed_diff, std::abs(b.norm() - g.norm()));
    }
    REQUIRE(max_dot <= 1e-12);
    REQUIRE(max_speed_diff <= 1e-12);
}

TEST_CASE("eval_velocity examples") {
    auto f = cellular_field();
    SECTION("elliptic critical point") {
        Vec2 b = eval_velocity(f, {pi / 2, pi / 2});
        REQUIRE(b.norm() <= 1e-15); // pi/2 is itself a rounded double
    }
    SECTION("hyperbolic critical point") {
        Vec2 b = eval_velocity(f, {0.0, 0.0});
        REQUIRE(b.x == 0.0);
        REQUIRE(b.y == 0.0);
    }
    SECTION("interior point, cross-checked by finite differences of H") {
        Vec2 x{pi / 2, pi / 4};
        Vec2 b = eval_velocity(f, x);
        REQUIRE(b.x == Catch::Approx(-std::cos(pi / 4)).margin(1e-15));
        REQUIRE(b.y == Catch::Approx(0.0).margin(1e-15));
        const double h = 1e-6;
        double d2 = (f.eval({x.x, x.y + h}) - f.eval({x.x, x.y - h})) / (2 * h);
        double d1 = (f.eval({x.x + h, x.y}) - f.eval({x.x - h, x.y})) / (2 * h);
        REQUIRE(b.x == Catch::Approx(-d2).margin(1e-9));
        REQUIRE(b.y == Catch::Approx(d1).margin(1e-9));
    }
}

TEST_CASE("speed_bounds examples and domain errors") {
    auto [lo, hi] = speed_bounds(0.5);
    REQUIRE(lo == Catch::Approx(0.5));
    REQUIRE(hi == Catch::Approx(1.5));
    auto [lo1, hi1] = speed_bounds(1.0 - 1e-12);
    REQUIRE(lo1 == Catch::Approx(0.0).margin(1e-11));
    REQUIRE(hi1 == Catch::Approx(0.0).margin(1e-11));
    auto [lo2, hi2] = speed_bounds(0.1);
    REQUIRE(lo2 == Catch::Approx(0.18));
    REQUIRE(hi2 == Catch::Approx(1.98));
    REQUIRE_THROWS_AS(speed_bounds(0.0), DomainError);
    REQUIRE_THROWS_AS(speed_bounds(1.5), DomainError);
}

TEST_CASE("speed_bounds bracket |b|^2 along traced orbits") {
    auto f = cellular_field();
    // sample ~1e3 points per orbit on 20 levels
    for (double h : linspace(0.05, 0.95, 20)) {
        auto [lo, hi] = speed_bounds(h);
        Vec2 x0{pi / 2, std::asin(h)};
        Trajectory traj = integrate_orbit(f, x0, 40.0, 1e-10);
        int step = std::max<int>(1, (int)traj.points.size() / 1000);
        for (size_t i = 0; i < traj.points.size(); i += step) {
            double s2 = f.velocity(traj.points[i]).norm2();
            REQUIRE(s2 >= lo - 1e-8);
            REQUIRE(s2 <= hi + 1e-8);
        }
    }
}

TEST_CASE("find_good_annulus on the cellular quarter-cell") {
    auto f = cellular_field();
    LevelAnnulus a = find_good_annulus(f, 0, 31, 200);
    REQUIRE(a.h_lo < 0.5);
    REQUIRE(a.h_hi > 0.5);
    // c_S(h)^2 = 2h(1-h) exactly; the sampled floor matches the window edges
    double edge_floor = std::min(2 * a.h_lo * (1 - a.h_lo), 2 * a.h_hi * (1 - a.h_hi));
    REQUIRE(sq(a.c0) >= edge_floor - 1e-3);
    REQUIRE(sq(a.c0) >= 0.45); // near-optimal window around h = 1/2

    SECTION("freshly sampled orbits respect the floor") {
        for (double h : {a.h_lo + 0.1 * (a.h_hi - a.h_lo), 0.5, a.h_hi - 0.1 * (a.h_hi - a.h_lo)}) {
            Vec2 x0{pi / 2, std::asin(h)};
            // fresh segment: start from a point not used by the scan
            Vec2 x1 = flow_map(f, x0, 1.2345, 1e-10);
            Trajectory traj = integrate_orbit(f, x1, 25.0, 1e-10);
            for (const auto& p : traj.points)
                REQUIRE(f.velocity(p).norm() >= a.c0 * (1.0 - 1e-3));
        }
    }
}

TEST_CASE("find_good_annulus rejects a constant Hamiltonian") {
    auto f = expr_field("1/2");
    REQUIRE_THROWS_AS(find_good_annulus(f, 0, 11, 50), DomainError);
}

TEST_CASE("find_good_annulus on the shear field brackets the fast band") {
    auto f = shear_cos_field();
    LevelAnnulus a = find_good_annulus(f, 0, 31, 100);
    REQUIRE(a.h_lo < 0.0);
    REQUIRE(a.h_hi > 0.0);
    // |b| = |sin x2| = sqrt(1 - h^2) along {H = h}
    REQUIRE(a.c0 >= 0.9);
}

TEST_CASE("expression fields") {
    SECTION("reproduces the cellular Hamiltonian") {
        auto f = expr_field("sin(x1)*sin(x2)");
        auto ref = cellular_field();
        Rng rng(42);
        std::uniform_real_distribution<double> u(0.0, two_pi);
        for (int i = 0; i < 200; ++i) {
            Vec2 x{u(rng), u(rng)};
            REQUIRE(f.eval(x) == Catch::Approx(ref.eval(x)).margin(1e-15));
            Vec2 b = f.velocity(x), br = ref.velocity(x);
            REQUIRE(b.x == Catch::Approx(br.x).margin(1e-8));
            REQUIRE(b.y == Catch::Approx(br.y).margin(1e-8));
        }
    }
    SECTION("grammar: powers, constants, unary minus") {
        auto f = expr_field("2^3^2 + 0*x1");
        REQUIRE(f.eval({0.3, 0.4}) == Catch::Approx(512.0));
        auto g = expr_field("-cos(pi*x1) + exp(0*x2)");
        REQUIRE(g.eval({1.0, 0.0}) == Catch::Approx(-std::cos(pi) + 1.0));
    }
    SECTION("parse errors") {
        REQUIRE_THROWS_AS(expr_field("sin(x1").eval({0, 0}), ConfigError);
        REQUIRE_THROWS_AS(make_field("expr:foo(x1)"), ConfigError);
        REQUIRE_THROWS_AS(make_field("nonsense"), ConfigError);
    }
}
