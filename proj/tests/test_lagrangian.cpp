#include <catch2/catch_amalgamated.hpp>

#include "mixlab/lagrangian.hpp"
#include "mixlab/period.hpp"

using namespace mixlab;

TEST_CASE("fixed point stays fixed") {
    auto f = cellular_field();
    Trajectory traj = integrate_orbit(f, {pi / 2, pi / 2}, 25.0, 1e-10);
    for (const auto& p : traj.points) {
        REQUIRE(p.x == Catch::Approx(pi / 2).margin(1e-12));
        REQUIRE(p.y == Catch::Approx(pi / 2).margin(1e-12));
    }
    REQUIRE(traj.h_drift <= 1e-14);
}

TEST_CASE("H drift stays within budget over t = 100") {
    auto f = cellular_field();
    Trajectory traj = integrate_orbit(f, {pi / 2, std::asin(0.5)}, 100.0, 1e-10);
    REQUIRE(traj.h_drift <= 1e-7);
    REQUIRE(traj.times.size() == traj.points.size());
    for (size_t i = 1; i < traj.times.size(); ++i) REQUIRE(traj.times[i] > traj.times[i - 1]);
}

TEST_CASE("orbit returns to its start at multiples of the period") {
    auto f = cellular_field();
    double h = 0.9;
    double T = period_agm(h);
    Vec2 x0{pi / 2, std::asin(h)};
    for (int k = 1; k <= 3; ++k) {
        Vec2 xk = flow_map(f, x0, k * T, 1e-12);
        REQUIRE((xk - x0).norm() <= 1e-6);
    }
}

TEST_CASE("return_period examples") {
    auto f = cellular_field();
    SECTION("near the center the period approaches 2 pi") {
        OrbitPeriod p = return_period(f, 1.0 - 1e-6);
        REQUIRE(p.period == Catch::Approx(two_pi).epsilon(1e-3));
    }
    SECTION("near the separatrix the period grows like 4 ln(4/h)") {
        OrbitPeriod p = return_period(f, 1e-3);
        REQUIRE(p.period == Catch::Approx(4.0 * std::log(4.0 / 1e-3)).epsilon(0.01));
    }
    SECTION("cross-method oracle at h = 1/2") {
        OrbitPeriod p = return_period(f, 0.5);
        REQUIRE(p.period == Catch::Approx(period_agm(0.5)).epsilon(1e-6));
    }
    SECTION("separatrix guard") {
        REQUIRE_THROWS_AS(return_period(f, 1e-5), DomainError);
        REQUIRE_THROWS_AS(return_period(f, 1.0 - 1e-8), DomainError);
    }
}

TEST_CASE("time reversal returns to the start") {
    auto f = cellular_field();
    Rng rng(2024);
    std::uniform_real_distribution<double> uh(0.1, 0.9);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    const double tol = 1e-11;
    for (int i = 0; i < 100; ++i) {
        double h = uh(rng);
        Vec2 x0 = flow_map(f, {pi / 2, std::asin(h)}, 5.0 * ut(rng), 1e-12);
        double t = 1.0 + 9.0 * ut(rng);
        Vec2 fwd = flow_map(f, x0, t, tol);
        Vec2 back = flow_map(f, fwd, -t, tol);
        REQUIRE((back - x0).norm() <= 10 * tol * (1.0 + t));
    }
}

TEST_CASE("volume preservation proxy: tracked area element over one period") {
    auto f = cellular_field();
    double h = 0.5;
    double T = period_agm(h);
    Vec2 c{pi / 2, std::asin(h)};
    const double d = 1e-5, tol = 1e-13;
    // centered parallelogram spanned by tracked +-delta offsets
    Vec2 xp = flow_map(f, {c.x + d, c.y}, T, tol);
    Vec2 xm = flow_map(f, {c.x - d, c.y}, T, tol);
    Vec2 yp = flow_map(f, {c.x, c.y + d}, T, tol);
    Vec2 ym = flow_map(f, {c.x, c.y - d}, T, tol);
    double area = 0.5 * std::abs((xp - xm).cross(yp - ym));
    double area0 = 0.5 * std::abs((Vec2{2 * d, 0}).cross(Vec2{0, 2 * d}));
    REQUIRE(area == Catch::Approx(area0).epsilon(1e-6));
}

TEST_CASE("period is independent of the launch point on the orbit") {
    auto f = cellular_field();
    Vec2 center{pi / 2, pi / 2};
    for (double h : linspace(0.15, 0.9, 10)) {
        OrbitPeriod ref = return_period(f, h, {1e-12, 2000.0, true});
        for (double frac : {0.3, 0.6, 0.85}) {
            Vec2 x0 = flow_map(f, {pi / 2, std::asin(h)}, frac * ref.period, 1e-12);
            OrbitPeriod p = return_period_around(f, x0, center, {1e-12, 2000.0, true});
            REQUIRE(p.period == Catch::Approx(ref.period).epsilon(1e-8));
        }
    }
}

TEST_CASE("gradient growth probe") {
    auto f = cellular_field();
    SECTION("identity at time zero") {
        REQUIRE(gradient_growth_probe(f, 0.3, 0.0, 1e-5) == Catch::Approx(1.0));
    }
    SECTION("delta below the noise floor is rejected") {
        REQUIRE_THROWS_AS(gradient_growth_probe(f, 0.3, 1.0, 1e-13, 1e-12), DomainError);
    }
    SECTION("amplification matches the closed-form growth oracle") {
        // at t = k T(r) the difference quotient is sqrt(1 + (c t)^2) with
        // c = |dT/dr| |b| / T, all three measurable independently
        double r = 0.3;
        double h = std::cos(r);
        double T = period_agm(h);
        double c = std::abs(period_derivative(h)) * std::sin(r) * std::sin(r) / T;
        for (double t : {50.0, 100.0}) {
            double t_eff = std::round(t / T) * T;
            double expected = std::sqrt(1.0 + sq(c * t_eff));
            double amp = gradient_growth_probe(f, r, t, 1e-5);
            REQUIRE(amp == Catch::Approx(expected).epsilon(0.02));
        }
    }
    SECTION("amplification grows linearly in t once the winding dominates") {
        double a1 = gradient_growth_probe(f, 0.3, 500.0, 1e-5);
        double a2 = gradient_growth_probe(f, 0.3, 1000.0, 1e-5);
        double ratio = (a2 - 1.0) / (a1 - 1.0);
        REQUIRE(ratio >= 1.8);
        REQUIRE(ratio <= 2.2);
    }
}

TEST_CASE("linear gradient growth on a good annulus") {
    auto f = cellular_field();
    // separation of nearby trajectories transverse to the orbit, h in the bulk
    double h = 0.5;
    Vec2 x0{pi / 2, std::asin(h)};
    Vec2 g = f.grad(x0);
    Vec2 dir = g / g.norm();
    const double d = 1e-6, tol = 1e-12;
    auto amp = [&](double t) {
        Vec2 a = flow_map(f, x0, t, tol);
        Vec2 b = flow_map(f, {x0.x + d * dir.x, x0.y + d * dir.y}, t, tol);
        return (a - b).norm() / d;
    };
    // calibrate C on t <= 10, then check the linear envelope at t = 100
    double C = 0.0;
    for (double t : linspace(1.0, 10.0, 10)) C = std::max(C, amp(t) / (1.0 + t));
    REQUIRE(amp(100.0) <= 1.05 * C * (1.0 + 100.0));
}
