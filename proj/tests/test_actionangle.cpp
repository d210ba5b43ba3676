#include <catch2/catch_amalgamated.hpp>

#include "mixlab/actionangle.hpp"
#include "mixlab/period.hpp"

using namespace mixlab;

TEST_CASE("transversal matches the analytic cellular arc") {
    auto f = cellular_field();
    double h0 = 0.2, h1 = 0.8;
    TransversalCurve c = build_transversal(f, h0, h1, {pi / 2, std::asin(h0)}, 25);
    for (int i = 0; i < 25; ++i) {
        REQUIRE(c.points[i].x == Catch::Approx(pi / 2).margin(1e-8));
        REQUIRE(c.points[i].y == Catch::Approx(std::asin(c.levels[i])).margin(1e-8));
        REQUIRE(c.residuals[i] <= 1e-9);
    }
}

TEST_CASE("transversal degenerate cases") {
    auto f = cellular_field();
    SECTION("single node") {
        TransversalCurve c = build_transversal(f, 0.5, 0.5, {pi / 2, std::asin(0.5)}, 1);
        REQUIRE(c.points.size() == 1);
        REQUIRE(std::abs(f.eval(c.points[0]) - 0.5) <= 1e-12);
    }
    SECTION("shear transversal is a vertical segment") {
        auto s = shear_cos_field();
        double h0 = -0.5;
        Vec2 x0{1.0, std::acos(0.5)}; // H = -cos(x2) = -0.5
        TransversalCurve c = build_transversal(s, h0, 0.5, x0, 15);
        for (const auto& p : c.points) REQUIRE(p.x == Catch::Approx(1.0).margin(1e-10));
        for (int i = 0; i < 15; ++i)
            REQUIRE(s.eval(c.points[i]) == Catch::Approx(c.levels[i]).margin(1e-9));
    }
}

TEST_CASE("Jacobian identity |det DPhi| = T(h) on the 64x32 cellular chart") {
    auto chart = build_cellular_chart(0.2, 0.8, 32, 64);
    double worst = 0.0, worst_drift = 0.0;
    for (size_t i = 0; i < chart.s.size(); ++i) {
        double ref = chart.jac_reference(i); // = T(h)
        for (int j = 0; j < chart.n_theta; ++j) {
            worst = std::max(worst, std::abs(chart.jac[i][j] - ref) / ref);
            worst_drift =
                std::max(worst_drift, std::abs(chart.field.eval(chart.pos[i][j]) - chart.h[i]));
        }
    }
    REQUIRE(worst <= 1e-4);
    REQUIRE(worst_drift <= 1e-8); // Phi(.,h) traces the level set
}

TEST_CASE("chart starts on the transversal: Phi(0,h) = x(h)") {
    auto chart = build_cellular_chart(0.25, 0.75, 12, 32);
    for (size_t i = 0; i < chart.s.size(); ++i) {
        REQUIRE(chart.pos[i][0].x == Catch::Approx(pi / 2).margin(1e-10));
        REQUIRE(chart.pos[i][0].y == Catch::Approx(std::asin(chart.s[i])).margin(1e-10));
    }
}

TEST_CASE("cellular tilde chart") {
    double I0 = std::asin(0.25), I1 = std::asin(0.9);
    auto chart = build_cellular_chart(I0, I1, 20, 48, ActionAngleChart::CellularTilde);
    SECTION("periods satisfy T~(I) = T(sin I)") {
        for (size_t i = 0; i < chart.s.size(); ++i)
            REQUIRE(chart.T[i] == Catch::Approx(period_agm(std::sin(chart.s[i]))).margin(1e-8));
    }
    SECTION("Jacobian identity |det DPhi~| = T~(I) cos I") {
        for (size_t i = 0; i < chart.s.size(); ++i) {
            double ref = chart.T[i] * std::cos(chart.s[i]);
            for (int j = 0; j < chart.n_theta; ++j)
                REQUIRE(std::abs(chart.jac[i][j] - ref) / ref <= 2e-4);
        }
    }
    SECTION("derivative bounds of the reparametrized chart") {
        // |d_theta Phi~| <~ |ln I| (pi/2 - I) and |d_I Phi~| <~ 1/I
        double c_theta = 0.0, c_level = 0.0;
        for (size_t i = 0; i < chart.s.size(); ++i) {
            double I = chart.s[i];
            for (int j = 0; j < chart.n_theta; ++j) {
                c_theta = std::max(c_theta, chart.dth[i][j].norm() /
                                                (std::abs(std::log(I)) * (pi / 2 - I)));
                c_level = std::max(c_level, chart.ds[i][j].norm() * I);
            }
        }
        REQUIRE(c_theta <= 30.0);
        REQUIRE(c_level <= 30.0);
    }
}

TEST_CASE("angle_of_point inverts the chart") {
    auto chart = build_cellular_chart(0.2, 0.8, 48, 96);
    SECTION("transversal nodes sit at theta = 0") {
        for (size_t i = 1; i + 1 < chart.s.size(); ++i) {
            AnglePoint ap = angle_of_point(chart, chart.pos[i][0]);
            double th = ap.theta > 0.5 ? ap.theta - 1.0 : ap.theta;
            REQUIRE(std::abs(th) <= 1e-7);
        }
    }
    SECTION("round trip on 1e3 random interior points") {
        Rng rng(99);
        std::uniform_real_distribution<double> uh(0.22, 0.78);
        std::uniform_real_distribution<double> uth(0.0, 1.0);
        for (int trial = 0; trial < 1000; ++trial) {
            Vec2 x = chart_eval(chart, uth(rng), uh(rng));
            AnglePoint ap = angle_of_point(chart, x);
            Vec2 back = chart_eval(chart, ap.theta, ap.s);
            REQUIRE((back - x).norm() <= 1e-6);
        }
    }
    SECTION("outside the annulus is rejected") {
        REQUIRE_THROWS_AS(angle_of_point(chart, Vec2{pi / 2, std::asin(0.05)}), DomainError);
    }
}

TEST_CASE("angle evolution law Psi(X(t,x)) = Psi(x) + t/T") {
    auto chart = build_cellular_chart(0.25, 0.75, 64, 128);
    Rng rng(31415);
    std::uniform_real_distribution<double> uh(0.28, 0.72);
    std::uniform_real_distribution<double> uth(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        double h = uh(rng);
        Vec2 x = chart_eval(chart, uth(rng), h);
        double T = period_agm(chart.field.eval(x));
        double t = trial == 0 ? 7.3 : uth(rng) * 10.0 * T;
        Vec2 xt = flow_map(chart.field, x, t, 1e-12);
        double defect =
            angle_of_point(chart, xt).theta - angle_of_point(chart, x).theta - t / T;
        defect -= std::round(defect);
        worst = std::max(worst, std::abs(defect));
    }
    REQUIRE(worst <= 1e-5);
}

TEST_CASE("chart inversion agrees with the section-return oracle") {
    auto chart = build_cellular_chart(0.25, 0.75, 64, 128);
    auto f = chart.field;
    Rng rng(2718);
    std::uniform_real_distribution<double> uh(0.3, 0.7);
    std::uniform_real_distribution<double> uth(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Vec2 x = chart_eval(chart, uth(rng), uh(rng));
        double via_chart = angle_of_point(chart, x).theta;
        double via_return = cellular_angle_by_return(f, x);
        double diff = via_chart - via_return;
        diff -= std::round(diff);
        REQUIRE(std::abs(diff) <= 1e-6);
    }
}

TEST_CASE("chart area weight reproduces the annulus area") {
    double h0 = 0.2, h1 = 0.8;
    auto chart = build_cellular_chart(h0, h1, 48, 64);
    // quadrature of |det DPhi| over the chart (trapezoid in h, periodic in theta)
    double ds = (chart.s.back() - chart.s.front()) / (chart.s.size() - 1);
    double area_chart = 0.0;
    for (size_t i = 0; i < chart.s.size(); ++i) {
        double wrow = (i == 0 || i + 1 == chart.s.size()) ? 0.5 : 1.0;
        for (int j = 0; j < chart.n_theta; ++j)
            area_chart += wrow * chart.jac[i][j] * chart.theta_step() * ds;
    }
    // independent grid count of {h0 < H < h1} in the primary cell
    const int N = 3000;
    long hits = 0;
    auto f = cellular_field();
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            double hv = f.eval({pi * (i + 0.5) / N, pi * (j + 0.5) / N});
            if (hv > h0 && hv < h1) ++hits;
        }
    double area_grid = sq(pi) * hits / ((double)N * N);
    REQUIRE(area_chart == Catch::Approx(area_grid).epsilon(1e-3));
}
