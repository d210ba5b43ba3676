#include <catch2/catch_amalgamated.hpp>

#include "mixlab/period.hpp"

using namespace mixlab;

TEST_CASE("AGM and quadrature agree across the level range") {
    for (double h : logspace(1e-4, 1.0 - 1e-6, 50)) {
        double ta = period_agm(h);
        double tq = period_quadrature(h);
        REQUIRE(std::abs(tq - ta) / ta <= 1e-9);
    }
}

TEST_CASE("period_agm examples") {
    REQUIRE(period_agm(1.0) == Catch::Approx(two_pi).margin(1e-14));
    REQUIRE(period_agm(0.5) == Catch::Approx(period_quadrature(0.5)).margin(1e-10));
    double h = 1e-6;
    REQUIRE(period_agm(h) == Catch::Approx(4.0 * std::log(4.0 / h)).epsilon(1e-4));
    REQUIRE_THROWS_AS(period_agm(0.0), DomainError);
    REQUIRE_THROWS_AS(period_agm(-0.5), DomainError);
}

TEST_CASE("period_quadrature examples") {
    SECTION("approaches 2 pi at the center") {
        REQUIRE(period_quadrature(1.0 - 1e-12) == Catch::Approx(two_pi).epsilon(1e-9));
    }
    SECTION("log asymptotics near the separatrix") {
        double h = 1e-4;
        REQUIRE(period_quadrature(h) ==
                Catch::Approx(4.0 * std::log(4.0 / h)).epsilon(0.005));
    }
    SECTION("domain") {
        REQUIRE_THROWS_AS(period_quadrature(0.0), DomainError);
        REQUIRE_THROWS_AS(period_quadrature(1.0), DomainError);
    }
}

TEST_CASE("period_derivative examples") {
    SECTION("T' approaches -pi at the center") {
        REQUIRE(period_derivative(1.0 - 1e-8) == Catch::Approx(-pi).epsilon(1e-6));
    }
    SECTION("T' ~ -4/h near the separatrix") {
        REQUIRE(period_derivative(1e-3) == Catch::Approx(-4000.0).epsilon(0.01));
    }
    SECTION("finite-difference oracle at h = 1/2") {
        const double d = 1e-6;
        double fd = (period_agm(0.5 + d) - period_agm(0.5 - d)) / (2 * d);
        REQUIRE(period_derivative(0.5) == Catch::Approx(fd).epsilon(1e-5));
    }
    SECTION("sign is negative everywhere") {
        for (double h : linspace(0.05, 0.95, 10)) REQUIRE(period_derivative(h) < 0.0);
    }
}

TEST_CASE("period table is monotone and satisfies the global bounds") {
    auto levels = logspace(1e-6, 1.0 - 1e-9, 200);
    PeriodTable table = build_period_table(levels);
    const double C = 40.0;
    for (size_t i = 0; i < levels.size(); ++i) {
        double h = levels[i], T = table.T[i], Tp = table.Tprime[i];
        REQUIRE(T > 0.0);
        if (i > 0) REQUIRE(T < table.T[i - 1]); // strictly decreasing
        double ratio = T / (1.0 + std::log(1.0 / h));
        REQUIRE(ratio <= C);
        REQUIRE(ratio >= 1.0 / C);
        REQUIRE(h * std::abs(Tp) <= C);
        REQUIRE(-h * Tp >= 1.0 / C);
        if (h < 0.5) REQUIRE(T <= 10.0 + 10.0 * std::log(1.0 / h));
        REQUIRE(h * std::abs(Tp) <= 12.0);
    }
}

TEST_CASE("h^2 T'' stays bounded (second differences of the AGM table)") {
    auto levels = logspace(1e-6, 0.99, 60);
    for (size_t i = 1; i + 1 < levels.size(); ++i) {
        double hm = levels[i - 1], h0 = levels[i], hp = levels[i + 1];
        double dp = hp - h0, dm = h0 - hm;
        double second = 2.0 *
                        (period_agm(hp) * dm - period_agm(h0) * (dp + dm) + period_agm(hm) * dp) /
                        (dp * dm * (dp + dm));
        REQUIRE(h0 * h0 * std::abs(second) <= 40.0);
    }
}

TEST_CASE("beta exponent of the cellular flow is 1") {
    auto f = cellular_field();
    BetaEstimate be = beta_exponent(f, linspace(0.05, 0.3, 12), 1e-12);
    REQUIRE(!be.degenerate);
    REQUIRE(be.beta >= 0.9);
    REQUIRE(be.beta <= 1.1);
}

TEST_CASE("beta exponent flags the isochronous harmonic center") {
    auto f = harmonic_field();
    BetaEstimate be = beta_exponent(f, linspace(0.05, 0.3, 8), 1e-12);
    REQUIRE(be.degenerate);
}

TEST_CASE("beta exponent of the quartic radial Hamiltonian") {
    auto f = quartic_radial_field();
    SECTION("closed-form period oracle: T = 2 pi / (1 + r^2)") {
        for (double r : {0.05, 0.1, 0.2, 0.3}) {
            OrbitPeriod p = return_period_around(f, {r, 0.0}, {0.0, 0.0}, {1e-12, 100.0, true});
            REQUIRE(p.period == Catch::Approx(two_pi / (1.0 + r * r)).epsilon(1e-8));
        }
    }
    SECTION("fitted exponent") {
        BetaEstimate be = beta_exponent(f, linspace(0.03, 0.15, 12), 1e-12);
        REQUIRE(!be.degenerate);
        REQUIRE(be.beta >= 0.9);
        REQUIRE(be.beta <= 1.1);
    }
}
