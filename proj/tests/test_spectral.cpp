#include <catch2/catch_amalgamated.hpp>

#include "mixlab/data.hpp"
#include "mixlab/diagnostics.hpp"
#include "mixlab/spectral.hpp"

using namespace mixlab;

namespace {

ScalarField from_physical(int N, const std::function<double(double, double)>& fn) {
    std::vector<double> phys((size_t)N * N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            phys[(size_t)i * N + j] = fn(two_pi * i / N, two_pi * j / N);
    ScalarField out = make_scalar_field(N);
    Fft2 fft(N);
    fft.forward(phys, out.c);
    return out;
}

double l2_diff(const ScalarField& a, const ScalarField& b) {
    ScalarField d = a;
    for (size_t m = 0; m < d.c.size(); ++m) d.c[m] -= b.c[m];
    return std::sqrt(l2_norm_sq(d));
}

} // namespace

TEST_CASE("heat kernel modes decay exactly under the integrating factor") {
    const int N = 64;
    const double nu = 1e-2;
    auto field = expr_field("0"); // b = 0
    ScalarField u = from_physical(N, [](double x1, double x2) {
        return std::cos(x1) + 0.3 * std::sin(3 * x1 + 2 * x2) + 0.1 * std::cos(7 * x2);
    });
    ScalarField u0 = u;
    SpectralSolver::Options opt;
    opt.dt_override = 0.01;
    SpectralSolver solver(field, N, nu, opt);
    for (int s = 0; s < 25; ++s) solver.step(u);
    double t = u.time;
    const int nc = N / 2 + 1;
    for (int i = 0; i < N; ++i) {
        int k1 = i <= N / 2 ? i : i - N;
        for (int j = 0; j < nc; ++j) {
            auto expect = u0.c[(size_t)i * nc + j] *
                          std::exp(-nu * (k1 * (double)k1 + j * (double)j) * t);
            REQUIRE(std::abs(u.c[(size_t)i * nc + j] - expect) <= 1e-13);
        }
    }
}

TEST_CASE("shear transport matches the closed-form solution") {
    const int N = 256;
    auto field = shear_cos_field(); // b = (-sin x2, 0)
    ScalarField u = from_physical(N, [](double x1, double) { return std::cos(x1); });
    SpectralSolver::Options opt;
    opt.cfl = 0.25;
    SpectralSolver solver(field, N, 0.0, opt);
    double t_end = 1.0;
    int steps = (int)std::ceil(t_end / solver.dt());
    solver.set_dt(t_end / steps);
    for (int s = 0; s < steps; ++s) solver.step(u);
    ScalarField exact = from_physical(
        N, [t_end](double x1, double x2) { return std::cos(x1 + t_end * std::sin(x2)); });
    REQUIRE(l2_diff(u, exact) <= 1e-6);
}

TEST_CASE("cellular transport conserves L2 and the mean") {
    const int N = 256;
    auto field = cellular_field();
    InitialDatum datum = annulus_bump(field, N, 0.3, 0.7, 2);
    ScalarField u = datum.rho;
    auto mean0 = u.mean_mode();
    double l2_0 = std::sqrt(l2_norm_sq(u));
    SpectralSolver solver(field, N, 0.0);
    double t_end = 10.0;
    int steps = (int)std::ceil(t_end / solver.dt());
    solver.set_dt(t_end / steps);
    for (int s = 0; s < steps; ++s) solver.step(u);
    REQUIRE(std::abs(std::sqrt(l2_norm_sq(u)) - l2_0) / l2_0 <= 1e-6);
    REQUIRE(std::abs(u.mean_mode() - mean0) <= 1e-15);
}

TEST_CASE("transport conservation is translation equivariant") {
    const int N = 128;
    auto field = cellular_field();
    InitialDatum datum = annulus_bump(field, N, 0.3, 0.7, 2);
    auto defect = [&](const ScalarField& rho0) {
        ScalarField u = rho0;
        double l2_0 = std::sqrt(l2_norm_sq(u));
        SpectralSolver solver(field, N, 0.0);
        for (int s = 0; s < 400; ++s) solver.step(u);
        return std::abs(std::sqrt(l2_norm_sq(u)) - l2_0) / l2_0;
    };
    // phase shift: rho0(x - a) via the spectral factor e^{-i k.a}
    ScalarField shifted = datum.rho;
    const double a1 = 0.37, a2 = -1.21;
    const int nc = N / 2 + 1;
    for (int i = 0; i < N; ++i) {
        int k1 = i <= N / 2 ? i : i - N;
        for (int j = 0; j < nc; ++j)
            shifted.c[(size_t)i * nc + j] *= std::polar(1.0, -(k1 * a1 + j * a2));
    }
    REQUIRE(defect(datum.rho) <= 1e-7);
    REQUIRE(defect(shifted) <= 1e-7);
}

TEST_CASE("conservation defect shrinks by 10x under grid refinement") {
    auto field = cellular_field();
    auto defect_at = [&](int N) {
        InitialDatum datum = annulus_bump(field, N, 0.3, 0.7, 2);
        ScalarField u = datum.rho;
        double l2_0 = std::sqrt(l2_norm_sq(u));
        SpectralSolver solver(field, N, 0.0);
        double t_end = 5.0;
        int steps = (int)std::ceil(t_end / solver.dt());
        solver.set_dt(t_end / steps);
        for (int s = 0; s < steps; ++s) solver.step(u);
        return std::abs(std::sqrt(l2_norm_sq(u)) - l2_0) / l2_0;
    };
    double d128 = defect_at(128), d256 = defect_at(256);
    REQUIRE(d256 * 10.0 <= d128);
}

TEST_CASE("solve records norms and the energy balance residual") {
    const int N = 256;
    const double nu = 1e-3;
    auto field = cellular_field();
    InitialDatum datum = annulus_bump(field, N, 0.3, 0.7, 2);
    double rho0_sq = l2_norm_sq(datum.rho);
    NormSeries series = solve(datum.rho, field, nu, 5.0, linspace(0.5, 5.0, 10));
    REQUIRE(series.t.size() == 11); // t = 0 prepended
    for (size_t i = 1; i < series.t.size(); ++i) {
        REQUIRE(series.energy_residual[i] <= 1e-5 * rho0_sq);
        REQUIRE(series.l2[i] < series.l2[i - 1]); // strictly dissipative
    }
}

TEST_CASE("viscosity gap basics") {
    const int N = 128;
    auto field = cellular_field();
    InitialDatum datum = annulus_bump(field, N, 0.3, 0.7, 2);
    LevelAnnulus annulus{0.3, 0.7, 0.5, 0};
    SECTION("gap vanishes at t = 0 and support is inside the annulus") {
        GapSeries gap = viscosity_gap(datum.rho, field, 1e-4, {0.0, 1.0}, &annulus);
        REQUIRE(!gap.support_warning);
        REQUIRE(gap.gap_sq[0] <= 1e-28);
        REQUIRE(gap.gap_sq[1] > 0.0);
    }
    SECTION("support leaking outside the annulus raises the warning flag") {
        LevelAnnulus narrow{0.45, 0.55, 0.5, 0};
        GapSeries gap = viscosity_gap(datum.rho, field, 1e-4, {0.5}, &narrow);
        REQUIRE(gap.support_warning);
    }
}

TEST_CASE("streamline-average projection") {
    const int N = 256;
    auto field = cellular_field();
    SECTION("functions of H project to nearly zero, refining with n_bins") {
        ScalarField rho = from_physical(N, [&](double x1, double x2) {
            double h = std::sin(x1) * std::sin(x2);
            return 0.3 + h + 0.5 * h * h;
        });
        double before = std::sqrt(l2_norm_sq(rho));
        double r256 = std::sqrt(l2_norm_sq(project_streamline_mean_free(rho, field, 256)));
        double r64 = std::sqrt(l2_norm_sq(project_streamline_mean_free(rho, field, 64)));
        REQUIRE(r256 / before <= 1e-2);
        REQUIRE(r256 < r64); // finer binning projects better
    }
    SECTION("odd data under the cell symmetry is left unchanged") {
        InitialDatum datum = annulus_bump(field, N, 0.3, 0.7, 2);
        ScalarField projected = project_streamline_mean_free(datum.rho, field, 256);
        REQUIRE(l2_diff(projected, datum.rho) <= 1e-12);
    }
    SECTION("idempotency") {
        ScalarField rho = from_physical(N, [](double x1, double x2) {
            return std::sin(x1) * std::sin(2 * x2) + std::cos(2 * x1);
        });
        ScalarField once = project_streamline_mean_free(rho, field, 128);
        ScalarField twice = project_streamline_mean_free(once, field, 128);
        REQUIRE(l2_diff(once, twice) <= 1e-12);
    }
}

TEST_CASE("CFL violation is rejected") {
    auto field = cellular_field();
    SpectralSolver::Options opt;
    opt.dt_override = 1.0; // far beyond 0.5 * dx / max|b| at N = 64
    REQUIRE_THROWS_AS(SpectralSolver(field, 64, 0.0, opt), DomainError);
}
