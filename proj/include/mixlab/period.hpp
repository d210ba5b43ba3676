#ifndef MIXLAB_PERIOD_HPP
#define MIXLAB_PERIOD_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mixlab/core.hpp"
#include "mixlab/lagrangian.hpp"
#include "mixlab/quadrature.hpp"

namespace mixlab {

/** Cellular period by the arithmetic-geometric mean: T(h) = 2*pi / AGM(1,h),
    which equals 4K(sqrt(1-h^2)). Production path; validated against the
    direct quadrature below before use. */
inline double period_agm(double h) {
    if (!(h > 0.0)) throw DomainError("period_agm: need h > 0");
    if (h > 1.0) throw DomainError("period_agm: need h <= 1");
    double a = 1.0, b = h;
    for (int it = 0; it < 64; ++it) {
        double an = 0.5 * (a + b);
        double bn = std::sqrt(a * b);
        a = an;
        b = bn;
        if (std::abs(a - b) <= 1e-15 * a) break;
    }
    return two_pi / (0.5 * (a + b));
}

/** Cellular period by adaptive quadrature of
    T(h) = 4 * int_0^1 dx / (sqrt(1-x^2) sqrt(1-(1-h^2)x^2)).
    The substitution x = sin u removes the x -> 1 inverse-square-root
    endpoint singularity; reflecting (v = pi/2 - u) and stretching the
    remaining O(h)-wide peak with v = h sinh w flattens the integrand, so
    the quadrature reaches the target accuracy uniformly down to h ~ 1e-12:
      T(h) = 4 int_0^W  h cosh w / sqrt(h^2 + (1-h^2) sin^2(h sinh w)) dw. */
inline double period_quadrature(double h, double rel_tol = 1e-12) {
    if (!(h > 0.0 && h < 1.0)) throw DomainError("period_quadrature: need h in (0,1)");
    const double m = 1.0 - h * h;
    const double W = std::asinh(pi / (2.0 * h));
    auto integrand = [m, h](double w) {
        double v = h * std::sinh(w);
        double s = std::sin(v);
        return h * std::cosh(w) / std::sqrt(h * h + m * s * s);
    };
    return 4.0 * integrate(integrand, 0.0, W, rel_tol);
}

/** T'(h) by quadrature of the differentiated formula
    -T'(h) = 4 * int_0^1 (1-x^2)^{-1/2} h x^2 (1-(1-h^2)x^2)^{-3/2} dx,
    with the same x = sin u and peak-flattening substitutions. Returned with
    its (negative) sign. */
inline double period_derivative(double h, double rel_tol = 1e-12) {
    if (!(h > 0.0 && h < 1.0)) throw DomainError("period_derivative: need h in (0,1)");
    const double m = 1.0 - h * h;
    const double W = std::asinh(pi / (2.0 * h));
    auto integrand = [m, h](double w) {
        double v = h * std::sinh(w);
        double c = std::cos(v), s = std::sin(v);
        double d = h * h + m * s * s;
        return h * std::cosh(w) * h * c * c / (d * std::sqrt(d));
    };
    return -4.0 * integrate(integrand, 0.0, W, rel_tol);
}

// cellular reparametrized chart weights: T~(I) = T(sin I), g(I) = T~(I) cos I
inline double period_tilde(double s) { return period_agm(std::sin(s)); }
inline double period_tilde_derivative(double s) {
    return period_derivative(std::sin(s)) * std::cos(s);
}
inline double cellular_weight_g(double s) { return period_tilde(s) * std::cos(s); }

/** Sampled T(h), T'(h) on a level grid with per-entry method tags. */
struct PeriodTable {
    std::vector<double> levels;
    std::vector<double> T;
    std::vector<double> Tprime;
    std::vector<std::string> method;
};

inline PeriodTable build_period_table(const std::vector<double>& levels) {
    PeriodTable t;
    t.levels = levels;
    t.T.resize(levels.size());
    t.Tprime.resize(levels.size());
    t.method.assign(levels.size(), "agm");
    for (size_t i = 0; i < levels.size(); ++i) {
        t.T[i] = period_agm(levels[i]);
        t.Tprime[i] = period_derivative(levels[i]);
    }
    return t;
}

/** Fitted elliptic-point exponent beta with T'(r) ~ r^beta, from measured
    orbit periods through p + r e1. */
struct BetaEstimate {
    double beta = 0.0;
    double residual = 0.0;
    bool degenerate = false; // isochronous center: T' ~ 0, beta undefined
};

/** Measures T(r) by orbit return around the field's elliptic point,
    differentiates by central differences over r_grid, and fits
    log|T'(r)| against log r. */
inline BetaEstimate beta_exponent(const HamiltonianField& f, const std::vector<double>& r_grid,
                                  double tol = 1e-12) {
    if (!f.elliptic_point) throw DomainError("beta_exponent: field has no elliptic point");
    if (f.smoothness < 3) throw DomainError("beta_exponent: field must be C^3");
    if (r_grid.size() < 4) throw DomainError("beta_exponent: need at least 4 radii");
    const Vec2 p = *f.elliptic_point;
    ReturnOptions ropt;
    ropt.tol = tol;
    std::vector<double> T(r_grid.size());
    for (size_t i = 0; i < r_grid.size(); ++i) {
        Vec2 x0{p.x + r_grid[i], p.y};
        T[i] = return_period_around(f, x0, p, ropt).period;
    }
    const size_t n = r_grid.size();
    std::vector<double> r_mid, dT;
    for (size_t i = 1; i + 1 < n; ++i) {
        double hp = r_grid[i + 1] - r_grid[i];
        double hm = r_grid[i] - r_grid[i - 1];
        // second-order three-point derivative on a possibly nonuniform grid
        double d = (hm / (hp * (hp + hm))) * T[i + 1] + ((hp - hm) / (hp * hm)) * T[i] -
                   (hp / (hm * (hp + hm))) * T[i - 1];
        r_mid.push_back(r_grid[i]);
        dT.push_back(d);
    }
    double t_span = *std::max_element(T.begin(), T.end()) -
                    *std::min_element(T.begin(), T.end());
    double t_scale = *std::max_element(T.begin(), T.end());
    double r_span = r_grid.back() - r_grid.front();
    if (t_span < 1e-7 * t_scale || t_span / r_span < 1e-6 * t_scale) {
        BetaEstimate be;
        be.degenerate = true;
        return be;
    }
    int sign_pos = 0, sign_neg = 0;
    for (double d : dT) (d > 0 ? sign_pos : sign_neg)++;
    if (sign_pos != 0 && sign_neg != 0)
        throw Error("beta_exponent: T' changes sign over r_grid; fit is meaningless");

    // least squares of log|T'| vs log r
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    size_t m = r_mid.size();
    for (size_t i = 0; i < m; ++i) {
        double lx = std::log(r_mid[i]);
        double ly = std::log(std::abs(dT[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double denom = m * sxx - sx * sx;
    double slope = (m * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / m;
    double rss = 0;
    for (size_t i = 0; i < m; ++i) {
        double pred = intercept + slope * std::log(r_mid[i]);
        rss += sq(std::log(std::abs(dT[i])) - pred);
    }
    BetaEstimate be;
    be.beta = slope;
    be.residual = std::sqrt(rss / m);
    if (be.residual > 0.5)
        throw Error("beta_exponent: log-log fit residual " + std::to_string(be.residual) +
                    " too large; T'(r) is not a clean power");
    return be;
}

} // namespace mixlab

#endif
