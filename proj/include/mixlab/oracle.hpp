#ifndef MIXLAB_ORACLE_HPP
#define MIXLAB_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "mixlab/core.hpp"
#include "mixlab/period.hpp"
#include "mixlab/quadrature.hpp"

namespace mixlab {

/** Angle-Fourier representation of a scalar in action-angle variables:
    f(theta, s) = sum_k f_k(s) e^{i k theta} with the angle theta in [0, 2pi)
    and integer wavenumbers. Real fields keep +-k pairs with conjugate
    coefficients. Transport rotates each angle harmonic rigidly:
    f_k(t,s) = f_k(0,s) e^{-2 pi i k t / T(s)}. */
struct AngleModeField {
    std::vector<int> k_list;
    std::vector<double> s_grid;
    std::vector<std::vector<std::complex<double>>> coeff; // [k][s]
    std::vector<double> g;  // weight g(s) per node
    std::vector<double> T;  // period per node
    double time = 0.0;

    size_t n_modes() const { return k_list.size(); }
    size_t n_s() const { return s_grid.size(); }
};

struct AngleModeBuildOptions {
    bool enforce_mean_free = true; // drop/zero the k = 0 harmonic
};

/** Builds a state from mode callables f_k(s) on the cellular weights
    T(s) = T~(s), g(s) = T~(s) cos s, or on caller-provided weights. */
inline AngleModeField make_angle_mode_field(
    const std::vector<int>& k_list, const std::vector<double>& s_grid,
    const std::function<std::complex<double>(int, double)>& fk,
    const std::function<double(double)>& T_fn, const std::function<double(double)>& g_fn,
    const AngleModeBuildOptions& opt = {}) {
    AngleModeField f;
    f.k_list = k_list;
    f.s_grid = s_grid;
    f.coeff.assign(k_list.size(), std::vector<std::complex<double>>(s_grid.size()));
    f.g.resize(s_grid.size());
    f.T.resize(s_grid.size());
    for (size_t i = 0; i < s_grid.size(); ++i) {
        f.T[i] = T_fn(s_grid[i]);
        f.g[i] = g_fn(s_grid[i]);
        if (!(f.T[i] > 0)) throw DomainError("make_angle_mode_field: T(s) must be positive");
        if (!(f.g[i] > 0)) throw DomainError("make_angle_mode_field: g(s) must be positive");
    }
    for (size_t m = 0; m < k_list.size(); ++m) {
        if (k_list[m] == 0 && opt.enforce_mean_free) continue; // left at zero
        for (size_t i = 0; i < s_grid.size(); ++i) f.coeff[m][i] = fk(k_list[m], s_grid[i]);
    }
    return f;
}

/// Exact transport: multiplies each harmonic by its rigid-rotation phase.
inline AngleModeField transport_exact(const AngleModeField& state, double t) {
    AngleModeField out = state;
    for (size_t m = 0; m < state.n_modes(); ++m) {
        int k = state.k_list[m];
        if (k == 0) continue;
        for (size_t i = 0; i < state.n_s(); ++i) {
            double phase = -two_pi * k * t / state.T[i];
            out.coeff[m][i] = state.coeff[m][i] * std::polar(1.0, phase);
        }
    }
    out.time = state.time + t;
    return out;
}

namespace detail {

/// d/ds by central differences on the (possibly nonuniform) s grid.
inline std::vector<std::complex<double>> ds_central(const std::vector<double>& s,
                                                    const std::vector<std::complex<double>>& f) {
    size_t n = s.size();
    std::vector<std::complex<double>> d(n);
    if (n < 2) return d;
    d[0] = (f[1] - f[0]) / (s[1] - s[0]);
    d[n - 1] = (f[n - 1] - f[n - 2]) / (s[n - 1] - s[n - 2]);
    for (size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (s[i + 1] - s[i - 1]);
    return d;
}

inline double trapezoid(const std::vector<double>& s, const std::vector<double>& v) {
    double acc = 0.0;
    for (size_t i = 0; i + 1 < s.size(); ++i)
        acc += 0.5 * (v[i] + v[i + 1]) * (s[i + 1] - s[i]);
    return acc;
}

} // namespace detail

/** ||f||^2_{H^1_g} = int (|f|^2 + |d_s f|^2) g ds dtheta, trapezoid in s,
    d_s by central differences, theta integral by Parseval (2 pi sum_k). */
inline double h1g_norm_sq(const AngleModeField& f) {
    std::vector<double> integrand(f.n_s(), 0.0);
    for (size_t m = 0; m < f.n_modes(); ++m) {
        auto d = detail::ds_central(f.s_grid, f.coeff[m]);
        for (size_t i = 0; i < f.n_s(); ++i)
            integrand[i] += (std::norm(f.coeff[m][i]) + std::norm(d[i])) * f.g[i];
    }
    return two_pi * detail::trapezoid(f.s_grid, integrand);
}

inline double h1g_norm(const AngleModeField& f) { return std::sqrt(h1g_norm_sq(f)); }

/// discrete L^2_g norm (conserved exactly by transport_exact)
inline double l2g_norm_sq(const AngleModeField& f) {
    std::vector<double> integrand(f.n_s(), 0.0);
    for (size_t m = 0; m < f.n_modes(); ++m)
        for (size_t i = 0; i < f.n_s(); ++i)
            integrand[i] += std::norm(f.coeff[m][i]) * f.g[i];
    return two_pi * detail::trapezoid(f.s_grid, integrand);
}

/// int f phi g dtheta ds for two states on the same grid/mode list.
inline double weighted_correlation(const AngleModeField& f, const AngleModeField& phi) {
    if (f.n_modes() != phi.n_modes() || f.n_s() != phi.n_s())
        throw DomainError("weighted_correlation: shape mismatch");
    std::vector<double> integrand(f.n_s(), 0.0);
    for (size_t m = 0; m < f.n_modes(); ++m)
        for (size_t i = 0; i < f.n_s(); ++i)
            integrand[i] += (f.coeff[m][i] * std::conj(phi.coeff[m][i])).real() * f.g[i];
    return two_pi * detail::trapezoid(f.s_grid, integrand);
}

/** Weight functions (T, g, T') on the level coordinate, pluggable so the
    stationary-phase machinery is not tied to the cellular flow. */
struct AngleWeights {
    std::function<double(double)> T;
    std::function<double(double)> g;
    std::function<double(double)> Tprime;
};

/// Cellular chart weights: T~(s) = T(sin s), g = T~ cos s; T' from quadrature.
inline AngleWeights cellular_angle_weights() {
    AngleWeights w;
    w.T = [](double s) { return period_tilde(s); };
    w.g = [](double s) { return cellular_weight_g(s); };
    w.Tprime = [](double s) { return period_tilde_derivative(s); };
    return w;
}

/** The stationary-phase envelope r(t):

      r(t) = (1/t) ||g^{-1/2}||^2_{L2(d, pi/2-d')} *
             ( (T^2 g/|T'|)(d) + (T^2 g/|T'|)(pi/2-d')
               + ||(T^2 g/T')'||_{L1} + ||T^2 g^{1/2}/T'||_{L2} )
           + (1/t) ||g^{-1/2}||_{L2} ||T^2 g^{1/2}/T'||_{L2},

    every term evaluated by quadrature on (d, pi/2-d'); the derivative inside
    the L1 norm is taken numerically. */
inline double stationary_phase_bound(const AngleWeights& w, double delta, double delta_prime,
                                     double t) {
    if (!(delta > 0 && delta < 0.25) || !(delta_prime > 0 && delta_prime < 0.25))
        throw DomainError("stationary_phase_bound: need delta, delta' in (0, 1/4)");
    if (!(t > 0)) throw DomainError("stationary_phase_bound: need t > 0");
    const double a = delta, b = pi / 2 - delta_prime;

    auto ratio = [&w](double s) { return sq(w.T(s)) * w.g(s) / std::abs(w.Tprime(s)); };
    auto wfun = [&w](double s) { return sq(w.T(s)) * w.g(s) / w.Tprime(s); };

    double ginv_sq = integrate([&w](double s) { return 1.0 / w.g(s); }, a, b, 1e-10);
    double boundary = ratio(a) + ratio(b);
    const double dh = 1e-6;
    double l1_deriv = integrate(
        [&](double s) {
            double lo = std::max(s - dh, a), hi = std::min(s + dh, b);
            return std::abs((wfun(hi) - wfun(lo)) / (hi - lo));
        },
        a, b, 1e-8);
    double l2_ratio = std::sqrt(integrate(
        [&w](double s) { return sq(sq(w.T(s))) * w.g(s) / sq(w.Tprime(s)); }, a, b, 1e-10));

    return (ginv_sq * (boundary + l1_deriv + l2_ratio) + std::sqrt(ginv_sq) * l2_ratio) / t;
}

/** Minimized mixing envelopes of the global estimate, in the epsilon-loss
    power-law form (log factors absorbed into the epsilon exponents):

      interior:  C / t                                    ~ 1/t
      elliptic:  min_{d'}  (d')^{2-2e} + C (d')^{-e} / t  ~ t^{-(1-e)}
      global:    min_{d,d'} d^{1-e} + (d')^{2-2e}
                            + C d^{-2} (d')^{-e} / t      ~ t^{-(1-e)/3}

    Cutoffs are searched on a log grid inside (0, 1/4]. */
enum class EnvelopeRegime { Interior, Elliptic, Global };

inline double mixing_envelope(double t, double eps, EnvelopeRegime regime, double C = 1.0,
                              int grid_points = 400) {
    if (!(t >= 1.0)) throw DomainError("mixing_envelope: need t >= 1");
    if (!(eps > 0 && eps < 0.5)) throw DomainError("mixing_envelope: need eps in (0, 1/2)");
    if (regime == EnvelopeRegime::Interior) return C / t;

    std::vector<double> grid = logspace(1e-8, 0.25, grid_points);
    double best = std::numeric_limits<double>::infinity();
    if (regime == EnvelopeRegime::Elliptic) {
        for (double dp : grid) {
            double v = std::pow(dp, 2.0 - 2.0 * eps) + C * std::pow(dp, -eps) / t;
            best = std::min(best, v);
        }
        return best;
    }
    for (double d : grid) {
        double vol = std::pow(d, 1.0 - eps);
        double corr = C / (d * d * t);
        for (double dp : grid) {
            double v = vol + std::pow(dp, 2.0 - 2.0 * eps) + corr * std::pow(dp, -eps);
            best = std::min(best, v);
        }
    }
    return best;
}

} // namespace mixlab

#endif
