#ifndef MIXLAB_ACTIONANGLE_HPP
#define MIXLAB_ACTIONANGLE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "mixlab/core.hpp"
#include "mixlab/field.hpp"
#include "mixlab/lagrangian.hpp"
#include "mixlab/period.hpp"

namespace mixlab {

/** The transversal x(h) solving x'(h) = grad H / |grad H|^2, along which H is
    the arc parameter. */
struct TransversalCurve {
    std::vector<double> levels;
    std::vector<Vec2> points;
    std::vector<double> residuals; // |H(x(h)) - h| per node
};

inline TransversalCurve build_transversal(const HamiltonianField& f, double h0, double h1,
                                          Vec2 x0, int n, double tol = 1e-12) {
    if (n < 1) throw DomainError("build_transversal: need n >= 1");
    TransversalCurve c;
    c.levels = linspace(h0, h1, n);
    c.points.resize(n);
    c.residuals.resize(n);
    Vec2 x = x0;
    double h_cur = f.eval(x0);
    for (int i = 0; i < n; ++i) {
        x = detail::march_to_level(f, x, h_cur, c.levels[i], tol);
        h_cur = c.levels[i];
        c.points[i] = x;
        c.residuals[i] = std::abs(f.eval(x) - c.levels[i]);
    }
    return c;
}

/// Analytic cellular transversal x(h) = (pi/2, arcsin h) in the cell (0,pi)^2.
inline TransversalCurve cellular_transversal(double h0, double h1, int n) {
    TransversalCurve c;
    c.levels = linspace(h0, h1, n);
    c.points.resize(n);
    c.residuals.assign(n, 0.0);
    for (int i = 0; i < n; ++i) c.points[i] = {pi / 2, std::asin(c.levels[i])};
    return c;
}

/** Discrete action-angle chart Phi(theta, s): theta on a uniform grid of
    [0,1), s the level coordinate — h for the standard chart, I for the
    cellular chart Phi~(theta, I) = Phi(theta, sin I). Positions come from
    orbit integration at times theta*T; Jacobians from centered differences
    with small auxiliary steps in theta and level. */
struct ActionAngleChart {
    enum Variant { Standard, CellularTilde };
    Variant variant = Standard;
    int n_theta = 0;
    std::vector<double> s;      // level coordinate per row
    std::vector<double> h;      // H value per row (h = s or h = sin s)
    std::vector<double> T;      // period per row
    std::vector<std::vector<Vec2>> pos;   // [row][j]
    std::vector<std::vector<Vec2>> dth;   // exact d Phi/d theta = T * b
    std::vector<std::vector<Vec2>> ds;    // centered-difference d Phi/d s
    std::vector<std::vector<double>> jac; // |det D Phi| per node
    HamiltonianField field;

    double theta_step() const { return 1.0 / n_theta; }
    double s_front() const { return s.front(); }
    double s_back() const { return s.back(); }

    /// Analytic Jacobian the chart should reproduce at row i.
    double jac_reference(size_t i) const {
        return variant == Standard ? T[i] : T[i] * std::cos(s[i]);
    }

    /// Level coordinate of a point (from H alone).
    double s_of_point(const Vec2& x) const {
        double hv = field.eval(x);
        if (variant == Standard) return hv;
        return std::asin(std::clamp(hv, -1.0, 1.0));
    }
};

struct ChartBuildOptions {
    double tol = 1e-12;       // orbit integration tolerance
    double eps_theta = 1e-5;  // centered-difference step in theta
    double eps_level = 1e-5;  // centered-difference step in the level coordinate
    std::function<double(double)> period_of_h; // default: AGM for cellular, return map otherwise
};

namespace detail {

/// Samples orbit positions at the given sorted times in one integration pass.
inline std::vector<Vec2> orbit_samples(const HamiltonianField& f, Vec2 x0,
                                       const std::vector<double>& times, double tol) {
    using Ode = Dopri5<2>;
    Ode::Options opt;
    opt.rtol = tol;
    opt.atol = tol;
    std::vector<Vec2> out(times.size());
    size_t next = 0;
    while (next < times.size() && times[next] <= 0.0) {
        out[next] = x0; // t = 0 samples
        ++next;
    }
    if (next >= times.size()) return out;
    auto obs = [&](const Ode::Segment& seg) {
        while (next < times.size() && times[next] <= seg.t1() + 1e-300) {
            auto y = seg.eval(std::max(times[next], seg.t0));
            out[next] = {y[0], y[1]};
            ++next;
        }
        return next < times.size();
    };
    Ode::integrate(velocity_rhs(f), {x0.x, x0.y}, 0.0, times.back() * (1.0 + 1e-12) + 1e-14,
                   opt, obs);
    for (; next < times.size(); ++next) out[next] = out[next - 1];
    return out;
}

inline double generic_period(const HamiltonianField& f, Vec2 launch, double level,
                             double tol) {
    if (f.elliptic_point)
        return return_period_around(f, launch, *f.elliptic_point, {tol, 2000.0, true}).period;
    Vec2 n = f.velocity(launch);
    n = n / n.norm();
    return detail::return_time_section(f, launch, n, level, {tol, 2000.0, true}).period;
}

} // namespace detail

/** Builds the chart over the curve's levels. For each level the orbit is
    integrated once over [0, (1+eps)T] and sampled at theta_j T and
    (theta_j +- eps) T; two auxiliary orbits at s +- eps_level supply the
    level derivative. */
inline ActionAngleChart build_chart(const HamiltonianField& f, const TransversalCurve& curve,
                                    int n_theta, const ChartBuildOptions& o = {},
                                    ActionAngleChart::Variant variant =
                                        ActionAngleChart::Standard) {
    if (n_theta < 8) throw DomainError("build_chart: need n_theta >= 8");
    if (curve.levels.size() < 2) throw DomainError("build_chart: need at least 2 levels");
    const size_t nl = curve.levels.size();
    ActionAngleChart chart;
    chart.variant = variant;
    chart.n_theta = n_theta;
    chart.field = f;
    chart.s = curve.levels;
    chart.h.resize(nl);
    chart.T.resize(nl);
    chart.pos.assign(nl, {});
    chart.dth.assign(nl, {});
    chart.ds.assign(nl, {});
    chart.jac.assign(nl, {});

    const bool cellular = f.name == "cellular";
    auto h_of_s = [&](double s) { return variant == ActionAngleChart::Standard ? s : std::sin(s); };
    auto period_of_h = o.period_of_h;
    if (!period_of_h) {
        if (cellular) period_of_h = [](double h) { return period_agm(h); };
    }

    for (size_t i = 0; i < nl; ++i) {
        const double s_i = curve.levels[i];
        const double h_i = h_of_s(s_i);
        chart.h[i] = h_i;
        const Vec2 x_i = curve.points[i];

        double T_i = period_of_h ? period_of_h(h_i)
                                 : detail::generic_period(f, x_i, h_i, o.tol);
        chart.T[i] = T_i;

        // sample times: theta_j T and (theta_j +- eps) T, with theta - eps < 0
        // wrapped to 1 - eps through periodicity
        std::vector<double> times;
        times.reserve(3 * n_theta + 2);
        for (int j = 0; j < n_theta; ++j) {
            double th = (double)j / n_theta;
            times.push_back(th * T_i);
            times.push_back((th + o.eps_theta) * T_i);
            times.push_back((th - o.eps_theta < 0 ? th - o.eps_theta + 1.0 : th - o.eps_theta) *
                            T_i);
        }
        std::vector<size_t> order(times.size());
        for (size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::sort(order.begin(), order.end(),
                  [&](size_t a, size_t b) { return times[a] < times[b]; });
        std::vector<double> sorted(times.size());
        for (size_t k = 0; k < order.size(); ++k) sorted[k] = times[order[k]];
        auto samples_sorted = detail::orbit_samples(f, x_i, sorted, o.tol);
        std::vector<Vec2> sample(times.size());
        for (size_t k = 0; k < order.size(); ++k) sample[order[k]] = samples_sorted[k];

        // auxiliary orbits for the level derivative
        double s_p = s_i + o.eps_level, s_m = s_i - o.eps_level;
        Vec2 xp, xm;
        double Tp, Tm;
        if (cellular) {
            if (variant == ActionAngleChart::CellularTilde) {
                xp = {pi / 2, s_p};
                xm = {pi / 2, s_m};
            } else {
                xp = {pi / 2, std::asin(s_p)};
                xm = {pi / 2, std::asin(s_m)};
            }
            Tp = period_agm(h_of_s(s_p));
            Tm = period_agm(h_of_s(s_m));
        } else {
            xp = detail::march_to_level(f, x_i, h_i, h_of_s(s_p), o.tol);
            xm = detail::march_to_level(f, x_i, h_i, h_of_s(s_m), o.tol);
            Tp = period_of_h ? period_of_h(h_of_s(s_p))
                             : detail::generic_period(f, xp, h_of_s(s_p), o.tol);
            Tm = period_of_h ? period_of_h(h_of_s(s_m))
                             : detail::generic_period(f, xm, h_of_s(s_m), o.tol);
        }
        std::vector<double> taux_p(n_theta), taux_m(n_theta);
        for (int j = 0; j < n_theta; ++j) {
            taux_p[j] = (double)j / n_theta * Tp;
            taux_m[j] = (double)j / n_theta * Tm;
        }
        auto pos_p = detail::orbit_samples(f, xp, taux_p, o.tol);
        auto pos_m = detail::orbit_samples(f, xm, taux_m, o.tol);

        chart.pos[i].resize(n_theta);
        chart.dth[i].resize(n_theta);
        chart.ds[i].resize(n_theta);
        chart.jac[i].resize(n_theta);
        for (int j = 0; j < n_theta; ++j) {
            Vec2 p = sample[3 * j];
            Vec2 pp = sample[3 * j + 1];
            Vec2 pm = sample[3 * j + 2];
            chart.pos[i][j] = p;
            chart.dth[i][j] = T_i * f.velocity(p);
            Vec2 dth_num = (pp - pm) / (2.0 * o.eps_theta);
            Vec2 ds_num = (pos_p[j] - pos_m[j]) / (s_p - s_m);
            chart.ds[i][j] = ds_num;
            chart.jac[i][j] = std::abs(dth_num.cross(ds_num));
        }
    }
    return chart;
}

/// Convenience builder for cellular charts on [s0,s1] (h- or I-units).
inline ActionAngleChart build_cellular_chart(double s0, double s1, int n_levels, int n_theta,
                                             ActionAngleChart::Variant variant =
                                                 ActionAngleChart::Standard,
                                             const ChartBuildOptions& o = {}) {
    HamiltonianField f = cellular_field();
    TransversalCurve curve;
    curve.levels = linspace(s0, s1, n_levels);
    curve.points.resize(n_levels);
    curve.residuals.assign(n_levels, 0.0);
    for (int i = 0; i < n_levels; ++i) {
        double s = curve.levels[i];
        curve.points[i] = variant == ActionAngleChart::Standard ? Vec2{pi / 2, std::asin(s)}
                                                                : Vec2{pi / 2, s};
    }
    return build_chart(f, curve, n_theta, o, variant);
}

namespace detail {

inline double wrap_unit(double t) {
    t -= std::floor(t);
    return t;
}

/// Periodic cubic-Hermite evaluation along one chart row.
inline Vec2 row_eval(const std::vector<Vec2>& pos, const std::vector<Vec2>& dth, double theta,
                     Vec2* deriv = nullptr) {
    const int n = (int)pos.size();
    double th = wrap_unit(theta) * n;
    int j0 = (int)th;
    if (j0 >= n) j0 = n - 1;
    double u = th - j0;
    int j1 = (j0 + 1) % n;
    const double dt = 1.0 / n;
    Vec2 p0 = pos[j0], p1 = pos[j1];
    Vec2 m0 = dth[j0] * dt, m1 = dth[j1] * dt;
    double u2 = u * u, u3 = u2 * u;
    double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
    double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    Vec2 val = h00 * p0 + h10 * m0 + h01 * p1 + h11 * m1;
    if (deriv) {
        double g00 = 6 * u2 - 6 * u, g10 = 3 * u2 - 4 * u + 1;
        double g01 = -6 * u2 + 6 * u, g11 = 3 * u2 - 2 * u;
        *deriv = (g00 * p0 + g10 * m0 + g01 * p1 + g11 * m1) * (double)n;
    }
    return val;
}

} // namespace detail

/** Interpolated chart position Phi(theta, s); cubic Hermite in theta (exact
    nodal derivatives T*b) and 4-point Lagrange across levels. */
inline Vec2 chart_eval(const ActionAngleChart& chart, double theta, double s,
                       Vec2* dtheta = nullptr) {
    const auto& sv = chart.s;
    const int nl = (int)sv.size();
    if (nl == 0) throw DomainError("chart_eval: empty chart");
    double ds = (sv.back() - sv.front()) / (nl - 1);
    double fi = (s - sv.front()) / ds;
    int ic = (int)std::floor(fi);
    int i0 = std::clamp(ic - 1, 0, nl - 4);
    Vec2 acc{0, 0}, dacc{0, 0};
    for (int k = 0; k < 4; ++k) {
        int i = i0 + k;
        double w = 1.0;
        for (int m = 0; m < 4; ++m) {
            if (m == k) continue;
            w *= (s - sv[i0 + m]) / (sv[i] - sv[i0 + m]);
        }
        Vec2 d;
        Vec2 v = detail::row_eval(chart.pos[i], chart.dth[i], theta, dtheta ? &d : nullptr);
        acc += w * v;
        if (dtheta) dacc += w * d;
    }
    if (dtheta) *dtheta = dacc;
    return acc;
}

struct AnglePoint {
    double theta = 0.0; // in [0,1)
    double s = 0.0;     // level coordinate
    double h = 0.0;     // H value
    double distance = 0.0; // |Phi(theta,s) - x| at the solution
};

/** Inverts the chart at x: s comes from H(x) exactly; theta by a bracketed
    golden-section search along the interpolated orbit (nearest-node seed,
    ties toward smaller theta) followed by Newton polish on the distance
    derivative. */
inline AnglePoint angle_of_point(const ActionAngleChart& chart, const Vec2& x) {
    double s = chart.s_of_point(x);
    const double slack = 1e-9 * std::max(1.0, std::abs(chart.s_back() - chart.s_front()));
    double slo = std::min(chart.s_front(), chart.s_back());
    double shi = std::max(chart.s_front(), chart.s_back());
    if (s < slo - slack || s > shi + slack)
        throw DomainError("angle_of_point: point lies outside the chart annulus");
    s = std::clamp(s, slo, shi);

    const int n = chart.n_theta;
    const int stride = std::max(1, n / 128);
    double best_d = std::numeric_limits<double>::infinity();
    double best_th = 0.0;
    for (int j = 0; j < n; j += stride) {
        double th = (double)j / n;
        double d = (chart_eval(chart, th, s) - x).norm2();
        if (d < best_d) { best_d = d; best_th = th; }
    }
    double a = best_th - (double)stride / n;
    double b = best_th + (double)stride / n;

    // golden section on [a,b]
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = (chart_eval(chart, c, s) - x).norm2();
    double fd = (chart_eval(chart, d, s) - x).norm2();
    for (int it = 0; it < 60 && (b - a) > 1e-12; ++it) {
        if (fc <= fd) { // ties toward smaller theta
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = (chart_eval(chart, c, s) - x).norm2();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = (chart_eval(chart, d, s) - x).norm2();
        }
    }
    double theta = 0.5 * (a + b);

    // Newton polish on F(theta) = (Phi - x) . dPhi/dtheta
    for (int it = 0; it < 4; ++it) {
        Vec2 dth;
        Vec2 p = chart_eval(chart, theta, s, &dth);
        double F = (p - x).dot(dth);
        double Fp = dth.norm2();
        if (Fp <= 0) break;
        double step = F / Fp;
        if (std::abs(step) > 2.0 / n) break;
        theta -= step;
    }
    theta = detail::wrap_unit(theta);

    AnglePoint ap;
    ap.theta = theta;
    ap.s = s;
    ap.h = chart.field.eval(x);
    ap.distance = (chart_eval(chart, theta, s) - x).norm();
    return ap;
}

/** Test oracle for the cellular angle: integrates backward from x to the
    section ray {x1 = pi/2, x2 < pi/2} and divides the return time by the
    period. Independent of any chart. */
inline double cellular_angle_by_return(const HamiltonianField& f, const Vec2& x,
                                       double tol = 1e-12) {
    using Ode = Dopri5<2>;
    Ode::Options opt;
    opt.rtol = tol;
    opt.atol = tol;
    Ode::Rhs back = [&f](double, const Ode::State& y, Ode::State& dy) {
        Vec2 b = f.velocity({y[0], y[1]});
        dy[0] = -b.x;
        dy[1] = -b.y;
    };
    double g_prev = x.x - pi / 2;
    double tau = -1.0;
    auto obs = [&](const Ode::Segment& seg) {
        auto ye = seg.eval(seg.t1());
        double ge = ye[0] - pi / 2;
        if (g_prev != 0.0 && (g_prev < 0) != (ge < 0)) {
            std::function<double(double, const std::array<double, 2>&)> gg =
                [](double, const std::array<double, 2>& y) { return y[0] - pi / 2; };
            double tc = refine_root<2>(seg, gg, seg.t0, seg.t1());
            auto yc = seg.eval(tc);
            if (yc[1] < pi / 2) {
                tau = tc;
                return false;
            }
        }
        g_prev = ge;
        return true;
    };
    double T = period_agm(f.eval(x));
    Ode::integrate(back, {x.x, x.y}, 0.0, 4.0 * T, opt, obs);
    if (tau < 0) {
        if (std::abs(g_prev) < 1e-12 && x.y < pi / 2) return 0.0; // already on the section
        throw Error("cellular_angle_by_return: no section crossing found");
    }
    return detail::wrap_unit(tau / T);
}

} // namespace mixlab

#endif
