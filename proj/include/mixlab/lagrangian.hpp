#ifndef MIXLAB_LAGRANGIAN_HPP
#define MIXLAB_LAGRANGIAN_HPP

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mixlab/core.hpp"
#include "mixlab/field.hpp"
#include "mixlab/ode.hpp"

namespace mixlab {

/** A time-stamped Lagrangian orbit. h_drift tracks max |H(X(t)) - H(X(0))|
    over the recorded samples. */
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec2> points;
    double h_drift = 0.0;
};

struct OrbitPeriod {
    double h = 0.0;
    double period = 0.0;
    enum Method { ReturnMap, Quadrature, Agm } method = ReturnMap;
    double residual = 0.0;
};

namespace detail {

inline Dopri5<2>::Rhs velocity_rhs(const HamiltonianField& f) {
    return [&f](double, const Dopri5<2>::State& y, Dopri5<2>::State& dy) {
        Vec2 b = f.velocity({y[0], y[1]});
        dy[0] = b.x;
        dy[1] = b.y;
    };
}

} // namespace detail

/** Integrates the flow X' = b(X) from x0 to t_end (either sign) with per-step
    relative error <= tol, recording accepted steps and the H drift. */
inline Trajectory integrate_orbit(const HamiltonianField& f, Vec2 x0, double t_end,
                                  double tol = 1e-10) {
    using Ode = Dopri5<2>;
    Ode::Options opt;
    opt.rtol = tol;
    opt.atol = tol;
    Trajectory traj;
    traj.times.push_back(0.0);
    traj.points.push_back(x0);
    const double h0 = f.eval(x0);
    auto obs = [&](const Ode::Segment& seg) {
        auto y = seg.eval(seg.t1());
        traj.times.push_back(seg.t1());
        traj.points.push_back({y[0], y[1]});
        traj.h_drift = std::max(traj.h_drift, std::abs(f.eval({y[0], y[1]}) - h0));
        return true;
    };
    if (t_end == 0.0) return traj;
    Ode::integrate(detail::velocity_rhs(f), {x0.x, x0.y}, 0.0, t_end, opt, obs);
    return traj;
}

/// Dense-output evaluation of the endpoint of an integration without storage.
inline Vec2 flow_map(const HamiltonianField& f, Vec2 x0, double t, double tol = 1e-10) {
    using Ode = Dopri5<2>;
    Ode::Options opt;
    opt.rtol = tol;
    opt.atol = tol;
    if (t == 0.0) return x0;
    auto y = Ode::integrate(detail::velocity_rhs(f), {x0.x, x0.y}, 0.0, t, opt);
    return {y[0], y[1]};
}

struct ReturnOptions {
    double tol = 1e-12;
    double t_max = 2000.0;
    bool separatrix_guard = true; // reject h < 1e-4 or h > 1 - 1e-6 (cellular levels)
};

namespace detail {

/** First-return time to the oriented section {n.(x - x0) = 0, sign(b.n) =
    sign(b(x0).n)} for the orbit through x0. The crossing is refined on the
    dense segment. Used for cellular levels where the section ray
    {x1 = pi/2, x2 < pi/2} is transverse to every orbit of the cell. */
inline OrbitPeriod return_time_section(const HamiltonianField& f, Vec2 x0, Vec2 n, double level,
                                       const ReturnOptions& opt) {
    using Ode = Dopri5<2>;
    Ode::Options oopt;
    oopt.rtol = opt.tol;
    oopt.atol = opt.tol;
    const double orient = f.velocity(x0).dot(n) >= 0 ? 1.0 : -1.0;
    auto g = [&](const Ode::State& y) { return (Vec2{y[0], y[1]} - x0).dot(n); };
    // g(x0) = 0; the first accepted step leaves the section, so sign changes
    // are only tested against a nonzero previous value.
    double g_prev = 0.0;
    double t_cross = -1.0;
    Vec2 x_cross{};
    auto obs = [&](const Ode::Segment& seg) {
        auto ye = seg.eval(seg.t1());
        double ge = g(ye);
        if (g_prev != 0.0 && (g_prev < 0) != (ge < 0)) {
            // candidate crossing; accept only with the launch orientation
            std::function<double(double, const std::array<double, 2>&)> gg =
                [&](double, const std::array<double, 2>& y) { return g(y); };
            double tc = refine_root<2>(seg, gg, seg.t0, seg.t1());
            auto yc = seg.eval(tc);
            Vec2 bc = f.velocity({yc[0], yc[1]});
            if (orient * bc.dot(n) > 0) {
                t_cross = tc;
                x_cross = {yc[0], yc[1]};
                return false;
            }
        }
        g_prev = ge;
        return true;
    };
    Ode::integrate(velocity_rhs(f), {x0.x, x0.y}, 0.0, opt.t_max, oopt, obs);
    if (t_cross < 0)
        throw Error("return_period: no section return within t_max (orbit open or too close "
                    "to a separatrix)");
    OrbitPeriod p;
    p.h = level;
    p.period = t_cross;
    p.method = OrbitPeriod::ReturnMap;
    p.residual = (x_cross - x0).norm();
    return p;
}

/** First-return time via accumulated winding angle around a center; robust
    for closed orbits encircling a known elliptic point. */
inline OrbitPeriod return_time_winding(const HamiltonianField& f, Vec2 x0, Vec2 center,
                                       double level, const ReturnOptions& opt) {
    using Ode = Dopri5<2>;
    Ode::Options oopt;
    oopt.rtol = opt.tol;
    oopt.atol = opt.tol;
    double winding = 0.0;
    Vec2 prev = x0;
    double t_cross = -1.0;
    Vec2 x_cross{};
    auto angle_inc = [&](const Vec2& a, const Vec2& b) {
        Vec2 u = a - center, v = b - center;
        return std::atan2(u.cross(v), u.dot(v));
    };
    auto obs = [&](const Ode::Segment& seg) {
        auto ye = seg.eval(seg.t1());
        Vec2 xe{ye[0], ye[1]};
        double inc = angle_inc(prev, xe);
        if (std::abs(winding + inc) >= two_pi) {
            const double target = winding + inc > 0 ? two_pi : -two_pi;
            double base = winding;
            Vec2 pbase = prev;
            std::function<double(double, const std::array<double, 2>&)> gg =
                [&](double, const std::array<double, 2>& y) {
                    return base + angle_inc(pbase, {y[0], y[1]}) - target;
                };
            double tc = refine_root<2>(seg, gg, seg.t0, seg.t1());
            auto yc = seg.eval(tc);
            t_cross = tc;
            x_cross = {yc[0], yc[1]};
            return false;
        }
        winding += inc;
        prev = xe;
        return true;
    };
    Ode::integrate(velocity_rhs(f), {x0.x, x0.y}, 0.0, opt.t_max, oopt, obs);
    if (t_cross < 0)
        throw Error("return_period: winding never reached a full turn within t_max");
    OrbitPeriod p;
    p.h = level;
    p.period = t_cross;
    p.method = OrbitPeriod::ReturnMap;
    p.residual = (x_cross - x0).norm();
    return p;
}

} // namespace detail

/** Measured period of the closed cellular orbit {H_c = h} in (0,pi)^2.
    Launches from the section point (pi/2, arcsin h); the section is the ray
    {x1 = pi/2, x2 < pi/2} oriented by the sign of b1; the crossing time is
    refined by dense-output root finding. */
inline OrbitPeriod return_period(const HamiltonianField& f, double h,
                                 const ReturnOptions& opt = {}) {
    if (opt.separatrix_guard && (h < 1e-4 || h > 1.0 - 1e-6))
        throw DomainError("return_period: level too close to the separatrix or the center "
                          "(guard range [1e-4, 1-1e-6])");
    if (!(h > 0.0 && h < 1.0)) throw DomainError("return_period: need h in (0,1)");
    Vec2 x0{pi / 2, std::asin(h)};
    return detail::return_time_section(f, x0, {1, 0}, h, opt);
}

/// Period of the closed orbit through an arbitrary point encircling `center`.
inline OrbitPeriod return_period_around(const HamiltonianField& f, Vec2 x0, Vec2 center,
                                        const ReturnOptions& opt = {}) {
    return detail::return_time_winding(f, x0, center, f.eval(x0), opt);
}

/** Finite-difference estimate of the radial flow-map derivative near an
    elliptic point: integrates the pair X(t, p + r e1), X(t, p + (r+delta) e1)
    and returns |X(t,.) - X(t,.)| / delta. The time is snapped to the nearest
    whole number of periods of the r-orbit (the growth lemma samples the
    gradient at k T(r), where the in-period phase modulation drops out). */
inline double gradient_growth_probe(const HamiltonianField& f, double r, double t, double delta,
                                    double tol = 1e-12) {
    if (!f.elliptic_point)
        throw DomainError("gradient_growth_probe: field has no registered elliptic point");
    if (delta < 10.0 * tol)
        throw DomainError("gradient_growth_probe: delta below 10*tol is noise-dominated");
    Vec2 p = *f.elliptic_point;
    double t_eff = t;
    if (t > 0) {
        double T = return_period_around(f, {p.x + r, p.y}, p, {tol, 2000.0, true}).period;
        double k = std::round(t / T);
        if (k >= 1.0) t_eff = k * T;
    }
    Vec2 a = flow_map(f, {p.x + r, p.y}, t_eff, tol);
    Vec2 b = flow_map(f, {p.x + r + delta, p.y}, t_eff, tol);
    return (a - b).norm() / delta;
}

} // namespace mixlab

#endif
