#ifndef MIXLAB_FIELD_HPP
#define MIXLAB_FIELD_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mixlab/core.hpp"
#include "mixlab/expr.hpp"
#include "mixlab/ode.hpp"

namespace mixlab {

struct Domain {
    enum Kind { Torus, Plane } kind = Torus;
    double period = two_pi; // per axis, torus only
};

/** An autonomous Hamiltonian with evaluators for H, grad H, the velocity
    b = (-d2 H, d1 H), and the Hessian. Built-in fields carry analytic
    derivatives; value-only fields fall back to central differences with
    step (machine eps)^(1/3) scaled by the domain size. */
struct HamiltonianField {
    std::string name;
    Domain domain;
    int smoothness = 3; // C^k tag
    std::function<double(const Vec2&)> H;
    std::function<Vec2(const Vec2&)> grad_fn;  // optional
    std::function<Mat2(const Vec2&)> hess_fn;  // optional
    std::optional<Vec2> elliptic_point;
    // invariant quarter-cells as (lo, hi) rectangles; empty -> one cell, whole domain
    std::vector<std::pair<Vec2, Vec2>> cells;

    double fd_step() const {
        double scale = domain.kind == Domain::Torus ? domain.period / two_pi : 1.0;
        return std::cbrt(std::numeric_limits<double>::epsilon()) * scale;
    }

    double eval(const Vec2& x) const { return H(x); }

    Vec2 grad(const Vec2& x) const {
        if (grad_fn) return grad_fn(x);
        const double h = fd_step();
        return {(H({x.x + h, x.y}) - H({x.x - h, x.y})) / (2 * h),
                (H({x.x, x.y + h}) - H({x.x, x.y - h})) / (2 * h)};
    }

    /// b = grad^perp H = (-d2 H, d1 H).
    Vec2 velocity(const Vec2& x) const { return grad(x).perp(); }

    Mat2 hessian(const Vec2& x) const {
        if (hess_fn) return hess_fn(x);
        if (grad_fn) {
            const double h = fd_step();
            Vec2 gxp = grad_fn({x.x + h, x.y}), gxm = grad_fn({x.x - h, x.y});
            Vec2 gyp = grad_fn({x.x, x.y + h}), gym = grad_fn({x.x, x.y - h});
            Mat2 m;
            m.a11 = (gxp.x - gxm.x) / (2 * h);
            m.a22 = (gyp.y - gym.y) / (2 * h);
            m.a12 = 0.5 * ((gxp.y - gxm.y) / (2 * h) + (gyp.x - gym.x) / (2 * h));
            return m;
        }
        // second differences of H; wider step keeps the cancellation in check
        const double h = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
        Mat2 m;
        double h00 = H(x);
        m.a11 = (H({x.x + h, x.y}) - 2 * h00 + H({x.x - h, x.y})) / (h * h);
        m.a22 = (H({x.x, x.y + h}) - 2 * h00 + H({x.x, x.y - h})) / (h * h);
        m.a12 = (H({x.x + h, x.y + h}) - H({x.x + h, x.y - h}) - H({x.x - h, x.y + h}) +
                 H({x.x - h, x.y - h})) /
                (4 * h * h);
        return m;
    }

    size_t n_cells() const { return cells.empty() ? 1 : cells.size(); }

    std::pair<Vec2, Vec2> cell_rect(size_t cell) const {
        if (cells.empty()) {
            double p = domain.kind == Domain::Torus ? domain.period : 4.0;
            return {Vec2{0, 0}, Vec2{p, p}};
        }
        if (cell >= cells.size()) throw DomainError("cell index out of range");
        return cells[cell];
    }
};

/// [OP] eval_velocity
inline Vec2 eval_velocity(const HamiltonianField& f, const Vec2& x) { return f.velocity(x); }

/** Brackets for |b_c|^2 on the level set {H_c = h} of the cellular flow:
    2h(1-h) <= |b_c|^2 <= 2(1-h^2). */
inline std::pair<double, double> speed_bounds(double h) {
    if (!(h > 0.0 && h < 1.0)) throw DomainError("speed_bounds: h must lie in (0,1)");
    return {2.0 * h * (1.0 - h), 2.0 * (1.0 - h * h)};
}

// ---------------------------------------------------------------------------
// built-in fields

inline HamiltonianField cellular_field() {
    HamiltonianField f;
    f.name = "cellular";
    f.domain = {Domain::Torus, two_pi};
    f.smoothness = 3;
    f.H = [](const Vec2& x) { return std::sin(x.x) * std::sin(x.y); };
    f.grad_fn = [](const Vec2& x) {
        return Vec2{std::cos(x.x) * std::sin(x.y), std::sin(x.x) * std::cos(x.y)};
    };
    f.hess_fn = [](const Vec2& x) {
        Mat2 m;
        m.a11 = -std::sin(x.x) * std::sin(x.y);
        m.a22 = m.a11;
        m.a12 = std::cos(x.x) * std::cos(x.y);
        return m;
    };
    f.elliptic_point = Vec2{pi / 2, pi / 2};
    f.cells = {{{0, 0}, {pi, pi}},
               {{pi, 0}, {two_pi, pi}},
               {{pi, pi}, {two_pi, two_pi}},
               {{0, pi}, {pi, two_pi}}};
    return f;
}

/// H = -cos x2 on the torus; b = (-sin x2, 0), a stationary shear.
inline HamiltonianField shear_cos_field() {
    HamiltonianField f;
    f.name = "shear-cos";
    f.domain = {Domain::Torus, two_pi};
    f.smoothness = 3;
    f.H = [](const Vec2& x) { return -std::cos(x.y); };
    f.grad_fn = [](const Vec2& x) { return Vec2{0.0, std::sin(x.y)}; };
    f.hess_fn = [](const Vec2& x) {
        Mat2 m;
        m.a22 = std::cos(x.y);
        return m;
    };
    return f;
}

/// H = (x1^2 + x2^2)/2, isochronous center at the origin.
inline HamiltonianField harmonic_field() {
    HamiltonianField f;
    f.name = "harmonic";
    f.domain = {Domain::Plane, 0.0};
    f.smoothness = 3;
    f.H = [](const Vec2& x) { return 0.5 * x.norm2(); };
    f.grad_fn = [](const Vec2& x) { return x; };
    f.hess_fn = [](const Vec2&) {
        Mat2 m;
        m.a11 = m.a22 = 1.0;
        return m;
    };
    f.elliptic_point = Vec2{0, 0};
    return f;
}

/// H = r^2/2 + r^4/4 with r^2 = x1^2 + x2^2; period 2*pi/(1 + r^2).
inline HamiltonianField quartic_radial_field() {
    HamiltonianField f;
    f.name = "quartic-radial";
    f.domain = {Domain::Plane, 0.0};
    f.smoothness = 3;
    f.H = [](const Vec2& x) {
        double r2 = x.norm2();
        return 0.5 * r2 + 0.25 * r2 * r2;
    };
    f.grad_fn = [](const Vec2& x) { return (1.0 + x.norm2()) * x; };
    f.hess_fn = [](const Vec2& x) {
        double r2 = x.norm2();
        Mat2 m;
        m.a11 = 1.0 + r2 + 2.0 * x.x * x.x;
        m.a22 = 1.0 + r2 + 2.0 * x.y * x.y;
        m.a12 = 2.0 * x.x * x.y;
        return m;
    };
    f.elliptic_point = Vec2{0, 0};
    return f;
}

/// Value-only field from an expression string; derivatives fall back to FD.
inline HamiltonianField expr_field(const std::string& source) {
    HamiltonianField f;
    f.name = "expr:" + source;
    f.domain = {Domain::Torus, two_pi};
    f.smoothness = 1;
    auto fn = expr::compile(source);
    f.H = [fn](const Vec2& x) { return fn(x.x, x.y); };
    return f;
}

/** Field factory for the CLI spec strings: "cellular", "shear-cos",
    "expr:<expression>", plus the analytic test Hamiltonians "harmonic" and
    "quartic-radial". */
inline HamiltonianField make_field(const std::string& spec) {
    if (spec == "cellular") return cellular_field();
    if (spec == "shear-cos") return shear_cos_field();
    if (spec == "harmonic") return harmonic_field();
    if (spec == "quartic-radial") return quartic_radial_field();
    if (spec.rfind("expr:", 0) == 0) return expr_field(spec.substr(5));
    throw ConfigError("unknown field spec '" + spec + "'");
}

// ---------------------------------------------------------------------------
// good invariant annulus

/** A band of regular levels H^-1((h_lo,h_hi)) on one invariant cell with the
    sampled speed floor c0 = min |b| over the traced level sets. */
struct LevelAnnulus {
    double h_lo = 0.0;
    double h_hi = 0.0;
    double c0 = 0.0;
    size_t cell = 0;
};

struct AnnulusScanOptions {
    double margin_frac = 0.05;    // trim of the cell's H-range before scanning
    double min_width_frac = 0.2;  // window width as fraction of the scanned span
    double t_scan = 60.0;         // orbit-trace horizon per level
    double c_floor = 1e-6;        // below this every level counts as degenerate
    double ode_tol = 1e-10;
};

namespace detail {

/** Marches the transversal ODE x'(h) = grad H / |grad H|^2 from (x_from,
    h_from) to level h_to; H is the arc parameter, so this is exact level
    seeking. Throws StallError when |grad H| collapses on the way. */
inline Vec2 march_to_level(const HamiltonianField& f, Vec2 x_from, double h_from, double h_to,
                           double tol = 1e-12) {
    if (h_from == h_to) return x_from;
    using Ode = Dopri5<2>;
    Ode::Rhs rhs = [&f](double, const Ode::State& y, Ode::State& dy) {
        Vec2 g = f.grad({y[0], y[1]});
        double n2 = g.norm2();
        if (n2 < 1e-20) throw StallError("transversal march: |grad H| ~ 0");
        dy[0] = g.x / n2;
        dy[1] = g.y / n2;
    };
    Ode::Options opt;
    opt.rtol = tol;
    opt.atol = tol;
    auto y = Ode::integrate(rhs, {x_from.x, x_from.y}, h_from, h_to, opt);
    return {y[0], y[1]};
}

/// Minimum of |b| along the orbit through x0, traced for t_scan.
inline double min_speed_on_orbit(const HamiltonianField& f, Vec2 x0, double t_scan, int n_samples,
                                 double tol) {
    using Ode = Dopri5<2>;
    Ode::Rhs rhs = [&f](double, const Ode::State& y, Ode::State& dy) {
        Vec2 b = f.velocity({y[0], y[1]});
        dy[0] = b.x;
        dy[1] = b.y;
    };
    Ode::Options opt;
    opt.rtol = tol;
    opt.atol = tol;
    double cmin = f.velocity(x0).norm();
    double sample_dt = t_scan / std::max(1, n_samples);
    double next_sample = sample_dt;
    auto obs = [&](const Ode::Segment& seg) {
        auto ye = seg.eval(seg.t1());
        cmin = std::min(cmin, f.velocity({ye[0], ye[1]}).norm());
        while (next_sample <= seg.t1()) {
            if (next_sample >= seg.t0) {
                auto ys = seg.eval(next_sample);
                cmin = std::min(cmin, f.velocity({ys[0], ys[1]}).norm());
            }
            next_sample += sample_dt;
        }
        return true;
    };
    Ode::integrate(rhs, {x0.x, x0.y}, 0.0, t_scan, opt, obs);
    return cmin;
}

} // namespace detail

/** Scans c_S(h) = min_{x in H^-1(h)} |b(x)| over a level grid of the given
    cell and returns the window maximizing the sampled floor. Levels are
    reached by marching the transversal ODE from the cell's max-|b| point;
    each level set is sampled by tracing the orbit through it. */
inline LevelAnnulus find_good_annulus(const HamiltonianField& f, size_t cell, int n_levels,
                                      int n_samples, const AnnulusScanOptions& opt = {}) {
    if (n_levels < 3) throw DomainError("find_good_annulus: need at least 3 levels");
    auto [lo, hi] = f.cell_rect(cell);

    // coarse scan for the H-range and the best-speed base point
    const int ng = 64;
    double h_min = std::numeric_limits<double>::infinity(), h_max = -h_min;
    Vec2 base{};
    double best_speed = -1.0;
    for (int i = 1; i < ng; ++i) {
        for (int j = 1; j < ng; ++j) {
            Vec2 x{lo.x + (hi.x - lo.x) * i / ng, lo.y + (hi.y - lo.y) * j / ng};
            double h = f.eval(x);
            h_min = std::min(h_min, h);
            h_max = std::max(h_max, h);
            double s = f.velocity(x).norm();
            if (s > best_speed) { best_speed = s; base = x; }
        }
    }
    double range = h_max - h_min;
    if (!(range > 1e-10) || best_speed < opt.c_floor)
        throw DomainError("find_good_annulus: field has no regular values on the cell");

    double g_lo = h_min + opt.margin_frac * range;
    double g_hi = h_max - opt.margin_frac * range;
    std::vector<double> levels = linspace(g_lo, g_hi, n_levels);
    double h_base = f.eval(base);

    std::vector<double> cs(n_levels, 0.0);
    for (int i = 0; i < n_levels; ++i) {
        try {
            Vec2 xi = detail::march_to_level(f, base, h_base, levels[i], opt.ode_tol);
            cs[i] = detail::min_speed_on_orbit(f, xi, opt.t_scan, n_samples, opt.ode_tol);
        } catch (const StallError&) {
            cs[i] = 0.0; // level unreachable or orbit stalls; excluded
        }
    }

    int w = std::max(2, (int)std::floor(opt.min_width_frac * (n_levels - 1)));
    double best_floor = -1.0;
    int best_i = 0;
    for (int i = 0; i + w < n_levels; ++i) {
        double fl = cs[i];
        for (int j = i + 1; j <= i + w; ++j) fl = std::min(fl, cs[j]);
        if (fl > best_floor) { best_floor = fl; best_i = i; }
    }
    if (best_floor < opt.c_floor)
        throw DomainError("find_good_annulus: every scanned window falls below the speed floor");

    return LevelAnnulus{levels[best_i], levels[best_i + w], best_floor, cell};
}

} // namespace mixlab

#endif
