#ifndef MIXLAB_QUADRATURE_HPP
#define MIXLAB_QUADRATURE_HPP

#include <cmath>
#include <queue>
#include <vector>

#include "mixlab/core.hpp"

namespace mixlab {

namespace detail {

// Gauss 7 / Kronrod 15 pair on [-1,1].
inline constexpr double gk_nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double gk_wk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double gk_wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <typename F>
void gk15(const F& f, double a, double b, double& integral, double& error) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double fc = f(c);
    double resk = gk_wk[7] * fc;
    double resg = gk_wg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        double x = h * gk_nodes[i];
        double fsum = f(c - x) + f(c + x);
        resk += gk_wk[i] * fsum;
        if (i % 2 == 1) resg += gk_wg[i / 2] * fsum;
    }
    integral = resk * h;
    error = std::abs((resk - resg) * h);
}

struct QuadPanel {
    double a, b, integral, error;
    bool operator<(const QuadPanel& o) const { return error < o.error; }
};

} // namespace detail

/** Globally adaptive Gauss-Kronrod quadrature: the worst panel is bisected
    until the summed error estimate meets the relative tolerance. Handles
    integrable endpoint peaks (log-type period integrands) with panel counts
    proportional to log of the peak width. Deterministic. */
template <typename F>
double integrate(const F& f, double a, double b, double rel_tol = 1e-12,
                 int max_panels = 4000) {
    if (a == b) return 0.0;
    double i0, e0;
    detail::gk15(f, a, b, i0, e0);
    std::priority_queue<detail::QuadPanel> heap;
    heap.push({a, b, i0, e0});
    double total_i = i0, total_e = e0;
    int panels = 1;
    while (total_e > rel_tol * std::abs(total_i) && panels < max_panels) {
        detail::QuadPanel worst = heap.top();
        if (worst.error <= 0.0) break; // round-off floor
        heap.pop();
        double m = 0.5 * (worst.a + worst.b);
        if (m == worst.a || m == worst.b) { heap.push({worst.a, worst.b, worst.integral, 0.0}); continue; }
        double il, el, ir, er;
        detail::gk15(f, worst.a, m, il, el);
        detail::gk15(f, m, worst.b, ir, er);
        total_i += il + ir - worst.integral;
        total_e += el + er - worst.error;
        heap.push({worst.a, m, il, el});
        heap.push({m, worst.b, ir, er});
        ++panels;
    }
    // compensated resummation in panel order tightens the round-off floor
    std::vector<detail::QuadPanel> all;
    all.reserve(heap.size());
    while (!heap.empty()) { all.push_back(heap.top()); heap.pop(); }
    double sum = 0.0, comp = 0.0;
    for (const auto& p : all) {
        double y = p.integral - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

} // namespace mixlab

#endif
