#ifndef MIXLAB_DATA_HPP
#define MIXLAB_DATA_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "mixlab/actionangle.hpp"
#include "mixlab/core.hpp"
#include "mixlab/field.hpp"
#include "mixlab/spectral.hpp"

namespace mixlab {

/// C-infinity bump on (0,1), peak value 1 at 1/2, identically 0 outside.
inline double smooth_bump(double z) {
    if (z <= 0.0 || z >= 1.0) return 0.0;
    return std::exp(4.0 - 1.0 / z - 1.0 / (1.0 - z));
}

struct InitialDatum {
    ScalarField rho;
    double l2 = 0.0;       // before normalization
    double grad_sup = 0.0; // sup |grad rho| after normalization
    double h_lo = 0.0, h_hi = 0.0;
};

/** Annulus-supported, exactly streamline-mean-free datum
      rho0 = b . grad(G(H) sin(m x1)) = m G(H) cos(m x1) b1
    with G a smooth bump in H on (h_lo, h_hi); the streamline average of an
    orbit derivative vanishes identically. Normalized to ||rho0||_L2 = 1. */
inline InitialDatum annulus_bump(const HamiltonianField& field, int N, double h_lo, double h_hi,
                                 int m = 2) {
    if (!(h_lo < h_hi)) throw DomainError("annulus_bump: need h_lo < h_hi");
    InitialDatum out;
    out.h_lo = h_lo;
    out.h_hi = h_hi;
    std::vector<double> phys((size_t)N * N);
    for (int i = 0; i < N; ++i) {
        double x1 = two_pi * i / N;
        for (int j = 0; j < N; ++j) {
            double x2 = two_pi * j / N;
            Vec2 x{x1, x2};
            double z = (field.eval(x) - h_lo) / (h_hi - h_lo);
            double G = smooth_bump(z);
            double b1 = field.velocity(x).x;
            phys[(size_t)i * N + j] = m * G * std::cos(m * x1) * b1;
        }
    }
    ScalarField rho = make_scalar_field(N);
    Fft2 fft(N);
    fft.forward(phys, rho.c);
    out.l2 = std::sqrt(l2_norm_sq(rho));
    if (!(out.l2 > 0)) throw DomainError("annulus_bump: datum vanishes (annulus off-range?)");
    for (auto& v : rho.c) v /= out.l2;

    // sup |grad rho| by spectral differentiation on the grid
    const int nc = N / 2 + 1;
    std::vector<std::complex<double>> cx(rho.c.size()), cy(rho.c.size());
    const std::complex<double> I{0, 1};
    for (int i = 0; i < N; ++i) {
        int k1 = i <= N / 2 ? i : i - N;
        for (int j = 0; j < nc; ++j) {
            auto v = rho.c[(size_t)i * nc + j];
            cx[(size_t)i * nc + j] = I * (double)k1 * v;
            cy[(size_t)i * nc + j] = I * (double)j * v;
        }
    }
    std::vector<double> gx, gy;
    fft.backward(cx, gx);
    fft.backward(cy, gy);
    for (size_t idx = 0; idx < gx.size(); ++idx)
        out.grad_sup = std::max(out.grad_sup, std::hypot(gx[idx], gy[idx]));

    out.rho = std::move(rho);
    return out;
}

/** Cached chart inversion of every grid point inside the chart's annulus:
    theta in [0,1), the level coordinate s, and the period T(s). Built once,
    reused by every oracle-route synthesis at any time. */
struct ChartInverseMap {
    int N = 0;
    std::vector<size_t> index;  // grid index i*N + j
    std::vector<double> theta;  // [0,1)
    std::vector<double> s;
    std::vector<double> T;
};

inline ChartInverseMap build_chart_inverse(const ActionAngleChart& chart, int N,
                                           double edge_margin = 1e-9) {
    ChartInverseMap map;
    map.N = N;
    double slo = std::min(chart.s_front(), chart.s_back()) + edge_margin;
    double shi = std::max(chart.s_front(), chart.s_back()) - edge_margin;
    for (int i = 0; i < N; ++i) {
        double x1 = two_pi * i / N;
        for (int j = 0; j < N; ++j) {
            double x2 = two_pi * j / N;
            // the chart lives in the primary cell (0,pi)^2
            if (x1 <= 0 || x1 >= pi || x2 <= 0 || x2 >= pi) continue;
            double s = chart.s_of_point({x1, x2});
            if (s < slo || s > shi) continue;
            AnglePoint ap = angle_of_point(chart, {x1, x2});
            map.index.push_back((size_t)i * N + j);
            map.theta.push_back(ap.theta);
            map.s.push_back(ap.s);
            map.T.push_back(chart.variant == ActionAngleChart::Standard
                                ? period_agm(ap.s)
                                : period_agm(std::sin(ap.s)));
        }
    }
    return map;
}

/** Synthesizes the 2D field of an exactly transported angle-space datum
      f(t, theta, s) = sum_k 2 Re[ B_k(s) e^{i k (2 pi theta - 2 pi t/T(s))} ]
    on the grid (zero outside the annulus). This is the rigid-rotation phase
    law of transport_exact applied through the chart pushforward. */
inline ScalarField synthesize_oracle_field(
    const ChartInverseMap& map, const std::vector<int>& k_list,
    const std::function<std::complex<double>(int, double)>& Bk, double t) {
    std::vector<double> phys((size_t)map.N * map.N, 0.0);
    for (size_t p = 0; p < map.index.size(); ++p) {
        double val = 0.0;
        for (int k : k_list) {
            double phase = two_pi * k * (map.theta[p] - t / map.T[p]);
            val += 2.0 * (Bk(k, map.s[p]) * std::polar(1.0, phase)).real();
        }
        phys[map.index[p]] = val;
    }
    ScalarField out = make_scalar_field(map.N);
    Fft2 fft(map.N);
    fft.forward(phys, out.c);
    out.time = t;
    return out;
}

} // namespace mixlab

#endif
