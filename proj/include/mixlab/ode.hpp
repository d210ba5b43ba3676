#ifndef MIXLAB_ODE_HPP
#define MIXLAB_ODE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include "mixlab/core.hpp"

namespace mixlab {

/** Dormand-Prince 5(4) embedded pair with the classical quartic dense-output
    interpolant. Explicit, adaptive, FSAL; handles forward and backward time.
    Event detection is built on the per-step dense segments. */
template <size_t N>
class Dopri5 {
public:
    using State = std::array<double, N>;
    using Rhs = std::function<void(double, const State&, State&)>;

    /// One accepted step with its dense-output polynomial.
    struct Segment {
        double t0 = 0.0, h = 0.0;
        std::array<State, 5> r; // rcont1..rcont5

        double t1() const { return t0 + h; }

        State eval(double t) const {
            double s = (t - t0) / h;
            double s1 = 1.0 - s;
            State y;
            for (size_t i = 0; i < N; ++i)
                y[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
            return y;
        }
    };

    struct Options {
        double rtol = 1e-10;
        double atol = 1e-12;
        double h_init = 0.0;     // 0 -> automatic
        double h_max = 0.0;      // 0 -> |t1 - t0|
        long max_steps = 50'000'000;
    };

    /** Integrates y' = f(t,y) from (t0,y0) to t1. The observer is called once
        per accepted step; returning false stops the integration early.
        Returns the state at the last accepted time (t1 unless stopped). */
    static State integrate(const Rhs& f, State y0, double t0, double t1, const Options& opt,
                           const std::function<bool(const Segment&)>& observer = nullptr) {
        if (t1 == t0) return y0;
        const double dir = t1 > t0 ? 1.0 : -1.0;
        const double h_max = opt.h_max > 0 ? opt.h_max : std::abs(t1 - t0);

        State y = y0, k1, tmp;
        f(t0, y, k1);
        double t = t0;
        double h = opt.h_init > 0 ? opt.h_init : initial_step(f, t0, y, k1, dir, opt);
        h = std::min(h, h_max);

        std::array<State, 7> k;
        k[0] = k1;

        for (long step = 0; step < opt.max_steps; ++step) {
            if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)))
                throw StallError("dopri5: step size underflow at t=" + std::to_string(t));
            bool last = false;
            if (dir * (t + dir * h - t1) >= 0.0) { h = std::abs(t1 - t); last = true; }

            const double hd = dir * h;
            // stages
            stage(f, t, y, k, hd, 1, {a21});
            stage(f, t, y, k, hd, 2, {a31, a32});
            stage(f, t, y, k, hd, 3, {a41, a42, a43});
            stage(f, t, y, k, hd, 4, {a51, a52, a53, a54});
            stage(f, t, y, k, hd, 5, {a61, a62, a63, a64, a65});

            State y1;
            for (size_t i = 0; i < N; ++i)
                y1[i] = y[i] + hd * (a71 * k[0][i] + a73 * k[2][i] + a74 * k[3][i] +
                                     a75 * k[4][i] + a76 * k[5][i]);
            f(t + hd, y1, k[6]);

            // embedded error estimate
            double err = 0.0;
            for (size_t i = 0; i < N; ++i) {
                double e = hd * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] +
                                 e6 * k[5][i] + e7 * k[6][i]);
                double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
                err += sq(e / sc);
            }
            err = std::sqrt(err / N);

            if (err <= 1.0) {
                Segment seg;
                seg.t0 = t;
                seg.h = hd;
                for (size_t i = 0; i < N; ++i) {
                    double ydiff = y1[i] - y[i];
                    double bspl = hd * k[0][i] - ydiff;
                    seg.r[0][i] = y[i];
                    seg.r[1][i] = ydiff;
                    seg.r[2][i] = bspl;
                    seg.r[3][i] = ydiff - hd * k[6][i] - bspl;
                    seg.r[4][i] = hd * (d1 * k[0][i] + d3 * k[2][i] + d4 * k[3][i] +
                                        d5 * k[4][i] + d6 * k[5][i] + d7 * k[6][i]);
                }
                t += hd;
                y = y1;
                k[0] = k[6]; // FSAL
                if (observer && !observer(seg)) return y;
                if (last) return y;
                double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
                h = std::min(h * fac, h_max);
            } else {
                double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
                h *= fac;
            }
            (void)tmp;
        }
        throw Error("dopri5: exceeded max step count");
    }

private:
    static void stage(const Rhs& f, double t, const State& y, std::array<State, 7>& k, double hd,
                      int s, std::initializer_list<double> as) {
        State u;
        for (size_t i = 0; i < N; ++i) {
            double acc = 0.0;
            int j = 0;
            for (double a : as) acc += a * k[j++][i];
            u[i] = y[i] + hd * acc;
        }
        f(t + c[s] * hd, u, k[s]);
    }

    static double initial_step(const Rhs& f, double t0, const State& y0, const State& f0,
                               double dir, const Options& opt) {
        double dny = 0.0, dnf = 0.0;
        for (size_t i = 0; i < N; ++i) {
            double sc = opt.atol + opt.rtol * std::abs(y0[i]);
            dny += sq(y0[i] / sc);
            dnf += sq(f0[i] / sc);
        }
        double h0 = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6
                                                   : 0.01 * std::sqrt(dny / dnf);
        // one explicit Euler probe to estimate the second derivative
        State y1, f1;
        for (size_t i = 0; i < N; ++i) y1[i] = y0[i] + dir * h0 * f0[i];
        f(t0 + dir * h0, y1, f1);
        double d2 = 0.0;
        for (size_t i = 0; i < N; ++i) {
            double sc = opt.atol + opt.rtol * std::abs(y0[i]);
            d2 += sq((f1[i] - f0[i]) / sc);
        }
        d2 = std::sqrt(d2) / h0;
        double dmax = std::max(std::sqrt(dnf), d2);
        double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
        return std::min(100.0 * h0, h1);
    }

    // Butcher tableau
    static constexpr double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    // y1(5th) - y1(4th)
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    // dense output
    static constexpr double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0,
                            d7 = 69997945.0 / 29380423.0;
};

/** Finds a root of g(t) inside a dense segment by bisection on [ta,tb],
    assuming g(ta) and g(tb) bracket it. Returns the refined time. */
template <size_t N>
inline double refine_root(const typename Dopri5<N>::Segment& seg,
                          const std::function<double(double, const std::array<double, N>&)>& g,
                          double ta, double tb) {
    double ga = g(ta, seg.eval(ta));
    for (int it = 0; it < 200; ++it) {
        double tm = 0.5 * (ta + tb);
        if (tm == ta || tm == tb) break;
        double gm = g(tm, seg.eval(tm));
        if ((ga <= 0.0) == (gm <= 0.0)) { ta = tm; ga = gm; }
        else tb = tm;
        if (std::abs(tb - ta) < 1e-15 * std::max(1.0, std::abs(ta))) break;
    }
    return 0.5 * (ta + tb);
}

} // namespace mixlab

#endif
