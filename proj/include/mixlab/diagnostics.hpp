#ifndef MIXLAB_DIAGNOSTICS_HPP
#define MIXLAB_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mixlab/core.hpp"
#include "mixlab/data.hpp"
#include "mixlab/field.hpp"
#include "mixlab/spectral.hpp"

namespace mixlab {

/** A fitted decay exponent with its window and log-space residual. */
struct RateEstimate {
    double exponent = 0.0;
    double prefactor = 0.0;
    double window_lo = 0.0, window_hi = 0.0;
    double residual = 0.0; // RMS log error
    int n_points = 0;
};

/// Least squares of log y against log x.
inline RateEstimate fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw DomainError("fit_power_law: need matching arrays with >= 2 points");
    size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0) || !(y[i] > 0))
            throw DomainError("fit_power_law: non-positive sample rejected");
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) throw DomainError("fit_power_law: degenerate abscissae");
    RateEstimate r;
    r.exponent = (n * sxy - sx * sy) / denom;
    double intercept = (sy - r.exponent * sx) / n;
    r.prefactor = std::exp(intercept);
    double rss = 0;
    for (size_t i = 0; i < n; ++i)
        rss += sq(std::log(y[i]) - (intercept + r.exponent * std::log(x[i])));
    r.residual = std::sqrt(rss / n);
    r.window_lo = *std::min_element(x.begin(), x.end());
    r.window_hi = *std::max_element(x.begin(), x.end());
    r.n_points = (int)n;
    return r;
}

/** Power-law fit of log(||rho(t)||_{H^-1} / ||rho_0||_{H^1}) vs log t;
    the exponent estimates the mixing rate gamma(t) ~ t^exponent. */
inline RateEstimate fit_mixing_rate(const std::vector<double>& t,
                                    const std::vector<double>& hminus1, double h1_initial) {
    if (t.size() != hminus1.size()) throw DomainError("fit_mixing_rate: length mismatch");
    if (!(h1_initial > 0)) throw DomainError("fit_mixing_rate: need ||rho_0||_H1 > 0");
    std::vector<double> ts, ys;
    for (size_t i = 0; i < t.size(); ++i) {
        if (t[i] < 1.0) continue;
        if (!(hminus1[i] > 0)) throw DomainError("fit_mixing_rate: non-positive norm sample");
        ts.push_back(t[i]);
        ys.push_back(hminus1[i] / h1_initial);
    }
    if (ts.size() < 4) throw DomainError("fit_mixing_rate: need >= 4 samples with t >= 1");
    return fit_power_law(ts, ys);
}

/** One nu-run of a dissipation sweep and its extracted rate. lambda is the
    reciprocal e-folding time of the L2 norm, which is insensitive to the
    prefactor A >= 1 of the enhanced-dissipation definition. */
struct DissipationRun {
    double nu = 0.0;
    std::vector<double> t, l2;
};

struct PerNuRate {
    double nu = 0.0;
    double lambda = 0.0;
    double efold_time = 0.0;
    bool reached = false;    // decay threshold reached inside the run
    bool monotone_ok = true; // lambda non-decreasing vs previous nu (report flag)
};

struct DissipationFit {
    std::vector<PerNuRate> rates;
    RateEstimate scaling; // log lambda vs log nu over the unflagged runs
};

/// First crossing time of l2 below l2[0]/e by log-linear interpolation.
inline double efold_time(const std::vector<double>& t, const std::vector<double>& l2) {
    if (t.size() != l2.size() || t.size() < 2) throw DomainError("efold_time: bad series");
    const double target = std::log(l2[0]) - 1.0;
    for (size_t i = 1; i < t.size(); ++i) {
        if (!(l2[i] > 0)) throw DomainError("efold_time: non-positive norm");
        double la = std::log(l2[i - 1]), lb = std::log(l2[i]);
        if (lb <= target) {
            double w = (la - target) / (la - lb);
            return t[i - 1] + w * (t[i] - t[i - 1]);
        }
    }
    return -1.0; // never reached
}

inline DissipationFit fit_dissipation_rate(const std::vector<DissipationRun>& runs) {
    if (runs.empty()) throw DomainError("fit_dissipation_rate: no runs");
    DissipationFit fit;
    std::vector<double> nus, lambdas;
    for (const auto& run : runs) {
        PerNuRate r;
        r.nu = run.nu;
        double te = efold_time(run.t, run.l2);
        if (te > 0) {
            r.reached = true;
            r.efold_time = te;
            r.lambda = 1.0 / te;
            nus.push_back(run.nu);
            lambdas.push_back(r.lambda);
        }
        fit.rates.push_back(r);
    }
    std::sort(fit.rates.begin(), fit.rates.end(),
              [](const PerNuRate& a, const PerNuRate& b) { return a.nu < b.nu; });
    for (size_t i = 1; i < fit.rates.size(); ++i)
        if (fit.rates[i].reached && fit.rates[i - 1].reached &&
            fit.rates[i].lambda < fit.rates[i - 1].lambda)
            fit.rates[i].monotone_ok = false;
    if (nus.size() >= 2) fit.scaling = fit_power_law(nus, lambdas);
    return fit;
}

/** Executable form of the main-theorem protocol: for each nu, compare both
    sides of
      ||rho_0|| - ||rho^nu(t)||  <=  C sqrt(nu (1+t)^3) ||grad rho_0||_inf
    at t* = eps0 nu^{-1/3}, with C calibrated once from a short-time
    viscosity-gap fit and eps0 from the measured data norms. Consistency with
    lambda(nu) <= C0 nu^{1/3} shows up as at most a moderate L2 drop by t*. */
struct ThmMainRow {
    double nu = 0.0;
    double t_star = 0.0;
    double l2_ratio = 0.0; // ||rho^nu(t*)|| / ||rho_0||
    double lhs = 0.0;      // ||rho_0|| - ||rho^nu(t*)||
    double rhs = 0.0;      // C sqrt(nu (1+t*)^3) ||grad rho_0||_inf
    bool consistent = false;
};

struct ThmMainReport {
    double C_calibrated = 0.0;
    double eps0 = 0.0;
    double grad_sup = 0.0;
    std::vector<ThmMainRow> rows;
};

struct ThmMainOptions {
    int N = 256;
    int m = 2;
    double cfl = 0.5;
    double calibration_t = 5.0;
    int calibration_samples = 6;
};

inline ThmMainReport verify_thm_main_protocol(const HamiltonianField& field,
                                              double h_lo, double h_hi,
                                              const std::vector<double>& nu_list,
                                              const ThmMainOptions& opt = {}) {
    if (nu_list.empty()) throw DomainError("verify_thm_main_protocol: empty nu list");
    ThmMainReport rep;
    InitialDatum datum = annulus_bump(field, opt.N, h_lo, h_hi, opt.m);
    rep.grad_sup = datum.grad_sup;
    const double rho0_l2 = std::sqrt(l2_norm_sq(datum.rho)); // 1 up to round-off

    // calibrate C from gap(t)^2 <= C^2 nu (1+t)^3 ||grad rho_0||_inf^2 at short times
    double nu_cal = *std::max_element(nu_list.begin(), nu_list.end());
    SpectralSolver::Options sopt;
    sopt.cfl = opt.cfl;
    auto gap = viscosity_gap(datum.rho, field, nu_cal,
                             linspace(opt.calibration_t / opt.calibration_samples,
                                      opt.calibration_t, opt.calibration_samples),
                             nullptr, sopt);
    double c2 = 0.0;
    for (size_t i = 0; i < gap.t.size(); ++i)
        c2 = std::max(c2, gap.gap_sq[i] /
                              (nu_cal * std::pow(1.0 + gap.t[i], 3.0) * sq(datum.grad_sup)));
    rep.C_calibrated = std::sqrt(c2);
    rep.eps0 = 0.5 * std::pow(rho0_l2 / (rep.C_calibrated * datum.grad_sup), 2.0 / 3.0);

    for (double nu : nu_list) {
        double t_star = rep.eps0 * std::pow(nu, -1.0 / 3.0);
        auto series = solve(datum.rho, field, nu, t_star, {t_star}, sopt);
        ThmMainRow row;
        row.nu = nu;
        row.t_star = t_star;
        row.l2_ratio = series.l2.back() / rho0_l2;
        row.lhs = rho0_l2 - series.l2.back();
        row.rhs = rep.C_calibrated * std::sqrt(nu * std::pow(1.0 + t_star, 3.0)) *
                  datum.grad_sup;
        row.consistent = row.lhs <= row.rhs * (1.0 + 1e-6) && row.l2_ratio >= 0.4;
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace mixlab

#endif
