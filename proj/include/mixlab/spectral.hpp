#ifndef MIXLAB_SPECTRAL_HPP
#define MIXLAB_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numeric>
#include <vector>

#include "mixlab/core.hpp"
#include "mixlab/fft2.hpp"
#include "mixlab/field.hpp"

namespace mixlab {

/** Spectral scalar state on the 2pi-periodic torus. Coefficients are stored
    in the r2c half-plane layout (N rows of N/2+1 columns), which keeps the
    conjugate symmetry of a real field structural. */
struct ScalarField {
    int N = 0;
    std::vector<std::complex<double>> c; // [i*(N/2+1) + j]
    double time = 0.0;

    int ncols() const { return N / 2 + 1; }
    std::complex<double>& at(int i, int j) { return c[(size_t)i * ncols() + j]; }
    const std::complex<double>& at(int i, int j) const { return c[(size_t)i * ncols() + j]; }
    std::complex<double> mean_mode() const { return c.empty() ? 0.0 : c[0]; }
};

inline ScalarField make_scalar_field(int N) {
    ScalarField f;
    f.N = N;
    f.c.assign((size_t)N * (N / 2 + 1), {0.0, 0.0});
    return f;
}

/// L2(T^2) inner products: ||rho||^2 = (2pi)^2 sum w_j |c|^2.
inline double l2_norm_sq(const ScalarField& f) {
    const int N = f.N, nc = f.ncols();
    double acc = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < nc; ++j) {
            double w = (j == 0 || j == N / 2) ? 1.0 : 2.0;
            acc += w * std::norm(f.at(i, j));
        }
    return sq(two_pi) * acc;
}

inline double h1_seminorm_sq(const ScalarField& f) {
    const int N = f.N, nc = f.ncols();
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
        int k1 = i <= N / 2 ? i : i - N;
        for (int j = 0; j < nc; ++j) {
            double w = (j == 0 || j == N / 2) ? 1.0 : 2.0;
            acc += w * (k1 * (double)k1 + j * (double)j) * std::norm(f.at(i, j));
        }
    }
    return sq(two_pi) * acc;
}

/** Pseudospectral advection-diffusion solver: nonlinear term in physical
    space with 2/3-rule dealiasing, diffusion exact through the spectral
    integrating factor, advection advanced by classical RK4 under the
    integrating factor. nu = 0 is the transport solver. */
class SpectralSolver {
public:
    struct Options {
        double cfl = 0.5;
        double dt_override = 0.0; // > 0 forces the step
        bool track_dissipation = true;
    };

    SpectralSolver(const HamiltonianField& field, int N, double nu)
        : SpectralSolver(field, N, nu, Options()) {}

    SpectralSolver(const HamiltonianField& field, int N, double nu, Options opt)
        : N_(N), nu_(nu), opt_(opt), fft_(N) {
        if (N < 4 || (N & (N - 1)) != 0)
            throw DomainError("SpectralSolver: N must be a power of two >= 4");
        if (nu < 0) throw DomainError("SpectralSolver: nu must be >= 0");
        b1_.resize((size_t)N * N);
        b2_.resize((size_t)N * N);
        max_speed_ = 0.0;
        for (int i = 0; i < N; ++i) {
            double x1 = two_pi * i / N;
            for (int j = 0; j < N; ++j) {
                double x2 = two_pi * j / N;
                Vec2 b = field.velocity({x1, x2});
                b1_[(size_t)i * N + j] = b.x;
                b2_[(size_t)i * N + j] = b.y;
                max_speed_ = std::max(max_speed_, b.norm());
            }
        }
        double dx = two_pi / N;
        dt_ = opt.dt_override > 0 ? opt.dt_override
                                  : opt.cfl * dx / std::max(max_speed_, 1e-12);
        if (opt.dt_override > 0 && max_speed_ > 0 &&
            opt.dt_override > opt.cfl * dx / max_speed_ * (1.0 + 1e-12))
            throw DomainError("SpectralSolver: dt violates the CFL constraint");
        build_factors();
        scratch_.resize((size_t)N * N);
        px_.resize((size_t)N * N);
        py_.resize((size_t)N * N);
        cs1_.resize(fft_.n_cplx());
        cs2_.resize(fft_.n_cplx());
        k1_.resize(fft_.n_cplx());
        k2_.resize(fft_.n_cplx());
        k3_.resize(fft_.n_cplx());
        k4_.resize(fft_.n_cplx());
        u2_.resize(fft_.n_cplx());
    }

    double dt() const { return dt_; }
    double max_speed() const { return max_speed_; }
    double nu() const { return nu_; }

    /// Sets a new step (used to land sample times exactly); re-checks CFL.
    void set_dt(double dt) {
        double dx = two_pi / N_;
        if (max_speed_ > 0 && dt > opt_.cfl * dx / max_speed_ * (1.0 + 1e-12))
            throw DomainError("SpectralSolver: dt violates the CFL constraint");
        dt_ = dt;
        build_factors();
    }

    /// Accumulated 2 nu int ||grad rho||^2 dt (trapezoid per step).
    double dissipation_integral() const { return diss_integral_; }
    void reset_dissipation_integral() { diss_integral_ = 0.0; }

    /// One RK4 step under the integrating factor; advances state.time by dt.
    void step(ScalarField& u) {
        if (u.N != N_) throw DomainError("SpectralSolver: grid size mismatch");
        const size_t nc = u.c.size();
        double g_before = opt_.track_dissipation && nu_ > 0 ? h1_seminorm_sq(u) : 0.0;

        rhs(u.c, k1_);
        for (size_t m = 0; m < nc; ++m) u2_[m] = ehalf_[m] * (u.c[m] + 0.5 * dt_ * k1_[m]);
        rhs(u2_, k2_);
        for (size_t m = 0; m < nc; ++m) u2_[m] = ehalf_[m] * u.c[m] + 0.5 * dt_ * k2_[m];
        rhs(u2_, k3_);
        for (size_t m = 0; m < nc; ++m)
            u2_[m] = efull_[m] * u.c[m] + dt_ * ehalf_[m] * k3_[m];
        rhs(u2_, k4_);
        for (size_t m = 0; m < nc; ++m)
            u.c[m] = efull_[m] * u.c[m] +
                     (dt_ / 6.0) * (efull_[m] * k1_[m] + 2.0 * ehalf_[m] * (k2_[m] + k3_[m]) +
                                    k4_[m]);
        u.time += dt_;
        if (opt_.track_dissipation && nu_ > 0) {
            double g_after = h1_seminorm_sq(u);
            diss_integral_ += nu_ * dt_ * (g_before + g_after); // 2 nu int ||grad||^2
        }
    }

    /// -dealias(F(b . grad rho)), the advection right-hand side.
    void rhs(const std::vector<std::complex<double>>& c, std::vector<std::complex<double>>& out) {
        const int N = N_, ncol = N / 2 + 1;
        const std::complex<double> I{0.0, 1.0};
        for (int i = 0; i < N; ++i) {
            int kx = i <= N / 2 ? i : i - N;
            for (int j = 0; j < ncol; ++j) {
                auto v = c[(size_t)i * ncol + j];
                cs1_[(size_t)i * ncol + j] = I * (double)kx * v;
                cs2_[(size_t)i * ncol + j] = I * (double)j * v;
            }
        }
        fft_.backward(cs1_, px_);
        fft_.backward(cs2_, py_);
        for (size_t m = 0; m < scratch_.size(); ++m)
            scratch_[m] = b1_[m] * px_[m] + b2_[m] * py_[m];
        fft_.forward(scratch_, out);
        const int kcut = N / 3;
        for (int i = 0; i < N; ++i) {
            int kx = i <= N / 2 ? i : i - N;
            bool killx = std::abs(kx) > kcut;
            for (int j = 0; j < ncol; ++j) {
                size_t m = (size_t)i * ncol + j;
                if (killx || j > kcut) out[m] = 0.0;
                else out[m] = -out[m];
            }
        }
        out[0] = 0.0; // b is divergence free; the mean is exactly conserved
    }

    /// physical-space view of a state (uses the solver's transform)
    void to_physical(const ScalarField& u, std::vector<double>& phys) {
        fft_.backward(u.c, phys);
    }
    void to_spectral(const std::vector<double>& phys, ScalarField& u) {
        fft_.forward(phys, u.c);
    }

private:
    void build_factors() {
        const int N = N_, ncol = N / 2 + 1;
        efull_.resize((size_t)N * ncol);
        ehalf_.resize((size_t)N * ncol);
        for (int i = 0; i < N; ++i) {
            int kx = i <= N / 2 ? i : i - N;
            for (int j = 0; j < ncol; ++j) {
                double k2 = kx * (double)kx + j * (double)j;
                efull_[(size_t)i * ncol + j] = std::exp(-nu_ * k2 * dt_);
                ehalf_[(size_t)i * ncol + j] = std::exp(-0.5 * nu_ * k2 * dt_);
            }
        }
    }

    int N_;
    double nu_;
    Options opt_;
    Fft2 fft_;
    double dt_ = 0.0, max_speed_ = 0.0, diss_integral_ = 0.0;
    std::vector<double> b1_, b2_, scratch_, px_, py_;
    std::vector<double> efull_, ehalf_;
    std::vector<std::complex<double>> cs1_, cs2_, k1_, k2_, k3_, k4_, u2_;
};

/// step() as a free operation on a copy, matching the one-step contract.
inline ScalarField step(const ScalarField& rho, const HamiltonianField& field, double nu,
                        double dt) {
    SpectralSolver::Options opt;
    opt.dt_override = dt;
    SpectralSolver solver(field, rho.N, nu, opt);
    ScalarField out = rho;
    solver.step(out);
    return out;
}

/** Norm series of a solve() run; energy_residual is the discrete defect of
    d/dt ||rho||^2 + 2 nu ||grad rho||^2 = 0 per unit time over each sample
    interval. */
struct NormSeries {
    std::vector<double> t, l2, h1, hminus1, energy_residual;
    std::vector<ScalarField> snapshots; // only when requested
};

/** Sobolev norm by the Fourier multiplier |k|^order (order in {-1,0,1});
    Parseval sum over modes. H^-1 requires a zero-mean field (the k = 0 mode
    has no |k|^-1 multiplier) and rejects anything beyond round-off mean. */
inline double sobolev_norm(const ScalarField& rho, int order) {
    if (order < -1 || order > 1) throw DomainError("sobolev_norm: order must be -1, 0, or 1");
    const int N = rho.N, nc = rho.ncols();
    double acc = 0.0;
    double l2sq = l2_norm_sq(rho);
    if (order == -1 && std::abs(rho.mean_mode()) > 1e-10 * std::max(1.0, std::sqrt(l2sq)))
        throw DomainError("sobolev_norm: H^-1 of a field with nonzero mean");
    for (int i = 0; i < N; ++i) {
        int k1 = i <= N / 2 ? i : i - N;
        for (int j = 0; j < nc; ++j) {
            if (order == -1 && k1 == 0 && j == 0) continue;
            double w = (j == 0 || j == N / 2) ? 1.0 : 2.0;
            double k2 = k1 * (double)k1 + j * (double)j;
            double mult = order == 0 ? 1.0 : (order == 1 ? k2 : (k2 == 0 ? 0.0 : 1.0 / k2));
            acc += w * mult * std::norm(rho.at(i, j));
        }
    }
    return two_pi * std::sqrt(acc);
}

/** Advances rho0 to t_end with a fixed CFL step (subdivided so every sample
    time is hit exactly), recording L2, H1, H-1 norms and the energy-balance
    residual at the samples. */
inline NormSeries solve(const ScalarField& rho0, const HamiltonianField& field, double nu,
                        double t_end, const std::vector<double>& sample_times,
                        SpectralSolver::Options opt = SpectralSolver::Options(), bool keep_snapshots = false) {
    for (double ts : sample_times)
        if (ts < 0.0 || ts > t_end + 1e-12) throw DomainError("solve: sample time outside [0,t_end]");
    SpectralSolver solver(field, rho0.N, nu, opt);
    ScalarField u = rho0;
    NormSeries out;
    std::vector<double> samples = sample_times;
    std::sort(samples.begin(), samples.end());
    if (samples.empty() || samples.front() > 0.0) samples.insert(samples.begin(), 0.0);

    const double base_dt = solver.dt();
    double l2_prev = 0.0, t_prev = 0.0;
    bool first = true;
    for (double ts : samples) {
        double span = ts - t_prev;
        if (span > 0) {
            int nsub = (int)std::ceil(span / base_dt - 1e-12);
            solver.set_dt(span / nsub);
            for (int k = 0; k < nsub; ++k) solver.step(u);
            u.time = ts; // guard against roundoff drift in the stamp
        }
        double l2sq = l2_norm_sq(u);
        out.t.push_back(ts);
        out.l2.push_back(std::sqrt(l2sq));
        out.h1.push_back(sobolev_norm(u, 1));
        out.hminus1.push_back(sobolev_norm(u, -1));
        if (first) {
            out.energy_residual.push_back(0.0);
            first = false;
        } else {
            double defect = std::abs((l2sq - l2_prev) + solver.dissipation_integral());
            out.energy_residual.push_back(defect / std::max(span, 1e-300));
        }
        solver.reset_dissipation_integral();
        if (keep_snapshots) out.snapshots.push_back(u);
        l2_prev = l2sq;
        t_prev = ts;
    }
    return out;
}

/** Evolves the nu > 0 and nu = 0 solutions from identical data and records
    ||rho_nu(t) - rho(t)||^2_{L2} on t_grid. Warns (does not fail) when the
    initial support leaves the given annulus, since the vanishing-viscosity
    bound assumes support in a good invariant set. */
struct GapSeries {
    std::vector<double> t, gap_sq;
    bool support_warning = false;
};

inline GapSeries viscosity_gap(const ScalarField& rho0, const HamiltonianField& field, double nu,
                               const std::vector<double>& t_grid,
                               const LevelAnnulus* annulus = nullptr,
                               SpectralSolver::Options opt = SpectralSolver::Options()) {
    GapSeries out;
    if (annulus) {
        // support mask vs the annulus in H
        Fft2 fft(rho0.N);
        std::vector<double> phys;
        fft.backward(rho0.c, phys);
        double peak = 0.0;
        for (double v : phys) peak = std::max(peak, std::abs(v));
        for (int i = 0; i < rho0.N && !out.support_warning; ++i)
            for (int j = 0; j < rho0.N; ++j) {
                if (std::abs(phys[(size_t)i * rho0.N + j]) <= 1e-12 * peak) continue;
                double hv = field.eval({two_pi * i / rho0.N, two_pi * j / rho0.N});
                if (hv < annulus->h_lo - 1e-12 || hv > annulus->h_hi + 1e-12) {
                    out.support_warning = true;
                    break;
                }
            }
    }
    opt.track_dissipation = false;
    SpectralSolver nu_solver(field, rho0.N, nu, opt);
    SpectralSolver t_solver(field, rho0.N, 0.0, opt);
    ScalarField unu = rho0, u0 = rho0;
    std::vector<double> grid = t_grid;
    std::sort(grid.begin(), grid.end());
    const double base_dt = nu_solver.dt();
    double t_prev = 0.0;
    for (double ts : grid) {
        double span = ts - t_prev;
        if (span > 0) {
            int nsub = (int)std::ceil(span / base_dt - 1e-12);
            nu_solver.set_dt(span / nsub);
            t_solver.set_dt(span / nsub);
            for (int k = 0; k < nsub; ++k) {
                nu_solver.step(unu);
                t_solver.step(u0);
            }
        }
        ScalarField diff = unu;
        for (size_t m = 0; m < diff.c.size(); ++m) diff.c[m] -= u0.c[m];
        out.t.push_back(ts);
        out.gap_sq.push_back(l2_norm_sq(diff));
        t_prev = ts;
    }
    return out;
}

/** Subtracts the conditional mean over level sets of H per invariant cell:
    grid points are bucketed by (cell, H) into n_bins equal-count bins (the
    grid samples the area measure, so equal count is uniform measure) and the
    bin mean is removed. */
inline ScalarField project_streamline_mean_free(const ScalarField& rho,
                                                const HamiltonianField& field,
                                                int n_bins = 256) {
    const int N = rho.N;
    Fft2 fft(N);
    std::vector<double> phys;
    fft.backward(rho.c, phys);

    auto cell_of = [&field](double x1, double x2) -> size_t {
        if (field.cells.empty()) return 0;
        for (size_t c = 0; c < field.cells.size(); ++c) {
            auto& [lo, hi] = field.cells[c];
            if (x1 >= lo.x && x1 < hi.x && x2 >= lo.y && x2 < hi.y) return c;
        }
        return 0;
    };

    size_t ncells = field.n_cells();
    std::vector<std::vector<std::pair<double, size_t>>> buckets(ncells);
    for (int i = 0; i < N; ++i) {
        double x1 = two_pi * i / N;
        for (int j = 0; j < N; ++j) {
            double x2 = two_pi * j / N;
            size_t idx = (size_t)i * N + j;
            size_t c = cell_of(x1, x2);
            buckets[c].push_back({field.eval({x1, x2}), idx});
        }
    }
    for (auto& bucket : buckets) {
        if (bucket.empty()) continue;
        std::sort(bucket.begin(), bucket.end());
        size_t total = bucket.size();
        size_t per = std::max<size_t>(1, total / n_bins);
        size_t start = 0;
        while (start < total) {
            size_t end = std::min(start + per, total);
            if (total - end < per / 2) end = total; // fold the remainder into the last bin
            // never split an H-plateau: symmetric grid points carry equal
            // levels up to round-off and must share a bin
            while (end < total && bucket[end].first - bucket[end - 1].first <= 1e-12) ++end;
            double mean = 0.0;
            for (size_t k = start; k < end; ++k) mean += phys[bucket[k].second];
            mean /= (double)(end - start);
            for (size_t k = start; k < end; ++k) phys[bucket[k].second] -= mean;
            start = end;
        }
    }
    ScalarField out = rho;
    fft.forward(phys, out.c);
    return out;
}

} // namespace mixlab

#endif
