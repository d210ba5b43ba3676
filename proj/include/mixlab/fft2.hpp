#ifndef MIXLAB_FFT2_HPP
#define MIXLAB_FFT2_HPP

#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "mixlab/core.hpp"

namespace mixlab {

/** Real 2D FFT pair on an N x N periodic grid (FFTW r2c/c2r). Coefficients
    are the Fourier coefficients of rho = sum c_k e^{i k.x}, i.e. forward
    transforms divide by N^2. Plans use FFTW_ESTIMATE so identical inputs
    produce identical outputs across runs. Plan creation/destruction is
    serialized (FFTW requirement); execution on private buffers is not. */
class Fft2 {
public:
    explicit Fft2(int n) : n_(n), nc_(n * (n / 2 + 1)) {
        real_ = fftw_alloc_real((size_t)n_ * n_);
        cplx_ = fftw_alloc_complex(nc_);
        std::lock_guard<std::mutex> lock(plan_mutex());
        fwd_ = fftw_plan_dft_r2c_2d(n_, n_, real_, cplx_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_2d(n_, n_, cplx_, real_, FFTW_ESTIMATE);
        if (!fwd_ || !bwd_) throw Error("fftw plan creation failed");
    }

    ~Fft2() {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(cplx_);
    }

    Fft2(const Fft2&) = delete;
    Fft2& operator=(const Fft2&) = delete;

    int n() const { return n_; }
    int n_cplx() const { return nc_; }

    /// physical -> spectral, normalized by 1/N^2
    void forward(const std::vector<double>& phys, std::vector<std::complex<double>>& spec) {
        for (int i = 0; i < n_ * n_; ++i) real_[i] = phys[i];
        fftw_execute(fwd_);
        spec.resize(nc_);
        const double inv = 1.0 / ((double)n_ * n_);
        for (int i = 0; i < nc_; ++i) spec[i] = {cplx_[i][0] * inv, cplx_[i][1] * inv};
    }

    /// spectral -> physical (inverse of forward)
    void backward(const std::vector<std::complex<double>>& spec, std::vector<double>& phys) {
        for (int i = 0; i < nc_; ++i) {
            cplx_[i][0] = spec[i].real();
            cplx_[i][1] = spec[i].imag();
        }
        fftw_execute(bwd_);
        phys.resize((size_t)n_ * n_);
        for (int i = 0; i < n_ * n_; ++i) phys[i] = real_[i];
    }

    /// signed wavenumber of row index i
    int kx(int i) const { return i <= n_ / 2 ? i : i - n_; }
    /// column index j holds k2 = j in [0, N/2]
    static int ky(int j) { return j; }

    /// Parseval weight: middle columns represent a conjugate pair.
    int weight(int j) const { return (j == 0 || j == n_ / 2) ? 1 : 2; }

private:
    static std::mutex& plan_mutex() {
        static std::mutex m;
        return m;
    }

    int n_, nc_;
    double* real_;
    fftw_complex* cplx_;
    fftw_plan fwd_, bwd_;
};

} // namespace mixlab

#endif
