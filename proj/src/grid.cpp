#include "drheo/grid.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

namespace drheo {

namespace {
// FFTW planning is not thread safe
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

fft_workspace::fft_workspace(const torus_grid& grid) : grid_(grid) {
    const std::size_t npts = grid_.points();
    in_.resize(npts);
    out_.resize(npts);
    int dims[3] = {grid_.n, grid_.n, grid_.n};
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan_fwd_ = fftw_plan_dft(grid_.d, dims, reinterpret_cast<fftw_complex*>(in_.data()),
                              reinterpret_cast<fftw_complex*>(out_.data()), FFTW_FORWARD,
                              FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft(grid_.d, dims, reinterpret_cast<fftw_complex*>(in_.data()),
                              reinterpret_cast<fftw_complex*>(out_.data()), FFTW_BACKWARD,
                              FFTW_ESTIMATE);
    if (!plan_fwd_ || !plan_bwd_) fail(error_kind::config, "fftw plan creation failed");
}

fft_workspace::~fft_workspace() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void fft_workspace::forward(const std::complex<double>* x, std::complex<double>* k) {
    const std::size_t npts = grid_.points();
    std::memcpy(in_.data(), x, npts * sizeof(std::complex<double>));
    fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_),
                     reinterpret_cast<fftw_complex*>(in_.data()),
                     reinterpret_cast<fftw_complex*>(out_.data()));
    const double scale = 1.0 / static_cast<double>(npts);
    for (std::size_t i = 0; i < npts; ++i) k[i] = out_[i] * scale;
}

void fft_workspace::backward(const std::complex<double>* k, std::complex<double>* x) {
    const std::size_t npts = grid_.points();
    std::memcpy(in_.data(), k, npts * sizeof(std::complex<double>));
    fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_),
                     reinterpret_cast<fftw_complex*>(in_.data()),
                     reinterpret_cast<fftw_complex*>(out_.data()));
    std::memcpy(x, out_.data(), npts * sizeof(std::complex<double>));
}

void fft_workspace::to_physical(const std::vector<std::complex<double>>& k,
                                std::vector<double>& x) {
    const std::size_t npts = grid_.points();
    std::vector<std::complex<double>> tmp(npts);
    backward(k.data(), tmp.data());
    x.resize(npts);
    for (std::size_t i = 0; i < npts; ++i) x[i] = tmp[i].real();
}

void fft_workspace::to_spectral(const std::vector<double>& x,
                                std::vector<std::complex<double>>& k) {
    const std::size_t npts = grid_.points();
    std::vector<std::complex<double>> tmp(npts);
    for (std::size_t i = 0; i < npts; ++i) tmp[i] = x[i];
    k.resize(npts);
    forward(tmp.data(), k.data());
}

} // namespace drheo
