#ifndef DRHEO_GRID_HPP
#define DRHEO_GRID_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "drheo/errors.hpp"

namespace drheo {

// Uniform collocation grid on the flat torus [-1,1]^d (period 2 per axis).
// Wavenumbers are integer multiples of pi, k = pi * m with m in
// {-N/2, ..., N/2 - 1}^d stored in FFT order. Collocation points are
// x_j = -1 + j h, h = 2/N; spectral coefficients pair v(x_j) with the basis
// e^{i k.(x+1)} so that index arithmetic matches the plain DFT.
struct torus_grid {
    int d = 2;
    int n = 32;
    double dealias_fraction = 2.0 / 3.0;

    torus_grid() = default;
    torus_grid(int dim, int modes, double frac = 2.0 / 3.0)
        : d(dim), n(modes), dealias_fraction(frac) {
        if (dim != 2 && dim != 3) fail(error_kind::config, "grid: d must be 2 or 3");
        if (modes < 8 || modes % 2 != 0) fail(error_kind::config, "grid: N must be even and >= 8");
        if (!(frac > 0.0) || frac > 1.0) fail(error_kind::config, "grid: dealias fraction in (0,1]");
    }

    std::size_t points() const {
        std::size_t p = 1;
        for (int i = 0; i < d; ++i) p *= static_cast<std::size_t>(n);
        return p;
    }
    double h() const { return 2.0 / n; }
    double volume() const { return (d == 2) ? 4.0 : 8.0; }
    double cell_measure() const { return volume() / static_cast<double>(points()); }

    // integer frequency of FFT index along one axis
    int freq(int idx) const { return (idx < n / 2) ? idx : idx - n; }

    // Largest retained integer frequency per axis. Modes with any |m_j| above
    // this are zeroed; when dealias_fraction*N/2 lands exactly on an integer
    // the boundary mode is dropped too, which keeps quadratic products
    // alias-free on the retained band (exact discrete skew-symmetry of the
    // convective term depends on it).
    int kept_max() const {
        double cut = dealias_fraction * n / 2.0;
        int k = static_cast<int>(cut);
        if (static_cast<double>(k) >= cut) k -= 1;
        return k;
    }

    // decode flat index into integer frequencies m[0..d)
    void decode(std::size_t idx, int* m) const {
        std::size_t rem = idx;
        for (int a = d - 1; a >= 0; --a) {
            m[a] = freq(static_cast<int>(rem % static_cast<std::size_t>(n)));
            rem /= static_cast<std::size_t>(n);
        }
    }

    std::size_t index_of(const int* m) const {
        std::size_t idx = 0;
        for (int a = 0; a < d; ++a) {
            int raw = m[a] >= 0 ? m[a] : m[a] + n;
            idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(raw);
        }
        return idx;
    }

    bool retained(const int* m) const {
        int kmax = kept_max();
        for (int a = 0; a < d; ++a)
            if (m[a] > kmax || m[a] < -kmax) return false;
        return true;
    }

    bool operator==(const torus_grid& o) const {
        return d == o.d && n == o.n && dealias_fraction == o.dealias_fraction;
    }
};

// FFTW-backed complex transforms on the grid (one scalar field at a time).
// Forward normalizes by 1/N^d so coefficients are true Fourier coefficients.
class fft_workspace {
  public:
    explicit fft_workspace(const torus_grid& grid);
    ~fft_workspace();
    fft_workspace(const fft_workspace&) = delete;
    fft_workspace& operator=(const fft_workspace&) = delete;

    const torus_grid& grid() const { return grid_; }

    // out-of-place; buffers must have grid.points() entries
    void forward(const std::complex<double>* x, std::complex<double>* k);
    void backward(const std::complex<double>* k, std::complex<double>* x);

    // convenience: physical real part of a spectral field
    void to_physical(const std::vector<std::complex<double>>& k, std::vector<double>& x);
    void to_spectral(const std::vector<double>& x, std::vector<std::complex<double>>& k);

  private:
    torus_grid grid_;
    void* plan_fwd_ = nullptr;
    void* plan_bwd_ = nullptr;
    std::vector<std::complex<double>> in_, out_;
};

} // namespace drheo

#endif
