#include "drheo/field.hpp"

#include <algorithm>
#include <cmath>

namespace drheo {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

void hermitize_inplace(const torus_grid& g, cvector& data, int ncomp) {
    const std::size_t npts = g.points();
    int m[3], mm[3];
    for (int c = 0; c < ncomp; ++c) {
        std::complex<double>* f = data.data() + static_cast<std::size_t>(c) * npts;
        for (std::size_t idx = 0; idx < npts; ++idx) {
            g.decode(idx, m);
            bool nyquist = false;
            for (int a = 0; a < g.d; ++a) {
                mm[a] = -m[a];
                if (m[a] == -g.n / 2) nyquist = true; // unpaired mode, zeroed
            }
            if (nyquist) {
                f[idx] = 0.0;
                continue;
            }
            std::size_t midx = g.index_of(mm);
            if (midx == idx) {
                f[idx] = f[idx].real();
            } else if (idx < midx) {
                std::complex<double> avg = 0.5 * (f[idx] + std::conj(f[midx]));
                f[idx] = avg;
                f[midx] = std::conj(avg);
            }
        }
    }
}

void dealias_inplace(const torus_grid& g, cvector& data, int ncomp) {
    const std::size_t npts = g.points();
    int m[3];
    for (std::size_t idx = 0; idx < npts; ++idx) {
        g.decode(idx, m);
        if (g.retained(m)) continue;
        for (int c = 0; c < ncomp; ++c) data[static_cast<std::size_t>(c) * npts + idx] = 0.0;
    }
}

void leray_inplace(const torus_grid& g, cvector& data) {
    const std::size_t npts = g.points();
    const int d = g.d;
    int m[3];
    for (std::size_t idx = 0; idx < npts; ++idx) {
        g.decode(idx, m);
        double k2 = 0;
        for (int a = 0; a < d; ++a) k2 += static_cast<double>(m[a]) * m[a];
        if (k2 == 0.0) continue; // mean mode untouched
        std::complex<double> kdot = 0.0;
        for (int a = 0; a < d; ++a) kdot += static_cast<double>(m[a]) * data[static_cast<std::size_t>(a) * npts + idx];
        kdot /= k2; // pi factors cancel in k (k.c) / |k|^2
        for (int a = 0; a < d; ++a)
            data[static_cast<std::size_t>(a) * npts + idx] -= static_cast<double>(m[a]) * kdot;
    }
}

void radial_cutoff_inplace(const torus_grid& g, cvector& data, int ncomp, double k_cutoff) {
    const std::size_t npts = g.points();
    const double c2 = (k_cutoff / kPi) * (k_cutoff / kPi);
    int m[3];
    for (std::size_t idx = 0; idx < npts; ++idx) {
        g.decode(idx, m);
        double m2 = 0;
        for (int a = 0; a < g.d; ++a) m2 += static_cast<double>(m[a]) * m[a];
        if (m2 <= c2 + 1e-12) continue;
        for (int c = 0; c < ncomp; ++c) data[static_cast<std::size_t>(c) * npts + idx] = 0.0;
    }
}

void spectral_velocity::project() {
    dealias();
    hermitize();
    leray();
}

bool spectral_velocity::finite() const {
    for (const auto& z : c)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

double spectral_velocity::kinetic_energy() const {
    double s = 0;
    for (const auto& z : c) s += std::norm(z);
    return 0.5 * grid.volume() * s;
}

double spectral_velocity::divergence_max() const {
    const std::size_t npts = grid.points();
    int m[3];
    double worst = 0;
    for (std::size_t idx = 0; idx < npts; ++idx) {
        grid.decode(idx, m);
        std::complex<double> kdot = 0.0;
        for (int a = 0; a < grid.d; ++a)
            kdot += kPi * static_cast<double>(m[a]) * c[static_cast<std::size_t>(a) * npts + idx];
        worst = std::max(worst, std::abs(kdot));
    }
    return worst;
}

double spectral_velocity::coefficient_scale() const {
    const std::size_t npts = grid.points();
    int m[3];
    double worst = 0;
    for (std::size_t idx = 0; idx < npts; ++idx) {
        grid.decode(idx, m);
        double km = 0;
        for (int a = 0; a < grid.d; ++a) km += static_cast<double>(m[a]) * m[a];
        km = kPi * std::sqrt(km);
        double amp = 0;
        for (int a = 0; a < grid.d; ++a) amp = std::max(amp, std::abs(c[static_cast<std::size_t>(a) * npts + idx]));
        worst = std::max(worst, km * amp);
    }
    return worst;
}

double spectral_velocity::hermitian_defect() const {
    const std::size_t npts = grid.points();
    int m[3], mm[3];
    double worst = 0;
    for (std::size_t idx = 0; idx < npts; ++idx) {
        grid.decode(idx, m);
        bool nyquist = false;
        for (int a = 0; a < grid.d; ++a) {
            mm[a] = -m[a];
            if (m[a] == -grid.n / 2) nyquist = true;
        }
        if (nyquist) continue;
        std::size_t midx = grid.index_of(mm);
        for (int a = 0; a < grid.d; ++a) {
            std::complex<double> za = c[static_cast<std::size_t>(a) * npts + idx];
            std::complex<double> zb = c[static_cast<std::size_t>(a) * npts + midx];
            worst = std::max(worst, std::abs(za - std::conj(zb)));
        }
    }
    return worst;
}

spectral_velocity spectral_velocity::resampled(const torus_grid& target) const {
    if (target.d != grid.d) fail(error_kind::config, "resample: dimension mismatch");
    spectral_velocity out(target);
    out.time = time;
    const std::size_t src_pts = grid.points();
    const std::size_t dst_pts = target.points();
    const int half_src = grid.n / 2, half_dst = target.n / 2;
    int m[3];
    for (std::size_t idx = 0; idx < src_pts; ++idx) {
        grid.decode(idx, m);
        bool fits = true;
        for (int a = 0; a < grid.d; ++a)
            if (m[a] >= half_dst || m[a] < -half_dst || m[a] == -half_src) fits = false;
        if (!fits) continue;
        std::size_t didx = target.index_of(m);
        for (int a = 0; a < grid.d; ++a)
            out.c[static_cast<std::size_t>(a) * dst_pts + didx] = c[static_cast<std::size_t>(a) * src_pts + idx];
    }
    out.dealias();
    return out;
}

int stress_field::pair_index(int d, int i, int j) {
    if (i > j) std::swap(i, j);
    if (d == 2) {
        // (0,0), (0,1), (1,1)
        return i == 0 ? j : 2;
    }
    // (0,0), (0,1), (0,2), (1,1), (1,2), (2,2)
    static const int map3[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    return map3[i][j];
}

sym_tensor stress_field::at(std::size_t idx) const {
    sym_tensor s(grid.d);
    for (int i = 0; i < grid.d; ++i)
        for (int j = i; j < grid.d; ++j)
            s.set(i, j, vals[static_cast<std::size_t>(pair_index(grid.d, i, j)) * grid.points() + idx]);
    return s;
}

void stress_field::set(std::size_t idx, const sym_tensor& s) {
    for (int i = 0; i < grid.d; ++i)
        for (int j = i; j < grid.d; ++j)
            vals[static_cast<std::size_t>(pair_index(grid.d, i, j)) * grid.points() + idx] = s(i, j);
}

} // namespace drheo
