#ifndef DRHEO_FIELD_HPP
#define DRHEO_FIELD_HPP

#include <complex>
#include <vector>

#include "drheo/grid.hpp"
#include "drheo/sym_tensor.hpp"

namespace drheo {

using cvector = std::vector<std::complex<double>>;

// -- raw spectral helpers on component-major arrays (comp c at c*points+idx) --
void hermitize_inplace(const torus_grid& g, cvector& data, int ncomp);
void dealias_inplace(const torus_grid& g, cvector& data, int ncomp);
void leray_inplace(const torus_grid& g, cvector& data); // ncomp == d vector fields
// zero modes with |k| > k_cutoff (Euclidean radius in k units)
void radial_cutoff_inplace(const torus_grid& g, cvector& data, int ncomp, double k_cutoff);

// Divergence-free velocity field as truncated Fourier coefficients.
struct spectral_velocity {
    torus_grid grid;
    double time = 0.0;
    cvector c; // size d * points, component-major

    spectral_velocity() = default;
    explicit spectral_velocity(const torus_grid& g) : grid(g), c(g.points() * g.d) {}

    std::complex<double>* comp(int a) { return c.data() + static_cast<std::size_t>(a) * grid.points(); }
    const std::complex<double>* comp(int a) const {
        return c.data() + static_cast<std::size_t>(a) * grid.points();
    }

    void project();  // dealias + hermitize + Leray, idempotent
    void hermitize() { hermitize_inplace(grid, c, grid.d); }
    void dealias() { dealias_inplace(grid, c, grid.d); }
    void leray() { leray_inplace(grid, c); }

    bool finite() const;
    double kinetic_energy() const;        // (1/2) int |v|^2 via Parseval
    double divergence_max() const;        // max_k |k . c(k)|
    double coefficient_scale() const;     // max_k |k| |c(k)|, for relative checks
    double hermitian_defect() const;      // max |c(-k) - conj(c(k))|

    // spectral interpolation between resolutions (exact on the shared band)
    spectral_velocity resampled(const torus_grid& target) const;
};

// Pointwise viscous stress on the collocation grid plus its spectral divergence.
struct stress_field {
    torus_grid grid;
    int ncomp = 3; // d(d+1)/2
    std::vector<double> vals; // component-major collocation values
    cvector div_spec;         // d * points, Leray-projected divergence

    stress_field() = default;
    explicit stress_field(const torus_grid& g)
        : grid(g), ncomp(g.d * (g.d + 1) / 2), vals(g.points() * static_cast<std::size_t>(ncomp)) {}

    double* comp(int a) { return vals.data() + static_cast<std::size_t>(a) * grid.points(); }
    const double* comp(int a) const {
        return vals.data() + static_cast<std::size_t>(a) * grid.points();
    }

    sym_tensor at(std::size_t idx) const;
    void set(std::size_t idx, const sym_tensor& s);

    static int pair_index(int d, int i, int j); // upper-triangle component order
};

struct pressure_field {
    torus_grid grid;
    cvector coeffs; // scalar, zero mean

    pressure_field() = default;
    explicit pressure_field(const torus_grid& g) : grid(g), coeffs(g.points()) {}
};

// trapezoidal rule on the uniform grid = cell_measure * sum (spectrally
// accurate for periodic integrands)
inline double integrate(const torus_grid& g, const std::vector<double>& vals) {
    double s = 0;
    for (double v : vals) s += v;
    return s * g.cell_measure();
}

} // namespace drheo

#endif
