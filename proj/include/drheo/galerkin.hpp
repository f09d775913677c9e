#ifndef DRHEO_GALERKIN_HPP
#define DRHEO_GALERKIN_HPP

#include <functional>
#include <optional>

#include "drheo/field.hpp"
#include "drheo/grid.hpp"
#include "drheo/rheology.hpp"

namespace drheo {

// Projection P^n: spectral cutoff at |k| <= k_cutoff composed with the Leray
// projection I - k (x) k / |k|^2. Idempotent.
struct basis_projection {
    torus_grid grid;
    double k_cutoff = 0.0;

    void apply(cvector& data) const; // d-component spectral field
    void apply(spectral_velocity& v) const { apply(v.c); }
};

basis_projection make_basis_projection(const torus_grid& grid, double k_cutoff);

// Collocation symmetric gradient D v = (grad v + grad^t v)/2, component-major
// in stress_field::pair_index order.
std::vector<double> sym_gradient(const spectral_velocity& v, fft_workspace& fft);

// Spectral force sampler; fills a raw (unprojected) d-component spectral force.
using force_fn =
    std::function<void(double t, const torus_grid& grid, fft_workspace& fft, cvector& out)>;

// -P div(v (x) v), pseudo-spectral with 2/3-rule dealiasing; discretely
// energy-neutral against v.
cvector convective_rhs(const spectral_velocity& v, fft_workspace& fft);

// P div S with S = stress_from_D(model, Dv) at each collocation point.
// Fills *stress_out (values + projected spectral divergence) when non-null.
cvector viscous_rhs(const rheology_model& model, const spectral_velocity& v, fft_workspace& fft,
                    stress_field* stress_out = nullptr);

struct step_options {
    double mu0 = 0.0;               // integrating-factor Newtonian floor
    bool check_cfl = true;          // verify dt against cfl_limit
    double cfl_bound = -1.0;        // cached bound; < 0 means recompute
    const std::vector<double>* if_exp_half = nullptr; // cached exp(lambda dt/2)
};

// Per-step quadrature of the energy-identity terms along the RK4 stages
// (Simpson weights), so the ledger residual tracks the integrator order.
struct step_stats {
    double diss_sd = 0.0; // int over the step of int S : Dv dx
    double work = 0.0;    // int over the step of int f . v dx
};

// Classical RK4 on the projected system, optionally with the mu0 Laplacian
// handled by an exact integrating factor. Projections applied per stage.
spectral_velocity step(const rheology_model& model, const spectral_velocity& v, double dt,
                       fft_workspace& fft, const force_fn& force = {},
                       const step_options& opts = {}, step_stats* stats = nullptr);

// dt <= min(c_adv h / |v|_inf, c_visc h^2 / nu_eff) with c_adv = 0.5,
// c_visc = 0.25, h = 2/N; +inf when unconstrained. mu0 is exempted from
// nu_eff under the integrating-factor split.
double cfl_limit(const rheology_model& model, const spectral_velocity& v, fft_workspace& fft,
                 double mu0 = 0.0);

// exp(-mu0 |k|^2 dt / 4) per mode, the half-step integrating factor
std::vector<double> integrating_factor_half(const torus_grid& grid, double mu0, double dt);

// Zero-mean pressure solving -|k|^2 Pi = i k . rhs for the unprojected
// momentum right side.
pressure_field recover_pressure(const rheology_model& model, const spectral_velocity& v,
                                fft_workspace& fft, const force_fn& force = {});

// -- initial data ------------------------------------------------------------

// d=2: A (sin pi x cos pi y, -cos pi x sin pi y); d=3 the classical vortex
// with the third component zero.
spectral_velocity taylor_green(const torus_grid& grid, double amplitude = 1.0);

// Divergence-free projected Gaussian coefficients with amplitude |m|^-decay
// on 1 <= |m|_inf <= mode_cutoff, rescaled to the requested kinetic energy.
spectral_velocity random_smooth(const torus_grid& grid, std::uint64_t seed, double spectral_decay,
                                double kinetic_energy, int mode_cutoff);

// pointwise |v| maximum (d inverse transforms)
double max_speed(const spectral_velocity& v, fft_workspace& fft);

} // namespace drheo

#endif
