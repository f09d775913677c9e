#include "drheo/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace drheo {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// L2 inner product of two spectral d-component fields via Parseval
double inner(const torus_grid& g, const cvector& a, const cvector& b) {
    double s = 0;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i)
        s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return g.volume() * s;
}

// Pointwise stress application with preallocated buffers; the isotropic fast
// path avoids per-point tensor objects, the wrap path reuses Eigen storage.
class stress_kernel {
  public:
    stress_kernel(const rheology_model& model, int d)
        : model_(model), d_(d), wrap_(model.kind() == rheology_kind::anisotropic_wrap ||
                                      model.kind() == rheology_kind::euler) {}

    // in/out are ncomp pointers into component-major arrays at a fixed point
    void apply(const double* din, double* sout, std::size_t idx, std::size_t npts) const {
        const int nc = d_ * (d_ + 1) / 2;
        if (!wrap_) {
            double r2 = 0;
            for (int i = 0; i < d_; ++i) {
                double dii = din[stress_field::pair_index(d_, i, i) * npts + idx];
                r2 += dii * dii;
            }
            for (int i = 0; i < d_; ++i)
                for (int j = i + 1; j < d_; ++j) {
                    double dij = din[stress_field::pair_index(d_, i, j) * npts + idx];
                    r2 += 2.0 * dij * dij;
                }
            double r = std::sqrt(r2);
            double scale = (r > 0.0) ? model_.f_prime(r) / r : 0.0;
            for (int c = 0; c < nc; ++c)
                sout[static_cast<std::size_t>(c) * npts + idx] =
                    scale * din[static_cast<std::size_t>(c) * npts + idx];
            return;
        }
        sym_tensor D(d_);
        for (int i = 0; i < d_; ++i)
            for (int j = i; j < d_; ++j)
                D.set(i, j, din[static_cast<std::size_t>(stress_field::pair_index(d_, i, j)) * npts + idx]);
        sym_tensor S = stress_from_D(model_, D);
        for (int i = 0; i < d_; ++i)
            for (int j = i; j < d_; ++j)
                sout[static_cast<std::size_t>(stress_field::pair_index(d_, i, j)) * npts + idx] = S(i, j);
    }

  private:
    const rheology_model& model_;
    int d_;
    bool wrap_;
};

void project_force(const torus_grid& g, cvector& f) {
    dealias_inplace(g, f, g.d);
    leray_inplace(g, f);
    hermitize_inplace(g, f, g.d);
}

} // namespace

basis_projection make_basis_projection(const torus_grid& grid, double k_cutoff) {
    double band = kPi * grid.n * grid.dealias_fraction / 2.0;
    if (k_cutoff > band)
        fail(error_kind::config, "basis projection cutoff exceeds the dealiased band");
    return basis_projection{grid, k_cutoff};
}

void basis_projection::apply(cvector& data) const {
    radial_cutoff_inplace(grid, data, grid.d, k_cutoff);
    dealias_inplace(grid, data, grid.d);
    leray_inplace(grid, data);
    hermitize_inplace(grid, data, grid.d);
}

std::vector<double> sym_gradient(const spectral_velocity& v, fft_workspace& fft) {
    const torus_grid& g = v.grid;
    const std::size_t npts = g.points();
    const int d = g.d;
    const int nc = d * (d + 1) / 2;
    std::vector<double> out(npts * static_cast<std::size_t>(nc));
    cvector spec(npts);
    std::vector<std::complex<double>> phys(npts);
    int m[3];
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            for (std::size_t idx = 0; idx < npts; ++idx) {
                g.decode(idx, m);
                std::complex<double> iki(0.0, kPi * m[i]);
                std::complex<double> ikj(0.0, kPi * m[j]);
                spec[idx] = 0.5 * (ikj * v.c[static_cast<std::size_t>(i) * npts + idx] +
                                   iki * v.c[static_cast<std::size_t>(j) * npts + idx]);
            }
            fft.backward(spec.data(), phys.data());
            double* dst = out.data() + static_cast<std::size_t>(stress_field::pair_index(d, i, j)) * npts;
            for (std::size_t idx = 0; idx < npts; ++idx) dst[idx] = phys[idx].real();
        }
    return out;
}

cvector convective_rhs(const spectral_velocity& v, fft_workspace& fft) {
    const torus_grid& g = v.grid;
    const std::size_t npts = g.points();
    const int d = g.d;
    std::vector<std::vector<double>> u(static_cast<std::size_t>(d));
    cvector spec(npts);
    for (int a = 0; a < d; ++a) {
        std::copy(v.comp(a), v.comp(a) + npts, spec.begin());
        fft.to_physical(spec, u[static_cast<std::size_t>(a)]);
    }
    // spectral divergence of v (x) v accumulated component pair by pair
    cvector rhs(npts * static_cast<std::size_t>(d), std::complex<double>(0.0));
    std::vector<double> prod(npts);
    cvector prod_spec(npts);
    int m[3];
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
            for (std::size_t idx = 0; idx < npts; ++idx)
                prod[idx] = u[static_cast<std::size_t>(a)][idx] * u[static_cast<std::size_t>(b)][idx];
            fft.to_spectral(prod, prod_spec);
            for (std::size_t idx = 0; idx < npts; ++idx) {
                g.decode(idx, m);
                std::complex<double> ika(0.0, kPi * m[a]);
                std::complex<double> ikb(0.0, kPi * m[b]);
                // rhs_a -= d_b (v_a v_b); symmetric pair contributes both ways
                rhs[static_cast<std::size_t>(a) * npts + idx] -= ikb * prod_spec[idx];
                if (b != a) rhs[static_cast<std::size_t>(b) * npts + idx] -= ika * prod_spec[idx];
            }
        }
    project_force(g, rhs);
    return rhs;
}

cvector viscous_rhs(const rheology_model& model, const spectral_velocity& v, fft_workspace& fft,
                    stress_field* stress_out) {
    model.require_validated();
    const torus_grid& g = v.grid;
    const std::size_t npts = g.points();
    const int d = g.d;
    const int nc = d * (d + 1) / 2;

    std::vector<double> D = sym_gradient(v, fft);
    std::vector<double> S(npts * static_cast<std::size_t>(nc));
    stress_kernel kern(model, d);
    for (std::size_t idx = 0; idx < npts; ++idx) kern.apply(D.data(), S.data(), idx, npts);

    cvector rhs(npts * static_cast<std::size_t>(d), std::complex<double>(0.0));
    cvector comp_spec(npts);
    std::vector<double> comp(npts);
    int m[3];
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            const double* src = S.data() + static_cast<std::size_t>(stress_field::pair_index(d, i, j)) * npts;
            std::copy(src, src + npts, comp.begin());
            fft.to_spectral(comp, comp_spec);
            for (std::size_t idx = 0; idx < npts; ++idx) {
                g.decode(idx, m);
                std::complex<double> iki(0.0, kPi * m[i]);
                std::complex<double> ikj(0.0, kPi * m[j]);
                // (div S)_i = d_j S_ij; off-diagonal feeds both rows
                rhs[static_cast<std::size_t>(i) * npts + idx] += ikj * comp_spec[idx];
                if (j != i) rhs[static_cast<std::size_t>(j) * npts + idx] += iki * comp_spec[idx];
            }
        }
    project_force(g, rhs);
    if (stress_out) {
        *stress_out = stress_field(g);
        stress_out->vals = std::move(S);
        stress_out->div_spec = rhs;
    }
    return rhs;
}

std::vector<double> integrating_factor_half(const torus_grid& grid, double mu0, double dt) {
    const std::size_t npts = grid.points();
    std::vector<double> e(npts, 1.0);
    if (mu0 <= 0.0) return e;
    int m[3];
    for (std::size_t idx = 0; idx < npts; ++idx) {
        grid.decode(idx, m);
        double k2 = 0;
        for (int a = 0; a < grid.d; ++a) k2 += kPi * m[a] * kPi * m[a];
        e[idx] = std::exp(-0.5 * mu0 * k2 * 0.5 * dt);
    }
    return e;
}

double max_speed(const spectral_velocity& v, fft_workspace& fft) {
    const std::size_t npts = v.grid.points();
    std::vector<std::vector<double>> u(static_cast<std::size_t>(v.grid.d));
    cvector spec(npts);
    for (int a = 0; a < v.grid.d; ++a) {
        std::copy(v.comp(a), v.comp(a) + npts, spec.begin());
        fft.to_physical(spec, u[static_cast<std::size_t>(a)]);
    }
    double worst = 0;
    for (std::size_t idx = 0; idx < npts; ++idx) {
        double s2 = 0;
        for (int a = 0; a < v.grid.d; ++a) s2 += u[static_cast<std::size_t>(a)][idx] * u[static_cast<std::size_t>(a)][idx];
        worst = std::max(worst, s2);
    }
    return std::sqrt(worst);
}

double cfl_limit(const rheology_model& model, const spectral_velocity& v, fft_workspace& fft,
                 double mu0) {
    model.require_validated();
    if (!v.finite()) fail(error_kind::domain, "cfl_limit: non-finite field");
    const double h = v.grid.h();
    const double c_adv = 0.5, c_visc = 0.25;

    double vinf = max_speed(v, fft);
    double bound = inf;
    if (vinf > 0.0) bound = c_adv * h / vinf;

    // nu_eff from the realized strain rates; degenerate p < 2 laws are
    // clamped away from the s -> 0 blow-up by a strain floor tied to the
    // rms rate (the blow-up sits where the stress itself vanishes)
    std::vector<double> D = sym_gradient(v, fft);
    const std::size_t npts = v.grid.points();
    const int d = v.grid.d;
    double smax = 0.0, srms = 0.0;
    for (std::size_t idx = 0; idx < npts; ++idx) {
        double r2 = 0;
        for (int i = 0; i < d; ++i) {
            double dii = D[static_cast<std::size_t>(stress_field::pair_index(d, i, i)) * npts + idx];
            r2 += dii * dii;
        }
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) {
                double dij = D[static_cast<std::size_t>(stress_field::pair_index(d, i, j)) * npts + idx];
                r2 += 2.0 * dij * dij;
            }
        smax = std::max(smax, r2);
        srms += r2;
    }
    smax = std::sqrt(smax);
    srms = std::sqrt(srms / static_cast<double>(npts));
    double s_floor = 1e-3 * srms + 1e-14;

    double nu_hi = model.effective_viscosity(smax, s_floor);
    double nu_lo = model.effective_viscosity(s_floor, s_floor);
    double nu_eff = std::max(nu_hi, nu_lo) - std::max(mu0, 0.0);
    if (nu_eff > 0.0) bound = std::min(bound, c_visc * h * h / nu_eff);
    return bound;
}

namespace {

struct rhs_eval {
    const rheology_model& model;
    fft_workspace& fft;
    const force_fn& force;
    double mu0; // integrating-factor part removed from the explicit remainder
    cvector force_buf;

    // rhs = conv + visc + P force (- mu0 Laplacian/2 when split off); the
    // reported int S:Dv keeps the full stress for the ledger
    void operator()(const spectral_velocity& u, double t, cvector& out, double& sd, double& wk) {
        out = convective_rhs(u, fft);
        cvector visc = viscous_rhs(model, u, fft);
        sd = -inner(u.grid, visc, u.c);
        wk = 0.0;
        const std::size_t n = out.size();
        for (std::size_t i = 0; i < n; ++i) out[i] += visc[i];
        if (mu0 > 0.0) {
            const torus_grid& g = u.grid;
            const std::size_t npts = g.points();
            int m[3];
            for (std::size_t idx = 0; idx < npts; ++idx) {
                g.decode(idx, m);
                double k2 = 0;
                for (int a = 0; a < g.d; ++a) k2 += kPi * m[a] * kPi * m[a];
                double lift = 0.5 * mu0 * k2;
                for (int a = 0; a < g.d; ++a)
                    out[static_cast<std::size_t>(a) * npts + idx] +=
                        lift * u.c[static_cast<std::size_t>(a) * npts + idx];
            }
        }
        if (force) {
            force(t, u.grid, fft, force_buf);
            project_force(u.grid, force_buf);
            wk = inner(u.grid, force_buf, u.c);
            for (std::size_t i = 0; i < n; ++i) out[i] += force_buf[i];
        }
    }
};

} // namespace

spectral_velocity step(const rheology_model& model, const spectral_velocity& v, double dt,
                       fft_workspace& fft, const force_fn& force, const step_options& opts,
                       step_stats* stats) {
    model.require_validated();
    if (!(dt > 0.0) || !std::isfinite(dt)) fail(error_kind::domain, "step: dt must be positive");
    if (!v.finite()) fail(error_kind::domain, "step: non-finite field");
    if (opts.check_cfl) {
        double bound = opts.cfl_bound >= 0.0 ? opts.cfl_bound : cfl_limit(model, v, fft, opts.mu0);
        if (dt > bound * (1.0 + 1e-12))
            fail(error_kind::stability,
                 "step: dt above stability limit, suggested dt <= " + std::to_string(bound));
    }

    const torus_grid& g = v.grid;
    const std::size_t n = v.c.size();
    const std::size_t npts = g.points();
    const bool use_if = opts.mu0 > 0.0;
    std::vector<double> ehalf_local;
    const std::vector<double>* ehalf = opts.if_exp_half;
    if (use_if && !ehalf) {
        ehalf_local = integrating_factor_half(g, opts.mu0, dt);
        ehalf = &ehalf_local;
    }

    auto scale_modes = [&](cvector& data, bool inverse) {
        if (!use_if) return;
        for (int a = 0; a < g.d; ++a)
            for (std::size_t idx = 0; idx < npts; ++idx) {
                double e = (*ehalf)[idx];
                data[static_cast<std::size_t>(a) * npts + idx] *= inverse ? 1.0 / e : e;
            }
    };

    rhs_eval rhs{model, fft, force, opts.mu0, {}};
    const double t0 = v.time;
    double sd[4], wk[4];

    // stage 1
    spectral_velocity u = v;
    cvector g1;
    rhs(u, t0, g1, sd[0], wk[0]);

    // stage 2: u2 = E (v + dt/2 g1)
    spectral_velocity u2(g);
    u2.time = t0 + 0.5 * dt;
    for (std::size_t i = 0; i < n; ++i) u2.c[i] = v.c[i] + 0.5 * dt * g1[i];
    scale_modes(u2.c, false);
    u2.project();
    cvector g2;
    rhs(u2, u2.time, g2, sd[1], wk[1]);
    scale_modes(g2, true); // back to w-space slope

    // stage 3: u3 = E v + dt/2 E g2  (w-space: w + dt/2 g2)
    spectral_velocity u3(g);
    u3.time = t0 + 0.5 * dt;
    for (std::size_t i = 0; i < n; ++i) u3.c[i] = v.c[i] + 0.5 * dt * g2[i];
    scale_modes(u3.c, false);
    u3.project();
    cvector g3;
    rhs(u3, u3.time, g3, sd[2], wk[2]);
    scale_modes(g3, true);

    // stage 4: u4 = E^2 (v + dt g3)
    spectral_velocity u4(g);
    u4.time = t0 + dt;
    for (std::size_t i = 0; i < n; ++i) u4.c[i] = v.c[i] + dt * g3[i];
    scale_modes(u4.c, false);
    scale_modes(u4.c, false);
    u4.project();
    cvector g4;
    rhs(u4, u4.time, g4, sd[3], wk[3]);
    scale_modes(g4, true);
    scale_modes(g4, true);

    spectral_velocity out(g);
    out.time = t0 + dt;
    for (std::size_t i = 0; i < n; ++i)
        out.c[i] = v.c[i] + dt / 6.0 * (g1[i] + 2.0 * g2[i] + 2.0 * g3[i] + g4[i]);
    scale_modes(out.c, false);
    scale_modes(out.c, false);
    out.project();

    if (!out.finite()) fail(error_kind::domain, "step: field became non-finite");
    if (stats) {
        stats->diss_sd = dt / 6.0 * (sd[0] + 2.0 * sd[1] + 2.0 * sd[2] + sd[3]);
        stats->work = dt / 6.0 * (wk[0] + 2.0 * wk[1] + 2.0 * wk[2] + wk[3]);
    }
    return out;
}

pressure_field recover_pressure(const rheology_model& model, const spectral_velocity& v,
                                fft_workspace& fft, const force_fn& force) {
    const torus_grid& g = v.grid;
    const std::size_t npts = g.points();
    const int d = g.d;

    // unprojected momentum right side: -div(v (x) v) + div S + f, dealiased
    cvector rhs(npts * static_cast<std::size_t>(d), std::complex<double>(0.0));
    {
        std::vector<std::vector<double>> u(static_cast<std::size_t>(d));
        cvector spec(npts);
        for (int a = 0; a < d; ++a) {
            std::copy(v.comp(a), v.comp(a) + npts, spec.begin());
            fft.to_physical(spec, u[static_cast<std::size_t>(a)]);
        }
        std::vector<double> prod(npts);
        cvector prod_spec(npts);
        int m[3];
        for (int a = 0; a < d; ++a)
            for (int b = a; b < d; ++b) {
                for (std::size_t idx = 0; idx < npts; ++idx)
                    prod[idx] = u[static_cast<std::size_t>(a)][idx] * u[static_cast<std::size_t>(b)][idx];
                fft.to_spectral(prod, prod_spec);
                for (std::size_t idx = 0; idx < npts; ++idx) {
                    g.decode(idx, m);
                    std::complex<double> ika(0.0, kPi * m[a]);
                    std::complex<double> ikb(0.0, kPi * m[b]);
                    rhs[static_cast<std::size_t>(a) * npts + idx] -= ikb * prod_spec[idx];
                    if (b != a) rhs[static_cast<std::size_t>(b) * npts + idx] -= ika * prod_spec[idx];
                }
            }
        std::vector<double> D = sym_gradient(v, fft);
        std::vector<double> S(npts * static_cast<std::size_t>(d * (d + 1) / 2));
        stress_kernel kern(model, d);
        for (std::size_t idx = 0; idx < npts; ++idx) kern.apply(D.data(), S.data(), idx, npts);
        std::vector<double> comp(npts);
        cvector comp_spec(npts);
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) {
                const double* src = S.data() + static_cast<std::size_t>(stress_field::pair_index(d, i, j)) * npts;
                std::copy(src, src + npts, comp.begin());
                fft.to_spectral(comp, comp_spec);
                for (std::size_t idx = 0; idx < npts; ++idx) {
                    g.decode(idx, m);
                    std::complex<double> iki(0.0, kPi * m[i]);
                    std::complex<double> ikj(0.0, kPi * m[j]);
                    rhs[static_cast<std::size_t>(i) * npts + idx] += ikj * comp_spec[idx];
                    if (j != i) rhs[static_cast<std::size_t>(j) * npts + idx] += iki * comp_spec[idx];
                }
            }
        if (force) {
            cvector f;
            force(v.time, g, fft, f);
            for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += f[i];
        }
        dealias_inplace(g, rhs, d);
    }

    pressure_field p(g);
    int m[3];
    for (std::size_t idx = 0; idx < npts; ++idx) {
        g.decode(idx, m);
        double k2 = 0;
        for (int a = 0; a < d; ++a) k2 += kPi * m[a] * kPi * m[a];
        if (k2 == 0.0) { p.coeffs[idx] = 0.0; continue; } // zero mean
        std::complex<double> kdotr = 0.0;
        for (int a = 0; a < d; ++a)
            kdotr += kPi * static_cast<double>(m[a]) * rhs[static_cast<std::size_t>(a) * npts + idx];
        p.coeffs[idx] = -std::complex<double>(0.0, 1.0) * kdotr / k2;
    }
    hermitize_inplace(g, p.coeffs, 1);
    return p;
}

spectral_velocity taylor_green(const torus_grid& grid, double amplitude) {
    spectral_velocity v(grid);
    const std::size_t npts = grid.points();
    fft_workspace fft(grid);
    std::vector<double> comp(npts);
    const double h = grid.h();
    cvector spec(npts);

    auto point = [&](std::size_t idx, int axis) {
        // row-major decoding of collocation index, x = -1 + j h
        std::size_t rem = idx;
        int coord[3] = {0, 0, 0};
        for (int a = grid.d - 1; a >= 0; --a) {
            coord[a] = static_cast<int>(rem % static_cast<std::size_t>(grid.n));
            rem /= static_cast<std::size_t>(grid.n);
        }
        return -1.0 + h * coord[axis];
    };

    for (int a = 0; a < grid.d; ++a) {
        for (std::size_t idx = 0; idx < npts; ++idx) {
            double x = point(idx, 0), y = point(idx, 1);
            double z = grid.d == 3 ? point(idx, 2) : 0.0;
            double val = 0.0;
            if (grid.d == 2) {
                if (a == 0) val = std::sin(kPi * x) * std::cos(kPi * y);
                else val = -std::cos(kPi * x) * std::sin(kPi * y);
            } else {
                if (a == 0) val = std::sin(kPi * x) * std::cos(kPi * y) * std::cos(kPi * z);
                else if (a == 1) val = -std::cos(kPi * x) * std::sin(kPi * y) * std::cos(kPi * z);
                else val = 0.0;
            }
            comp[idx] = amplitude * val;
        }
        fft.to_spectral(comp, spec);
        std::copy(spec.begin(), spec.end(), v.comp(a));
    }
    v.project();
    return v;
}

spectral_velocity random_smooth(const torus_grid& grid, std::uint64_t seed, double spectral_decay,
                                double kinetic_energy, int mode_cutoff) {
    spectral_velocity v(grid);
    const std::size_t npts = grid.points();
    std::uint64_t st = seed ? seed : 0x9e3779b9;
    int m[3], mm[3];
    for (std::size_t idx = 0; idx < npts; ++idx) {
        grid.decode(idx, m);
        bool zero = true, canonical = false, in_band = true;
        double m2 = 0;
        for (int a = 0; a < grid.d; ++a) {
            if (m[a] != 0) zero = false;
            if (std::abs(m[a]) > mode_cutoff) in_band = false;
            m2 += static_cast<double>(m[a]) * m[a];
        }
        // fill each Hermitian pair once, from the member whose first nonzero
        // frequency is positive
        for (int a = 0; a < grid.d; ++a) {
            if (m[a] > 0) { canonical = true; break; }
            if (m[a] < 0) break;
        }
        if (zero || !in_band || !canonical || !grid.retained(m)) continue;
        double amp = std::pow(m2, -0.5 * spectral_decay);
        for (int a = 0; a < grid.d; ++a) mm[a] = -m[a];
        std::size_t midx = grid.index_of(mm);
        for (int a = 0; a < grid.d; ++a) {
            std::complex<double> z(next_gaussian(st), next_gaussian(st));
            v.c[static_cast<std::size_t>(a) * npts + idx] = amp * z;
            v.c[static_cast<std::size_t>(a) * npts + midx] = amp * std::conj(z);
        }
    }
    v.project();
    double ke = v.kinetic_energy();
    if (ke > 0.0 && kinetic_energy > 0.0) {
        double s = std::sqrt(kinetic_energy / ke);
        for (auto& z : v.c) z *= s;
    }
    return v;
}

} // namespace drheo
