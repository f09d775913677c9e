#include "drheo/relative_energy.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

namespace drheo {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

bool times_match(double a, double b) { return std::abs(a - b) <= 1e-11 * (1.0 + std::abs(a)); }

// collocation coordinates of a flat index
void point_of(const torus_grid& g, std::size_t idx, double* x) {
    std::size_t rem = idx;
    int coord[3] = {0, 0, 0};
    for (int a = g.d - 1; a >= 0; --a) {
        coord[a] = static_cast<int>(rem % static_cast<std::size_t>(g.n));
        rem /= static_cast<std::size_t>(g.n);
    }
    for (int a = 0; a < g.d; ++a) x[a] = -1.0 + g.h() * coord[a];
}

} // namespace

// -- reference_solution --------------------------------------------------------

reference_solution reference_solution::manufactured(const rheology_model& model, double amp,
                                                    double omega) {
    model.require_validated();
    if (model.dim() != 2)
        fail(error_kind::config, "manufactured reference is two-dimensional");
    if (model.kind() == rheology_kind::anisotropic_wrap || model.kind() == rheology_kind::euler)
        fail(error_kind::config, "manufactured reference needs an isotropic law");
    if (!std::isfinite(model.mu_of(0.0)))
        fail(error_kind::config, "manufactured reference needs a smooth law at zero strain");
    reference_solution r;
    r.source_ = source_kind::manufactured;
    r.model_ = model;
    r.amp_ = amp;
    r.omega_ = omega;
    return r;
}

reference_solution reference_solution::fine_run(const rheology_model& model,
                                                std::vector<spectral_velocity> snapshots,
                                                const force_fn& force) {
    if (snapshots.empty()) fail(error_kind::io, "fine_run reference needs snapshots");
    reference_solution r;
    r.source_ = source_kind::fine_run;
    r.model_ = model;
    r.snaps_ = std::move(snapshots);
    r.ext_force_ = force;
    return r;
}

double reference_solution::amplitude(double t) const {
    return amp_ * (0.8 + 0.2 * std::cos(omega_ * t));
}

double reference_solution::amplitude_rate(double t) const {
    return -0.2 * amp_ * omega_ * std::sin(omega_ * t);
}

const spectral_velocity& reference_solution::snapshot_at(double t) const {
    for (const auto& s : snaps_)
        if (times_match(s.time, t)) return s;
    fail(error_kind::sequence, "reference snapshot for t = " + std::to_string(t) + " missing");
}

force_fn reference_solution::force() const {
    if (source_ == source_kind::fine_run) return ext_force_;
    // Closed-form forcing that makes the amplitude law exact:
    //   f = a' e_tg - pi a (g_x, -g_y) Phi,   g = cos(pi x) cos(pi y),
    // where Phi = mu(s) + s mu'(s) evaluated at s = |D U| = sqrt(2) pi |a g|
    // (the strain-rate norm squared is exactly 2 pi^2 a^2 g^2).
    rheology_model model = model_;
    double amp = amp_, omega = omega_;
    return [model, amp, omega](double t, const torus_grid& g, fft_workspace& fft, cvector& out) {
        if (g.d != 2) fail(error_kind::config, "manufactured force is two-dimensional");
        const std::size_t npts = g.points();
        const double a = amp * (0.8 + 0.2 * std::cos(omega * t));
        const double ap = -0.2 * amp * omega * std::sin(omega * t);
        out.assign(npts * 2, std::complex<double>(0.0));
        std::vector<double> f(npts);
        cvector spec(npts);
        double x[3];
        for (int c = 0; c < 2; ++c) {
            for (std::size_t idx = 0; idx < npts; ++idx) {
                point_of(g, idx, x);
                double sx = std::sin(kPi * x[0]), cx = std::cos(kPi * x[0]);
                double sy = std::sin(kPi * x[1]), cy = std::cos(kPi * x[1]);
                double gg = cx * cy;
                double gx = -kPi * sx * cy, gy = -kPi * cx * sy;
                double s = std::sqrt(2.0) * kPi * std::abs(a * gg);
                double phi = model.mu_of(s) + s * model.dmu_ds(s);
                f[idx] = (c == 0) ? ap * sx * cy - kPi * a * gx * phi
                                  : -ap * cx * sy + kPi * a * gy * phi;
            }
            fft.to_spectral(f, spec);
            std::copy(spec.begin(), spec.end(), out.begin() + static_cast<std::size_t>(c) * npts);
        }
    };
}

spectral_velocity reference_solution::velocity_at(double t, const torus_grid& g,
                                                  fft_workspace& fft) const {
    if (source_ == source_kind::fine_run) {
        const spectral_velocity& s = snapshot_at(t);
        if (s.grid == g) return s;
        return s.resampled(g);
    }
    spectral_velocity v(g);
    v.time = t;
    const std::size_t npts = g.points();
    const double a = amplitude(t);
    std::vector<double> comp(npts);
    cvector spec(npts);
    double x[3];
    for (int c = 0; c < 2; ++c) {
        for (std::size_t idx = 0; idx < npts; ++idx) {
            point_of(g, idx, x);
            comp[idx] = (c == 0) ? a * std::sin(kPi * x[0]) * std::cos(kPi * x[1])
                                 : -a * std::cos(kPi * x[0]) * std::sin(kPi * x[1]);
        }
        fft.to_spectral(comp, spec);
        std::copy(spec.begin(), spec.end(), v.c.begin() + static_cast<std::size_t>(c) * npts);
    }
    v.project();
    v.time = t;
    return v;
}

cvector reference_solution::time_derivative_at(double t, const torus_grid& g,
                                               fft_workspace& fft) const {
    if (source_ == source_kind::manufactured) {
        spectral_velocity v = velocity_at(t, g, fft);
        double a = amplitude(t);
        double scale = (a != 0.0) ? amplitude_rate(t) / a : 0.0;
        cvector out = v.c;
        for (auto& z : out) z *= scale;
        return out;
    }
    const spectral_velocity& s = snapshot_at(t);
    spectral_velocity u = (s.grid == g) ? s : s.resampled(g);
    cvector rhs = convective_rhs(u, fft);
    cvector visc = viscous_rhs(model_, u, fft);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += visc[i];
    if (ext_force_) {
        cvector f;
        ext_force_(t, g, fft, f);
        dealias_inplace(g, f, g.d);
        leray_inplace(g, f);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += f[i];
    }
    return rhs;
}

// -- relative energy -------------------------------------------------------------

double relative_energy(const spectral_velocity& v, const defect_estimate* defect,
                       const spectral_velocity& U) {
    if (!times_match(v.time, U.time))
        fail(error_kind::sequence, "relative_energy: misaligned times");
    spectral_velocity vv = (v.grid == U.grid) ? v : v.resampled(U.grid);
    double s = 0;
    for (std::size_t i = 0; i < vv.c.size(); ++i) s += std::norm(vv.c[i] - U.c[i]);
    double e = 0.5 * U.grid.volume() * s;
    if (defect) e += 0.5 * defect->trace_total;
    return e;
}

std::string relative_energy_report::csv_string() const {
    std::string out = "time,E,gronwall_envelope,slack_r2,conv_block\n";
    for (const auto& r : rows)
        out += fmt_double(r.time) + "," + fmt_double(r.E) + "," + fmt_double(r.envelope) + "," +
               fmt_double(r.slack) + "," + fmt_double(r.conv_block) + "\n";
    return out;
}

void relative_energy_report::write_csv(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(error_kind::io, "cannot open " + path);
    f << csv_string();
}

relative_energy_report verify_r2(const std::vector<spectral_velocity>& coarse,
                                 const rheology_model& model, const reference_solution& ref,
                                 const torus_grid& analysis_grid, const r2_options& opts) {
    if (coarse.empty()) fail(error_kind::io, "verify_r2: empty trajectory");
    model.require_validated();
    fft_workspace fft(analysis_grid);
    const torus_grid& G = analysis_grid;
    const std::size_t npts = G.points();
    const int d = G.d;
    const int nc = d * (d + 1) / 2;
    const double cm = G.cell_measure();

    relative_energy_report rep;
    rep.rtol = opts.rtol;

    double cum_cvx = 0, cum_fy = 0, cum_quad = 0, cum_rate = 0;
    double prev_cvx = 0, prev_fy = 0, prev_quad = 0, prev_rate = 0, prev_t = 0;
    double e0 = 0;

    cvector spec(npts);
    std::vector<std::complex<double>> phys(npts);

    for (std::size_t si = 0; si < coarse.size(); ++si) {
        const spectral_velocity& vc = coarse[si];
        const double t = vc.time;
        spectral_velocity v = (vc.grid == G) ? vc : vc.resampled(G);
        v.time = t;
        spectral_velocity U = ref.velocity_at(t, G, fft);

        const defect_estimate* de =
            (opts.defects && si < opts.defects->size()) ? &(*opts.defects)[si] : nullptr;
        double E = relative_energy(v, de, U);

        // strain rates and stresses of both fields on the analysis grid
        std::vector<double> Dv = sym_gradient(v, fft);
        std::vector<double> DU = sym_gradient(U, fft);
        auto stress_of = [&](const std::vector<double>& D, const rheology_model& mod,
                             std::vector<double>& S) {
            S.resize(npts * static_cast<std::size_t>(nc));
            sym_tensor Dt(d);
            for (std::size_t idx = 0; idx < npts; ++idx) {
                for (int i = 0; i < d; ++i)
                    for (int j = i; j < d; ++j)
                        Dt.set(i, j, D[static_cast<std::size_t>(stress_field::pair_index(d, i, j)) * npts + idx]);
                sym_tensor St = stress_from_D(mod, Dt);
                for (int i = 0; i < d; ++i)
                    for (int j = i; j < d; ++j)
                        S[static_cast<std::size_t>(stress_field::pair_index(d, i, j)) * npts + idx] = St(i, j);
            }
        };
        std::vector<double> S, Shat;
        stress_of(Dv, model, S);
        stress_of(DU, ref.model(), Shat);

        // full gradient of U and pointwise v - U for the quadratic term
        std::vector<std::vector<double>> gradU(static_cast<std::size_t>(d * d));
        int m[3];
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                for (std::size_t idx = 0; idx < npts; ++idx) {
                    G.decode(idx, m);
                    spec[idx] = std::complex<double>(0.0, kPi * m[j]) *
                                U.c[static_cast<std::size_t>(i) * npts + idx];
                }
                fft.backward(spec.data(), phys.data());
                auto& dst = gradU[static_cast<std::size_t>(i * d + j)];
                dst.resize(npts);
                for (std::size_t idx = 0; idx < npts; ++idx) dst[idx] = phys[idx].real();
            }
        std::vector<std::vector<double>> wdiff(static_cast<std::size_t>(d));
        for (int a = 0; a < d; ++a) {
            for (std::size_t idx = 0; idx < npts; ++idx)
                spec[idx] = v.c[static_cast<std::size_t>(a) * npts + idx] -
                            U.c[static_cast<std::size_t>(a) * npts + idx];
            fft.backward(spec.data(), phys.data());
            auto& dst = wdiff[static_cast<std::size_t>(a)];
            dst.resize(npts);
            for (std::size_t idx = 0; idx < npts; ++idx) dst[idx] = phys[idx].real();
        }

        auto tensor_at = [&](const std::vector<double>& A, std::size_t idx) {
            sym_tensor T(d);
            for (int i = 0; i < d; ++i)
                for (int j = i; j < d; ++j)
                    T.set(i, j, A[static_cast<std::size_t>(stress_field::pair_index(d, i, j)) * npts + idx]);
            return T;
        };

        double cvx_rate = 0, fy_rate = 0, quad_rate = 0, ginf = 0;
        double cvx_min = 0;
        for (std::size_t idx = 0; idx < npts; ++idx) {
            sym_tensor Dvt = tensor_at(Dv, idx), DUt = tensor_at(DU, idx);
            sym_tensor St = tensor_at(S, idx), Sht = tensor_at(Shat, idx);
            double f_v = eval_F(model, Dvt);
            double f_u = eval_F(model, DUt);
            double fs = eval_F_star(model, St);
            sym_tensor diff = Dvt - DUt;
            double cvx = f_v - frob_dot(Sht, diff) - f_u;
            double fy = f_u + fs - frob_dot(St, DUt);
            cvx_rate += cvx;
            fy_rate += fy;
            double scale = 1.0 + std::abs(f_v) + std::abs(f_u) + std::abs(frob_dot(Sht, diff));
            cvx_min = std::min(cvx_min, cvx / scale);

            double q = 0, g2 = 0;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    double gu = gradU[static_cast<std::size_t>(i * d + j)][idx];
                    q += wdiff[static_cast<std::size_t>(i)][idx] * wdiff[static_cast<std::size_t>(j)][idx] * gu;
                    g2 += gu * gu;
                }
            quad_rate += q;
            ginf = std::max(ginf, g2);
        }
        cvx_rate *= cm;
        fy_rate *= cm;
        quad_rate *= cm;
        ginf = std::sqrt(ginf);
        if (cvx_min < -1e-8) rep.convexity_ok = false;

        double rate = 2.0 * ginf;
        if (opts.gronwall_stress_term) {
            // stress-Lipschitz allowance: local slope of the radial law at
            // the reference strain
            double smax = 0;
            for (std::size_t idx = 0; idx < npts; ++idx) {
                sym_tensor DUt = tensor_at(DU, idx);
                smax = std::max(smax, frob_norm(DUt));
            }
            if (ref.model().kind() != rheology_kind::anisotropic_wrap &&
                ref.model().kind() != rheology_kind::euler)
                rate += ref.model().f_second(smax);
        }

        if (si == 0) {
            e0 = E;
            rep.ke0 = U.kinetic_energy();
            prev_t = t;
            prev_cvx = cvx_rate;
            prev_fy = fy_rate;
            prev_quad = quad_rate;
            prev_rate = rate;
        } else {
            double dt = t - prev_t;
            if (dt <= 0) fail(error_kind::sequence, "verify_r2: times must increase");
            cum_cvx += 0.5 * dt * (prev_cvx + cvx_rate);
            cum_fy += 0.5 * dt * (prev_fy + fy_rate);
            cum_quad += 0.5 * dt * (prev_quad + quad_rate);
            cum_rate += 0.5 * dt * (prev_rate + rate);
            prev_t = t;
            prev_cvx = cvx_rate;
            prev_fy = fy_rate;
            prev_quad = quad_rate;
            prev_rate = rate;
        }

        r2_row row;
        row.time = t;
        row.E = E;
        row.conv_block = cum_cvx;
        row.fy_block = cum_fy;
        row.quad = cum_quad;
        row.grad_inf = ginf;
        // stress-centered inequality: E(t) - E(0) + CVX + FY <= -QUAD
        row.slack = -cum_quad - (E - e0) - cum_cvx - cum_fy;
        row.envelope = (e0 + opts.rtol * rep.ke0) * std::exp(cum_rate);
        rep.rows.push_back(row);

        rep.sup_E = std::max(rep.sup_E, E);
        if (row.slack < -opts.rtol * (1.0 + rep.ke0)) rep.bound_ok = false;
        if (E > row.envelope * (1.0 + 1e-10) + 1e-300) rep.envelope_ok = false;
    }
    return rep;
}

// -- weak-strong experiment -----------------------------------------------------

weak_strong_result weak_strong_experiment(const weak_strong_config& cfg) {
    auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    weak_strong_result out;
    out.n_list = cfg.coarse_n;

    torus_grid ref_grid(cfg.d, cfg.reference_n, cfg.dealias_fraction);
    spectral_velocity seed_field =
        random_smooth(ref_grid, cfg.seed, cfg.spectral_decay, cfg.initial_ke, cfg.mode_cutoff);

    drive_options dro;
    dro.t_final = cfg.t_final;
    dro.record_dt = cfg.record_dt;
    dro.mu0 = cfg.mu0;

    // member runs, coarse first, reference last
    std::vector<torus_grid> grids;
    for (int n : cfg.coarse_n) grids.emplace_back(cfg.d, n, cfg.dealias_fraction);
    grids.push_back(ref_grid);

    std::vector<drive_result> runs(grids.size());
    auto run_one = [&](std::size_t i) {
        spectral_velocity v0 = seed_field.resampled(grids[i]);
        runs[i] = drive(cfg.model, v0, dro, {});
    };
    int threads = std::max(1, cfg.threads);
    if (threads <= 1) {
        for (std::size_t i = 0; i < grids.size(); ++i) {
            if (elapsed() > cfg.wallclock_cap_s) { out.partial = true; break; }
            run_one(i);
        }
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t mine = next.fetch_add(1);
                    if (mine >= grids.size()) return;
                    run_one(mine);
                }
            });
        for (auto& th : pool) th.join();
        if (elapsed() > cfg.wallclock_cap_s) out.partial = true;
    }

    if (out.partial && runs.back().snapshots.empty()) {
        out.verdict = "partial";
        out.wallclock_s = elapsed();
        return out;
    }

    const drive_result& ref_run = runs.back();
    reference_solution ref = reference_solution::fine_run(cfg.model, ref_run.snapshots, {});

    r2_options ro;
    ro.rtol = cfg.rtol_r2;
    ro.gronwall_stress_term = cfg.gronwall_stress_term;

    bool env_all = true;
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
        if (runs[i].aborted) { out.partial = true; continue; }
        relative_energy_report rep = verify_r2(runs[i].snapshots, cfg.model, ref, ref_grid, ro);
        env_all = env_all && rep.envelope_ok;
        out.sup_E.push_back(rep.sup_E);
        out.reports.push_back(std::move(rep));
    }
    for (auto& r : runs) out.ledgers.push_back(std::move(r.ledger));

    out.envelope_all = env_all;
    out.monotone = true;
    out.min_ratio = inf;
    for (std::size_t i = 0; i + 1 < out.sup_E.size(); ++i) {
        if (!(out.sup_E[i + 1] < out.sup_E[i])) out.monotone = false;
        double denom = std::max(out.sup_E[i + 1], 1e-300);
        out.min_ratio = std::min(out.min_ratio, out.sup_E[i] / denom);
    }
    if (out.sup_E.size() < 2) out.min_ratio = 0.0;
    out.verdict = (out.monotone && out.envelope_all && !out.partial) ? "weak-strong-consistent"
                                                                     : "inconclusive";
    out.wallclock_s = elapsed();
    return out;
}

} // namespace drheo
