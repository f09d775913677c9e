#include "drheo/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>

namespace drheo {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double frob_norm_at(const std::vector<double>& comps, int d, std::size_t npts, std::size_t idx) {
    double r2 = 0;
    for (int i = 0; i < d; ++i) {
        double dii = comps[static_cast<std::size_t>(stress_field::pair_index(d, i, i)) * npts + idx];
        r2 += dii * dii;
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            double dij = comps[static_cast<std::size_t>(stress_field::pair_index(d, i, j)) * npts + idx];
            r2 += 2.0 * dij * dij;
        }
    return std::sqrt(r2);
}

double contract_at(const std::vector<double>& a, const std::vector<double>& b, int d,
                   std::size_t npts, std::size_t idx) {
    double s = 0;
    for (int i = 0; i < d; ++i) {
        int c = stress_field::pair_index(d, i, i);
        s += a[static_cast<std::size_t>(c) * npts + idx] * b[static_cast<std::size_t>(c) * npts + idx];
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            int c = stress_field::pair_index(d, i, j);
            s += 2.0 * a[static_cast<std::size_t>(c) * npts + idx] * b[static_cast<std::size_t>(c) * npts + idx];
        }
    return s;
}

} // namespace

void energy_ledger::add_step_increment(const step_stats& s) {
    pend_sd_ += s.diss_sd;
    pend_work_ += s.work;
    has_pending_ = true;
}

void energy_ledger::record(const rheology_model& model, const spectral_velocity& v,
                           const stress_field& S, const cvector* force_spec,
                           fft_workspace& fft) {
    if (!rows_.empty() && v.time <= rows_.back().time)
        fail(error_kind::sequence, "ledger: record times must increase");
    if (!(v.grid == S.grid)) fail(error_kind::config, "ledger: v and S grids differ");

    const torus_grid& g = v.grid;
    const std::size_t npts = g.points();
    const int d = g.d;

    ledger_row row;
    row.time = v.time;
    row.kinetic = v.kinetic_energy();

    std::vector<double> D = sym_gradient(v, fft);
    const bool wrap = model.kind() == rheology_kind::anisotropic_wrap ||
                      model.kind() == rheology_kind::euler;
    double sumF = 0, sumFs = 0, sumSD = 0;
    for (std::size_t idx = 0; idx < npts; ++idx) {
        double sd = contract_at(S.vals, D, d, npts, idx);
        sumSD += sd;
        if (!wrap) {
            double r = frob_norm_at(D, d, npts, idx);
            double sn = frob_norm_at(S.vals, d, npts, idx);
            sumF += model.f_radial(r);
            sumFs += model.fstar_radial(sn);
        } else {
            sym_tensor Dt(d), St(d);
            for (int i = 0; i < d; ++i)
                for (int j = i; j < d; ++j) {
                    std::size_t c = static_cast<std::size_t>(stress_field::pair_index(d, i, j)) * npts + idx;
                    Dt.set(i, j, D[c]);
                    St.set(i, j, S.vals[c]);
                }
            sumF += eval_F(model, Dt);
            double fs = eval_F_star(model, St);
            sumFs += std::isfinite(fs) ? fs : 0.0; // wrap stress lies in dom F* by construction
        }
    }
    const double cm = g.cell_measure();
    row.diss_F = sumF * cm;
    row.diss_Fstar = sumFs * cm;
    row.diss_SD = sumSD * cm;
    row.gap = row.diss_F + row.diss_Fstar - row.diss_SD;

    if (force_spec) {
        double s = 0;
        for (std::size_t i = 0; i < v.c.size(); ++i)
            s += v.c[i].real() * (*force_spec)[i].real() + v.c[i].imag() * (*force_spec)[i].imag();
        row.work_rate = g.volume() * s;
    }

    if (!rows_.empty()) {
        const ledger_row& prev = rows_.back();
        double dt = row.time - prev.time;
        if (has_pending_) {
            cum_sd_ += pend_sd_;
            cum_work_ += pend_work_;
        } else {
            cum_sd_ += 0.5 * dt * (prev.diss_SD + row.diss_SD);
            cum_work_ += 0.5 * dt * (prev.work_rate + row.work_rate);
        }
        cum_gap_ += 0.5 * dt * (prev.gap + row.gap);
    }
    pend_sd_ = pend_work_ = 0;
    has_pending_ = false;

    row.cum_sd = cum_sd_;
    row.cum_work = cum_work_;
    row.cum_diss = cum_sd_ + cum_gap_;
    const double ke0 = rows_.empty() ? row.kinetic : rows_.front().kinetic;
    row.budget_residual = row.kinetic + cum_sd_ - ke0 - cum_work_;
    rows_.push_back(row);
}

bool energy_ledger::certificate_ok(double cert_tol_rel) const {
    if (rows_.empty()) return true;
    const double ke0 = rows_.front().kinetic;
    const double slack = cert_tol_rel * ke0;
    for (const auto& r : rows_)
        if (r.kinetic + r.cum_diss > ke0 + r.cum_work + slack) return false;
    return true;
}

double energy_ledger::certificate_worst_slack() const {
    if (rows_.empty()) return 0.0;
    const double ke0 = rows_.front().kinetic;
    double worst = inf;
    for (const auto& r : rows_)
        worst = std::min(worst, ke0 + r.cum_work - r.kinetic - r.cum_diss);
    return worst;
}

bool energy_ledger::gap_nonnegative_ok(double tol) const {
    for (const auto& r : rows_)
        if (r.gap < -tol * (1.0 + r.diss_F + r.diss_Fstar)) return false;
    return true;
}

double energy_ledger::max_gap() const {
    double m = 0;
    for (const auto& r : rows_) m = std::max(m, std::abs(r.gap));
    return m;
}

double energy_ledger::max_abs_budget_residual() const {
    double m = 0;
    for (const auto& r : rows_) m = std::max(m, std::abs(r.budget_residual));
    return m;
}

std::string energy_ledger::csv_string() const {
    std::string out = "time,kinetic,diss_F,diss_Fstar,diss_SD,gap,cum_diss,budget_residual\n";
    for (const auto& r : rows_) {
        out += fmt_double(r.time) + "," + fmt_double(r.kinetic) + "," + fmt_double(r.diss_F) +
               "," + fmt_double(r.diss_Fstar) + "," + fmt_double(r.diss_SD) + "," +
               fmt_double(r.gap) + "," + fmt_double(r.cum_diss) + "," +
               fmt_double(r.budget_residual) + "\n";
    }
    return out;
}

void energy_ledger::write_csv(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(error_kind::io, "cannot open " + path);
    f << csv_string();
}

// -- defect estimator ----------------------------------------------------------

defect_estimate estimate_defect(const spectral_velocity& v_fine, int coarse_n,
                                fft_workspace& fft) {
    const torus_grid& g = v_fine.grid;
    if (coarse_n < 1 || g.n % coarse_n != 0)
        fail(error_kind::config, "estimate_defect: coarse_N must divide N");
    const std::size_t npts = g.points();
    const int d = g.d;
    const int sub = g.n / coarse_n;

    std::vector<std::vector<double>> u(static_cast<std::size_t>(d));
    cvector spec(npts);
    for (int a = 0; a < d; ++a) {
        std::copy(v_fine.comp(a), v_fine.comp(a) + npts, spec.begin());
        fft.to_physical(spec, u[static_cast<std::size_t>(a)]);
    }

    std::size_t ncells = 1;
    for (int a = 0; a < d; ++a) ncells *= static_cast<std::size_t>(coarse_n);
    std::vector<double> mean(ncells * static_cast<std::size_t>(d), 0.0);
    std::vector<double> second(ncells * static_cast<std::size_t>(d * d), 0.0);

    auto cell_of = [&](std::size_t idx) {
        std::size_t rem = idx, cell = 0;
        int coord[3];
        for (int a = d - 1; a >= 0; --a) {
            coord[a] = static_cast<int>(rem % static_cast<std::size_t>(g.n));
            rem /= static_cast<std::size_t>(g.n);
        }
        for (int a = 0; a < d; ++a)
            cell = cell * static_cast<std::size_t>(coarse_n) + static_cast<std::size_t>(coord[a] / sub);
        return cell;
    };

    const double w = 1.0 / std::pow(static_cast<double>(sub), d); // points per cell
    for (std::size_t idx = 0; idx < npts; ++idx) {
        std::size_t cell = cell_of(idx);
        for (int a = 0; a < d; ++a)
            mean[cell * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)] +=
                w * u[static_cast<std::size_t>(a)][idx];
    }
    // centered second pass: algebraically the cell average of v (x) v minus
    // the tensor square of the cell mean, without the large-term cancellation
    for (std::size_t idx = 0; idx < npts; ++idx) {
        std::size_t cell = cell_of(idx);
        for (int a = 0; a < d; ++a) {
            double da = u[static_cast<std::size_t>(a)][idx] -
                        mean[cell * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)];
            for (int b = 0; b < d; ++b) {
                double db = u[static_cast<std::size_t>(b)][idx] -
                            mean[cell * static_cast<std::size_t>(d) + static_cast<std::size_t>(b)];
                second[cell * static_cast<std::size_t>(d * d) + static_cast<std::size_t>(a * d + b)] += w * da * db;
            }
        }
    }

    defect_estimate est;
    est.d = d;
    est.coarse_n = coarse_n;
    est.cells.resize(ncells, sym_tensor(d));
    const double cell_vol = g.volume() / static_cast<double>(ncells);
    double min_eig = inf, trace_tot = 0;
    for (std::size_t cidx = 0; cidx < ncells; ++cidx) {
        sym_tensor t(d);
        for (int a = 0; a < d; ++a)
            for (int b = a; b < d; ++b)
                t.set(a, b, second[cidx * static_cast<std::size_t>(d * d) + static_cast<std::size_t>(a * d + b)]);
        est.cells[cidx] = t;
        min_eig = std::min(min_eig, min_eigenvalue(t));
        trace_tot += t.trace() * cell_vol;
    }
    est.min_eigenvalue = std::isfinite(min_eig) ? min_eig : 0.0;
    est.trace_total = trace_tot;
    if (est.min_eigenvalue < -1e-10 * (1.0 + est.trace_total))
        fail(error_kind::domain, "defect estimator lost positive semidefiniteness");
    return est;
}

defect_estimate estimate_tail_defect(const spectral_velocity& v, int coarse_n,
                                     fft_workspace& fft) {
    if (coarse_n < 1 || v.grid.n % coarse_n != 0)
        fail(error_kind::config, "estimate_tail_defect: coarse_N must divide N");
    // band a coarse_n run would retain after dealiasing (same boundary rule
    // as torus_grid::kept_max)
    double cut = v.grid.dealias_fraction * coarse_n / 2.0;
    int band = static_cast<int>(cut);
    if (static_cast<double>(band) >= cut) band -= 1;
    spectral_velocity tail = v;
    const std::size_t npts = v.grid.points();
    int m[3];
    for (std::size_t idx = 0; idx < npts; ++idx) {
        v.grid.decode(idx, m);
        bool low = true;
        for (int a = 0; a < v.grid.d; ++a)
            if (std::abs(m[a]) > band) low = false;
        if (!low) continue;
        for (int a = 0; a < v.grid.d; ++a)
            tail.c[static_cast<std::size_t>(a) * npts + idx] = 0.0;
    }
    return estimate_defect(tail, coarse_n, fft);
}

std::string defect_estimate::csv_string() const {
    std::string out = d == 2 ? "cell_index,m11,m12,m22,min_eig\n"
                             : "cell_index,m11,m12,m13,m22,m23,m33,min_eig\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const sym_tensor& t = cells[i];
        out += std::to_string(i);
        for (int a = 0; a < d; ++a)
            for (int b = a; b < d; ++b) out += "," + fmt_double(t(a, b));
        out += "," + fmt_double(drheo::min_eigenvalue(t));
        out += "\n";
    }
    return out;
}

void defect_estimate::write_csv(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(error_kind::io, "cannot open " + path);
    f << csv_string();
}

// -- weak-form residuals ---------------------------------------------------------

namespace {

// integral over one coarse cell of e^{-i pi m x} along one axis, cell
// [x0, x0 + w]
std::complex<double> cell_phase_integral(int m, double x0, double w) {
    if (m == 0) return w;
    std::complex<double> ik(0.0, -kPi * m);
    return (std::exp(ik * (x0 + w)) - std::exp(ik * x0)) / ik;
}

} // namespace

weak_form_residual weak_residuals(const trajectory_view& traj, int cutoff, fft_workspace& fft) {
    if (!traj.snapshots || traj.snapshots->empty())
        fail(error_kind::io, "weak_residuals: missing snapshots");
    if (!traj.model) fail(error_kind::config, "weak_residuals: model required");
    const auto& snaps = *traj.snapshots;
    const torus_grid& g = snaps.front().grid;
    const std::size_t npts = g.points();
    const int d = g.d;

    // collect test modes 0 < |m|_inf <= cutoff inside the retained band, with
    // d-1 tangent directions each
    struct test_mode {
        int m[3];
        std::size_t idx;
        double e[2][3]; // tangent basis of k-perp
        int ne;
    };
    std::vector<test_mode> tests;
    int m[3];
    for (std::size_t idx = 0; idx < npts; ++idx) {
        g.decode(idx, m);
        bool zero = true, in_cut = true;
        for (int a = 0; a < d; ++a) {
            if (m[a] != 0) zero = false;
            if (std::abs(m[a]) > cutoff) in_cut = false;
        }
        if (zero || !in_cut || !g.retained(m)) continue;
        test_mode t;
        for (int a = 0; a < d; ++a) t.m[a] = m[a];
        t.idx = idx;
        double k[3] = {static_cast<double>(m[0]), static_cast<double>(m[1]),
                       d == 3 ? static_cast<double>(m[2]) : 0.0};
        double kn = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        if (d == 2) {
            t.ne = 1;
            t.e[0][0] = -k[1] / kn;
            t.e[0][1] = k[0] / kn;
            t.e[0][2] = 0;
        } else {
            // deterministic tangent pair
            double ref[3] = {1, 0, 0};
            if (std::abs(k[0]) >= std::abs(k[1]) && std::abs(k[0]) >= std::abs(k[2])) {
                ref[0] = 0;
                ref[1] = 1;
            }
            double e1[3] = {k[1] * ref[2] - k[2] * ref[1], k[2] * ref[0] - k[0] * ref[2],
                            k[0] * ref[1] - k[1] * ref[0]};
            double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
            double e2[3] = {k[1] * e1[2] - k[2] * e1[1], k[2] * e1[0] - k[0] * e1[2],
                            k[0] * e1[1] - k[1] * e1[0]};
            double n2 = std::sqrt(e2[0] * e2[0] + e2[1] * e2[1] + e2[2] * e2[2]);
            t.ne = 2;
            for (int a = 0; a < 3; ++a) {
                t.e[0][a] = e1[a] / n1;
                t.e[1][a] = e2[a] / n2;
            }
        }
        tests.push_back(t);
    }

    weak_form_residual res;
    res.test_cutoff = cutoff;

    // incompressibility: |k . v_hat(k)| against every scalar test mode
    for (const auto& s : snaps) {
        for (const auto& t : tests) {
            std::complex<double> kdot = 0;
            for (int a = 0; a < d; ++a)
                kdot += kPi * static_cast<double>(t.m[a]) * s.c[static_cast<std::size_t>(a) * npts + t.idx];
            res.incompressibility_residual =
                std::max(res.incompressibility_residual, g.volume() * std::abs(kdot));
        }
    }

    // momentum fluxes per snapshot: conv(k)_ij = (v x v)^(k), S(k)_ij
    const int nc = d * (d + 1) / 2;
    const std::size_t nt = tests.size();
    std::vector<std::vector<std::complex<double>>> flux(snaps.size());

    std::vector<std::vector<double>> u(static_cast<std::size_t>(d));
    std::vector<double> prod(npts);
    cvector spec(npts), prod_spec(npts);
    for (std::size_t si = 0; si < snaps.size(); ++si) {
        const spectral_velocity& v = snaps[si];
        for (int a = 0; a < d; ++a) {
            std::copy(v.comp(a), v.comp(a) + npts, spec.begin());
            fft.to_physical(spec, u[static_cast<std::size_t>(a)]);
        }
        // spectral coefficients of v (x) v and S at the test modes
        std::vector<std::complex<double>> conv_c(nt * static_cast<std::size_t>(nc));
        std::vector<std::complex<double>> stress_c(nt * static_cast<std::size_t>(nc));
        std::vector<double> D = sym_gradient(v, fft);
        std::vector<double> S(npts * static_cast<std::size_t>(nc));
        for (std::size_t idx = 0; idx < npts; ++idx) {
            sym_tensor Dt(d);
            for (int i = 0; i < d; ++i)
                for (int j = i; j < d; ++j)
                    Dt.set(i, j, D[static_cast<std::size_t>(stress_field::pair_index(d, i, j)) * npts + idx]);
            sym_tensor St = stress_from_D(*traj.model, Dt);
            for (int i = 0; i < d; ++i)
                for (int j = i; j < d; ++j)
                    S[static_cast<std::size_t>(stress_field::pair_index(d, i, j)) * npts + idx] = St(i, j);
        }
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) {
                int c = stress_field::pair_index(d, i, j);
                for (std::size_t idx = 0; idx < npts; ++idx)
                    prod[idx] = u[static_cast<std::size_t>(i)][idx] * u[static_cast<std::size_t>(j)][idx];
                fft.to_spectral(prod, prod_spec);
                for (std::size_t ti = 0; ti < nt; ++ti)
                    conv_c[ti * static_cast<std::size_t>(nc) + static_cast<std::size_t>(c)] = prod_spec[tests[ti].idx];
                const double* src = S.data() + static_cast<std::size_t>(c) * npts;
                std::copy(src, src + npts, prod.begin());
                fft.to_spectral(prod, prod_spec);
                for (std::size_t ti = 0; ti < nt; ++ti)
                    stress_c[ti * static_cast<std::size_t>(nc) + static_cast<std::size_t>(c)] = prod_spec[tests[ti].idx];
            }
        cvector fbuf;
        if (traj.force) traj.force(v.time, g, fft, fbuf);

        // Complex pairing against conj(phi) for phi = e E_k with
        // E_k = exp(i k.(x+1)); testing against Re phi and Im phi is
        // equivalent to this complex identity. grad conj(phi) carries -i k.
        flux[si].assign(nt * 2, std::complex<double>(0));
        for (std::size_t ti = 0; ti < nt; ++ti) {
            const test_mode& t = tests[ti];
            for (int ei = 0; ei < t.ne; ++ei) {
                std::complex<double> total = 0;
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) {
                        int c = stress_field::pair_index(d, i, j);
                        std::complex<double> wij = conv_c[ti * static_cast<std::size_t>(nc) + static_cast<std::size_t>(c)];
                        std::complex<double> sij = stress_c[ti * static_cast<std::size_t>(nc) + static_cast<std::size_t>(c)];
                        std::complex<double> mikj(0.0, -kPi * t.m[j]);
                        total += t.e[ei][i] * mikj * (wij - sij);
                    }
                if (traj.defects && si < traj.defects->size() && !(*traj.defects)[si].cells.empty()) {
                    const defect_estimate& de = (*traj.defects)[si];
                    // int grad phi : dR over piecewise-constant cells
                    const double w = 2.0 / de.coarse_n;
                    std::size_t ncells = de.cells.size();
                    for (std::size_t cidx = 0; cidx < ncells; ++cidx) {
                        // cell corner coordinates
                        std::size_t rem = cidx;
                        int cc[3] = {0, 0, 0};
                        for (int a = d - 1; a >= 0; --a) {
                            cc[a] = static_cast<int>(rem % static_cast<std::size_t>(de.coarse_n));
                            rem /= static_cast<std::size_t>(de.coarse_n);
                        }
                        std::complex<double> cellint(1.0, 0.0); // in x+1 coordinates
                        for (int a = 0; a < d; ++a)
                            cellint *= cell_phase_integral(t.m[a], cc[a] * w, w);
                        const sym_tensor& R = de.cells[cidx];
                        std::complex<double> gphiR = 0;
                        for (int i = 0; i < d; ++i)
                            for (int j = 0; j < d; ++j) {
                                std::complex<double> mikj(0.0, -kPi * t.m[j]);
                                gphiR += t.e[ei][i] * mikj * R(i, j);
                            }
                        // absolute integral; the common volume factor is
                        // applied once in the residual below
                        total += gphiR * cellint / g.volume();
                    }
                }
                if (!fbuf.empty()) {
                    std::complex<double> fphi = 0;
                    for (int a = 0; a < d; ++a)
                        fphi += t.e[ei][a] * fbuf[static_cast<std::size_t>(a) * npts + t.idx];
                    total += fphi;
                }
                flux[si][ti * 2 + static_cast<std::size_t>(ei)] = total;
            }
        }
    }

    // LHS(t) - LHS(0) vs trapezoid of the flux; all scaled by the volume
    for (std::size_t ti = 0; ti < nt; ++ti) {
        const test_mode& t = tests[ti];
        for (int ei = 0; ei < t.ne; ++ei) {
            std::complex<double> lhs0 = 0;
            for (int a = 0; a < d; ++a)
                lhs0 += t.e[ei][a] * snaps.front().c[static_cast<std::size_t>(a) * npts + t.idx];
            std::complex<double> acc = 0;
            for (std::size_t si = 1; si < snaps.size(); ++si) {
                double dt = snaps[si].time - snaps[si - 1].time;
                acc += 0.5 * dt *
                       (flux[si][ti * 2 + static_cast<std::size_t>(ei)] +
                        flux[si - 1][ti * 2 + static_cast<std::size_t>(ei)]);
                std::complex<double> lhs = 0;
                for (int a = 0; a < d; ++a)
                    lhs += t.e[ei][a] * snaps[si].c[static_cast<std::size_t>(a) * npts + t.idx];
                double resid = std::abs((lhs - lhs0 - acc)) * g.volume();
                res.momentum_residual = std::max(res.momentum_residual, resid);
            }
        }
    }
    return res;
}

regularity_verdict regularity_diagnostic(const energy_ledger& ledger,
                                         const std::vector<defect_estimate>& defect_series,
                                         double reg_tol) {
    regularity_verdict v;
    v.reg_tol = reg_tol;
    const double scale = 1.0 + ledger.initial_kinetic();
    v.budget_gap = ledger.max_abs_budget_residual() / scale;
    double tr = 0;
    for (const auto& de : defect_series) tr = std::max(tr, de.trace_total);
    v.defect_trace = tr / scale;
    v.strong_consistent = (v.budget_gap <= reg_tol) && (v.defect_trace <= reg_tol);
    return v;
}

} // namespace drheo
