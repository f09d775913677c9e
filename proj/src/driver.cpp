#include "drheo/driver.hpp"

#include <cmath>

namespace drheo {

namespace {

void record_state(drive_result& out, const rheology_model& model, const spectral_velocity& v,
                  const force_fn& force, const drive_options& opts, fft_workspace& fft) {
    stress_field S;
    viscous_rhs(model, v, fft, &S);
    cvector fbuf;
    const cvector* fptr = nullptr;
    if (force) {
        force(v.time, v.grid, fft, fbuf);
        dealias_inplace(v.grid, fbuf, v.grid.d);
        leray_inplace(v.grid, fbuf);
        hermitize_inplace(v.grid, fbuf, v.grid.d);
        fptr = &fbuf;
    }
    out.ledger.record(model, v, S, fptr, fft);
    out.snapshots.push_back(v);
    if (opts.diag_coarse_n > 0)
        out.defects.push_back(estimate_tail_defect(v, opts.diag_coarse_n, fft));
}

} // namespace

drive_result drive(const rheology_model& model, const spectral_velocity& v0,
                   const drive_options& opts, const force_fn& force) {
    model.require_validated();
    drive_result out;
    fft_workspace fft(v0.grid);
    spectral_velocity v = v0;
    v.project();

    record_state(out, model, v, force, opts, fft);
    if (opts.t_final <= 0.0) return out;

    const bool time_aligned = opts.record_dt > 0.0;
    long n_intervals = 1;
    double rec_dt = opts.t_final;
    if (time_aligned) {
        n_intervals = std::max<long>(1, std::llround(opts.t_final / opts.record_dt));
        rec_dt = opts.t_final / static_cast<double>(n_intervals);
    }

    double cfl_bound = -1.0;
    int steps_since_cfl = 10; // force evaluation on the first step
    std::vector<double> ifh;
    double ifh_dt = -1.0;

    auto one_step = [&](double dt) {
        if (steps_since_cfl >= 10) {
            cfl_bound = cfl_limit(model, v, fft, opts.mu0);
            steps_since_cfl = 0;
        }
        step_options so;
        so.mu0 = opts.mu0;
        so.cfl_bound = cfl_bound;
        if (opts.mu0 > 0.0) {
            if (dt != ifh_dt) {
                ifh = integrating_factor_half(v.grid, opts.mu0, dt);
                ifh_dt = dt;
            }
            so.if_exp_half = &ifh;
        }
        step_stats stats;
        v = step(model, v, dt, fft, force, so, &stats);
        out.ledger.add_step_increment(stats);
        out.min_dt = std::min(out.min_dt, dt);
        ++out.steps;
        ++steps_since_cfl;
    };

    try {
        if (time_aligned) {
            for (long j = 0; j < n_intervals; ++j) {
                double t_target = (j + 1 < n_intervals) ? (j + 1) * rec_dt : opts.t_final;
                while (v.time < t_target - 1e-13) {
                    if (out.steps >= opts.max_steps)
                        fail(error_kind::stability, "step budget exhausted");
                    double remaining = t_target - v.time;
                    double dt_raw;
                    if (opts.fixed_dt > 0.0) {
                        dt_raw = opts.fixed_dt;
                    } else {
                        if (steps_since_cfl >= 10) {
                            cfl_bound = cfl_limit(model, v, fft, opts.mu0);
                            steps_since_cfl = 0;
                        }
                        dt_raw = 0.5 * cfl_bound;
                        if (!std::isfinite(dt_raw) || dt_raw <= 0.0) dt_raw = remaining;
                    }
                    long n_sub = std::max<long>(1, static_cast<long>(std::ceil(remaining / dt_raw - 1e-12)));
                    double dt = remaining / static_cast<double>(n_sub);
                    one_step(dt);
                }
                v.time = t_target; // kill accumulated round-off drift
                record_state(out, model, v, force, opts, fft);
            }
        } else {
            long since_record = 0;
            while (v.time < opts.t_final - 1e-13) {
                if (out.steps >= opts.max_steps)
                    fail(error_kind::stability, "step budget exhausted");
                double dt;
                if (opts.fixed_dt > 0.0) {
                    dt = std::min(opts.fixed_dt, opts.t_final - v.time);
                } else {
                    if (steps_since_cfl >= 10) {
                        cfl_bound = cfl_limit(model, v, fft, opts.mu0);
                        steps_since_cfl = 0;
                    }
                    double dt_raw = 0.5 * cfl_bound;
                    if (!std::isfinite(dt_raw) || dt_raw <= 0.0) dt_raw = opts.t_final - v.time;
                    dt = std::min(dt_raw, opts.t_final - v.time);
                }
                one_step(dt);
                if (++since_record >= opts.record_stride || v.time >= opts.t_final - 1e-13) {
                    if (v.time >= opts.t_final - 1e-13) v.time = opts.t_final;
                    record_state(out, model, v, force, opts, fft);
                    since_record = 0;
                }
            }
        }
    } catch (const error& e) {
        out.aborted = true;
        out.abort_reason = e.what();
        if (out.snapshots.empty() || out.snapshots.back().time < v.time) {
            if (v.finite()) out.snapshots.push_back(v); // last good state
        }
    }
    return out;
}

} // namespace drheo
