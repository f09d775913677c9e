#include "drheo.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <string>

#include "drheo/experiments.hpp"
#include "drheo/snapshot.hpp"

namespace {

thread_local std::string g_last_error;

drheo_status status_of(const drheo::error& e) {
    switch (e.kind()) {
        case drheo::error_kind::config: return DRHEO_ERR_CONFIG;
        case drheo::error_kind::domain: return DRHEO_ERR_DOMAIN;
        case drheo::error_kind::stability: return DRHEO_ERR_STABILITY;
        case drheo::error_kind::sequence: return DRHEO_ERR_SEQUENCE;
        case drheo::error_kind::io: return DRHEO_ERR_IO;
    }
    return DRHEO_ERR_INTERNAL;
}

template <class Fn>
drheo_status guarded(Fn&& fn) {
    try {
        fn();
        return DRHEO_OK;
    } catch (const drheo::error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return DRHEO_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return DRHEO_ERR_INTERNAL;
    }
}

drheo_status invalid(const char* msg) {
    g_last_error = msg;
    return DRHEO_ERR_INVALID_ARGUMENT;
}

drheo::sym_tensor tensor_from(const double* m, int d) {
    drheo::sym_tensor t(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) t.set(i, j, 0.5 * (m[i * d + j] + m[j * d + i]));
    return t;
}

void copy_string(const std::string& s, char* buf, size_t buflen) {
    if (!buf || buflen == 0) return;
    size_t n = std::min(buflen - 1, s.size());
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
}

} // namespace

struct drheo_config {
    drheo::config cfg;
};

struct drheo_model {
    drheo::rheology_model model;
};

struct drheo_sim {
    drheo::config cfg;
    drheo::rheology_model model;
    drheo::torus_grid grid;
    drheo::spectral_velocity v;
    drheo::force_fn force;
    double mu0 = 0.0;
    double fixed_dt = 0.0;
    std::unique_ptr<drheo::fft_workspace> fft;
    drheo::energy_ledger ledger;

    explicit drheo_sim(const drheo::config& c)
        : cfg(c),
          model(c.make_model()),
          grid(drheo::grid_from_config(c)),
          v(drheo::initial_from_config(c, grid)),
          force(drheo::force_from_config(c, model)),
          mu0(drheo::mu0_from_config(c, model)),
          fft(std::make_unique<drheo::fft_workspace>(grid)) {
        std::string dt = c.get_string("time.dt", "auto");
        fixed_dt = (dt == "auto") ? 0.0 : c.require_double("time.dt");
        v.project();
        record();
    }

    void record() {
        drheo::stress_field S;
        drheo::viscous_rhs(model, v, *fft, &S);
        drheo::cvector fbuf;
        const drheo::cvector* fptr = nullptr;
        if (force) {
            force(v.time, grid, *fft, fbuf);
            drheo::dealias_inplace(grid, fbuf, grid.d);
            drheo::leray_inplace(grid, fbuf);
            drheo::hermitize_inplace(grid, fbuf, grid.d);
            fptr = &fbuf;
        }
        ledger.record(model, v, S, fptr, *fft);
    }

    void advance(double t_target) {
        int since_cfl = 10;
        double bound = -1.0;
        while (v.time < t_target - 1e-13) {
            if (since_cfl >= 10) {
                bound = drheo::cfl_limit(model, v, *fft, mu0);
                since_cfl = 0;
            }
            double dt_raw = fixed_dt > 0.0 ? fixed_dt : 0.5 * bound;
            if (!std::isfinite(dt_raw) || dt_raw <= 0.0) dt_raw = t_target - v.time;
            double dt = std::min(dt_raw, t_target - v.time);
            drheo::step_options so;
            so.mu0 = mu0;
            so.cfl_bound = bound;
            drheo::step_stats stats;
            v = drheo::step(model, v, dt, *fft, force, so, &stats);
            ledger.add_step_increment(stats);
            ++since_cfl;
        }
        v.time = t_target;
        record();
    }
};

extern "C" {

const char* drheo_version(void) { return "drheo 1.0.0"; }

const char* drheo_last_error(void) { return g_last_error.c_str(); }

drheo_status drheo_config_parse_file(const char* path, drheo_config** out) {
    if (!path || !out) return invalid("null argument");
    return guarded([&] { *out = new drheo_config{drheo::config::parse_file(path)}; });
}

drheo_status drheo_config_parse_string(const char* text, drheo_config** out) {
    if (!text || !out) return invalid("null argument");
    return guarded([&] { *out = new drheo_config{drheo::config::parse_string(text)}; });
}

drheo_status drheo_config_set(drheo_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) return invalid("null argument");
    return guarded([&] { cfg->cfg.set(key, value); });
}

drheo_status drheo_config_get(const drheo_config* cfg, const char* key, char* buf, size_t buflen) {
    if (!cfg || !key) return invalid("null argument");
    return guarded([&] {
        if (!cfg->cfg.has(key)) drheo::fail(drheo::error_kind::config, std::string("no such key: ") + key);
        copy_string(cfg->cfg.get_string(key), buf, buflen);
    });
}

void drheo_config_free(drheo_config* cfg) { delete cfg; }

drheo_status drheo_model_create(const drheo_config* cfg, drheo_model** out) {
    if (!cfg || !out) return invalid("null argument");
    return guarded([&] { *out = new drheo_model{cfg->cfg.make_model()}; });
}

void drheo_model_free(drheo_model* model) { delete model; }

drheo_status drheo_model_kind(const drheo_model* model, char* buf, size_t buflen) {
    if (!model) return invalid("null model");
    return guarded([&] { copy_string(drheo::to_string(model->model.kind()), buf, buflen); });
}

drheo_status drheo_model_eval_f(const drheo_model* model, const double* D, int d, double* out) {
    if (!model || !D || !out) return invalid("null argument");
    if (d != model->model.dim()) return invalid("dimension mismatch");
    return guarded([&] { *out = drheo::eval_F(model->model, tensor_from(D, d)); });
}

drheo_status drheo_model_eval_fstar(const drheo_model* model, const double* S, int d,
                                    double* out) {
    if (!model || !S || !out) return invalid("null argument");
    if (d != model->model.dim()) return invalid("dimension mismatch");
    return guarded([&] { *out = drheo::eval_F_star(model->model, tensor_from(S, d)); });
}

drheo_status drheo_model_stress(const drheo_model* model, const double* D, int d, double* S_out) {
    if (!model || !D || !S_out) return invalid("null argument");
    if (d != model->model.dim()) return invalid("dimension mismatch");
    return guarded([&] {
        drheo::sym_tensor S = drheo::stress_from_D(model->model, tensor_from(D, d));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) S_out[i * d + j] = S(i, j);
    });
}

drheo_status drheo_model_gap(const drheo_model* model, const double* S, const double* D, int d,
                             double* out) {
    if (!model || !S || !D || !out) return invalid("null argument");
    if (d != model->model.dim()) return invalid("dimension mismatch");
    return guarded([&] {
        *out = drheo::fenchel_young_gap(model->model, tensor_from(S, d), tensor_from(D, d));
    });
}

drheo_status drheo_model_asymptotic(const drheo_model* model, const double* D, int d, double s_max,
                                    double* out) {
    if (!model || !D || !out) return invalid("null argument");
    if (d != model->model.dim()) return invalid("dimension mismatch");
    return guarded([&] { *out = drheo::asymptotic_F(model->model, tensor_from(D, d), s_max); });
}

drheo_status drheo_model_validate_hypotheses(const drheo_model* model, int samples, uint64_t seed,
                                             drheo_hypothesis_report* out) {
    if (!model || !out) return invalid("null argument");
    return guarded([&] {
        drheo::hypothesis_report r = drheo::validate_hypotheses(model->model, samples, seed);
        out->fenchel_young_ok = r.fenchel_young_ok;
        for (int i = 0; i < 4; ++i) out->conjugate_slope[i] = r.conjugate_superlinear_slope_at[i];
        out->f_domain_full = r.f_domain_full;
        out->f_star_ball_radius = r.f_star_ball_radius;
        out->f_infinity_linear_bound = r.f_infinity_linear_bound;
        out->dd4_ok = r.dd4_ok;
        out->dd5_ok = r.dd5_ok;
        out->dd6_ok = r.dd6_ok;
        out->dd7_ok = r.dd7_ok;
        out->all_ok = r.all_ok;
    });
}

drheo_status drheo_sim_create(const drheo_config* cfg, drheo_sim** out) {
    if (!cfg || !out) return invalid("null argument");
    return guarded([&] { *out = new drheo_sim(cfg->cfg); });
}

void drheo_sim_free(drheo_sim* sim) { delete sim; }

drheo_status drheo_sim_advance(drheo_sim* sim, double t_target) {
    if (!sim) return invalid("null sim");
    if (!(t_target >= sim->v.time)) return invalid("t_target must not decrease");
    return guarded([&] { sim->advance(t_target); });
}

drheo_status drheo_sim_time(const drheo_sim* sim, double* out) {
    if (!sim || !out) return invalid("null argument");
    *out = sim->v.time;
    return DRHEO_OK;
}

drheo_status drheo_sim_kinetic_energy(const drheo_sim* sim, double* out) {
    if (!sim || !out) return invalid("null argument");
    *out = sim->v.kinetic_energy();
    return DRHEO_OK;
}

drheo_status drheo_sim_write_snapshot(const drheo_sim* sim, const char* path) {
    if (!sim || !path) return invalid("null argument");
    return guarded([&] { drheo::write_snapshot(sim->v, path); });
}

drheo_status drheo_sim_write_ledger(const drheo_sim* sim, const char* path) {
    if (!sim || !path) return invalid("null argument");
    return guarded([&] { sim->ledger.write_csv(path); });
}

drheo_status drheo_run_simulate(const drheo_config* cfg, const char* out_dir, int* cert_ok) {
    if (!cfg || !out_dir) return invalid("null argument");
    return guarded([&] {
        drheo::experiment_result r = drheo::run_simulate(cfg->cfg, out_dir);
        if (!r.ok) drheo::fail(drheo::error_kind::stability, r.message);
        if (cert_ok) *cert_ok = r.certificate_ok ? 1 : 0;
    });
}

drheo_status drheo_run_taylor_green(const drheo_config* cfg, const char* out_dir, int* cert_ok,
                                    double* max_rel_err) {
    if (!cfg || !out_dir) return invalid("null argument");
    return guarded([&] {
        drheo::experiment_result r = drheo::run_taylor_green(cfg->cfg, out_dir);
        if (!r.ok) drheo::fail(drheo::error_kind::stability, r.message);
        if (cert_ok) *cert_ok = r.certificate_ok ? 1 : 0;
        if (max_rel_err) *max_rel_err = r.max_rel_err;
    });
}

drheo_status drheo_run_verify_rheology(const drheo_config* cfg, const char* out_dir,
                                       int* cert_ok) {
    if (!cfg || !out_dir) return invalid("null argument");
    return guarded([&] {
        drheo::experiment_result r = drheo::run_verify_rheology(cfg->cfg, out_dir);
        if (cert_ok) *cert_ok = r.certificate_ok ? 1 : 0;
    });
}

drheo_status drheo_run_weak_strong(const drheo_config* cfg, const char* out_dir, int threads,
                                   int* cert_ok) {
    if (!cfg || !out_dir) return invalid("null argument");
    return guarded([&] {
        drheo::experiment_result r = drheo::run_weak_strong(cfg->cfg, out_dir, threads);
        if (!r.ok) drheo::fail(drheo::error_kind::stability, r.message);
        if (cert_ok) *cert_ok = r.certificate_ok ? 1 : 0;
    });
}

drheo_status drheo_run_conjugate_table(const drheo_config* cfg, const char* out_dir) {
    if (!cfg || !out_dir) return invalid("null argument");
    return guarded([&] { drheo::run_conjugate_table(cfg->cfg, out_dir); });
}

} // extern "C"
