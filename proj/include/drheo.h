/* drheo - pseudo-spectral solver and verification harness for implicitly
 * constituted incompressible fluids on the flat torus.
 *
 * C API: opaque handles, integer status codes, thread-local error text.
 * All functions return DRHEO_OK (0) on success.
 */
#ifndef DRHEO_H
#define DRHEO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DRHEO_API __declspec(dllexport)
#else
#define DRHEO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum drheo_status {
    DRHEO_OK = 0,
    DRHEO_ERR_CONFIG = 1,
    DRHEO_ERR_DOMAIN = 2,
    DRHEO_ERR_STABILITY = 3,
    DRHEO_ERR_SEQUENCE = 4,
    DRHEO_ERR_IO = 5,
    DRHEO_ERR_INVALID_ARGUMENT = 6,
    DRHEO_ERR_INTERNAL = 7
} drheo_status;

typedef struct drheo_config drheo_config;
typedef struct drheo_model drheo_model;
typedef struct drheo_sim drheo_sim;

DRHEO_API const char* drheo_version(void);

/* thread-local message describing the most recent failure */
DRHEO_API const char* drheo_last_error(void);

/* -- configuration: dotted-key `key = value` text ------------------------- */
DRHEO_API drheo_status drheo_config_parse_file(const char* path, drheo_config** out);
DRHEO_API drheo_status drheo_config_parse_string(const char* text, drheo_config** out);
DRHEO_API drheo_status drheo_config_set(drheo_config* cfg, const char* key, const char* value);
/* copies the value into buf (NUL terminated, truncated to buflen) */
DRHEO_API drheo_status drheo_config_get(const drheo_config* cfg, const char* key, char* buf,
                                        size_t buflen);
DRHEO_API void drheo_config_free(drheo_config* cfg);

/* -- rheology: convex dissipation potential F, conjugate, stress ----------- */
/* model built from the rheology.* block (and grid.d) of the configuration */
DRHEO_API drheo_status drheo_model_create(const drheo_config* cfg, drheo_model** out);
DRHEO_API void drheo_model_free(drheo_model* model);
DRHEO_API drheo_status drheo_model_kind(const drheo_model* model, char* buf, size_t buflen);

/* tensors passed as row-major d*d arrays; they must be symmetric */
DRHEO_API drheo_status drheo_model_eval_f(const drheo_model* model, const double* D, int d,
                                          double* out);
/* +infinity is a legitimate result (divergent conjugate), not an error */
DRHEO_API drheo_status drheo_model_eval_fstar(const drheo_model* model, const double* S, int d,
                                              double* out);
DRHEO_API drheo_status drheo_model_stress(const drheo_model* model, const double* D, int d,
                                          double* S_out);
DRHEO_API drheo_status drheo_model_gap(const drheo_model* model, const double* S, const double* D,
                                       int d, double* out);
DRHEO_API drheo_status drheo_model_asymptotic(const drheo_model* model, const double* D, int d,
                                              double s_max, double* out);

typedef struct drheo_hypothesis_report {
    int fenchel_young_ok;
    double conjugate_slope[4]; /* F*(S)/|S| at |S| = 10^k, k = 1..4 */
    int f_domain_full;
    double f_star_ball_radius;
    double f_infinity_linear_bound;
    int dd4_ok;
    int dd5_ok;
    int dd6_ok;
    int dd7_ok;
    int all_ok;
} drheo_hypothesis_report;

DRHEO_API drheo_status drheo_model_validate_hypotheses(const drheo_model* model, int samples,
                                                       uint64_t seed,
                                                       drheo_hypothesis_report* out);

/* -- simulation ------------------------------------------------------------ */
DRHEO_API drheo_status drheo_sim_create(const drheo_config* cfg, drheo_sim** out);
DRHEO_API void drheo_sim_free(drheo_sim* sim);
DRHEO_API drheo_status drheo_sim_advance(drheo_sim* sim, double t_target);
DRHEO_API drheo_status drheo_sim_time(const drheo_sim* sim, double* out);
DRHEO_API drheo_status drheo_sim_kinetic_energy(const drheo_sim* sim, double* out);
DRHEO_API drheo_status drheo_sim_write_snapshot(const drheo_sim* sim, const char* path);
DRHEO_API drheo_status drheo_sim_write_ledger(const drheo_sim* sim, const char* path);

/* -- experiments ------------------------------------------------------------ */
/* cert_ok (when non-NULL) reports whether every certificate the experiment
 * asserts held; a false value maps to CLI exit code 2, not to an error. */
DRHEO_API drheo_status drheo_run_simulate(const drheo_config* cfg, const char* out_dir,
                                          int* cert_ok);
DRHEO_API drheo_status drheo_run_taylor_green(const drheo_config* cfg, const char* out_dir,
                                              int* cert_ok, double* max_rel_err);
DRHEO_API drheo_status drheo_run_verify_rheology(const drheo_config* cfg, const char* out_dir,
                                                 int* cert_ok);
DRHEO_API drheo_status drheo_run_weak_strong(const drheo_config* cfg, const char* out_dir,
                                             int threads, int* cert_ok);
DRHEO_API drheo_status drheo_run_conjugate_table(const drheo_config* cfg, const char* out_dir);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DRHEO_H */
