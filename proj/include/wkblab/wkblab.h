/* C interface to wkblab. Every function returns a wkb_status; on failure
 * wkb_last_error() and wkb_last_error_kind() describe the most recent error
 * on the calling thread. Handles are opaque and freed by their *_free
 * function; strings returned through char** are freed with wkb_free_string.
 * Traits are addressed by 0-based index. */
#ifndef WKBLAB_H
#define WKBLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define WKB_API __declspec(dllexport)
#else
#define WKB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wkb_status {
  WKB_OK = 0,
  WKB_ERR_INVALID_ARGUMENT = 1,
  WKB_ERR_SCHEMA = 2,
  WKB_ERR_IO = 3,
  WKB_ERR_HYPOTHESIS = 4, /* scenario violates a standing assumption */
  WKB_ERR_NUMERICAL = 5,
  WKB_ERR_INTERNAL = 6
} wkb_status;

typedef struct wkb_config wkb_config;
typedef struct wkb_trajectory wkb_trajectory;
typedef struct wkb_hj wkb_hj;
typedef struct wkb_dp wkb_dp;
typedef struct wkb_pde wkb_pde;

WKB_API const char* wkb_version(void);
WKB_API const char* wkb_last_error(void);
/* Name of the library error code ("NonHyperbolic", "SchemaError", ...), or "" */
WKB_API const char* wkb_last_error_kind(void);
WKB_API void wkb_free_string(char* s);

/* ---- configuration ---- */
WKB_API wkb_status wkb_config_load(const char* path, wkb_config** out);
WKB_API wkb_status wkb_config_load_text(const char* text, wkb_config** out);
WKB_API void wkb_config_free(wkb_config* cfg);
WKB_API wkb_status wkb_config_serialize(const wkb_config* cfg, char** out);
WKB_API wkb_status wkb_config_id(const wkb_config* cfg, const char** out);
WKB_API int wkb_config_has_scenario(const wkb_config* cfg);
WKB_API int wkb_config_has_pde(const wkb_config* cfg);
WKB_API wkb_status wkb_config_trait_count(const wkb_config* cfg, size_t* out);
WKB_API wkb_status wkb_config_trait_label(const wkb_config* cfg, size_t i, const char** out);
WKB_API wkb_status wkb_config_trait_index(const wkb_config* cfg, const char* label, size_t* out);

typedef struct wkb_run_params {
  size_t n_eps;
  const double* eps; /* strictly decreasing */
  double t_max;
  double dt_out;
  uint64_t seed;
  double dt; /* DP step */
} wkb_run_params;

/* The eps pointer stays valid until the next set_run or free. */
WKB_API wkb_status wkb_config_get_run(const wkb_config* cfg, wkb_run_params* out);
WKB_API wkb_status wkb_config_set_run(wkb_config* cfg, const wkb_run_params* run);

/* Standing-assumption checks; *passed is 1 or 0, *report lists failures. */
WKB_API wkb_status wkb_validate(const wkb_config* cfg, int* passed, char** report);

/* ---- finite-trait ODE ---- */
WKB_API wkb_status wkb_simulate_finite(const wkb_config* cfg, double eps, double t_max,
                                       double dt_out, wkb_trajectory** out);
WKB_API void wkb_trajectory_free(wkb_trajectory* tr);
WKB_API wkb_status wkb_trajectory_size(const wkb_trajectory* tr, size_t* times, size_t* traits);
WKB_API wkb_status wkb_trajectory_get(const wkb_trajectory* tr, size_t k, size_t i, double* t,
                                      double* u, double* w);
WKB_API wkb_status wkb_trajectory_write_csv(const wkb_trajectory* tr, const wkb_config* cfg,
                                            const char* path);
WKB_API wkb_status wkb_check_mass_bounds(const wkb_trajectory* tr, const wkb_config* cfg,
                                         int* passed, double* min_margin);

/* ---- Hamilton-Jacobi ---- */
WKB_API wkb_status wkb_evolve_hj(const wkb_config* cfg, double t_max, wkb_hj** out);
WKB_API void wkb_hj_free(wkb_hj* hj);
WKB_API wkb_status wkb_hj_value(const wkb_hj* hj, double t, size_t i, double* out);
WKB_API wkb_status wkb_hj_event_count(const wkb_hj* hj, size_t* out);
/* kind: 0 zero-set change, 1 active-set change */
WKB_API wkb_status wkb_hj_event(const wkb_hj* hj, size_t k, double* time, int* kind);
WKB_API wkb_status wkb_hj_write_breakpoints_csv(const wkb_hj* hj, const wkb_config* cfg,
                                                const char* path);
WKB_API wkb_status wkb_hj_write_values_csv(const wkb_hj* hj, const wkb_config* cfg,
                                           double dt_out, const char* path);
WKB_API wkb_status wkb_check_structure(const wkb_hj* hj, const wkb_config* cfg, int* passed,
                                       char** report);

/* ---- dynamic programming ---- */
WKB_API wkb_status wkb_dp_solve(const wkb_config* cfg, double t_max, double dt, wkb_dp** out);
WKB_API void wkb_dp_free(wkb_dp* dp);
WKB_API wkb_status wkb_dp_steps(const wkb_dp* dp, size_t* steps, double* dt);
WKB_API wkb_status wkb_dp_value(const wkb_dp* dp, size_t k, size_t i, double* out);
WKB_API wkb_status wkb_dp_write_csv(const wkb_dp* dp, const wkb_config* cfg, const char* path);
WKB_API wkb_status wkb_dp_write_path_csv(const wkb_dp* dp, const wkb_config* cfg, double t,
                                         size_t i, const char* path);

/* ---- equilibria ---- */
/* One row per nonempty subsystem; *passed is 1 when every subsystem satisfies
 * the equilibrium hypothesis. */
WKB_API wkb_status wkb_equilibria_write_csv(const wkb_config* cfg, const char* path, int* passed);

/* ---- Monte Carlo ---- */
/* ode_ref receives the ODE value u(t, i) used to close the resource schedule. */
WKB_API wkb_status wkb_fk_estimate(const wkb_config* cfg, double eps, double t, size_t i,
                                   size_t n, uint64_t seed, double* estimate, double* std_error,
                                   double* ode_ref);
/* Path: start state, n_jumps (<= 2) jump times and target states, horizon. */
WKB_API wkb_status wkb_ldp_point_check(const wkb_config* cfg, size_t start, size_t n_jumps,
                                       const double* jump_times, const size_t* jump_states,
                                       double horizon, double delta, size_t n_eps,
                                       const double* eps, double* eps_log_p);
WKB_API wkb_status wkb_jump_tail(const wkb_config* cfg, double eps, double t, size_t i0,
                                 size_t n_jumps, size_t n_samples, uint64_t seed, double* bound,
                                 double* sampled);

/* ---- continuous-trait PDE (uses the config's pde section) ---- */
typedef struct wkb_pde_params {
  double eps;
  double t_max;
  double L;
  double dx;
  double dt;
  double dt_out;
} wkb_pde_params;

WKB_API wkb_status wkb_config_get_pde(const wkb_config* cfg, wkb_pde_params* out);
WKB_API wkb_status wkb_simulate_pde(const wkb_config* cfg, const wkb_pde_params* params,
                                    wkb_pde** out);
WKB_API void wkb_pde_free(wkb_pde* pde);
WKB_API wkb_status wkb_pde_write_csv(const wkb_pde* pde, const char* snapshots_path,
                                     const char* diagnostics_path);
WKB_API wkb_status wkb_pde_check_resource_bounds(const wkb_pde* pde, int* passed, double* min_margin);
/* Largest and smallest max_x w over snapshots with t >= t_from. */
WKB_API wkb_status wkb_pde_max_w_range(const wkb_pde* pde, double t_from, double* lo, double* hi);

/* ---- convergence study ---- */
/* Writes the per-eps CSV to csv_path (if non-NULL). *passed is 1 when every
 * check holds, 0 when a check fails and -1 when a run raised an error (the
 * error is recorded in its CSV row and in the summary). */
WKB_API wkb_status wkb_run_study(const wkb_config* cfg, const char* csv_path, int* passed,
                                 char** summary);

#ifdef __cplusplus
}
#endif

#endif /* WKBLAB_H */
