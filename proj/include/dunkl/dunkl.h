#ifndef DUNKL_DUNKL_H
#define DUNKL_DUNKL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef DUNKL_BUILDING
#    define DUNKL_API __declspec(dllexport)
#  else
#    define DUNKL_API __declspec(dllimport)
#  endif
#else
#  define DUNKL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dunkl_status {
  DUNKL_OK = 0,
  DUNKL_ERR_INVALID_PARAMETER = 1,
  DUNKL_ERR_DOMAIN = 2,
  DUNKL_ERR_VALIDATION = 3,
  DUNKL_ERR_CONTRACT_VIOLATION = 4,
  DUNKL_ERR_CONVERGENCE = 5,
  DUNKL_ERR_CONFIGURATION = 6,
  DUNKL_ERR_SCHEMA = 7,
  DUNKL_ERR_IO = 8,
  DUNKL_ERR_PATH_FAILURE = 9,
  DUNKL_ERR_INTERNAL = 10
} dunkl_status;

typedef struct dunkl_root_system dunkl_root_system;
typedef struct dunkl_model dunkl_model;

typedef enum dunkl_variant { DUNKL_SEMI_IMPLICIT = 0, DUNKL_TRUNCATED = 1 } dunkl_variant;
typedef enum dunkl_eps_kind { DUNKL_EPS_FIXED = 0, DUNKL_EPS_SCALED = 1 } dunkl_eps_kind;

typedef struct dunkl_scheme {
  int variant;       /* dunkl_variant */
  int64_t n_steps;
  double horizon;
  int eps_kind;      /* dunkl_eps_kind */
  double eps_value;  /* eps, or c in eps = sqrt(c L_k dt) */
  double solver_tol;
  double initial_margin;
} dunkl_scheme;

/* Message of the last failed call on this thread; empty when none. */
DUNKL_API const char* dunkl_last_error(void);
DUNKL_API const char* dunkl_status_string(dunkl_status status);
DUNKL_API const char* dunkl_version(void);

/* Root systems. Handles are immutable and may be shared across threads. */
DUNKL_API dunkl_status dunkl_rs_bessel(double k, dunkl_root_system** out);
DUNKL_API dunkl_status dunkl_rs_type_a(int d, double k, dunkl_root_system** out);
DUNKL_API dunkl_status dunkl_rs_type_bcd(int d, double k, int r, dunkl_root_system** out);
/* roots: n_roots x dim row-major positive roots; mult: n_roots multiplicities. */
DUNKL_API dunkl_status dunkl_rs_custom(int dim, size_t n_roots, const double* roots, const double* mult,
                                       dunkl_root_system** out);
DUNKL_API dunkl_status dunkl_rs_from_json(const char* json, dunkl_root_system** out);
DUNKL_API void dunkl_rs_free(dunkl_root_system* rs);

DUNKL_API int dunkl_rs_dim(const dunkl_root_system* rs);
DUNKL_API size_t dunkl_rs_size(const dunkl_root_system* rs);
/* Copies the positive roots, n_roots x dim row-major. */
DUNKL_API dunkl_status dunkl_rs_roots(const dunkl_root_system* rs, double* out);
DUNKL_API dunkl_status dunkl_rs_constants(const dunkl_root_system* rs, double* gamma, double* lipschitz_scale);

DUNKL_API dunkl_status dunkl_reflect(const double* alpha, const double* x, int d, double* out);
DUNKL_API dunkl_status dunkl_rs_in_chamber(const dunkl_root_system* rs, const double* x, double margin, int* out);
DUNKL_API dunkl_status dunkl_rs_alternating_poly(const dunkl_root_system* rs, const double* x, double* out);
DUNKL_API dunkl_status dunkl_rs_harmonic_residual(const dunkl_root_system* rs, const double* x, double* out);

/* Drifts and per-step solvers. Vectors have length dunkl_rs_dim(rs). */
DUNKL_API dunkl_status dunkl_fk(const dunkl_root_system* rs, const double* x, double* out);
DUNKL_API dunkl_status dunkl_fk_eps(const dunkl_root_system* rs, const double* x, double eps, double* out);
DUNKL_API dunkl_status dunkl_g_eps(double x, double eps, double* out);
DUNKL_API dunkl_status dunkl_solve_exact(const dunkl_root_system* rs, const double* x, double h, double tol,
                                         double* y, int* iterations);
DUNKL_API dunkl_status dunkl_solve_truncated(const dunkl_root_system* rs, const double* x, double h, double eps,
                                             double tol, double* y, int* iterations);
DUNKL_API dunkl_status dunkl_iteration_error_bound(const dunkl_root_system* rs, double h, double eps, int n,
                                                   double* out);

/* Models. d <= 0 and r < 0 select the preset defaults; x0 may be NULL. */
DUNKL_API dunkl_status dunkl_model_preset(const char* name, int d, double k, int r, const double* x0,
                                          dunkl_model** out);
DUNKL_API dunkl_status dunkl_model_custom(const dunkl_root_system* rs, const double* x0, dunkl_model** out);
DUNKL_API void dunkl_model_free(dunkl_model* model);
DUNKL_API int dunkl_model_dim(const dunkl_model* model);
DUNKL_API dunkl_status dunkl_model_x0(const dunkl_model* model, double* out);

DUNKL_API void dunkl_scheme_default(dunkl_scheme* scheme);
/* increments: n_steps x d row-major; states: (n_steps + 1) x d row-major output. */
DUNKL_API dunkl_status dunkl_simulate(const dunkl_model* model, const dunkl_scheme* scheme, const double* increments,
                                      double* states);
/* Brownian increments of path `path_index`, n_steps x d row-major. */
DUNKL_API dunkl_status dunkl_brownian_increments(uint64_t seed, uint64_t path_index, int64_t n_steps, double horizon,
                                                 int d, double* out);

/* Runs a config file. command and output may be NULL; threads <= 0 uses every core.
   exit_code receives 0 ok, 1 check failed, 2 schema, 3 numeric precondition, 4 runtime;
   the diagnostic is available from dunkl_last_error(). */
DUNKL_API dunkl_status dunkl_run(const char* config_path, const char* command, const char* output, int threads,
                                 int has_seed, uint64_t seed, int* exit_code);

#ifdef __cplusplus
}
#endif

#endif
