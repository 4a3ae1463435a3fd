#ifndef MDRF_MDRF_H
#define MDRF_MDRF_H

#include <stddef.h>
#include <stdint.h>

#if defined(MDRF_BUILDING_LIBRARY)
#define MDRF_API __attribute__((visibility("default")))
#else
#define MDRF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mdrf_status {
  MDRF_OK = 0,
  MDRF_INVALID_ARGUMENT = 1,
  MDRF_OUT_OF_RANGE = 2,
  MDRF_NUMERIC = 3,
  MDRF_CONFIG = 4,
  MDRF_IO = 5,
  MDRF_INTERNAL = 99
} mdrf_status;

typedef struct mdrf_innovation mdrf_innovation;
typedef struct mdrf_field mdrf_field;
typedef struct mdrf_model mdrf_model;

typedef enum mdrf_tail_form { MDRF_THEOREM_FORM = 0, MDRF_SADDLEPOINT_FORM = 1 } mdrf_tail_form;
typedef enum mdrf_regime { MDRF_FULL_RANGE = 0, MDRF_CUBE_ROOT_RANGE = 1, MDRF_OUT_OF_RANGE_REGIME = 2 } mdrf_regime;

typedef struct mdrf_tail {
  double value;
  double log_value;
  double correction_factor;
  double error_scale;
  double additive_bound;
  double x;
  double t;
  double z;
  double lambda_t;
  int regime;
} mdrf_tail;

typedef struct mdrf_saddle_point {
  double t;
  double z;
  double M_bar;
  double B_bar;
  double exponent;
  double lambda_t;
  int newton_iters;
} mdrf_saddle_point;

typedef struct mdrf_risk {
  double x_alpha;
  double Q;
  double es;
  double quadrature_error;
  double error_scale;
  int regime;
} mdrf_risk;

typedef struct mdrf_oracle {
  double p_hat;
  double std_err;
  double tilt_z;
  uint64_t n_samples;
} mdrf_oracle;

/* Message of the last failure on the calling thread; empty after success. */
MDRF_API const char* mdrf_last_error(void);
MDRF_API const char* mdrf_version(void);

/* keys/values are parallel arrays of length n_params. */
MDRF_API mdrf_status mdrf_innovation_create(const char* name, const char* const* keys, const double* values,
                                            size_t n_params, mdrf_innovation** out);
MDRF_API void mdrf_innovation_destroy(mdrf_innovation* h);
MDRF_API mdrf_status mdrf_innovation_info(const mdrf_innovation* h, double* H, double* C, double* variance);
MDRF_API mdrf_status mdrf_innovation_cumulant(const mdrf_innovation* h, int k, double* out);

MDRF_API mdrf_status mdrf_field_iid(int d, mdrf_field** out);
MDRF_API mdrf_status mdrf_field_short_memory(int d, int m_max, mdrf_field** out);
/* angular: 0 constant (b_value), 1 first cosine; slowly_varying: 0 constant, 1 log. */
MDRF_API mdrf_status mdrf_field_long_memory(int d, double alpha, int slowly_varying, int angular, double b_value,
                                            int m_max, mdrf_field** out);
MDRF_API mdrf_status mdrf_field_farima(double beta, const double* phi, size_t p, const double* theta, size_t q,
                                       int m_max, mdrf_field** out);
/* indices holds d ints per coefficient. */
MDRF_API mdrf_status mdrf_field_explicit(int d, const int* indices, const double* coeffs, size_t count,
                                         mdrf_field** out);
MDRF_API void mdrf_field_destroy(mdrf_field* h);
MDRF_API mdrf_status mdrf_field_m_max(const mdrf_field* h, int* out);

MDRF_API mdrf_status mdrf_model_window(const mdrf_field* field, const mdrf_innovation* innovation, int n,
                                       mdrf_model** out);
/* Weights b_j for explicit sites, d ints per site. */
MDRF_API mdrf_status mdrf_model_weights(const mdrf_innovation* innovation, int d, const int* sites,
                                        const double* b, size_t count, mdrf_model** out);
MDRF_API void mdrf_model_destroy(mdrf_model* h);
MDRF_API mdrf_status mdrf_model_info(const mdrf_model* h, double* B_n, double* M_n, double* H_n, double* C_n);

MDRF_API mdrf_status mdrf_solve_saddle(const mdrf_model* h, double x, double t_max, mdrf_saddle_point* out);
MDRF_API mdrf_status mdrf_tail_upper(const mdrf_model* h, double x, mdrf_tail_form form, double t_max,
                                     mdrf_tail* out);
MDRF_API mdrf_status mdrf_tail_lower(const mdrf_model* h, double x, mdrf_tail_form form, double t_max,
                                     mdrf_tail* out);
MDRF_API mdrf_status mdrf_quantile(const mdrf_model* h, double alpha, double t_max, mdrf_risk* out);
MDRF_API mdrf_status mdrf_expected_shortfall(const mdrf_model* h, double alpha, double t_max, mdrf_risk* out);
/* Upper-tail P(S_n > threshold). */
MDRF_API mdrf_status mdrf_tilted_is(const mdrf_model* h, double threshold, uint64_t n_samples, uint64_t seed,
                                    int threads, mdrf_oracle* out);
MDRF_API mdrf_status mdrf_plain_mc(const mdrf_model* h, double threshold, uint64_t n_samples, uint64_t seed,
                                   int threads, mdrf_oracle* out);

/* Runs one CLI subcommand. Returns the process exit status (0, 1 or 2);
   on failure the message is available from mdrf_last_error. */
MDRF_API int mdrf_run(const char* subcommand, const char* config_path, const char* out_dir, int has_seed,
                      uint64_t seed, int threads);
/* Null-terminated list of subcommand names. */
MDRF_API const char* const* mdrf_subcommands(void);

#ifdef __cplusplus
}
#endif

#endif
