/* Copyright 2026 The relaxbm Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to relaxbm. Every function returns a relaxbm_status; on failure
 * relaxbm_last_error() describes the problem (per thread). Output pointers are
 * written only on success. Text results are copied into caller buffers and
 * truncated to fit, always NUL-terminated.
 */
#ifndef RELAXBM_RELAXBM_H_
#define RELAXBM_RELAXBM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(RELAXBM_BUILDING_LIBRARY)
#define RELAXBM_API __declspec(dllexport)
#else
#define RELAXBM_API __declspec(dllimport)
#endif
#else
#define RELAXBM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum relaxbm_status {
  RELAXBM_OK = 0,
  RELAXBM_ERR_INVALID_ARGUMENT = 1,
  RELAXBM_ERR_DIMENSION = 2,
  RELAXBM_ERR_DOMAIN = 3,
  RELAXBM_ERR_TOO_LARGE = 4,
  RELAXBM_ERR_NOT_POSITIVE_DEFINITE = 5,
  RELAXBM_ERR_FORMAT = 6,
  RELAXBM_ERR_CONFIG = 7,
  RELAXBM_ERR_IO = 8,
  RELAXBM_ERR_INTERNAL = 9
} relaxbm_status;

RELAXBM_API const char* relaxbm_version(void);
RELAXBM_API const char* relaxbm_status_name(relaxbm_status status);
/* Message of the last failure on this thread, "" if none. */
RELAXBM_API const char* relaxbm_last_error(void);

/* ---- configuration: key = value pairs named like the CLI flags ---- */

typedef struct relaxbm_config relaxbm_config;

RELAXBM_API relaxbm_status relaxbm_config_create(relaxbm_config** out);
RELAXBM_API void relaxbm_config_destroy(relaxbm_config* config);
RELAXBM_API relaxbm_status relaxbm_config_set(relaxbm_config* config, const char* key, const char* value);
/* Merges a key = value file into the config. */
RELAXBM_API relaxbm_status relaxbm_config_load(relaxbm_config* config, const char* path);
/* Fully resolved config (defaults filled in) as key = value text. */
RELAXBM_API relaxbm_status relaxbm_config_resolved(const relaxbm_config* config, char* buffer, size_t capacity);

/* ---- Boltzmann machines ---- */

typedef struct relaxbm_rbm relaxbm_rbm;

/* biases has d1 + d2 entries, cross is the d1 x d2 coupling block, row-major. */
RELAXBM_API relaxbm_status relaxbm_rbm_create(size_t d1, size_t d2, const double* biases, const double* cross,
                                              relaxbm_rbm** out);
/* a ~ N(0, bias_scale^2), W ~ N(0, weight_scale^2). */
RELAXBM_API relaxbm_status relaxbm_rbm_create_random(size_t d1, size_t d2, double bias_scale, double weight_scale,
                                                     uint64_t seed, relaxbm_rbm** out);
RELAXBM_API void relaxbm_rbm_destroy(relaxbm_rbm* rbm);
RELAXBM_API relaxbm_status relaxbm_rbm_dim(const relaxbm_rbm* rbm, size_t* out);
RELAXBM_API relaxbm_status relaxbm_rbm_energy(const relaxbm_rbm* rbm, const double* z, double* out);
/* Exact log Z by enumeration; the smaller side must have at most 24 units. */
RELAXBM_API relaxbm_status relaxbm_rbm_log_partition(const relaxbm_rbm* rbm, double* out);
RELAXBM_API relaxbm_status relaxbm_rbm_ais(const relaxbm_rbm* rbm, size_t temperatures, size_t samples, uint64_t seed,
                                           double* log_z, double* std_error);
RELAXBM_API relaxbm_status relaxbm_rbm_population_annealing(const relaxbm_rbm* rbm, size_t population,
                                                            size_t temperatures, size_t sweeps, uint64_t seed,
                                                            double* log_z);
RELAXBM_API relaxbm_status relaxbm_rbm_save(const relaxbm_rbm* rbm, const char* path);
RELAXBM_API relaxbm_status relaxbm_rbm_load(const char* path, relaxbm_rbm** out);

/* ---- smoothing (family: exp, unexp, power, gauss, git) ---- */

RELAXBM_API relaxbm_status relaxbm_inverse_cdf(const char* family, double beta, double q, double rho, double* zeta);
RELAXBM_API relaxbm_status relaxbm_implicit_grads(const char* family, double beta, double q, double zeta,
                                                  double* dzeta_dq, double* dzeta_dbeta);

/* ---- training and evaluation ---- */

/* Trains from scratch (resume_path NULL) or continues a checkpoint up to the
 * config's update count. Metrics rows are appended to metrics_path (the header
 * is written when the file is new); the final state goes to checkpoint_path. */
RELAXBM_API relaxbm_status relaxbm_train(const relaxbm_config* config, const char* resume_path,
                                         const char* checkpoint_path, const char* metrics_path, char* summary,
                                         size_t capacity);

typedef struct relaxbm_eval_result {
  double eval_ll;
  double std_error;
  double log_z;
  double log_z_std_error;
  size_t rows;
} relaxbm_eval_result;

/* Discrete K-sample bound on the checkpoint's test split with AIS log Z.
 * limit > 0 evaluates only the first rows. */
RELAXBM_API relaxbm_status relaxbm_eval(const char* checkpoint_path, size_t k, size_t ais_temperatures,
                                        size_t ais_samples, size_t limit, uint64_t seed, relaxbm_eval_result* out);

/* ---- diagnostics; each writes CSV to csv_path and a summary ---- */

/* kinds: comma list like "exp:10,power:30"; NULL or "" for the default grid. */
RELAXBM_API relaxbm_status relaxbm_diag_gradvar(const char* kinds, double q, size_t samples, uint64_t seed,
                                                const char* csv_path, char* summary, size_t capacity);
RELAXBM_API relaxbm_status relaxbm_diag_mfkl(size_t d1, size_t d2, double bias_scale, double weight_scale,
                                             const char* family, const double* betas, size_t n_betas, size_t n_zeta,
                                             int sweeps, uint64_t seed, const char* csv_path, char* summary,
                                             size_t capacity);
RELAXBM_API relaxbm_status relaxbm_diag_invcdf(const char* family, const double* betas, size_t n_betas, double q,
                                               size_t points, const char* csv_path, char* summary, size_t capacity);
RELAXBM_API relaxbm_status relaxbm_diag_pa_vs_pcd(const relaxbm_config* config, const size_t* ks, size_t n_ks,
                                                  size_t eval_k, const char* csv_path, char* summary,
                                                  size_t capacity);

#ifdef __cplusplus
}
#endif

#endif /* RELAXBM_RELAXBM_H_ */
