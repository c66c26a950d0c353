/* SPDX-License-Identifier: Apache-2.0 */
#ifndef EDGEGNN_EDGEGNN_H
#define EDGEGNN_EDGEGNN_H

#include <stddef.h>
#include <stdint.h>

#if defined(EDGEGNN_BUILDING_LIBRARY)
#define EDGEGNN_API __attribute__((visibility("default")))
#else
#define EDGEGNN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as process exit codes for the command runner. */
typedef enum egnn_status {
  EGNN_OK = 0,
  EGNN_ERR_PROPERTY = 1, /* a verified property failed */
  EGNN_ERR_ARGUMENT = 2,
  EGNN_ERR_NUMERIC = 3, /* non-finite values, solver breakdown */
  EGNN_ERR_IO = 4,
  EGNN_ERR_INTERNAL = 5,
  EGNN_ERR_NULL = 6 /* a required pointer argument was NULL */
} egnn_status;

/* Message of the most recent failure on the calling thread; "" if none. */
EDGEGNN_API const char* egnn_last_error(void);
EDGEGNN_API const char* egnn_version(void);

/* Strings returned through char** out-parameters are released with this. */
EDGEGNN_API void egnn_string_free(char* s);

/* ---- problem instances ---- */

typedef struct egnn_instance egnn_instance;

/* Random layout and channels, normalized so every noise power is 1. */
EDGEGNN_API egnn_status egnn_instance_sample(int M, int K, int N, uint64_t seed, egnn_instance** out);
/* Record `index` of an instance batch file. */
EDGEGNN_API egnn_status egnn_instance_load(const char* path, size_t index, egnn_instance** out);
EDGEGNN_API egnn_status egnn_instance_dims(const egnn_instance* inst, int* M, int* K, int* N);
EDGEGNN_API void egnn_instance_free(egnn_instance* inst);

/* Beamformers cross the boundary as 2*M*K*N doubles: (re, im) pairs in
 * row-major (BS, UE, antenna) order. */
EDGEGNN_API egnn_status egnn_sum_rate(const egnn_instance* inst, const double* v, size_t len, double* rate);

/* ---- Edge-GNN models ---- */

typedef struct egnn_model egnn_model;

EDGEGNN_API egnn_status egnn_model_load(const char* checkpoint_path, egnn_model** out);
EDGEGNN_API egnn_status egnn_model_random(int L, int d, int N, uint64_t seed, egnn_model** out);
EDGEGNN_API egnn_status egnn_model_infer(const egnn_model* model, const egnn_instance* inst, double* v_out,
                                         size_t len);
/* Number of trainable scalars. */
EDGEGNN_API egnn_status egnn_model_parameter_count(const egnn_model* model, size_t* count);
EDGEGNN_API void egnn_model_free(egnn_model* model);

/* ---- classical solvers ---- */

/* solver is "wmmse" or "gp"; max_iters <= 0 keeps the default budget. */
EDGEGNN_API egnn_status egnn_solve(const egnn_instance* inst, const char* solver, int max_iters, double* v_out,
                                   size_t len, double* rate, int* converged);

/* ---- experiment commands ---- */

/* Default spec of a command as a JSON object, one key per accepted flag.
 * Release *defaults_json with egnn_string_free. */
EDGEGNN_API egnn_status egnn_cmd_defaults(const char* command, char** defaults_json);

typedef void (*egnn_log_fn)(const char* line, void* user);

/* Runs generate, train, baseline, sweep, verify or evaluate. config_json and
 * flags_json are JSON objects (NULL means {}); flags override the config.
 * Progress lines go to `log` when set. On return *summary_json (if requested)
 * holds a JSON summary, or NULL on error. The return value is the command's
 * exit code. */
EDGEGNN_API egnn_status egnn_cmd_run(const char* command, const char* config_json, const char* flags_json,
                                     egnn_log_fn log, void* user, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* EDGEGNN_EDGEGNN_H */
