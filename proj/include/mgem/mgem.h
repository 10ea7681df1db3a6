/* SPDX-License-Identifier: Apache-2.0 */
/* C interface to the modular GEM library. All functions are thread-compatible;
 * the last error message is kept per thread. */
#ifndef MGEM_MGEM_H
#define MGEM_MGEM_H

#include <stddef.h>
#include <stdint.h>

#if defined(MGEM_BUILDING_LIBRARY)
#define MGEM_API __attribute__((visibility("default")))
#else
#define MGEM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mgem_status {
  MGEM_OK = 0,
  MGEM_ERR_INVALID_ARGUMENT = 1,
  MGEM_ERR_SHAPE = 2,
  MGEM_ERR_CONFIG = 3,
  MGEM_ERR_IO = 4,
  MGEM_ERR_PARSE = 5,
  MGEM_ERR_SOLVER = 6,
  MGEM_ERR_INTERNAL = 7
} mgem_status;

typedef enum mgem_dual_form {
  MGEM_FORM_BOX = 0,        /* v >= q */
  MGEM_FORM_REGULARIZED = 1 /* linear term -gamma^T v, v >= 0 */
} mgem_dual_form;

typedef enum mgem_solver {
  MGEM_SOLVER_EXACT = 0,
  MGEM_SOLVER_APPROX = 1,
  MGEM_SOLVER_ENUMERATE = 2
} mgem_solver;

typedef struct mgem_config mgem_config;

MGEM_API const char* mgem_version(void);

/* Message for the most recent failure on this thread ("" if none). */
MGEM_API const char* mgem_last_error(void);

MGEM_API mgem_status mgem_config_default(mgem_config** out);
MGEM_API mgem_status mgem_config_parse(const char* text, mgem_config** out);
MGEM_API mgem_status mgem_config_load(const char* path, mgem_config** out);
/* *out is allocated by the library; release with mgem_string_free. */
MGEM_API mgem_status mgem_config_serialize(const mgem_config* cfg, char** out);
MGEM_API const char* mgem_config_output_dir(const mgem_config* cfg);
MGEM_API size_t mgem_config_task_count(const mgem_config* cfg);
MGEM_API void mgem_config_free(mgem_config* cfg);
MGEM_API void mgem_string_free(char* s);

typedef struct mgem_run_options {
  const char* out_dir; /* NULL: the config's output.dir */
  uint32_t seeds;      /* replicates; 0 is treated as 1 */
  uint32_t threads;    /* pareto workers; 0 is treated as 1 */
} mgem_run_options;

typedef struct mgem_report {
  size_t rows;          /* rows written to summary.csv or pareto.csv */
  size_t degraded_runs; /* runs over the unconverged-solve budget */
} mgem_report;

/* Trains every configured method for each replicate and writes summary.csv
 * and rmatrix.csv. Returns MGEM_ERR_SOLVER after writing the reports if any
 * run was degraded. `report` may be NULL. */
MGEM_API mgem_status mgem_run(const mgem_config* cfg, const mgem_run_options* options,
                              mgem_report* report);

/* Sweeps configured methods x methods.q_grid on tasks 1-2; writes pareto.csv. */
MGEM_API mgem_status mgem_pareto(const mgem_config* cfg, const mgem_run_options* options,
                                 mgem_report* report);

typedef void (*mgem_suite_callback)(const char* name, int passed, size_t cases,
                                    size_t failures, const char* detail, double seconds,
                                    void* user);

/* Runs the property suites; *all_passed is 1 iff every suite passed. */
MGEM_API mgem_status mgem_selfcheck(int quick, mgem_suite_callback callback, void* user,
                                    int* all_passed);

/* Solves one dual QP. `rows` is m x n row-major; `strength` has length m.
 * Outputs may be NULL: direction (n), multipliers (m), kkt_residual, converged. */
MGEM_API mgem_status mgem_qp_solve(size_t m, size_t n, const double* rows, const double* target,
                                   const double* strength, mgem_dual_form form,
                                   mgem_solver solver, double* direction, double* multipliers,
                                   double* kkt_residual, int* converged);

/* `r` is tasks x tasks row-major, r[i*tasks + j] = accuracy on j after task i. */
MGEM_API mgem_status mgem_summarize(size_t tasks, const double* r, double* acc, double* bwd,
                                    double* fwd);

#ifdef __cplusplus
}
#endif

#endif /* MGEM_MGEM_H */
