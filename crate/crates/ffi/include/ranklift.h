/* C interface to the ranklift low-rank PSD recovery library. */

#ifndef RANKLIFT_H
#define RANKLIFT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Pass as `t_max` to use the solver's default iteration budget.
 */
#define RANKLIFT_TMAX_DEFAULT UINT64_MAX

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum RankliftStatus {
  RANKLIFT_STATUS_OK = 0,
  RANKLIFT_STATUS_NULL_ARGUMENT = 1,
  RANKLIFT_STATUS_INVALID_ARGUMENT = 2,
  RANKLIFT_STATUS_NUMERICAL_FAILURE = 3,
  RANKLIFT_STATUS_UTF8_ERROR = 4,
  RANKLIFT_STATUS_JSON_ERROR = 5,
} RankliftStatus;

/**
 * Ground-truth family for generated instances.
 */
typedef enum RankliftKind {
  /**
   * Real `X0 = U0 U0'` with i.i.d. standard Gaussian factor.
   */
  RANKLIFT_KIND_GAUSSIAN_FACTOR = 0,
  /**
   * Complex Hermitian Toeplitz PSD truth from a random Vandermonde form.
   */
  RANKLIFT_KIND_TOEPLITZ_VANDERMONDE = 1,
} RankliftKind;

/**
 * Outlier value model; `a`/`b` parameters are per model.
 */
typedef enum RankliftOutlierModel {
  /**
   * `beta = +-a` with equiprobable signs.
   */
  RANKLIFT_OUTLIER_MODEL_RADEMACHER_SCALED = 0,
  /**
   * `beta ~ N(0, a^2)`.
   */
  RANKLIFT_OUTLIER_MODEL_ADDITIVE_GAUSSIAN = 1,
  /**
   * `|beta| ~ Unif[a, b]` with a random sign.
   */
  RANKLIFT_OUTLIER_MODEL_UNIFORM_AMPLITUDE = 2,
} RankliftOutlierModel;

/**
 * Solver selector, matching the CLI names.
 */
typedef enum RankliftSolver {
  RANKLIFT_SOLVER_NONCONVEX = 0,
  RANKLIFT_SOLVER_WF = 1,
  RANKLIFT_SOLVER_PHASELIFT = 2,
  RANKLIFT_SOLVER_TOEPLITZ = 3,
} RankliftSolver;

/**
 * Opaque problem instance.
 */
typedef struct RankliftInstance RankliftInstance;

/**
 * Opaque recovery result.
 */
typedef struct RankliftResult RankliftResult;

/**
 * Parameters for `ranklift_instance_generate`.
 */
typedef struct RankliftGenParams {
  uint64_t n;
  uint64_t m;
  uint64_t r;
  enum RankliftKind kind;
  /**
   * Fraction of measurements hit by outliers, in [0, 1).
   */
  double outlier_fraction;
  enum RankliftOutlierModel outlier_model;
  /**
   * First model parameter (amplitude, sigma, or lower bound).
   */
  double outlier_a;
  /**
   * Second model parameter (upper bound; unused otherwise).
   */
  double outlier_b;
  /**
   * Half-width of the uniform entrywise noise; 0 disables it.
   */
  double noise_half_width;
  /**
   * Replace corrupted measurements instead of adding to them.
   */
  bool replace_outliers;
  /**
   * Master seed; the three internal streams derive from it.
   */
  uint64_t seed;
} RankliftGenParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ranklift_version(void);

/**
 * Generate an instance from explicit parameters.
 *
 * # Safety
 * `out` must be a valid pointer; on `RANKLIFT_STATUS_OK` it receives a
 * handle owned by the caller.
 */
enum RankliftStatus ranklift_instance_generate(struct RankliftGenParams params,
                                               struct RankliftInstance **out);

/**
 * Parse an instance from its JSON form (the `gen` file format).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` as in
 * `ranklift_instance_generate`.
 */
enum RankliftStatus ranklift_instance_from_json(const char *json, struct RankliftInstance **out);

/**
 * Serialize an instance to JSON (caller frees via `ranklift_string_free`).
 *
 * # Safety
 * `instance` must be a live handle; `out` must be valid.
 */
enum RankliftStatus ranklift_instance_to_json(const struct RankliftInstance *instance, char **out);

/**
 * Problem dimensions of an instance.
 *
 * # Safety
 * All pointers must be valid; `instance` must be a live handle.
 */
enum RankliftStatus ranklift_instance_dims(const struct RankliftInstance *instance,
                                           uint64_t *n,
                                           uint64_t *m,
                                           uint64_t *r);

/**
 * Release an instance handle (accepts NULL).
 *
 * # Safety
 * `instance` must be NULL or a handle returned by this library, not yet
 * freed.
 */
void ranklift_instance_free(struct RankliftInstance *instance);

/**
 * Run a solver. `rank_guess = 0` uses the instance's truth rank;
 * `t_max = RANKLIFT_TMAX_DEFAULT` uses the solver default. A diverged run
 * still returns `RANKLIFT_STATUS_OK` with a result whose `diverged` flag
 * is set (recovery failure is data).
 *
 * # Safety
 * `instance` must be a live handle and `out` a valid pointer; the returned
 * result handle is owned by the caller.
 */
enum RankliftStatus ranklift_solve(const struct RankliftInstance *instance,
                                   enum RankliftSolver solver,
                                   uint64_t rank_guess,
                                   uint64_t t_max,
                                   struct RankliftResult **out);

/**
 * Relative recovery error against the ground truth; NaN when the run
 * diverged or the truth is zero.
 *
 * # Safety
 * `result` must be a live handle; `rel_error` must be valid.
 */
enum RankliftStatus ranklift_result_rel_error(const struct RankliftResult *result,
                                              double *rel_error);

/**
 * Whether the run hit the divergence guard.
 *
 * # Safety
 * `result` must be a live handle; `diverged` must be valid.
 */
enum RankliftStatus ranklift_result_diverged(const struct RankliftResult *result, bool *diverged);

/**
 * Serialize a result to JSON (caller frees via `ranklift_string_free`).
 *
 * # Safety
 * `result` must be a live handle; `out` must be valid.
 */
enum RankliftStatus ranklift_result_to_json(const struct RankliftResult *result, char **out);

/**
 * Release a result handle (accepts NULL).
 *
 * # Safety
 * `result` must be NULL or a handle returned by this library, not yet
 * freed.
 */
void ranklift_result_free(struct RankliftResult *result);

/**
 * Release a string returned by the `*_to_json` functions (accepts NULL).
 *
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void ranklift_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RANKLIFT_H */
