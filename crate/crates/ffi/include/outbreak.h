/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef OUTBREAK_H
#define OUTBREAK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ObStatus {
  OB_STATUS_OK = 0,
  OB_STATUS_NULL_POINTER = 1,
  OB_STATUS_INVALID_ARGUMENT = 2,
  OB_STATUS_INPUT_ERROR = 3,
  OB_STATUS_MODEL_ERROR = 4,
  OB_STATUS_ALL_SIMULATIONS_EMPTY = 5,
  OB_STATUS_PANIC = 6,
} ObStatus;

typedef enum ObMode {
  OB_MODE_KNOWN_START = 0,
  OB_MODE_UNKNOWN_START = 1,
} ObMode;

/**
 * Opaque sequential run.
 */
typedef struct ObSequentialRun ObSequentialRun;

/**
 * Opaque threshold table.
 */
typedef struct ObThresholdTable ObThresholdTable;

typedef struct ObDomesticFit {
  double rate;
  double ci_lo;
  double ci_hi;
  double intercept;
} ObDomesticFit;

/**
 * Detector settings. `alphas` points to `n_alphas` levels.
 */
typedef struct ObDetectorConfig {
  double rho0;
  double beta1_null;
  uint64_t n_travelers;
  size_t horizon_days;
  size_t n_sims;
  const double *alphas;
  size_t n_alphas;
  uint64_t seed;
} ObDetectorConfig;

/**
 * One decision date of a sequential run. `p_exceed` is NaN when not
 * computed.
 */
typedef struct ObSequentialRow {
  /**
   * Days since the epidemic start.
   */
  int64_t day;
  uint64_t n_cases;
  double beta1_mean;
  double beta1_lo;
  double beta1_hi;
  double p_exceed;
  bool detected;
} ObSequentialRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *ob_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ob_version(void);

/**
 * Doubling time `ln 2 / beta1`; fails unless `beta1 > 0`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum ObStatus ob_doubling_time(double beta1, double *out);

/**
 * Prevalence on day `t` for `initial_cases` infections among `population`,
 * capped at one.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum ObStatus ob_prevalence(uint64_t initial_cases,
                            uint64_t population,
                            double beta1,
                            int64_t t,
                            double *out);

/**
 * Integrated quadratic distance between two sample sets, using every sample.
 *
 * # Safety
 * `f` and `g` must point to `nf` and `ng` values; `out` must be valid for
 * writes.
 */
enum ObStatus ob_iqd(const double *f, size_t nf, const double *g, size_t ng, double *out);

/**
 * Poisson log-linear fit to `n` consecutive daily counts.
 *
 * # Safety
 * `counts` must point to `n` values; `out` must be valid for writes.
 */
enum ObStatus ob_domestic_fit(const uint64_t *counts, size_t n, struct ObDomesticFit *out);

/**
 * Simulates and tabulates a threshold table. Free with
 * [`ob_thresholds_free`].
 *
 * # Safety
 * `cfg` must point to a valid config whose `alphas` holds `n_alphas`
 * values; `out` must be valid for writes.
 */
enum ObStatus ob_thresholds_new(const struct ObDetectorConfig *cfg,
                                enum ObMode mode,
                                struct ObThresholdTable **out);

/**
 * # Safety
 * `table` must be null or a handle from [`ob_thresholds_new`] not yet freed.
 */
void ob_thresholds_free(struct ObThresholdTable *table);

/**
 * Number of days in the table.
 *
 * # Safety
 * `table` must be a live handle.
 */
size_t ob_thresholds_horizon(const struct ObThresholdTable *table);

/**
 * Minimum cumulative cases to reject on `day` (1-based) at the
 * `alpha_index`-th level. Writes 0 when no count can reject.
 *
 * # Safety
 * `table` must be a live handle; `out` must be valid for writes.
 */
enum ObStatus ob_thresholds_get(const struct ObThresholdTable *table,
                                size_t day,
                                size_t alpha_index,
                                uint64_t *out);

/**
 * Smallest level at which `observed_cumulative` rejects on `day`, or 0
 * when it rejects at none.
 *
 * # Safety
 * `table` must be a live handle; `out_alpha` must be valid for writes.
 */
enum ObStatus ob_verdict(const struct ObThresholdTable *table,
                         size_t day,
                         uint64_t observed_cumulative,
                         double *out_alpha);

/**
 * Runs the daily estimates for one origin from CSV/JSON files. Free with
 * [`ob_sequential_free`].
 *
 * # Safety
 * The paths must be NUL-terminated strings; `out` must be valid for writes.
 */
enum ObStatus ob_sequential_run(const char *cases_path,
                                const char *volumes_path,
                                const char *origin_config_path,
                                double threshold,
                                uint64_t seed,
                                struct ObSequentialRun **out);

/**
 * # Safety
 * `run` must be null or a handle from [`ob_sequential_run`] not yet freed.
 */
void ob_sequential_free(struct ObSequentialRun *run);

/**
 * Number of decision dates.
 *
 * # Safety
 * `run` must be a live handle.
 */
size_t ob_sequential_len(const struct ObSequentialRun *run);

/**
 * # Safety
 * `run` must be a live handle; `out` must be valid for writes.
 */
enum ObStatus ob_sequential_row(const struct ObSequentialRun *run,
                                size_t index,
                                struct ObSequentialRow *out);

/**
 * Detection day (days since the epidemic start), or -1 without detection.
 *
 * # Safety
 * `run` must be a live handle; `out` must be valid for writes.
 */
enum ObStatus ob_sequential_detection_day(const struct ObSequentialRun *run, int64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OUTBREAK_H */
