#ifndef DRIFTFILL_H
#define DRIFTFILL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum DfStatus {
  DF_STATUS_OK = 0,
  DF_STATUS_NULL_POINTER = 1,
  DF_STATUS_INVALID_ARGUMENT = 2,
  DF_STATUS_PRECONDITION = 3,
  DF_STATUS_RESOURCE_LIMIT = 4,
  DF_STATUS_BUFFER_TOO_SMALL = 5,
  DF_STATUS_INTERNAL = 6,
  DF_STATUS_PANIC = 7,
} DfStatus;

/**
 * Curve family selector.
 */
typedef enum DfFamily {
  DF_FAMILY_STANDARD = 0,
  DF_FAMILY_GENERALIZED = 1,
  DF_FAMILY_ALTERNATE = 2,
  DF_FAMILY_NAIVE = 3,
} DfFamily;

/**
 * Opaque curve handle.
 */
typedef struct DfCurve DfCurve;

/**
 * Opaque Brownian path handle.
 */
typedef struct DfPath DfPath;

/**
 * Outcome of a single-path coverage check.
 */
typedef struct DfCoverage {
  size_t cells_total;
  size_t cells_hit;
  size_t witnesses;
} DfCoverage;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *df_version(void);

/**
 * Copies the last error message of this thread into `buf` (truncated and
 * always NUL-terminated when `len > 0`). Returns the full message length
 * without the NUL, or 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t df_last_error(char *buf, size_t len);

/**
 * Creates a curve. `alpha` and `rho` are ignored where the family fixes them
 * (`rho` for the alternate and naive families, both for the standard one).
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum DfStatus df_curve_new(enum DfFamily family,
                           size_t d,
                           double alpha,
                           double rho,
                           struct DfCurve **out);

/**
 * Releases a curve. Null is ignored.
 *
 * # Safety
 * `curve` must come from [`df_curve_new`] and not be used afterwards.
 */
void df_curve_free(struct DfCurve *curve);

/**
 * Dimension of the curve, 0 for a null handle.
 *
 * # Safety
 * `curve` must be null or a live handle.
 */
size_t df_curve_dim(const struct DfCurve *curve);

/**
 * Evaluates the curve at `t` with `depth` digits. Writes `d` coordinates to
 * `point` (capacity `len`) and the truncation error bound to `err_bound`
 * when it is not null.
 *
 * # Safety
 * `curve` must be a live handle, `point` must hold `len` doubles, and
 * `err_bound` must be null or writable.
 */
enum DfStatus df_curve_eval(const struct DfCurve *curve,
                            double t,
                            size_t depth,
                            double *point,
                            size_t len,
                            double *err_bound);

/**
 * Jump of the naive curve at `t = 1/2`, summed to `depth` digits.
 *
 * # Safety
 * `out` must be writable.
 */
enum DfStatus df_naive_gap(double alpha, size_t depth, double *out);

/**
 * Samples a Brownian path on the grid `k 2^-level`. `noise_scale` multiplies
 * the increments; 0 gives the zero path.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum DfStatus df_path_new(size_t d,
                          size_t level,
                          uint64_t seed,
                          double noise_scale,
                          struct DfPath **out);

/**
 * Releases a path. Null is ignored.
 *
 * # Safety
 * `path` must come from [`df_path_new`] and not be used afterwards.
 */
void df_path_free(struct DfPath *path);

/**
 * `B_t`, refined below the grid when `t` is not a grid time.
 *
 * # Safety
 * `path` must be a live handle and `point` must hold `len` doubles.
 */
enum DfStatus df_path_eval(const struct DfPath *path, double t, double *point, size_t len);

/**
 * Smallest `C` with `|B_t - B_s| <= C sqrt(u log(1/u))` for grid lags
 * `u <= s_max`.
 *
 * # Safety
 * `path` must be a live handle and `out` writable.
 */
enum DfStatus df_path_modulus(const struct DfPath *path, double s_max, double *out);

/**
 * Checks whether the shifted witness cubes of depth `depth` below the cell
 * `base` (digits, `base_len` of them) cover the shifted cell itself, split
 * into `cells_per_axis` cells per axis. Uses the `B - G` convention.
 *
 * # Safety
 * Handles must be live, `base` must hold `base_len` bytes (or be null when
 * `base_len` is 0) and `out` must be writable.
 */
enum DfStatus df_coverage(const struct DfCurve *curve,
                          const struct DfPath *path,
                          const uint8_t *base,
                          size_t base_len,
                          size_t depth,
                          size_t cells_per_axis,
                          struct DfCoverage *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DRIFTFILL_H */
