#ifndef WEAK_EULER_H
#define WEAK_EULER_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum WeStatus {
  WE_STATUS_OK = 0,
  /**
   * Null pointer, bad UTF-8 or a malformed buffer.
   */
  WE_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Parameters or configuration rejected by the library.
   */
  WE_STATUS_VALIDATION = 2,
  /**
   * Too few resolved points to fit an order.
   */
  WE_STATUS_INCONCLUSIVE = 3,
  /**
   * A trajectory overflowed, or every path did.
   */
  WE_STATUS_OVERFLOW = 4,
  WE_STATUS_IO = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  WE_STATUS_PANIC = 6,
} WeStatus;

typedef enum WeVerdict {
  WE_VERDICT_EXACT = 0,
  WE_VERDICT_PASS = 1,
  WE_VERDICT_FAIL = 2,
  WE_VERDICT_INCONCLUSIVE = 3,
  WE_VERDICT_REPORTED = 4,
} WeVerdict;

/**
 * Opaque model handle.
 */
typedef struct WeModel WeModel;

/**
 * `g(y, dim, ctx)`.
 */
typedef double (*WeTestFunction)(const double *y, size_t dim, void *ctx);

typedef struct WeMcResult {
  double mean;
  double std_error;
  /**
   * Paths that contributed to the mean.
   */
  uint64_t n;
  uint64_t overflow_count;
} WeMcResult;

typedef struct WeRateSummary {
  /**
   * NaN when no slope could be fitted.
   */
  double slope;
  double r_squared;
  /**
   * NaN on the boundary `beta == alpha`.
   */
  double kappa_predicted;
  uint32_t unmasked_points;
  enum WeVerdict verdict;
} WeRateSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message, NUL-terminated and
 * truncated to `len` bytes, into `buf`. Returns the full message length
 * (without the terminator); pass a null `buf` to query it.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t we_last_error_message(char *buf, size_t len);

/**
 * Builds a model from the TOML body of a `[model]` table, e.g.
 * `kind = "example1"`, `alpha = 1.5`, `dim = 1`, `beta = 2.5`.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum WeStatus we_model_from_toml(const char *toml, struct WeModel **out);

/**
 * Lacunary-field model with `c = (c0 + c1 W) I` plus off-diagonal fields of
 * amplitude `c_off`, no drift or jump loads.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum WeStatus we_model_example1(double alpha,
                                size_t dim,
                                double beta,
                                double c0,
                                double c1,
                                double c_off,
                                uint64_t seed,
                                struct WeModel **out);

/**
 * # Safety
 * `model` must be null or a handle from a `we_model_*` constructor that has
 * not been freed.
 */
void we_model_free(struct WeModel *model);

/**
 * # Safety
 * `model` must be a live handle; `alpha` and `dim` valid for writes.
 */
enum WeStatus we_model_info(const struct WeModel *model, double *alpha, size_t *dim);

/**
 * Predicted weak order; `*boundary` is set to 1 (and `*out` to NaN) when
 * `beta == alpha`.
 *
 * # Safety
 * `out` and `boundary` must be valid for writes.
 */
enum WeStatus we_kappa(double alpha, double beta, double *out, int32_t *boundary);

/**
 * `n` isotropic stable vectors of dimension `dim`, row-major into `out`
 * (length `n * dim`), from stream `stream_id` of `seed`.
 *
 * # Safety
 * `out` must be valid for `n * dim` writes.
 */
enum WeStatus we_sample_isotropic(double alpha,
                                  size_t dim,
                                  uint64_t seed,
                                  uint64_t stream_id,
                                  size_t n,
                                  double *out);

/**
 * `n` one-sided stable variates with Laplace transform `exp(-s^alpha)`,
 * `alpha` in (0, 1).
 *
 * # Safety
 * `out` must be valid for `n` writes.
 */
enum WeStatus we_sample_positive(double alpha,
                                 uint64_t seed,
                                 uint64_t stream_id,
                                 size_t n,
                                 double *out);

/**
 * Monte Carlo estimate of `E g(Y_T)` on a uniform grid of `n_steps` steps.
 * The result does not depend on `workers`.
 *
 * # Safety
 * `model` must be a live handle, `g` thread-safe, `out` valid for writes.
 */
enum WeStatus we_estimate(const struct WeModel *model,
                          double horizon,
                          size_t n_steps,
                          WeTestFunction g,
                          void *ctx,
                          uint64_t n_paths,
                          uint64_t seed,
                          size_t workers,
                          struct WeMcResult *out);

/**
 * Weak-error ladder over `deltas` (each dividing `horizon`) with coupled
 * differences against a fine grid of step `delta_ref`, followed by the
 * log-log order fit. An unfittable ladder is reported through the verdict,
 * not the status.
 *
 * # Safety
 * `deltas` must be valid for `n_deltas` reads; other pointers as in
 * [`we_estimate`].
 */
enum WeStatus we_converge(const struct WeModel *model,
                          double horizon,
                          const double *deltas,
                          size_t n_deltas,
                          double delta_ref,
                          WeTestFunction g,
                          void *ctx,
                          uint64_t n_paths,
                          uint64_t seed,
                          size_t workers,
                          struct WeRateSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WEAK_EULER_H */
