#ifndef WPROJ_H
#define WPROJ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every function.
 */
typedef enum {
  WPROJ_STATUS_OK = 0,
  WPROJ_STATUS_NULL_POINTER = 1,
  WPROJ_STATUS_EMPTY_INPUT = 2,
  WPROJ_STATUS_INVALID_WEIGHT = 3,
  WPROJ_STATUS_NON_FINITE = 4,
  WPROJ_STATUS_INVALID_P = 5,
  WPROJ_STATUS_BARYCENTER_MISMATCH = 6,
  WPROJ_STATUS_BUFFER_TOO_SMALL = 7,
  WPROJ_STATUS_NO_CONVERGENCE = 8,
  WPROJ_STATUS_INVALID_INPUT = 9,
  WPROJ_STATUS_PANIC = 10,
} WprojStatus;

/**
 * Opaque handle to a finitely supported probability measure.
 */
typedef struct WprojMeasure WprojMeasure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a measure from `len` positions and positive weights. Weights are
 * normalized and coincident positions merged.
 *
 * # Safety
 * `xs` and `ws` must point to `len` readable doubles; `out` must be writable.
 */
WprojStatus wproj_measure_new(const double *xs, const double *ws, size_t len, WprojMeasure **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `m` must be null or a handle from this library not yet freed.
 */
void wproj_measure_free(WprojMeasure *m);

/**
 * Number of atoms after merging.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
WprojStatus wproj_measure_len(const WprojMeasure *m, size_t *out);

/**
 * Copies the sorted atoms into `xs` and `ws`, which hold `capacity` doubles.
 * Returns `BufferTooSmall` if `capacity` is less than the atom count.
 *
 * # Safety
 * `m` must be a live handle; `xs` and `ws` must be writable for `capacity` doubles.
 */
WprojStatus wproj_measure_atoms(const WprojMeasure *m, double *xs, double *ws, size_t capacity);

/**
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
WprojStatus wproj_measure_barycenter(const WprojMeasure *m, double *out);

/**
 * `W_p(a, b)` for `p >= 1`.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
WprojStatus wproj_wasserstein(const WprojMeasure *a, const WprojMeasure *b, double p, double *out);

/**
 * Whether `a <=_c b`. Fails with `BarycenterMismatch` when the barycenters
 * differ by more than `tol`.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
WprojStatus wproj_is_convex_order(const WprojMeasure *a,
                                  const WprojMeasure *b,
                                  double tol,
                                  bool *out);

/**
 * `I(mu, nu)`: the measure dominated by `nu` closest to `mu`. The result is a
 * new handle owned by the caller.
 *
 * # Safety
 * `mu` and `nu` must be live handles; `out` must be writable.
 */
WprojStatus wproj_project_i(const WprojMeasure *mu, const WprojMeasure *nu, WprojMeasure **out);

/**
 * `J(mu, nu)`: the measure dominating `mu` closest to `nu`. The result is a
 * new handle owned by the caller.
 *
 * # Safety
 * `mu` and `nu` must be live handles; `out` must be writable.
 */
WprojStatus wproj_project_j(const WprojMeasure *mu, const WprojMeasure *nu, WprojMeasure **out);

/**
 * Convex-order minimum of two measures whose barycenters agree within `tol`.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
WprojStatus wproj_min_convex(const WprojMeasure *a,
                             const WprojMeasure *b,
                             double tol,
                             WprojMeasure **out);

/**
 * Convex-order maximum of two measures whose barycenters agree within `tol`.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
WprojStatus wproj_max_convex(const WprojMeasure *a,
                             const WprojMeasure *b,
                             double tol,
                             WprojMeasure **out);

/**
 * Static, NUL-terminated description of a status code.
 */
const char *wproj_status_message(WprojStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WPROJ_H */
