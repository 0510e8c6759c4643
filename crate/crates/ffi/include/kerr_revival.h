#ifndef KERR_REVIVAL_H
#define KERR_REVIVAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KrStatus {
  KR_STATUS_OK = 0,
  KR_STATUS_NULL_POINTER = 1,
  KR_STATUS_INVALID_PARAMETER = 2,
  KR_STATUS_TAIL_BUDGET_EXCEEDED = 3,
  KR_STATUS_OVERFLOW_GUARD = 4,
  KR_STATUS_GRID_TOO_COARSE = 5,
  KR_STATUS_GRID_TOO_SMALL = 6,
  KR_STATUS_DOMAIN = 7,
  KR_STATUS_EMPTY_WINDOW = 8,
  KR_STATUS_NO_CONVERGENCE = 9,
  KR_STATUS_SLOW_CONVERGENCE = 10,
  KR_STATUS_NOT_PRIMITIVE_WKB = 11,
  KR_STATUS_UNRESOLVED_SEGMENT = 12,
  KR_STATUS_DEGENERATE_ARC = 13,
  KR_STATUS_CAUSTIC_DIVERGENCE = 14,
  KR_STATUS_PANIC = 15,
} KrStatus;

typedef enum KrPicture {
  KR_PICTURE_LAB = 0,
  KR_PICTURE_INTERACTION = 1,
} KrPicture;

/**
 * Correlation methods.
 */
typedef enum KrCorrelation {
  KR_CORRELATION_EXACT = 0,
  KR_CORRELATION_VANVLECK = 1,
  KR_CORRELATION_THETA_QUANTUM = 2,
  KR_CORRELATION_THETA_SEMICLASSICAL = 3,
} KrCorrelation;

/**
 * Wavefunction methods. `Exact` and `Vanvleck` are lab-frame; `Tdwkb` is
 * interaction-picture.
 */
typedef enum KrWavefunction {
  KR_WAVEFUNCTION_EXACT = 0,
  KR_WAVEFUNCTION_VANVLECK = 1,
  KR_WAVEFUNCTION_VANVLECK_BOTH_FAMILIES = 2,
  KR_WAVEFUNCTION_TDWKB = 3,
} KrWavefunction;

/**
 * Truncated Fock-basis propagator (opaque).
 */
typedef struct KrExact KrExact;

/**
 * Model parameters (opaque).
 */
typedef struct KrParams KrParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *kr_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *kr_version(void);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum KrStatus kr_params_new(double gamma, double hbar, double q0, double p0, struct KrParams **out);

/**
 * `gamma = hbar = 1`, `(q0, p0) = (0, 14)`.
 *
 * # Safety
 * As [`kr_params_new`].
 */
enum KrStatus kr_params_reference(struct KrParams **out);

/**
 * Replace the interaction-picture pivot.
 *
 * # Safety
 * `params` must be a live handle.
 */
enum KrStatus kr_params_set_n0(struct KrParams *params, double n0);

/**
 * # Safety
 * `params` must be null or a handle not yet freed.
 */
void kr_params_free(struct KrParams *params);

/**
 * Writes `T1`, `T2` and the mean photon number `nu`. Any output may be null.
 *
 * # Safety
 * `params` must be a live handle; non-null outputs must be writable.
 */
enum KrStatus kr_params_scales(const struct KrParams *params, double *t1, double *t2, double *nu);

/**
 * Exact propagator in `picture` (a [`KrPicture`]) with `n_max` Fock
 * states; `n_max = 0` picks the default truncation for the photon number.
 *
 * # Safety
 * `params` must be a live handle and `out` writable.
 */
enum KrStatus kr_exact_new(const struct KrParams *params,
                           int picture,
                           size_t n_max,
                           struct KrExact **out);

/**
 * # Safety
 * `exact` must be null or a handle not yet freed.
 */
void kr_exact_free(struct KrExact *exact);

/**
 * `<psi(0)|psi(t)>` at each of `n` times; `out` holds `2 n` doubles.
 *
 * # Safety
 * `exact` must be a live handle, `times` readable for `n` doubles and `out`
 * writable for `2 n`.
 */
enum KrStatus kr_exact_autocorrelation(const struct KrExact *exact,
                                       const double *times,
                                       size_t n,
                                       double *out);

/**
 * `psi(q_j, t)` in the handle's picture; `out` holds `2 n` doubles.
 *
 * # Safety
 * As [`kr_exact_autocorrelation`] with `q` in place of `times`.
 */
enum KrStatus kr_exact_wavefunction(const struct KrExact *exact,
                                    double t,
                                    const double *q,
                                    size_t n,
                                    double *out);

/**
 * Exact Wigner function at time `t` on a `q_steps x p_steps` grid, written
 * row-major in `q` (`out[i * p_steps + j]` is at `(q_i, p_j)`).
 *
 * # Safety
 * `exact` must be a live handle and `out` writable for `q_steps * p_steps`
 * doubles.
 */
enum KrStatus kr_exact_wigner(const struct KrExact *exact,
                              double t,
                              double q_min,
                              double q_max,
                              size_t q_steps,
                              double p_min,
                              double p_max,
                              size_t p_steps,
                              double *out);

/**
 * Lab-frame autocorrelation at `n` times by `method` (a [`KrCorrelation`]).
 *
 * # Safety
 * `params` must be a live handle, `times` readable for `n` doubles and
 * `out` writable for `2 n`.
 */
enum KrStatus kr_correlation(const struct KrParams *params,
                             int method,
                             const double *times,
                             size_t n,
                             double *out);

/**
 * `psi(q_j, t)` by `method` (a [`KrWavefunction`]) with default options.
 *
 * # Safety
 * `params` must be a live handle, `q` readable for `n` doubles and `out`
 * writable for `2 n`.
 */
enum KrStatus kr_wavefunction(const struct KrParams *params,
                              int method,
                              double t,
                              const double *q,
                              size_t n,
                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KERR_REVIVAL_H */
