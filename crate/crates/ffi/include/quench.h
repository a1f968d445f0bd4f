#ifndef QUENCH_H
#define QUENCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Which series a truncation request is for.
#define QUENCH_OBSERVABLE_COEFFICIENTS 0

#define QUENCH_OBSERVABLE_SURVIVAL 1

#define QUENCH_OBSERVABLE_WAVEFUNCTION 2

typedef enum QuenchStatus {
  QUENCH_STATUS_OK = 0,
  QUENCH_STATUS_INVALID_ARGUMENT = 1,
  QUENCH_STATUS_DOMAIN = 2,
  QUENCH_STATUS_TRUNCATION = 3,
  QUENCH_STATUS_NON_CONVERGENCE = 4,
  QUENCH_STATUS_GRID_MISMATCH = 5,
  QUENCH_STATUS_ILL_CONDITIONED = 6,
  QUENCH_STATUS_NULL_POINTER = 7,
  QUENCH_STATUS_PANIC = 8,
} QuenchStatus;

// Precomputed survival weights for one well and truncation.
typedef struct QuenchSurvival QuenchSurvival;

// Expanded-well geometry.
typedef struct QuenchWell QuenchWell;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *quench_last_error(void);

// Library version as a static NUL-terminated string.
const char *quench_version(void);

// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum QuenchStatus quench_well_new(double delta, struct QuenchWell **out);

// # Safety
// `well` must be NULL or a handle from [`quench_well_new`] not yet freed.
void quench_well_free(struct QuenchWell *well);

// Width `L = 1 + Δ` and revival period `T = 2L²/π`.
//
// # Safety
// `well` must be a live handle; the out-pointers must be writable.
enum QuenchStatus quench_well_geometry(const struct QuenchWell *well,
                                       double *width,
                                       double *period);

// Coefficient `a_n`, `n ≥ 1`.
//
// # Safety
// `well` must be a live handle; `out` must be writable.
enum QuenchStatus quench_mode_coefficient(const struct QuenchWell *well, uintptr_t n, double *out);

// Smallest mode count whose analytic tail bound is below `tol`.
//
// # Safety
// `well` must be a live handle; `out` must be writable.
enum QuenchStatus quench_truncation_for_tolerance(const struct QuenchWell *well,
                                                  uint32_t observable,
                                                  double tol,
                                                  uintptr_t *out);

// # Safety
// `well` must be a live handle; `out` must be writable.
enum QuenchStatus quench_survival_new(const struct QuenchWell *well,
                                      uintptr_t modes,
                                      struct QuenchSurvival **out);

// # Safety
// `series` must be NULL or a handle from [`quench_survival_new`] not yet
// freed.
void quench_survival_free(struct QuenchSurvival *series);

// Survival amplitude `A(t)` as real and imaginary parts.
//
// # Safety
// `series` must be a live handle; the out-pointers must be writable.
enum QuenchStatus quench_survival_amplitude(const struct QuenchSurvival *series,
                                            double t,
                                            double *re,
                                            double *im);

// Escape probability `1 - |A(t)|²`.
//
// # Safety
// `series` must be a live handle; `out` must be writable.
enum QuenchStatus quench_survival_escape(const struct QuenchSurvival *series,
                                         double t,
                                         double *out);

// Leading-order small-Δ escape series.
//
// # Safety
// `well` must be a live handle; `out` must be writable.
enum QuenchStatus quench_escape_small_delta(const struct QuenchWell *well,
                                            double t,
                                            uintptr_t modes,
                                            double *out);

// Continuum escape integral.
//
// # Safety
// `out` must be writable.
enum QuenchStatus quench_escape_integral(double delta, double t, double *out);

// `t^{3/2}` law valid for `t ≪ Δ²`.
double quench_asymptote_free(double t);

// `Δ² t^{1/2}` law valid for `Δ² ≪ t ≪ 1`.
double quench_asymptote_confined(double delta, double t);

// Where the two asymptotes cross, `3Δ²`.
double quench_transition_time(double delta);

// `F(ξ)` summed to `terms` and the bound on the neglected tail.
//
// # Safety
// The out-pointers must be writable; `tail_bound` may be NULL.
enum QuenchStatus quench_universal_f(double xi, uintptr_t terms, double *value, double *tail_bound);

// `F(k/M)` for `k = 0..M-1` into `values`, which must hold `intervals`
// doubles.
//
// # Safety
// `values` must point to `intervals` writable doubles.
enum QuenchStatus quench_universal_grid(uintptr_t intervals, uintptr_t terms, double *values);

// Log-log fit of ruler lengths: `dimension = 1 - slope`.
//
// # Safety
// `epsilons` and `lengths` must each point to `count` doubles; the
// out-pointers must be writable; `residual` may be NULL.
enum QuenchStatus quench_dimension_fit(const double *epsilons,
                                       const double *lengths,
                                       uintptr_t count,
                                       double *dimension,
                                       double *residual);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUENCH_H */
