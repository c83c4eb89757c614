#ifndef POISSON3_H
#define POISSON3_H

/* Generated by cbindgen; edit the Rust sources instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum P3Status {
  P3_STATUS_OK = 0,
  /**
   * The computation ran but its check did not pass.
   */
  P3_STATUS_CHECK_FAILED = 1,
  P3_STATUS_NULL_ARGUMENT = 2,
  P3_STATUS_INVALID_UTF8 = 3,
  P3_STATUS_PARSE = 4,
  P3_STATUS_INVALID_INPUT = 5,
  P3_STATUS_NOT_SEPARABLE = 6,
  P3_STATUS_VANISHING = 7,
  P3_STATUS_OUTSIDE_DOMAIN = 8,
  P3_STATUS_NUMERICAL = 9,
  P3_STATUS_UNKNOWN_ENTRY = 10,
  P3_STATUS_PANIC = 11,
} P3Status;

typedef struct P3Casimir P3Casimir;

typedef struct P3Chart P3Chart;

/**
 * A structure matrix, with its family spec when it came from one.
 */
typedef struct P3Structure P3Structure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *p3_last_error(void);

/**
 * Library version as a static string.
 */
const char *p3_version(void);

/**
 * Free a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void p3_string_free(char *s);

/**
 * Structure from three entry expressions on the box `lo < x < hi`.
 *
 * # Safety
 * Strings must be NUL-terminated; `lo` and `hi` must point to 3 doubles.
 */
enum P3Status p3_structure_new(const char *u,
                               const char *v,
                               const char *w,
                               const double *lo,
                               const double *hi,
                               struct P3Structure **out);

/**
 * Structure from a JSON family spec.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` must be writable.
 */
enum P3Status p3_structure_from_spec(const char *json, struct P3Structure **out);

/**
 * Structure of a catalog entry with its default parameters and domain.
 *
 * # Safety
 * `id` must be NUL-terminated; `out` must be writable.
 */
enum P3Status p3_structure_from_catalog(const char *id, struct P3Structure **out);

/**
 * Bind a parameter. A spec-backed structure is rebuilt and revalidated.
 *
 * # Safety
 * `s` must be a live handle; `name` must be NUL-terminated.
 */
enum P3Status p3_structure_set_param(struct P3Structure *s, const char *name, double value);

/**
 * # Safety
 * `s` must come from a `p3_structure_*` constructor and not be used after.
 */
void p3_structure_free(struct P3Structure *s);

/**
 * `(u, v, w)` at `x`.
 *
 * # Safety
 * `s` must be live; `x` and `out` must point to 3 doubles.
 */
enum P3Status p3_structure_eval(const struct P3Structure *s, const double *x, double *out);

/**
 * Sample the Jacobi identity. Returns `CheckFailed` when the worst
 * relative residual exceeds `tol`; the residual is written either way.
 *
 * # Safety
 * `s` must be live; `max_rel_residual` may be null.
 */
enum P3Status p3_jacobi_check(const struct P3Structure *s,
                              size_t samples,
                              double tol,
                              uint64_t seed,
                              double *max_rel_residual);

/**
 * Family tag such as `gamma-pair(u)`; free with [`p3_string_free`].
 *
 * # Safety
 * `s` must be live; `out` must be writable.
 */
enum P3Status p3_classify(const struct P3Structure *s, char **out);

/**
 * # Safety
 * `s` must be live; `out` must be writable.
 */
enum P3Status p3_casimir_new(const struct P3Structure *s, struct P3Casimir **out);

/**
 * # Safety
 * `c` must be live; `x` must point to 3 doubles and `out` be writable.
 */
enum P3Status p3_casimir_eval(const struct P3Casimir *c, const double *x, double *out);

/**
 * # Safety
 * `c` must come from [`p3_casimir_new`] and not be used after.
 */
void p3_casimir_free(struct P3Casimir *c);

/**
 * Darboux chart; `alternate` selects the eta-factor chart for pairs.
 *
 * # Safety
 * `s` must be live; `out` must be writable.
 */
enum P3Status p3_chart_new(const struct P3Structure *s, bool alternate, struct P3Chart **out);

/**
 * # Safety
 * `c` must be live; `x` and `y` must point to 3 doubles.
 */
enum P3Status p3_chart_forward(const struct P3Chart *c, const double *x, double *y);

/**
 * # Safety
 * `c` must be live; `y` and `x` must point to 3 doubles.
 */
enum P3Status p3_chart_inverse(const struct P3Chart *c, const double *y, double *x);

/**
 * The time factor at the source point `x`.
 *
 * # Safety
 * `c` must be live; `x` must point to 3 doubles and `out` be writable.
 */
enum P3Status p3_chart_mu_hat(const struct P3Chart *c, const double *x, double *out);

/**
 * Index (0-based) of the Casimir coordinate.
 *
 * # Safety
 * `c` must be live.
 */
int32_t p3_chart_distinguished(const struct P3Chart *c);

/**
 * Compare the pushed-forward structure with the canonical matrix.
 * `CheckFailed` when deviation or round trip exceed the chart tolerance.
 *
 * # Safety
 * Handles must be live; the out pointers may be null.
 */
enum P3Status p3_chart_verify(const struct P3Structure *s,
                              const struct P3Chart *c,
                              size_t samples,
                              uint64_t seed,
                              double *max_deviation,
                              double *max_round_trip);

/**
 * # Safety
 * `c` must come from [`p3_chart_new`] and not be used after.
 */
void p3_chart_free(struct P3Chart *c);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POISSON3_H */
