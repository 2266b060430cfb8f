#ifndef HYPERPOLYGON_H
#define HYPERPOLYGON_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HpStatus {
  HP_STATUS_OK = 0,
  HP_STATUS_NULL_POINTER = 1,
  HP_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed input: bad quiver, level vector, option or JSON.
   */
  HP_STATUS_INVALID_INPUT = 3,
  /**
   * The best start was returned but did not reach the tolerance.
   */
  HP_STATUS_NOT_CONVERGED = 4,
  HP_STATUS_SINGULAR_POINT = 5,
  HP_STATUS_NOT_ON_SHELL = 6,
  HP_STATUS_INCONCLUSIVE = 7,
  HP_STATUS_IO = 8,
  HP_STATUS_PANIC = 99,
} HpStatus;

/**
 * Opaque comet quiver.
 */
typedef struct HpQuiver HpQuiver;

/**
 * Opaque solution: quiver, level and representation.
 */
typedef struct HpSolution HpSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. Valid until
 * the next failing call on the same thread.
 */
const char *hp_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hp_version(void);

/**
 * Parse a quiver document such as `{"arms": [[1,2],[1,2]], "loops": 1}`.
 */
enum HpStatus hp_quiver_from_json(const char *json, struct HpQuiver **out);

/**
 * Comet with `n` identical arms (complete flags if `complete`, else
 * minimal), `g` loops and central rank `r`.
 */
enum HpStatus hp_quiver_comet(size_t r, size_t n, size_t g, bool complete, struct HpQuiver **out);

void hp_quiver_free(struct HpQuiver *q);

enum HpStatus hp_quiver_n_arms(const struct HpQuiver *q, size_t *out);

/**
 * Predicted complex dimensions of the polygon and hyperpolygon spaces.
 */
enum HpStatus hp_quiver_dims(const struct HpQuiver *q,
                             int64_t *dim_polygon,
                             int64_t *dim_hyperpolygon);

/**
 * Gelfand-Tsetlin tally; fails for arms that are neither complete nor minimal.
 */
enum HpStatus hp_quiver_count_gt(const struct HpQuiver *q, int64_t *out);

/**
 * Solve the hyperpolygon equations at the `n_alpha` levels. `starts = 0`
 * uses the default. On `HP_STATUS_NOT_CONVERGED` the best start is still
 * written to `out` and must be freed.
 */
enum HpStatus hp_solve(const struct HpQuiver *q,
                       const double *alpha,
                       size_t n_alpha,
                       uint64_t seed,
                       size_t starts,
                       struct HpSolution **out);

/**
 * As [`hp_solve`] with the momenta held at zero.
 */
enum HpStatus hp_solve_polygon(const struct HpQuiver *q,
                               const double *alpha,
                               size_t n_alpha,
                               uint64_t seed,
                               size_t starts,
                               struct HpSolution **out);

enum HpStatus hp_solution_from_json(const char *json, struct HpSolution **out);

/**
 * Pretty JSON solution document.
 */
enum HpStatus hp_solution_to_json(const struct HpSolution *s, char **out);

/**
 * Aggregate residual, recomputed from the stored representation.
 */
enum HpStatus hp_solution_residual(const struct HpSolution *s, double *out);

/**
 * Numerical quotient dimension at the solution. Writes `-1` when the real
 * dimension is odd. Returns `HP_STATUS_SINGULAR_POINT` (with outputs still
 * written) when the rank gap is below the regularity threshold.
 */
enum HpStatus hp_solution_dimension(const struct HpSolution *s,
                                    int64_t *quotient_complex,
                                    double *gap);

void hp_solution_free(struct HpSolution *s);

/**
 * Classification of the sign involution against I, J, K as JSON.
 */
enum HpStatus hp_brane_report_json(const struct HpQuiver *q,
                                   size_t samples,
                                   uint64_t seed,
                                   char **out);

void hp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERPOLYGON_H */
