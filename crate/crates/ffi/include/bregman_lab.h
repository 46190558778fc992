#ifndef BREGMAN_LAB_H
#define BREGMAN_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BlgStatus {
  BLG_STATUS_OK = 0,
  BLG_STATUS_NULL_POINTER = 1,
  BLG_STATUS_INVALID_ARGUMENT = 2,
  BLG_STATUS_DOMAIN = 3,
  BLG_STATUS_DIMENSION_MISMATCH = 4,
  BLG_STATUS_NOT_POSITIVE_DEFINITE = 5,
  BLG_STATUS_NO_CONVERGENCE = 6,
  BLG_STATUS_PARSE = 7,
  BLG_STATUS_VALIDATION = 8,
  BLG_STATUS_INTERNAL = 9,
} BlgStatus;

typedef enum BlgMatrixKind {
  BLG_MATRIX_KIND_CLASSICAL = 0,
  BLG_MATRIX_KIND_UMEGAKI = 1,
  BLG_MATRIX_KIND_QUANTUM = 2,
} BlgMatrixKind;

typedef struct BlgGenerator BlgGenerator;

typedef struct BlgScenario BlgScenario;

typedef struct BlgSet BlgSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. Valid until the next call.
 */
const char *blg_last_error_message(void);

/**
 * Creates a generator by identifier (`sq_norm`, `neg_entropy`, `mat_classical`,
 * `mat_umegaki`, `mat_quantum`).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a writable pointer.
 */
enum BlgStatus blg_generator_new(const char *name, size_t dimension, struct BlgGenerator **out);

/**
 * # Safety
 * `g` must come from [`blg_generator_new`] and not be freed twice.
 */
void blg_generator_free(struct BlgGenerator *g);

/**
 * `D_g(x, y)` for vectors of length `len`.
 *
 * # Safety
 * `x` and `y` must point to `len` doubles.
 */
enum BlgStatus blg_bregman_distance(const struct BlgGenerator *g,
                                    const double *x,
                                    const double *y,
                                    size_t len,
                                    double *out);

/**
 * Signed residual of the three-point identity.
 *
 * # Safety
 * `x`, `y` and `z` must point to `len` doubles.
 */
enum BlgStatus blg_three_point_residual(const struct BlgGenerator *g,
                                        const double *x,
                                        const double *y,
                                        const double *z,
                                        size_t len,
                                        double *out);

/**
 * Closed-form matrix divergence of two symmetric `n × n` matrices in row-major order.
 *
 * # Safety
 * `a` and `b` must point to `n * n` doubles.
 */
enum BlgStatus blg_matrix_divergence(enum BlgMatrixKind kind,
                                     const double *a,
                                     const double *b,
                                     size_t n,
                                     double *out);

/**
 * # Safety
 * `center` must point to `len` doubles.
 */
enum BlgStatus blg_set_ball(const double *center, size_t len, double radius, struct BlgSet **out);

/**
 * # Safety
 * `lower` and `upper` must point to `len` doubles.
 */
enum BlgStatus blg_set_box(const double *lower,
                           const double *upper,
                           size_t len,
                           struct BlgSet **out);

/**
 * # Safety
 * `out` must be a writable pointer.
 */
enum BlgStatus blg_set_simplex(size_t dimension, struct BlgSet **out);

/**
 * # Safety
 * `s` must come from a `blg_set_*` constructor and not be freed twice.
 */
void blg_set_free(struct BlgSet *s);

/**
 * Bregman projection of `x` onto `set`. Writes `len` doubles to `out_point`
 * and, when non-null, the sampled certificate violation to `out_certificate`.
 *
 * # Safety
 * `x` and `out_point` must point to `len` doubles.
 */
enum BlgStatus blg_bregman_project(const struct BlgGenerator *g,
                                   const struct BlgSet *set,
                                   const double *x,
                                   size_t len,
                                   double *out_point,
                                   double *out_certificate);

/**
 * Loads and validates a scenario file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum BlgStatus blg_scenario_load(const char *path, struct BlgScenario **out);

/**
 * # Safety
 * `s` must come from [`blg_scenario_load`] and not be freed twice.
 */
void blg_scenario_free(struct BlgScenario *s);

/**
 * Runs a command (`distance`, `project`, `classify`, `barycenter`, `verify`,
 * `all`) and returns the report as JSON, to be released with [`blg_string_free`].
 * `out_exit_code`, when non-null, receives the command-line exit code.
 *
 * # Safety
 * `command` must be a NUL-terminated string and `out_json` a writable pointer.
 */
enum BlgStatus blg_run(const struct BlgScenario *scenario,
                       const char *command,
                       char **out_json,
                       int32_t *out_exit_code);

/**
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void blg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BREGMAN_LAB_H */
