#ifndef JOST_H
#define JOST_H

/* Generated by cbindgen from the jost-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. Anything but OK leaves a message in
 * `jost_last_error()`.
 */
typedef enum JostStatus {
  JOST_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  JOST_STATUS_NULL_ARGUMENT = 1,
  /**
   * Arguments failed validation (bad sheet string, bad tolerances, ...).
   */
  JOST_STATUS_INVALID_INPUT = 2,
  /**
   * The energy/rotation combination has no convergent contour.
   */
  JOST_STATUS_OUTSIDE_DOMAIN = 3,
  /**
   * The radial integration diverged, underflowed, or ran out of steps.
   */
  JOST_STATUS_DIVERGED = 4,
  /**
   * A channel momentum is too close to a threshold for this formulation.
   */
  JOST_STATUS_NEAR_THRESHOLD = 5,
  /**
   * A matrix that must be inverted is numerically singular.
   */
  JOST_STATUS_SINGULAR = 6,
  /**
   * The root search did not converge or wandered off.
   */
  JOST_STATUS_NO_CONVERGENCE = 7,
  /**
   * File or serialization failure.
   */
  JOST_STATUS_IO = 8,
  /**
   * An output buffer is too small; counts are still written.
   */
  JOST_STATUS_BUFFER_TOO_SMALL = 9,
  /**
   * Internal panic; state may be stale but memory is intact.
   */
  JOST_STATUS_PANIC = 10,
} JostStatus;

/**
 * A saved power series of the factorized Jost system around one center.
 * Opaque.
 */
typedef struct JostExpansion JostExpansion;

/**
 * A channel set, a potential, and solver settings: everything needed to
 * evaluate Jost matrices. Opaque.
 */
typedef struct JostModel JostModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message from the most recent failing call on this thread, empty if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *jost_last_error(void);

/**
 * The bundled two-channel benchmark model (thresholds 0 and 0.1, unit
 * masses, s waves, strongly coupled r^2 e^{-r} potential).
 */
struct JostModel *jost_model_noro_taylor(void);

/**
 * Model with V(r) = C r^power e^{-rate r}; `strength` is the row-major
 * n x n coupling matrix C. NULL on failure.
 */
struct JostModel *jost_model_new_poly_exp(const double *thresholds,
                                          const double *masses,
                                          const uint32_t *ells,
                                          size_t n_channels,
                                          double hbar,
                                          const double *strength,
                                          uint32_t power,
                                          double rate);

/**
 * Model with a potential interpolated from a whitespace-separated table
 * file (`r V11 V12 ...` with a `#` header line). NULL on failure.
 */
struct JostModel *jost_model_new_tabulated(const double *thresholds,
                                           const double *masses,
                                           const uint32_t *ells,
                                           size_t n_channels,
                                           double hbar,
                                           const char *path);

void jost_model_free(struct JostModel *model);

/**
 * Number of channels, 0 for NULL.
 */
size_t jost_model_n_channels(const struct JostModel *model);

/**
 * Integration window [r_min, r_max].
 */
enum JostStatus jost_model_set_limits(struct JostModel *model, double r_min, double r_max);

/**
 * Relative and absolute local error tolerances of the radial integrator.
 */
enum JostStatus jost_model_set_tolerances(struct JostModel *model, double rel_tol, double abs_tol);

/**
 * Pin the contour rotation angle (radians).
 */
enum JostStatus jost_model_set_rotation(struct JostModel *model, double theta);

/**
 * Let the solver pick the rotation angle per energy (the default).
 */
enum JostStatus jost_model_set_rotation_auto(struct JostModel *model);

/**
 * Channel momenta k_n(E) on a sheet; `k` holds 2*n doubles.
 */
enum JostStatus jost_momenta(const struct JostModel *model,
                             double e_re,
                             double e_im,
                             const char *sheet,
                             double *k);

/**
 * F_in and F_out at one energy on one sheet; each buffer holds 2*n*n
 * doubles (row-major, [re, im] pairs). Either buffer may be NULL to skip.
 */
enum JostStatus jost_compute(const struct JostModel *model,
                             double e_re,
                             double e_im,
                             const char *sheet,
                             double *f_in,
                             double *f_out);

/**
 * det F_in(E) on a sheet.
 */
enum JostStatus jost_det_fin(const struct JostModel *model,
                             double e_re,
                             double e_im,
                             const char *sheet,
                             double *det_re,
                             double *det_im);

/**
 * Flux-normalized S-matrix S = K^{1/2} F_out F_in^{-1} K^{-1/2};
 * `s` holds 2*n*n doubles.
 */
enum JostStatus jost_s_matrix(const struct JostModel *model,
                              double e_re,
                              double e_im,
                              const char *sheet,
                              double *s);

/**
 * Muller search for a zero of det F_in from `(guess_re, guess_im)`.
 * `iterations` may be NULL.
 */
enum JostStatus jost_find_spectral_point(const struct JostModel *model,
                                         double guess_re,
                                         double guess_im,
                                         const char *sheet,
                                         double tol,
                                         size_t max_iter,
                                         double *e_re,
                                         double *e_im,
                                         double *residual,
                                         size_t *iterations);

/**
 * Scan [e_min, e_max] on the physical sheet for bound states. Writes up to
 * `capacity` energies (real parts, ascending) into `energies` and the
 * number found into `count`; returns BUFFER_TOO_SMALL if more were found
 * than fit.
 */
enum JostStatus jost_bound_states(const struct JostModel *model,
                                  double e_min,
                                  double e_max,
                                  size_t n_samples,
                                  double *energies,
                                  size_t capacity,
                                  size_t *count);

/**
 * Power series of the factorized Jost system around `(center_re,
 * center_im)` up to `order`. NULL on failure.
 */
struct JostExpansion *jost_expansion_compute(const struct JostModel *model,
                                             double center_re,
                                             double center_im,
                                             size_t order);

/**
 * Load a table saved by `jost_expansion_save` (or the CLI). NULL on failure.
 */
struct JostExpansion *jost_expansion_load(const char *path);

enum JostStatus jost_expansion_save(const struct JostExpansion *expansion, const char *path);

void jost_expansion_free(struct JostExpansion *expansion);

/**
 * Expansion center; both outputs required.
 */
enum JostStatus jost_expansion_center(const struct JostExpansion *expansion,
                                      double *center_re,
                                      double *center_im);

/**
 * Truncation order M, 0 for NULL.
 */
size_t jost_expansion_order(const struct JostExpansion *expansion);

/**
 * F_in, F_out from the table at one energy and sheet; same buffer layout
 * as `jost_compute`. Either buffer may be NULL to skip.
 */
enum JostStatus jost_expansion_eval(const struct JostExpansion *expansion,
                                    double e_re,
                                    double e_im,
                                    const char *sheet,
                                    double *f_in,
                                    double *f_out);

/**
 * det F_in from the table (threshold-safe form).
 */
enum JostStatus jost_expansion_det(const struct JostExpansion *expansion,
                                   double e_re,
                                   double e_im,
                                   const char *sheet,
                                   double *det_re,
                                   double *det_im);

/**
 * Muller search on the table's determinant; microseconds per root.
 * `iterations` may be NULL.
 */
enum JostStatus jost_expansion_find_root(const struct JostExpansion *expansion,
                                         double guess_re,
                                         double guess_im,
                                         const char *sheet,
                                         double tol,
                                         size_t max_iter,
                                         double *e_re,
                                         double *e_im,
                                         double *residual,
                                         size_t *iterations);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JOST_H */
