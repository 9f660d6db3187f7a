#ifndef NEEDLE_LAB_H
#define NEEDLE_LAB_H

/* Generated by cbindgen from needle-lab-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible call.
 */
typedef enum NlStatus {
  NL_STATUS_OK = 0,
  /**
   * A pointer argument was null.
   */
  NL_STATUS_NULL_POINTER = 1,
  /**
   * A parameter was rejected (non-finite, out of domain, wrong variant).
   */
  NL_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A grid dimension or cap diameter was not positive.
   */
  NL_STATUS_NON_POSITIVE_DIMENSION = 3,
  /**
   * A shape length was negative.
   */
  NL_STATUS_NEGATIVE_LENGTH = 4,
  /**
   * Regime classification with the cap diameter at or above the cell
   * height.
   */
  NL_STATUS_SIGMA_EXCEEDS_CELL = 5,
  /**
   * The quadrature refinement cap was reached before convergence.
   */
  NL_STATUS_NO_CONVERGENCE = 6,
} NlStatus;

/**
 * Problem variant selector.
 */
typedef enum NlVariant {
  NL_VARIANT_NEEDLE2D = 0,
  NL_VARIANT_SPHEROCYLINDER2D = 1,
  NL_VARIANT_NEEDLE3D = 2,
  NL_VARIANT_SPHEROCYLINDER3D = 3,
} NlVariant;

/**
 * Length regime of a result.
 */
typedef enum NlRegime {
  NL_REGIME_SHORT = 0,
  NL_REGIME_MID_B = 1,
  NL_REGIME_MID_A = 2,
  NL_REGIME_LONG = 3,
} NlRegime;

/**
 * Opaque evaluation context: quadrature settings plus the worker count
 * used by the Monte Carlo estimator (0 = all cores).
 */
typedef struct NlContext NlContext;

/**
 * A probability and the regime that produced it.
 */
typedef struct NlProbability {
  double p;
  enum NlRegime regime;
} NlProbability;

/**
 * Monte Carlo tally.
 */
typedef struct NlSimResult {
  uint64_t n_all;
  uint64_t n_coll;
  double p_hat;
  double std_err;
  uint64_t seed;
} NlSimResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a context with default settings. Free with [`nl_context_free`].
 */
struct NlContext *nl_context_new(void);

/**
 * Creates a context with explicit quadrature settings and worker count.
 * Returns null if the settings are invalid.
 */
struct NlContext *nl_context_with_settings(uint32_t intervals_per_unit,
                                           double epsilon,
                                           uint32_t max_refinements,
                                           uint32_t threads);

/**
 * Frees a context returned by one of the constructors. Null is a no-op.
 *
 * # Safety
 * `ctx` must have been returned by [`nl_context_new`] or
 * [`nl_context_with_settings`] and not freed before.
 */
void nl_context_free(struct NlContext *ctx);

/**
 * Closed-form intersection probability on an `a` by `b` grid cell.
 * `sigma` is the cap diameter and is ignored for needle variants.
 *
 * # Safety
 * `ctx` must be a live context and `out` a valid pointer.
 */
enum NlStatus nl_prob(const struct NlContext *ctx,
                      enum NlVariant variant,
                      double l,
                      double sigma,
                      double a,
                      double b,
                      struct NlProbability *out);

/**
 * Closed-form intersection probability against a single family of
 * parallel lines with spacing `b` (the infinite-width limit).
 *
 * # Safety
 * `ctx` must be a live context and `out` a valid pointer.
 */
enum NlStatus nl_prob_single_family(const struct NlContext *ctx,
                                    enum NlVariant variant,
                                    double l,
                                    double sigma,
                                    double b,
                                    struct NlProbability *out);

/**
 * Monte Carlo estimate with `n` trials. Deterministic for a fixed seed,
 * independent of the context's worker count.
 *
 * # Safety
 * `ctx` must be a live context and `out` a valid pointer.
 */
enum NlStatus nl_simulate(const struct NlContext *ctx,
                          enum NlVariant variant,
                          double l,
                          double sigma,
                          double a,
                          double b,
                          uint64_t n,
                          uint64_t seed,
                          struct NlSimResult *out);

/**
 * Monte Carlo estimate against a single line family with spacing `b`.
 *
 * # Safety
 * `ctx` must be a live context and `out` a valid pointer.
 */
enum NlStatus nl_simulate_single_family(const struct NlContext *ctx,
                                        enum NlVariant variant,
                                        double l,
                                        double sigma,
                                        double b,
                                        uint64_t n,
                                        uint64_t seed,
                                        struct NlSimResult *out);

/**
 * Static, nul-terminated description of a status code.
 */
const char *nl_status_message(enum NlStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NEEDLE_LAB_H */
