#ifndef VAREST_H
#define VAREST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum VarestStatus {
  VAREST_STATUS_OK = 0,
  VAREST_STATUS_NULL_POINTER = 1,
  /**
   * Malformed input: bad sizes, indices, files or parameters.
   */
  VAREST_STATUS_INVALID_INPUT = 2,
  /**
   * Degenerate data, zero denominators and other numeric failures.
   */
  VAREST_STATUS_NUMERIC_ERROR = 3,
  VAREST_STATUS_PANIC = 4,
} VarestStatus;

typedef enum VarestEstimatorKind {
  VAREST_ESTIMATOR_KIND_UNBIASED = 0,
  VAREST_ESTIMATOR_KIND_RATIO = 1,
  VAREST_ESTIMATOR_KIND_REGRESSION = 2,
  VAREST_ESTIMATOR_KIND_KHOSH = 3,
  VAREST_ESTIMATOR_KIND_SAHAI_RAY = 4,
  VAREST_ESTIMATOR_KIND_GENERALIZED = 5,
  /**
   * Regression with the slope taken from the population moments.
   */
  VAREST_ESTIMATOR_KIND_REGRESSION_POPULATION = 6,
} VarestEstimatorKind;

/**
 * Opaque population-moments handle.
 */
typedef struct VarestMoments VarestMoments;

/**
 * Opaque population handle.
 */
typedef struct VarestPopulation VarestPopulation;

/**
 * Published summary statistics, as in a parameter file.
 */
typedef struct VarestSummary {
  size_t population_size;
  double s_y;
  double s_x;
  double c_y;
  double c_x;
  double rho_yx;
  double c_yx;
  double beta2y;
  double beta2x;
  double lambda22;
} VarestSummary;

/**
 * Plain copy of the scalar moments. Unavailable values are NaN.
 */
typedef struct VarestMomentsView {
  /**
   * 0 when unknown.
   */
  size_t population_size;
  size_t n;
  double theta;
  double mean_y;
  double mean_x;
  double s2_y;
  double s2_x;
  double cv_y;
  double cv_x;
  double rho_yx;
  double lambda40;
  double lambda04;
  double lambda22;
  double beta2y_star;
  double beta2x_star;
  double lambda22_star;
} VarestMomentsView;

/**
 * Estimator choice with all constants flattened; fields not used by `kind`
 * are ignored. `a`, `b`, `alpha` serve `Khosh`; `w` serves `SahaiRay`;
 * `a`, `c`, `d`, `alpha1`, `alpha`, `beta` serve `Generalized`.
 */
typedef struct VarestEstimatorConfig {
  enum VarestEstimatorKind kind;
  double a;
  double b;
  double c;
  double d;
  double alpha1;
  double alpha;
  double beta;
  double w;
} VarestEstimatorConfig;

typedef struct VarestEmpiricalReport {
  double mean_estimate;
  double empirical_bias;
  double empirical_mse;
  double stderr_of_mean;
  uint64_t negative_estimate_count;
  uint64_t failed_sample_count;
  uint64_t evaluated_count;
  /**
   * Number of enumerated samples; 0 for simulation.
   */
  uint64_t sample_space_size;
} VarestEmpiricalReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failed call on this thread, or null. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *varest_last_error_message(void);

/**
 * Copies `len` paired values into a new population.
 *
 * # Safety
 * `y` and `x` must each point to `len` readable doubles; `out` must be
 * writable.
 */
enum VarestStatus varest_population_new(const double *y,
                                        const double *x,
                                        size_t len,
                                        struct VarestPopulation **out);

/**
 * # Safety
 * `pop` must be null or a handle from [`varest_population_new`] not yet freed.
 */
void varest_population_free(struct VarestPopulation *pop);

/**
 * # Safety
 * `pop` must be a live population handle; `out` must be writable.
 */
enum VarestStatus varest_population_len(const struct VarestPopulation *pop, size_t *out);

/**
 * Moments of a population for samples of size `n`; `fpc` selects
 * `theta = 1/n - 1/N` instead of `1/n`.
 *
 * # Safety
 * `pop` must be a live population handle; `out` must be writable.
 */
enum VarestStatus varest_moments_from_population(const struct VarestPopulation *pop,
                                                 size_t n,
                                                 bool fpc,
                                                 struct VarestMoments **out);

/**
 * # Safety
 * `summary` must be readable; `out` must be writable.
 */
enum VarestStatus varest_moments_from_summary(const struct VarestSummary *summary,
                                              size_t n,
                                              bool fpc,
                                              struct VarestMoments **out);

/**
 * Reads a `key = value` parameter file. `n = 0` takes the sample size from
 * the file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum VarestStatus varest_moments_load_params(const char *path,
                                             size_t n,
                                             bool fpc,
                                             struct VarestMoments **out);

/**
 * # Safety
 * `pm` must be null or a live moments handle.
 */
void varest_moments_free(struct VarestMoments *pm);

/**
 * # Safety
 * `pm` must be a live moments handle; `out` must be writable.
 */
enum VarestStatus varest_moments_view(const struct VarestMoments *pm,
                                      struct VarestMomentsView *out);

/**
 * Fills the free constant of `cfg` (alpha of t_k, w of t_s, alpha1 of t)
 * with its MSE-minimizing value.
 *
 * # Safety
 * Pointers must be valid; `out` may alias `cfg`.
 */
enum VarestStatus varest_optimal_params(const struct VarestMoments *pm,
                                        const struct VarestEstimatorConfig *cfg,
                                        struct VarestEstimatorConfig *out);

/**
 * First-order bias. `paper_literal` drops the theta factor from the bias of t_k.
 *
 * # Safety
 * Pointers must be valid.
 */
enum VarestStatus varest_theoretical_bias(const struct VarestMoments *pm,
                                          const struct VarestEstimatorConfig *cfg,
                                          bool paper_literal,
                                          double *out);

/**
 * First-order mean square error.
 *
 * # Safety
 * Pointers must be valid.
 */
enum VarestStatus varest_theoretical_mse(const struct VarestMoments *pm,
                                         const struct VarestEstimatorConfig *cfg,
                                         double *out);

/**
 * Percent relative efficiency `100 * mse_reference / mse_candidate`.
 *
 * # Safety
 * `out` must be writable.
 */
enum VarestStatus varest_pre(double mse_reference, double mse_candidate, double *out);

/**
 * Evaluates one estimator on the units at `indices` (0-based).
 *
 * # Safety
 * Handles must be live; `indices` must point to `len` readable values.
 */
enum VarestStatus varest_estimate(const struct VarestPopulation *pop,
                                  const struct VarestMoments *pm,
                                  const size_t *indices,
                                  size_t len,
                                  const struct VarestEstimatorConfig *cfg,
                                  bool clamp_nonnegative,
                                  double *out);

/**
 * Monte Carlo SRSWOR evaluation; writes `count` reports to `out`.
 *
 * # Safety
 * `pop` must be live; `cfgs` and `out` must each hold `count` elements.
 */
enum VarestStatus varest_simulate(const struct VarestPopulation *pop,
                                  size_t n,
                                  uint64_t replications,
                                  uint64_t seed,
                                  const struct VarestEstimatorConfig *cfgs,
                                  size_t count,
                                  struct VarestEmpiricalReport *out);

/**
 * Exact design moments by enumerating all samples of size `n`, refusing
 * sample spaces larger than `limit`.
 *
 * # Safety
 * As for [`varest_simulate`].
 */
enum VarestStatus varest_enumerate(const struct VarestPopulation *pop,
                                   size_t n,
                                   uint64_t limit,
                                   const struct VarestEstimatorConfig *cfgs,
                                   size_t count,
                                   struct VarestEmpiricalReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VAREST_H */
