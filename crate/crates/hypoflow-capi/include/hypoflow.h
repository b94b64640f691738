#ifndef HYPOFLOW_H
#define HYPOFLOW_H

/* Generated by cbindgen from hypoflow-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum HfStatus {
  /**
   * Success.
   */
  HF_STATUS_OK = 0,
  /**
   * A pointer argument was null or a parameter was out of range.
   */
  HF_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The model name or model parameters were rejected.
   */
  HF_STATUS_INVALID_MODEL = 2,
  /**
   * A numerical routine failed (non-convergence, degeneracy, ...).
   */
  HF_STATUS_NUMERICAL = 3,
} HfStatus;

/**
 * Opaque handle to a built model (generator decomposition plus metadata).
 */
typedef struct HfModel HfModel;

/**
 * Kernel dimensions and classification of a model.
 */
typedef struct HfModelInfo {
  /**
   * Dimension of the discretized state space.
   */
  uintptr_t dimension;
  uintptr_t ker_l_dim;
  uintptr_t ker_ls_dim;
  /**
   * 1 when coercive, 0 when hypocoercive.
   */
  int32_t coercive;
} HfModelInfo;

/**
 * Structural and lift diagnostics for a model.
 */
typedef struct HfLiftReport {
  /**
   * Weighted norm of the dissipative-kernel projection of the
   * conservative part (zero for a valid lift).
   */
  double php_residual;
  /**
   * Spectral gap of the dissipative part on its kernel complement.
   */
  double coercivity_lambda_s;
  /**
   * 1 when the overdamped kernel equals the full kernel.
   */
  int32_t kernel_equal;
  double second_order_residual;
  double first_order_residual;
  /**
   * Smallest singular value of the lift metric on the lifted range;
   * +infinity when the range is trivial (coercive branch).
   */
  double s_tilde_m;
  /**
   * 1 when the model is coercive (trivial lift).
   */
  int32_t coercive;
} HfLiftReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the most recent error message (UTF-8, NUL-terminated) into `buf`.
 * Returns the full message length in bytes, excluding the terminator; the
 * copy is truncated to `cap - 1` bytes. `buf` may be null to query the
 * length only.
 */
uintptr_t hf_last_error(char *buf, uintptr_t cap);

/**
 * Build a catalog model (or load a `.json` Lindblad model file) and store
 * an owned handle in `out`. Free it with [`hf_model_free`].
 *
 * # Safety
 * `name` must be a NUL-terminated UTF-8 string and `out` a valid pointer.
 */
enum HfStatus hf_model_build(const char *name,
                             double m,
                             double gamma,
                             uintptr_t n_x,
                             uintptr_t n_v,
                             struct HfModel **out);

/**
 * Release a model handle. Null is a no-op.
 *
 * # Safety
 * `model` must have come from [`hf_model_build`] and not be freed twice.
 */
void hf_model_free(struct HfModel *model);

/**
 * Kernel dimensions and classification of the model.
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
enum HfStatus hf_model_info(const struct HfModel *model, struct HfModelInfo *out);

/**
 * Spectral gap and kernel dimension of the full generator.
 *
 * # Safety
 * All pointers must be valid.
 */
enum HfStatus hf_spectral_gap(const struct HfModel *model,
                              double *out_gap,
                              uintptr_t *out_kernel_dim);

/**
 * Spectral gap of the overdamped-limit generator. Fails with
 * `HF_STATUS_NUMERICAL` when the reduced generator has no spectrum
 * outside its kernel.
 *
 * # Safety
 * All pointers must be valid.
 */
enum HfStatus hf_overdamped_gap(const struct HfModel *model, double *out_gap);

/**
 * Lift diagnostics with the default lift metric.
 *
 * # Safety
 * All pointers must be valid.
 */
enum HfStatus hf_lift_check(const struct HfModel *model, struct HfLiftReport *out);

/**
 * Spectral gaps over a caller-supplied friction grid. `gaps` must have
 * room for `n` values.
 *
 * # Safety
 * `gammas` and `gaps` must point to `n` readable / writable doubles.
 */
enum HfStatus hf_rate_scan_gaps(const struct HfModel *model,
                                const double *gammas,
                                uintptr_t n,
                                double *gaps);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPOFLOW_H */
