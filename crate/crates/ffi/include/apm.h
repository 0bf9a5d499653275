#ifndef APM_H
#define APM_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum ApmStatus {
  APM_STATUS_OK = 0,
  APM_STATUS_NULL_POINTER = 1,
  APM_STATUS_DIMENSION_MISMATCH = 2,
  APM_STATUS_NOT_POSITIVE_DEFINITE = 3,
  APM_STATUS_NOT_SYMMETRIC = 4,
  APM_STATUS_NON_FINITE = 5,
  APM_STATUS_NO_CONVERGENCE = 6,
  APM_STATUS_DOMAIN_ERROR = 7,
  APM_STATUS_INVALID_STATE = 8,
  APM_STATUS_INFEASIBLE_ENERGY = 9,
  APM_STATUS_GRID_TOO_SMALL = 10,
  APM_STATUS_BUFFER_TOO_SMALL = 11,
  APM_STATUS_PANIC = 12,
} ApmStatus;

// Opaque covariance matrix of an `s`-mode state.
typedef struct ApmCovariance ApmCovariance;

// Opaque result of a noisy position measurement.
typedef struct ApmPosterior ApmPosterior;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Static description of a status code.
const char *apm_status_message(enum ApmStatus status);

// Message of the most recent failure on this thread. Valid until the next
// failing call on the same thread.
const char *apm_last_error(void);

// Builds an `s`-mode covariance from its `α_qq`, `α_qp` and `α_pp` blocks.
//
// # Safety
// Each block pointer must reference `s*s` readable doubles; `out` must be
// writable.
enum ApmStatus apm_covariance_new(size_t s,
                                  const double *qq,
                                  const double *qp,
                                  const double *pp,
                                  struct ApmCovariance **out);

// One-mode covariance `[[qq, qp], [qp, pp]]`.
//
// # Safety
// `out` must be writable.
enum ApmStatus apm_covariance_one_mode(double qq, double qp, double pp, struct ApmCovariance **out);

// Releases a covariance handle. Null is ignored.
//
// # Safety
// `cov` must come from this library and not have been freed.
void apm_covariance_free(struct ApmCovariance *cov);

// Number of modes, or 0 for a null handle.
//
// # Safety
// `cov` must be null or a live handle.
size_t apm_covariance_modes(const struct ApmCovariance *cov);

// Writes the `2s × 2s` covariance in row-major order to `out`.
//
// # Safety
// `cov` must be a live handle; `out` must have room for `len` doubles.
enum ApmStatus apm_covariance_full(const struct ApmCovariance *cov, double *out, size_t len);

// Symplectic eigenvalues in ascending order; `out` needs `s` slots.
//
// # Safety
// `cov` must be a live handle; `out` must have room for `len` doubles.
enum ApmStatus apm_symplectic_eigenvalues(const struct ApmCovariance *cov, double *out, size_t len);

// Smallest symplectic eigenvalue and whether the state is physical.
//
// # Safety
// `cov` must be a live handle; `nu_min` and `valid` must be writable.
enum ApmStatus apm_validate(const struct ApmCovariance *cov, double *nu_min, bool *valid);

// Von Neumann entropy in nats.
//
// # Safety
// `cov` must be a live handle; `out` must be writable.
enum ApmStatus apm_entropy(const struct ApmCovariance *cov, double *out);

// `g(x) = (x+1) ln(x+1) − x ln x`.
//
// # Safety
// `out` must be writable.
enum ApmStatus apm_g(double x, double *out);

// Posterior of a position measurement with noise covariance `beta`
// (`s × s`, row-major).
//
// # Safety
// `cov` must be a live handle; `beta` must reference `s*s` doubles where
// `s` is the mode count; `out` must be writable.
enum ApmStatus apm_posterior_new(const struct ApmCovariance *cov,
                                 const double *beta,
                                 struct ApmPosterior **out);

// Releases a posterior handle. Null is ignored.
//
// # Safety
// `post` must come from this library and not have been freed.
void apm_posterior_free(struct ApmPosterior *post);

// New covariance handle holding the posterior covariance.
//
// # Safety
// `post` must be a live handle; `out` must be writable.
enum ApmStatus apm_posterior_covariance(const struct ApmPosterior *post,
                                        struct ApmCovariance **out);

// Gains `K_q` and `K_p`, each `s × s` row-major.
//
// # Safety
// `post` must be a live handle; `k_q` and `k_p` must each have room for
// `len` doubles.
enum ApmStatus apm_posterior_gains(const struct ApmPosterior *post,
                                   double *k_q,
                                   double *k_p,
                                   size_t len);

// Posterior mean for outcome `x` (length `s`) of a centered prior.
//
// # Safety
// `post` must be a live handle; `x` must reference `s` doubles; `m_q` and
// `m_p` must each have room for `s` doubles.
enum ApmStatus apm_posterior_mean(const struct ApmPosterior *post,
                                  const double *x,
                                  double *m_q,
                                  double *m_p);

// Entropy reduction in nats for noise covariance `beta` (`s × s`).
//
// # Safety
// `cov` must be a live handle; `beta` must reference `s*s` doubles; `out`
// must be writable.
enum ApmStatus apm_entropy_reduction(const struct ApmCovariance *cov,
                                     const double *beta,
                                     double *out);

// One-mode entropy reduction in nats.
//
// # Safety
// `out` must be writable.
enum ApmStatus apm_er_one_mode(double alpha_qq,
                               double alpha_qp,
                               double alpha_pp,
                               double beta,
                               double *out);

// One-mode capacity for `H = (q² + p²)/2`. `beta = 0` is the exact
// measurement. The optimal `α_qq` and `α_pp` are written when the pointers
// are non-null.
//
// # Safety
// `value` must be writable; `alpha_qq` and `alpha_pp` must be null or
// writable.
enum ApmStatus apm_cea_one_mode(double beta,
                                double energy,
                                double *value,
                                double *alpha_qq,
                                double *alpha_pp);

// Capacity of the exact position measurement, `g(E − 1/2)`.
//
// # Safety
// `out` must be writable.
enum ApmStatus apm_cea_exact(double energy, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* APM_H */
