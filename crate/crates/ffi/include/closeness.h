#ifndef CLOSENESS_H
#define CLOSENESS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ClosenessStatus {
  CLOSENESS_STATUS_OK = 0,
  CLOSENESS_STATUS_NULL_POINTER = 1,
  CLOSENESS_STATUS_INVALID_ARGUMENT = 2,
  CLOSENESS_STATUS_UNSUPPORTED_DIMENSION = 3,
  CLOSENESS_STATUS_NUMERIC = 4,
  CLOSENESS_STATUS_SAMPLER = 5,
  CLOSENESS_STATUS_IO = 6,
  CLOSENESS_STATUS_BUFFER_TOO_SMALL = 7,
  CLOSENESS_STATUS_PANIC = 8,
} ClosenessStatus;

typedef enum ClosenessBaseMeasure {
  CLOSENESS_BASE_MEASURE_FISHER = 0,
  CLOSENESS_BASE_MEASURE_LEBESGUE = 1,
} ClosenessBaseMeasure;

typedef enum ClosenessDensityMode {
  CLOSENESS_DENSITY_MODE_INTRINSIC = 0,
  CLOSENESS_DENSITY_MODE_INTEGRATION = 1,
} ClosenessDensityMode;

typedef enum ClosenessModel {
  CLOSENESS_MODEL_CLOSENESS = 0,
  CLOSENESS_MODEL_GELMAN = 1,
} ClosenessModel;

// Posterior draws from [`closeness_fit`].
typedef struct ClosenessChainSet ClosenessChainSet;

// Grouped binomial observations.
typedef struct ClosenessGroups ClosenessGroups;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The string
// stays valid until the next failing call on the same thread.
const char *closeness_last_error_message(void);

// `D(mu || theta)` for two points with `len` coordinates each.
//
// # Safety
// `mu` and `theta` must point to `len` doubles; `out` must be writable.
enum ClosenessStatus closeness_kl_divergence(const double *mu,
                                             const double *theta,
                                             size_t len,
                                             double *out);

// Volume of the multinomial manifold `M_n`.
//
// # Safety
// `out` must be writable.
enum ClosenessStatus closeness_manifold_volume(size_t n, double *out);

// `ln Γ(x)` for `x > 0`.
//
// # Safety
// `out` must be writable.
enum ClosenessStatus closeness_log_gamma(double x, double *out);

// Log density of `theta` under the closeness conditional `theta | mu`.
//
// # Safety
// `mu` and `theta` must point to `len` doubles; `out` must be writable.
enum ClosenessStatus closeness_conditional_log_density(const double *mu,
                                                       const double *theta,
                                                       size_t len,
                                                       double gamma,
                                                       enum ClosenessBaseMeasure base_measure,
                                                       enum ClosenessDensityMode mode,
                                                       double *out);

// Reads `Dirichlet(alpha)` as a closeness conditional. On success
// `*centered` tells whether a center exists; if so `mu_out` (length
// `len`) and `*gamma_out` hold it, otherwise they are left untouched.
//
// # Safety
// `alpha` and `mu_out` must point to `len` doubles; `gamma_out` and
// `centered` must be writable.
enum ClosenessStatus closeness_interpret_dirichlet(const double *alpha,
                                                   size_t len,
                                                   enum ClosenessBaseMeasure base_measure,
                                                   double *mu_out,
                                                   double *gamma_out,
                                                   bool *centered);

// Builds a group set from `len` pairs `(y[i], n[i])`.
//
// # Safety
// `y` and `n` must point to `len` values; `out` must be writable.
enum ClosenessStatus closeness_groups_new(const uint64_t *y,
                                          const uint64_t *n,
                                          size_t len,
                                          struct ClosenessGroups **out);

// The embedded 71-group rat-tumor table.
//
// # Safety
// `out` must be writable.
enum ClosenessStatus closeness_groups_rat_tumor(struct ClosenessGroups **out);

// Number of groups.
//
// # Safety
// `groups` must be a live handle; `out` must be writable.
enum ClosenessStatus closeness_groups_len(const struct ClosenessGroups *groups, size_t *out);

// # Safety
// `groups` must be null or a handle not yet freed.
void closeness_groups_free(struct ClosenessGroups *groups);

// Samples the closeness or Gelman model with default priors.
//
// # Safety
// `groups` must be a live handle; `out` must be writable.
enum ClosenessStatus closeness_fit(const struct ClosenessGroups *groups,
                                   enum ClosenessModel model,
                                   size_t chains,
                                   size_t iterations,
                                   size_t burn_in,
                                   uint64_t seed,
                                   struct ClosenessChainSet **out);

// Number of chains, kept draws per chain and parameters.
//
// # Safety
// `set` must be a live handle; the out pointers must be writable.
enum ClosenessStatus closeness_chainset_shape(const struct ClosenessChainSet *set,
                                              size_t *chains,
                                              size_t *draws,
                                              size_t *params);

// Name of parameter `index`, owned by `set`.
//
// # Safety
// `set` must be a live handle; `out` must be writable.
enum ClosenessStatus closeness_chainset_param_name(const struct ClosenessChainSet *set,
                                                   size_t index,
                                                   const char **out);

// Copies the draws of parameter `name` in chain `chain` into `buf`.
// `*written` receives the number of draws; if `capacity` is smaller the
// call fails with `BUFFER_TOO_SMALL` and nothing is copied.
//
// # Safety
// `set` must be a live handle, `name` a NUL-terminated string, `buf`
// writable for `capacity` doubles and `written` writable.
enum ClosenessStatus closeness_chainset_draws(const struct ClosenessChainSet *set,
                                              const char *name,
                                              size_t chain,
                                              double *buf,
                                              size_t capacity,
                                              size_t *written);

// Posterior mean and median of parameter `name` over all chains.
//
// # Safety
// `set` must be a live handle, `name` a NUL-terminated string and the
// out pointers writable.
enum ClosenessStatus closeness_chainset_summary(const struct ClosenessChainSet *set,
                                                const char *name,
                                                double *mean,
                                                double *median);

// # Safety
// `set` must be null or a handle not yet freed.
void closeness_chainset_free(struct ClosenessChainSet *set);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CLOSENESS_H */
