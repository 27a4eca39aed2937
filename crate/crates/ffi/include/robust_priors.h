#ifndef ROBUST_PRIORS_H
#define ROBUST_PRIORS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define RP_FAMILY_FLAT 0

#define RP_FAMILY_NORMAL 1

#define RP_FAMILY_STUDENT 2

#define RP_FAMILY_LPTN 3

#define RP_FAMILY_CTN 4

/*
 Status codes; the nonzero values match the command-line exit codes where
 they overlap.
 */
typedef enum RpStatus {
  RP_STATUS_OK = 0,
  RP_STATUS_NULL_POINTER = 1,
  RP_STATUS_CONFIG = 2,
  RP_STATUS_DATA = 3,
  RP_STATUS_NUMERICAL = 4,
  RP_STATUS_PANIC = 5,
  RP_STATUS_BUFFER_TOO_SMALL = 6,
} RpStatus;

/*
 Draws of all chains from one sampler run.
 */
typedef struct RpChains RpChains;

/*
 Reduced `(β₂, ln σ)` posterior.
 */
typedef struct RpTarget RpTarget;

typedef struct RpMoments {
  double mean;
  double sd;
  double log_normalizer;
  double sigma_sq_mean;
  double sigma_sq_var;
} RpMoments;

typedef struct RpHmcConfig {
  double step_size;
  size_t leapfrog_steps;
  size_t n_samples;
  size_t n_warmup;
  size_t n_chains;
  uint64_t seed;
} RpHmcConfig;

typedef struct RpSummary {
  double mean;
  double sd;
  double ess;
  double mcse;
} RpSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. The pointer stays
 valid until the next failing call on the same thread.
 */
const char *rp_last_error_message(void);

/*
 Log density of a standardized prior family at `z`. `hyper` is γ, ρ or ϱ
 and is ignored for the normal family.

 # Safety
 `out` must be null or point to writable memory for one `double`.
 */
enum RpStatus rp_prior_log_density(int tag, double hyper, double z, double *out);

/*
 Reduced target with `n` observations, a coefficient prior of family `tag`
 with location `mu2` and user-facing scaling `lambda2` (multiplied by `√n`),
 and the σ prior `σ^sigma_power / σ`.

 # Safety
 `out` must be null or point to writable memory for one handle.
 */
enum RpStatus rp_target_reduced(size_t n,
                                int tag,
                                double hyper,
                                double mu2,
                                double lambda2,
                                double sigma_power,
                                struct RpTarget **out);

/*
 # Safety
 `target` must be null or a handle from `rp_target_reduced` not yet freed.
 */
void rp_target_free(struct RpTarget *target);

/*
 Number of sampled coordinates, `p + 1`; 0 for a null handle.

 # Safety
 `target` must be null or a live handle.
 */
size_t rp_target_dim(const struct RpTarget *target);

/*
 Log posterior at `q = (β, ν)` and its gradient.

 # Safety
 `target` must be a live handle; `q` and `grad` (if not null) must hold
 `rp_target_dim(target)` doubles.
 */
enum RpStatus rp_log_posterior(const struct RpTarget *target,
                               const double *q,
                               double *log_density,
                               double *grad);

/*
 Posterior moments of `β₂` and `σ²` by quadrature.

 # Safety
 `target` must be a live handle and `out` writable.
 */
enum RpStatus rp_quadrature_moments(const struct RpTarget *target, struct RpMoments *out);

/*
 Default sampler settings.
 */
struct RpHmcConfig rp_hmc_config_default(void);

/*
 Run HMC on `target`.

 # Safety
 `target` must be a live handle, `config` readable and `out` writable.
 */
enum RpStatus rp_sample(const struct RpTarget *target,
                        const struct RpHmcConfig *config,
                        struct RpChains **out);

/*
 # Safety
 `chains` must be null or a handle from `rp_sample` not yet freed.
 */
void rp_chains_free(struct RpChains *chains);

/*
 Number of chains; 0 for a null handle.

 # Safety
 `chains` must be null or a live handle.
 */
size_t rp_chains_count(const struct RpChains *chains);

/*
 Draws per chain; 0 for a null handle.

 # Safety
 `chains` must be null or a live handle.
 */
size_t rp_chains_len(const struct RpChains *chains);

/*
 Copy coordinate `coord` of chain `chain` into `buf`, which holds `len`
 doubles; at least `rp_chains_len` are needed.

 # Safety
 `chains` must be a live handle and `buf` writable for `len` doubles.
 */
enum RpStatus rp_chains_copy(const struct RpChains *chains,
                             size_t chain,
                             size_t coord,
                             double *buf,
                             size_t len);

/*
 Pooled summary of coordinate `coord` (the last one is `ν = ln σ`).

 # Safety
 `chains` must be a live handle and `out` writable.
 */
enum RpStatus rp_chains_summary(const struct RpChains *chains, size_t coord, struct RpSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROBUST_PRIORS_H */
