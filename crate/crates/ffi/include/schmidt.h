#ifndef SCHMIDT_H
#define SCHMIDT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SchmidtStatus {
  SCHMIDT_STATUS_OK = 0,
  SCHMIDT_STATUS_NULL_POINTER = 1,
  SCHMIDT_STATUS_INVALID_INPUT = 2,
  SCHMIDT_STATUS_CONVERGENCE = 3,
  SCHMIDT_STATUS_INCOMPLETE_BASIS = 4,
  SCHMIDT_STATUS_PANIC = 5,
} SchmidtStatus;

/**
 * Opaque density operator.
 */
typedef struct SchmidtDensity SchmidtDensity;

/**
 * Opaque Hermitian observable.
 */
typedef struct SchmidtObservable SchmidtObservable;

/**
 * Solver settings; start from [`schmidt_solver_config_default`].
 */
typedef struct SchmidtSolverConfig {
  size_t restarts;
  size_t max_iter;
  double tol_lambda;
  double tol_residual;
  uint64_t seed;
} SchmidtSolverConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length, 0 if none.
 */
size_t schmidt_last_error(char *buf, size_t len);

struct SchmidtSolverConfig schmidt_solver_config_default(void);

/**
 * Density operator from `(d1·d2)²` complex entries.
 */
enum SchmidtStatus schmidt_density_new(size_t d1,
                                       size_t d2,
                                       const double *data,
                                       struct SchmidtDensity **out);

/**
 * Projector onto a unit vector of `d1·d2` complex amplitudes.
 */
enum SchmidtStatus schmidt_density_from_pure(size_t d1,
                                             size_t d2,
                                             const double *amplitudes,
                                             struct SchmidtDensity **out);

void schmidt_density_free(struct SchmidtDensity *rho);

/**
 * Hermitian observable from `(d1·d2)²` complex entries.
 */
enum SchmidtStatus schmidt_observable_new(size_t d1,
                                          size_t d2,
                                          const double *data,
                                          struct SchmidtObservable **out);

void schmidt_observable_free(struct SchmidtObservable *l);

/**
 * Largest r-SE value of `l`, a lower bound on `f12^(r)(l)`. `cfg` may be null.
 */
enum SchmidtStatus schmidt_f12(const struct SchmidtObservable *l,
                               size_t r,
                               const struct SchmidtSolverConfig *cfg,
                               double *out);

/**
 * Witness test `tr(ρL) > f12^(r)(L)`. Writes the margin and 1 if the
 * Schmidt number exceeds `r`, 0 if inconclusive.
 */
enum SchmidtStatus schmidt_certify(const struct SchmidtDensity *rho,
                                   const struct SchmidtObservable *l,
                                   size_t r,
                                   const struct SchmidtSolverConfig *cfg,
                                   double *margin,
                                   int32_t *certified);

/**
 * Schmidt-number readout from entanglement quasi-probabilities. On
 * `IncompleteBasis` the bracket `[lower, upper]` is still written and
 * `value` is 0.
 */
enum SchmidtStatus schmidt_estimate(const struct SchmidtDensity *rho,
                                    const struct SchmidtSolverConfig *cfg,
                                    size_t *value,
                                    size_t *lower,
                                    size_t *upper);

/**
 * Minimum eigenvalue of the partial transpose; `npt` is 1 when negative.
 */
enum SchmidtStatus schmidt_is_npt(const struct SchmidtDensity *rho,
                                  double *min_eigenvalue,
                                  int32_t *npt);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCHMIDT_H */
