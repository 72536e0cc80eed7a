#ifndef FDLAB_H
#define FDLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FdlabRateModel {
  FdlabRateModel_Exponential = 0,
  FdlabRateModel_Polynomial = 1,
} FdlabRateModel;

typedef enum FdlabStatus {
  FdlabStatus_Ok = 0,
  FdlabStatus_NullPointer = 1,
  /**
   * Configuration, domain or contract violation.
   */
  FdlabStatus_InvalidArgument = 2,
  /**
   * A solver failed to converge or a fit was degenerate.
   */
  FdlabStatus_Numerical = 3,
  FdlabStatus_BufferTooSmall = 4,
  FdlabStatus_Panic = 5,
} FdlabStatus;

/**
 * Nodal field handle.
 */
typedef struct FdlabField FdlabField;

/**
 * Radial grid handle.
 */
typedef struct FdlabGrid FdlabGrid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the calling thread's last error message into `buf` (NUL-terminated, truncated to
 * `len`). Returns the full message length in bytes, excluding the terminator.
 */
size_t fdlab_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fdlab_version(void);

/**
 * `n = 1` is the interval `(0, radius)`; `n >= 2` is the ball of that radius.
 */
enum FdlabStatus fdlab_grid_new(size_t n,
                                double radius,
                                size_t intervals,
                                double stretch,
                                struct FdlabGrid **grid);

void fdlab_grid_free(struct FdlabGrid *grid);

/**
 * Number of nodes, `intervals + 1`; 0 for a null handle.
 */
size_t fdlab_grid_len(const struct FdlabGrid *grid);

enum FdlabStatus fdlab_grid_nodes(const struct FdlabGrid *grid, double *nodes, size_t len);

enum FdlabStatus fdlab_dirichlet_lambda1(const struct FdlabGrid *grid, double *lambda1);

/**
 * Field from `len` nodal values; Dirichlet nodes must be zero.
 */
enum FdlabStatus fdlab_field_new(const struct FdlabGrid *grid,
                                 const double *values,
                                 size_t len,
                                 struct FdlabField **field);

void fdlab_field_free(struct FdlabField *field);

size_t fdlab_field_len(const struct FdlabField *field);

enum FdlabStatus fdlab_field_values(const struct FdlabField *field, double *values, size_t len);

/**
 * `∫ f` over the ball.
 */
enum FdlabStatus fdlab_field_integrate(const struct FdlabField *field, double *value);

/**
 * `F(v) = ∫ |∇v|² − b v² − (2/(p+1)) v^{p+1}`.
 */
enum FdlabStatus fdlab_energy(const struct FdlabField *field, double p, double b, double *value);

/**
 * Positive radial solution of `−Δv − bv = v^p`, vanishing on the boundary.
 */
enum FdlabStatus fdlab_stationary_solve(const struct FdlabGrid *grid,
                                        double p,
                                        double b,
                                        struct FdlabField **field,
                                        double *alpha);

/**
 * Rescaled flow from `initial` to `t_end`; writes the final state. With `stabilize != 0`
 * the amplitude is rebalanced window by window.
 */
enum FdlabStatus fdlab_rescaled_run(const struct FdlabField *initial,
                                    double p,
                                    double b,
                                    double t_end,
                                    int stabilize,
                                    struct FdlabField **field);

/**
 * `∫_{R^n} ξ̄^{2n/(n−2)}` for a bubble of concentration `lambda`.
 */
enum FdlabStatus fdlab_bubble_mass(size_t n, double lambda, double *value);

/**
 * Interaction integrals of two bubbles at the given separation.
 */
enum FdlabStatus fdlab_interaction(size_t n,
                                   double lambda1,
                                   double lambda2,
                                   double separation,
                                   double *i1,
                                   double *i2);

/**
 * Best centered corrected bubble `α·ξ_λ` for `field`; `b` twists the fitting norm.
 */
enum FdlabStatus fdlab_fit_bubble(const struct FdlabField *field,
                                  double b,
                                  double *lambda,
                                  double *alpha,
                                  double *relative_residual);

/**
 * Classify the decay of `e(t)` on the tail of `[t_min, t_max]`.
 */
enum FdlabStatus fdlab_fit_rate(const double *t,
                                const double *e,
                                size_t len,
                                double t_min,
                                double t_max,
                                double tail_fraction,
                                enum FdlabRateModel *model,
                                double *gamma,
                                double *theta);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FDLAB_H */
