#ifndef REGMOMENT_H
#define REGMOMENT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
enum RmStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  RM_STATUS_OK = 0,
  RM_STATUS_NULL_POINTER = 1,
  RM_STATUS_INVALID_ARGUMENT = 2,
  RM_STATUS_CONFIG = 3,
  RM_STATUS_UNPHYSICAL = 4,
  RM_STATUS_NUMERICAL = 5,
  RM_STATUS_IO = 6,
  RM_STATUS_BUFFER_TOO_SMALL = 7,
  RM_STATUS_PANIC = 8,
};
#ifndef __cplusplus
typedef int32_t RmStatus;
#endif // __cplusplus

/**
 * Opaque solver handle.
 */
typedef struct RmSolver RmSolver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *rm_last_error(void);

/**
 * Builds a solver from `key = value` config text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
RmStatus rm_solver_new(const char *text, struct RmSolver **out);

/**
 * Builds a solver from a config file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
RmStatus rm_solver_new_from_file(const char *path, struct RmSolver **out);

/**
 * Releases a solver. Null is ignored.
 *
 * # Safety
 * `solver` must come from `rm_solver_new*` and not be used afterwards.
 */
void rm_solver_free(struct RmSolver *solver);

/**
 * One step at the stable time step; the step size is stored in `dt` when
 * it is not null.
 *
 * # Safety
 * `solver` must be a live handle; `dt` null or writable.
 */
RmStatus rm_solver_step(struct RmSolver *solver, double *dt);

/**
 * Advances to time `t`, landing on it exactly.
 *
 * # Safety
 * `solver` must be a live handle.
 */
RmStatus rm_solver_run_until(struct RmSolver *solver, double t);

/**
 * Current simulation time, or NaN for a null handle.
 *
 * # Safety
 * `solver` must be null or a live handle.
 */
double rm_solver_time(const struct RmSolver *solver);

/**
 * Number of cells, or 0 for a null handle.
 *
 * # Safety
 * `solver` must be null or a live handle.
 */
uintptr_t rm_solver_cell_count(const struct RmSolver *solver);

/**
 * Velocity dimension `D`, or 0 for a null handle.
 *
 * # Safety
 * `solver` must be null or a live handle.
 */
uintptr_t rm_solver_velocity_dim(const struct RmSolver *solver);

/**
 * Copies per-cell density, velocity, temperature and heat flux. `rho` and
 * `theta` hold `cells` values, `u` and `q` hold `cells * D` values, cell
 * major. Any output pointer may be null to skip it.
 *
 * # Safety
 * Non-null buffers must be writable for the stated lengths.
 */
RmStatus rm_solver_macro_fields(const struct RmSolver *solver,
                                double *rho,
                                double *u,
                                double *theta,
                                double *q,
                                uintptr_t cells);

/**
 * Domain totals of mass, momentum (`D` values) and energy.
 *
 * # Safety
 * `mass` and `energy` must be writable; `momentum` writable for `len`
 * values.
 */
RmStatus rm_solver_totals(const struct RmSolver *solver,
                          double *mass,
                          double *momentum,
                          uintptr_t len,
                          double *energy);

/**
 * Number of coefficients of an expansion of order `order` in `dim`
 * velocity dimensions.
 */
uintptr_t rm_index_count(uintptr_t order, uintptr_t dim);

/**
 * Roots of `He_n` in ascending order.
 *
 * # Safety
 * `out` must be writable for `len` values.
 */
RmStatus rm_hermite_roots(uintptr_t n, double *out, uintptr_t len);

/**
 * Re-expands coefficients given in frame `(u1, theta1)` at order
 * `order_in` into frame `(u2, theta2)` at order `order_out`, preserving
 * all moments up to that order.
 *
 * # Safety
 * `u1`, `u2` must hold `dim` values; `coeffs_in` must hold
 * `rm_index_count(order_in, dim)` values; `coeffs_out` must be writable
 * for `len_out` values.
 */
RmStatus rm_project(uintptr_t dim,
                    uintptr_t order_in,
                    const double *u1,
                    double theta1,
                    const double *coeffs_in,
                    const double *u2,
                    double theta2,
                    uintptr_t order_out,
                    double *coeffs_out,
                    uintptr_t len_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REGMOMENT_H */
