#ifndef TDS_SPECTRUM_H
#define TDS_SPECTRUM_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TdsStatus {
  TDS_STATUS_OK = 0,
  TDS_STATUS_NULL_POINTER = 1,
  TDS_STATUS_INVALID_INPUT = 2,
  TDS_STATUS_DOMAIN = 3,
  TDS_STATUS_NUMERIC = 4,
  TDS_STATUS_DEFECTIVE = 5,
  TDS_STATUS_REFINEMENT = 6,
  TDS_STATUS_CONTOUR = 7,
  TDS_STATUS_INCONSISTENT = 8,
  TDS_STATUS_SOLVER = 9,
  TDS_STATUS_INAPPLICABLE = 10,
  TDS_STATUS_PARSE = 11,
  TDS_STATUS_IO = 12,
  TDS_STATUS_PANIC = 13,
  TDS_STATUS_OUT_OF_RANGE = 14,
} TdsStatus;

/**
 * Roots found in a region, in dominance order.
 */
typedef struct TdsReport TdsReport;

/**
 * Converged solution of the branch equation.
 */
typedef struct TdsSolution TdsSolution;

/**
 * Time-delay system `x' = A x + B x(t - tau)`.
 */
typedef struct TdsSystem TdsSystem;

typedef struct TdsComplex {
  double re;
  double im;
} TdsComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *tds_last_error_message(void);

/**
 * Builds a system from row-major `n×n` real matrices.
 *
 * # Safety
 * `a` and `b` must point to `n*n` doubles; `out` must be writable.
 */
enum TdsStatus tds_system_new(size_t n,
                              const double *a,
                              const double *b,
                              double tau,
                              struct TdsSystem **out);

/**
 * Parses a system from JSON text with keys `A`, `B` and `tau`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum TdsStatus tds_system_from_json(const char *json, struct TdsSystem **out);

/**
 * # Safety
 * `sys` must come from a `tds_system_*` constructor, or be null.
 */
void tds_system_free(struct TdsSystem *sys);

/**
 * # Safety
 * `sys` must be a live handle or null.
 */
size_t tds_system_order(const struct TdsSystem *sys);

/**
 * `h(s) = det(sI - A - B e^{-s tau})`.
 *
 * # Safety
 * `sys` must be a live handle; `out` must be writable.
 */
enum TdsStatus tds_char_fn(const struct TdsSystem *sys,
                           struct TdsComplex s,
                           struct TdsComplex *out);

/**
 * Grid search plus Newton refinement over a rectangle.
 *
 * # Safety
 * `sys` must be a live handle; `out` must be writable.
 */
enum TdsStatus tds_find_roots(const struct TdsSystem *sys,
                              double re_min,
                              double re_max,
                              double im_min,
                              double im_max,
                              double step,
                              double tol,
                              struct TdsReport **out);

/**
 * # Safety
 * `report` must be a live handle or null.
 */
size_t tds_report_len(const struct TdsReport *report);

/**
 * Root `index` and its scaled residual.
 *
 * # Safety
 * `report` must be a live handle; `root` and `residual` must be writable.
 */
enum TdsStatus tds_report_root(const struct TdsReport *report,
                               size_t index,
                               struct TdsComplex *root,
                               double *residual);

/**
 * # Safety
 * `report` must come from [`tds_find_roots`], or be null.
 */
void tds_report_free(struct TdsReport *report);

/**
 * Number of roots inside a rectangle by the argument principle.
 *
 * # Safety
 * `sys` must be a live handle; `out` must be writable.
 */
enum TdsStatus tds_count_roots(const struct TdsSystem *sys,
                               double re_min,
                               double re_max,
                               double im_min,
                               double im_max,
                               size_t samples_per_edge,
                               size_t *out);

/**
 * `W_k(z)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum TdsStatus tds_lambert_w(int64_t k, struct TdsComplex z, struct TdsComplex *out);

/**
 * Branch whose range contains `w`.
 *
 * # Safety
 * `k` and `on_boundary` must be writable.
 */
enum TdsStatus tds_branch_of(struct TdsComplex w, int64_t *k, bool *on_boundary);

/**
 * Solves `W(tau B Q) e^{W(tau B Q) + A tau} = tau B` for `Q` with one
 * branch per eigenvalue, starting from the row-major `n×n` matrix `q0`.
 *
 * # Safety
 * `sys` must be a live handle of order `n`; `branches` must point to `n`
 * values and `q0` to `n*n` values; `out` must be writable.
 */
enum TdsStatus tds_solve_branch(const struct TdsSystem *sys,
                                const int64_t *branches,
                                const struct TdsComplex *q0,
                                double tol,
                                size_t max_iterations,
                                struct TdsSolution **out);

/**
 * # Safety
 * `sol` must be a live handle or null.
 */
size_t tds_solution_dim(const struct TdsSolution *sol);

/**
 * Final residual norm of the branch equation, or NaN for a null handle.
 *
 * # Safety
 * `sol` must be a live handle or null.
 */
double tds_solution_residual(const struct TdsSolution *sol);

/**
 * Eigenvalue `index` of `S`, i.e. a characteristic root.
 *
 * # Safety
 * `sol` must be a live handle; `out` must be writable.
 */
enum TdsStatus tds_solution_eigenvalue(const struct TdsSolution *sol,
                                       size_t index,
                                       struct TdsComplex *out);

/**
 * Copies `S` row-major into `out`, which must hold `dim*dim` values.
 *
 * # Safety
 * `sol` must be a live handle; `out` must point to `dim*dim` writable values.
 */
enum TdsStatus tds_solution_s(const struct TdsSolution *sol, struct TdsComplex *out);

/**
 * # Safety
 * `sol` must come from [`tds_solve_branch`], or be null.
 */
void tds_solution_free(struct TdsSolution *sol);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TDS_SPECTRUM_H */
