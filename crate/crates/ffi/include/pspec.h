#ifndef PSPEC_H
#define PSPEC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of an FFI call.
 */
typedef enum PspecStatus {
  PSPEC_STATUS_OK = 0,
  PSPEC_STATUS_NULL_POINTER = 1,
  PSPEC_STATUS_INVALID_ARGUMENT = 2,
  PSPEC_STATUS_INVALID_SHAPE = 3,
  PSPEC_STATUS_INVALID_EXPONENT = 4,
  PSPEC_STATUS_NON_CONVERGENCE = 5,
  PSPEC_STATUS_PRECONDITION_VIOLATED = 6,
  PSPEC_STATUS_UNSUPPORTED = 7,
  PSPEC_STATUS_BUFFER_TOO_SMALL = 8,
  PSPEC_STATUS_INTERNAL = 9,
} PspecStatus;

/**
 * Rasterized domain.
 */
typedef struct PspecDomain PspecDomain;

/**
 * First eigenpair of a domain.
 */
typedef struct PspecEigen PspecEigen;

/**
 * Geometric summary of a planar domain.
 */
typedef struct PspecGeometry {
  double area;
  double perimeter;
  double inradius;
  double reduced_inradius;
  double circumradius;
  uint32_t connectivity;
  bool convex;
} PspecGeometry;

/**
 * One evaluated bound.
 */
typedef struct PspecBoundResult {
  double lhs;
  double rhs;
  double slack;
  bool satisfied;
} PspecBoundResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *pspec_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pspec_version(void);

/**
 * Rasterizes a built-in shape (`"disk"`, `"square"`, ...) at spacing `h`.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out_domain` must be writable.
 */
enum PspecStatus pspec_domain_builtin(const char *name, double h, struct PspecDomain **out_domain);

/**
 * Rasterizes a shape given as JSON, e.g. `{"variant":"disk","r":1.0}`.
 *
 * # Safety
 * `spec_json` must be a NUL-terminated string; `out_domain` must be writable.
 */
enum PspecStatus pspec_domain_from_json(const char *spec_json,
                                        double h,
                                        struct PspecDomain **out_domain);

/**
 * Releases a domain. NULL is ignored.
 *
 * # Safety
 * `d` must come from a `pspec_domain_*` constructor and not be freed twice.
 */
void pspec_domain_free(struct PspecDomain *d);

/**
 * Number of cells inside the domain.
 *
 * # Safety
 * `d` must be a live domain handle; `out_count` must be writable.
 */
enum PspecStatus pspec_domain_cell_count(const struct PspecDomain *d, uintptr_t *out_count);

/**
 * Geometric summary of a planar domain.
 *
 * # Safety
 * `d` must be a live domain handle; `out_geometry` must be writable.
 */
enum PspecStatus pspec_domain_geometry(const struct PspecDomain *d,
                                       struct PspecGeometry *out_geometry);

/**
 * Solves for the first eigenpair. `tol <= 0` selects the default tolerance.
 *
 * # Safety
 * `d` must be a live domain handle; `out_eigen` must be writable.
 */
enum PspecStatus pspec_eigen_solve(const struct PspecDomain *d,
                                   double p,
                                   double tol,
                                   struct PspecEigen **out_eigen);

/**
 * Eigenvalue of a solution.
 *
 * # Safety
 * `e` must be a live eigen handle; `out_lambda` must be writable.
 */
enum PspecStatus pspec_eigen_lambda(const struct PspecEigen *e, double *out_lambda);

/**
 * Copies the eigenfield, one value per grid cell in x-fastest order, into
 * `buf`. `out_len` always receives the required length; a short buffer
 * yields `BufferTooSmall` without copying.
 *
 * # Safety
 * `e` must be a live eigen handle; `buf` must hold `capacity` doubles or be
 * NULL when `capacity` is 0; `out_len` must be writable.
 */
enum PspecStatus pspec_eigen_field(const struct PspecEigen *e,
                                   double *buf,
                                   uintptr_t capacity,
                                   uintptr_t *out_len);

/**
 * Releases an eigen solution. NULL is ignored.
 *
 * # Safety
 * `e` must come from `pspec_eigen_solve` and not be freed twice.
 */
void pspec_eigen_free(struct PspecEigen *e);

/**
 * Cheeger constant estimate from the level sets of the eigenfunction at `p_probe`.
 *
 * # Safety
 * `d` must be a live domain handle; `out_h` must be writable.
 */
enum PspecStatus pspec_cheeger_constant(const struct PspecDomain *d, double p_probe, double *out_h);

/**
 * Largest radius whose balls all keep at most `alpha` of their volume outside the domain.
 *
 * # Safety
 * `d` must be a live domain handle; `out_radius` must be writable.
 */
enum PspecStatus pspec_lieb_radius(const struct PspecDomain *d, double alpha, double *out_radius);

/**
 * Capacity inradius at ratio `gamma` for `1 < p < n`.
 *
 * # Safety
 * `d` must be a live domain handle; `out_radius` must be writable.
 */
enum PspecStatus pspec_capacity_radius(const struct PspecDomain *d,
                                       double gamma,
                                       double p,
                                       double *out_radius);

/**
 * Evaluates one bound by id (`"FABER_KRAHN"`, ...). `alpha` and `gamma` are
 * passed as parameters when positive.
 *
 * # Safety
 * `d` must be a live domain handle; `id` a NUL-terminated string;
 * `out_result` must be writable.
 */
enum PspecStatus pspec_evaluate_bound(const struct PspecDomain *d,
                                      const char *id,
                                      double p,
                                      double alpha,
                                      double gamma,
                                      struct PspecBoundResult *out_result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PSPEC_H */
