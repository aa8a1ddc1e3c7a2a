#ifndef WEDGETRI_H
#define WEDGETRI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum WtStatus {
  WT_STATUS_OK = 0,
  WT_STATUS_NULL_POINTER = 1,
  WT_STATUS_DIMENSION_MISMATCH = 2,
  WT_STATUS_INVALID_ARGUMENT = 3,
  WT_STATUS_PARSE_ERROR = 4,
  WT_STATUS_PANIC = 5,
} WtStatus;

/**
 * Opaque handle to a distance matrix.
 */
typedef struct WtDistanceMatrix WtDistanceMatrix;

/**
 * Opaque handle to a wedge operator `Q = E²`.
 */
typedef struct WtOperator WtOperator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message, NUL-terminated and
 * truncated to `len` bytes, into `buf`. Returns the length the full message
 * needs including the terminator; `buf` may be null to query it.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t wt_last_error_message(char *buf, size_t len);

/**
 * Builds an `n`-point distance matrix from its strict upper triangle
 * `d_12, d_13, ..., d_(n-1)n` (`n(n-1)/2` values).
 *
 * # Safety
 * `upper` must point to `len` doubles and `out` to a writable handle slot.
 */
enum WtStatus wt_dmat_new(size_t n, const double *upper, size_t len, struct WtDistanceMatrix **out);

/**
 * Writes 1 to `valid` when every triangle inequality holds, 0 otherwise.
 *
 * # Safety
 * `dmat` must be a live handle and `valid` writable.
 */
enum WtStatus wt_dmat_validate(const struct WtDistanceMatrix *dmat, int32_t *valid);

/**
 * # Safety
 * `dmat` must be null or a handle from `wt_dmat_new` not yet freed.
 */
void wt_dmat_free(struct WtDistanceMatrix *dmat);

/**
 * The operator with eigenvalue `d_ij²` on `u_i ∧ u_j`. With `basis` null
 * the `u_i` are the standard basis; otherwise `basis` holds an `n × n`
 * unitary (interleaved, row-major) whose columns are the `u_i`.
 *
 * # Safety
 * `dmat` must be a live handle, `basis` null or `2n²` doubles, `out`
 * writable.
 */
enum WtStatus wt_operator_from_dmat(const struct WtDistanceMatrix *dmat,
                                    const double *basis,
                                    struct WtOperator **out);

/**
 * Parses an operator from the JSON form written by the command-line tool.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum WtStatus wt_operator_from_json(const char *json, struct WtOperator **out);

/**
 * Dimension `n` of the underlying space, or 0 for a null handle.
 *
 * # Safety
 * `op` must be null or a live handle.
 */
size_t wt_operator_dim(const struct WtOperator *op);

/**
 * # Safety
 * `op` must be null or a handle from `wt_operator_from_*` not yet freed.
 */
void wt_operator_free(struct WtOperator *op);

/**
 * Hilbert-Schmidt distance between the pure states of unit vectors `x`, `y`
 * of length `n`.
 *
 * # Safety
 * `x`, `y` must hold `2n` doubles and `out` be writable.
 */
enum WtStatus wt_hs_distance(const double *x, const double *y, size_t n, double *out);

/**
 * `d_E(x, y) = ‖E(x ∧ y)‖` for unit vectors of length `wt_operator_dim(op)`.
 *
 * # Safety
 * `op` must be a live handle, `x`, `y` hold `2n` doubles, `out` writable.
 */
enum WtStatus wt_semidistance(const struct WtOperator *op,
                              const double *x,
                              const double *y,
                              double *out);

/**
 * Triangle deficit `d(x,z) + d(z,y) - d(x,y)`.
 *
 * # Safety
 * `op` must be a live handle, `x`, `y`, `z` hold `2n` doubles, `out`
 * writable.
 */
enum WtStatus wt_deficit(const struct WtOperator *op,
                         const double *x,
                         const double *y,
                         const double *z,
                         double *out);

/**
 * Writes 1 to `certified` when the spectral sufficient condition proves the
 * operator triangular, 0 when it does not apply.
 *
 * # Safety
 * `op` must be a live handle and `certified` writable.
 */
enum WtStatus wt_certify_sufficient(const struct WtOperator *op, int32_t *certified);

/**
 * Minimizes the deficit from `restarts` random starts (plus basis starts for
 * diagonal operators). The minimum goes to `deficit`; when `xyz` is not null
 * it receives the minimizing `x`, `y`, `z` back to back (`6n` doubles).
 *
 * # Safety
 * `op` must be a live handle, `deficit` writable, `xyz` null or `6n`
 * writable doubles.
 */
enum WtStatus wt_minimize_deficit(const struct WtOperator *op,
                                  uint64_t seed,
                                  size_t restarts,
                                  double *deficit,
                                  double *xyz);

/**
 * Lowest deficit over `count` random orthonormal triples.
 *
 * # Safety
 * `op` must be a live handle and `worst` writable.
 */
enum WtStatus wt_sample_triples(const struct WtOperator *op,
                                size_t count,
                                uint64_t seed,
                                double *worst);

/**
 * `min(0, d_a + d_b - d_max)` over the three labels of a 3-point operator.
 *
 * # Safety
 * `out` must be writable.
 */
enum WtStatus wt_mu_closed_form_n3(double d12, double d13, double d23, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WEDGETRI_H */
