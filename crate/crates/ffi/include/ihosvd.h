#ifndef IHOSVD_H
#define IHOSVD_H

/* Generated by cbindgen; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum IhosvdStatus {
  IHOSVD_STATUS_OK = 0,
  IHOSVD_STATUS_NULL_POINTER = 1,
  IHOSVD_STATUS_INVALID_ARGUMENT = 2,
  IHOSVD_STATUS_DIMENSION_MISMATCH = 3,
  IHOSVD_STATUS_NUMERICAL = 4,
  IHOSVD_STATUS_BUFFER_TOO_SMALL = 5,
  IHOSVD_STATUS_PANIC = 6,
} IhosvdStatus;

typedef enum IhosvdMethod {
  IHOSVD_METHOD_IHOOI = 0,
  IHOSVD_METHOD_ALSAS = 1,
} IhosvdMethod;

// Observed entries of a tensor.
typedef struct IhosvdProblem IhosvdProblem;

// Fitted Tucker model plus solver diagnostics.
typedef struct IhosvdResult IhosvdResult;

// Solver settings. Start from [`ihosvd_options_default`].
typedef struct IhosvdOptions {
  double tol;
  uintptr_t max_iters;
  // Wall-clock budget; zero or negative means unlimited.
  double max_seconds;
  uint64_t seed;
  // Relative fit improvement below which a rank is increased. Only used
  // when maximum ranks are passed to [`ihosvd_solve`].
  double fit_stall_threshold;
  uintptr_t rank_step;
} IhosvdOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null if none.
// The pointer stays valid until the next failing call on the same thread.
const char *ihosvd_last_error(void);

// Static description of a status code.
const char *ihosvd_status_str(enum IhosvdStatus status);

struct IhosvdOptions ihosvd_options_default(void);

// Builds a problem from `n_obs` observed entries of a tensor with
// dimensions `dims[0..ndims]`. `indices` are flat positions (first index
// fastest), `values` the data at those positions.
//
// # Safety
// `dims`, `indices` and `values` must point to arrays of the stated
// lengths; `out` must be writable.
enum IhosvdStatus ihosvd_problem_new(const uintptr_t *dims,
                                     uintptr_t ndims,
                                     const uintptr_t *indices,
                                     const double *values,
                                     uintptr_t n_obs,
                                     struct IhosvdProblem **out);

// # Safety
// `p` must be null or a handle from [`ihosvd_problem_new`] not yet freed.
void ihosvd_problem_free(struct IhosvdProblem *p);

// Fits a Tucker model to the observed entries.
//
// With `max_ranks` null the ranks stay fixed at `ranks`. Otherwise `ranks`
// is the starting point and each mode may grow up to `max_ranks`.
//
// # Safety
// `problem` must be a live handle; `ranks` (and `max_ranks` if non-null)
// must hold `nranks` entries; `options` may be null for defaults; `out`
// must be writable.
enum IhosvdStatus ihosvd_solve(const struct IhosvdProblem *problem,
                               enum IhosvdMethod method,
                               const uintptr_t *ranks,
                               const uintptr_t *max_ranks,
                               uintptr_t nranks,
                               const struct IhosvdOptions *options,
                               struct IhosvdResult **out);

// # Safety
// `r` must be null or a handle from [`ihosvd_solve`] not yet freed.
void ihosvd_result_free(struct IhosvdResult *r);

// Number of modes of the fitted model.
//
// # Safety
// `r` must be a live result handle or null.
uintptr_t ihosvd_result_ndims(const struct IhosvdResult *r);

// Writes the final multilinear rank into `buf[0..ndims]`.
//
// # Safety
// `r` must be a live result handle and `buf` must hold `len` elements.
enum IhosvdStatus ihosvd_result_ranks(const struct IhosvdResult *r, uintptr_t *buf, uintptr_t len);

// Writes the full reconstruction (product of the dimensions entries).
//
// # Safety
// `r` must be a live result handle and `buf` must hold `len` elements.
enum IhosvdStatus ihosvd_result_reconstruct(const struct IhosvdResult *r,
                                            double *buf,
                                            uintptr_t len);

// Writes the core tensor (product of the ranks entries).
//
// # Safety
// `r` must be a live result handle and `buf` must hold `len` elements.
enum IhosvdStatus ihosvd_result_core(const struct IhosvdResult *r, double *buf, uintptr_t len);

// Writes factor `mode` column-major (dimension × rank entries).
//
// # Safety
// `r` must be a live result handle and `buf` must hold `len` elements.
enum IhosvdStatus ihosvd_result_factor(const struct IhosvdResult *r,
                                       uintptr_t mode,
                                       double *buf,
                                       uintptr_t len);

// Iterations run and the final relative fit on the observed entries.
//
// # Safety
// `r` must be a live result handle; the out pointers may be null.
enum IhosvdStatus ihosvd_result_summary(const struct IhosvdResult *r,
                                        uintptr_t *iterations,
                                        double *relative_fit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IHOSVD_H */
