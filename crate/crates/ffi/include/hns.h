#ifndef HNS_H
#define HNS_H

/* Generated by cbindgen from the hns-ffi sources; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum HnsStatus {
  HNS_STATUS_OK = 0,
  HNS_STATUS_NULL_POINTER = 1,
  HNS_STATUS_DOMAIN = 2,
  HNS_STATUS_CONTRACT = 3,
  HNS_STATUS_ORACLE_NON_CONVERGENCE = 4,
  HNS_STATUS_SINGULAR_STEP = 5,
  HNS_STATUS_DEGENERATE_FIT = 6,
  HNS_STATUS_CONFIG = 7,
  HNS_STATUS_IO = 8,
  HNS_STATUS_BUFFER_TOO_SMALL = 9,
  HNS_STATUS_PANIC = 10,
} HnsStatus;

/**
 * Dense GELU network.
 */
typedef struct HnsNet HnsNet;

/**
 * Caputo stencil for one target node.
 */
typedef struct HnsStencil HnsStencil;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the calling thread's last error message, NUL-terminated and
 * truncated to `capacity`. Returns the full message length (0 if none).
 *
 * # Safety
 * `buf` must be valid for `capacity` bytes or null.
 */
size_t hns_last_error(char *buf, size_t capacity);

/**
 * Γ(x).
 *
 * # Safety
 * `result` must be a valid pointer.
 */
enum HnsStatus hns_gamma(double x, double *result);

/**
 * Caputo derivative of order `alpha` of `t^q` at `t`.
 *
 * # Safety
 * `result` must be a valid pointer.
 */
enum HnsStatus hns_caputo_monomial(double q, double alpha, double t, double *result);

/**
 * A-priori stencil error bound for `sup |u^{(p+1)}| = max_deriv`.
 *
 * # Safety
 * `result` must be a valid pointer.
 */
enum HnsStatus hns_error_bound(size_t p, double alpha, double dt, double max_deriv, double *result);

/**
 * Stencil of degree `p` for the node `t_n = n·dt`.
 *
 * # Safety
 * `stencil` must be a valid pointer; the handle is freed with
 * [`hns_stencil_free`].
 */
enum HnsStatus hns_stencil_new(size_t p,
                               double alpha,
                               size_t n,
                               double dt,
                               struct HnsStencil **stencil);

/**
 * Apply a stencil to nodal data at `t_0..t_n` (`len = n + 1`). `first` and
 * `second` may be null when the degree does not need them.
 *
 * # Safety
 * Non-null arrays must hold `len` values; `stencil` must come from
 * [`hns_stencil_new`].
 */
enum HnsStatus hns_stencil_apply(const struct HnsStencil *stencil,
                                 const double *values,
                                 const double *first,
                                 const double *second,
                                 size_t len,
                                 double *result);

/**
 * # Safety
 * `stencil` must come from [`hns_stencil_new`] and not be used afterwards.
 */
void hns_stencil_free(struct HnsStencil *stencil);

/**
 * Seeded network with the given layer widths.
 *
 * # Safety
 * `sizes` must hold `count` entries; `net` must be a valid pointer. The
 * handle is freed with [`hns_net_free`].
 */
enum HnsStatus hns_net_init(uint64_t seed, const size_t *sizes, size_t count, struct HnsNet **net);

/**
 * Number of trainable parameters.
 *
 * # Safety
 * `net` must come from [`hns_net_init`]; `result` must be valid.
 */
enum HnsStatus hns_net_param_count(const struct HnsNet *net, size_t *result);

/**
 * Network output at `input` (`len` must equal the input width).
 *
 * # Safety
 * `input` must hold `len` values; `net` must come from [`hns_net_init`].
 */
enum HnsStatus hns_net_eval(const struct HnsNet *net,
                            const double *input_ptr,
                            size_t len,
                            double *result);

/**
 * # Safety
 * `net` must come from [`hns_net_init`] and not be used afterwards.
 */
void hns_net_free(struct HnsNet *net);

/**
 * L1 time march of `D^α u = u + Γ(3)/Γ(3−α) t^{2−α} − t² − 1`,
 * `u(0) = 1` on `[0, horizon]` with `node_count` nodes. Writes the nodal
 * values into `values` (capacity `capacity`).
 *
 * # Safety
 * `values` must be valid for `capacity` writes.
 */
enum HnsStatus hns_fdm_benchmark(double alpha,
                                 double horizon,
                                 size_t node_count,
                                 double *values,
                                 size_t capacity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HNS_H */
