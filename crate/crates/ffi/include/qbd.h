#ifndef QBD_H
#define QBD_H

/* Generated by cbindgen from qbd-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum QbdStatus {
  QbdStatus_Ok = 0,
  QbdStatus_NullPointer = 1,
  QbdStatus_InvalidArgument = 2,
  QbdStatus_CoverageError = 3,
  QbdStatus_PrecisionCap = 4,
  QbdStatus_BufferTooSmall = 5,
  QbdStatus_Panicked = 6,
} QbdStatus;

// Opaque engine handle: a grid window with its Bessel cache and transform
// matrix, ready to produce rows, kernels, and verification reports.
typedef struct QbdEngine QbdEngine;

// Opaque parameter handle wrapping (q, nu, precision, truncation tolerance).
typedef struct QbdParams QbdParams;

// Aggregate report filled by `qbd_simulate`.
typedef struct QbdSimReport {
  // Total variation distance between empirical and analytic distributions.
  double tv;
  // Acceptance threshold 3 sqrt(K / (2 n_valid)).
  double threshold;
  // Largest per-state |z| among states with expected count >= 5.
  double z_max;
  // States holding 99.9% of the analytic mass.
  uint64_t k_states;
  uint64_t n_valid;
  uint64_t n_guard;
  uint64_t n_maxed;
  // 1 when the statistical criteria pass, else 0.
  uint8_t pass;
} QbdSimReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version of the library as a NUL-terminated static string.
const char *qbd_version(void);

// Copy the last error message into `buf` (NUL-terminated, truncated to
// `cap`). Returns the full message length in bytes, excluding the NUL.
//
// # Safety
// `buf` must point to `cap` writable bytes, or be null (then only the
// required length is returned).
size_t qbd_last_error(char *buf, size_t cap);

// Validate and allocate a parameter handle.
//
// # Safety
// `out` must be a valid pointer to a `*mut QbdParams` slot.
enum QbdStatus qbd_params_new(double q,
                              double nu,
                              uint32_t precision_bits,
                              double trunc_tol,
                              struct QbdParams **out);

// Release a parameter handle. Null is tolerated.
//
// # Safety
// `p` must be a handle produced by `qbd_params_new`, or null.
void qbd_params_free(struct QbdParams *p);

// Build an engine on the window [window_lo, window_hi]: evaluates the
// Bessel cache over the doubled window and assembles the transform matrix.
//
// # Safety
// `params` must be a live handle; `out` a valid slot.
enum QbdStatus qbd_engine_new(const struct QbdParams *params,
                              int64_t window_lo,
                              int64_t window_hi,
                              struct QbdEngine **out);

// Release an engine handle. Null is tolerated.
//
// # Safety
// `e` must be a handle produced by `qbd_engine_new`, or null.
void qbd_engine_free(struct QbdEngine *e);

// Number of grid points in the engine's window (0 for null).
//
// # Safety
// `e` must be a live engine handle or null.
size_t qbd_engine_window_len(const struct QbdEngine *e);

// Window bounds of the engine.
//
// # Safety
// All pointers must be valid; `e` must be a live engine handle.
enum QbdStatus qbd_engine_window(const struct QbdEngine *e, int64_t *out_lo, int64_t *out_hi);

// c_{q,nu}, narrowed to f64.
//
// # Safety
// `params` must be a live handle; `out` a valid f64 slot.
enum QbdStatus qbd_c_constant(const struct QbdParams *params, double *out);

// j_nu(x, q^2) at real x > 0, narrowed to f64.
//
// # Safety
// `params` must be a live handle; `out` a valid f64 slot.
enum QbdStatus qbd_jnu(const struct QbdParams *params, double x, double *out);

// delta_q(q^i, q^j), narrowed to f64.
//
// # Safety
// `params` must be a live handle; `out` a valid f64 slot.
enum QbdStatus qbd_delta(const struct QbdParams *params, int64_t i, int64_t j, double *out);

// The stationary weight pi_n = q^{2(nu+1)n}, narrowed to f64.
//
// # Safety
// `params` must be a live handle; `out` a valid f64 slot.
enum QbdStatus qbd_stationary_weight(const struct QbdParams *params, int64_t n, double *out);

// Transition probabilities p_{.r}(t) over the engine window, written into
// `out_probs` (length must equal the window length; index 0 is exponent
// window_lo). `out_defect` receives |1 - sum p| and may be null.
//
// # Safety
// `e` must be a live engine handle; `out_probs` must point to `len` f64s.
enum QbdStatus qbd_transition_row(const struct QbdEngine *e,
                                  int64_t r,
                                  double t,
                                  double *out_probs,
                                  size_t len,
                                  double *out_defect);

// The heat kernel rho_t over the engine window, written into `out_values`.
//
// # Safety
// `e` must be a live engine handle; `out_values` must point to `len` f64s.
enum QbdStatus qbd_heat_kernel(const struct QbdEngine *e, double t, double *out_values, size_t len);

// Run the invariant suite on the engine's window. Writes 1 into `out_pass`
// when every check passes, else 0.
//
// # Safety
// `e` must be a live engine handle; `out_pass` a valid slot.
enum QbdStatus qbd_verify(const struct QbdEngine *e, uint8_t *out_pass);

// Simulate the chain (`n_paths` exponential-clock trajectories to `t_end`)
// and compare end states against the analytic row at the same time.
//
// # Safety
// `e` must be a live engine handle; `out` a valid report slot.
enum QbdStatus qbd_simulate(const struct QbdEngine *e,
                            int64_t r,
                            double t_end,
                            uint64_t n_paths,
                            uint64_t seed,
                            int64_t guard_lo,
                            int64_t guard_hi,
                            uint64_t max_events,
                            struct QbdSimReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QBD_H */
