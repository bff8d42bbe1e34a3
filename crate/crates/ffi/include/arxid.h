#ifndef ARXID_H
#define ARXID_H

/* Generated from the arxid-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of a C API call.
typedef enum ArxidStatus {
  // Success.
  ARXID_STATUS_OK = 0,
  // A required pointer argument was null.
  ARXID_STATUS_NULL_POINTER = 1,
  // An argument or configuration value is out of range.
  ARXID_STATUS_INVALID_ARGUMENT = 2,
  // The record is too short for the requested lag depth.
  ARXID_STATUS_INSUFFICIENT_DATA = 3,
  // No equation order in the configured range passed verification.
  ARXID_STATUS_ORDER_SEARCH_FAILED = 4,
  // A numerical step failed (unstable model, degenerate spectrum, ...).
  ARXID_STATUS_NUMERICAL_FAILURE = 5,
  // A provided buffer is smaller than the value being returned.
  ARXID_STATUS_BUFFER_TOO_SMALL = 6,
  // The library caught an internal panic instead of unwinding into C.
  ARXID_STATUS_INTERNAL_PANIC = 7,
} ArxidStatus;

// Opaque identification result.
typedef struct ArxidReport ArxidReport;

// Identification settings, mirroring the library defaults. Obtain a
// baseline with [`arxid_config_default`] and override fields as needed.
typedef struct ArxidConfig {
  // First equation-order guess of the search.
  uint32_t eta_guess_initial;
  // Last equation-order guess of the search.
  uint32_t eta_max;
  // Verification stacking lag is the accepted guess plus this offset.
  uint32_t l_verify_offset;
  // Half-width of the unity band for counting eigenvalues near one.
  double unity_tol;
  // Relative parameter-change threshold that stops the inner iteration.
  double conv_tol;
  // Inner-iteration budget per guess.
  uint32_t max_inner_iters;
  // Frequency-grid resolution for autocovariance propagation.
  uint32_t acvf_grid_points;
  // Bootstrap replicates for parameter spread (0 disables).
  uint32_t bootstrap_reps;
  // Seed for the bootstrap resampler.
  uint64_t seed;
  // Remove per-channel sample means before estimation.
  bool detrend;
} ArxidConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static, NUL-terminated string.
const char *arxid_version(void);

// Message describing the most recent failure on the calling thread, or an
// empty string when no failure has occurred yet.
const char *arxid_last_error_message(void);

// Fills `out` with the default identification settings.
//
// # Safety
//
// `out` must be null or point to writable memory for one `ArxidConfig`.
enum ArxidStatus arxid_config_default(struct ArxidConfig *out);

// Runs the full order/delay/parameter/noise identification on an
// input-output record of `len` samples. `config` may be null to use the
// defaults. On success writes a heap-allocated report to `out`; release
// it with [`arxid_report_free`].
//
// # Safety
//
// `u` and `y` must be null or point to `len` readable doubles, `config`
// must be null or point to a valid `ArxidConfig`, and `out` must be null
// or point to writable memory for one pointer.
enum ArxidStatus arxid_identify(const double *u,
                                const double *y,
                                size_t len,
                                const struct ArxidConfig *config,
                                struct ArxidReport **out);

// Releases a report produced by [`arxid_identify`]. Null is ignored.
//
// # Safety
//
// `report` must be null or a pointer obtained from [`arxid_identify`]
// that has not been freed yet; the handle is invalid afterwards.
void arxid_report_free(struct ArxidReport *report);

// Estimated equation order (max of output and input lag depth).
//
// # Safety
//
// `report` must be null or a live report handle; `out` must be null or
// point to writable memory for one `size_t`.
enum ArxidStatus arxid_report_eta(const struct ArxidReport *report, size_t *out);

// Number of unity eigenvalues found at the verification lag.
//
// # Safety
//
// `report` must be null or a live report handle; `out` must be null or
// point to writable memory for one `size_t`.
enum ArxidStatus arxid_report_unity_count(const struct ArxidReport *report, size_t *out);

// Input delay of the pruned model.
//
// # Safety
//
// `report` must be null or a live report handle; `out` must be null or
// point to writable memory for one `size_t`.
enum ArxidStatus arxid_report_delay(const struct ArxidReport *report, size_t *out);

// Largest output lag (`n_y`) and largest input lag (`n_u`) of the pruned
// model. Either out-pointer may be null to skip that value.
//
// # Safety
//
// `report` must be null or a live report handle; each non-null
// out-pointer must point to writable memory for one `size_t`.
enum ArxidStatus arxid_report_orders(const struct ArxidReport *report,
                                     size_t *out_n_y,
                                     size_t *out_n_u);

// Estimated innovation variance.
//
// # Safety
//
// `report` must be null or a live report handle; `out` must be null or
// point to writable memory for one double.
enum ArxidStatus arxid_report_sigma_e2(const struct ArxidReport *report, double *out);

// Whether the inner iteration met its convergence threshold.
//
// # Safety
//
// `report` must be null or a live report handle; `out` must be null or
// point to writable memory for one `bool`.
enum ArxidStatus arxid_report_converged(const struct ArxidReport *report, bool *out);

// Length of the normalized parameter vector `[1, a1.., -b0..]`.
//
// # Safety
//
// `report` must be null or a live report handle; `out` must be null or
// point to writable memory for one `size_t`.
enum ArxidStatus arxid_report_theta_len(const struct ArxidReport *report, size_t *out);

// Copies the normalized parameter vector into `buf` (capacity `cap`).
//
// # Safety
//
// `report` must be null or a live report handle; `buf` must be null or
// point to writable memory for `cap` doubles.
enum ArxidStatus arxid_report_theta(const struct ArxidReport *report, double *buf, size_t cap);

// Length of the bootstrap standard-deviation vector; zero when the
// bootstrap was disabled.
//
// # Safety
//
// `report` must be null or a live report handle; `out` must be null or
// point to writable memory for one `size_t`.
enum ArxidStatus arxid_report_theta_std_len(const struct ArxidReport *report, size_t *out);

// Copies the bootstrap standard deviations into `buf` (capacity `cap`).
//
// # Safety
//
// `report` must be null or a live report handle; `buf` must be null or
// point to writable memory for `cap` doubles.
enum ArxidStatus arxid_report_theta_std(const struct ArxidReport *report, double *buf, size_t cap);

// Copies the autoregressive coefficients `a1..a_ny` of the pruned model
// into `buf`; query the length with [`arxid_report_orders`] (`n_y`).
//
// # Safety
//
// `report` must be null or a live report handle; `buf` must be null or
// point to writable memory for `cap` doubles.
enum ArxidStatus arxid_report_a(const struct ArxidReport *report, double *buf, size_t cap);

// Copies the input coefficients `b0..b_nu` of the pruned model into
// `buf`, including zeros below the delay; the length is `n_u + 1` from
// [`arxid_report_orders`].
//
// # Safety
//
// `report` must be null or a live report handle; `buf` must be null or
// point to writable memory for `cap` doubles.
enum ArxidStatus arxid_report_b(const struct ArxidReport *report, double *buf, size_t cap);

// Serializes the full report to pretty-printed JSON. Release the string
// with [`arxid_string_free`].
//
// # Safety
//
// `report` must be null or a live report handle; `out` must be null or
// point to writable memory for one pointer.
enum ArxidStatus arxid_report_to_json(const struct ArxidReport *report, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
//
// `s` must be null or a string returned by this library that has not
// been freed yet; the pointer is invalid afterwards.
void arxid_string_free(char *s);

// Normalized root-mean-square fit of `test` against `reference`, in
// percent (100 is a perfect match).
//
// # Safety
//
// `reference` and `test` must be null or point to `len` readable
// doubles; `out` must be null or point to writable memory for one
// double.
enum ArxidStatus arxid_percent_fit(const double *reference,
                                   const double *test,
                                   size_t len,
                                   double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ARXID_H */
