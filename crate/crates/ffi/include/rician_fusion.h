#ifndef RICIAN_FUSION_H
#define RICIAN_FUSION_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RfStatus {
  RF_STATUS_OK = 0,
  RF_STATUS_NULL_POINTER = 1,
  RF_STATUS_INVALID_ARGUMENT = 2,
  RF_STATUS_UNSUPPORTED_SIZE = 3,
  RF_STATUS_DEGENERATE_WEIGHTS = 4,
  RF_STATUS_NUMERICAL = 5,
  RF_STATUS_IO = 6,
  RF_STATUS_PARSE = 7,
  RF_STATUS_PANIC = 8,
} RfStatus;

// Frozen deployment plus the evaluator for its current antenna count and noise power.
typedef struct RfScenario RfScenario;

// Calibrated threshold and detection estimate for one rule.
typedef struct RfPointResult {
  double gamma;
  double achieved_pf0;
  double pd0;
  double pd0_stderr;
} RfPointResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create a scenario from a WSN preset (`los`, `intermediate`, `nlos`) and a jammer
// preset (`none`, `los-jam`, `weak-los-jam`) with `K` sensors and `N` antennas.
//
// # Safety
// `preset` and `jammer` must be NUL-terminated strings; `out` must be writable.
enum RfStatus rf_scenario_preset(const char *preset,
                                 const char *jammer,
                                 uintptr_t k_sensors,
                                 uintptr_t n_antennas,
                                 uint64_t seed,
                                 struct RfScenario **out);

// Load a scenario file written by `rician-fusion generate`.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum RfStatus rf_scenario_load(const char *path, struct RfScenario **out);

// Release a handle. Null is ignored.
//
// # Safety
// `h` must come from this library and must not be used afterwards.
void rf_scenario_free(struct RfScenario *h);

// Re-target the frozen deployment to `n_antennas` and a noise power in dBm.
//
// # Safety
// `h` must be a live handle.
enum RfStatus rf_scenario_configure(struct RfScenario *h,
                                    uintptr_t n_antennas,
                                    double sigma_w2_dbm);

// Antenna count of the current configuration; 0 for a null handle.
//
// # Safety
// `h` must be null or a live handle.
uintptr_t rf_scenario_n_antennas(const struct RfScenario *h);

// Number of sensors; 0 for a null handle.
//
// # Safety
// `h` must be null or a live handle.
uintptr_t rf_scenario_k_sensors(const struct RfScenario *h);

// Whether the scenario carries a jammer.
//
// # Safety
// `h` must be null or a live handle.
bool rf_scenario_has_jammer(const struct RfScenario *h);

// Draw trial `trial` of `stream` under H1 (`h1 = true`) or H0 into `y_out` (`2N` doubles).
//
// # Safety
// `h` must be a live handle and `y_out` must hold `len` doubles.
enum RfStatus rf_draw_sample(const struct RfScenario *h,
                             bool h1,
                             uint64_t seed,
                             uint64_t stream,
                             uint64_t trial,
                             double *y_out,
                             uintptr_t len);

// Evaluate rule `rule` (e.g. `"igmm"`, `"is-glrt"`) on `y` (`2N` interleaved doubles).
// The clairvoyant rule is evaluated with a zero jammer symbol.
//
// # Safety
// `h` must be a live handle, `rule` a NUL-terminated string, `y` must hold `len`
// doubles and `out` must be writable.
enum RfStatus rf_statistic(const struct RfScenario *h,
                           const char *rule,
                           const double *y,
                           uintptr_t len,
                           double *out);

// Calibrate `rule` at `target_pf0` and estimate its detection probability.
//
// # Safety
// `h` must be a live handle, `rule` a NUL-terminated string and `out` writable.
enum RfStatus rf_run_point(const struct RfScenario *h,
                           const char *rule,
                           double target_pf0,
                           uintptr_t trials,
                           uint64_t seed,
                           struct RfPointResult *out);

// Maximum-likelihood jammer variance for eigenvalue lists `lambda_a`, `lambda_c` and
// squared whitened residuals `v_abs2` (same length as `lambda_c`).
//
// # Safety
// Each array must hold its stated number of doubles; `out` must be writable.
enum RfStatus rf_solve_sigma_poly(const double *lambda_a,
                                  uintptr_t n_a,
                                  const double *lambda_c,
                                  uintptr_t n_c,
                                  const double *v_abs2,
                                  double *out);

// Message for the last failed call on this thread, or null. Valid until the next call.
const char *rf_last_error(void);

// Static name of a status code.
const char *rf_status_name(enum RfStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RICIAN_FUSION_H */
