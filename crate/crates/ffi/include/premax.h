#ifndef PREMAX_H
#define PREMAX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of a call. Values 1 to 3 match the CLI exit codes.
typedef enum PremaxStatus {
  PREMAX_STATUS_OK = 0,
  // Malformed input or config.
  PREMAX_STATUS_INPUT = 1,
  // A mathematical precondition does not hold.
  PREMAX_STATUS_REFUSAL = 2,
  // An iteration budget ran out.
  PREMAX_STATUS_BUDGET = 3,
  PREMAX_STATUS_NULL_POINTER = 4,
  // A caller buffer is too small; see the `len` out-parameter.
  PREMAX_STATUS_BUFFER_TOO_SMALL = 5,
  PREMAX_STATUS_PANIC = 6,
} PremaxStatus;

// Shadowing method for [`premax_shadow`].
typedef enum PremaxMethod {
  PREMAX_METHOD_OPERATOR = 0,
  PREMAX_METHOD_NEWTON = 1,
  PREMAX_METHOD_LINEAR = 2,
} PremaxMethod;

// Closure verdict kinds.
typedef enum PremaxVerdict {
  PREMAX_VERDICT_STABILIZED = 0,
  PREMAX_VERDICT_ESCAPED_NEIGHBORHOOD = 1,
  PREMAX_VERDICT_BUDGET_EXHAUSTED = 2,
} PremaxVerdict;

// An experiment configuration together with the system it describes.
typedef struct PremaxConfig PremaxConfig;

// A parsed subshift presentation.
typedef struct PremaxSubshift PremaxSubshift;

// The result of a closure run.
typedef struct PremaxTrace PremaxTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static string.
const char *premax_version(void);

// Message of the last failing call on this thread, or null. Valid until the
// next failing call.
const char *premax_last_error(void);

// Free a string returned by this library.
//
// # Safety
// `s` must come from this library and not have been freed.
void premax_string_free(char *s);

// The default configuration (cat map).
//
// # Safety
// `out` must be a valid pointer.
enum PremaxStatus premax_config_default(struct PremaxConfig **out);

// Parse and validate a TOML configuration.
//
// # Safety
// `toml` must be a nul-terminated string and `out` a valid pointer.
enum PremaxStatus premax_config_from_toml(const char *toml, struct PremaxConfig **out);

// Dimension of the configured torus, or 0 for a null handle.
//
// # Safety
// `cfg` must be null or a live handle.
size_t premax_config_dim(const struct PremaxConfig *cfg);

// # Safety
// `cfg` must be null or a handle not yet freed.
void premax_config_free(struct PremaxConfig *cfg);

// Shadow the pseudo-orbit `points` (`n` rows of `dim` coordinates) and write
// the true orbit to `out`. `out_len` receives the number of doubles needed.
//
// # Safety
// Pointers must be valid for the stated sizes; `out` may be null to query the size.
enum PremaxStatus premax_shadow(const struct PremaxConfig *cfg,
                                const double *points,
                                size_t n,
                                bool periodic,
                                enum PremaxMethod method,
                                double *out,
                                size_t out_cap,
                                size_t *out_len,
                                double *sup_distance);

// Iterate the shadowing closure from the `n` points of `lambda0`, using the
// configured resolution, delta, neighbourhood radius, budget and sampling.
// A budget-exhausted run still yields a trace and returns `Ok`; inspect the
// verdict.
//
// # Safety
// Pointers must be valid; `points` holds `n * dim` doubles.
enum PremaxStatus premax_closure_run(const struct PremaxConfig *cfg,
                                     const double *points,
                                     size_t n,
                                     struct PremaxTrace **out);

// Verdict of a closure run; `at` receives the step index where one applies.
//
// # Safety
// `trace` must be a live handle; `at` may be null.
enum PremaxStatus premax_trace_verdict(const struct PremaxTrace *trace,
                                       enum PremaxVerdict *verdict,
                                       size_t *at);

// Copy the last iterate's points into `out`, row-major.
//
// # Safety
// `out` must hold `out_cap` doubles or be null to query the size.
enum PremaxStatus premax_trace_final_points(const struct PremaxTrace *trace,
                                            double *out,
                                            size_t out_cap,
                                            size_t *out_len);

// The whole trace as JSON; free with [`premax_string_free`].
//
// # Safety
// `trace` must be a live handle and `out` a valid pointer.
enum PremaxStatus premax_trace_json(const struct PremaxTrace *trace, char **out);

// # Safety
// `trace` must be null or a handle not yet freed.
void premax_trace_free(struct PremaxTrace *trace);

// Check local product structure on `n` points at the configured epsilon,
// delta and membership tolerance. `failures` counts failing and refused pairs.
//
// # Safety
// Pointers must be valid; `points` holds `n * dim` doubles.
enum PremaxStatus premax_local_product(const struct PremaxConfig *cfg,
                                       const double *points,
                                       size_t n,
                                       size_t *pairs_tested,
                                       size_t *failures);

// Parse a subshift presentation in the text format the CLI reads.
//
// # Safety
// `text` must be nul-terminated and `out` a valid pointer.
enum PremaxStatus premax_subshift_parse(const char *text, struct PremaxSubshift **out);

// Smallest window `k ≤ kmax` at which the subshift is of finite type, or 0
// if there is none.
//
// # Safety
// `s` must be a live handle and `k` a valid pointer.
enum PremaxStatus premax_subshift_sft_window(const struct PremaxSubshift *s,
                                             size_t kmax,
                                             size_t *k);

// # Safety
// `s` must be null or a handle not yet freed.
void premax_subshift_free(struct PremaxSubshift *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PREMAX_H */
