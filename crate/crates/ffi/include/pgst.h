#ifndef PGST_H
#define PGST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum PgstStatus {
  PGST_STATUS_OK = 0,
  PGST_STATUS_NULL_POINTER = 1,
  PGST_STATUS_INVALID_UTF8 = 2,
  PGST_STATUS_PARSE_ERROR = 3,
  /**
   * The inputs do not meet the method's hypotheses.
   */
  PGST_STATUS_REFUSED = 4,
  PGST_STATUS_INVALID_ARGUMENT = 5,
  PGST_STATUS_INTERNAL = 6,
  PGST_STATUS_BUFFER_TOO_SMALL = 7,
} PgstStatus;

/**
 * Decision procedure selector for [`pgst_decide`].
 */
typedef enum PgstMethod {
  PGST_METHOD_AUTO = 0,
  PGST_METHOD_GENERAL = 1,
  PGST_METHOD_S_SETS = 2,
  PGST_METHOD_R_SETS = 3,
} PgstMethod;

/**
 * A parsed state on a path.
 */
typedef struct PgstState PgstState;

/**
 * A decision with its certificate.
 */
typedef struct PgstVerdict PgstVerdict;

/**
 * Outcome of [`pgst_find_transfer_time`].
 */
typedef struct PgstTimeResult {
  double tau;
  double delta;
  double achieved_overlap;
  double overlap_lower_bound;
  uint64_t budget_used;
  bool complete;
} PgstTimeResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *pgst_version(void);

/**
 * Copy the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `capacity - 1` bytes). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or valid for `capacity` bytes.
 */
size_t pgst_last_error_message(char *buf, size_t capacity);

/**
 * Parse a state literal such as `"1:1,3:1"` for the path on `n` vertices.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` valid for writing.
 */
enum PgstStatus pgst_state_parse(const char *text, size_t n, struct PgstState **out);

/**
 * Release a state. Null is ignored.
 *
 * # Safety
 * `state` must be null or come from [`pgst_state_parse`], and not be used afterwards.
 */
void pgst_state_free(struct PgstState *state);

/**
 * Number of vertices of the state's path.
 *
 * # Safety
 * `state` must be a live state and `n` valid for writing.
 */
enum PgstStatus pgst_state_n(const struct PgstState *state, size_t *n);

/**
 * Eigenvalue support indices in increasing order.
 *
 * `*len` always receives the support size. When it exceeds `capacity` the
 * call returns `PGST_STATUS_BUFFER_TOO_SMALL` and writes nothing to `buf`.
 *
 * # Safety
 * `state` must be a live state, `len` valid for writing, and `buf` valid for
 * `capacity` elements (it may be null when `capacity` is 0).
 */
enum PgstStatus pgst_support(const struct PgstState *state,
                             size_t *buf,
                             size_t capacity,
                             size_t *len);

/**
 * Decide PGST between the state and its mirror image.
 *
 * # Safety
 * `state` must be a live state and `out` valid for writing.
 */
enum PgstStatus pgst_decide(const struct PgstState *state,
                            enum PgstMethod method,
                            struct PgstVerdict **out);

/**
 * Release a verdict. Null is ignored.
 *
 * # Safety
 * `verdict` must be null or come from [`pgst_decide`], and not be used afterwards.
 */
void pgst_verdict_free(struct PgstVerdict *verdict);

/**
 * Whether the verdict is positive.
 *
 * # Safety
 * `verdict` must be a live verdict and `is_yes` valid for writing.
 */
enum PgstStatus pgst_verdict_answer(const struct PgstVerdict *verdict, bool *is_yes);

/**
 * Serialize the verdict as JSON. Free the string with [`pgst_string_free`].
 *
 * # Safety
 * `verdict` must be a live verdict and `out` valid for writing.
 */
enum PgstStatus pgst_verdict_to_json(const struct PgstVerdict *verdict, char **out);

/**
 * Re-verify the certificate in a JSON verdict (or a CLI `decide` report).
 * Returns `PGST_STATUS_OK` if it checks out and `PGST_STATUS_REFUSED` if not.
 *
 * # Safety
 * `json` must be a NUL-terminated string.
 */
enum PgstStatus pgst_verdict_check_json(const char *json);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library, and not be used afterwards.
 */
void pgst_string_free(char *s);

/**
 * `|<mirror|U(t)|v>|` and its square for the normalized state.
 *
 * # Safety
 * `state` must be a live state; `overlap` and `fidelity` valid for writing.
 */
enum PgstStatus pgst_transfer_fidelity(const struct PgstState *state,
                                       double t,
                                       double *overlap,
                                       double *fidelity);

/**
 * Search for a time with overlap at least `1 - epsilon`. A `budget` of 0
 * selects the default.
 *
 * # Safety
 * `state` must be a live state and `out` valid for writing.
 */
enum PgstStatus pgst_find_transfer_time(const struct PgstState *state,
                                        double epsilon,
                                        uint64_t budget,
                                        struct PgstTimeResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PGST_H */
