/* C interface to the drinlev torsion-level calculus. Generated by cbindgen; do not edit. */

#ifndef DRINLEV_H
#define DRINLEV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * The request was evaluated and every check passed.
 */
#define DRINLEV_OK 0

/**
 * The request was well formed but a mathematical check failed; the
 * report carries the partial result plus an "error" field.
 */
#define DRINLEV_CHECK_FAILED 1

/**
 * Malformed request: unparseable JSON, unknown fields, bad arguments,
 * or a capacity bound was exceeded.
 */
#define DRINLEV_BAD_REQUEST 2

/**
 * A panic was caught at the boundary. The report carries an "error"
 * field; the handle is still valid and must still be freed.
 */
#define DRINLEV_PANIC 3

/**
 * A required pointer argument was null.
 */
#define DRINLEV_NULL_ARGUMENT 4

/**
 * Opaque result handle. Layout is not part of the ABI; access goes
 * through `drinlev_result_status` and `drinlev_result_json`, release
 * through `drinlev_result_free`.
 */
typedef struct DrinlevResult DrinlevResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Evaluate a JSON request and return a fresh result handle.
 *
 * Never returns null: malformed requests, failed checks and caught
 * panics all come back as handles whose status says what happened.
 * The caller owns the handle and must release it with
 * `drinlev_result_free`.
 */
struct DrinlevResult *drinlev_eval(const char *request_json);

/**
 * Status code of a result: one of the DRINLEV_* constants.
 * A null handle reports DRINLEV_NULL_ARGUMENT.
 */
int32_t drinlev_result_status(const struct DrinlevResult *result);

/**
 * The result's JSON report as a NUL-terminated string. The pointer
 * belongs to the handle and is valid until `drinlev_result_free`;
 * a null handle yields null.
 */
const char *drinlev_result_json(const struct DrinlevResult *result);

/**
 * Release a result handle. Null is accepted and ignored; freeing the
 * same handle twice is undefined behaviour, as with free(3).
 */
void drinlev_result_free(struct DrinlevResult *result);

/**
 * Library version as a static NUL-terminated string; never freed by
 * the caller.
 */
const char *drinlev_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DRINLEV_H */
