#ifndef NEMESYS_H
#define NEMESYS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum NemesysStatus {
  NEMESYS_STATUS_OK = 0,
  NEMESYS_STATUS_NULL_POINTER = 1,
  NEMESYS_STATUS_INVALID_UTF8 = 2,
  NEMESYS_STATUS_PARSE_ERROR = 3,
  NEMESYS_STATUS_META_ERROR = 4,
  NEMESYS_STATUS_GROUND_ERROR = 5,
  NEMESYS_STATUS_UNKNOWN_ATOM = 6,
  NEMESYS_STATUS_INVALID_ARGUMENT = 7,
  NEMESYS_STATUS_NOT_RUN = 8,
  NEMESYS_STATUS_PANIC = 9,
} NemesysStatus;

/**
 * Opaque engine handle.
 */
typedef struct NemesysEngine NemesysEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses `program`, lifts it under the interpreter `meta` (a built-in name
 * or a file path) and grounds it. On success `*out` owns a new engine.
 *
 * # Safety
 * `program` and `meta` must be NUL-terminated strings; `out` must be writable.
 */
enum NemesysStatus nemesys_engine_new(const char *program,
                                      const char *meta,
                                      struct NemesysEngine **out);

/**
 * Releases an engine. Null is ignored.
 *
 * # Safety
 * `engine` must come from [`nemesys_engine_new`] and not be used afterwards.
 */
void nemesys_engine_free(struct NemesysEngine *engine);

/**
 * Runs forward reasoning with identity rule weights. `steps == 0` uses the
 * grounding's derivation depth; `gamma <= 0` uses the sharp driver value.
 *
 * # Safety
 * `engine` must be a live handle.
 */
enum NemesysStatus nemesys_engine_run(struct NemesysEngine *engine, double gamma, uintptr_t steps);

/**
 * Writes the valuation of a ground atom from the last run into `*out`.
 *
 * # Safety
 * `engine` must be a live handle, `atom` a NUL-terminated string and `out`
 * writable.
 */
enum NemesysStatus nemesys_engine_valuation(const struct NemesysEngine *engine,
                                            const char *atom,
                                            double *out);

/**
 * Number of ground atoms, or 0 for a null handle.
 *
 * # Safety
 * `engine` must be a live handle or null.
 */
uintptr_t nemesys_engine_atom_count(const struct NemesysEngine *engine);

/**
 * Grounding report as JSON, plus `valuations` when the engine has run.
 * Returns null on failure. Free the result with [`nemesys_string_free`].
 *
 * # Safety
 * `engine` must be a live handle.
 */
char *nemesys_engine_report_json(const struct NemesysEngine *engine);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void nemesys_string_free(char *s);

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library on the same thread.
 */
const char *nemesys_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NEMESYS_H */
