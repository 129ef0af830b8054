#ifndef CDGL_H
#define CDGL_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CdglStatus {
  CDGL_STATUS_OK = 0,
  /**
   * The computation ran and some certificate failed.
   */
  CDGL_STATUS_CERTIFICATE_FAILURE = 1,
  /**
   * Bad model text, unknown scenario or fixture, window too narrow, …
   */
  CDGL_STATUS_INPUT_ERROR = 2,
  CDGL_STATUS_NULL_POINTER = 3,
  CDGL_STATUS_INVALID_UTF8 = 4,
  /**
   * A bug inside the library. The handle arguments are left untouched.
   */
  CDGL_STATUS_INTERNAL = 5,
} CdglStatus;

/**
 * A validated model: its source text plus the built algebra.
 */
typedef struct CdglModel CdglModel;

/**
 * Optional overrides for [`cdgl_run`]. Zero fields keep the model's own value.
 */
typedef struct CdglOptions {
  size_t truncate;
  size_t wedge;
  /**
   * Nonzero to use `window_min..window_max`.
   */
  int32_t has_window;
  int64_t window_min;
  int64_t window_max;
} CdglOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses and validates model text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer. On
 * success `*out` owns a model to be released with [`cdgl_model_free`].
 */
enum CdglStatus cdgl_model_parse(const char *text, struct CdglModel **out);

/**
 * Loads a built-in model such as `"cp2"` or `"disk1"`.
 *
 * # Safety
 * As for [`cdgl_model_parse`].
 */
enum CdglStatus cdgl_model_fixture(const char *name, struct CdglModel **out);

/**
 * # Safety
 * `model` must come from this library and not have been freed. Null is ignored.
 */
void cdgl_model_free(struct CdglModel *model);

/**
 * Canonical text of the model. Free the result with [`cdgl_string_free`].
 * Returns null if `model` is null.
 *
 * # Safety
 * `model` must be a live handle or null.
 */
char *cdgl_model_render(const struct CdglModel *model);

/**
 * Betti number of the model in `degree`, computed in the model's window.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum CdglStatus cdgl_model_betti(const struct CdglModel *model, int64_t degree, size_t *out);

/**
 * Runs a scenario (`"check"`, `"homology"`, `"derivations"`, `"mc"`, `"gauge"`,
 * `"fibration"`, `"classify-cell"`, `"quasi-iso-suite"`) and hands back the
 * JSON report in `*json`. The status is `CDGL_STATUS_OK` when every certificate
 * passes and `CDGL_STATUS_CERTIFICATE_FAILURE` when the report says otherwise; in
 * both cases `*json` is set. `options` may be null.
 *
 * # Safety
 * `model` must be a live handle, `scenario` a NUL-terminated string, `json`
 * a valid pointer, and `options` null or valid.
 */
enum CdglStatus cdgl_run(const struct CdglModel *model,
                         const char *scenario,
                         const struct CdglOptions *options,
                         char **json);

/**
 * Message for the last failed call on this thread, or an empty string. The
 * pointer stays valid until the next call into the library on this thread.
 */
const char *cdgl_last_error(void);

/**
 * # Safety
 * `s` must be a string returned by this library, or null.
 */
void cdgl_string_free(char *s);

/**
 * Library version, statically allocated.
 */
const char *cdgl_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CDGL_H */
