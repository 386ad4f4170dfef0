#ifndef FORESTCHECK_H
#define FORESTCHECK_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum FcStatus {
  FC_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  FC_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  FC_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed model, space, specification or instance.
   */
  FC_STATUS_INVALID_INPUT = 3,
  /**
   * A gradient-boosted dump was loaded without a base score.
   */
  FC_STATUS_MISSING_BASE_SCORE = 4,
  /**
   * An instance lies outside the feature space.
   */
  FC_STATUS_OUT_OF_DOMAIN = 5,
  /**
   * The node or time budget ran out.
   */
  FC_STATUS_EXHAUSTED = 6,
  FC_STATUS_INTERNAL = 7,
  /**
   * A panic was caught at the boundary.
   */
  FC_STATUS_PANIC = 8,
} FcStatus;

/**
 * A loaded model together with its feature space.
 */
typedef struct FcModel FcModel;

/**
 * The outcome of checking a specification file.
 */
typedef struct FcReport FcReport;

/**
 * Search budget for verification and explanation.
 */
typedef struct FcOptions {
  uint64_t max_nodes;
  double timeout_s;
  /**
   * Single-threaded search with reproducible witnesses.
   */
  bool deterministic;
} FcOptions;

/**
 * The message of the last failed call on this thread, or null. The pointer
 * stays valid until the next library call on the same thread.
 */
const char *fc_last_error(void);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void fc_string_free(char *s);

/**
 * Library version as a static string.
 */
const char *fc_version(void);

/**
 * Ten million nodes, 300 seconds, parallel search.
 */
struct FcOptions fc_options_default(void);

/**
 * Loads a model from JSON text. `base_score` may be null for additive
 * dumps; gradient-boosted dumps require it.
 *
 * # Safety
 * String arguments must be null or nul-terminated; `out` must be writable.
 */
enum FcStatus fc_model_load(const char *model_json,
                            const char *space_json,
                            const char *base_score,
                            bool allow_missing_branch,
                            struct FcModel **out);

/**
 * # Safety
 * `model` must be null or a handle from [`fc_model_load`] not yet freed.
 */
void fc_model_free(struct FcModel *model);

/**
 * Number of features, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t fc_model_feature_count(const struct FcModel *model);

/**
 * Exact logit at `values` as decimal text (or `numer/denom` when the
 * expansion does not terminate). Free `*out_logit` with [`fc_string_free`].
 *
 * # Safety
 * `values` must point to `len` floats; `out_logit` must be writable.
 */
enum FcStatus fc_model_logit(const struct FcModel *model,
                             const float *values,
                             size_t len,
                             char **out_logit);

/**
 * Checks every entry of a specification file. A malformed entry is
 * recorded in the report rather than failing the call.
 *
 * # Safety
 * `options` may be null for defaults; `out` must be writable.
 */
enum FcStatus fc_verify(const struct FcModel *model,
                        const char *specs_json,
                        const struct FcOptions *options,
                        struct FcReport **out);

/**
 * # Safety
 * `report` must be null or a handle from [`fc_verify`] not yet freed.
 */
void fc_report_free(struct FcReport *report);

/**
 * 0 when every specification holds, 1 when one is violated, 2 on errors,
 * exhausted budgets or a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
int32_t fc_report_exit_code(const struct FcReport *report);

/**
 * The report as JSON or plain text. Free `*out` with [`fc_string_free`].
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum FcStatus fc_report_render(const struct FcReport *report, bool as_text, char **out);

/**
 * A minimal set of features that alone fixes the prediction at `values`,
 * as JSON `{"features": [...], "predicted": ..., "logit": ..., ...}`.
 * `order` lists feature indices in deletion order and may be null.
 *
 * # Safety
 * `values` must point to `len` floats and `order` to `order_len` indices.
 */
enum FcStatus fc_explain(const struct FcModel *model,
                         const float *values,
                         size_t len,
                         const size_t *order,
                         size_t order_len,
                         const struct FcOptions *options,
                         char **out_json);

#endif  /* FORESTCHECK_H */
