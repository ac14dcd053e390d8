#ifndef HASHRANK_H
#define HASHRANK_H

/* Generated by cbindgen from the hashrank-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HrStatus {
  HR_STATUS_OK = 0,
  HR_STATUS_NULL_POINTER = 1,
  HR_STATUS_INVALID_UTF8 = 2,
  HR_STATUS_IO = 3,
  HR_STATUS_PARSE = 4,
  HR_STATUS_VALIDATION = 5,
  HR_STATUS_CONSISTENCY = 6,
  HR_STATUS_BUFFER_TOO_SMALL = 7,
  HR_STATUS_PANIC = 8,
} HrStatus;

typedef enum HrHashtagStyle {
  HR_HASHTAG_STYLE_WEIBO = 0,
  HR_HASHTAG_STYLE_TWITTER = 1,
} HrHashtagStyle;

/**
 * Loaded domain classifier.
 */
typedef struct HrClassifier HrClassifier;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into this library from the same thread.
 */
const char *hr_last_error(void);

/**
 * Library version, a static string.
 */
const char *hr_version(void);

/**
 * Load a classifier saved by `hashrank train`.
 *
 * # Safety
 * `model_dir` must be a NUL-terminated string; `out` must be writable.
 */
enum HrStatus hr_classifier_load(const char *model_dir, struct HrClassifier **out);

/**
 * # Safety
 * `clf` must come from [`hr_classifier_load`] and not be used afterwards.
 */
void hr_classifier_free(struct HrClassifier *clf);

/**
 * Number of domain labels, 0 for a null handle.
 *
 * # Safety
 * `clf` must be null or a live handle.
 */
size_t hr_classifier_num_labels(const struct HrClassifier *clf);

/**
 * Label `index`, owned by the handle; null when out of range.
 *
 * # Safety
 * `clf` must be null or a live handle.
 */
const char *hr_classifier_label(const struct HrClassifier *clf, size_t index);

/**
 * Domain probabilities for `text`, written to `probs[0..num_labels]`, and
 * the index of the winning label.
 *
 * # Safety
 * `clf` must be a live handle, `text` NUL-terminated, `probs` valid for
 * `probs_len` writes; `best` may be null.
 */
enum HrStatus hr_classifier_classify(const struct HrClassifier *clf,
                                     const char *text,
                                     double *probs,
                                     size_t probs_len,
                                     size_t *best);

/**
 * Hashtags in `text` as a JSON array of strings.
 *
 * # Safety
 * `text` must be NUL-terminated; `out_json` writable. Free the result with
 * [`hr_string_free`].
 */
enum HrStatus hr_extract_hashtags(const char *text, enum HrHashtagStyle style, char **out_json);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void hr_string_free(char *s);

/**
 * Recency weight of a post at `t_j` seen from `t_p`, decay constant `gamma`
 * in seconds.
 *
 * # Safety
 * `out` must be writable.
 */
enum HrStatus hr_decay_weight(int64_t t_p, int64_t t_j, double gamma, double *out);

/**
 * NDCG@k of relevances in ranked order against the same items' relevances.
 *
 * # Safety
 * `ranked` and `ideal` must be valid for their lengths; `out` writable.
 */
enum HrStatus hr_ndcg_at_k(const double *ranked,
                           size_t ranked_len,
                           const double *ideal,
                           size_t ideal_len,
                           size_t k,
                           double *out);

/**
 * Fleiss' kappa over a row-major `n_items x n_categories` count matrix.
 *
 * # Safety
 * `counts` must hold `n_items * n_categories` values; `out` writable.
 */
enum HrStatus hr_fleiss_kappa(const uint32_t *counts,
                              size_t n_items,
                              size_t n_categories,
                              double *out);

/**
 * Run the `rank` step with a JSON config file (null for defaults), writing
 * the usual output files.
 *
 * # Safety
 * `config_path` must be null or NUL-terminated.
 */
enum HrStatus hr_rank(const char *config_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HASHRANK_H */
