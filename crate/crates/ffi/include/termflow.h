#ifndef TERMFLOW_H
#define TERMFLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TfStatus {
  TF_STATUS_OK = 0,
  TF_STATUS_NULL_ARGUMENT = 1,
  TF_STATUS_INVALID_UTF8 = 2,
  TF_STATUS_IO = 3,
  TF_STATUS_MALFORMED_INPUT = 4,
  TF_STATUS_INVALID_ARGUMENT = 5,
  TF_STATUS_NOT_FOUND = 6,
  TF_STATUS_ANALYSIS_FAILED = 7,
  TF_STATUS_PANIC = 8,
} TfStatus;

// Opaque handle to an immutable corpus index.
typedef struct TfCorpus TfCorpus;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null after a
// success. Valid until the next call into the library on this thread.
const char *tf_last_error_message(void);

// Load a JSON-lines or CSV corpus (by extension) into `*out`.
// `bin_width` of 0 selects the default two-year bins.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable pointer.
enum TfStatus tf_corpus_load(const char *path, uint32_t bin_width, struct TfCorpus **out);

// # Safety
// `corpus` must come from [`tf_corpus_load`] and not be freed twice. Null is ignored.
void tf_corpus_free(struct TfCorpus *corpus);

// # Safety
// `corpus` must be a live handle and `out` writable.
enum TfStatus tf_corpus_document_count(const struct TfCorpus *corpus, uint64_t *out);

// Documents in one (discipline, bin) cell matching `term`.
//
// # Safety
// Pointers must be valid; strings NUL-terminated.
enum TfStatus tf_count_matches(const struct TfCorpus *corpus,
                               const char *term,
                               const char *discipline,
                               int32_t bin_start,
                               uint32_t *out);

// # Safety
// `out` must be writable.
enum TfStatus tf_poisson_cdf(uint64_t k, double lambda, double *out);

// # Safety
// `out` must be writable.
enum TfStatus tf_normal_percentile(uint64_t k, double lambda, double *out);

// # Safety
// `out` must be writable.
enum TfStatus tf_adoption_rate(double c, double p_m, double p_0, double p, double *out);

// Closed-form adopters at time `t`.
//
// # Safety
// `out` must be writable.
enum TfStatus tf_logistic_at(double c, double p_m, double p_0, double t, double *out);

// Growth series for `term` in `discipline` as CSV in `*out`.
//
// # Safety
// Pointers must be valid; free `*out` with [`tf_string_free`].
enum TfStatus tf_trend_csv(const struct TfCorpus *corpus,
                           const char *term,
                           const char *discipline,
                           uint32_t smoothing_window,
                           uint32_t support_threshold,
                           char **out);

// Donor/borrower report for `term` across every discipline as JSON in
// `*out`. Peaks at or above `strong_fraction` of the highest peak count
// as strong.
//
// # Safety
// Pointers must be valid; free `*out` with [`tf_string_free`].
enum TfStatus tf_migrate_json(const struct TfCorpus *corpus,
                              const char *term,
                              double strong_fraction,
                              char **out);

// # Safety
// `s` must come from this library and not be freed twice. Null is ignored.
void tf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TERMFLOW_H */
