#ifndef MIXCRAFT_H
#define MIXCRAFT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum MixcraftStatus {
  MIXCRAFT_STATUS_OK = 0,
  MIXCRAFT_STATUS_NULL_POINTER = 1,
  MIXCRAFT_STATUS_INVALID_ARGUMENT = 2,
  MIXCRAFT_STATUS_IO = 3,
  MIXCRAFT_STATUS_NUMERICAL = 4,
  MIXCRAFT_STATUS_PANIC = 5,
} MixcraftStatus;

// Row-major observations.
typedef struct MixcraftDataset MixcraftDataset;

// Outcome of an estimation run.
typedef struct MixcraftFit MixcraftFit;

// A fitted or deserialized mixture.
typedef struct MixcraftModel MixcraftModel;

// Estimation settings. Names are the ones the command line accepts, e.g.
// `"histogram"`, `"Parzen window"`, `"k-nearest neighbour"` and `"BIC"`.
// Null names keep the defaults.
typedef struct MixcraftFitOptions {
  const char *preprocessing;
  const char *criterion;
  size_t cmax;
  double ar;
} MixcraftFitOptions;

// Headline numbers of a fit.
typedef struct MixcraftSummary {
  size_t c;
  size_t k;
  double ic;
  double log_l;
  size_t m;
} MixcraftSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version; free with `mixcraft_string_free`.
char *mixcraft_version(void);

// Message of the last failed call on this thread, or null. Free with
// `mixcraft_string_free`.
char *mixcraft_last_error(void);

// # Safety
// `s` must be null or a string returned by this library.
void mixcraft_string_free(char *s);

// Copies `n * d` row-major values into a new dataset.
//
// # Safety
// `values` must point to `n * d` doubles; `out` must be writable.
enum MixcraftStatus mixcraft_dataset_new(const double *values,
                                         size_t n,
                                         size_t d,
                                         struct MixcraftDataset **out);

// Reads a CSV file; a header row is detected automatically.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum MixcraftStatus mixcraft_dataset_load_csv(const char *path, struct MixcraftDataset **out);

// # Safety
// `ds` must be a dataset handle.
size_t mixcraft_dataset_n(const struct MixcraftDataset *ds);

// # Safety
// `ds` must be a dataset handle.
size_t mixcraft_dataset_d(const struct MixcraftDataset *ds);

// # Safety
// `ds` must be null or a dataset handle not freed before.
void mixcraft_dataset_free(struct MixcraftDataset *ds);

// Default options: histogram preprocessing, AIC, `cmax = 15`, `ar = 0.1`.
struct MixcraftFitOptions mixcraft_fit_options_default(void);

// Estimates a mixture. `opts` may be null for the defaults.
//
// # Safety
// `ds` must be a dataset handle, `opts` null or valid, `out` writable.
enum MixcraftStatus mixcraft_fit(const struct MixcraftDataset *ds,
                                 const struct MixcraftFitOptions *opts,
                                 struct MixcraftFit **out);

// # Safety
// `fit` must be a fit handle; `out` writable.
enum MixcraftStatus mixcraft_fit_summary(const struct MixcraftFit *fit,
                                         struct MixcraftSummary *out);

// Copies the selected model into a new handle.
//
// # Safety
// `fit` must be a fit handle; `out` writable.
enum MixcraftStatus mixcraft_fit_model(const struct MixcraftFit *fit, struct MixcraftModel **out);

// # Safety
// `fit` must be null or a fit handle not freed before.
void mixcraft_fit_free(struct MixcraftFit *fit);

// # Safety
// `json` must be a NUL-terminated string; `out` writable.
enum MixcraftStatus mixcraft_model_from_json(const char *json, struct MixcraftModel **out);

// JSON document of the model, or null; free with `mixcraft_string_free`.
//
// # Safety
// `model` must be a model handle.
char *mixcraft_model_to_json(const struct MixcraftModel *model);

// # Safety
// `model` must be a model handle.
size_t mixcraft_model_c(const struct MixcraftModel *model);

// # Safety
// `model` must be a model handle.
size_t mixcraft_model_d(const struct MixcraftModel *model);

// Weight, mean (`d` values) and covariance (`d * d`, row-major) of
// component `l`, counted from zero. Null outputs are skipped.
//
// # Safety
// `model` must be a model handle; non-null buffers must hold the sizes above.
enum MixcraftStatus mixcraft_model_component(const struct MixcraftModel *model,
                                             size_t l,
                                             double *weight,
                                             double *mean,
                                             double *covariance);

// Mixture density at `n` row-major points of dimension `d`.
//
// # Safety
// `points` must hold `n * d` doubles and `out` room for `n`.
enum MixcraftStatus mixcraft_model_pdf(const struct MixcraftModel *model,
                                       const double *points,
                                       size_t n,
                                       double *out);

// # Safety
// `model` must be null or a model handle not freed before.
void mixcraft_model_free(struct MixcraftModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIXCRAFT_H */
