#ifndef WETVAL_H
#define WETVAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WvBackTransform {
  WV_BACK_TRANSFORM_NAIVE_EXP = 0,
  WV_BACK_TRANSFORM_HALF_VARIANCE_CORRECTED = 1,
} WvBackTransform;

// Result code of every fallible call.
typedef enum WvStatus {
  WV_STATUS_OK = 0,
  WV_STATUS_NULL_POINTER = 1,
  WV_STATUS_INVALID_UTF8 = 2,
  // Malformed or inconsistent input data.
  WV_STATUS_INPUT_ERROR = 3,
  // Rank deficiency or invalid degrees of freedom.
  WV_STATUS_NUMERICAL_ERROR = 4,
  WV_STATUS_IO_ERROR = 5,
  WV_STATUS_INDEX_OUT_OF_RANGE = 6,
  // A Rust panic was caught at the boundary.
  WV_STATUS_INTERNAL_ERROR = 7,
} WvStatus;

// Screened and quality-coded study records plus normalization tables.
typedef struct WvDataset WvDataset;

// A fitted model with its encoding schema.
typedef struct WvFit WvFit;

// Policy sites for transfer.
typedef struct WvSites WvSites;

// Per-parameter statistics.
typedef struct WvParameter {
  double coefficient;
  double std_error;
  double t_value;
  double p_value;
} WvParameter;

// Whole-model statistics.
typedef struct WvFitSummary {
  size_t n;
  size_t df_residual;
  double r2;
  double adj_r2;
  double f_stat;
  double f_p_value;
  double sigma2;
} WvFitSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next `wv_*` call on the same thread.
const char *wv_last_error_message(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from a `wv_*` function returning an owned string.
void wv_string_free(char *s);

// Loads, screens and quality-codes a dataset.
//
// # Safety
// Paths must be NUL-terminated; `out` must be writable.
enum WvStatus wv_dataset_load(const char *data_path,
                              const char *rates_path,
                              struct WvDataset **out);

// # Safety
// `ds` must be null or a handle from [`wv_dataset_load`], freed once.
void wv_dataset_free(struct WvDataset *ds);

// Records read before screening.
//
// # Safety
// `ds` must be a live dataset handle or null (returns 0).
size_t wv_dataset_ingested(const struct WvDataset *ds);

// Records retained by screening.
//
// # Safety
// As [`wv_dataset_ingested`].
size_t wv_dataset_retained(const struct WvDataset *ds);

// Distinct articles among the retained records.
//
// # Safety
// As [`wv_dataset_ingested`].
size_t wv_dataset_articles(const struct WvDataset *ds);

// Fits the meta-regression on a dataset. `schema_toml` may be null for the
// default layout.
//
// # Safety
// `ds` must be live; `schema_toml` null or NUL-terminated; `out` writable.
enum WvStatus wv_fit(const struct WvDataset *ds, const char *schema_toml, struct WvFit **out);

// # Safety
// `fit` must be null or a handle from this library, freed once.
void wv_fit_free(struct WvFit *fit);

// Number of parameters including the intercept.
//
// # Safety
// `fit` must be live or null (returns 0).
size_t wv_fit_num_params(const struct WvFit *fit);

// Label of parameter `index`, owned by the fit; null when out of range.
//
// # Safety
// `fit` must be live or null.
const char *wv_fit_label(const struct WvFit *fit, size_t index);

// # Safety
// `fit` live, `out` writable.
enum WvStatus wv_fit_parameter(const struct WvFit *fit, size_t index, struct WvParameter *out);

// # Safety
// `fit` live, `out` writable.
enum WvStatus wv_fit_summary(const struct WvFit *fit, struct WvFitSummary *out);

// Serializes the model (schema + fit) as JSON into `*out`; release with
// [`wv_string_free`].
//
// # Safety
// `fit` live, `out` writable.
enum WvStatus wv_fit_to_json(const struct WvFit *fit, char **out);

// Restores a model saved by [`wv_fit_to_json`] or the `fit` command.
//
// # Safety
// `json` NUL-terminated, `out` writable.
enum WvStatus wv_fit_from_json(const char *json, struct WvFit **out);

// Reads policy sites from CSV.
//
// # Safety
// `path` NUL-terminated, `out` writable.
enum WvStatus wv_sites_load(const char *path, struct WvSites **out);

// # Safety
// `sites` null or a handle from [`wv_sites_load`], freed once.
void wv_sites_free(struct WvSites *sites);

// # Safety
// `sites` live or null (returns 0).
size_t wv_sites_count(const struct WvSites *sites);

// Function transfer to site `index`: log prediction and back-transformed
// value (2007 US$ per ha per year).
//
// # Safety
// Handles live; output pointers writable.
enum WvStatus wv_predict(const struct WvFit *fit,
                         const struct WvSites *sites,
                         size_t index,
                         enum WvBackTransform mode,
                         double *out_log,
                         double *out_value);

// Two-sided Student-t p-value; NaN for invalid arguments.
double wv_t_p_value(double t, double df);

// Upper tail P(F ≥ f) of F(d1, d2); NaN for invalid arguments.
double wv_f_upper_tail(double f, double d1, double d2);

// # Safety
// `out` writable.
enum WvStatus wv_adjusted_r_squared(double r2, size_t n, size_t k, double *out);

// # Safety
// `out` writable.
enum WvStatus wv_f_statistic(double r2, size_t n, size_t k, double *out);

// |predicted − observed| / observed.
//
// # Safety
// `out` writable.
enum WvStatus wv_transfer_error(double predicted, double observed, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WETVAL_H */
