#ifndef DIRTREND_H
#define DIRTREND_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum DtStatus {
  DT_STATUS_OK = 0,
  DT_STATUS_NULL_POINTER = 1,
  DT_STATUS_INVALID_ARGUMENT = 2,
  DT_STATUS_DIMENSION_MISMATCH = 3,
  DT_STATUS_DEGENERATE_ROW = 4,
  DT_STATUS_NUMERICAL_FAILURE = 5,
  DT_STATUS_IO = 6,
  DT_STATUS_PARSE = 7,
  DT_STATUS_PANIC = 8,
} DtStatus;

/**
 * Observed unit vectors, one per row, in time order.
 */
typedef struct DtData DtData;

/**
 * A smoother family `A(t)` of fixed size.
 */
typedef struct DtFamily DtFamily;

/**
 * Result of an adaptive selection.
 */
typedef struct DtFit DtFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL after a
 * successful call. Valid until the next `dt_*` call on this thread.
 */
const char *dt_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *dt_version(void);

/**
 * Builds a data set from `p` unit rows of length `q` (row-major, `p * q`
 * values). `times` may be NULL or point to `p` non-decreasing values.
 *
 * # Safety
 * `rows` must point to `p * q` readable doubles, `times` to `p` when not
 * NULL, and `out` must be writable.
 */
enum DtStatus dt_data_new(const double *rows,
                          size_t p,
                          size_t q,
                          const double *times,
                          struct DtData **out);

/**
 * Reads a CSV file with header `time,theta,phi` (radians) or, when
 * `degrees` is true, `time,lat,lon`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum DtStatus dt_data_from_csv(const char *path, bool degrees, struct DtData **out);

/**
 * # Safety
 * `data` must be NULL or a handle from this library not yet freed.
 */
void dt_data_free(struct DtData *data);

/**
 * Number of observations `p` and their dimension `q`.
 *
 * # Safety
 * `data` must be a live handle; the outputs must be writable or NULL.
 */
enum DtStatus dt_data_shape(const struct DtData *data, size_t *out_p, size_t *out_q);

/**
 * Copies the unit rows (row-major, `p * q` values) into `out`.
 *
 * # Safety
 * `data` must be a live handle and `out` must hold `len` doubles.
 */
enum DtStatus dt_data_rows(const struct DtData *data, double *out, size_t len);

/**
 * First-difference dispersion estimate.
 *
 * # Safety
 * `data` must be a live handle and `out` writable.
 */
enum DtStatus dt_gamma2_hat(const struct DtData *data, double *out);

/**
 * Penalised least squares with a normalised `d`-th difference penalty of
 * scale `c` (1000 is customary).
 *
 * # Safety
 * `out` must be writable.
 */
enum DtStatus dt_family_pls(size_t p, size_t d, double c, struct DtFamily **out);

/**
 * Span-3 weighted running averages with one parameter.
 *
 * # Safety
 * `out` must be writable.
 */
enum DtStatus dt_family_running_average(size_t p, struct DtFamily **out);

/**
 * The parameterless span-3 running average.
 *
 * # Safety
 * `out` must be writable.
 */
enum DtStatus dt_family_span3(size_t p, struct DtFamily **out);

/**
 * # Safety
 * `family` must be NULL or a handle from this library not yet freed.
 */
void dt_family_free(struct DtFamily *family);

/**
 * Parameter dimension `k` of the family.
 *
 * # Safety
 * `family` must be a live handle and `out` writable.
 */
enum DtStatus dt_family_dim(const struct DtFamily *family, size_t *out);

/**
 * Writes `A(t)` (row-major, `p * p` values).
 *
 * # Safety
 * `t` must hold `k` doubles, `out` must hold `len` doubles.
 */
enum DtStatus dt_family_matrix(const struct DtFamily *family,
                               const double *t,
                               size_t k,
                               double *out,
                               size_t len);

/**
 * Estimated risk of `A(t)` on the data, given a dispersion estimate.
 *
 * # Safety
 * Handles must be live, `t` must hold `k` doubles, and `out` be writable.
 */
enum DtStatus dt_estimated_risk(const struct DtData *data,
                                const struct DtFamily *family,
                                const double *t,
                                size_t k,
                                double gamma2hat,
                                double *out);

/**
 * Minimises the estimated risk over the family on a grid of
 * `grid_points` per axis (0 for the default 201), optionally refined.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum DtStatus dt_select(const struct DtData *data,
                        const struct DtFamily *family,
                        size_t grid_points,
                        bool refine,
                        struct DtFit **out);

/**
 * Copies the selected parameter into `out` (capacity `len`) and its length
 * into `written`.
 *
 * # Safety
 * `fit` must be live; `out` must hold `len` doubles; `written` writable or NULL.
 */
enum DtStatus dt_fit_t_hat(const struct DtFit *fit, double *out, size_t len, size_t *written);

/**
 * # Safety
 * `fit` must be live and `out` writable.
 */
enum DtStatus dt_fit_estimated_risk(const struct DtFit *fit, double *out);

/**
 * Fitted unit directions (row-major, `p * q` values).
 *
 * # Safety
 * `fit` must be live and `out` must hold `len` doubles.
 */
enum DtStatus dt_fit_directions(const struct DtFit *fit, double *out, size_t len);

/**
 * # Safety
 * `fit` must be NULL or a handle from this library not yet freed.
 */
void dt_fit_free(struct DtFit *fit);

/**
 * Simulates a built-in trend (`"wobble"`, `"bat"` or `"jumps"`). The true
 * mean directions are written to `truth` (`p * 3` values) unless it is NULL.
 *
 * # Safety
 * `trend` must be a NUL-terminated string, `out` writable, and `truth` NULL
 * or able to hold `p * 3` doubles.
 */
enum DtStatus dt_simulate(const char *trend,
                          size_t p,
                          double kappa,
                          uint64_t seed,
                          struct DtData **out,
                          double *truth);

/**
 * Lambert projection of `(theta, phi)` onto the disk of radius √2.
 *
 * # Safety
 * The outputs must be writable.
 */
enum DtStatus dt_lambert_project(double theta,
                                 double phi,
                                 double *out_u,
                                 double *out_v,
                                 bool *out_north);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIRTREND_H */
