#ifndef COMPACTA_H
#define COMPACTA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CompactaMethod {
  COMPACTA_METHOD_TIME_SLICE = 0,
  COMPACTA_METHOD_RRIF = 1,
  COMPACTA_METHOD_FIXED = 2,
} CompactaMethod;

typedef enum CompactaScale {
  COMPACTA_SCALE_STANDARD_ERROR = 0,
  COMPACTA_SCALE_STANDARD_DEVIATION = 1,
} CompactaScale;

/**
 * Status codes. 2, 3 and 4 match the CLI exit codes.
 */
typedef enum CompactaStatus {
  COMPACTA_STATUS_OK = 0,
  COMPACTA_STATUS_INVALID_ARGUMENT = 1,
  COMPACTA_STATUS_CONFIG = 2,
  COMPACTA_STATUS_IO = 3,
  COMPACTA_STATUS_NUMERIC = 4,
  COMPACTA_STATUS_NULL_POINTER = 5,
  COMPACTA_STATUS_PANIC = 6,
} CompactaStatus;

typedef struct CompactaFrameSet CompactaFrameSet;

typedef struct CompactaModel CompactaModel;

typedef struct CompactaPeaks CompactaPeaks;

typedef struct CompactaSignal CompactaSignal;

/**
 * Fitted standardization parameters.
 */
typedef struct CompactaModelParams {
  size_t n;
  double mean;
  double var_classic;
  double mode_value;
  double mode_prob;
  /**
   * Bin width used for the mode, 0 for exact matching.
   */
  double bin_width;
  double phi;
  double var_mode;
  double eta;
} CompactaModelParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *compacta_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *compacta_version(void);

/**
 * # Safety
 * `samples` must point to `len` readable doubles, `record_id` to a
 * NUL-terminated string and `out` to writable storage for a handle.
 */
enum CompactaStatus compacta_signal_new(const double *samples,
                                        size_t len,
                                        double sampling_rate_hz,
                                        const char *record_id,
                                        struct CompactaSignal **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum CompactaStatus compacta_signal_read_csv(const char *path,
                                             double sampling_rate_hz,
                                             struct CompactaSignal **out);

/**
 * # Safety
 * `sig` must be a live handle or NULL.
 */
size_t compacta_signal_len(const struct CompactaSignal *sig);

/**
 * # Safety
 * `sig` must come from a `compacta_signal_*` constructor and not be used again.
 */
void compacta_signal_free(struct CompactaSignal *sig);

/**
 * # Safety
 * `indices` must point to `len` readable values and `out` be writable.
 */
enum CompactaStatus compacta_peaks_new(const size_t *indices,
                                       size_t len,
                                       struct CompactaPeaks **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum CompactaStatus compacta_peaks_read_csv(const char *path, struct CompactaPeaks **out);

/**
 * # Safety
 * `sig` must be a live handle and `out` writable.
 */
enum CompactaStatus compacta_peaks_detect(const struct CompactaSignal *sig,
                                          double min_height,
                                          double refractory_s,
                                          struct CompactaPeaks **out);

/**
 * # Safety
 * `peaks` must be a live handle or NULL.
 */
size_t compacta_peaks_len(const struct CompactaPeaks *peaks);

/**
 * Copies up to `cap` indices into `buf`; returns the total count.
 *
 * # Safety
 * `peaks` must be a live handle; `buf` must hold `cap` values when `cap > 0`.
 */
size_t compacta_peaks_copy(const struct CompactaPeaks *peaks, size_t *buf, size_t cap);

/**
 * # Safety
 * `peaks` must come from a `compacta_peaks_*` constructor and not be used again.
 */
void compacta_peaks_free(struct CompactaPeaks *peaks);

/**
 * Frames of `window_s` seconds starting at each peak.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum CompactaStatus compacta_time_slice(const struct CompactaSignal *sig,
                                        const struct CompactaPeaks *peaks,
                                        double window_s,
                                        struct CompactaFrameSet **out);

/**
 * Each peak-to-peak interval resampled to `frame_length` points.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum CompactaStatus compacta_rr_frame(const struct CompactaSignal *sig,
                                      const struct CompactaPeaks *peaks,
                                      size_t frame_length,
                                      struct CompactaFrameSet **out);

/**
 * One frame covering `[start_s, start_s + duration_s)`.
 *
 * # Safety
 * `sig` must be live and `out` writable.
 */
enum CompactaStatus compacta_fixed_slice(const struct CompactaSignal *sig,
                                         double start_s,
                                         double duration_s,
                                         struct CompactaFrameSet **out);

/**
 * # Safety
 * `fs` must be a live handle or NULL.
 */
size_t compacta_frameset_count(const struct CompactaFrameSet *fs);

/**
 * # Safety
 * `fs` must be a live handle or NULL.
 */
size_t compacta_frameset_frame_length(const struct CompactaFrameSet *fs);

/**
 * Copies up to `cap` row-major values into `buf`; returns the total count.
 *
 * # Safety
 * `fs` must be live; `buf` must hold `cap` doubles when `cap > 0`.
 */
size_t compacta_frameset_copy_values(const struct CompactaFrameSet *fs, double *buf, size_t cap);

/**
 * Anchor sample index and method of frame `i`.
 *
 * # Safety
 * `fs` must be live; `anchor` and `method` writable.
 */
enum CompactaStatus compacta_frameset_provenance(const struct CompactaFrameSet *fs,
                                                 size_t i,
                                                 size_t *anchor,
                                                 enum CompactaMethod *method);

/**
 * # Safety
 * `fs` must be live and `path` NUL-terminated.
 */
enum CompactaStatus compacta_frameset_write_csv(const struct CompactaFrameSet *fs,
                                                const char *path);

/**
 * # Safety
 * `path` must be NUL-terminated and `out` writable.
 */
enum CompactaStatus compacta_frameset_read_csv(const char *path, struct CompactaFrameSet **out);

/**
 * # Safety
 * `fs` must come from a frame-set constructor and not be used again.
 */
void compacta_frameset_free(struct CompactaFrameSet *fs);

/**
 * Fits classic and mode-based parameters on `data`.
 *
 * `bin_width`: 0 for exact matching, a positive width, or a negative
 * value for automatic width selection.
 *
 * # Safety
 * `data` must point to `len` doubles and `out` be writable.
 */
enum CompactaStatus compacta_model_fit(const double *data,
                                       size_t len,
                                       double eta,
                                       double bin_width,
                                       enum CompactaScale scale,
                                       struct CompactaModel **out);

/**
 * Fits on all values of a frame set.
 *
 * # Safety
 * `fs` must be live and `out` writable.
 */
enum CompactaStatus compacta_model_fit_frameset(const struct CompactaFrameSet *fs,
                                                double eta,
                                                double bin_width,
                                                enum CompactaScale scale,
                                                struct CompactaModel **out);

/**
 * # Safety
 * `model` must be live and `out` writable.
 */
enum CompactaStatus compacta_model_params(const struct CompactaModel *model,
                                          struct CompactaModelParams *out);

/**
 * # Safety
 * `model` must be live and `out` writable.
 */
enum CompactaStatus compacta_standardize_classic(const struct CompactaModel *model,
                                                 double x,
                                                 double *out);

/**
 * # Safety
 * `model` must be live and `out` writable.
 */
enum CompactaStatus compacta_standardize_mode(const struct CompactaModel *model,
                                              double x,
                                              double *out);

/**
 * Applies the mode-based transform to every value of `fs` in place.
 *
 * # Safety
 * `model` and `fs` must be live handles.
 */
enum CompactaStatus compacta_model_apply(const struct CompactaModel *model,
                                         struct CompactaFrameSet *fs);

/**
 * # Safety
 * `model` must come from `compacta_model_fit*` and not be used again.
 */
void compacta_model_free(struct CompactaModel *model);

/**
 * # Safety
 * `observed` and `references` must each hold `len` doubles; `out` writable.
 */
enum CompactaStatus compacta_maer(const double *observed,
                                  const double *references,
                                  size_t len,
                                  double epsilon,
                                  double *out);

/**
 * # Safety
 * `data` must hold `len` doubles; `out` writable.
 */
enum CompactaStatus compacta_ucl(const double *data, size_t len, double k_sigma, double *out);

/**
 * # Safety
 * `data` must hold `len` doubles; `out` writable.
 */
enum CompactaStatus compacta_apr(const double *data, size_t len, double ucl_value, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum CompactaStatus compacta_overall_performance(double accuracy,
                                                 uint64_t accepted_count,
                                                 uint64_t total_count,
                                                 double *out);

/**
 * Runs the full pipeline described by a config file.
 *
 * # Safety
 * `config_path` must be NUL-terminated.
 */
enum CompactaStatus compacta_run_pipeline(const char *config_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COMPACTA_H */
