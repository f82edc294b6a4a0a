#ifndef SHAPEWAVE_H
#define SHAPEWAVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum SwStatus {
  SW_STATUS_OK = 0,
  SW_STATUS_NULL_POINTER = 1,
  SW_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Signal validation failed (length, finiteness, ordering).
   */
  SW_STATUS_INVALID_SIGNAL = 3,
  /**
   * Phase validation failed (monotonicity, period count).
   */
  SW_STATUS_INVALID_PHASE = 4,
  /**
   * Grid size or band limit not feasible.
   */
  SW_STATUS_INVALID_GRID = 5,
  /**
   * Degenerate rank-1 factors or input.
   */
  SW_STATUS_DEGENERATE = 6,
  SW_STATUS_WINDOW_TOO_SHORT = 7,
  /**
   * Phase estimation failed.
   */
  SW_STATUS_ESTIMATE_FAILED = 8,
  SW_STATUS_NON_FINITE_STATE = 9,
  SW_STATUS_IO = 10,
  SW_STATUS_BUFFER_TOO_SMALL = 11,
  SW_STATUS_INDEX_OUT_OF_RANGE = 12,
  /**
   * A Rust panic was caught at the boundary.
   */
  SW_STATUS_INTERNAL = 13,
} SwStatus;

typedef struct SwPhase SwPhase;

typedef struct SwResult SwResult;

typedef struct SwSignal SwSignal;

typedef struct SwTrack SwTrack;

/**
 * Extraction options; zero fields select defaults.
 */
typedef struct SwExtractOptions {
  /**
   * Band limit K, 0 for the default.
   */
  size_t band_limit;
  /**
   * Phase-grid size n, 0 for the default.
   */
  size_t grid_size;
  /**
   * Nonzero forces c0 = 0.
   */
  int zero_dc;
  /**
   * Envelope cutoff λ in (0, 0.5]; 0 for 0.5.
   */
  double envelope_cutoff;
} SwExtractOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *sw_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sw_version(void);

struct SwExtractOptions sw_extract_options_default(void);

/**
 * Copies `len` samples into a new signal.
 *
 * # Safety
 * `times` and `values` must point to `len` readable doubles; `out` must be
 * writable.
 */
enum SwStatus sw_signal_new(const double *times,
                            const double *values,
                            size_t len,
                            struct SwSignal **out);

/**
 * # Safety
 * `signal` must be NULL or a handle from `sw_signal_new` not yet freed.
 */
void sw_signal_free(struct SwSignal *signal);

/**
 * # Safety
 * `signal` must be a live handle or NULL.
 */
size_t sw_signal_len(const struct SwSignal *signal);

/**
 * Validates caller-supplied phase samples against `signal`.
 *
 * # Safety
 * `theta` must point to `len` doubles; handles must be live.
 */
enum SwStatus sw_phase_new(const struct SwSignal *signal,
                           const double *theta,
                           size_t len,
                           struct SwPhase **out);

/**
 * Estimates the phase from the fundamental band. `fundamental_hint` is the
 * expected number of cycles over the record, or a value <= 0 for none.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum SwStatus sw_phase_estimate(const struct SwSignal *signal,
                                double fundamental_hint,
                                struct SwPhase **out);

/**
 * Whole periods spanned by the phase; 0 for NULL.
 *
 * # Safety
 * `phase` must be a live handle or NULL.
 */
size_t sw_phase_l_theta(const struct SwPhase *phase);

/**
 * Copies the phase samples into `out`.
 *
 * # Safety
 * `out` must have room for `capacity` doubles.
 */
enum SwStatus sw_phase_values(const struct SwPhase *phase, double *out, size_t capacity);

/**
 * # Safety
 * `phase` must be NULL or a live handle.
 */
void sw_phase_free(struct SwPhase *phase);

/**
 * Runs the extraction. `options` may be NULL for defaults.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum SwStatus sw_extract(const struct SwSignal *signal,
                         const struct SwPhase *phase,
                         const struct SwExtractOptions *options,
                         struct SwResult **out);

/**
 * Band limit K of the extracted shape; 0 for NULL.
 *
 * # Safety
 * `result` must be a live handle or NULL.
 */
size_t sw_result_band_limit(const struct SwResult *result);

/**
 * # Safety
 * `result` must be a live handle or NULL.
 */
size_t sw_result_l_theta(const struct SwResult *result);

/**
 * Number of samples in the envelope and residual arrays.
 *
 * # Safety
 * `result` must be a live handle or NULL.
 */
size_t sw_result_len(const struct SwResult *result);

/**
 * Copies c_0..c_K into `re`/`im` (K + 1 entries each).
 *
 * # Safety
 * `re` and `im` must have room for `capacity` doubles.
 */
enum SwStatus sw_result_coeffs(const struct SwResult *result,
                               double *re,
                               double *im,
                               size_t capacity);

/**
 * s(τ), with τ measured from the phase origin. NaN for NULL.
 *
 * # Safety
 * `result` must be a live handle or NULL.
 */
double sw_result_eval_shape(const struct SwResult *result, double tau);

/**
 * Phase value at which τ = 0. NaN for NULL.
 *
 * # Safety
 * `result` must be a live handle or NULL.
 */
double sw_result_phase_origin(const struct SwResult *result);

/**
 * # Safety
 * `out` must have room for `capacity` doubles.
 */
enum SwStatus sw_result_envelope(const struct SwResult *result, double *out, size_t capacity);

/**
 * # Safety
 * `out` must have room for `capacity` doubles.
 */
enum SwStatus sw_result_residual(const struct SwResult *result, double *out, size_t capacity);

/**
 * s₁² / Σ sᵢ² of the band matrix. NaN for NULL.
 *
 * # Safety
 * `result` must be a live handle or NULL.
 */
double sw_result_rank1_fraction(const struct SwResult *result);

/**
 * ‖residual‖ / ‖signal‖. NaN for NULL.
 *
 * # Safety
 * `result` must be a live handle or NULL.
 */
double sw_result_relative_residual(const struct SwResult *result);

/**
 * # Safety
 * `result` must be NULL or a live handle.
 */
void sw_result_free(struct SwResult *result);

/**
 * Rotation- and sign-invariant distance between two extracted shapes.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum SwStatus sw_shape_distance(const struct SwResult *a, const struct SwResult *b, double *out);

/**
 * Windowed extraction at the given sample indices. `band_limit` 0 selects
 * the per-window default. Per-window failures are kept in the track.
 *
 * # Safety
 * `centers` must point to `n_centers` indices; handles must be live.
 */
enum SwStatus sw_track(const struct SwSignal *signal,
                       const struct SwPhase *phase,
                       const size_t *centers,
                       size_t n_centers,
                       double mu,
                       size_t band_limit,
                       struct SwTrack **out);

/**
 * # Safety
 * `track` must be a live handle or NULL.
 */
size_t sw_track_len(const struct SwTrack *track);

/**
 * Status of window `i`: `SW_STATUS_OK` or the error that window hit.
 *
 * # Safety
 * `track` must be a live handle or NULL.
 */
enum SwStatus sw_track_status(const struct SwTrack *track, size_t i);

/**
 * Distance from window i−1 to window i; NaN for the first window, failed
 * neighbours, or bad arguments.
 *
 * # Safety
 * `track` must be a live handle or NULL.
 */
double sw_track_drift(const struct SwTrack *track, size_t i);

/**
 * Band limit of window `i`, 0 when it failed.
 *
 * # Safety
 * `track` must be a live handle or NULL.
 */
size_t sw_track_band_limit(const struct SwTrack *track, size_t i);

/**
 * Copies the coefficients of window `i`.
 *
 * # Safety
 * `re` and `im` must have room for `capacity` doubles.
 */
enum SwStatus sw_track_coeffs(const struct SwTrack *track,
                              size_t i,
                              double *re,
                              double *im,
                              size_t capacity);

/**
 * # Safety
 * `track` must be NULL or a live handle.
 */
void sw_track_free(struct SwTrack *track);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHAPEWAVE_H */
