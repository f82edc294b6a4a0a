//! C ABI for shapewave.
//!
//! Objects are opaque handles created by `sw_*_new`/`sw_extract`/`sw_track`
//! and released with the matching `sw_*_free`. Every fallible call returns an
//! [`SwStatus`]; on failure `sw_last_error_message` describes the error for
//! the calling thread until the next failing call.
//!
//! Handles are immutable once created and may be shared across threads for
//! reading.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use shapewave::local::ShapeTrack;
use shapewave::{
    estimate_phase, extract_shape, extract_shape_track, shape_distance, validate_phase, Error,
    ExtractOptions, ExtractionResult, PhaseEstimateConfig, PhaseFunction, ShapeFunction, Signal,
};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Signal validation failed (length, finiteness, ordering).
    InvalidSignal = 3,
    /// Phase validation failed (monotonicity, period count).
    InvalidPhase = 4,
    /// Grid size or band limit not feasible.
    InvalidGrid = 5,
    /// Degenerate rank-1 factors or input.
    Degenerate = 6,
    WindowTooShort = 7,
    /// Phase estimation failed.
    EstimateFailed = 8,
    NonFiniteState = 9,
    Io = 10,
    BufferTooSmall = 11,
    IndexOutOfRange = 12,
    /// A Rust panic was caught at the boundary.
    Internal = 13,
}

fn status_of(e: &Error) -> SwStatus {
    use Error::*;
    match e {
        LengthMismatch { .. } | TooShort { .. } | NonIncreasingTimes { .. } | NonFiniteValue { .. } => {
            SwStatus::InvalidSignal
        }
        NonMonotonePhase { .. } | TooFewPeriods { .. } | NotNearIntegerPeriods { .. } => {
            SwStatus::InvalidPhase
        }
        NotPowerOfTwo { .. } | GridTooCoarse { .. } | BandExceedsNyquist { .. } | MismatchedLengths { .. } => {
            SwStatus::InvalidGrid
        }
        DegenerateFactors(_) | DegenerateInput | NonConvergence => SwStatus::Degenerate,
        WindowTooShort { .. } => SwStatus::WindowTooShort,
        AmbiguousFundamental(_) | NonMonotoneEstimate { .. } => SwStatus::EstimateFailed,
        NonFiniteState { .. } => SwStatus::NonFiniteState,
        ParseError { .. } | Io(_) => SwStatus::Io,
        InvalidParameter(_) => SwStatus::InvalidArgument,
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(status: SwStatus, message: impl Into<String>) -> SwStatus {
    set_error(message.into());
    status
}

fn from_error(e: Error) -> SwStatus {
    let status = status_of(&e);
    set_error(format!("{}: {e}", e.name()));
    status
}

/// Runs `f`, turning panics into [`SwStatus::Internal`].
fn guard(f: impl FnOnce() -> SwStatus) -> SwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(SwStatus::Internal, "internal panic"),
    }
}

unsafe fn slice_in<'a>(p: *const f64, len: usize) -> Option<&'a [f64]> {
    if len == 0 {
        Some(&[])
    } else if p.is_null() {
        None
    } else {
        Some(slice::from_raw_parts(p, len))
    }
}

unsafe fn copy_out(src: &[f64], out: *mut f64, capacity: usize) -> SwStatus {
    if out.is_null() {
        return fail(SwStatus::NullPointer, "output buffer is null");
    }
    if capacity < src.len() {
        return fail(
            SwStatus::BufferTooSmall,
            format!("buffer holds {capacity} values, {} needed", src.len()),
        );
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    SwStatus::Ok
}

pub struct SwSignal(Signal);
pub struct SwPhase(PhaseFunction);
pub struct SwResult {
    inner: ExtractionResult,
    relative_residual: f64,
}
pub struct SwTrack(ShapeTrack);

/// Extraction options; zero fields select defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SwExtractOptions {
    /// Band limit K, 0 for the default.
    pub band_limit: usize,
    /// Phase-grid size n, 0 for the default.
    pub grid_size: usize,
    /// Nonzero forces c0 = 0.
    pub zero_dc: c_int,
    /// Envelope cutoff λ in (0, 0.5]; 0 for 0.5.
    pub envelope_cutoff: f64,
}

impl SwExtractOptions {
    fn to_options(self) -> ExtractOptions {
        let d = ExtractOptions::default();
        ExtractOptions {
            band_limit: (self.band_limit > 0).then_some(self.band_limit),
            grid_size: (self.grid_size > 0).then_some(self.grid_size),
            zero_dc: self.zero_dc != 0,
            envelope_cutoff: if self.envelope_cutoff == 0.0 {
                d.envelope_cutoff
            } else {
                self.envelope_cutoff
            },
        }
    }
}

/// Message for the last failing call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn sw_extract_options_default() -> SwExtractOptions {
    SwExtractOptions {
        band_limit: 0,
        grid_size: 0,
        zero_dc: 0,
        envelope_cutoff: 0.5,
    }
}

/// Copies `len` samples into a new signal.
///
/// # Safety
/// `times` and `values` must point to `len` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sw_signal_new(
    times: *const f64,
    values: *const f64,
    len: usize,
    out: *mut *mut SwSignal,
) -> SwStatus {
    guard(|| {
        if out.is_null() {
            return fail(SwStatus::NullPointer, "out is null");
        }
        let (Some(t), Some(v)) = (slice_in(times, len), slice_in(values, len)) else {
            return fail(SwStatus::NullPointer, "input array is null");
        };
        match Signal::new(t.to_vec(), v.to_vec()) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(SwSignal(s)));
                SwStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `signal` must be NULL or a handle from `sw_signal_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sw_signal_free(signal: *mut SwSignal) {
    if !signal.is_null() {
        drop(Box::from_raw(signal));
    }
}

/// # Safety
/// `signal` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sw_signal_len(signal: *const SwSignal) -> usize {
    signal.as_ref().map_or(0, |s| s.0.len())
}

/// Validates caller-supplied phase samples against `signal`.
///
/// # Safety
/// `theta` must point to `len` doubles; handles must be live.
#[no_mangle]
pub unsafe extern "C" fn sw_phase_new(
    signal: *const SwSignal,
    theta: *const f64,
    len: usize,
    out: *mut *mut SwPhase,
) -> SwStatus {
    guard(|| {
        let (Some(sig), false) = (signal.as_ref(), out.is_null()) else {
            return fail(SwStatus::NullPointer, "signal or out is null");
        };
        let Some(th) = slice_in(theta, len) else {
            return fail(SwStatus::NullPointer, "theta is null");
        };
        match validate_phase(&sig.0, th.to_vec()) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(SwPhase(p)));
                SwStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Estimates the phase from the fundamental band. `fundamental_hint` is the
/// expected number of cycles over the record, or a value <= 0 for none.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_phase_estimate(
    signal: *const SwSignal,
    fundamental_hint: f64,
    out: *mut *mut SwPhase,
) -> SwStatus {
    guard(|| {
        let (Some(sig), false) = (signal.as_ref(), out.is_null()) else {
            return fail(SwStatus::NullPointer, "signal or out is null");
        };
        let cfg = PhaseEstimateConfig {
            fundamental_hint: (fundamental_hint > 0.0).then_some(fundamental_hint),
            ..Default::default()
        };
        match estimate_phase(&sig.0, &cfg) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(SwPhase(p)));
                SwStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Whole periods spanned by the phase; 0 for NULL.
///
/// # Safety
/// `phase` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sw_phase_l_theta(phase: *const SwPhase) -> usize {
    phase.as_ref().map_or(0, |p| p.0.l_theta())
}

/// Copies the phase samples into `out`.
///
/// # Safety
/// `out` must have room for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn sw_phase_values(phase: *const SwPhase, out: *mut f64, capacity: usize) -> SwStatus {
    guard(|| match phase.as_ref() {
        Some(p) => copy_out(p.0.phases(), out, capacity),
        None => fail(SwStatus::NullPointer, "phase is null"),
    })
}

/// # Safety
/// `phase` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_phase_free(phase: *mut SwPhase) {
    if !phase.is_null() {
        drop(Box::from_raw(phase));
    }
}

/// Runs the extraction. `options` may be NULL for defaults.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_extract(
    signal: *const SwSignal,
    phase: *const SwPhase,
    options: *const SwExtractOptions,
    out: *mut *mut SwResult,
) -> SwStatus {
    guard(|| {
        let (Some(sig), Some(ph), false) = (signal.as_ref(), phase.as_ref(), out.is_null()) else {
            return fail(SwStatus::NullPointer, "signal, phase or out is null");
        };
        let opts = options
            .as_ref()
            .copied()
            .unwrap_or_else(|| sw_extract_options_default())
            .to_options();
        match extract_shape(&sig.0, &ph.0, &opts) {
            Ok(res) => {
                let relative_residual = res.relative_residual(&sig.0);
                *out = Box::into_raw(Box::new(SwResult {
                    inner: res,
                    relative_residual,
                }));
                SwStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Band limit K of the extracted shape; 0 for NULL.
///
/// # Safety
/// `result` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sw_result_band_limit(result: *const SwResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.shape.band_limit())
}

/// # Safety
/// `result` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sw_result_l_theta(result: *const SwResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.l_theta)
}

/// Number of samples in the envelope and residual arrays.
///
/// # Safety
/// `result` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sw_result_len(result: *const SwResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.residual.len())
}

/// Copies c_0..c_K into `re`/`im` (K + 1 entries each).
///
/// # Safety
/// `re` and `im` must have room for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn sw_result_coeffs(
    result: *const SwResult,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
) -> SwStatus {
    guard(|| {
        let Some(r) = result.as_ref() else {
            return fail(SwStatus::NullPointer, "result is null");
        };
        let c = r.inner.shape.coeffs();
        let res: Vec<f64> = c.iter().map(|z| z.re).collect();
        let ims: Vec<f64> = c.iter().map(|z| z.im).collect();
        match copy_out(&res, re, capacity) {
            SwStatus::Ok => copy_out(&ims, im, capacity),
            s => s,
        }
    })
}

/// s(τ), with τ measured from the phase origin. NaN for NULL.
///
/// # Safety
/// `result` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sw_result_eval_shape(result: *const SwResult, tau: f64) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.shape.eval(tau))
}

/// Phase value at which τ = 0. NaN for NULL.
///
/// # Safety
/// `result` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sw_result_phase_origin(result: *const SwResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.shape.phase_origin())
}

/// # Safety
/// `out` must have room for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn sw_result_envelope(result: *const SwResult, out: *mut f64, capacity: usize) -> SwStatus {
    guard(|| match result.as_ref() {
        Some(r) => copy_out(&r.inner.envelope.values_time, out, capacity),
        None => fail(SwStatus::NullPointer, "result is null"),
    })
}

/// # Safety
/// `out` must have room for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn sw_result_residual(result: *const SwResult, out: *mut f64, capacity: usize) -> SwStatus {
    guard(|| match result.as_ref() {
        Some(r) => copy_out(&r.inner.residual, out, capacity),
        None => fail(SwStatus::NullPointer, "result is null"),
    })
}

/// s₁² / Σ sᵢ² of the band matrix. NaN for NULL.
///
/// # Safety
/// `result` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sw_result_rank1_fraction(result: *const SwResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.fit.rank1_energy_fraction)
}

/// ‖residual‖ / ‖signal‖. NaN for NULL.
///
/// # Safety
/// `result` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sw_result_relative_residual(result: *const SwResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.relative_residual)
}

/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_result_free(result: *mut SwResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Rotation- and sign-invariant distance between two extracted shapes.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_shape_distance(a: *const SwResult, b: *const SwResult, out: *mut f64) -> SwStatus {
    guard(|| {
        let (Some(a), Some(b), false) = (a.as_ref(), b.as_ref(), out.is_null()) else {
            return fail(SwStatus::NullPointer, "null argument");
        };
        *out = shape_distance(&a.inner.shape, &b.inner.shape);
        SwStatus::Ok
    })
}

/// Windowed extraction at the given sample indices. `band_limit` 0 selects
/// the per-window default. Per-window failures are kept in the track.
///
/// # Safety
/// `centers` must point to `n_centers` indices; handles must be live.
#[no_mangle]
pub unsafe extern "C" fn sw_track(
    signal: *const SwSignal,
    phase: *const SwPhase,
    centers: *const usize,
    n_centers: usize,
    mu: f64,
    band_limit: usize,
    out: *mut *mut SwTrack,
) -> SwStatus {
    guard(|| {
        let (Some(sig), Some(ph), false) = (signal.as_ref(), phase.as_ref(), out.is_null()) else {
            return fail(SwStatus::NullPointer, "signal, phase or out is null");
        };
        let idx: &[usize] = if n_centers == 0 {
            &[]
        } else if centers.is_null() {
            return fail(SwStatus::NullPointer, "centers is null");
        } else {
            slice::from_raw_parts(centers, n_centers)
        };
        let k = (band_limit > 0).then_some(band_limit);
        match extract_shape_track(&sig.0, &ph.0, idx, mu, k) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(SwTrack(t)));
                SwStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `track` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sw_track_len(track: *const SwTrack) -> usize {
    track.as_ref().map_or(0, |t| t.0.entries.len())
}

unsafe fn track_shape<'a>(track: *const SwTrack, i: usize) -> Result<&'a ShapeFunction, SwStatus> {
    let t = track
        .as_ref()
        .ok_or_else(|| fail(SwStatus::NullPointer, "track is null"))?;
    let entry = t
        .0
        .entries
        .get(i)
        .ok_or_else(|| fail(SwStatus::IndexOutOfRange, format!("no window {i}")))?;
    match &entry.outcome {
        Ok(local) => Ok(&local.shape),
        Err(e) => Err(from_error(e.clone())),
    }
}

/// Status of window `i`: `SW_STATUS_OK` or the error that window hit.
///
/// # Safety
/// `track` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sw_track_status(track: *const SwTrack, i: usize) -> SwStatus {
    guard(|| match track_shape(track, i) {
        Ok(_) => SwStatus::Ok,
        Err(s) => s,
    })
}

/// Distance from window i−1 to window i; NaN for the first window, failed
/// neighbours, or bad arguments.
///
/// # Safety
/// `track` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sw_track_drift(track: *const SwTrack, i: usize) -> f64 {
    track
        .as_ref()
        .and_then(|t| t.0.drift.get(i).copied().flatten())
        .unwrap_or(f64::NAN)
}

/// Band limit of window `i`, 0 when it failed.
///
/// # Safety
/// `track` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sw_track_band_limit(track: *const SwTrack, i: usize) -> usize {
    track
        .as_ref()
        .and_then(|t| t.0.entries.get(i))
        .and_then(|e| e.outcome.as_ref().ok())
        .map_or(0, |l| l.band_limit)
}

/// Copies the coefficients of window `i`.
///
/// # Safety
/// `re` and `im` must have room for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn sw_track_coeffs(
    track: *const SwTrack,
    i: usize,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
) -> SwStatus {
    guard(|| {
        let shape = match track_shape(track, i) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let res: Vec<f64> = shape.coeffs().iter().map(|z| z.re).collect();
        let ims: Vec<f64> = shape.coeffs().iter().map(|z| z.im).collect();
        match copy_out(&res, re, capacity) {
            SwStatus::Ok => copy_out(&ims, im, capacity),
            s => s,
        }
    })
}

/// # Safety
/// `track` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_track_free(track: *mut SwTrack) {
    if !track.is_null() {
        drop(Box::from_raw(track));
    }
}
