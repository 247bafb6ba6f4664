//! C ABI over `compacta`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_read`
//! functions and released by the matching `*_free`. Every fallible call
//! returns a [`CompactaStatus`]; on failure a message is available from
//! [`compacta_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use compacta::config::load_config;
use compacta::{
    apr, detect_peaks, fixed_slice, maer, overall_performance, read_frameset_csv, read_peaks_csv,
    read_signal_csv, rr_frame, run_pipeline, time_slice, ucl, write_frameset_csv, BinWidth,
    ConfusionSummary, Error, ExitCode, FixedSliceConfig, FrameSet, PeakDetectConfig, PeakList,
    RrifConfig, ScaleConvention, Signal, StandardizationModel, TimeSliceConfig,
};

/// Status codes. 2, 3 and 4 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompactaStatus {
    Ok = 0,
    InvalidArgument = 1,
    Config = 2,
    Io = 3,
    Numeric = 4,
    NullPointer = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompactaScale {
    StandardError = 0,
    StandardDeviation = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompactaMethod {
    TimeSlice = 0,
    Rrif = 1,
    Fixed = 2,
}

/// Fitted standardization parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CompactaModelParams {
    pub n: usize,
    pub mean: f64,
    pub var_classic: f64,
    pub mode_value: f64,
    pub mode_prob: f64,
    /// Bin width used for the mode, 0 for exact matching.
    pub bin_width: f64,
    pub phi: f64,
    pub var_mode: f64,
    pub eta: f64,
}

pub struct CompactaSignal(Signal);
pub struct CompactaPeaks(PeakList);
pub struct CompactaFrameSet(FrameSet);
pub struct CompactaModel(StandardizationModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Lib(Error),
    Null(&'static str),
    Arg(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult<T> = Result<T, Failure>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> CompactaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CompactaStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            let status = match e.exit_code() {
                ExitCode::Success => CompactaStatus::Ok,
                ExitCode::Config => CompactaStatus::Config,
                ExitCode::Io => CompactaStatus::Io,
                ExitCode::Numeric => CompactaStatus::Numeric,
            };
            set_last_error(e.to_string());
            status
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("{what} is null"));
            CompactaStatus::NullPointer
        }
        Ok(Err(Failure::Arg(msg))) => {
            set_last_error(msg);
            CompactaStatus::InvalidArgument
        }
        Err(_) => {
            set_last_error("internal panic".into());
            CompactaStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> FfiResult<&'a T> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &'static str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn string(p: *const c_char, what: &'static str) -> FfiResult<String> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_string)
        .map_err(|_| Failure::Arg(format!("{what} is not valid UTF-8")))
}

unsafe fn to_path(p: *const c_char, what: &'static str) -> FfiResult<PathBuf> {
    string(p, what).map(PathBuf::from)
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn to_bin_width(w: f64) -> BinWidth {
    if w == 0.0 {
        BinWidth::Exact
    } else if w > 0.0 && w.is_finite() {
        BinWidth::Fixed(w)
    } else {
        BinWidth::Auto
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn compacta_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn compacta_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---- signals ----

/// # Safety
/// `samples` must point to `len` readable doubles, `record_id` to a
/// NUL-terminated string and `out` to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn compacta_signal_new(
    samples: *const f64,
    len: usize,
    sampling_rate_hz: f64,
    record_id: *const c_char,
    out: *mut *mut CompactaSignal,
) -> CompactaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let x = slice(samples, len, "samples")?;
        let id = string(record_id, "record_id")?;
        *out = boxed(CompactaSignal(Signal::new(
            x.to_vec(),
            sampling_rate_hz,
            id,
        )?));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compacta_signal_read_csv(
    path: *const c_char,
    sampling_rate_hz: f64,
    out: *mut *mut CompactaSignal,
) -> CompactaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let p = to_path(path, "path")?;
        *out = boxed(CompactaSignal(read_signal_csv(p, sampling_rate_hz)?));
        Ok(())
    })
}

/// # Safety
/// `sig` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn compacta_signal_len(sig: *const CompactaSignal) -> usize {
    sig.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `sig` must come from a `compacta_signal_*` constructor and not be used again.
#[no_mangle]
pub unsafe extern "C" fn compacta_signal_free(sig: *mut CompactaSignal) {
    free(sig)
}

// ---- peaks ----

/// # Safety
/// `indices` must point to `len` readable values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn compacta_peaks_new(
    indices: *const usize,
    len: usize,
    out: *mut *mut CompactaPeaks,
) -> CompactaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let idx = slice(indices, len, "indices")?;
        *out = boxed(CompactaPeaks(PeakList::new(idx.to_vec(), "")?));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compacta_peaks_read_csv(
    path: *const c_char,
    out: *mut *mut CompactaPeaks,
) -> CompactaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(CompactaPeaks(read_peaks_csv(to_path(path, "path")?)?));
        Ok(())
    })
}

/// # Safety
/// `sig` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compacta_peaks_detect(
    sig: *const CompactaSignal,
    min_height: f64,
    refractory_s: f64,
    out: *mut *mut CompactaPeaks,
) -> CompactaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let sig = deref(sig, "signal")?;
        let cfg = PeakDetectConfig {
            min_height,
            refractory_s,
        };
        *out = boxed(CompactaPeaks(detect_peaks(&sig.0, &cfg)?));
        Ok(())
    })
}

/// # Safety
/// `peaks` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn compacta_peaks_len(peaks: *const CompactaPeaks) -> usize {
    peaks.as_ref().map_or(0, |p| p.0.len())
}

/// Copies up to `cap` indices into `buf`; returns the total count.
///
/// # Safety
/// `peaks` must be a live handle; `buf` must hold `cap` values when `cap > 0`.
#[no_mangle]
pub unsafe extern "C" fn compacta_peaks_copy(
    peaks: *const CompactaPeaks,
    buf: *mut usize,
    cap: usize,
) -> usize {
    let Some(p) = peaks.as_ref() else { return 0 };
    let idx = p.0.indices();
    if !buf.is_null() {
        let n = idx.len().min(cap);
        ptr::copy_nonoverlapping(idx.as_ptr(), buf, n);
    }
    idx.len()
}

/// # Safety
/// `peaks` must come from a `compacta_peaks_*` constructor and not be used again.
#[no_mangle]
pub unsafe extern "C" fn compacta_peaks_free(peaks: *mut CompactaPeaks) {
    free(peaks)
}

// ---- slicing ----

/// Frames of `window_s` seconds starting at each peak.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compacta_time_slice(
    sig: *const CompactaSignal,
    peaks: *const CompactaPeaks,
    window_s: f64,
    out: *mut *mut CompactaFrameSet,
) -> CompactaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let fs = time_slice(
            &deref(sig, "signal")?.0,
            &deref(peaks, "peaks")?.0,
            &TimeSliceConfig { window_s },
        )?;
        *out = boxed(CompactaFrameSet(fs));
        Ok(())
    })
}

/// Each peak-to-peak interval resampled to `frame_length` points.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compacta_rr_frame(
    sig: *const CompactaSignal,
    peaks: *const CompactaPeaks,
    frame_length: usize,
    out: *mut *mut CompactaFrameSet,
) -> CompactaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let fs = rr_frame(
            &deref(sig, "signal")?.0,
            &deref(peaks, "peaks")?.0,
            &RrifConfig { frame_length },
        )?;
        *out = boxed(CompactaFrameSet(fs));
        Ok(())
    })
}

/// One frame covering `[start_s, start_s + duration_s)`.
///
/// # Safety
/// `sig` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compacta_fixed_slice(
    sig: *const CompactaSignal,
    start_s: f64,
    duration_s: f64,
    out: *mut *mut CompactaFrameSet,
) -> CompactaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let fs = fixed_slice(
            &deref(sig, "signal")?.0,
            &FixedSliceConfig {
                start_s,
                duration_s,
            },
        )?;
        *out = boxed(CompactaFrameSet(fs));
        Ok(())
    })
}

// ---- frame sets ----

/// # Safety
/// `fs` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn compacta_frameset_count(fs: *const CompactaFrameSet) -> usize {
    fs.as_ref().map_or(0, |f| f.0.frame_count())
}

/// # Safety
/// `fs` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn compacta_frameset_frame_length(fs: *const CompactaFrameSet) -> usize {
    fs.as_ref().map_or(0, |f| f.0.frame_length())
}

/// Copies up to `cap` row-major values into `buf`; returns the total count.
///
/// # Safety
/// `fs` must be live; `buf` must hold `cap` doubles when `cap > 0`.
#[no_mangle]
pub unsafe extern "C" fn compacta_frameset_copy_values(
    fs: *const CompactaFrameSet,
    buf: *mut f64,
    cap: usize,
) -> usize {
    let Some(f) = fs.as_ref() else { return 0 };
    let v = f.0.values();
    if !buf.is_null() {
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len().min(cap));
    }
    v.len()
}

/// Anchor sample index and method of frame `i`.
///
/// # Safety
/// `fs` must be live; `anchor` and `method` writable.
#[no_mangle]
pub unsafe extern "C" fn compacta_frameset_provenance(
    fs: *const CompactaFrameSet,
    i: usize,
    anchor: *mut usize,
    method: *mut CompactaMethod,
) -> CompactaStatus {
    guard(|| {
        let f = deref(fs, "frameset")?;
        let anchor = out_ptr(anchor, "anchor")?;
        let method = out_ptr(method, "method")?;
        let p =
            f.0.provenance()
                .get(i)
                .ok_or_else(|| Failure::Arg(format!("frame {i} out of range")))?;
        *anchor = p.anchor_index;
        *method = match p.method {
            compacta::Method::TimeSlice => CompactaMethod::TimeSlice,
            compacta::Method::Rrif => CompactaMethod::Rrif,
            compacta::Method::Fixed => CompactaMethod::Fixed,
        };
        Ok(())
    })
}

/// # Safety
/// `fs` must be live and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn compacta_frameset_write_csv(
    fs: *const CompactaFrameSet,
    path: *const c_char,
) -> CompactaStatus {
    guard(|| {
        write_frameset_csv(&deref(fs, "frameset")?.0, to_path(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compacta_frameset_read_csv(
    path: *const c_char,
    out: *mut *mut CompactaFrameSet,
) -> CompactaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(CompactaFrameSet(read_frameset_csv(to_path(path, "path")?)?));
        Ok(())
    })
}

/// # Safety
/// `fs` must come from a frame-set constructor and not be used again.
#[no_mangle]
pub unsafe extern "C" fn compacta_frameset_free(fs: *mut CompactaFrameSet) {
    free(fs)
}

// ---- standardization ----

/// Fits classic and mode-based parameters on `data`.
///
/// `bin_width`: 0 for exact matching, a positive width, or a negative
/// value for automatic width selection.
///
/// # Safety
/// `data` must point to `len` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn compacta_model_fit(
    data: *const f64,
    len: usize,
    eta: f64,
    bin_width: f64,
    scale: CompactaScale,
    out: *mut *mut CompactaModel,
) -> CompactaStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let x = slice(data, len, "data")?;
        let scale = match scale {
            CompactaScale::StandardError => ScaleConvention::StandardError,
            CompactaScale::StandardDeviation => ScaleConvention::StandardDeviation,
        };
        *out = boxed(CompactaModel(StandardizationModel::fit(
            x,
            eta,
            to_bin_width(bin_width),
            scale,
        )?));
        Ok(())
    })
}

/// Fits on all values of a frame set.
///
/// # Safety
/// `fs` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compacta_model_fit_frameset(
    fs: *const CompactaFrameSet,
    eta: f64,
    bin_width: f64,
    scale: CompactaScale,
    out: *mut *mut CompactaModel,
) -> CompactaStatus {
    match fs.as_ref() {
        Some(f) => compacta_model_fit(
            f.0.values().as_ptr(),
            f.0.values().len(),
            eta,
            bin_width,
            scale,
            out,
        ),
        None => guard(|| Err(Failure::Null("frameset"))),
    }
}

/// # Safety
/// `model` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compacta_model_params(
    model: *const CompactaModel,
    out: *mut CompactaModelParams,
) -> CompactaStatus {
    guard(|| {
        let m = &deref(model, "model")?.0;
        *out_ptr(out, "out")? = CompactaModelParams {
            n: m.n,
            mean: m.mean,
            var_classic: m.var_classic,
            mode_value: m.mode.mode_value,
            mode_prob: m.mode.mode_prob,
            bin_width: m.mode.bin_width.unwrap_or(0.0),
            phi: m.phi,
            var_mode: m.var_mode,
            eta: m.eta,
        };
        Ok(())
    })
}

/// # Safety
/// `model` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compacta_standardize_classic(
    model: *const CompactaModel,
    x: f64,
    out: *mut f64,
) -> CompactaStatus {
    guard(|| {
        *out_ptr(out, "out")? = deref(model, "model")?.0.standardize_classic(x)?;
        Ok(())
    })
}

/// # Safety
/// `model` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compacta_standardize_mode(
    model: *const CompactaModel,
    x: f64,
    out: *mut f64,
) -> CompactaStatus {
    guard(|| {
        *out_ptr(out, "out")? = deref(model, "model")?.0.standardize_mode(x)?;
        Ok(())
    })
}

/// Applies the mode-based transform to every value of `fs` in place.
///
/// # Safety
/// `model` and `fs` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn compacta_model_apply(
    model: *const CompactaModel,
    fs: *mut CompactaFrameSet,
) -> CompactaStatus {
    guard(|| {
        let m = &deref(model, "model")?.0;
        let f = out_ptr(fs, "frameset")?;
        m.apply_mode(f.0.values_mut())?;
        Ok(())
    })
}

/// # Safety
/// `model` must come from `compacta_model_fit*` and not be used again.
#[no_mangle]
pub unsafe extern "C" fn compacta_model_free(model: *mut CompactaModel) {
    free(model)
}

// ---- metrics ----

/// # Safety
/// `observed` and `references` must each hold `len` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compacta_maer(
    observed: *const f64,
    references: *const f64,
    len: usize,
    epsilon: f64,
    out: *mut f64,
) -> CompactaStatus {
    guard(|| {
        let y = slice(observed, len, "observed")?;
        let mu = slice(references, len, "references")?;
        *out_ptr(out, "out")? = maer(y, mu, epsilon)?;
        Ok(())
    })
}

/// # Safety
/// `data` must hold `len` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compacta_ucl(
    data: *const f64,
    len: usize,
    k_sigma: f64,
    out: *mut f64,
) -> CompactaStatus {
    guard(|| {
        *out_ptr(out, "out")? = ucl(slice(data, len, "data")?, k_sigma)?;
        Ok(())
    })
}

/// # Safety
/// `data` must hold `len` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compacta_apr(
    data: *const f64,
    len: usize,
    ucl_value: f64,
    out: *mut f64,
) -> CompactaStatus {
    guard(|| {
        *out_ptr(out, "out")? = apr(slice(data, len, "data")?, ucl_value)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn compacta_overall_performance(
    accuracy: f64,
    accepted_count: u64,
    total_count: u64,
    out: *mut f64,
) -> CompactaStatus {
    guard(|| {
        let cs = ConfusionSummary::new(accuracy, accepted_count, total_count)?;
        *out_ptr(out, "out")? = overall_performance(&cs);
        Ok(())
    })
}

// ---- pipeline ----

/// Runs the full pipeline described by a config file.
///
/// # Safety
/// `config_path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn compacta_run_pipeline(config_path: *const c_char) -> CompactaStatus {
    guard(|| {
        let cfg = load_config(to_path(config_path, "config_path")?, &[])?;
        run_pipeline(&cfg)?;
        Ok(())
    })
}
