//! Slicing strategies that turn one long record into equal-length frames.
//!
//! - [`time_slice`]: a fixed window starting at every anchor peak.
//! - [`rr_frame`]: each peak-to-peak interval resampled to a fixed length.
//! - [`fixed_slice`]: one retained range per record.
//!
//! Windows that would run past the end of the record are dropped rather
//! than padded.

use crate::error::{Error, Result};
use crate::signal::{FrameSet, Method, PeakList, Provenance, Signal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSliceConfig {
    pub window_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RrifConfig {
    /// Points per resampled frame, at least 2.
    pub frame_length: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedSliceConfig {
    pub start_s: f64,
    pub duration_s: f64,
}

fn to_samples(sig: &Signal, seconds: f64, what: &str) -> Result<usize> {
    if !seconds.is_finite() || seconds < 0.0 {
        return Err(Error::invalid(format!(
            "{what} must be a non-negative number of seconds, got {seconds}"
        )));
    }
    Ok(sig.seconds_to_samples(seconds) as usize)
}

/// Window length in samples for `cfg` at the signal's rate.
pub fn window_samples(sig: &Signal, cfg: &TimeSliceConfig) -> Result<usize> {
    if !(cfg.window_s > 0.0) {
        return Err(Error::invalid(format!(
            "window_s must be positive, got {}",
            cfg.window_s
        )));
    }
    to_samples(sig, cfg.window_s, "window_s")
}

/// Emits `samples[p .. p + W)` for every peak `p` whose window fits.
pub fn time_slice(sig: &Signal, peaks: &PeakList, cfg: &TimeSliceConfig) -> Result<FrameSet> {
    peaks.validate_for(sig)?;
    let w = window_samples(sig, cfg)?;
    if w < 1 {
        return Err(Error::numeric(format!(
            "window of {} s is shorter than one sample at {} Hz",
            cfg.window_s,
            sig.sampling_rate_hz()
        )));
    }
    let n = sig.len();
    if w > n {
        return Err(Error::numeric(format!(
            "window of {w} samples exceeds signal '{}' of {n} samples",
            sig.record_id()
        )));
    }
    let x = sig.samples();
    let fitting = peaks.indices().iter().take_while(|&&p| p + w <= n);
    let mut fs = FrameSet::with_capacity(w, peaks.len());
    for &p in fitting {
        fs.push_with(
            Provenance {
                record_id: sig.record_id().to_string(),
                anchor_index: p,
                method: Method::TimeSlice,
            },
            |buf| buf.extend_from_slice(&x[p..p + w]),
        );
    }
    Ok(fs)
}

/// Linearly resamples `segment` to `len` points, mapping the first and last
/// output points onto the first and last source samples.
pub fn resample_linear(segment: &[f64], len: usize, out: &mut Vec<f64>) {
    debug_assert!(segment.len() >= 2 && len >= 2);
    let span = segment.len() - 1;
    let denom = (len - 1) as f64;
    for j in 0..len {
        // j * span is exact in integers, so the identity case lands on whole indices
        let pos = (j * span) as f64 / denom;
        let i0 = pos.floor() as usize;
        let t = pos - i0 as f64;
        if t == 0.0 || i0 >= span {
            out.push(segment[i0.min(span)]);
        } else {
            let a = segment[i0];
            out.push(a + t * (segment[i0 + 1] - a));
        }
    }
}

/// Resamples each peak-to-peak segment `samples[p_k .. p_{k+1})` to
/// `frame_length` points.
pub fn rr_frame(sig: &Signal, peaks: &PeakList, cfg: &RrifConfig) -> Result<FrameSet> {
    peaks.validate_for(sig)?;
    if cfg.frame_length < 2 {
        return Err(Error::invalid(format!(
            "frame_length must be at least 2, got {}",
            cfg.frame_length
        )));
    }
    let idx = peaks.indices();
    if let Some(w) = idx.windows(2).find(|w| w[1] - w[0] < 2) {
        return Err(Error::numeric(format!(
            "RR segment {}..{} has fewer than 2 samples",
            w[0], w[1]
        )));
    }
    let x = sig.samples();
    let mut fs = FrameSet::with_capacity(cfg.frame_length, idx.len().saturating_sub(1));
    for w in idx.windows(2) {
        let segment = &x[w[0]..w[1]];
        fs.push_with(
            Provenance {
                record_id: sig.record_id().to_string(),
                anchor_index: w[0],
                method: Method::Rrif,
            },
            |buf| resample_linear(segment, cfg.frame_length, buf),
        );
    }
    Ok(fs)
}

/// Keeps the single range `samples[S .. S + D)`.
pub fn fixed_slice(sig: &Signal, cfg: &FixedSliceConfig) -> Result<FrameSet> {
    if !(cfg.duration_s > 0.0) {
        return Err(Error::invalid(format!(
            "duration_s must be positive, got {}",
            cfg.duration_s
        )));
    }
    let start = to_samples(sig, cfg.start_s, "start_s")?;
    let dur = to_samples(sig, cfg.duration_s, "duration_s")?;
    let n = sig.len();
    if dur < 1 {
        return Err(Error::numeric(format!(
            "duration of {} s is shorter than one sample",
            cfg.duration_s
        )));
    }
    if start.checked_add(dur).is_none_or(|end| end > n) {
        return Err(Error::numeric(format!(
            "range {start}..{} exceeds signal '{}' of {n} samples",
            start.saturating_add(dur),
            sig.record_id()
        )));
    }
    let mut fs = FrameSet::with_capacity(dur, 1);
    fs.push_with(
        Provenance {
            record_id: sig.record_id().to_string(),
            anchor_index: start,
            method: Method::Fixed,
        },
        |buf| buf.extend_from_slice(&sig.samples()[start..start + dur]),
    );
    Ok(fs)
}
