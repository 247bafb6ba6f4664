//! End-to-end batch run: ingest, anchor, slice, standardize, score, write.

use std::fs;
use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;

use crate::config::{PipelineConfig, RecordInput, SliceParams};
use crate::csv_io::{frameset_to_csv, read_signal_csv, read_values_csv, write_atomic};
use crate::error::{Error, Result};
use crate::metrics::{MetricsInput, QualityReport};
use crate::peaks::{detect_peaks, read_peaks_csv};
use crate::signal::{ConfusionSummary, FrameSet, PeakList, Signal};
use crate::slicing::{fixed_slice, rr_frame, time_slice};
use crate::standardize::StandardizationModel;

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub frames: FrameSet,
    pub report: QualityReport,
    pub model: Option<StandardizationModel>,
}

fn frame_length_hint(slicing: &SliceParams, fs_hz: f64) -> usize {
    let len = match slicing {
        SliceParams::TimeSlice(c) => (c.window_s * fs_hz).round_ties_even(),
        SliceParams::Rrif(c) => c.frame_length as f64,
        SliceParams::Fixed(c) => (c.duration_s * fs_hz).round_ties_even(),
    };
    (len as usize).max(1)
}

fn anchors_for(sig: &Signal, rec: &RecordInput, cfg: &PipelineConfig) -> Result<PeakList> {
    if let Some(path) = &rec.peaks {
        if cfg.detect.is_some() {
            info!("{}: using peak file, detection skipped", sig.record_id());
        }
        let peaks = read_peaks_csv(path)?;
        peaks.validate_for(sig)?;
        return Ok(peaks);
    }
    match &cfg.detect {
        Some(d) => detect_peaks(sig, d),
        None => Err(Error::Config(vec![format!(
            "no peaks file for '{}' and detect_peaks is off",
            rec.signal.display()
        )])),
    }
}

fn process_record(rec: &RecordInput, cfg: &PipelineConfig) -> Result<FrameSet> {
    let sig =
        read_signal_csv(&rec.signal, cfg.sampling_rate_hz).map_err(|e| e.in_stage("ingest"))?;
    let frames = match &cfg.slicing {
        SliceParams::Fixed(c) => fixed_slice(&sig, c),
        SliceParams::TimeSlice(c) => {
            let peaks = anchors_for(&sig, rec, cfg).map_err(|e| e.in_stage("peaks"))?;
            time_slice(&sig, &peaks, c)
        }
        SliceParams::Rrif(c) => {
            let peaks = anchors_for(&sig, rec, cfg).map_err(|e| e.in_stage("peaks"))?;
            rr_frame(&sig, &peaks, c)
        }
    }
    .map_err(|e| e.in_stage("slice"))?;
    info!("{}: {} frames", sig.record_id(), frames.frame_count());
    Ok(frames)
}

/// Runs every stage and returns the results without touching output paths.
pub fn execute(cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let per_record: Vec<Result<FrameSet>> = cfg
        .records
        .par_iter()
        .map(|rec| process_record(rec, cfg))
        .collect();

    let mut frames = FrameSet::new(frame_length_hint(&cfg.slicing, cfg.sampling_rate_hz))?;
    for (i, fs) in per_record.into_iter().enumerate() {
        let fs = fs?;
        if i == 0 {
            frames = fs;
        } else {
            frames.extend(fs).map_err(|e| e.in_stage("slice"))?;
        }
    }
    if let Some(label) = &cfg.label {
        frames.set_labels(Some(vec![label.clone(); frames.frame_count()]))?;
    }

    let mut model = None;
    if cfg.standardize.enabled {
        if frames.is_empty() {
            warn!("no frames to standardize");
        } else {
            let s = &cfg.standardize;
            let m =
                StandardizationModel::fit(frames.values(), s.eta, s.bin_width, s.scale_convention)
                    .and_then(|m| m.apply_mode(frames.values_mut()).map(|_| m))
                    .map_err(|e| e.in_stage("standardize"))?;
            info!(
                "standardized {} values: phi={} var_mode={}",
                m.n, m.phi, m.var_mode
            );
            model = Some(m);
        }
    }

    let report = score(&frames, cfg).map_err(|e| e.in_stage("metrics"))?;
    Ok(PipelineOutput {
        frames,
        report,
        model,
    })
}

fn score(frames: &FrameSet, cfg: &PipelineConfig) -> Result<QualityReport> {
    let references = cfg.references.as_ref().map(read_values_csv).transpose()?;
    let confusion = cfg
        .confusion
        .map(|c| {
            let total = c.total_count.unwrap_or(frames.frame_count() as u64);
            ConfusionSummary::new(c.accuracy, c.accepted_count, total)
        })
        .transpose()?;
    QualityReport::compute(
        frames.values(),
        frames.frame_length(),
        cfg.metrics.epsilon,
        cfg.metrics.k_sigma,
        MetricsInput {
            references: references.as_deref(),
            confusion,
        },
    )
}

/// Runs the pipeline and writes the frame set and report(s).
///
/// On any failure no output file is left behind by this run.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let out = execute(cfg)?;
    let mut written: Vec<&Path> = Vec::new();
    let result = (|| -> Result<()> {
        write_atomic(&cfg.out, &frameset_to_csv(&out.frames))?;
        written.push(&cfg.out);
        write_atomic(&cfg.report, out.report.to_key_value().as_bytes())?;
        written.push(&cfg.report);
        if let Some(p) = &cfg.report_csv {
            write_atomic(p, out.report.to_csv().as_bytes())?;
        }
        Ok(())
    })();
    if let Err(e) = result {
        for p in written {
            let _ = fs::remove_file(p);
        }
        return Err(Error::in_stage(e, "write"));
    }
    Ok(out)
}
