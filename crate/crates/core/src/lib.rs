//! Compact fixed-shape datasets from long time-series records.
//!
//! A record is cut into equal-length frames ([`slicing`]), optionally
//! standardized around a revised mode ([`standardize`]) and scored
//! ([`metrics`]). [`pipeline`] wires the stages together behind a flat
//! key=value [`config`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod csv_io;
pub mod error;
pub mod metrics;
pub mod peaks;
pub mod pipeline;
pub mod signal;
pub mod slicing;
pub mod standardize;

pub use config::{load_config, validate_config, PipelineConfig, SliceMethod, SliceParams};
pub use csv_io::{read_frameset_csv, read_signal_csv, read_values_csv, write_frameset_csv};
pub use error::{Error, ExitCode, Result};
pub use metrics::{apr, maer, overall_performance, ucl, QualityReport};
pub use peaks::{detect_peaks, read_peaks_csv, PeakDetectConfig};
pub use pipeline::{execute, run_pipeline, PipelineOutput};
pub use signal::{ConfusionSummary, FrameSet, Method, PeakList, Provenance, Signal};
pub use slicing::{
    fixed_slice, rr_frame, time_slice, FixedSliceConfig, RrifConfig, TimeSliceConfig,
};
pub use standardize::{
    estimate_mode, fit_classic, fit_mode_variance, revised_mode, BinWidth, ModeEstimate,
    ScaleConvention, StandardizationModel,
};
