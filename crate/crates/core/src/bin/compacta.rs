use std::path::{Path, PathBuf};
use std::process;

use clap::{Args, Parser, Subcommand};
use log::{error, info};

use compacta::config::{load_config, parse_override, SliceMethod};
use compacta::csv_io::write_atomic;
use compacta::metrics::{MetricsInput, QualityReport, DEFAULT_EPSILON, DEFAULT_K_SIGMA};
use compacta::{
    detect_peaks, fixed_slice, read_frameset_csv, read_peaks_csv, read_signal_csv, read_values_csv,
    rr_frame, run_pipeline, time_slice, write_frameset_csv, BinWidth, ConfusionSummary, Error,
    FixedSliceConfig, FrameSet, PeakDetectConfig, Result, RrifConfig, ScaleConvention,
    StandardizationModel, TimeSliceConfig,
};

#[derive(Parser)]
#[command(
    name = "compacta",
    version,
    about = "Build compact fixed-shape datasets from long time-series records"
)]
struct Cli {
    /// Log progress to standard error.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a config key, e.g. --set eta=0.6 (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Check a config file and list every problem found.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Cut one signal into frames.
    Slice(SliceArgs),
    /// Fit a mode-based standardization on a frame set and apply it.
    Standardize(StandardizeArgs),
    /// Score a frame set.
    Metrics(MetricsArgs),
    /// Print the shape and provenance of a frame set.
    Inspect {
        #[arg(long)]
        data: PathBuf,
    },
}

#[derive(Args)]
struct SliceArgs {
    #[arg(long, value_parser = parse_method)]
    method: SliceMethod,
    /// Sampling rate in Hz.
    #[arg(long)]
    fs: f64,
    #[arg(long)]
    signal: PathBuf,
    #[arg(long)]
    peaks: Option<PathBuf>,
    /// Detect peaks when no peaks file is given.
    #[arg(long)]
    detect: bool,
    #[arg(long)]
    min_height: Option<f64>,
    #[arg(long)]
    refractory_s: Option<f64>,
    #[arg(long)]
    window_s: Option<f64>,
    #[arg(long)]
    frame_length: Option<usize>,
    #[arg(long)]
    start_s: Option<f64>,
    #[arg(long)]
    duration_s: Option<f64>,
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StandardizeArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
    /// Positive width, "auto" or "exact".
    #[arg(long, default_value = "auto")]
    bin_width: BinWidth,
    /// "se" (sigma / sqrt(n)) or "sd" (sigma).
    #[arg(long = "scale", default_value = "se")]
    scale_convention: ScaleConvention,
    /// Write the fitted parameters as key=value lines.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_K_SIGMA)]
    k_sigma: f64,
    /// Reference values, one per row.
    #[arg(long)]
    references: Option<PathBuf>,
    #[arg(long, requires = "accuracy")]
    accepted_count: Option<u64>,
    #[arg(long, requires = "accepted_count")]
    total_count: Option<u64>,
    #[arg(long, requires = "accepted_count")]
    accuracy: Option<f64>,
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    report_csv: Option<PathBuf>,
}

fn parse_method(s: &str) -> std::result::Result<SliceMethod, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(vec![msg.into()])
}

fn slice_cmd(a: SliceArgs) -> Result<()> {
    let sig = read_signal_csv(&a.signal, a.fs)?;
    let given: [(&str, bool); 4] = [
        ("window-s", a.window_s.is_some()),
        ("frame-length", a.frame_length.is_some()),
        ("start-s", a.start_s.is_some()),
        ("duration-s", a.duration_s.is_some()),
    ];
    let own: &[&str] = match a.method {
        SliceMethod::TimeSlice => &["window-s"],
        SliceMethod::Rrif => &["frame-length"],
        SliceMethod::Fixed => &["start-s", "duration-s"],
    };
    let foreign: Vec<String> = given
        .iter()
        .filter(|(k, set)| *set && !own.contains(k))
        .map(|(k, _)| format!("--{k} not valid for {}", a.method))
        .collect();
    if !foreign.is_empty() {
        return Err(Error::Config(foreign));
    }

    let peaks = || -> Result<_> {
        match (&a.peaks, a.detect) {
            (Some(p), _) => {
                let peaks = read_peaks_csv(p)?;
                peaks.validate_for(&sig)?;
                Ok(peaks)
            }
            (None, true) => {
                let d = PeakDetectConfig::default();
                detect_peaks(
                    &sig,
                    &PeakDetectConfig {
                        min_height: a.min_height.unwrap_or(d.min_height),
                        refractory_s: a.refractory_s.unwrap_or(d.refractory_s),
                    },
                )
            }
            (None, false) => Err(config_error(format!(
                "--peaks or --detect required for {}",
                a.method
            ))),
        }
    };
    let mut frames = match a.method {
        SliceMethod::TimeSlice => {
            let window_s = a
                .window_s
                .ok_or_else(|| config_error("--window-s required for time_slice"))?;
            time_slice(&sig, &peaks()?, &TimeSliceConfig { window_s })?
        }
        SliceMethod::Rrif => {
            let frame_length = a
                .frame_length
                .ok_or_else(|| config_error("--frame-length required for rrif"))?;
            rr_frame(&sig, &peaks()?, &RrifConfig { frame_length })?
        }
        SliceMethod::Fixed => {
            let start_s = a
                .start_s
                .ok_or_else(|| config_error("--start-s required for fixed"))?;
            let duration_s = a
                .duration_s
                .ok_or_else(|| config_error("--duration-s required for fixed"))?;
            fixed_slice(
                &sig,
                &FixedSliceConfig {
                    start_s,
                    duration_s,
                },
            )?
        }
    };
    if let Some(label) = a.label {
        frames.set_labels(Some(vec![label; frames.frame_count()]))?;
    }
    write_frameset_csv(&frames, &a.out)?;
    info!(
        "wrote {} frames of {} values",
        frames.frame_count(),
        frames.frame_length()
    );
    Ok(())
}

fn standardize_cmd(a: StandardizeArgs) -> Result<()> {
    let mut frames = read_frameset_csv(&a.data)?;
    let model = StandardizationModel::fit(frames.values(), a.eta, a.bin_width, a.scale_convention)?;
    model.apply_mode(frames.values_mut())?;
    write_frameset_csv(&frames, &a.out)?;
    if let Some(p) = &a.model {
        if let Err(e) = write_atomic(p, model.to_report().as_bytes()) {
            let _ = std::fs::remove_file(&a.out);
            return Err(e);
        }
    }
    info!(
        "phi={} var_mode={} (p_hat={})",
        model.phi, model.var_mode, model.mode.mode_prob
    );
    Ok(())
}

fn metrics_cmd(a: MetricsArgs) -> Result<()> {
    let frames = read_frameset_csv(&a.data)?;
    let references = a.references.as_ref().map(read_values_csv).transpose()?;
    let confusion = match (a.accepted_count, a.accuracy) {
        (Some(acc), Some(x)) => Some(ConfusionSummary::new(
            x,
            acc,
            a.total_count.unwrap_or(frames.frame_count() as u64),
        )?),
        _ => None,
    };
    let report = QualityReport::compute(
        frames.values(),
        frames.frame_length(),
        a.epsilon,
        a.k_sigma,
        MetricsInput {
            references: references.as_deref(),
            confusion,
        },
    )?;
    write_atomic(&a.report, report.to_key_value().as_bytes())?;
    if let Some(p) = &a.report_csv {
        if let Err(e) = write_atomic(p, report.to_csv().as_bytes()) {
            let _ = std::fs::remove_file(&a.report);
            return Err(e);
        }
    }
    Ok(())
}

fn inspect(path: &Path) -> Result<()> {
    let frames: FrameSet = read_frameset_csv(path)?;
    println!("frames={}", frames.frame_count());
    println!("frame_length={}", frames.frame_length());
    println!("values={}", frames.values().len());
    let mut records: Vec<(&str, &str, usize)> = Vec::new();
    for p in frames.provenance() {
        match records.last_mut() {
            Some((id, m, n)) if *id == p.record_id && *m == p.method.tag() => *n += 1,
            _ => records.push((&p.record_id, p.method.tag(), 1)),
        }
    }
    for (id, method, n) in records {
        println!("record={id} method={method} frames={n}");
    }
    if let Some(labels) = frames.labels() {
        let mut distinct: Vec<&String> = labels.iter().collect();
        distinct.sort();
        distinct.dedup();
        println!("labels={}", distinct.len());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, overrides } => {
            let overrides = overrides
                .iter()
                .map(|s| parse_override(s))
                .collect::<Result<Vec<_>>>()?;
            let cfg = load_config(&config, &overrides)?;
            let out = run_pipeline(&cfg)?;
            info!(
                "wrote {} frames to {} and report to {}",
                out.frames.frame_count(),
                cfg.out.display(),
                cfg.report.display()
            );
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = load_config(&config, &[])?;
            println!(
                "ok: method={} records={}",
                cfg.slicing.method(),
                cfg.records.len()
            );
            Ok(())
        }
        Command::Slice(a) => slice_cmd(a),
        Command::Standardize(a) => standardize_cmd(a),
        Command::Metrics(a) => metrics_cmd(a),
        Command::Inspect { data } => inspect(&data),
    }
}

fn main() {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    if let Err(e) = run(cli) {
        error!("{e}");
        process::exit(e.exit_code() as i32);
    }
}
