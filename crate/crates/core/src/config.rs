//! Flat `key=value` pipeline configuration.
//!
//! Validation collects every violation instead of stopping at the first.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::{DEFAULT_EPSILON, DEFAULT_K_SIGMA};
use crate::peaks::PeakDetectConfig;
use crate::slicing::{FixedSliceConfig, RrifConfig, TimeSliceConfig};
use crate::standardize::{BinWidth, ScaleConvention};

pub const DEFAULT_ETA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceMethod {
    TimeSlice,
    Rrif,
    Fixed,
}

impl SliceMethod {
    pub fn key(self) -> &'static str {
        match self {
            SliceMethod::TimeSlice => "time_slice",
            SliceMethod::Rrif => "rrif",
            SliceMethod::Fixed => "fixed",
        }
    }

    pub fn needs_peaks(self) -> bool {
        !matches!(self, SliceMethod::Fixed)
    }

    fn own_keys(self) -> &'static [&'static str] {
        match self {
            SliceMethod::TimeSlice => &["window_s"],
            SliceMethod::Rrif => &["frame_length"],
            SliceMethod::Fixed => &["start_s", "duration_s"],
        }
    }
}

impl fmt::Display for SliceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for SliceMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time_slice" => Ok(SliceMethod::TimeSlice),
            "rrif" => Ok(SliceMethod::Rrif),
            "fixed" => Ok(SliceMethod::Fixed),
            other => Err(Error::invalid(format!(
                "method must be time_slice, rrif or fixed, got '{other}'"
            ))),
        }
    }
}

/// Method plus the parameters that method needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SliceParams {
    TimeSlice(TimeSliceConfig),
    Rrif(RrifConfig),
    Fixed(FixedSliceConfig),
}

impl SliceParams {
    pub fn method(&self) -> SliceMethod {
        match self {
            SliceParams::TimeSlice(_) => SliceMethod::TimeSlice,
            SliceParams::Rrif(_) => SliceMethod::Rrif,
            SliceParams::Fixed(_) => SliceMethod::Fixed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardizeParams {
    pub enabled: bool,
    pub eta: f64,
    pub bin_width: BinWidth,
    pub scale_convention: ScaleConvention,
}

impl Default for StandardizeParams {
    fn default() -> Self {
        StandardizeParams {
            enabled: false,
            eta: DEFAULT_ETA,
            bin_width: BinWidth::Auto,
            scale_convention: ScaleConvention::StandardError,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsParams {
    pub epsilon: f64,
    pub k_sigma: f64,
}

impl Default for MetricsParams {
    fn default() -> Self {
        MetricsParams {
            epsilon: DEFAULT_EPSILON,
            k_sigma: DEFAULT_K_SIGMA,
        }
    }
}

/// Inputs for the overall-performance score. `total_count` defaults to the
/// number of emitted frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionParams {
    pub accepted_count: u64,
    pub total_count: Option<u64>,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordInput {
    pub signal: PathBuf,
    pub peaks: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub sampling_rate_hz: f64,
    pub slicing: SliceParams,
    pub records: Vec<RecordInput>,
    /// Used only for records without a peaks file.
    pub detect: Option<PeakDetectConfig>,
    pub standardize: StandardizeParams,
    pub metrics: MetricsParams,
    pub references: Option<PathBuf>,
    pub confusion: Option<ConfusionParams>,
    pub label: Option<String>,
    pub out: PathBuf,
    pub report: PathBuf,
    pub report_csv: Option<PathBuf>,
}

pub const KNOWN_KEYS: &[&str] = &[
    "method",
    "sampling_rate_hz",
    "window_s",
    "frame_length",
    "start_s",
    "duration_s",
    "signal",
    "peaks",
    "detect_peaks",
    "min_height",
    "refractory_s",
    "standardize",
    "eta",
    "bin_width",
    "scale_convention",
    "epsilon",
    "k_sigma",
    "references",
    "accepted_count",
    "total_count",
    "accuracy",
    "label",
    "out",
    "report",
    "report_csv",
];

/// Parses `key=value` lines. Blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> std::result::Result<Vec<(String, String)>, Vec<String>> {
    let mut pairs = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => {
                pairs.push((k.trim().to_string(), v.trim().to_string()))
            }
            _ => errors.push(format!("line {}: expected key=value, got '{line}'", i + 1)),
        }
    }
    if errors.is_empty() {
        Ok(pairs)
    } else {
        Err(errors)
    }
}

/// Parses one `key=value` override.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(Error::Config(vec![format!(
            "override '{s}' is not key=value"
        )])),
    }
}

struct Fields<'a> {
    map: &'a BTreeMap<String, String>,
    errors: Vec<String>,
}

impl<'a> Fields<'a> {
    fn raw(&self, key: &str) -> Option<&'a str> {
        self.map.get(key).map(String::as_str)
    }

    fn parse<T: FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        let raw = self.raw(key)?;
        match raw.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.errors
                    .push(format!("{key} must be {what}, got '{raw}'"));
                None
            }
        }
    }

    fn real(
        &mut self,
        key: &str,
        default: Option<f64>,
        check: impl Fn(f64) -> bool,
        bounds: &str,
    ) -> Option<f64> {
        let v = match self.parse::<f64>(key, "a number") {
            Some(v) => v,
            None if self.raw(key).is_some() => return None,
            None => return default,
        };
        if v.is_finite() && check(v) {
            Some(v)
        } else {
            self.errors.push(format!("{key} {bounds}"));
            None
        }
    }

    fn required_real(
        &mut self,
        key: &str,
        method: SliceMethod,
        check: impl Fn(f64) -> bool,
        bounds: &str,
    ) -> Option<f64> {
        if self.raw(key).is_none() {
            self.errors.push(format!("{key} required for {method}"));
            return None;
        }
        self.real(key, None, check, bounds)
    }

    fn flag(&mut self, key: &str, default: bool) -> bool {
        match self.raw(key) {
            None => default,
            Some("true" | "yes" | "1" | "on") => true,
            Some("false" | "no" | "0" | "off") => false,
            Some(other) => {
                self.errors
                    .push(format!("{key} must be true or false, got '{other}'"));
                default
            }
        }
    }

    fn required(&mut self, key: &str) -> Option<&'a str> {
        let v = self.raw(key).filter(|v| !v.is_empty());
        if v.is_none() {
            self.errors.push(format!("{key} is required"));
        }
        v
    }
}

fn path_list(raw: &str) -> Vec<PathBuf> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(PathBuf::from)
        .collect()
}

impl PipelineConfig {
    /// Builds a config from key/value pairs. Later pairs override earlier
    /// ones, so overrides are applied by appending them.
    pub fn from_pairs<I, K, V>(pairs: I) -> std::result::Result<Self, Vec<String>>
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let mut map = BTreeMap::new();
        let mut errors = Vec::new();
        for (k, v) in pairs {
            let k = k.into();
            if !KNOWN_KEYS.contains(&k.as_str()) {
                errors.push(format!("unknown key '{k}'"));
                continue;
            }
            map.insert(k, v.into());
        }
        let mut f = Fields { map: &map, errors };

        let method = f
            .required("method")
            .and_then(|m| match m.parse::<SliceMethod>() {
                Ok(m) => Some(m),
                Err(e) => {
                    f.errors.push(e.to_string());
                    None
                }
            });
        let sampling_rate_hz = if f.raw("sampling_rate_hz").is_none() {
            f.errors.push("sampling_rate_hz is required".into());
            None
        } else {
            f.real("sampling_rate_hz", None, |v| v > 0.0, "must be positive")
        };

        let slicing = method.and_then(|m| {
            for other in [
                SliceMethod::TimeSlice,
                SliceMethod::Rrif,
                SliceMethod::Fixed,
            ] {
                if other == m {
                    continue;
                }
                for key in other.own_keys() {
                    if f.raw(key).is_some() {
                        f.errors.push(format!("{key} not valid for {m}"));
                    }
                }
            }
            match m {
                SliceMethod::TimeSlice => f
                    .required_real("window_s", m, |v| v > 0.0, "must be positive")
                    .map(|window_s| SliceParams::TimeSlice(TimeSliceConfig { window_s })),
                SliceMethod::Rrif => {
                    if f.raw("frame_length").is_none() {
                        f.errors.push(format!("frame_length required for {m}"));
                        return None;
                    }
                    match f.parse::<usize>("frame_length", "an integer") {
                        Some(l) if l >= 2 => {
                            Some(SliceParams::Rrif(RrifConfig { frame_length: l }))
                        }
                        Some(_) => {
                            f.errors.push("frame_length must be at least 2".into());
                            None
                        }
                        None => None,
                    }
                }
                SliceMethod::Fixed => {
                    let start = f.required_real("start_s", m, |v| v >= 0.0, "must be non-negative");
                    let dur = f.required_real("duration_s", m, |v| v > 0.0, "must be positive");
                    Some(SliceParams::Fixed(FixedSliceConfig {
                        start_s: start?,
                        duration_s: dur?,
                    }))
                }
            }
        });

        let signals = f.required("signal").map(path_list).unwrap_or_default();
        let peak_files = f.raw("peaks").map(path_list);
        let detect_enabled = f.flag("detect_peaks", false);
        let min_height = f.real(
            "min_height",
            Some(PeakDetectConfig::default().min_height),
            |_| true,
            "",
        );
        let refractory_s = f.real(
            "refractory_s",
            Some(PeakDetectConfig::default().refractory_s),
            |v| v >= 0.0,
            "must be non-negative",
        );
        if method == Some(SliceMethod::Fixed) {
            for key in ["peaks", "detect_peaks", "min_height", "refractory_s"] {
                if f.raw(key).is_some() {
                    f.errors.push(format!("{key} not valid for fixed"));
                }
            }
        } else if !detect_enabled {
            for key in ["min_height", "refractory_s"] {
                if f.raw(key).is_some() {
                    f.errors.push(format!("{key} requires detect_peaks=true"));
                }
            }
        }
        if let Some(p) = &peak_files {
            if p.len() != signals.len() {
                f.errors.push(format!(
                    "peaks lists {} files but signal lists {}",
                    p.len(),
                    signals.len()
                ));
            }
        }
        let records: Vec<RecordInput> = signals
            .iter()
            .enumerate()
            .map(|(i, s)| RecordInput {
                signal: s.clone(),
                peaks: peak_files.as_ref().and_then(|p| p.get(i).cloned()),
            })
            .collect();

        let std_default = StandardizeParams::default();
        let enabled = f.flag("standardize", std_default.enabled);
        let eta = f.real(
            "eta",
            Some(std_default.eta),
            |v| (0.0..=1.0).contains(&v),
            "out of [0,1]",
        );
        let bin_width = f
            .parse::<BinWidth>("bin_width", "a positive number, 'auto' or 'exact'")
            .or(f
                .raw("bin_width")
                .map_or(Some(std_default.bin_width), |_| None));
        let scale_convention = f
            .parse::<ScaleConvention>("scale_convention", "se or sd")
            .or(f
                .raw("scale_convention")
                .map_or(Some(std_default.scale_convention), |_| None));

        let epsilon = f.real(
            "epsilon",
            Some(DEFAULT_EPSILON),
            |v| v > 0.0,
            "must be positive",
        );
        let k_sigma = f.real(
            "k_sigma",
            Some(DEFAULT_K_SIGMA),
            |v| v > 0.0,
            "must be positive",
        );

        let accepted = f.parse::<u64>("accepted_count", "a non-negative integer");
        let total = f.parse::<u64>("total_count", "a positive integer");
        let accuracy = f.real(
            "accuracy",
            None,
            |v| (0.0..=1.0).contains(&v),
            "out of [0,1]",
        );
        let confusion = match (f.raw("accepted_count"), f.raw("accuracy")) {
            (None, None) => {
                if f.raw("total_count").is_some() {
                    f.errors
                        .push("total_count requires accepted_count and accuracy".into());
                }
                None
            }
            (Some(_), Some(_)) => match (accepted, accuracy) {
                (Some(a), Some(x)) => {
                    if total == Some(0) {
                        f.errors.push("total_count must be positive".into());
                    } else if total.is_some_and(|t| a > t) {
                        f.errors.push("accepted_count exceeds total_count".into());
                    }
                    Some(ConfusionParams {
                        accepted_count: a,
                        total_count: total,
                        accuracy: x,
                    })
                }
                _ => None,
            },
            _ => {
                f.errors
                    .push("accepted_count and accuracy must be given together".into());
                None
            }
        };

        let out = f.required("out").map(PathBuf::from);
        let report = f.required("report").map(PathBuf::from);
        let report_csv = f
            .raw("report_csv")
            .filter(|s| !s.is_empty())
            .map(PathBuf::from);
        let references = f
            .raw("references")
            .filter(|s| !s.is_empty())
            .map(PathBuf::from);
        let label = f.raw("label").filter(|s| !s.is_empty()).map(str::to_string);

        if !f.errors.is_empty() {
            return Err(f.errors);
        }
        // every None below has pushed an error
        Ok(PipelineConfig {
            sampling_rate_hz: sampling_rate_hz.unwrap(),
            slicing: slicing.unwrap(),
            records,
            detect: detect_enabled.then(|| PeakDetectConfig {
                min_height: min_height.unwrap(),
                refractory_s: refractory_s.unwrap(),
            }),
            standardize: StandardizeParams {
                enabled,
                eta: eta.unwrap(),
                bin_width: bin_width.unwrap(),
                scale_convention: scale_convention.unwrap(),
            },
            metrics: MetricsParams {
                epsilon: epsilon.unwrap(),
                k_sigma: k_sigma.unwrap(),
            },
            references,
            confusion,
            label,
            out: out.unwrap(),
            report: report.unwrap(),
            report_csv,
        })
    }
}

/// Reads and validates a config file, applying `overrides` on top.
pub fn load_config(
    path: impl AsRef<Path>,
    overrides: &[(String, String)],
) -> Result<PipelineConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = parse_pairs(&text).map_err(Error::Config)?;
    let mut seen = std::collections::HashSet::new();
    let dupes: Vec<String> = pairs
        .iter()
        .filter(|(k, _)| !seen.insert(k.clone()))
        .map(|(k, _)| format!("duplicate key '{k}'"))
        .collect();
    if !dupes.is_empty() {
        return Err(Error::Config(dupes));
    }
    pairs.extend(overrides.iter().cloned());
    PipelineConfig::from_pairs(pairs).map_err(Error::Config)
}

/// Reads and validates a config file.
pub fn validate_config(path: impl AsRef<Path>) -> Result<PipelineConfig> {
    load_config(path, &[])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(pairs: &[(&str, &str)]) -> std::result::Result<PipelineConfig, Vec<String>> {
        PipelineConfig::from_pairs(pairs.iter().copied())
    }

    const MINIMAL: &[(&str, &str)] = &[
        ("method", "time_slice"),
        ("sampling_rate_hz", "100"),
        ("window_s", "0.8"),
        ("signal", "s.csv"),
        ("peaks", "p.csv"),
        ("out", "frames.csv"),
        ("report", "report.txt"),
    ];

    #[test]
    fn minimal_config_gets_defaults() {
        let c = cfg(MINIMAL).unwrap();
        assert_eq!(c.standardize.eta, 0.5);
        assert_eq!(c.metrics.epsilon, 1e-9);
        assert_eq!(c.metrics.k_sigma, 3.0);
        assert_eq!(
            c.standardize.scale_convention,
            ScaleConvention::StandardError
        );
        assert_eq!(c.standardize.bin_width, BinWidth::Auto);
        assert!(!c.standardize.enabled);
        assert_eq!(
            c.slicing,
            SliceParams::TimeSlice(TimeSliceConfig { window_s: 0.8 })
        );
        assert_eq!(
            c.records,
            vec![RecordInput {
                signal: "s.csv".into(),
                peaks: Some("p.csv".into())
            }]
        );
        assert!(c.detect.is_none() && c.confusion.is_none());
    }

    #[test]
    fn foreign_method_key_rejected() {
        let mut p = MINIMAL.to_vec();
        p.push(("frame_length", "64"));
        let errs = cfg(&p).unwrap_err();
        assert!(
            errs.contains(&"frame_length not valid for time_slice".to_string()),
            "{errs:?}"
        );
    }

    #[test]
    fn eta_bounds() {
        let mut p = MINIMAL.to_vec();
        p.push(("eta", "1.5"));
        assert_eq!(cfg(&p).unwrap_err(), vec!["eta out of [0,1]".to_string()]);
    }

    #[test]
    fn all_violations_reported() {
        let errs = cfg(&[
            ("method", "rrif"),
            ("window_s", "1"),
            ("eta", "-1"),
            ("colour", "red"),
            ("scale_convention", "zz"),
        ])
        .unwrap_err();
        for want in [
            "unknown key 'colour'",
            "sampling_rate_hz is required",
            "window_s not valid for rrif",
            "frame_length required for rrif",
            "signal is required",
            "eta out of [0,1]",
            "out is required",
            "report is required",
        ] {
            assert!(
                errs.iter().any(|e| e == want),
                "missing '{want}' in {errs:?}"
            );
        }
        assert!(errs
            .iter()
            .any(|e| e.starts_with("scale_convention must be")));
    }

    #[test]
    fn fixed_method_params() {
        let c = cfg(&[
            ("method", "fixed"),
            ("sampling_rate_hz", "1000"),
            ("start_s", "0.2"),
            ("duration_s", "0.5"),
            ("signal", "a.csv,b.csv"),
            ("out", "o"),
            ("report", "r"),
        ])
        .unwrap();
        assert_eq!(c.records.len(), 2);
        assert_eq!(
            c.slicing,
            SliceParams::Fixed(FixedSliceConfig {
                start_s: 0.2,
                duration_s: 0.5
            })
        );

        let errs = cfg(&[
            ("method", "fixed"),
            ("sampling_rate_hz", "1000"),
            ("start_s", "0.2"),
            ("signal", "a.csv"),
            ("peaks", "p.csv"),
            ("out", "o"),
            ("report", "r"),
        ])
        .unwrap_err();
        assert!(errs.contains(&"duration_s required for fixed".to_string()));
        assert!(errs.contains(&"peaks not valid for fixed".to_string()));
    }

    #[test]
    fn confusion_inputs() {
        let mut p = MINIMAL.to_vec();
        p.push(("accepted_count", "80"));
        assert!(cfg(&p).unwrap_err()[0].contains("together"));
        p.push(("accuracy", "0.9"));
        p.push(("total_count", "100"));
        let c = cfg(&p).unwrap();
        assert_eq!(
            c.confusion,
            Some(ConfusionParams {
                accepted_count: 80,
                total_count: Some(100),
                accuracy: 0.9
            })
        );
    }

    #[test]
    fn overrides_win() {
        let mut p: Vec<(String, String)> = MINIMAL
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        p.push(("window_s".into(), "0.5".into()));
        let c = PipelineConfig::from_pairs(p).unwrap();
        assert_eq!(
            c.slicing,
            SliceParams::TimeSlice(TimeSliceConfig { window_s: 0.5 })
        );
    }

    #[test]
    fn text_parsing() {
        let pairs = parse_pairs("# comment\n\nmethod = rrif\nfs=1\n").unwrap();
        assert_eq!(
            pairs,
            vec![("method".into(), "rrif".into()), ("fs".into(), "1".into())]
        );
        assert!(parse_pairs("novalue\n").is_err());
        assert!(parse_override("eta=0.3").is_ok());
        assert!(parse_override("eta").is_err());
    }

    #[test]
    fn file_level_checks() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.cfg");
        std::fs::write(&p, "method=rrif\nmethod=fixed\n").unwrap();
        match validate_config(&p) {
            Err(Error::Config(e)) => assert_eq!(e, vec!["duplicate key 'method'".to_string()]),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            validate_config(dir.path().join("nope")),
            Err(Error::Io { .. })
        ));
    }
}
