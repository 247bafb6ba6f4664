//! Anchor peak detection and peak-file ingestion.

use std::path::Path;

use crate::csv_io::{parse_error, records};
use crate::error::{Error, Result};
use crate::signal::{PeakList, Signal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakDetectConfig {
    /// Absolute amplitude threshold.
    pub min_height: f64,
    /// Minimum spacing between accepted peaks, in seconds.
    pub refractory_s: f64,
}

impl Default for PeakDetectConfig {
    fn default() -> Self {
        PeakDetectConfig {
            min_height: 0.5,
            refractory_s: 0.2,
        }
    }
}

impl PeakDetectConfig {
    /// Minimum sample distance between accepted peaks.
    pub fn refractory_samples(&self, sampling_rate_hz: f64) -> usize {
        // absorbs float noise such as 0.07 * 100 = 7.000000000000001
        (self.refractory_s * sampling_rate_hz - 1e-9)
            .ceil()
            .max(0.0) as usize
    }
}

/// Greedy left-to-right local-maximum detector.
///
/// A sample is a candidate when it is strictly above its left neighbour and
/// not below its right one, so the leftmost sample of a plateau wins.
pub fn detect_peaks(sig: &Signal, cfg: &PeakDetectConfig) -> Result<PeakList> {
    if !(cfg.refractory_s >= 0.0) || !cfg.refractory_s.is_finite() {
        return Err(Error::invalid(format!(
            "refractory_s must be non-negative, got {}",
            cfg.refractory_s
        )));
    }
    let x = sig.samples();
    if x.len() < 3 {
        return Err(Error::numeric(format!(
            "peak detection needs at least 3 samples, signal '{}' has {}",
            sig.record_id(),
            x.len()
        )));
    }
    let gap = cfg.refractory_samples(sig.sampling_rate_hz());
    let mut out: Vec<usize> = Vec::new();
    for i in 1..x.len() - 1 {
        if x[i] > x[i - 1] && x[i] >= x[i + 1] && x[i] >= cfg.min_height {
            match out.last() {
                Some(&last) if i - last < gap => {}
                _ => out.push(i),
            }
        }
    }
    PeakList::new(out, sig.record_id())
}

/// Reads one non-negative integer index per row; an `index` header is allowed.
pub fn read_peaks_csv(path: impl AsRef<Path>) -> Result<PeakList> {
    let path = path.as_ref();
    let mut rows = records(path)?;
    if rows
        .first()
        .is_some_and(|(_, r)| r.len() == 1 && r[0].eq_ignore_ascii_case("index"))
    {
        rows.remove(0);
    }
    let mut indices: Vec<usize> = Vec::with_capacity(rows.len());
    for (line, rec) in &rows {
        if rec.len() != 1 {
            return Err(parse_error(path, *line, "expected a single index column"));
        }
        let field = &rec[0];
        let idx: usize = match field.parse::<i64>() {
            Ok(v) if v < 0 => {
                return Err(parse_error(path, *line, format!("negative index {v}")));
            }
            Ok(v) => v as usize,
            Err(_) => {
                return Err(parse_error(
                    path,
                    *line,
                    format!("non-integer index '{field}'"),
                ));
            }
        };
        if indices.last().is_some_and(|&prev| idx <= prev) {
            return Err(parse_error(
                path,
                *line,
                format!("non-increasing at row {line}"),
            ));
        }
        indices.push(idx);
    }
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    PeakList::new(indices, id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn sig(x: Vec<f64>, fs: f64) -> Signal {
        Signal::new(x, fs, "t").unwrap()
    }

    #[test]
    fn constant_signal_has_no_peaks() {
        let s = sig(vec![3.0; 50], 100.0);
        let cfg = PeakDetectConfig {
            min_height: 0.1,
            refractory_s: 0.0,
        };
        assert!(detect_peaks(&s, &cfg).unwrap().is_empty());
    }

    #[test]
    fn impulse_train() {
        let n = 1000;
        let mut x = vec![0.0; n];
        for i in (50..n - 1).step_by(100) {
            x[i] = 1.0;
        }
        let expected: Vec<usize> = (1..n - 1)
            .filter(|&i| x[i] > x[i - 1] && x[i] >= x[i + 1] && x[i] >= 0.5)
            .collect();
        assert_eq!(expected.len(), 10);
        let cfg = PeakDetectConfig {
            min_height: 0.5,
            refractory_s: 0.0,
        };
        assert_eq!(
            detect_peaks(&sig(x, 100.0), &cfg).unwrap().indices(),
            &expected[..]
        );
    }

    #[test]
    fn refractory_keeps_first() {
        let mut x = vec![0.0; 100];
        x[30] = 1.0;
        x[40] = 2.0;
        let cfg = PeakDetectConfig {
            min_height: 0.5,
            refractory_s: 0.2,
        };
        assert_eq!(cfg.refractory_samples(100.0), 20);
        assert_eq!(detect_peaks(&sig(x, 100.0), &cfg).unwrap().indices(), &[30]);
    }

    #[test]
    fn plateau_takes_leftmost() {
        let x = vec![0.0, 1.0, 1.0, 1.0, 0.0];
        let cfg = PeakDetectConfig {
            min_height: 0.0,
            refractory_s: 0.0,
        };
        assert_eq!(detect_peaks(&sig(x, 1.0), &cfg).unwrap().indices(), &[1]);
    }

    #[test]
    fn short_signal_rejected() {
        let cfg = PeakDetectConfig::default();
        assert!(detect_peaks(&sig(vec![1.0, 2.0], 1.0), &cfg).is_err());
    }

    fn file(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn peak_files() {
        let f = file("100\n200\n300\n");
        assert_eq!(
            read_peaks_csv(f.path()).unwrap().indices(),
            &[100, 200, 300]
        );

        let f = file("index\n5\n7\n");
        assert_eq!(read_peaks_csv(f.path()).unwrap().indices(), &[5, 7]);

        let f = file("");
        assert!(read_peaks_csv(f.path()).unwrap().is_empty());

        let f = file("200\n100\n");
        let err = read_peaks_csv(f.path()).unwrap_err().to_string();
        assert!(err.contains("non-increasing at row 2"), "{err}");

        let f = file("1\n-4\n");
        assert!(read_peaks_csv(f.path())
            .unwrap_err()
            .to_string()
            .contains("negative"));

        let f = file("1\n2.5\n");
        assert!(read_peaks_csv(f.path())
            .unwrap_err()
            .to_string()
            .contains("non-integer"));
    }
}
