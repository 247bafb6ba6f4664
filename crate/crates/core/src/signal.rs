//! Domain types shared by every stage: raw signals, anchor peaks, and the
//! rectangular frame sets that make up a compact dataset.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A uniformly sampled single-lead waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sampling_rate_hz: f64,
    record_id: String,
}

impl Signal {
    pub fn new(
        samples: Vec<f64>,
        sampling_rate_hz: f64,
        record_id: impl Into<String>,
    ) -> Result<Self> {
        check_sampling_rate(sampling_rate_hz)?;
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("sample {i} is not finite")));
        }
        Ok(Signal {
            samples,
            sampling_rate_hz,
            record_id: record_id.into(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sampling_rate_hz(&self) -> f64 {
        self.sampling_rate_hz
    }

    pub fn record_id(&self) -> &str {
        &self.record_id
    }

    /// Converts a duration in seconds to a sample count, rounding ties to even.
    pub fn seconds_to_samples(&self, seconds: f64) -> f64 {
        (seconds * self.sampling_rate_hz).round_ties_even()
    }
}

pub(crate) fn check_sampling_rate(fs: f64) -> Result<()> {
    if fs.is_finite() && fs > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "sampling rate must be positive, got {fs}"
        )))
    }
}

/// Strictly increasing 0-based sample indices of anchor events.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PeakList {
    indices: Vec<usize>,
    source_record_id: String,
}

impl PeakList {
    pub fn new(indices: Vec<usize>, source_record_id: impl Into<String>) -> Result<Self> {
        if let Some(w) = indices.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!(
                "peak indices non-increasing at position {}",
                w + 1
            )));
        }
        Ok(PeakList {
            indices,
            source_record_id: source_record_id.into(),
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn source_record_id(&self) -> &str {
        &self.source_record_id
    }

    /// Checks that every index lies inside `sig`.
    pub fn validate_for(&self, sig: &Signal) -> Result<()> {
        match self.indices.last() {
            Some(&last) if last >= sig.len() => Err(Error::invalid(format!(
                "peak index {last} out of range for signal '{}' of {} samples",
                sig.record_id(),
                sig.len()
            ))),
            _ => Ok(()),
        }
    }
}

/// Which slicing strategy produced a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    TimeSlice,
    Rrif,
    Fixed,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::TimeSlice => "TIME_SLICE",
            Method::Rrif => "RRIF",
            Method::Fixed => "FIXED",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "TIME_SLICE" => Ok(Method::TimeSlice),
            "RRIF" => Ok(Method::Rrif),
            "FIXED" => Ok(Method::Fixed),
            other => Err(Error::invalid(format!("unknown method tag '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub record_id: String,
    pub anchor_index: usize,
    pub method: Method,
}

/// The compact dataset: `frame_count` rows of exactly `frame_length` values.
///
/// Values are stored row-major in one buffer, so rectangularity holds by
/// construction. An empty label string is the same as no label.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSet {
    frame_length: usize,
    values: Vec<f64>,
    provenance: Vec<Provenance>,
    labels: Option<Vec<String>>,
}

impl FrameSet {
    pub fn new(frame_length: usize) -> Result<Self> {
        if frame_length == 0 {
            return Err(Error::invalid("frame_length must be positive"));
        }
        Ok(FrameSet {
            frame_length,
            values: Vec::new(),
            provenance: Vec::new(),
            labels: None,
        })
    }

    pub(crate) fn with_capacity(frame_length: usize, frames: usize) -> Self {
        debug_assert!(frame_length > 0);
        FrameSet {
            frame_length,
            values: Vec::with_capacity(frame_length * frames),
            provenance: Vec::with_capacity(frames),
            labels: None,
        }
    }

    /// Appends one frame. Fails if its length differs from `frame_length`.
    pub fn push(&mut self, frame: &[f64], provenance: Provenance) -> Result<()> {
        if frame.len() != self.frame_length {
            return Err(Error::invalid(format!(
                "frame has {} values, expected {}",
                frame.len(),
                self.frame_length
            )));
        }
        self.values.extend_from_slice(frame);
        self.provenance.push(provenance);
        if let Some(labels) = &mut self.labels {
            labels.push(String::new());
        }
        Ok(())
    }

    pub(crate) fn push_with(&mut self, provenance: Provenance, fill: impl FnOnce(&mut Vec<f64>)) {
        let before = self.values.len();
        fill(&mut self.values);
        assert_eq!(
            self.values.len() - before,
            self.frame_length,
            "frame length mismatch"
        );
        self.provenance.push(provenance);
        if let Some(labels) = &mut self.labels {
            labels.push(String::new());
        }
    }

    /// Attaches per-frame labels. All-empty label sets are stored as absent.
    pub fn set_labels(&mut self, labels: Option<Vec<String>>) -> Result<()> {
        match labels {
            Some(l) if l.len() != self.frame_count() => Err(Error::invalid(format!(
                "{} labels for {} frames",
                l.len(),
                self.frame_count()
            ))),
            Some(l) if l.iter().all(String::is_empty) => {
                self.labels = None;
                Ok(())
            }
            other => {
                self.labels = other;
                Ok(())
            }
        }
    }

    /// Appends all frames of `other`, which must have the same frame length.
    pub fn extend(&mut self, other: FrameSet) -> Result<()> {
        if other.frame_length != self.frame_length {
            return Err(Error::invalid(format!(
                "cannot merge frames of length {} into a set of length {}",
                other.frame_length, self.frame_length
            )));
        }
        let n_self = self.frame_count();
        let n_other = other.frame_count();
        let labels = match (self.labels.take(), other.labels) {
            (None, None) => None,
            (a, b) => {
                let mut l = a.unwrap_or_else(|| vec![String::new(); n_self]);
                l.extend(b.unwrap_or_else(|| vec![String::new(); n_other]));
                Some(l)
            }
        };
        self.values.extend(other.values);
        self.provenance.extend(other.provenance);
        self.labels = labels;
        Ok(())
    }

    pub fn frame_length(&self) -> usize {
        self.frame_length
    }

    pub fn frame_count(&self) -> usize {
        self.provenance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.provenance.is_empty()
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        &self.values[i * self.frame_length..(i + 1) * self.frame_length]
    }

    pub fn frames(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.frame_length)
    }

    /// All frame values, row-major.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> &str {
        self.labels.as_ref().map_or("", |l| l[i].as_str())
    }
}

/// Inputs to the overall-performance score: accepted samples, total
/// samples and the confusion-matrix accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionSummary {
    accuracy: f64,
    accepted_count: u64,
    total_count: u64,
}

impl ConfusionSummary {
    pub fn new(accuracy: f64, accepted_count: u64, total_count: u64) -> Result<Self> {
        if total_count == 0 {
            return Err(Error::invalid("total_count must be positive"));
        }
        if accepted_count > total_count {
            return Err(Error::invalid(format!(
                "accepted_count {accepted_count} exceeds total_count {total_count}"
            )));
        }
        if !(0.0..=1.0).contains(&accuracy) {
            return Err(Error::invalid(format!("accuracy {accuracy} out of [0,1]")));
        }
        Ok(ConfusionSummary {
            accuracy,
            accepted_count,
            total_count,
        })
    }

    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    pub fn accepted_count(&self) -> u64 {
        self.accepted_count
    }

    pub fn total_count(&self) -> u64 {
        self.total_count
    }
}

/// Accuracy of a square confusion matrix given row-major: trace / total.
pub fn confusion_accuracy(matrix: &[u64], classes: usize) -> Result<f64> {
    if classes == 0 || matrix.len() != classes * classes {
        return Err(Error::invalid(format!(
            "confusion matrix has {} cells, expected {}x{}",
            matrix.len(),
            classes,
            classes
        )));
    }
    let total: u64 = matrix.iter().sum();
    if total == 0 {
        return Err(Error::invalid("confusion matrix is empty"));
    }
    let correct: u64 = (0..classes).map(|k| matrix[k * classes + k]).sum();
    Ok(correct as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signal_rejects_bad_rate_and_non_finite() {
        assert!(Signal::new(vec![1.0], 0.0, "r").is_err());
        assert!(Signal::new(vec![1.0], -5.0, "r").is_err());
        assert!(Signal::new(vec![1.0, f64::NAN], 100.0, "r").is_err());
        assert!(Signal::new(vec![f64::INFINITY], 100.0, "r").is_err());
        assert!(Signal::new(vec![1.0, 2.0], 100.0, "r").is_ok());
    }

    #[test]
    fn peak_list_must_increase() {
        assert!(PeakList::new(vec![1, 1], "r").is_err());
        assert!(PeakList::new(vec![2, 1], "r").is_err());
        assert!(PeakList::new(vec![], "r").unwrap().is_empty());
        let sig = Signal::new(vec![0.0; 5], 1.0, "r").unwrap();
        assert!(PeakList::new(vec![4], "r")
            .unwrap()
            .validate_for(&sig)
            .is_ok());
        assert!(PeakList::new(vec![5], "r")
            .unwrap()
            .validate_for(&sig)
            .is_err());
    }

    #[test]
    fn frame_set_stays_rectangular() {
        let mut fs = FrameSet::new(3).unwrap();
        let prov = Provenance {
            record_id: "a".into(),
            anchor_index: 0,
            method: Method::Fixed,
        };
        fs.push(&[1.0, 2.0, 3.0], prov.clone()).unwrap();
        assert!(fs.push(&[1.0, 2.0], prov.clone()).is_err());
        assert_eq!(fs.frame_count(), 1);
        assert_eq!(fs.frame(0), &[1.0, 2.0, 3.0]);
        assert!(fs.set_labels(Some(vec!["x".into(), "y".into()])).is_err());
        fs.set_labels(Some(vec![String::new()])).unwrap();
        assert!(fs.labels().is_none());
        fs.set_labels(Some(vec!["x".into()])).unwrap();
        fs.push(&[4.0, 5.0, 6.0], prov).unwrap();
        assert_eq!(fs.labels().unwrap(), &["x".to_string(), String::new()]);
    }

    #[test]
    fn confusion_summary_bounds() {
        assert!(ConfusionSummary::new(0.5, 3, 0).is_err());
        assert!(ConfusionSummary::new(0.5, 4, 3).is_err());
        assert!(ConfusionSummary::new(1.5, 1, 3).is_err());
        assert!(ConfusionSummary::new(1.0, 3, 3).is_ok());
    }

    #[test]
    fn accuracy_from_matrix() {
        assert_eq!(confusion_accuracy(&[8, 2, 1, 9], 2).unwrap(), 17.0 / 20.0);
        assert!(confusion_accuracy(&[1, 2, 3], 2).is_err());
        assert!(confusion_accuracy(&[0, 0, 0, 0], 2).is_err());
    }

    #[test]
    fn method_tags_parse_back() {
        for m in [Method::TimeSlice, Method::Rrif, Method::Fixed] {
            assert_eq!(m.tag().parse::<Method>().unwrap(), m);
        }
        assert!("SLICE".parse::<Method>().is_err());
    }
}
