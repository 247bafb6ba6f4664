//! Dataset quality metrics: mean absolute error rate, share of samples
//! within the control range, and overall performance.

use crate::error::{Error, Result};
use crate::signal::ConfusionSummary;
use crate::standardize::fit_classic;

pub const DEFAULT_EPSILON: f64 = 1e-9;
pub const DEFAULT_K_SIGMA: f64 = 3.0;

/// Mean of `|Y_n - mu_n| / (mu_n + epsilon)`.
pub fn maer(observed: &[f64], references: &[f64], epsilon: f64) -> Result<f64> {
    if observed.len() != references.len() {
        return Err(Error::invalid(format!(
            "observed has {} values but references has {}",
            observed.len(),
            references.len()
        )));
    }
    if observed.is_empty() {
        return Err(Error::invalid("empty input"));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let mut total = 0.0;
    for (i, (&y, &mu)) in observed.iter().zip(references).enumerate() {
        let denom = mu + epsilon;
        if denom == 0.0 {
            return Err(Error::numeric(format!(
                "reference {i} plus epsilon is zero"
            )));
        }
        total += (y - mu).abs() / denom;
    }
    Ok(total / observed.len() as f64)
}

/// Upper control limit `mean + k_sigma * sigma` (population sigma).
pub fn ucl(data: &[f64], k_sigma: f64) -> Result<f64> {
    if !(k_sigma > 0.0) || !k_sigma.is_finite() {
        return Err(Error::invalid(format!(
            "k_sigma must be positive, got {k_sigma}"
        )));
    }
    let (mean, var) = fit_classic(data)?;
    Ok(mean + k_sigma * var.sqrt())
}

/// Number of values in the closed range `[0, ucl_value]`.
pub fn count_within(data: &[f64], ucl_value: f64) -> usize {
    data.iter().filter(|&&x| 0.0 <= x && x <= ucl_value).count()
}

/// Fraction of values in `[0, ucl_value]`.
pub fn apr(data: &[f64], ucl_value: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::invalid("empty input"));
    }
    Ok(count_within(data, ucl_value) as f64 / data.len() as f64)
}

/// Accepted fraction times confusion-matrix accuracy.
pub fn overall_performance(cs: &ConfusionSummary) -> f64 {
    (cs.accepted_count() as f64 / cs.total_count() as f64) * cs.accuracy()
}

/// Everything the metrics stage reports. Absent values print as `NA`.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub maer: Option<f64>,
    pub apr: Option<f64>,
    pub op: Option<f64>,
    pub ucl: Option<f64>,
    pub epsilon: f64,
    pub k_sigma: f64,
    pub within_ucl: usize,
    pub total: usize,
    pub notes: Vec<String>,
}

pub const REPORT_KEYS: [&str; 7] = ["maer", "apr", "op", "ucl", "epsilon", "within_ucl", "total"];

#[derive(Debug, Clone, Default)]
pub struct MetricsInput<'a> {
    pub references: Option<&'a [f64]>,
    pub confusion: Option<ConfusionSummary>,
}

impl QualityReport {
    /// Scores a pooled set of sample values.
    ///
    /// `references` may match `data` one-to-one or hold a single template
    /// of `period` values repeated across the data.
    pub fn compute(
        data: &[f64],
        period: usize,
        epsilon: f64,
        k_sigma: f64,
        input: MetricsInput<'_>,
    ) -> Result<Self> {
        let mut notes = Vec::new();
        let (ucl_value, apr_value, within) = if data.is_empty() {
            notes.push("empty dataset".to_string());
            (None, None, 0)
        } else {
            let u = ucl(data, k_sigma)?;
            let within = count_within(data, u);
            (Some(u), Some(within as f64 / data.len() as f64), within)
        };

        let maer_value = match input.references {
            None => None,
            Some(_) if data.is_empty() => None,
            Some(refs) => {
                if refs.iter().any(|&r| r < 0.0) {
                    notes.push("warning: negative reference values; relative error is not meaningful there".into());
                }
                let expanded: Vec<f64>;
                let refs = if refs.len() == data.len() {
                    refs
                } else if period > 0 && refs.len() == period && data.len().is_multiple_of(period) {
                    expanded = refs.iter().copied().cycle().take(data.len()).collect();
                    &expanded
                } else {
                    return Err(Error::invalid(format!(
                        "{} reference values match neither the {} data values nor the frame length {}",
                        refs.len(),
                        data.len(),
                        period
                    )));
                };
                Some(maer(data, refs, epsilon)?)
            }
        };

        Ok(QualityReport {
            maer: maer_value,
            apr: apr_value,
            op: input.confusion.as_ref().map(overall_performance),
            ucl: ucl_value,
            epsilon,
            k_sigma,
            within_ucl: within,
            total: data.len(),
            notes,
        })
    }

    fn values(&self) -> [String; 7] {
        let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
        [
            opt(self.maer),
            opt(self.apr),
            opt(self.op),
            opt(self.ucl),
            self.epsilon.to_string(),
            self.within_ucl.to_string(),
            self.total.to_string(),
        ]
    }

    /// `key=value` lines, LF terminated.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for (k, v) in REPORT_KEYS.iter().zip(self.values()) {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        }
        out.push_str(&format!("k_sigma={}\n", self.k_sigma));
        for note in &self.notes {
            out.push_str("note=");
            out.push_str(note);
            out.push('\n');
        }
        out
    }

    /// Header line plus one data row.
    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", REPORT_KEYS.join(","), self.values().join(","))
    }
}
