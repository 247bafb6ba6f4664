//! Classic and mode-based standardization.
//!
//! The mode-based variant replaces the mean by the *revised mode* `phi`:
//! the empirical mode when its probability `p_hat` reaches the threshold
//! `eta`, the mean otherwise. The spread is then the second moment about
//! `phi`, `E[X^2] - 2*mean*phi + phi^2`, which equals the classic variance
//! plus `(mean - phi)^2`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Denominator used when standardizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScaleConvention {
    /// `sigma / sqrt(n)`, the literal form of the standardization formulas.
    #[default]
    StandardError,
    /// `sigma`, the conventional z-score.
    StandardDeviation,
}

impl ScaleConvention {
    pub fn key(self) -> &'static str {
        match self {
            ScaleConvention::StandardError => "se",
            ScaleConvention::StandardDeviation => "sd",
        }
    }
}

impl fmt::Display for ScaleConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ScaleConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "se" | "standard_error" => Ok(ScaleConvention::StandardError),
            "sd" | "standard_deviation" => Ok(ScaleConvention::StandardDeviation),
            other => Err(Error::invalid(format!(
                "scale_convention must be se or sd, got '{other}'"
            ))),
        }
    }
}

/// How values are grouped when estimating the mode.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BinWidth {
    /// Exact value equality.
    Exact,
    /// Half-open bins `[k*w, (k+1)*w)`.
    Fixed(f64),
    /// Freedman-Diaconis width, falling back to `range / sqrt(n)`.
    #[default]
    Auto,
}

impl fmt::Display for BinWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BinWidth::Exact => f.write_str("exact"),
            BinWidth::Fixed(w) => write!(f, "{w}"),
            BinWidth::Auto => f.write_str("auto"),
        }
    }
}

impl FromStr for BinWidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(BinWidth::Auto),
            "exact" | "none" => Ok(BinWidth::Exact),
            other => match other.parse::<f64>() {
                Ok(w) if w.is_finite() && w > 0.0 => Ok(BinWidth::Fixed(w)),
                _ => Err(Error::invalid(format!(
                    "bin_width must be a positive number, 'auto' or 'exact', got '{s}'"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeEstimate {
    /// The most frequent value, or the mean of the values in the winning bin.
    pub mode_value: f64,
    /// Share of the data at the mode, in `[0, 1]`.
    pub mode_prob: f64,
    /// Width actually used, `None` for exact matching.
    pub bin_width: Option<f64>,
}

fn check_data(data: &[f64]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::invalid("empty input"));
    }
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("value {i} is not finite")));
    }
    Ok(())
}

/// Population mean and variance (divisor `n`).
pub fn fit_classic(data: &[f64]) -> Result<(f64, f64)> {
    check_data(data)?;
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    Ok((mean, var))
}

/// Linear-interpolated quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Freedman-Diaconis bin width, `None` when all values are equal.
pub fn auto_bin_width(data: &[f64]) -> Option<f64> {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let fd = 2.0 * iqr * n.powf(-1.0 / 3.0);
    if fd > 0.0 {
        return Some(fd);
    }
    let range = sorted[sorted.len() - 1] - sorted[0];
    (range > 0.0).then(|| range / n.sqrt())
}

/// Empirical mode. Ties go to the smallest mode value.
pub fn estimate_mode(data: &[f64], bin_width: BinWidth) -> Result<ModeEstimate> {
    check_data(data)?;
    let width = match bin_width {
        BinWidth::Exact => None,
        BinWidth::Fixed(w) if w.is_finite() && w > 0.0 => Some(w),
        BinWidth::Fixed(w) => {
            return Err(Error::invalid(format!(
                "bin_width must be positive, got {w}"
            )))
        }
        BinWidth::Auto => auto_bin_width(data),
    };
    let n = data.len();
    let (mode_value, count) = match width {
        None => {
            let mut sorted = data.to_vec();
            sorted.sort_by(f64::total_cmp);
            let mut best = (sorted[0], 0usize);
            for run in sorted.chunk_by(|a, b| a == b) {
                if run.len() > best.1 {
                    best = (run[0], run.len());
                }
            }
            best
        }
        Some(w) => {
            let mut bins: BTreeMap<i64, (usize, f64)> = BTreeMap::new();
            for &x in data {
                let e = bins.entry((x / w).floor() as i64).or_insert((0, 0.0));
                e.0 += 1;
                e.1 += x;
            }
            let (count, sum) =
                bins.values().fold(
                    (0usize, 0.0),
                    |best, &(c, s)| if c > best.0 { (c, s) } else { best },
                );
            (sum / count as f64, count)
        }
    };
    Ok(ModeEstimate {
        mode_value,
        mode_prob: count as f64 / n as f64,
        bin_width: width,
    })
}

fn check_eta(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::invalid(format!("eta out of [0,1]: {eta}")))
    }
}

/// Picks the mode when it is frequent enough, otherwise the mean.
pub fn select_phi(mode: &ModeEstimate, mean: f64, eta: f64) -> f64 {
    if mode.mode_prob >= eta {
        mode.mode_value
    } else {
        mean
    }
}

/// Revised mode `phi` of `data` at threshold `eta`.
pub fn revised_mode(data: &[f64], eta: f64, bin_width: BinWidth) -> Result<f64> {
    check_eta(eta)?;
    let mode = estimate_mode(data, bin_width)?;
    let (mean, _) = fit_classic(data)?;
    Ok(select_phi(&mode, mean, eta))
}

const NEGATIVE_VARIANCE_TOLERANCE: f64 = 1e-9;

/// Second moment of `data` about `phi`: `E[X^2] - 2*mean*phi + phi^2`.
///
/// The moments are taken about a pivot at the sample mean; the expression
/// is unchanged by a common shift of the data and `phi`, and the pivot
/// keeps `E[X^2]` from swamping the result when the data sit far from zero.
pub fn fit_mode_variance(data: &[f64], phi: f64) -> Result<f64> {
    check_data(data)?;
    if !phi.is_finite() {
        return Err(Error::invalid(format!("phi is not finite: {phi}")));
    }
    let n = data.len() as f64;
    let pivot = data.iter().sum::<f64>() / n;
    let mean = data.iter().map(|x| x - pivot).sum::<f64>() / n;
    let second = data.iter().map(|x| (x - pivot) * (x - pivot)).sum::<f64>() / n;
    let phi = phi - pivot;
    let var = second - 2.0 * mean * phi + phi * phi;
    clamp_variance(var)
}

fn clamp_variance(var: f64) -> Result<f64> {
    if var >= 0.0 {
        Ok(var)
    } else if var >= -NEGATIVE_VARIANCE_TOLERANCE {
        Ok(0.0)
    } else {
        Err(Error::numeric(format!(
            "mode-based variance is negative ({var}); moments are inconsistent"
        )))
    }
}

/// Fitted parameters for both classic and mode-based standardization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardizationModel {
    pub n: usize,
    pub mean: f64,
    pub var_classic: f64,
    pub mode: ModeEstimate,
    pub phi: f64,
    pub var_mode: f64,
    pub eta: f64,
    pub scale_convention: ScaleConvention,
}

impl StandardizationModel {
    pub fn fit(
        data: &[f64],
        eta: f64,
        bin_width: BinWidth,
        scale_convention: ScaleConvention,
    ) -> Result<Self> {
        check_eta(eta)?;
        let (mean, var_classic) = fit_classic(data)?;
        let mode = estimate_mode(data, bin_width)?;
        let phi = select_phi(&mode, mean, eta);
        let var_mode = fit_mode_variance(data, phi)?;
        Ok(StandardizationModel {
            n: data.len(),
            mean,
            var_classic,
            mode,
            phi,
            var_mode,
            eta,
            scale_convention,
        })
    }

    fn scale(&self, var: f64) -> f64 {
        match self.scale_convention {
            ScaleConvention::StandardError => var.sqrt() / (self.n as f64).sqrt(),
            ScaleConvention::StandardDeviation => var.sqrt(),
        }
    }

    /// Denominator of the classic transform.
    pub fn classic_scale(&self) -> f64 {
        self.scale(self.var_classic)
    }

    /// Denominator of the mode-based transform.
    pub fn mode_scale(&self) -> f64 {
        self.scale(self.var_mode)
    }

    pub fn standardize_classic(&self, x: f64) -> Result<f64> {
        if !(self.var_classic > 0.0) {
            return Err(Error::numeric(
                "cannot standardize: classic variance is zero",
            ));
        }
        Ok((x - self.mean) / self.classic_scale())
    }

    pub fn standardize_mode(&self, x: f64) -> Result<f64> {
        if !(self.var_mode > 0.0) {
            return Err(Error::numeric(
                "cannot standardize: mode-based variance is zero",
            ));
        }
        Ok((x - self.phi) / self.mode_scale())
    }

    /// Inverse of [`standardize_mode`](Self::standardize_mode).
    pub fn invert_mode(&self, w: f64) -> f64 {
        w * self.mode_scale() + self.phi
    }

    /// Applies the mode-based transform to every value in place.
    pub fn apply_mode(&self, values: &mut [f64]) -> Result<()> {
        if !(self.var_mode > 0.0) {
            return Err(Error::numeric(
                "cannot standardize: mode-based variance is zero",
            ));
        }
        let scale = self.mode_scale();
        for v in values.iter_mut() {
            *v = (*v - self.phi) / scale;
        }
        Ok(())
    }

    /// `key=value` lines describing the fitted model.
    pub fn to_report(&self) -> String {
        let bin = self
            .mode
            .bin_width
            .map_or_else(|| "exact".to_string(), |w| w.to_string());
        format!(
            "n={}\nmean={}\nvar_classic={}\nmode_value={}\nmode_prob={}\nbin_width={}\neta={}\nphi={}\nvar_mode={}\nscale_convention={}\n",
            self.n,
            self.mean,
            self.var_classic,
            self.mode.mode_value,
            self.mode.mode_prob,
            bin,
            self.eta,
            self.phi,
            self.var_mode,
            self.scale_convention
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= TOL
    }

    #[test]
    fn classic_moments() {
        let (m, v) = fit_classic(&[1.0, 2.0, 3.0]).unwrap();
        assert!(close(m, 2.0) && close(v, 2.0 / 3.0));
        assert_eq!(fit_classic(&[4.5, 4.5, 4.5]).unwrap(), (4.5, 0.0));
        assert_eq!(fit_classic(&[0.0]).unwrap(), (0.0, 0.0));
        assert!(fit_classic(&[]).is_err());
        assert!(fit_classic(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn exact_mode() {
        let m = estimate_mode(&[2.0, 2.0, 2.0, 5.0], BinWidth::Exact).unwrap();
        assert_eq!((m.mode_value, m.mode_prob, m.bin_width), (2.0, 0.75, None));
        let m = estimate_mode(&[2.0, 1.0, 1.0, 3.0, 2.0], BinWidth::Exact).unwrap();
        assert_eq!((m.mode_value, m.mode_prob), (1.0, 0.4));
        let m = estimate_mode(&[7.0], BinWidth::Exact).unwrap();
        assert_eq!((m.mode_value, m.mode_prob), (7.0, 1.0));
        assert!(estimate_mode(&[], BinWidth::Exact).is_err());
    }

    #[test]
    fn binned_mode() {
        // bins of width 1: [0,1) holds 0.1, 0.2, 0.6; [3,4) holds 3.5
        let m = estimate_mode(&[0.1, 0.2, 0.6, 3.5], BinWidth::Fixed(1.0)).unwrap();
        assert!(close(m.mode_value, 0.3));
        assert_eq!(m.mode_prob, 0.75);
        // tie between [-1,0) and [2,3): smaller bin wins
        let m = estimate_mode(&[-0.5, -0.25, 2.5, 2.75], BinWidth::Fixed(1.0)).unwrap();
        assert!(close(m.mode_value, -0.375));
        assert!(estimate_mode(&[1.0], BinWidth::Fixed(0.0)).is_err());
    }

    #[test]
    fn auto_bin_width_rules() {
        let data: Vec<f64> = (1..=8).map(f64::from).collect();
        // IQR of 1..8 with linear quantiles is 6.25 - 2.75 = 3.5
        let fd = 2.0 * 3.5 * 8f64.powf(-1.0 / 3.0);
        assert!(close(auto_bin_width(&data).unwrap(), fd));
        // IQR zero falls back to range / sqrt(n)
        let d = [1.0, 1.0, 1.0, 1.0, 1.0, 9.0];
        assert!(close(auto_bin_width(&d).unwrap(), 8.0 / 6f64.sqrt()));
        assert_eq!(auto_bin_width(&[2.0, 2.0]), None);
        let m = estimate_mode(&[2.0, 2.0], BinWidth::Auto).unwrap();
        assert_eq!((m.mode_value, m.mode_prob, m.bin_width), (2.0, 1.0, None));
    }

    #[test]
    fn revised_mode_threshold() {
        assert_eq!(
            revised_mode(&[2.0, 2.0, 2.0, 5.0], 0.5, BinWidth::Exact).unwrap(),
            2.0
        );
        assert_eq!(
            revised_mode(&[1.0, 2.0, 3.0, 4.0], 0.5, BinWidth::Exact).unwrap(),
            2.5
        );
        assert_eq!(
            revised_mode(&[1.0, 2.0, 3.0, 4.0], 0.0, BinWidth::Exact).unwrap(),
            1.0
        );
        assert!(revised_mode(&[1.0], 1.5, BinWidth::Exact).is_err());
        assert!(revised_mode(&[1.0], -0.1, BinWidth::Exact).is_err());
    }

    #[test]
    fn mode_variance_values() {
        assert!(close(
            fit_mode_variance(&[2.0, 2.0, 2.0, 5.0], 2.0).unwrap(),
            2.25
        ));
        assert!(close(
            fit_mode_variance(&[1.0, 2.0, 3.0, 4.0], 2.5).unwrap(),
            1.25
        ));
        assert_eq!(fit_mode_variance(&[3.3; 5], 3.3).unwrap(), 0.0);
        assert!(fit_mode_variance(&[], 0.0).is_err());
    }

    #[test]
    fn mode_variance_matches_raw_moment_formula() {
        let data = [0.3, 1.7, 1.7, 2.2, 5.0, -1.25];
        let n = data.len() as f64;
        let ex2 = data.iter().map(|x| x * x).sum::<f64>() / n;
        let mean = data.iter().sum::<f64>() / n;
        for phi in [1.7, -3.0, 0.0, 10.5] {
            let raw = ex2 - 2.0 * mean * phi + phi * phi;
            assert!((fit_mode_variance(&data, phi).unwrap() - raw).abs() < 1e-12);
        }
    }

    #[test]
    fn clamping() {
        assert_eq!(clamp_variance(-1e-13).unwrap(), 0.0);
        assert_eq!(clamp_variance(-5e-10).unwrap(), 0.0);
        assert!(clamp_variance(-1e-6).is_err());
    }

    #[test]
    fn classic_standardization() {
        let se = StandardizationModel::fit(
            &[1.0, 2.0, 3.0],
            0.5,
            BinWidth::Exact,
            ScaleConvention::StandardError,
        )
        .unwrap();
        assert_eq!(se.standardize_classic(2.0).unwrap(), 0.0);
        let expected = 3f64.sqrt() / (2.0f64 / 3.0).sqrt();
        assert!(close(se.standardize_classic(3.0).unwrap(), expected));
        assert!((expected - 2.1213).abs() < 1e-4);

        let sd = StandardizationModel {
            scale_convention: ScaleConvention::StandardDeviation,
            ..se
        };
        assert_eq!(sd.standardize_classic(2.0).unwrap(), 0.0);
        let expected = 1.0 / (2.0f64 / 3.0).sqrt();
        assert!(close(sd.standardize_classic(3.0).unwrap(), expected));
        assert!((expected - 1.2247).abs() < 1e-4);

        let flat = StandardizationModel::fit(
            &[1.0, 1.0],
            0.5,
            BinWidth::Exact,
            ScaleConvention::StandardError,
        )
        .unwrap();
        assert!(flat.standardize_classic(1.0).is_err());
        assert!(flat.standardize_mode(1.0).is_err());
    }

    #[test]
    fn mode_standardization() {
        let m = StandardizationModel::fit(
            &[2.0, 2.0, 2.0, 5.0],
            0.5,
            BinWidth::Exact,
            ScaleConvention::StandardError,
        )
        .unwrap();
        assert_eq!(m.phi, 2.0);
        assert!(close(m.var_mode, 2.25));
        assert_eq!(m.standardize_mode(2.0).unwrap(), 0.0);
        assert!(close(m.standardize_mode(5.0).unwrap(), 4.0));
        assert!(close(m.invert_mode(m.standardize_mode(5.0).unwrap()), 5.0));

        let fallback = StandardizationModel::fit(
            &[1.0, 2.0, 3.0, 4.0],
            0.5,
            BinWidth::Exact,
            ScaleConvention::StandardError,
        )
        .unwrap();
        assert_eq!(fallback.phi, fallback.mean);
        for x in [-3.0, 0.0, 2.5, 7.0] {
            assert_eq!(
                fallback.standardize_mode(x).unwrap(),
                fallback.standardize_classic(x).unwrap()
            );
        }
    }

    #[test]
    fn parse_config_values() {
        assert_eq!(
            "se".parse::<ScaleConvention>().unwrap(),
            ScaleConvention::StandardError
        );
        assert_eq!(
            "SD".parse::<ScaleConvention>().unwrap(),
            ScaleConvention::StandardDeviation
        );
        assert!("z".parse::<ScaleConvention>().is_err());
        assert_eq!("auto".parse::<BinWidth>().unwrap(), BinWidth::Auto);
        assert_eq!("exact".parse::<BinWidth>().unwrap(), BinWidth::Exact);
        assert_eq!("0.25".parse::<BinWidth>().unwrap(), BinWidth::Fixed(0.25));
        assert!("-1".parse::<BinWidth>().is_err());
    }
}
