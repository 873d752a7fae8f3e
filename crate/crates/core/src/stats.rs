//! Small-sample summaries used by the harness and the test oracles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// `sd / sqrt(n)`.
    pub std_error: f64,
    /// Large-sample standard error of the sample variance,
    /// `sqrt((m4 - s^4 (n-3)/(n-1)) / n)`.
    pub variance_se: f64,
}

impl SampleSummary {
    pub fn mean_ci95(&self) -> (f64, f64) {
        (self.mean - Z95 * self.std_error, self.mean + Z95 * self.std_error)
    }

    pub fn variance_ci95(&self) -> (f64, f64) {
        (
            self.variance - Z95 * self.variance_se,
            self.variance + Z95 * self.variance_se,
        )
    }
}

/// Moments accumulated in input order, so equal inputs give bitwise-equal output.
pub fn summarize(xs: &[f64]) -> Result<SampleSummary> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::EmptySample("at least two observations are needed"));
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &x in xs {
        let d2 = (x - mean) * (x - mean);
        m2 += d2;
        m4 += d2 * d2;
    }
    let variance = m2 / (nf - 1.0);
    let m4 = m4 / nf;
    let var_of_var = (m4 - variance * variance * (nf - 3.0) / (nf - 1.0)) / nf;
    Ok(SampleSummary {
        n,
        mean,
        variance,
        std_error: (variance / nf).sqrt(),
        variance_se: var_of_var.max(0.0).sqrt(),
    })
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len()) as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `xs` and the
/// exponential CDF with the given mean.
pub fn ks_distance_exponential(xs: &[f64], mean: f64) -> f64 {
    let s = sorted(xs);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-x / mean).exp();
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            (f - lo).abs().max((hi - f).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_small_sample() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!((s.std_error - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert!(summarize(&[1.0]).is_err());
        let z = summarize(&[0.0; 10]).unwrap();
        assert_eq!((z.mean, z.std_error, z.mean_ci95()), (0.0, 0.0, (0.0, 0.0)));
    }

    #[test]
    fn quantiles_and_correlation() {
        let s = sorted(&[3.0, 1.0, 2.0, 4.0, 5.0]);
        assert_eq!(quantile_sorted(&s, 0.5), 3.0);
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0), 5.0);
        assert_eq!(quantile_sorted(&s, 0.125), 1.5);
        let a = [1.0, 2.0, 3.0];
        assert!((correlation(&a, &[2.0, 4.0, 6.0]) - 1.0).abs() < 1e-15);
        assert!((correlation(&a, &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| -((1.0 - (i as f64 + 0.5) / n as f64).ln())).collect();
        assert!(ks_distance_exponential(&xs, 1.0) <= 0.5 / n as f64 + 1e-12);
        assert!(ks_distance_exponential(&xs, 2.0) > 0.1);
    }
}
