//! One-term Edgeworth approximation to the CDF of standardized means, the
//! semi-analytic expected miss count built from it, and the truncation tail
//! bound for the counting window.
//!
//! Only the `1/sqrt(n)` skewness correction is carried; the omitted `1/n`
//! term leaves an `O(1/n)` bias per probability.

use serde::{Deserialize, Serialize};

use crate::dist::MomentSpec;
use crate::error::{invalid, Result};
use crate::qsim::{EstimatorFamily, QConfig};
use crate::special::{norm_cdf, norm_pdf, norm_sf};

/// Inflation of the limit standard deviation inside [`tail_bound`], covering
/// the skewness correction to the Gaussian tail over the truncated range.
pub const TAIL_SAFETY: f64 = 1.1;

/// `G_n(t) ~ Phi(t) - gamma / (6 sqrt(n)) (t^2 - 1) phi(t)` for
/// `T_n = sqrt(n) (mean_n - xi) / sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeworthCdf {
    pub n: u64,
    pub gamma: f64,
}

impl EdgeworthCdf {
    pub fn new(n: u64, gamma: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("Edgeworth expansion needs n >= 1"));
        }
        Ok(Self { n, gamma })
    }

    #[inline]
    fn correction(&self, t: f64) -> f64 {
        self.gamma / (6.0 * (self.n as f64).sqrt()) * (t * t - 1.0) * norm_pdf(t)
    }

    /// Unclamped expansion.
    pub fn raw_cdf(&self, t: f64) -> f64 {
        norm_cdf(t) - self.correction(t)
    }

    /// Unclamped upper tail `1 - G_n(t)`, evaluated without cancellation.
    pub fn raw_sf(&self, t: f64) -> f64 {
        norm_sf(t) + self.correction(t)
    }

    pub fn cdf(&self, t: f64) -> f64 {
        self.raw_cdf(t).clamp(0.0, 1.0)
    }

    pub fn sf(&self, t: f64) -> f64 {
        self.raw_sf(t).clamp(0.0, 1.0)
    }
}

/// Clamped one-term Edgeworth CDF.
pub fn edgeworth_cdf(t: f64, n: u64, gamma: f64) -> Result<f64> {
    Ok(EdgeworthCdf::new(n, gamma)?.cdf(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiAnalyticEq {
    /// Approximate `E Q_eps` over the window.
    pub value: f64,
    pub n_min: u64,
    pub n_max: u64,
    /// Number of probability evaluations that fell outside [0, 1].
    pub clamped: u64,
    pub evaluations: u64,
}

impl SemiAnalyticEq {
    pub fn clamp_rate(&self) -> f64 {
        self.clamped as f64 / self.evaluations.max(1) as f64
    }
}

/// `sum_n Pr{T_n <= l_n} + Pr{T_n >= r_n}` with the Edgeworth CDF, where
/// `l_n, r_n` are the exact miss thresholds of the shrinkage mean on the
/// `T_n` scale.
pub fn semi_analytic_eq(family: &EstimatorFamily, spec: &MomentSpec, config: &QConfig) -> Result<SemiAnalyticEq> {
    let (c, d) = match *family {
        EstimatorFamily::ShrinkMean { c, d } => (c, d),
        other => {
            return Err(invalid(format!(
                "semi-analytic miss counts need a shrinkage-mean family, got {other:?}"
            )))
        }
    };
    let offset = c.abs() * (config.epsilon + (spec.xi - d).abs());
    let w = config.window_with_offset(spec.sigma, offset)?;
    if w.n_min as f64 + c <= 0.0 {
        return Err(invalid(format!("n + c must stay positive, c = {c}")));
    }
    let eps = config.epsilon;
    let (sigma, xi) = (spec.sigma, spec.xi);
    let mut value = 0.0;
    let mut clamped = 0;
    for n in w.n_min..=w.n_max {
        let nf = n as f64;
        let rn = nf.sqrt();
        let g = EdgeworthCdf { n, gamma: spec.gamma };
        // Misses: mean_n <= ((xi - eps)(n + c) - c d) / n or >= ((xi + eps)(n + c) - c d) / n.
        let shift = c * (xi - d) / (sigma * rn);
        let half = eps * rn / sigma + c * eps / (sigma * rn);
        let (l, r) = (shift - half, shift + half);
        let (pl, pr) = (g.raw_cdf(l), g.raw_sf(r));
        for p in [pl, pr] {
            if !(0.0..=1.0).contains(&p) {
                clamped += 1;
            }
        }
        value += pl.clamp(0.0, 1.0) + pr.clamp(0.0, 1.0);
    }
    Ok(SemiAnalyticEq {
        value,
        n_min: w.n_min,
        n_max: w.n_max,
        clamped,
        evaluations: 2 * (w.n_max - w.n_min + 1),
    })
}

/// Upper bound on the expected number of misses after the window end
/// `a_max / eps^2`:
///
/// ```text
/// (1/eps^2) * int_{a_max}^inf 2 Phibar(sqrt(s) / s_eff) ds
///   = (2 s_eff^2 / eps^2) * [(1 - x^2) Phibar(x) + x phi(x)],  x = sqrt(a_max) / s_eff
/// ```
///
/// with `s_eff = TAIL_SAFETY * sigma`. The summed tail probabilities are
/// decreasing in `n`, so the integral from `a_max` dominates the sum.
pub fn tail_bound(a_max: f64, sigma: f64, epsilon: f64) -> f64 {
    let s_eff = TAIL_SAFETY * sigma;
    let x = a_max.sqrt() / s_eff;
    let inner = ((1.0 - x * x) * norm_sf(x) + x * norm_pdf(x)).max(0.0);
    2.0 * s_eff * s_eff * inner / (epsilon * epsilon)
}
