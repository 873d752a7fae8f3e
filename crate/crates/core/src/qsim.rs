//! Streaming computation of the number of epsilon-misses `Q_eps` of an
//! estimator sequence, and of coupled differences on a shared stream.
//!
//! All families are evaluated from one [`RunningState`] per stream, so any
//! number of estimator sequences can be judged on identical data in a single
//! pass with O(1) state per step.

use serde::{Deserialize, Serialize};

use crate::dist::Generator;
use crate::edgeworth::tail_bound;
use crate::error::{invalid, Error, Result};
use crate::running::RunningState;

/// Default cap on the number of prefix steps in one counting window.
pub const DEFAULT_MAX_WINDOW: u64 = 50_000_000;

/// The window end sits at `A_MAX_FACTOR * sigma_limit^2 / eps^2`.
pub const A_MAX_FACTOR: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceScale {
    /// `|est / sigma^2 - 1| >= eps`
    Variance,
    /// `|sqrt(est) / sigma - 1| >= eps`
    Sd,
    /// `|log est - log sigma^2| >= eps`
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMode {
    /// The generator's true variance.
    Known,
    /// The unbiased prefix variance.
    Unbiased,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformTag {
    Identity,
    Sqrt,
    Log,
    Square,
}

impl TransformTag {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            TransformTag::Identity => x,
            TransformTag::Sqrt => x.sqrt(),
            TransformTag::Log => x.ln(),
            TransformTag::Square => x * x,
        }
    }

    /// `h'(x)`.
    pub fn slope(self, x: f64) -> f64 {
        match self {
            TransformTag::Identity => 1.0,
            TransformTag::Sqrt => 0.5 / x.sqrt(),
            TransformTag::Log => 1.0 / x,
            TransformTag::Square => 2.0 * x,
        }
    }

    /// `-h''(x) / h'(x)`.
    pub fn ratio(self, x: f64) -> f64 {
        match self {
            TransformTag::Identity => 0.0,
            TransformTag::Sqrt => 0.5 / x,
            TransformTag::Log => 1.0 / x,
            TransformTag::Square => -1.0 / x,
        }
    }
}

/// A parameterized estimator sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum EstimatorFamily {
    /// `(n * mean_n + c * d) / (n + c)`, target the mean.
    ShrinkMean { c: f64, d: f64 },
    /// `SS_N / (N - 1 + c)` (or its square root / log), target the variance.
    VarianceDenom { c: f64, scale: VarianceScale },
    /// `mean_n^2 - d * s^2 / n`, target the squared mean.
    SquaredMean { d: f64, variance_mode: VarianceMode },
    /// `h` applied to the shrinkage mean, target `h(mean)`.
    Transformed { c: f64, d: f64, h: TransformTag },
}

impl EstimatorFamily {
    pub fn shrink(c: f64, d: f64) -> Self {
        EstimatorFamily::ShrinkMean { c, d }
    }

    /// Families with equal keys measure misses against the same target on
    /// the same scale.
    fn comparison_key(&self) -> &'static str {
        match self {
            EstimatorFamily::ShrinkMean { .. }
            | EstimatorFamily::Transformed {
                h: TransformTag::Identity,
                ..
            } => "mean/absolute",
            EstimatorFamily::Transformed {
                h: TransformTag::Sqrt, ..
            } => "mean/sqrt",
            EstimatorFamily::Transformed {
                h: TransformTag::Log, ..
            } => "mean/log",
            EstimatorFamily::Transformed {
                h: TransformTag::Square,
                ..
            } => "mean/square",
            EstimatorFamily::VarianceDenom {
                scale: VarianceScale::Variance,
                ..
            } => "variance/relative",
            EstimatorFamily::VarianceDenom {
                scale: VarianceScale::Sd,
                ..
            } => "sd/relative",
            EstimatorFamily::VarianceDenom {
                scale: VarianceScale::Log,
                ..
            } => "variance/log",
            EstimatorFamily::SquaredMean { .. } => "squared_mean/absolute",
        }
    }

    pub fn check_comparable(&self, other: &EstimatorFamily) -> Result<()> {
        let (a, b) = (self.comparison_key(), other.comparison_key());
        if a == b {
            Ok(())
        } else {
            Err(Error::Mismatch(format!("{a} vs {b}")))
        }
    }

    /// Smallest admissible window start for this family.
    fn min_index(&self) -> u64 {
        match self {
            EstimatorFamily::VarianceDenom { .. } => 2,
            EstimatorFamily::SquaredMean {
                variance_mode: VarianceMode::Unbiased,
                ..
            } => 2,
            _ => 1,
        }
    }

    /// Standard deviation of the normal limit of `sqrt(n)(est - target)` on
    /// the family's miss scale.
    pub fn sigma_limit(&self, g: &Generator) -> Result<f64> {
        let spec = g.spec()?;
        Ok(match *self {
            EstimatorFamily::ShrinkMean { .. } => spec.sigma,
            EstimatorFamily::Transformed { h, .. } => h.slope(spec.xi) * spec.sigma,
            EstimatorFamily::VarianceDenom { scale, .. } => {
                let s = (g.kurtosis()? - 1.0).sqrt();
                match scale {
                    VarianceScale::Variance | VarianceScale::Log => s,
                    VarianceScale::Sd => 0.5 * s,
                }
            }
            EstimatorFamily::SquaredMean { .. } => {
                if spec.xi == 0.0 {
                    spec.sigma
                } else {
                    2.0 * spec.xi.abs() * spec.sigma
                }
            }
        })
    }

    /// Deterministic part of the miss criterion: beyond index `n`, a miss
    /// implies a deviation of the underlying average of at least
    /// `eps - offset / n` on the family's miss scale.
    pub fn bias_offset(&self, g: &Generator, epsilon: f64) -> Result<f64> {
        let spec = g.spec()?;
        Ok(match *self {
            EstimatorFamily::ShrinkMean { c, d } => c.abs() * (epsilon + (spec.xi - d).abs()),
            EstimatorFamily::Transformed { c, d, h } => c.abs() * (epsilon + h.slope(spec.xi) * (spec.xi - d).abs()),
            EstimatorFamily::VarianceDenom { c, .. } => c.abs() * (1.0 + epsilon) + 1.0,
            EstimatorFamily::SquaredMean { d, .. } => (2.0 * d.abs() + 1.0) * spec.sigma * spec.sigma,
        })
    }

    fn judge(&self, g: &Generator) -> Result<Judge> {
        let spec = g.spec()?;
        Ok(match *self {
            EstimatorFamily::ShrinkMean { c, d } => Judge::Shrink {
                c,
                cd: c * d,
                target: spec.xi,
            },
            EstimatorFamily::Transformed { c, d, h } => {
                let slope = h.slope(spec.xi);
                if !(slope > 0.0 && slope.is_finite()) {
                    return Err(invalid(format!(
                        "transform {h:?} is not strictly increasing at the mean {}",
                        spec.xi
                    )));
                }
                Judge::Transformed {
                    c,
                    cd: c * d,
                    h,
                    target: h.apply(spec.xi),
                }
            }
            EstimatorFamily::VarianceDenom { c, scale } => {
                let var = spec.sigma * spec.sigma;
                Judge::Variance {
                    c,
                    scale,
                    var,
                    sd: spec.sigma,
                    ln_var: var.ln(),
                }
            }
            EstimatorFamily::SquaredMean { d, variance_mode } => Judge::Squared {
                d,
                known_var: match variance_mode {
                    VarianceMode::Known => Some(spec.sigma * spec.sigma),
                    VarianceMode::Unbiased => None,
                },
                target: spec.xi * spec.xi,
            },
        })
    }

    /// Largest `c` violation: the denominator must stay positive over the window.
    fn check_window(&self, n_min: u64) -> Result<()> {
        if n_min < self.min_index() {
            return Err(invalid(format!(
                "{self:?} needs the window to start at n >= {}, got {n_min}",
                self.min_index()
            )));
        }
        let n = n_min as f64;
        let denom = match *self {
            EstimatorFamily::ShrinkMean { c, .. } | EstimatorFamily::Transformed { c, .. } => n + c,
            EstimatorFamily::VarianceDenom { c, .. } => n - 1.0 + c,
            EstimatorFamily::SquaredMean { .. } => 1.0,
        };
        if denom > 0.0 {
            Ok(())
        } else {
            Err(invalid(format!(
                "{self:?} has a non-positive denominator at n = {n_min}"
            )))
        }
    }
}

/// Resolved miss criterion with precomputed constants.
#[derive(Debug, Clone, Copy)]
enum Judge {
    Shrink {
        c: f64,
        cd: f64,
        target: f64,
    },
    Transformed {
        c: f64,
        cd: f64,
        h: TransformTag,
        target: f64,
    },
    Variance {
        c: f64,
        scale: VarianceScale,
        var: f64,
        sd: f64,
        ln_var: f64,
    },
    Squared {
        d: f64,
        known_var: Option<f64>,
        target: f64,
    },
}

impl Judge {
    /// True when the estimate at the current prefix misses by at least `eps`.
    /// Undefined estimates (log of a non-positive value, ...) count as misses.
    #[inline]
    fn miss(&self, st: &RunningState, eps: f64) -> bool {
        let n = st.count() as f64;
        let gap = match *self {
            Judge::Shrink { c, cd, target } => (n * st.mean() + cd) / (n + c) - target,
            Judge::Transformed { c, cd, h, target } => h.apply((n * st.mean() + cd) / (n + c)) - target,
            Judge::Variance {
                c,
                scale,
                var,
                sd,
                ln_var,
            } => {
                let est = st.sum_sq() / (n - 1.0 + c);
                match scale {
                    VarianceScale::Variance => est / var - 1.0,
                    VarianceScale::Sd => est.sqrt() / sd - 1.0,
                    VarianceScale::Log => est.ln() - ln_var,
                }
            }
            Judge::Squared { d, known_var, target } => {
                let s2 = known_var.unwrap_or_else(|| st.unbiased_variance());
                st.mean() * st.mean() - d * s2 / n - target
            }
        };
        !(gap.abs() < eps)
    }
}

/// Lower window boundary `a(eps) / eps^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Cutoff {
    /// A fixed `a > 0`.
    Fixed { a: f64 },
    /// `a(eps) = eps`, so the window starts at `1 / eps`.
    Shrinking,
}

impl Cutoff {
    pub fn a(&self, epsilon: f64) -> f64 {
        match *self {
            Cutoff::Fixed { a } => a,
            Cutoff::Shrinking => epsilon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QConfig {
    pub epsilon: f64,
    pub cutoff: Cutoff,
    /// Explicit window start, overriding `a(eps) / eps^2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_min: Option<u64>,
    /// Explicit window end, overriding `A_MAX_FACTOR * sigma_limit^2 / eps^2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
    #[serde(default = "default_max_window")]
    pub max_window: u64,
}

fn default_max_window() -> u64 {
    DEFAULT_MAX_WINDOW
}

/// `ceil(x)` that ignores representation noise just above an integer.
fn ceil_index(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

impl QConfig {
    pub fn new(epsilon: f64, cutoff: Cutoff) -> Self {
        Self {
            epsilon,
            cutoff,
            n_min: None,
            n_max: None,
            max_window: DEFAULT_MAX_WINDOW,
        }
    }

    pub fn shrinking(epsilon: f64) -> Self {
        Self::new(epsilon, Cutoff::Shrinking)
    }

    pub fn fixed(epsilon: f64, a: f64) -> Self {
        Self::new(epsilon, Cutoff::Fixed { a })
    }

    pub fn with_window(mut self, n_min: Option<u64>, n_max: Option<u64>) -> Self {
        self.n_min = n_min;
        self.n_max = n_max;
        self
    }

    /// Resolve the counting window for an unbiased estimator whose limit
    /// standard deviation is `sigma_limit`.
    pub fn window(&self, sigma_limit: f64) -> Result<QWindow> {
        self.window_with_offset(sigma_limit, 0.0)
    }

    /// Window for an estimator with deterministic offset `offset` (see
    /// [`EstimatorFamily::bias_offset`]). The default end is pushed out until
    /// `kappa = offset / (eps n_max) <= 1/2`, and the tail bound uses the
    /// inflated sd `sigma_limit / (1 - kappa)`; with an explicit end and
    /// `kappa >= 1` the bound is infinite.
    pub fn window_with_offset(&self, sigma_limit: f64, offset: f64) -> Result<QWindow> {
        let eps = self.epsilon;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(invalid(format!("epsilon must be positive, got {eps}")));
        }
        if !(sigma_limit > 0.0 && sigma_limit.is_finite()) {
            return Err(invalid(format!("limit sd must be positive, got {sigma_limit}")));
        }
        if !(offset >= 0.0 && offset.is_finite()) {
            return Err(invalid(format!(
                "bias offset must be finite and non-negative, got {offset}"
            )));
        }
        let a = self.cutoff.a(eps);
        if !(a > 0.0 && a.is_finite()) {
            return Err(invalid(format!("cutoff a must be positive, got {a}")));
        }
        let n_min = self.n_min.unwrap_or_else(|| ceil_index(a / (eps * eps))).max(1);
        let (n_max, a_max) = match self.n_max {
            Some(n) => (n, n as f64 * eps * eps),
            None => {
                let a_max = A_MAX_FACTOR * sigma_limit * sigma_limit;
                let n = (a_max / (eps * eps)).ceil().max((2.0 * offset / eps).ceil());
                let a_max = a_max.max(n * eps * eps);
                if n > u64::MAX as f64 / 2.0 {
                    return Err(Error::WindowTooLarge {
                        n_max: u64::MAX,
                        limit: self.max_window,
                    });
                }
                (n as u64, a_max)
            }
        };
        if n_max < n_min {
            return Err(invalid(format!("window end {n_max} precedes start {n_min}")));
        }
        if n_max > self.max_window {
            return Err(Error::WindowTooLarge {
                n_max,
                limit: self.max_window,
            });
        }
        Ok(QWindow {
            n_min,
            n_max,
            a_max,
            sigma_limit,
            tail_bound: {
                let kappa = offset / (eps * n_max as f64);
                if kappa < 1.0 {
                    tail_bound(a_max, sigma_limit / (1.0 - kappa), eps)
                } else {
                    f64::INFINITY
                }
            },
        })
    }
}

/// Resolved counting window `n_min ..= n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QWindow {
    pub n_min: u64,
    pub n_max: u64,
    pub a_max: f64,
    pub sigma_limit: f64,
    /// Bound on the expected number of misses of one sequence after `n_max`.
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QCount {
    pub q: u64,
    pub truncated_tail_bound: f64,
    pub n_min: u64,
    pub n_max: u64,
}

/// Several estimator sequences judged on one stream.
#[derive(Debug, Clone)]
pub struct MissCounter {
    judges: Vec<Judge>,
    epsilon: f64,
    window: QWindow,
}

impl MissCounter {
    /// All families must be comparable (same target and scale).
    pub fn new(families: &[EstimatorFamily], g: &Generator, config: &QConfig) -> Result<Self> {
        let first = families
            .first()
            .ok_or_else(|| invalid("at least one estimator family is required"))?;
        let mut sigma_limit: f64 = 0.0;
        let mut offset: f64 = 0.0;
        for f in families {
            first.check_comparable(f)?;
            sigma_limit = sigma_limit.max(f.sigma_limit(g)?);
            offset = offset.max(f.bias_offset(g, config.epsilon)?);
        }
        let window = config.window_with_offset(sigma_limit, offset)?;
        let mut judges = Vec::with_capacity(families.len());
        for f in families {
            f.check_window(window.n_min)?;
            judges.push(f.judge(g)?);
        }
        Ok(Self {
            judges,
            epsilon: config.epsilon,
            window,
        })
    }

    pub fn window(&self) -> &QWindow {
        &self.window
    }

    /// Miss counts over `n_min ..= n_max` for each family, consuming the
    /// stream from its first element.
    pub fn count_stream<I: IntoIterator<Item = f64>>(&self, stream: I) -> Result<Vec<u64>> {
        let mut counts = vec![0u64; self.judges.len()];
        let mut st = RunningState::new();
        let mut it = stream.into_iter();
        let eps = self.epsilon;
        for n in 1..=self.window.n_max {
            let x = it
                .next()
                .ok_or_else(|| invalid(format!("stream ended at n = {n} before the window end")))?;
            st.push(x);
            if n >= self.window.n_min {
                for (k, j) in self.judges.iter().enumerate() {
                    counts[k] += u64::from(j.miss(&st, eps));
                }
            }
        }
        Ok(counts)
    }

    /// Same as [`count_stream`](Self::count_stream) on the generator's seeded stream.
    pub fn count_seeded(&self, g: &Generator, seed: u64) -> Result<Vec<u64>> {
        self.count_stream(g.sampler(seed)?)
    }
}

/// Exact count of epsilon-misses over the window on the stream `(g, seed)`.
pub fn count_q(family: &EstimatorFamily, g: &Generator, config: &QConfig, seed: u64) -> Result<QCount> {
    let counter = MissCounter::new(std::slice::from_ref(family), g, config)?;
    let q = counter.count_seeded(g, seed)?[0];
    let w = counter.window();
    Ok(QCount {
        q,
        truncated_tail_bound: w.tail_bound,
        n_min: w.n_min,
        n_max: w.n_max,
    })
}

/// `Q_eps(f1) - Q_eps(f2)` on one shared stream.
pub fn coupled_diff(
    f1: &EstimatorFamily,
    f2: &EstimatorFamily,
    g: &Generator,
    config: &QConfig,
    seed: u64,
) -> Result<i64> {
    let counter = MissCounter::new(&[*f1, *f2], g, config)?;
    let q = counter.count_seeded(g, seed)?;
    Ok(q[0] as i64 - q[1] as i64)
}

/// `eps * (Q_eps(f1) - Q_eps(f2))`. Its limit law is exponential-type under
/// the shrinking cutoff and has an atom at zero under a fixed one.
pub fn scaled_diff_sample(
    f1: &EstimatorFamily,
    f2: &EstimatorFamily,
    g: &Generator,
    config: &QConfig,
    seed: u64,
) -> Result<f64> {
    Ok(config.epsilon * coupled_diff(f1, f2, g, config, seed)? as f64)
}
