//! Replication harness: coupled miss-count differences over an epsilon grid,
//! the occupation-time law, and second-order diagnostics.
//!
//! Per-stream seeds are `stream_seed(master_seed, fnv1a(experiment_id), index)`
//! with `index = (grid_index << 32) | replication`. Replications run on a
//! local rayon pool and are reduced in index order, so results do not
//! depend on the number of threads.

mod persist;

pub use persist::{load_results, persist_results, read_csv, read_json, write_csv, write_json, CsvRow, CSV_HEADER};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::brownian::{simulate_q, AbSampler, PathConfig};
use crate::dist::Generator;
use crate::edgeworth::tail_bound;
use crate::error::{invalid, Error, Result};
use crate::qsim::{Cutoff, EstimatorFamily, MissCounter, QConfig, DEFAULT_MAX_WINDOW};
use crate::seed::{fnv1a, stream_seed};
use crate::stats::{quantile_sorted, sorted, summarize, SampleSummary, Z95};

/// Default cap on `n_reps * n_max` per grid point.
pub const DEFAULT_STEP_BUDGET: u64 = 200_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedLineage {
    pub master_seed: u64,
    pub experiment_id: String,
}

impl SeedLineage {
    pub fn new(master_seed: u64, experiment_id: impl Into<String>) -> Self {
        Self {
            master_seed,
            experiment_id: experiment_id.into(),
        }
    }

    pub fn stream(&self, grid_index: u32, replication: u32) -> u64 {
        let index = (u64::from(grid_index) << 32) | u64::from(replication);
        stream_seed(self.master_seed, fnv1a(&self.experiment_id), index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_reps: usize,
    pub ci95: (f64, f64),
    pub truncation_bound_total: f64,
    pub seed_lineage: SeedLineage,
}

impl McEstimate {
    pub fn from_samples(samples: &[f64], truncation_bound_total: f64, seed_lineage: SeedLineage) -> Result<Self> {
        let s = summarize(samples)?;
        Ok(Self {
            mean: s.mean,
            std_error: s.std_error,
            n_reps: s.n,
            ci95: s.mean_ci95(),
            truncation_bound_total,
            seed_lineage,
        })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci95.0 <= x && x <= self.ci95.1
    }

    pub fn half_width(&self) -> f64 {
        Z95 * self.std_error
    }
}

/// Run `f(replication)` for `0..n` in parallel, returning results in
/// replication order.
pub fn replicate<T, F>(n: usize, threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u32) -> Result<T> + Sync + Send,
{
    if n > u32::MAX as usize {
        return Err(invalid(format!("too many replications: {n}")));
    }
    let run = || (0..n as u32).into_par_iter().map(&f).collect::<Result<Vec<T>>>();
    match threads {
        None => run(),
        Some(0) => Err(invalid("thread count must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| invalid(format!("thread pool: {e}")))?
            .install(run),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub experiment_id: String,
    pub generator: Generator,
    pub f1: EstimatorFamily,
    pub f2: EstimatorFamily,
    /// Strictly decreasing.
    pub epsilon_grid: Vec<f64>,
    pub cutoff: Cutoff,
    pub n_reps: usize,
    pub master_seed: u64,
    /// Closed-form limit of `E(Q_1 - Q_2)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form_target: Option<f64>,
    /// Not part of the result: any value gives the same output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default = "default_max_window")]
    pub max_window: u64,
    #[serde(default = "default_step_budget")]
    pub step_budget: u64,
}

fn default_max_window() -> u64 {
    DEFAULT_MAX_WINDOW
}

fn default_step_budget() -> u64 {
    DEFAULT_STEP_BUDGET
}

impl ExperimentPlan {
    pub fn new(
        experiment_id: impl Into<String>,
        generator: Generator,
        f1: EstimatorFamily,
        f2: EstimatorFamily,
        epsilon_grid: Vec<f64>,
        n_reps: usize,
        master_seed: u64,
    ) -> Self {
        Self {
            experiment_id: experiment_id.into(),
            generator,
            f1,
            f2,
            epsilon_grid,
            cutoff: Cutoff::Shrinking,
            n_reps,
            master_seed,
            closed_form_target: None,
            threads: None,
            max_window: DEFAULT_MAX_WINDOW,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        self.f1.check_comparable(&self.f2)?;
        if self.epsilon_grid.is_empty() {
            return Err(invalid("epsilon grid is empty"));
        }
        if self.epsilon_grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(invalid("epsilon values must be positive"));
        }
        if self.epsilon_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("epsilon grid must be strictly decreasing"));
        }
        if self.n_reps < 2 {
            return Err(invalid(format!("n_reps must be at least 2, got {}", self.n_reps)));
        }
        Ok(())
    }

    pub fn lineage(&self) -> SeedLineage {
        SeedLineage::new(self.master_seed, self.experiment_id.clone())
    }

    pub fn config(&self, epsilon: f64) -> QConfig {
        QConfig {
            max_window: self.max_window,
            ..QConfig::new(epsilon, self.cutoff)
        }
    }

    fn counter(&self, epsilon: f64) -> Result<MissCounter> {
        let counter = MissCounter::new(&[self.f1, self.f2], &self.generator, &self.config(epsilon))?;
        let steps = (self.n_reps as u64).saturating_mul(counter.window().n_max);
        if steps > self.step_budget {
            return Err(Error::WindowTooLarge {
                n_max: steps,
                limit: self.step_budget,
            });
        }
        Ok(counter)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonEstimate {
    pub epsilon: f64,
    pub n_min: u64,
    pub n_max: u64,
    pub estimate: McEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    NoTarget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    pub target: Option<f64>,
    /// Weighted linear fit in `eps`, evaluated at `eps = 0`.
    pub extrapolated: f64,
    pub extrapolated_se: f64,
    pub smallest_ci_contains_target: Option<bool>,
    /// Distance to the target never grows by more than the joint 95% CI
    /// half-width between consecutive grid points.
    pub monotone_trend: Option<bool>,
    pub verdict: Verdict,
}

impl ConvergenceSummary {
    pub fn from_estimates(estimates: &[EpsilonEstimate], target: Option<f64>) -> Self {
        let (extrapolated, extrapolated_se) = linear_extrapolation(estimates);
        let (contains, trend) = match target {
            None => (None, None),
            Some(t) => {
                let last = &estimates.last().expect("non-empty grid").estimate;
                let trend = estimates.windows(2).all(|w| {
                    let (a, b) = (&w[0].estimate, &w[1].estimate);
                    let slack = Z95 * a.std_error.hypot(b.std_error);
                    (b.mean - t).abs() <= (a.mean - t).abs() + slack
                });
                (Some(last.contains(t)), Some(trend))
            }
        };
        let verdict = match (contains, trend) {
            (Some(true), Some(true)) => Verdict::Pass,
            (Some(_), _) => Verdict::Fail,
            _ => Verdict::NoTarget,
        };
        Self {
            target,
            extrapolated,
            extrapolated_se,
            smallest_ci_contains_target: contains,
            monotone_trend: trend,
            verdict,
        }
    }
}

/// Intercept of `mean = alpha + beta * eps`, weights `1/se^2` (equal weights
/// if any standard error is zero), with its propagated standard error.
fn linear_extrapolation(estimates: &[EpsilonEstimate]) -> (f64, f64) {
    let all_positive = estimates.iter().all(|e| e.estimate.std_error > 0.0);
    let w: Vec<f64> = estimates
        .iter()
        .map(|e| {
            if all_positive {
                e.estimate.std_error.powi(-2)
            } else {
                1.0
            }
        })
        .collect();
    let x: Vec<f64> = estimates.iter().map(|e| e.epsilon).collect();
    let s: f64 = w.iter().sum();
    let sx: f64 = w.iter().zip(&x).map(|(w, x)| w * x).sum();
    let sxx: f64 = w.iter().zip(&x).map(|(w, x)| w * x * x).sum();
    let det = s * sxx - sx * sx;
    let coef: Vec<f64> = if estimates.len() < 2 || det <= 1e-12 * s * sxx {
        w.iter().map(|w| w / s).collect()
    } else {
        w.iter().zip(&x).map(|(w, x)| w * (sxx - sx * x) / det).collect()
    };
    let alpha = coef.iter().zip(estimates).map(|(a, e)| a * e.estimate.mean).sum();
    let var: f64 = coef
        .iter()
        .zip(estimates)
        .map(|(a, e)| (a * e.estimate.std_error).powi(2))
        .sum();
    (alpha, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArdExperiment {
    pub plan: ExperimentPlan,
    pub estimates: Vec<EpsilonEstimate>,
    pub summary: ConvergenceSummary,
}

/// CRN-coupled `E(Q_1 - Q_2)` for every epsilon in the plan.
pub fn run_ard_experiment(plan: &ExperimentPlan) -> Result<ArdExperiment> {
    plan.validate()?;
    let counters = plan
        .epsilon_grid
        .iter()
        .map(|&e| plan.counter(e))
        .collect::<Result<Vec<_>>>()?;
    let lineage = plan.lineage();
    let mut estimates = Vec::with_capacity(counters.len());
    for (k, (&epsilon, counter)) in plan.epsilon_grid.iter().zip(&counters).enumerate() {
        let diffs = replicate(plan.n_reps, plan.threads, |r| {
            let q = counter.count_seeded(&plan.generator, lineage.stream(k as u32, r))?;
            Ok((q[0] as i64 - q[1] as i64) as f64)
        })?;
        let w = counter.window();
        estimates.push(EpsilonEstimate {
            epsilon,
            n_min: w.n_min,
            n_max: w.n_max,
            estimate: McEstimate::from_samples(&diffs, 2.0 * w.tail_bound, lineage.clone())?,
        });
    }
    let summary = ConvergenceSummary::from_estimates(&estimates, plan.closed_form_target);
    Ok(ArdExperiment {
        plan: plan.clone(),
        estimates,
        summary,
    })
}

/// `Q_1 - Q_2` with the two counts taken on independent streams, at grid
/// point `grid_index`. The comparison point for the coupled estimate.
pub fn run_independent_difference(plan: &ExperimentPlan, grid_index: usize) -> Result<McEstimate> {
    plan.validate()?;
    let epsilon = *plan
        .epsilon_grid
        .get(grid_index)
        .ok_or_else(|| invalid(format!("grid index {grid_index} out of range")))?;
    let counter = plan.counter(epsilon)?;
    let lineage = plan.lineage();
    let other = SeedLineage::new(plan.master_seed, format!("{}/independent", plan.experiment_id));
    let k = grid_index as u32;
    let diffs = replicate(plan.n_reps, plan.threads, |r| {
        let q1 = counter.count_seeded(&plan.generator, lineage.stream(k, r))?[0];
        let q2 = counter.count_seeded(&plan.generator, other.stream(k, r))?[1];
        Ok((q1 as i64 - q2 as i64) as f64)
    })?;
    McEstimate::from_samples(&diffs, 2.0 * counter.window().tail_bound, lineage)
}

/// Mean of `eps^2 Q_eps` for one family.
pub fn run_scaled_q(
    family: &EstimatorFamily,
    generator: &Generator,
    config: &QConfig,
    n_reps: usize,
    lineage: &SeedLineage,
    threads: Option<usize>,
) -> Result<McEstimate> {
    let counter = MissCounter::new(std::slice::from_ref(family), generator, config)?;
    let e2 = config.epsilon * config.epsilon;
    let xs = replicate(n_reps, threads, |r| {
        Ok(e2 * counter.count_seeded(generator, lineage.stream(0, r))?[0] as f64)
    })?;
    McEstimate::from_samples(&xs, e2 * counter.window().tail_bound, lineage.clone())
}

/// Mean occupation time over `paths` simulated paths. Path `i` uses
/// `stream_seed(config.seed, fnv1a("qlaw"), i)`; `config.seed` acts as the master seed.
pub fn run_qlaw_experiment(paths: usize, config: &PathConfig, threads: Option<usize>) -> Result<McEstimate> {
    config.validate()?;
    if paths == 0 {
        return Err(Error::EmptySample("occupation-time experiment with zero paths"));
    }
    let lineage = SeedLineage::new(config.seed, "qlaw");
    let qs = replicate(paths, threads, |r| {
        let seed = lineage.stream(0, r);
        Ok(simulate_q(&PathConfig { seed, ..*config })?.q)
    })?;
    if paths == 1 {
        return Ok(McEstimate {
            mean: qs[0],
            std_error: f64::NAN,
            n_reps: 1,
            ci95: (f64::NAN, f64::NAN),
            truncation_bound_total: tail_bound(config.horizon, config.sigma, 1.0),
            seed_lineage: lineage,
        });
    }
    McEstimate::from_samples(&qs, tail_bound(config.horizon, config.sigma, 1.0), lineage)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderPlan {
    pub experiment_id: String,
    pub generator: Generator,
    /// Shrinkage weight of the first family; the second is the plain mean.
    pub c: f64,
    pub epsilon: f64,
    pub cutoff: Cutoff,
    pub n_reps: usize,
    pub master_seed: u64,
    /// Draws from the reference pair sampler for the QQ comparison.
    pub reference_draws: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QqPoint {
    pub p: f64,
    pub empirical: f64,
    pub reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderReport {
    pub plan: SecondOrderPlan,
    pub summary: SampleSummary,
    /// `Var(A - B) = (8/3) (c xi)^2` for the reference pair.
    pub reference_variance: f64,
    pub point_mass_at_zero: f64,
    pub qq: Vec<QqPoint>,
    pub seed_lineage: SeedLineage,
}

/// Samples of `eps (Q_eps(c) - Q_eps(0))` with diagnostics against the
/// reference pair `A - B`.
pub fn run_secondorder(plan: &SecondOrderPlan) -> Result<SecondOrderReport> {
    if !(plan.c > 0.0 && plan.c.is_finite()) {
        return Err(invalid(format!("c must be positive, got {}", plan.c)));
    }
    if plan.n_reps < 2 || plan.reference_draws < 2 {
        return Err(invalid("need at least two replications and two reference draws"));
    }
    let xi = plan.generator.spec()?.xi;
    let config = QConfig::new(plan.epsilon, plan.cutoff);
    let f1 = EstimatorFamily::shrink(plan.c, 0.0);
    let f0 = EstimatorFamily::shrink(0.0, 0.0);
    let counter = MissCounter::new(&[f1, f0], &plan.generator, &config)?;
    let lineage = SeedLineage::new(plan.master_seed, plan.experiment_id.clone());
    let xs = replicate(plan.n_reps, plan.threads, |r| {
        let q = counter.count_seeded(&plan.generator, lineage.stream(0, r))?;
        Ok(plan.epsilon * (q[0] as i64 - q[1] as i64) as f64)
    })?;
    let summary = summarize(&xs)?;
    let point_mass_at_zero = xs.iter().filter(|x| **x == 0.0).count() as f64 / xs.len() as f64;

    let mut ab = AbSampler::new(plan.c, xi, lineage.stream(1, 0))?;
    let reference: Vec<f64> = (0..plan.reference_draws)
        .map(|_| {
            let (a, b) = ab.draw();
            a - b
        })
        .collect();
    let (emp, refs) = (sorted(&xs), sorted(&reference));
    let qq = (1..100)
        .map(|i| {
            let p = i as f64 / 100.0;
            QqPoint {
                p,
                empirical: quantile_sorted(&emp, p),
                reference: quantile_sorted(&refs, p),
            }
        })
        .collect();
    Ok(SecondOrderReport {
        plan: plan.clone(),
        summary,
        reference_variance: 8.0 / 3.0 * (plan.c * xi).powi(2),
        point_mass_at_zero,
        qq,
        seed_lineage: lineage,
    })
}
