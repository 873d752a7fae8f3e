use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use qmiss_core::Generator;

/// Generator written as `name[:params]`: `normal[:mean,sd]`, `exp1`,
/// `exp:mean`, `chisq1`, `bernoulli:p`, `smoothed:p,eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistArg(pub Generator);

impl FromStr for DistArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if params.is_empty() {
            Vec::new()
        } else {
            params
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .with_context(|| format!("bad number '{p}' in '{s}'"))
                })
                .collect::<Result<_>>()?
        };
        let arity = |n: usize| {
            if nums.len() == n {
                Ok(())
            } else {
                Err(anyhow!("'{name}' takes {n} parameter(s), got {}", nums.len()))
            }
        };
        let g = match name.trim().to_ascii_lowercase().as_str() {
            "normal" if nums.is_empty() => Generator::Normal { mean: 0.0, sd: 1.0 },
            "normal" => {
                arity(2)?;
                Generator::Normal {
                    mean: nums[0],
                    sd: nums[1],
                }
            }
            "exp1" => {
                arity(0)?;
                Generator::Exponential { mean: 1.0 }
            }
            "exp" | "exponential" => {
                arity(1)?;
                Generator::Exponential { mean: nums[0] }
            }
            "chisq1" | "chi2" | "chi-square1" => {
                arity(0)?;
                Generator::ChiSquare1
            }
            "bernoulli" => {
                arity(1)?;
                Generator::Bernoulli { p: nums[0] }
            }
            "smoothed" | "smoothed-bernoulli" => {
                arity(2)?;
                Generator::SmoothedBernoulli {
                    p: nums[0],
                    eta: nums[1],
                }
            }
            other => bail!("unknown distribution '{other}' (normal, exp1, exp, chisq1, bernoulli, smoothed)"),
        };
        g.validate()?;
        Ok(DistArg(g))
    }
}

/// Inclusive grid `lo:hi:step`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridArg(pub Vec<f64>);

impl FromStr for GridArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad grid '{s}'")))
            .collect::<Result<_>>()?;
        let [lo, hi, step] = parts[..] else {
            bail!("grid must be lo:hi:step, got '{s}'");
        };
        if !(step > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) {
            bail!("grid needs step > 0 and hi >= lo, got '{s}'");
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        if n > 1_000_000 {
            bail!("grid '{s}' has more than a million points");
        }
        // Rounded to 12 decimals so printed grid points read cleanly.
        Ok(GridArg(
            (0..=n)
                .map(|i| ((lo + step * i as f64) * 1e12).round() / 1e12)
                .collect(),
        ))
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number '{p}' in '{s}'"))
        })
        .collect()
}

#[derive(Debug, Args)]
pub struct ArdClosedArgs {
    /// Formula id: lambda0, lambda0-transformed, lambda-a, squared-mean, hl,
    /// hl-squared-mean, hl-numeric, binomial, bayes-averaged.
    #[arg(long)]
    pub formula: String,
    /// Distribution supplying (xi, sigma, gamma); see `ard-mc --help` for the syntax.
    #[arg(long, default_value = "normal")]
    pub dist: DistArg,
    /// Override the mean xi.
    #[arg(long)]
    pub xi: Option<f64>,
    /// Override the standard deviation sigma.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Override the skewness gamma.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Shrinkage target d.
    #[arg(long, default_value_t = 0.0)]
    pub d: f64,
    /// Evaluate at a single c (or d for squared-mean curves) instead of a grid.
    #[arg(long)]
    pub c: Option<f64>,
    /// Grid lo:hi:step for the tuning constant [default: 0:2:0.05, or -2:2:0.05 for d].
    #[arg(long)]
    pub c_grid: Option<GridArg>,
    /// Window constant a for lambda-a.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Success probability for the binomial formula.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Transformation for lambda0-transformed: identity, sqrt, log, square.
    #[arg(long, default_value = "identity")]
    pub transform: String,
    /// Custom -h''/h' at the mean, overriding --transform.
    #[arg(long)]
    pub h_ratio: Option<f64>,
    /// Prior mean for bayes-averaged.
    #[arg(long, default_value_t = 0.0)]
    pub theta0: f64,
    /// Prior variance for bayes-averaged.
    #[arg(long, default_value_t = 1.0)]
    pub tau2: f64,
}

#[derive(Debug, Args)]
pub struct ArdMcArgs {
    /// Named experiment: exp-mean, normal-variance, normal-sd, normal-sd-log,
    /// squared-mean-known, squared-mean-unknown, binomial-smoothed, bayes-normal.
    #[arg(long)]
    pub preset: Option<String>,
    /// JSON file holding a full experiment plan; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Distribution: normal[:mean,sd], exp1, exp:mean, chisq1, bernoulli:p, smoothed:p,eta.
    #[arg(long)]
    pub dist: Option<DistArg>,
    /// Shrinkage weight of the first estimator.
    #[arg(long)]
    pub c1: Option<f64>,
    /// Shrinkage target of the first estimator.
    #[arg(long)]
    pub d1: Option<f64>,
    /// Shrinkage weight of the second estimator.
    #[arg(long)]
    pub c2: Option<f64>,
    /// Shrinkage target of the second estimator.
    #[arg(long)]
    pub d2: Option<f64>,
    /// Strictly decreasing epsilon grid, comma separated [default: 0.1,0.05,0.02].
    #[arg(long)]
    pub eps: Option<String>,
    /// Replications per epsilon [default: 2000].
    #[arg(long)]
    pub reps: Option<usize>,
    /// Master seed [default: 20240601].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fixed window constant a instead of the shrinking cutoff a = eps.
    #[arg(long)]
    pub fixed_a: Option<f64>,
    /// Closed-form target for E(Q_1 - Q_2); derived from the formulas when omitted.
    #[arg(long)]
    pub target: Option<f64>,
    /// Experiment id used in the seed lineage and file names.
    #[arg(long)]
    pub id: Option<String>,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory [default: $QMISS_RESULTS_DIR, else ./results].
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QlawArgs {
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    /// Simulated horizon [default: 40 sigma^2].
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Grid step [default: sigma^2 / 400].
    #[arg(long)]
    pub step: Option<f64>,
    /// Master seed [default: 20240601].
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory [default: $QMISS_RESULTS_DIR, else ./results].
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ZooArgs {
    /// Sample size N.
    #[arg(long = "N", short = 'N')]
    pub n: u64,
}

#[derive(Debug, Args)]
pub struct SecondOrderArgs {
    /// Shrinkage weight c > 0 of the first estimator (the second is the plain mean).
    #[arg(long, allow_hyphen_values = true)]
    pub c: f64,
    /// Mean of the normal observations.
    #[arg(long, default_value_t = 1.0)]
    pub xi: f64,
    /// Standard deviation of the normal observations.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Other distribution instead of normal(xi, sigma).
    #[arg(long)]
    pub dist: Option<DistArg>,
    #[arg(long, default_value_t = 0.02)]
    pub eps: f64,
    #[arg(long, default_value_t = 5000)]
    pub reps: usize,
    /// Fixed window constant a instead of the shrinking cutoff a = eps.
    #[arg(long)]
    pub fixed_a: Option<f64>,
    /// Draws from the reference pair sampler.
    #[arg(long, default_value_t = 100_000)]
    pub ref_draws: usize,
    /// Master seed [default: 20240601].
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory [default: $QMISS_RESULTS_DIR, else ./results].
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_distributions() {
        assert_eq!(
            "exp1".parse::<DistArg>().unwrap().0,
            Generator::Exponential { mean: 1.0 }
        );
        assert_eq!(
            "normal:1,2".parse::<DistArg>().unwrap().0,
            Generator::Normal { mean: 1.0, sd: 2.0 }
        );
        assert_eq!(
            "smoothed:0.5,0.01".parse::<DistArg>().unwrap().0,
            Generator::SmoothedBernoulli { p: 0.5, eta: 0.01 }
        );
        assert!("bernoulli:1.5".parse::<DistArg>().is_err());
        assert!("cauchy".parse::<DistArg>().is_err());
        assert!("exp:1,2".parse::<DistArg>().is_err());
    }

    #[test]
    fn parses_grids() {
        let g: GridArg = "0:1:0.05".parse().unwrap();
        assert_eq!(g.0.len(), 21);
        assert_eq!(g.0[0], 0.0);
        assert_eq!(g.0[20], 1.0);
        assert_eq!(g.0[3], 0.15);
        assert_eq!("2:2:1".parse::<GridArg>().unwrap().0, vec![2.0]);
        assert!("1:0:0.1".parse::<GridArg>().is_err());
        assert!("0:1".parse::<GridArg>().is_err());
        assert_eq!(parse_list("0.1, 0.05").unwrap(), vec![0.1, 0.05]);
    }
}
