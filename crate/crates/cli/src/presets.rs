use anyhow::{bail, Result};
use qmiss_core::ard::{
    binomial_risk, lambda0, lambda0_curve, lambda0_transformed, lambda0_transformed_curve, squared_mean_curve,
    TransformSpec,
};
use qmiss_core::mc::ExperimentPlan;
use qmiss_core::qsim::{EstimatorFamily, TransformTag, VarianceMode, VarianceScale};
use qmiss_core::Generator;

use crate::DEFAULT_SEED;

pub const PRESETS: [&str; 8] = [
    "exp-mean",
    "normal-variance",
    "normal-sd",
    "normal-sd-log",
    "squared-mean-known",
    "squared-mean-unknown",
    "binomial-smoothed",
    "bayes-normal",
];

pub fn preset(name: &str) -> Result<ExperimentPlan> {
    let shrink = EstimatorFamily::shrink;
    let var = |c, scale| EstimatorFamily::VarianceDenom { c, scale };
    let sq = |d, variance_mode| EstimatorFamily::SquaredMean { d, variance_mode };
    let std_normal = Generator::Normal { mean: 0.0, sd: 1.0 };
    let shifted_normal = Generator::Normal { mean: 1.0, sd: 1.0 };
    let coarse = vec![0.1, 0.05, 0.02];
    let (g, f1, f2, grid, reps) = match name {
        "exp-mean" => (
            Generator::Exponential { mean: 1.0 },
            shrink(1.0 / 3.0, 0.0),
            shrink(0.0, 0.0),
            coarse,
            2000,
        ),
        "normal-variance" => (
            std_normal,
            var(2.0 / 3.0, VarianceScale::Variance),
            var(0.0, VarianceScale::Variance),
            coarse,
            500,
        ),
        "normal-sd" => (
            std_normal,
            var(1.0 / 6.0, VarianceScale::Sd),
            var(0.0, VarianceScale::Sd),
            coarse,
            500,
        ),
        "normal-sd-log" => (
            std_normal,
            var(-1.0 / 3.0, VarianceScale::Log),
            var(0.0, VarianceScale::Log),
            coarse,
            500,
        ),
        "squared-mean-known" => (
            shifted_normal,
            sq(-1.0, VarianceMode::Known),
            sq(0.0, VarianceMode::Known),
            vec![0.1, 0.05],
            2000,
        ),
        "squared-mean-unknown" => (
            shifted_normal,
            sq(-1.0, VarianceMode::Unbiased),
            sq(0.0, VarianceMode::Unbiased),
            vec![0.1, 0.05],
            2000,
        ),
        "binomial-smoothed" => (
            Generator::SmoothedBernoulli { p: 0.5, eta: 0.01 },
            shrink(4.0 / 3.0, 0.5),
            shrink(0.0, 0.0),
            vec![0.1, 0.05],
            2000,
        ),
        // Prior N(0, 1) on the mean: the Bayes shrinkage (c, d) = (1/tau^2, theta0)
        // evaluated at theta one prior sd away from theta0.
        "bayes-normal" => (shifted_normal, shrink(1.0, 0.0), shrink(0.0, 0.0), coarse, 2000),
        other => bail!("unknown preset '{other}' (one of {})", PRESETS.join(", ")),
    };
    let mut plan = ExperimentPlan::new(name, g, f1, f2, grid, reps, DEFAULT_SEED);
    plan.closed_form_target = pair_target(&g, &f1, &f2)?;
    Ok(plan)
}

/// Closed-form limit of `E(Q_1 - Q_2)` when both families have one.
pub fn pair_target(g: &Generator, f1: &EstimatorFamily, f2: &EstimatorFamily) -> Result<Option<f64>> {
    let (a, b) = (single_target(g, f1)?, single_target(g, f2)?);
    Ok(match (a, b) {
        (Some(a), Some(b)) if f1.check_comparable(f2).is_ok() => Some(a - b),
        _ => None,
    })
}

fn single_target(g: &Generator, f: &EstimatorFamily) -> Result<Option<f64>> {
    let spec = g.spec()?;
    Ok(match (*f, *g) {
        (EstimatorFamily::ShrinkMean { c, d }, Generator::Bernoulli { p } | Generator::SmoothedBernoulli { p, .. }) => {
            Some(binomial_risk(c, d, p)?.value)
        }
        (EstimatorFamily::ShrinkMean { c, d }, _) => Some(lambda0(c, d, &spec)?.value),
        (EstimatorFamily::Transformed { c, d, h }, _) => {
            Some(lambda0_transformed(c, d, &spec, &TransformSpec::from_tag(h, spec.xi)?)?.value)
        }
        // Variance families reduce to chi-square means only for normal data.
        (EstimatorFamily::VarianceDenom { c, scale }, Generator::Normal { .. }) => {
            let chi = Generator::ChiSquare1.spec()?;
            let curve = match scale {
                VarianceScale::Variance => lambda0_curve(0.0, &chi)?,
                VarianceScale::Sd => {
                    lambda0_transformed_curve(0.0, &chi, &TransformSpec::from_tag(TransformTag::Sqrt, chi.xi)?)?
                }
                VarianceScale::Log => {
                    lambda0_transformed_curve(0.0, &chi, &TransformSpec::from_tag(TransformTag::Log, chi.xi)?)?
                }
            };
            Some(curve.eval(c))
        }
        (EstimatorFamily::SquaredMean { d, .. }, _) if spec.xi != 0.0 => Some(squared_mean_curve(&spec)?.eval(d)),
        _ => None,
    })
}
