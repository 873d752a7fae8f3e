use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use qmiss_core::ard::{
    argmin_c, bayes_averaged_curve, binomial_curve, denominator_zoo, hl_curve, hl_deficiency_numeric,
    hl_squared_mean_curve, lambda0_curve, lambda0_transformed_curve, lambda_a_curve, squared_mean_curve, Argmin,
    Formula, QuadraticCurve, TransformSpec,
};
use qmiss_core::brownian::PathConfig;
use qmiss_core::mc::{
    read_json, run_ard_experiment, run_qlaw_experiment, run_secondorder, write_csv, write_json, ExperimentPlan,
    McEstimate, SecondOrderPlan, Verdict,
};
use qmiss_core::qsim::{Cutoff, EstimatorFamily, TransformTag};
use qmiss_core::{Generator, MomentSpec};

use crate::args::{parse_list, ArdClosedArgs, ArdMcArgs, GridArg, QlawArgs, SecondOrderArgs, ZooArgs};
use crate::presets::{pair_target, preset};
use crate::{results_dir, Outcome, DEFAULT_SEED};

fn parse_transform(name: &str) -> Result<TransformTag> {
    Ok(match name.trim().to_ascii_lowercase().as_str() {
        "identity" | "id" => TransformTag::Identity,
        "sqrt" => TransformTag::Sqrt,
        "log" => TransformTag::Log,
        "square" => TransformTag::Square,
        other => bail!("unknown transform '{other}' (identity, sqrt, log, square)"),
    })
}

fn argmin_line(var: &str, curve: &QuadraticCurve) -> String {
    match argmin_c(curve) {
        Argmin::Minimum { c0, value } => format!("# argmin {var}={c0},value={value}"),
        Argmin::UnboundedBelow => "# argmin unbounded below".to_string(),
        Argmin::Flat { value } => format!("# argmin flat,value={value}"),
    }
}

pub fn ard_closed(a: ArdClosedArgs) -> Result<Outcome> {
    let formula: Formula = a.formula.parse()?;
    let base = a.dist.0.spec()?;
    let spec = MomentSpec {
        xi: a.xi.unwrap_or(base.xi),
        sigma: a.sigma.unwrap_or(base.sigma),
        gamma: a.gamma.unwrap_or(base.gamma),
        ..base
    };
    let over_d = matches!(formula, Formula::SquaredMean | Formula::HlSquaredMean);
    let grid = match (a.c, a.c_grid) {
        (Some(c), _) => vec![c],
        (None, Some(g)) => g.0,
        (None, None) => (if over_d { "-2:2:0.05" } else { "0:2:0.05" }).parse::<GridArg>()?.0,
    };
    let mut out = String::new();
    if formula == Formula::HlNumeric {
        let n_grid: Vec<f64> = (0..8).map(|k| 1000.0 * 2f64.powi(k)).collect();
        writeln!(out, "c,lambda")?;
        let mut best: Option<(f64, f64)> = None;
        for &c in &grid {
            let v = hl_deficiency_numeric(c, a.d, spec.xi, spec.sigma, &n_grid)?.limit;
            writeln!(out, "{c},{v}")?;
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((c, v));
            }
        }
        if let Some((c, v)) = best {
            writeln!(out, "# grid minimum c={c},value={v}")?;
        }
        print!("{out}");
        return Ok(Outcome::Success);
    }
    let (var, curve) = match formula {
        Formula::LambdaA => ("c", lambda_a_curve(&spec, a.a)?),
        Formula::Lambda0 => ("c", lambda0_curve(a.d, &spec)?),
        Formula::Lambda0Transformed => {
            let h = match a.h_ratio {
                Some(r) => TransformSpec::custom(r)?,
                None => TransformSpec::from_tag(parse_transform(&a.transform)?, spec.xi)?,
            };
            ("c", lambda0_transformed_curve(a.d, &spec, &h)?)
        }
        Formula::SquaredMean => ("d", squared_mean_curve(&spec)?),
        Formula::Hl => ("c", hl_curve(a.d, &spec)?),
        Formula::HlSquaredMean => ("d", hl_squared_mean_curve(&spec)?),
        Formula::Binomial => ("c", binomial_curve(a.d, a.p)?),
        Formula::BayesAveraged => ("c", bayes_averaged_curve(a.d, a.theta0, a.tau2)?),
        Formula::HlNumeric => unreachable!(),
    };
    writeln!(out, "{var},lambda")?;
    for x in grid {
        writeln!(out, "{x},{}", curve.eval(x))?;
    }
    writeln!(out, "{}", argmin_line(var, &curve))?;
    print!("{out}");
    Ok(Outcome::Success)
}

fn with_shrink(base: EstimatorFamily, c: Option<f64>, d: Option<f64>) -> EstimatorFamily {
    let (c0, d0) = match base {
        EstimatorFamily::ShrinkMean { c, d } => (c, d),
        _ => (0.0, 0.0),
    };
    if c.is_none() && d.is_none() {
        base
    } else {
        EstimatorFamily::shrink(c.unwrap_or(c0), d.unwrap_or(d0))
    }
}

fn plan_from_args(a: &ArdMcArgs) -> Result<(ExperimentPlan, &'static str)> {
    let mut plan = match (&a.config, &a.preset) {
        (Some(_), Some(_)) => bail!("--config and --preset are mutually exclusive"),
        (Some(path), None) => read_json::<ExperimentPlan>(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => {
            let Some(dist) = a.dist else {
                bail!("give --preset, --config, or --dist with --c1");
            };
            if a.c1.is_none() {
                bail!("--c1 is required without --preset or --config");
            }
            let mut plan = ExperimentPlan::new(
                "ard-mc",
                dist.0,
                EstimatorFamily::shrink(0.0, 0.0),
                EstimatorFamily::shrink(0.0, 0.0),
                vec![0.1, 0.05, 0.02],
                2000,
                DEFAULT_SEED,
            );
            plan.closed_form_target = None;
            plan
        }
    };
    let reshaped = a.dist.is_some() || a.c1.is_some() || a.d1.is_some() || a.c2.is_some() || a.d2.is_some();
    if let Some(d) = a.dist {
        plan.generator = d.0;
    }
    plan.f1 = with_shrink(plan.f1, a.c1, a.d1);
    plan.f2 = with_shrink(plan.f2, a.c2, a.d2);
    if let Some(eps) = &a.eps {
        plan.epsilon_grid = parse_list(eps)?;
    }
    if let Some(r) = a.reps {
        plan.n_reps = r;
    }
    let seed_source = match a.seed {
        Some(s) => {
            plan.master_seed = s;
            "flag"
        }
        None if a.config.is_some() => "config",
        None => {
            plan.master_seed = DEFAULT_SEED;
            "default"
        }
    };
    if let Some(fa) = a.fixed_a {
        plan.cutoff = Cutoff::Fixed { a: fa };
    }
    if let Some(id) = &a.id {
        plan.experiment_id = id.clone();
    }
    if a.threads.is_some() {
        plan.threads = a.threads;
    }
    plan.closed_form_target = match a.target {
        Some(t) => Some(t),
        None if reshaped => pair_target(&plan.generator, &plan.f1, &plan.f2)?,
        None => plan.closed_form_target,
    };
    Ok((plan, seed_source))
}

fn opt(x: Option<impl std::fmt::Display>) -> String {
    x.map(|v| v.to_string()).unwrap_or_else(|| "none".into())
}

pub fn ard_mc(a: ArdMcArgs) -> Result<Outcome> {
    let (plan, seed_source) = plan_from_args(&a)?;
    let dir = results_dir(a.out_dir.clone());
    let exp = run_ard_experiment(&plan)?;
    let json = dir.join(format!("{}.json", plan.experiment_id));
    let csv = dir.join(format!("{}.csv", plan.experiment_id));
    write_json(&exp, &json)?;
    write_csv(std::slice::from_ref(&exp), &csv)?;
    let table = std::fs::read_to_string(&csv).with_context(|| format!("reading back {}", csv.display()))?;
    let s = &exp.summary;
    let verdict = match s.verdict {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::NoTarget => "NO_TARGET",
    };
    println!(
        "# experiment {} seed {} ({seed_source})",
        plan.experiment_id, plan.master_seed
    );
    print!("{table}");
    println!(
        "# summary verdict={verdict},target={},extrapolated={},extrapolated_se={},smallest_ci_contains_target={},monotone_trend={}",
        opt(s.target),
        s.extrapolated,
        s.extrapolated_se,
        opt(s.smallest_ci_contains_target),
        opt(s.monotone_trend)
    );
    eprintln!("wrote {} and {}", json.display(), csv.display());
    Ok(if s.verdict == Verdict::Fail {
        Outcome::TargetMissed
    } else {
        Outcome::Success
    })
}

#[derive(Debug, Serialize)]
struct QlawRecord {
    config: PathConfig,
    paths: usize,
    estimate: McEstimate,
}

pub fn qlaw(a: QlawArgs) -> Result<Outcome> {
    if a.paths == 0 {
        bail!("--paths must be at least 1");
    }
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let defaults = PathConfig::with_defaults(a.sigma, seed);
    let config = PathConfig {
        horizon: a.horizon.unwrap_or(defaults.horizon),
        step: a.step.unwrap_or(defaults.step),
        ..defaults
    };
    let est = run_qlaw_experiment(a.paths, &config, a.threads)?;
    let path = results_dir(a.out_dir).join(format!("qlaw-sigma{}.json", a.sigma));
    write_json(
        &QlawRecord {
            config,
            paths: a.paths,
            estimate: est.clone(),
        },
        &path,
    )?;
    println!("sigma,paths,horizon,step,mean,std_error,ci_lo,ci_hi,truncation_bound,master_seed");
    println!(
        "{},{},{},{},{},{},{},{},{},{}",
        config.sigma,
        a.paths,
        config.horizon,
        config.step,
        est.mean,
        est.std_error,
        est.ci95.0,
        est.ci95.1,
        est.truncation_bound_total,
        seed
    );
    eprintln!("wrote {}", path.display());
    Ok(Outcome::Success)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn zoo(a: ZooArgs) -> Result<Outcome> {
    let rows = denominator_zoo(a.n)?;
    println!("key,principle,exact_denominator,approx_denominator,approx_expr,c_exact,note");
    for r in rows {
        println!(
            "{},{},{},{},{},{},{}",
            r.key,
            csv_field(&r.principle),
            r.exact_denominator,
            r.approx_denominator,
            csv_field(&r.approx_expr),
            r.c_exact(a.n),
            csv_field(&r.note)
        );
    }
    Ok(Outcome::Success)
}

pub fn secondorder(a: SecondOrderArgs) -> Result<Outcome> {
    let generator = match a.dist {
        Some(d) => d.0,
        None => Generator::Normal {
            mean: a.xi,
            sd: a.sigma,
        },
    };
    let plan = SecondOrderPlan {
        experiment_id: "secondorder".into(),
        generator,
        c: a.c,
        epsilon: a.eps,
        cutoff: a.fixed_a.map_or(Cutoff::Shrinking, |fa| Cutoff::Fixed { a: fa }),
        n_reps: a.reps,
        master_seed: a.seed.unwrap_or(DEFAULT_SEED),
        reference_draws: a.ref_draws,
        threads: a.threads,
    };
    let rep = run_secondorder(&plan)?;
    let dir: PathBuf = results_dir(a.out_dir);
    let json = dir.join("secondorder.json");
    let qq = dir.join("secondorder-qq.csv");
    write_json(&rep, &json)?;
    write_qq(&rep.qq, &qq)?;
    let s = &rep.summary;
    let (mlo, mhi) = s.mean_ci95();
    let (vlo, vhi) = s.variance_ci95();
    println!("n_reps,epsilon,mean,mean_ci_lo,mean_ci_hi,variance,variance_ci_lo,variance_ci_hi,reference_variance,point_mass_at_zero,master_seed");
    println!(
        "{},{},{},{mlo},{mhi},{},{vlo},{vhi},{},{},{}",
        s.n, plan.epsilon, s.mean, s.variance, rep.reference_variance, rep.point_mass_at_zero, plan.master_seed
    );
    eprintln!("wrote {} and {}", json.display(), qq.display());
    Ok(Outcome::Success)
}

fn write_qq(points: &[qmiss_core::mc::QqPoint], path: &Path) -> Result<()> {
    let mut text = String::from("p,empirical,reference\n");
    for q in points {
        writeln!(text, "{},{},{}", q.p, q.empirical, q.reference)?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
