use qmiss_core::mc::{
    load_results, persist_results, read_csv, run_ard_experiment, run_independent_difference, write_csv, ExperimentPlan,
    Verdict, CSV_HEADER,
};
use qmiss_core::qsim::{Cutoff, EstimatorFamily, VarianceScale};
use qmiss_core::{Error, Generator};

fn exp_mean_plan(grid: Vec<f64>, reps: usize) -> ExperimentPlan {
    let mut plan = ExperimentPlan::new(
        "exp-mean",
        Generator::Exponential { mean: 1.0 },
        EstimatorFamily::shrink(1.0 / 3.0, 0.0),
        EstimatorFamily::shrink(0.0, 0.0),
        grid,
        reps,
        42,
    );
    plan.closed_form_target = Some(-1.0 / 9.0);
    plan
}

#[test]
fn identical_families_give_exact_zero() {
    let f = EstimatorFamily::shrink(0.7, 0.2);
    let plan = ExperimentPlan::new("same", Generator::ChiSquare1, f, f, vec![0.2, 0.1], 50, 1);
    let exp = run_ard_experiment(&plan).unwrap();
    for e in &exp.estimates {
        assert_eq!((e.estimate.mean, e.estimate.std_error), (0.0, 0.0));
        assert_eq!(e.estimate.ci95, (0.0, 0.0));
    }
    assert_eq!(exp.summary.verdict, Verdict::NoTarget);
}

#[test]
fn exponential_mean_estimates_trend_to_target() {
    let exp = run_ard_experiment(&exp_mean_plan(vec![0.1, 0.05, 0.02], 2000)).unwrap();
    for e in &exp.estimates {
        let m = &e.estimate;
        println!(
            "eps {}: {:.4} +- {:.4} (window {}..={})",
            e.epsilon,
            m.mean,
            m.half_width(),
            e.n_min,
            e.n_max
        );
        assert!(m.truncation_bound_total < 0.01 / 9.0);
        assert_eq!(m.n_reps, 2000);
        assert!((m.ci95.1 - m.mean - 1.96 * m.std_error).abs() < 1e-3 * m.std_error);
    }
    println!("{:?}", exp.summary);
    assert_eq!(exp.summary.smallest_ci_contains_target, Some(true));
    assert_eq!(exp.summary.verdict, Verdict::Pass);
}

#[test]
fn coupling_reduces_standard_error() {
    let plan = exp_mean_plan(vec![0.05], 2000);
    let coupled = run_ard_experiment(&plan).unwrap().estimates[0].estimate.clone();
    let independent = run_independent_difference(&plan, 0).unwrap();
    let ratio = (independent.std_error / coupled.std_error).powi(2);
    println!(
        "coupled se {:.4}, independent se {:.4}, variance reduction {ratio:.1}x",
        coupled.std_error, independent.std_error
    );
    assert!(coupled.std_error < independent.std_error);
}

#[test]
fn results_are_bitwise_reproducible() {
    let mut plan = exp_mean_plan(vec![0.2, 0.1], 64);
    plan.threads = Some(1);
    let a = serde_json::to_string(&run_ard_experiment(&plan).unwrap().estimates).unwrap();
    plan.threads = Some(4);
    let b = serde_json::to_string(&run_ard_experiment(&plan).unwrap().estimates).unwrap();
    assert_eq!(a, b);
    plan.master_seed += 1;
    let c = serde_json::to_string(&run_ard_experiment(&plan).unwrap().estimates).unwrap();
    assert_ne!(a, c);
}

#[test]
fn persistence_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let exp = run_ard_experiment(&exp_mean_plan(vec![0.2, 0.1, 0.05], 20)).unwrap();
    let json = dir.path().join("nested/exp.json");
    persist_results(&exp, &json).unwrap();
    let back = load_results(&json).unwrap();
    assert_eq!(back, exp);
    // The lineage is enough to re-run.
    let lineage = &back.estimates[0].estimate.seed_lineage;
    assert_eq!((lineage.master_seed, lineage.experiment_id.as_str()), (42, "exp-mean"));
    assert_eq!(run_ard_experiment(&back.plan).unwrap(), exp);

    let csv = dir.path().join("exp.csv");
    write_csv(std::slice::from_ref(&exp), &csv).unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(
        text.lines().next().unwrap(),
        "experiment_id,epsilon,n_reps,mean,std_error,ci_lo,ci_hi,target,truncation_bound,master_seed"
    );
    let rows = read_csv(&csv).unwrap();
    assert_eq!(rows.len(), 3);
    for (row, e) in rows.iter().zip(&exp.estimates) {
        assert_eq!(row.epsilon, e.epsilon);
        assert_eq!(row.mean, e.estimate.mean);
        assert_eq!(row.ci_lo, e.estimate.ci95.0);
        assert_eq!(row.target, Some(-1.0 / 9.0));
        assert_eq!(row.master_seed, 42);
    }
}

#[test]
fn io_errors_carry_the_path() {
    let err = load_results("/nonexistent/dir/exp.json").unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("/nonexistent/dir/exp.json"));
}

#[test]
fn invalid_plans_are_rejected() {
    let mut plan = exp_mean_plan(vec![0.05, 0.1], 10);
    assert!(run_ard_experiment(&plan).is_err());
    plan.epsilon_grid = vec![0.1, 0.1];
    assert!(run_ard_experiment(&plan).is_err());
    plan.epsilon_grid = vec![0.1];
    plan.n_reps = 1;
    assert!(run_ard_experiment(&plan).is_err());
    plan.n_reps = 10;
    plan.f2 = EstimatorFamily::VarianceDenom {
        c: 0.0,
        scale: VarianceScale::Variance,
    };
    assert!(matches!(run_ard_experiment(&plan), Err(Error::Mismatch(_))));
}

#[test]
fn compute_budget_is_enforced() {
    let mut plan = exp_mean_plan(vec![0.01], 1000);
    plan.step_budget = 1_000_000;
    assert!(matches!(run_ard_experiment(&plan), Err(Error::WindowTooLarge { .. })));
    plan.step_budget = u64::MAX;
    plan.max_window = 10_000;
    assert!(matches!(run_ard_experiment(&plan), Err(Error::WindowTooLarge { .. })));
    plan.cutoff = Cutoff::Fixed { a: 0.5 };
    plan.max_window = 1;
    assert!(run_ard_experiment(&plan).is_err());
}
