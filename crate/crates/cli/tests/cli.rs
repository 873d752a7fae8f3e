use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qmiss(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmiss"))
        .args(args)
        .env("QMISS_RESULTS_DIR", dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn assert_golden(args: &[&str], name: &str) -> TempDir {
    let dir = TempDir::new().unwrap();
    let out = qmiss(dir.path(), args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out), golden(name), "output of {args:?} drifted from {name}");
    dir
}

fn last_line(s: &str) -> &str {
    s.lines().last().unwrap()
}

#[test]
fn lambda0_exponential_table() {
    assert_golden(
        &[
            "ard-closed",
            "--formula",
            "lambda0",
            "--dist",
            "exp1",
            "--d",
            "0",
            "--c-grid",
            "0:1:0.05",
        ],
        "lambda0_exp1.csv",
    );
    let out = golden("lambda0_exp1.csv");
    let (c, v) = last_line(&out)
        .trim_start_matches("# argmin c=")
        .split_once(",value=")
        .unwrap();
    assert!((c.parse::<f64>().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert!((v.parse::<f64>().unwrap() + 1.0 / 9.0).abs() < 1e-12);
}

#[test]
fn squared_mean_table() {
    assert_golden(
        &[
            "ard-closed",
            "--formula",
            "squared-mean",
            "--xi",
            "1",
            "--sigma",
            "1",
            "--c-grid=-2:1:0.25",
        ],
        "squared_mean.csv",
    );
    let dir = TempDir::new().unwrap();
    let out = qmiss(
        dir.path(),
        &["ard-closed", "--formula", "squared-mean", "--xi", "1", "--sigma", "1"],
    );
    assert_eq!(last_line(&stdout(&out)), "# argmin d=-1,value=-0.25");
}

#[test]
fn zero_shrinkage_row() {
    let dir = TempDir::new().unwrap();
    let out = qmiss(
        dir.path(),
        &["ard-closed", "--formula", "lambda0", "--dist", "exp1", "--c", "0"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().nth(1), Some("0,0"));
}

#[test]
fn every_formula_evaluates() {
    let dir = TempDir::new().unwrap();
    for f in [
        "lambda_a",
        "lambda0",
        "lambda0_transformed",
        "hl",
        "binomial",
        "bayes_averaged",
    ] {
        let out = qmiss(
            dir.path(),
            &["ard-closed", "--formula", f, "--dist", "exp1", "--c-grid", "0:1:0.5"],
        );
        assert_eq!(out.status.code(), Some(0), "{f}: {}", stderr(&out));
        assert_eq!(stdout(&out).lines().count(), 5, "{f}");
    }
    let out = qmiss(
        dir.path(),
        &["ard-closed", "--formula", "hl_numeric", "--dist", "exp1", "--c", "0.5"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: f64 = stdout(&out)
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    // Hodges-Lehmann form for Exp(1), d = 0: c^2 - 2c at c = 1/2.
    assert!((v + 0.75).abs() < 1e-6, "{v}");
}

#[test]
fn zoo_table() {
    assert_golden(&["zoo", "--N", "20"], "zoo_n20.csv");
    assert_eq!(golden("zoo_n20.csv").lines().count(), 12);
    let dir = TempDir::new().unwrap();
    let out = qmiss(dir.path(), &["zoo", "--N", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("N >= 2"));
}

#[test]
fn ard_mc_preset_persists_results() {
    let args = ["ard-mc", "--preset", "exp-mean", "--reps", "64", "--eps", "0.1,0.05"];
    let dir = assert_golden(&args, "ard_mc_exp_mean.txt");
    let csv = std::fs::read_to_string(dir.path().join("exp-mean.csv")).unwrap();
    let table: String = golden("ard_mc_exp_mean.txt")
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    assert_eq!(csv, table);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("exp-mean.json")).unwrap()).unwrap();
    assert_eq!(json["summary"]["verdict"], "PASS");
    assert_eq!(json["plan"]["master_seed"], 20240601);
    assert_eq!(json["estimates"].as_array().unwrap().len(), 2);
}

#[test]
fn ard_mc_is_thread_count_invariant() {
    let dir = TempDir::new().unwrap();
    let base = ["ard-mc", "--preset", "exp-mean", "--reps", "64", "--eps", "0.1,0.05"];
    let one = qmiss(dir.path(), &[&base[..], &["--threads", "1"]].concat());
    let four = qmiss(dir.path(), &[&base[..], &["--threads", "4"]].concat());
    assert_eq!(stdout(&one), stdout(&four));
    assert_eq!(stdout(&one), golden("ard_mc_exp_mean.txt"));
}

#[test]
fn seed_echo() {
    let dir = TempDir::new().unwrap();
    let base = ["ard-mc", "--preset", "exp-mean", "--reps", "8", "--eps", "0.1"];
    let out = qmiss(dir.path(), &base);
    assert!(stdout(&out).starts_with("# experiment exp-mean seed 20240601 (default)\n"));
    let out = qmiss(dir.path(), &[&base[..], &["--seed", "7"]].concat());
    assert!(stdout(&out).starts_with("# experiment exp-mean seed 7 (flag)\n"));
}

#[test]
fn missed_target_exits_one() {
    let dir = TempDir::new().unwrap();
    let out = qmiss(
        dir.path(),
        &[
            "ard-mc", "--dist", "exp1", "--c1", "0.5", "--reps", "100", "--eps", "0.1", "--target", "5",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(last_line(&stdout(&out)).starts_with("# summary verdict=FAIL"));
}

#[test]
fn flag_built_plan_gets_closed_form_target() {
    let dir = TempDir::new().unwrap();
    let out = qmiss(
        dir.path(),
        &[
            "ard-mc", "--dist", "exp1", "--c1", "0.5", "--reps", "16", "--eps", "0.1",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    // c^2 - 2c/3 at c = 1/2.
    let line = stdout(&out);
    let t: f64 = last_line(&line)
        .split("target=")
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((t + 1.0 / 12.0).abs() < 1e-12, "{t}");
}

#[test]
fn config_file_round_trip() {
    let dir = TempDir::new().unwrap();
    let out = qmiss(
        dir.path(),
        &["ard-mc", "--preset", "normal-variance", "--reps", "8", "--eps", "0.1"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("normal-variance.json")).unwrap()).unwrap();
    let config = dir.path().join("plan.json");
    std::fs::write(&config, serde_json::to_string_pretty(&json["plan"]).unwrap()).unwrap();
    let again = qmiss(dir.path(), &["ard-mc", "--config", config.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0), "{}", stderr(&again));
    let strip = |s: String| s.lines().skip(1).map(str::to_owned).collect::<Vec<_>>();
    assert_eq!(strip(stdout(&out)), strip(stdout(&again)));
    assert!(stdout(&again).starts_with("# experiment normal-variance seed 20240601 (config)"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let cases: &[&[&str]] = &[
        &["qlaw", "--paths", "0"],
        &["secondorder", "--c", "-1"],
        &["ard-mc", "--preset", "no-such-preset"],
        &["ard-mc"],
        &["ard-closed", "--formula", "nonsense"],
        &["ard-closed", "--formula", "squared-mean", "--xi", "0"],
        &["ard-closed", "--formula", "lambda0", "--dist", "gamma:2"],
        &["ard-mc", "--config", "/nonexistent/plan.json"],
        &["no-such-command"],
    ];
    for args in cases {
        let out = qmiss(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        assert!(!stderr(&out).is_empty());
    }
    let out = qmiss(dir.path(), &["ard-mc", "--config", "/nonexistent/plan.json"]);
    assert!(stderr(&out).contains("/nonexistent/plan.json"));
}

#[test]
fn qlaw_output() {
    let dir = assert_golden(&["qlaw", "--sigma", "0.5", "--paths", "50"], "qlaw.csv");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("qlaw-sigma0.5.json")).unwrap()).unwrap();
    assert_eq!(json["paths"], 50);
    assert_eq!(json["estimate"]["n_reps"], 50);
}

#[test]
fn secondorder_outputs() {
    let dir = TempDir::new().unwrap();
    let out = qmiss(
        dir.path(),
        &[
            "secondorder",
            "--c",
            "1",
            "--reps",
            "100",
            "--ref-draws",
            "1000",
            "--eps",
            "0.1",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), row.len());
    let col = |name: &str| {
        row[header.iter().position(|h| *h == name).unwrap()]
            .parse::<f64>()
            .unwrap()
    };
    assert_eq!(col("n_reps"), 100.0);
    assert!((col("reference_variance") - 8.0 / 3.0).abs() < 1e-12);
    assert!((0.0..=1.0).contains(&col("point_mass_at_zero")));
    let qq = std::fs::read_to_string(dir.path().join("secondorder-qq.csv")).unwrap();
    assert!(qq.starts_with("p,empirical,reference\n"));
    assert_eq!(qq.lines().count(), 100);
    assert!(dir.path().join("secondorder.json").exists());
}
