use std::process::Command;

use hyperpi::report::cli::{cli_main_with, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hyperpi").chain(args.iter().copied());
    let code = cli_main_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn analytic_prints_exact_probability() {
    let (code, out, _) = run(&["analytic", "--dim", "2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("P = 0.7853981634"), "{out}");
    assert!(out.contains("stirling"));

    let (code, out, _) = run(&["analytic", "--dim", "200"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("e-169"), "{out}");
}

#[test]
fn estimate_in_one_dimension_is_pi() {
    let (code, out, _) = run(&["estimate", "--dim", "1", "--samples", "1000", "--runs", "1", "--seed", "7"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("pi_hat = 3.141592653589793"), "{out}");
    assert!(out.contains("average = 3.141592653589793"), "{out}");
}

#[test]
fn estimate_is_reproducible_and_worker_independent() {
    let args = ["estimate", "--dim", "4", "--samples", "20000", "--runs", "3", "--seed", "11"];
    let (_, one, _) = run(&[&args[..], &["--workers", "1"]].concat());
    let (_, four, _) = run(&[&args[..], &["--workers", "4", "--interval", "wilson"]].concat());
    let hits = |s: &str| s.lines().map(|l| l.split("p_hat").next().unwrap().to_string()).collect::<Vec<_>>();
    assert_eq!(hits(&one), hits(&four));
    assert_eq!(one.lines().filter(|l| l.starts_with("run ")).count(), 3);
}

#[test]
fn estimate_warns_on_zero_hits() {
    let (code, _, err) = run(&["estimate", "--dim", "20", "--samples", "100", "--runs", "2", "--seed", "1"]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(err.contains("warning: 2 of 2 runs had zero hits"), "{err}");
}

#[test]
fn size_prints_required_samples() {
    let (code, out, _) = run(&["size", "--dim", "20", "--target-rel-se", "0.01"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "4063162659");
    let (code, _, _) = run(&["size", "--dim", "2", "--target-rel-se", "1.5"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["analytic"][..],
        &["analytic", "--dim", "0"],
        &["estimate", "--dim", "2"],
        &["bogus"],
        &["sweep", "--out", "x"],
        &["sweep", "--default", "--plan", "p.json", "--out", "x"],
    ] {
        let (code, _, err) = run(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}");
        assert!(!err.is_empty());
    }
}

#[test]
fn malformed_plan_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(&plan, r#"{"dimensions": [2, 2], "root_seed": 1}"#).unwrap();
    let out = dir.path().join("out");
    let (code, _, err) = run(&["sweep", "--plan", plan.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE, "{err}");

    std::fs::write(&plan, "not json").unwrap();
    let (code, _, _) = run(&["sweep", "--plan", plan.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);

    let missing = dir.path().join("missing.json");
    let (code, _, _) = run(&["sweep", "--plan", missing.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn sweep_from_plan_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(
        &plan,
        r#"{"dimensions": [2, 20], "root_seed": 5, "workers": 2,
            "schedule": {"2": [{"sample_size": 1000, "run_count": 2}, {"sample_size": 2000, "run_count": 2}],
                         "20": [{"sample_size": 100, "run_count": 2}]}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let (code, stdout, err) = run(&["sweep", "--plan", plan.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(stdout.contains("grand_mean"));
    assert!(err.contains("warning: 2 runs had zero hits"), "{err}");
    for f in ["runs.csv", "summary.json", "finals.svg", "timing.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn sweep_default_subset_with_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let (code, stdout, err) = run(&[
        "sweep", "--default", "--dims", "2,3", "--seed", "9", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(stdout.contains("d =  2"));
    let csv = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 30);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["root_seed"], 9);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_hyperpi");
    let ok = Command::new(bin).args(["size", "--dim", "1", "--target-rel-se", "0.1"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout).trim(), "1");

    let usage = Command::new(bin).args(["estimate"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));

    let env_workers = Command::new(bin)
        .env("HYPERPI_WORKERS", "3")
        .args(["estimate", "--dim", "2", "--samples", "1000", "--seed", "1"])
        .output()
        .unwrap();
    assert_eq!(env_workers.status.code(), Some(0));

    let bad_env = Command::new(bin)
        .env("HYPERPI_WORKERS", "zero")
        .args(["estimate", "--dim", "2", "--samples", "1000"])
        .output()
        .unwrap();
    assert_eq!(bad_env.status.code(), Some(2));
}
