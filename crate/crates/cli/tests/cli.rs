use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kappa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kappa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

/// Exactly one line on stderr, shaped `error[CODE]: message`.
fn assert_error_line(out: &Output, exit: i32, code: &str) {
    assert_eq!(out.status.code(), Some(exit));
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "stderr: {err}");
    let prefix = format!("error[{code}]: ");
    assert!(lines[0].starts_with(&prefix) && lines[0].len() > prefix.len(), "stderr: {err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn three_points_hand_values() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "three_points.csv", "x,y\n0,0\n1,1\n2,2\n");
    let v = json(&kappa(&["estimate", "--input", &input]));
    // a = (3,2,3), S = 6: κ* = 1/9, κ̃ = 1/72, κ̂ = 10/81
    assert!((v["kappa_star"].as_f64().unwrap() - 1.0 / 9.0).abs() < 1e-14);
    assert!((v["kappa_tilde"].as_f64().unwrap() - 1.0 / 72.0).abs() < 1e-14);
    assert!((v["kappa_hat"].as_f64().unwrap() - 10.0 / 81.0).abs() < 1e-14);
    assert_eq!(v["n"], 3);
    assert!(v.get("rho_hat").is_none());

    let single = json(&kappa(&["estimate", "--input", &input, "--estimator", "hat", "--rho"]));
    assert!(single.get("kappa_star").is_none());
    assert_eq!(single["rho_hat"].as_f64(), Some(1.0));
}

#[test]
fn csv_and_table_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "s.csv", "0,0\n1,1\n2,2\n");
    let out = kappa(&["--output", "csv", "estimate", "--input", &input]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,kappa_star,kappa_tilde,kappa_hat"));
    assert!(lines.next().unwrap().starts_with("3,0.1111"));

    let out = kappa(&["kappa-theta", "--family", "normal", "--theta", "0", "--output", "table"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "0\n");
}

#[test]
fn kappa_theta_json_and_oracle() {
    let v = json(&kappa(&["kappa-theta", "--family", "normal", "--theta", "0"]));
    assert_eq!(v["kappa"].as_f64(), Some(0.0));

    let v = json(&kappa(&["kappa-theta", "--family", "exponential", "--theta", "0.5", "--oracle"]));
    assert!(v["kappa"].as_f64().unwrap() > 0.0);
    assert!(v["oracle_relative_difference"].as_f64().unwrap() < 1e-5);

    let v = json(&kappa(&["kappa-theta", "--family", "normal", "--theta", "-0.5", "--sigma1", "2"]));
    let base = json(&kappa(&["kappa-theta", "--family", "normal", "--theta", "0.5"]));
    let ratio = v["kappa"].as_f64().unwrap() / base["kappa"].as_f64().unwrap();
    assert!((ratio - 2.0).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_two() {
    assert_error_line(&kappa(&[]), 2, "USAGE");
    assert_error_line(&kappa(&["frobnicate"]), 2, "USAGE");
    assert_error_line(&kappa(&["power", "--families", "normal"]), 2, "USAGE");
    assert_error_line(&kappa(&["kappa-theta", "--family", "normal", "--theta", "1.5"]), 2, "THETA_OUT_OF_RANGE");
    assert_error_line(&kappa(&["kappa-theta", "--family", "laplace", "--theta", "0.5"]), 2, "UNSUPPORTED_FAMILY");
    assert_error_line(
        &kappa(&["power", "--families", "normal", "--thetas", "0", "--replicates", "10"]),
        2,
        "INVALID_ARGUMENT",
    );
    assert_error_line(&kappa(&["test", "--input", "x.csv", "--b", "10"]), 2, "INVALID_ARGUMENT");
    assert_error_line(&kappa(&["eigen", "--marginal", "empirical"]), 2, "INVALID_ARGUMENT");
}

#[test]
fn runtime_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    assert_error_line(&kappa(&["estimate", "--input", missing.to_str().unwrap()]), 1, "IO_ERROR");

    let bad = write(dir.path(), "bad.csv", "x,y\n1,2\n3,oops\n");
    assert_error_line(&kappa(&["estimate", "--input", &bad]), 1, "PARSE_ERROR");

    let flat = write(dir.path(), "flat.csv", "1,0\n1,1\n1,2\n");
    assert_error_line(&kappa(&["estimate", "--input", &flat, "--rho"]), 1, "DEGENERATE_MARGINAL");
}

#[test]
fn sample_round_trip_and_seeding() {
    let dir = tempfile::tempdir().unwrap();
    let a = kappa(&["sample", "--family", "logistic", "--theta", "0.4", "--n", "50", "--seed", "9"]);
    let b = kappa(&["sample", "--family", "logistic", "--theta", "0.4", "--n", "50", "--seed", "9"]);
    let c = kappa(&["sample", "--family", "logistic", "--theta", "0.4", "--n", "50", "--seed", "10"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(String::from_utf8_lossy(&a.stdout).lines().count(), 51);

    let path = dir.path().join("s.csv");
    let p = path.to_str().unwrap();
    let info = json(&kappa(&["sample", "--family", "logistic", "--theta", "0.4", "--n", "50", "--seed", "9", "--out", p]));
    assert_eq!(info["n"], 50);
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
    let est = json(&kappa(&["estimate", "--input", p]));
    assert_eq!(est["n"], 50);
}

#[test]
fn test_subcommand_detects_dependence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dep.csv");
    let p = path.to_str().unwrap();
    json(&kappa(&["sample", "--family", "normal", "--theta", "0.8", "--n", "100", "--seed", "1", "--out", p]));
    let perm = json(&kappa(&["test", "--input", p, "--b", "199"]));
    assert_eq!(perm["statistic_name"], "kappa_star");
    assert_eq!(perm["method"], "permutation");
    assert!((perm["p_value"].as_f64().unwrap() - 1.0 / 200.0).abs() < 1e-15);

    let all = json(&kappa(&["test", "--input", p, "--estimator", "all", "--method", "asymptotic", "--b", "999"]));
    let arr = all.as_array().unwrap();
    assert_eq!(arr.len(), 3);
    for r in arr {
        assert_eq!(r["B_or_R"], 999);
        assert!(r["p_value"].as_f64().unwrap() <= 0.01);
    }
}

#[test]
fn eigen_uniform_leading_value() {
    let v = json(&kappa(&["eigen", "--marginal", "uniform", "--t", "500", "--k", "3"]));
    let l = v["lambdas"].as_array().unwrap();
    assert_eq!(l.len(), 3);
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((l[0].as_f64().unwrap() * pi2 - 1.0).abs() < 1e-3);
    assert!((l[1].as_f64().unwrap() * 4.0 * pi2 - 1.0).abs() < 1e-3);
}

#[test]
fn output_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let p = path.to_str().unwrap();
    json(&kappa(&["sample", "--family", "chisquare", "--theta", "0.5", "--n", "60", "--out", p]));

    let power = ["power", "--families", "normal,exponential", "--thetas", "0,0.5", "--n", "30", "--replicates", "100"];
    let asym = ["test", "--input", p, "--method", "asymptotic", "--b", "500", "--estimator", "all"];
    for args in [&power[..], &asym[..]] {
        let runs: Vec<Vec<u8>> = ["1", "3", "0"]
            .iter()
            .map(|t| {
                let mut a = args.to_vec();
                a.extend(["--threads", t, "--seed", "77"]);
                let out = kappa(&a);
                assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
                out.stdout
            })
            .collect();
        assert_eq!(runs[0], runs[1]);
        assert_eq!(runs[0], runs[2]);
    }
}

#[test]
fn power_and_bench_layouts() {
    let out = kappa(&[
        "power", "--families", "normal", "--thetas", "0,0.5", "--n", "50", "--replicates", "100", "--output", "table",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("Bivariate Normal\n"));
    assert!(text.contains("κ*"));

    let v = json(&kappa(&["power", "--families", "normal", "--thetas", "0.5", "--n", "50", "--replicates", "100"]));
    assert_eq!(v["cells"].as_array().unwrap().len(), 3);
    assert!(v["cells"][0]["power"].as_f64().unwrap() > 0.8);

    let v = json(&kappa(&["bench", "--estimators", "star,hat", "--n", "50", "--evals", "10"]));
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["estimator"], "kappa_hat");
    assert_eq!(rows[0]["repetitions"], 10);
}
