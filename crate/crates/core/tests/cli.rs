use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn model(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "models", &format!("{name}.model")].iter().collect();
    path.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ergokit").chain(args.iter().copied());
    let code = ergokit::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn row<'a>(rows: &'a [Vec<String>], property: &str) -> &'a [String] {
    rows.iter().find(|r| r[2] == property).unwrap()
}

#[test]
fn classify_gamma_two() {
    let (code, out, _) = run(&["classify", &model("gamma2"), "--format", "csv"]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    assert_eq!(rows[0].join(","), "model,kind,property,outcome,quantity,reason,probes,flags");
    assert_eq!(row(&rows, "exponential-ergodicity")[3], "holds");
    assert_eq!(row(&rows, "strong-ergodicity")[3], "fails");
    assert!(rows.iter().all(|r| r[2] != "nash"));
}

#[test]
fn classify_ou_text() {
    let (code, out, _) = run(&["classify", &model("ou"), "--nu", "4"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("# ergokit "));
    let line = out.lines().find(|l| l.starts_with("poincare")).unwrap();
    assert!(line.contains("holds"));
    let quantity: f64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((quantity - 0.478812895038).abs() < 1e-8);
    assert!(out.contains("conjectured criterion"));
    assert!(out.contains("(ε)"));
}

#[test]
fn json_lines_schema() {
    let (code, out, _) = run(&["classify", &model("mm1"), "--nu", "3", "--format", "json-lines"]);
    assert_eq!(code, 0);
    let lines: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 8);
    for v in &lines {
        for key in ["property", "outcome", "quantity", "probes", "flags"] {
            assert!(v.get(key).is_some(), "{key} missing in {v}");
        }
        assert!(v["probes"].as_array().is_some_and(|p| !p.is_empty()));
    }
    assert_eq!(lines[7]["property"], "nash");
    assert_eq!(lines[7]["flags"].as_array().unwrap().len(), 1);
}

#[test]
fn output_is_deterministic() {
    for format in ["text", "csv", "json-lines"] {
        let first = run(&["classify", &model("cubic"), "--format", format]);
        let second = run(&["classify", &model("cubic"), "--format", format]);
        assert_eq!(first, second);
    }
    let first = run(&["gap", &model("mm1"), "--oracle", "512", "--format", "csv"]);
    assert_eq!(first, run(&["gap", &model("mm1"), "--oracle", "512", "--format", "csv"]));
}

#[test]
fn emit_curve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let (code, _, _) = run(&["classify", &model("gamma3"), "--emit-curve", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("property,x,value"));
    assert_eq!(lines.count(), 7 * 9);
}

#[test]
fn gap_csv_columns() {
    let (code, out, _) = run(&["gap", &model("mm1"), "--oracle", "4096", "--format", "csv"]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    assert_eq!(rows[0].join(","), "model,kind,delta,lower,upper,var_lower,oracle,oracle_err");
    let oracle: f64 = rows[1][6].parse().unwrap();
    assert!((oracle - 0.171572875).abs() < 1e-4);
    let lower: f64 = rows[1][3].parse().unwrap();
    let upper: f64 = rows[1][4].parse().unwrap();
    assert!(lower <= oracle && oracle <= upper);
}

#[test]
fn gap_drifted_brownian_motion() {
    let (code, out, _) = run(&["gap", &model("drifted_bm"), "--format", "csv"]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    let num = |k: usize| rows[1][k].parse::<f64>().unwrap();
    assert!((num(2) - 0.25).abs() < 1e-6);
    assert!((num(3) - 1.0).abs() < 1e-6);
    assert!((num(4) - 4.0).abs() < 1e-5);
    assert_eq!(rows[1][6], "");
}

#[test]
fn gap_zero_without_exponential_ergodicity() {
    let (code, out, _) = run(&["gap", &model("gamma1"), "--format", "csv"]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    assert_eq!(rows[1][2], "infinite");
    assert_eq!(rows[1][3], "0");
    assert_eq!(rows[1][4], "0");
}

#[test]
fn oracle_command() {
    let (code, out, _) = run(&["oracle", &model("ou"), "--N", "4096", "--which", "l0", "--L", "8", "--format", "csv"]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    assert_eq!(rows[0].join(","), "model,kind,which,value,error,size,cutoff");
    let value: f64 = rows[1][3].parse().unwrap();
    assert!((value - 1.0).abs() < 0.02);
    assert_eq!(rows[1][6], "8");
}

#[test]
fn verify_hitting_times() {
    let (code, out, _) = run(&["verify", &model("mm1"), "--y", "hitting", "--lambda", "0", "--format", "csv"]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    assert_eq!(rows[1][1], "holds");
    assert_eq!(rows[1][2], "1000");
    assert!(rows[1][5].parse::<f64>().unwrap() <= 1e-9);
}

#[test]
fn verify_finds_first_violation() {
    let (code, out, _) = run(&["verify", &model("gamma1"), "--y", "n", "--lambda", "0.5"]);
    assert_eq!(code, 0);
    assert!(out.contains("fails"));
    assert!(out.contains("first violation      1"));
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.model");
    std::fs::write(&bad, "kind = birth-death\nb0 1\n").unwrap();
    let (code, _, err) = run(&["classify", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("line 2"), "{err}");

    let (code, _, _) = run(&["classify", dir.path().join("missing.model").to_str().unwrap()]);
    assert_eq!(code, 1);
    let (code, _, err) = run(&["verify", &model("mm1"), "--y", "n", "--lambda", "5"]);
    assert_eq!(code, 1);
    assert!(err.contains("q_0"), "{err}");
    let (code, _, _) = run(&["verify", &model("ou"), "--y", "n", "--lambda", "0"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["verify", &model("mm1"), "--y", "n +", "--lambda", "0"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["classify", &model("ou"), "--nu", "1.5"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["oracle", &model("mm1"), "--N", "1"]);
    assert_eq!(code, 1);
    let (code, _, err) = run(&["classify"]);
    assert_eq!(code, 1);
    assert!(err.contains("Usage"));
}

#[test]
fn help_documents_defaults() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("Defaults"));
    assert!(out.contains("ERGOKIT_BUDGET"));
    let (code, out, _) = run(&["--version"]);
    assert_eq!(code, 0);
    assert!(out.contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn binary_exit_codes_and_budget_variable() {
    let bin = env!("CARGO_BIN_EXE_ergokit");
    let probes = |budget: Option<&str>| {
        let mut cmd = Command::new(bin);
        cmd.args(["classify", &model("mm1"), "--format", "json-lines"]);
        cmd.env_remove("ERGOKIT_BUDGET");
        if let Some(b) = budget {
            cmd.env("ERGOKIT_BUDGET", b);
        }
        let out = cmd.output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        let first: Value = serde_json::from_str(String::from_utf8(out.stdout).unwrap().lines().next().unwrap()).unwrap();
        first["probes"].as_array().unwrap().len()
    };
    assert_eq!(probes(None), 9);
    assert_eq!(probes(Some("2")), 10);

    let out = Command::new(bin)
        .args(["classify", &model("mm1")])
        .env("ERGOKIT_BUDGET", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(bin).arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
