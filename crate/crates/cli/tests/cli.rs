use std::path::Path;
use std::process::{Command, Output};

fn chaoslim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaoslim")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.cfg");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const LINEAR: &str = r#"{"n": 100, "replications": 2, "seed": 3, "components": [
    {"label": "x", "order": 1, "coefficients": {"family": "explicit", "values": [1.0, 0.5]}}]}"#;

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn simulate_writes_one_row_per_step() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &LINEAR.replace("\"replications\": 2", "\"replications\": 1"));
    let out = tmp.path().join("out");
    let o = chaoslim(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("paths.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,j,n,value"));
    assert_eq!(lines.count(), 100);
    let m = manifest(&out);
    assert_eq!(m["seed"], 3);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn reruns_hash_identically_and_seed_changes_data() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), LINEAR);
    let hashes = |name: &str, extra: &[&str]| {
        let out = tmp.path().join(name);
        let mut args = vec!["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--format", "bin"];
        args.extend_from_slice(extra);
        assert!(chaoslim(&args).status.success());
        manifest(&out)["outputs"].clone()
    };
    let a = hashes("a", &[]);
    assert_eq!(a, hashes("b", &[]));
    assert_ne!(a, hashes("c", &["--seed", "4"]));
}

#[test]
fn out_of_range_d_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"n": 100, "replications": 2, "components": [
            {"label": "x", "order": 2, "coefficients": {"family": "reg_var", "d": 0.6}}]}"#,
    );
    let o = chaoslim(&["simulate", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("components[0].coefficients.d"));
}

#[test]
fn malformed_config_reports_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "{\n  \"n\": 100,\n  \"replications\": oops\n}");
    let o = chaoslim(&["experiment", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("run.cfg:3:"));
}

#[test]
fn missing_config_fails() {
    let o = chaoslim(&["experiment", "--config", "/definitely/not/here.cfg"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read"));
    assert_eq!(chaoslim(&["experiment"]).status.code(), Some(2));
    assert_eq!(chaoslim(&["simulate", "--format", "xml"]).status.code(), Some(2));
}

fn acf_rows(args: &[&str]) -> Vec<Vec<String>> {
    let tmp = tempfile::tempdir().unwrap();
    let mut all = args.to_vec();
    all.extend(["--out", tmp.path().to_str().unwrap()]);
    let o = chaoslim(&all);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read_to_string(tmp.path().join("acf.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn acf_of_the_pair_product() {
    let rows = acf_rows(&["acf", "--order", "2", "--values", "1,1", "--max-lag", "2"]);
    let got: Vec<(i64, f64)> = rows.iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect();
    assert_eq!(got, vec![(0, 1.0), (1, 0.0), (2, 0.0)]);
}

#[test]
fn cross_order_acf_vanishes() {
    let rows = acf_rows(&[
        "acf", "--order", "1", "--values", "1,0.5", "--with-order", "2", "--with-values", "1,-1,2", "--max-lag", "5",
    ]);
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r[1].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn long_memory_acf_has_slope_column() {
    let rows = acf_rows(&["acf", "--order", "2", "--d", "0.4", "--max-lag", "100000", "--log-lags", "6"]);
    assert!(rows.len() >= 5);
    let slope: f64 = rows[0][3].parse().unwrap();
    let target: f64 = rows[0][4].parse().unwrap();
    assert!((target + 0.4).abs() < 1e-12);
    assert!(slope < 0.0 && slope > -0.5, "{slope}");
    // the local slope settles toward 2 d_X - 1
    let last: f64 = rows.last().unwrap()[2].parse().unwrap();
    assert!((last - target).abs() < 0.01, "{last}");
}

#[test]
fn hermite_and_check_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("h");
    let o = chaoslim(&[
        "hermite", "--k", "1", "--d", "0.4", "--n", "2048", "--replications", "0", "--grid", "0.5,1",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("hermite.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    let cfg = write_config(
        tmp.path(),
        r#"{"k": 2, "replications": 2000, "seed": 1, "noise": ["rademacher"],
            "kernel": {"entries": [[[1, 2], 1.0], [[2, 3], -0.5]]}}"#,
    );
    let out = tmp.path().join("c");
    let o = chaoslim(&["check", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("check.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("0,rademacher,2,2,"));
}

#[test]
fn threads_flag_and_env_give_the_same_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), LINEAR);
    let one = tmp.path().join("one");
    let env = tmp.path().join("env");
    assert!(chaoslim(&["simulate", "--config", &cfg, "--threads", "1", "--out", one.to_str().unwrap()]).status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_chaoslim"))
        .args(["simulate", "--config", &cfg, "--out", env.to_str().unwrap()])
        .env("CHAOSLIM_THREADS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(
        std::fs::read(one.join("paths.csv")).unwrap(),
        std::fs::read(env.join("paths.csv")).unwrap()
    );
    assert_eq!(chaoslim(&["simulate", "--config", &cfg, "--threads", "0"]).status.code(), Some(2));
}
