use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sepsol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sepsol")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// Runs a JSON-emitting command, asserts success and validates the document.
fn json(args: &[&str], schema: &str) -> Value {
    let out = sepsol(args);
    assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{schema}.v1.json"));
    let schema: Value = serde_json::from_str(&fs::read_to_string(path).expect("schema file")).expect("schema JSON");
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(&doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{args:?} violates schema: {errors:#?}");
    doc
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn ks(modes: &Value) -> Vec<u64> {
    modes.as_array().unwrap().iter().map(|m| m["k"].as_u64().unwrap()).collect()
}

/// Data rows of a CSV document, skipping the header and `#` trailer lines.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn params_duffing_constants() {
    let d = json(&["params", "-p", "2", "-q", "3", "-c", "0"], "params");
    for (key, want) in [("beta_q", 1.0), ("lambda_q", 1.0), ("c_q", 1.0), ("b", -1.0), ("d", 0.0), ("M_q", 1.0)] {
        assert!((f(&d[key]) - want).abs() < 1e-12, "{key} = {}", d[key]);
    }
    assert_eq!(d["k_q"], 2);
    assert_eq!(d["regime"]["b_plus_d"], "negative");
}

#[test]
fn params_p1() {
    let d = json(&["params", "-p", "1", "-q", "2", "-c", "0"], "params");
    assert!((f(&d["c_q"]) + 1.0).abs() < 1e-12);
    assert_eq!(f(&d["b"]), 1.0);
    assert_eq!(f(&d["d"]), 0.0);
    assert!(d["m_d"].is_null());
}

#[test]
fn params_csv_has_stable_keys() {
    let out = sepsol(&["params", "-p", "3", "-q", "5", "-c", "200", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let keys: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(text.lines().next(), Some("key,value"));
    assert_eq!(&keys[..6], ["p", "q", "c", "beta_q", "lambda_q", "c_q"]);
}

#[test]
fn invalid_input_exits_2() {
    for args in [
        &["params", "-p", "0.5", "-q", "1"][..],
        &["params", "-p", "2"],
        &["params", "-p", "2", "-q", "-1"],
        &["period-scan", "-p", "2", "-q", "3", "--grid", ""],
        &["period-scan", "-p", "2", "-q", "3", "--from", "1", "--to", "2", "--points", "0"],
        &["period-scan", "-p", "1", "-q", "2", "--grid", "0.5"],
        &["period-scan", "-p", "2", "-q", "3", "-c", "9", "--kind", "positive", "--grid", "5"],
        &["sector", "-p", "2", "-q", "3", "--theta", "7"],
        &["sector", "-p", "2", "-q", "3", "--theta", "0"],
        &["orbit", "-p", "2", "-q", "3", "--w0", "0", "--y0", "0"],
        &["solve-set", "-p", "2", "-q", "3", "--k-max", "0"],
        &["params", "-p", "2", "-q", "3", "--bogus"],
    ] {
        let out = sepsol(args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?} wrote output before failing");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn integration_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("starved.cfg");
    fs::write(&cfg, "max_steps = 3\n").unwrap();
    let out = sepsol(&["orbit", "-p", "2", "-q", "3", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn scan_failure_keeps_partial_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("starved.cfg");
    fs::write(&cfg, "max_steps = 40\n").unwrap();
    let out = sepsol(&["period-scan", "-p", "2", "-q", "3", "--grid", "0.01,1,100", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let text = stdout(&out);
    assert!(text.starts_with("amplitude,period,method,est_error,"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().any(|r| !r.last().unwrap().is_empty()), "no error marker in {text}");
}

#[test]
fn orbit_p1_circle() {
    let out = sepsol(&["orbit", "-p", "1", "-q", "2", "-c", "0", "--w0", "0", "--y0", "2", "--span", "20"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("tau,w,y,rho"));
    for r in csv_rows(&text) {
        let rho: f64 = r[3].parse().unwrap();
        assert!((rho - 2.0).abs() < 1e-8, "rho = {rho}");
    }
    let trailer = text.lines().last().unwrap().strip_prefix("# ").expect("metadata trailer");
    let meta: Value = serde_json::from_str(trailer).unwrap();
    assert_eq!(meta["class"], "closed-around-origin");
}

#[test]
fn orbit_json_and_homoclinic() {
    let d = json(&["orbit", "-p", "2", "-q", "3", "-c", "0", "--w0", "0", "--y0", "0.5", "--format", "json"], "orbit");
    assert_eq!(d["class"], "closed-around-origin");
    assert!(f(&d["first_integral"]["max_rel_drift"]) < 1e-7);

    let h = json(&["orbit", "-p", "2", "-q", "3", "-c", "2", "--homoclinic", "--format", "json"], "orbit");
    assert_eq!(h["class"], "homoclinic");
    let m_d = f(&h["homoclinic"]["m_d"]);
    assert!((m_d - 1.0).abs() < 1e-12, "m_d = {m_d}");
    assert!((f(&h["homoclinic"]["return_slope"]) - m_d).abs() < 1e-6);
}

#[test]
fn orbit_from_rest_point_is_single_row() {
    let d = json(&["params", "-p", "2", "-q", "3", "-c", "9"], "params");
    let a = f(&d["a"]).to_string();
    let o = json(&["orbit", "-p", "2", "-q", "3", "-c", "9", "--w0", &a, "--y0", "0", "--format", "json"], "orbit");
    assert_eq!(o["stationary"], true);
    assert_eq!(o["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn p1_positive_scan_is_constant() {
    let d = json(
        &["period-scan", "-p", "1", "-q", "2", "-c", "0", "--kind", "positive", "--from", "0.05", "--to", "0.95", "--points", "10", "--spacing", "linear", "--format", "json"],
        "period-scan",
    );
    assert_eq!(d["verdict"], "constant");
    for r in d["rows"].as_array().unwrap() {
        assert!((f(&r["period"]) - std::f64::consts::TAU).abs() < 1e-8);
    }
}

#[test]
fn duffing_scan_is_decreasing() {
    let out = sepsol(&["period-scan", "-p", "2", "-q", "3", "-c", "0", "--from", "0.01", "--to", "100", "--points", "12"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("# verdict: decreasing")), "{text}");
    assert_eq!(csv_rows(&text).len(), 12);
}

#[test]
fn solve_set_duffing() {
    let d = json(&["solve-set", "-p", "2", "-q", "3", "-c", "0"], "solve-set");
    assert_eq!(ks(&d["sign_changing"]), [2, 3, 4, 5, 6]);
    assert!(d["positive"].as_array().unwrap().is_empty());
    assert!(d["failures"].as_array().unwrap().is_empty());
}

#[test]
fn solve_set_positive_modes() {
    let d = json(&["solve-set", "-p", "2", "-q", "3", "-c", "9", "--k-max", "3"], "solve-set");
    assert_eq!(ks(&d["positive"]), [1, 2, 3]);
    assert_eq!(ks(&d["sign_changing"]), [1, 2, 3]);
}

#[test]
fn solve_set_p1_single_positive_mode() {
    for q in ["2", "0.5"] {
        let d = json(&["solve-set", "-p", "1", "-q", q, "-c", "3"], "solve-set");
        assert_eq!(ks(&d["positive"]), [3]);
        let want = 4f64.powf(1.0 / q.parse::<f64>().unwrap());
        let constants = d["constants"].as_array().unwrap();
        assert!(constants.iter().any(|c| (f(c) - want).abs() < 1e-12), "{constants:?}");
    }
}

#[test]
fn solve_set_writes_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let out = sepsol(&["solve-set", "-p", "2", "-q", "3", "-c", "9", "--k-max", "2", "--profile-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let mut names: Vec<String> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["positive-k1.csv", "positive-k2.csv", "positive-k3.csv", "sign-changing-k1.csv", "sign-changing-k2.csv"]);
    let text = fs::read_to_string(dir.path().join("sign-changing-k2.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("sigma,omega"));
    let omega: Vec<f64> = csv_rows(&text).iter().map(|r| r[1].parse().unwrap()).collect();
    let changes = omega.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    assert!((3..=4).contains(&changes), "{changes} sign changes");
}

#[test]
fn sector_examples() {
    let pi = std::f64::consts::PI.to_string();
    let d = json(&["sector", "-p", "2", "-q", "3", "--theta", &pi], "sector");
    assert!((f(&d["beta_s"]) - 1.0).abs() < 1e-12);
    assert_eq!(d["exists"], false);
    assert_eq!(json(&["sector", "-p", "2", "-q", "5", "--theta", &pi], "sector")["exists"], true);
    for theta in ["0.3", "3", "6.2"] {
        let d = json(&["sector", "-p", "1.5", "-q", "2", "--theta", theta], "sector");
        assert_eq!(d["exists"], true, "theta = {theta}");
        assert_eq!(d["unconditional"], true);
    }
}

#[test]
fn runs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.cfg");
    fs::write(&cfg, "# tighter run\nrel_tol = 1e-11\nabs_tol = 1e-13\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    for args in [
        &["period-scan", "-p", "3", "-q", "5", "-c", "200", "--from", "0.1", "--to", "10", "--points", "6", "--config", cfg][..],
        &["solve-set", "-p", "1", "-q", "2", "-c", "3", "--config", cfg],
        &["orbit", "-p", "1.5", "-q", "5", "-c", "1", "--w0", "0.3", "--y0", "0.2", "--config", cfg],
    ] {
        let (a, b) = (sepsol(args), sepsol(args));
        assert_eq!(code(&a), 0, "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn config_file_changes_the_integration() {
    let dir = tempfile::tempdir().unwrap();
    let loose = dir.path().join("loose.cfg");
    fs::write(&loose, "rel_tol = 1e-4\nabs_tol = 1e-6\n").unwrap();
    let base = ["period-scan", "-p", "2", "-q", "3", "--grid", "1", "--format", "json"];
    let period = |extra: &[&str]| {
        let args: Vec<&str> = base.iter().copied().chain(extra.iter().copied()).collect();
        f(&json(&args, "period-scan")["rows"][0]["period"])
    };
    let default = period(&[]);
    let coarse = period(&["--config", loose.to_str().unwrap()]);
    let overridden = period(&["--config", loose.to_str().unwrap(), "--tol-rel", "1e-10", "--tol-abs", "1e-12"]);
    assert_ne!(default, coarse);
    assert!((default - coarse).abs() < 1e-3);
    assert!((default - overridden).abs() < 1e-8);

    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "rel_tol = fast\n").unwrap();
    assert_eq!(code(&sepsol(&["params", "-p", "2", "-q", "3", "--config", bad.to_str().unwrap()])), 2);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("params.json");
    let out = sepsol(&["params", "-p", "2", "-q", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let d: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(d["schema"], "sepsol.params.v1");
}

#[test]
fn check_flag_reports_each_criterion() {
    for (args, ids) in [
        (&["params", "--paper-check"][..], &["[ 1]", "[ 2]", "[ 3]"][..]),
        (&["sector", "--paper-check"], &["[10]"]),
        (&["solve-set", "--paper-check"], &["[ 9]"]),
    ] {
        let out = sepsol(args);
        assert_eq!(code(&out), 0, "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        for id in ids {
            assert!(err.lines().any(|l| l.starts_with("PASS") && l.contains(id)), "{args:?}: {err}");
        }
    }
}
