use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn specs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("specs")
}

fn spec(name: &str) -> String {
    specs().join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_me-kit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

/// Compares stdout with `tests/golden/<name>`; `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, args: &[&str]) {
    let out = run(args);
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    let got = format!("exit {}\n{}", out.status.code().unwrap_or(-1), stdout(&out));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &got).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(got, want, "golden mismatch for {name}");
}

#[test]
fn channel_rayleigh_summary() {
    let o = run(&["channel", "--spec", &spec("rayleigh.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["degree"], 1);
    assert!((f(&v["mean"]) - 1.0).abs() < 1e-12);
    assert_eq!(v["valid"], true);
    assert_eq!(v["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn channel_oscillatory_mean() {
    let o = run(&["channel", "--spec", &spec("oscillatory.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["degree"], 3);
    // (50/49)(1 - Re (1 - 7i)^{-2})
    assert!((f(&v["mean"]) - 1.04).abs() < 1e-12);
}

#[test]
fn channel_point_mass_rejected() {
    let o = run(&["channel", "--spec", &spec("bad_p1q1.json")]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    let fails: Vec<&str> = v["failures"].as_array().unwrap().iter().filter_map(|x| x.as_str()).collect();
    assert!(fails.contains(&"p1_eq_q1"), "{fails:?}");
}

#[test]
fn malformed_json_reports_position() {
    let dir = std::env::temp_dir().join(format!("me-kit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("broken.json");
    std::fs::write(&p, "{\n  \"kind\": \"rayleigh\",\n  \"params\": {\"S\": }\n}\n").unwrap();
    let o = run(&["channel", "--spec", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
    let p = dir.join("unknown.json");
    std::fs::write(&p, r#"{"kind": "rayleigh", "params": {"T": 1}}"#).unwrap();
    let o = run(&["channel", "--spec", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("S"));
}

#[test]
fn outage_sweep_decreasing() {
    let o = run(&["metric", "--metric", "outage", "--spec", &spec("rayleigh.json"), "--R", "1", "--sweep", "S=0.1:10:20", "--out", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(str::to_owned).collect();
    assert_eq!(
        header,
        ["metric", "R", "S", "K", "theta", "a", "t", "q", "M", "value", "path", "imag_residual", "quad_error", "warnings"]
    );
    let values: Vec<f64> = rdr.records().map(|r| r.unwrap()[9].parse().unwrap()).collect();
    assert_eq!(values.len(), 20);
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
}

#[test]
fn harq_two_transmissions() {
    let o = run(&["metric", "--metric", "harq", "--K", "2", "--spec", &spec("rayleigh.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!((f(&v[0]["value"]) - 0.267814).abs() < 1e-6);
    assert_eq!(v[0]["K"], 2);
}

#[test]
fn coherent_bpsk() {
    let o = run(&["metric", "--metric", "ber", "--detection", "coherent", "--a", "1", "--spec", &spec("rayleigh.json")]);
    let v = json(&o);
    assert!((f(&v[0]["value"]) - 0.146447).abs() < 1e-6);
}

#[test]
fn verify_outage_passes() {
    let o = run(&["verify", "--metric", "outage", "--spec", &spec("rayleigh.json"), "--n", "1000000", "--seed", "42"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v = json(&o);
    assert!(f(&v["z"]).abs() < 4.0);
}

#[test]
fn verify_wrong_convention_fails() {
    let args = ["verify", "--metric", "outage", "--spec", &spec("rayleigh_s5.json"), "--Theta-convention", "per-unit-mean"];
    let ok = run(&args);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let mut bad = args.to_vec();
    bad.extend(["--S", "1"]);
    let o = run(&bad);
    assert_eq!(o.status.code(), Some(1));
    assert!(f(&json(&o)["z"]).abs() > 4.0);
}

#[test]
fn verify_is_repeatable() {
    let args = ["verify", "--metric", "harq_truncated", "--K", "3", "--spec", &spec("nakagami2.json"), "--n", "200000", "--seed", "9"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
}

#[test]
fn verify_many_metrics() {
    let cases: Vec<Vec<String>> = vec![
        vec!["arq".into(), spec("nakagami2.json")],
        vec!["harq_persistent".into(), spec("nakagami2.json")],
        vec!["ncbr".into(), spec("ncbr.json")],
        vec!["arq_interference".into(), spec("interference.json")],
        vec!["pep".into(), spec("pep.json")],
        vec!["eff_capacity".into(), spec("nakagami2.json")],
        vec!["ergodic".into(), spec("oscillatory.json")],
    ];
    for c in cases {
        let o = run(&["verify", "--metric", &c[0], "--spec", &c[1], "--n", "300000", "--seed", "5"]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", c[0], stdout(&o));
    }
    let o = run(&["verify", "--metric", "sm_mimo_outage", "--R", "2", "--n", "300000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn verify_without_oracle_is_usage_error() {
    let o = run(&["verify", "--metric", "entropy", "--spec", &spec("rayleigh.json")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn optimize_rows_are_stationary() {
    let o = run(&["optimize", "--metric", "arq", "--spec", &spec("rayleigh.json"), "--theta-sweep", "0.05:0.8:16"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = json(&o);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 16);
    for r in rows {
        assert_eq!(r["interior"], true);
        assert!(f(&r["stationarity"]) < 1e-4, "{r}");
    }
}

#[test]
fn optimize_flags_branch_points() {
    let o = run(&["optimize", "--metric", "arq", "--spec", &spec("rayleigh.json"), "--theta-sweep", "0.5:3:6", "--out", "csv"]);
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut flagged = 0;
    for r in rdr.records() {
        let r = r.unwrap();
        if &r[2] == "false" {
            flagged += 1;
            assert!(r[3].is_empty() && r[4].is_empty());
        }
    }
    assert!(flagged > 0);
}

#[test]
fn persistent_harq_with_interference_rejected() {
    let o = run(&["metric", "--metric", "harq_persistent", "--spec", &spec("interference.json")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_key_must_apply() {
    let o = run(&["metric", "--metric", "outage", "--spec", &spec("rayleigh.json"), "--sweep", "K=1:3:3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn golden_outputs() {
    golden("channel_oscillatory.txt", &["channel", "--spec", &spec("oscillatory.json")]);
    golden("channel_bad.txt", &["channel", "--spec", &spec("bad_p1q1.json")]);
    golden(
        "metric_outage_sweep.csv",
        &["metric", "--metric", "outage", "--spec", &spec("rayleigh.json"), "--sweep", "S=0.1:10:20", "--out", "csv"],
    );
    golden(
        "metric_interference.txt",
        &["metric", "--metric", "arq_interference", "--spec", &spec("interference.json"), "--path", "van_loan"],
    );
    golden("metric_lloyd_max.txt", &["metric", "--metric", "lloyd_max", "--M", "4", "--spec", &spec("oscillatory.json")]);
    golden(
        "verify_outage.txt",
        &["verify", "--metric", "outage", "--spec", &spec("rayleigh.json"), "--n", "1000000", "--seed", "42"],
    );
    golden(
        "optimize_arq.csv",
        &["optimize", "--metric", "arq", "--spec", &spec("rayleigh.json"), "--theta-sweep", "0.1:2:8", "--out", "csv"],
    );
}
