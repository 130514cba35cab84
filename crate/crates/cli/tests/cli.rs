use std::path::Path;
use std::process::{Command, Output};

fn noonamp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noonamp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn thresholds_report_closed_forms() {
    let o = noonamp(&["thresholds", "--r", "0.5", "--eta", "0"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["symmetric"].as_f64().unwrap() - 1.46211715726).abs() < 1e-10);
    assert_eq!(v["asymmetric"], "unbounded");

    let o = noonamp(&["thresholds", "--r", "0.5", "--eta", "0.5"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["asymmetric"].as_f64().unwrap(), 3.0);
}

#[test]
fn sweep_writes_deterministic_file() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = noonamp(&["sweep", "--family", "noon_asymmetric", "--n", "2,4", "--g2", "1:2:0.25", "--out", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    assert!(text.starts_with("family,n,r,eta,g_squared,log_negativity,"));
    assert_eq!(text.lines().count(), 1 + 2 * 5);
    assert!(text.lines().nth(1).unwrap().starts_with("noon_asymmetric,2,,0,1,1,0.5,-0.5,block,"));
}

#[test]
fn sweep_json_and_comparison_schema() {
    let o = noonamp(&["sweep", "--family", "tmsv_gaussian", "--g2", "1:1.5:0.1", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 6);
    let keys: Vec<&String> = v[0].as_object().unwrap().keys().collect();
    assert_eq!(keys[0], "family");
    assert_eq!(keys[12], "oracle_trace_distance");

    let o = noonamp(&["sweep", "--family", "tmsv_gaussian", "--g2", "1:1.5:0.1", "--schema", "comparison"]);
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "state_family,r,eta,g_squared,log_negativity");
    assert_eq!(text.lines().last().unwrap(), "tmsv_gaussian,0.5,0,1.5,0");
}

#[test]
fn method_both_succeeds_on_agreeing_methods() {
    let o = noonamp(&["sweep", "--n", "2", "--g2", "1:1.5:0.5", "--method", "both"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().skip(1).all(|l| l.contains(",both,")));
}

#[test]
fn configuration_errors_exit_two_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    let out_s = out.to_str().unwrap();
    for args in [
        vec!["sweep", "--g2", "0.5:2:0.1", "--out", out_s],
        vec!["sweep", "--n", "2", "--cutoff", "2,2", "--g2", "1:2:0.5", "--out", out_s],
        vec!["sweep", "--family", "photon_added_tmsv", "--eta", "0.1", "--out", out_s],
        vec!["sweep", "--family", "nope"],
        vec!["thresholds", "--eta", "-1"],
    ] {
        let o = noonamp(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(!out.exists());
}

#[test]
fn runtime_failure_exits_one_and_leaves_no_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("leak.csv");
    // noisy amplifier at a tiny cutoff: the master equation leaks through the top level
    let o = noonamp(&["sweep", "--n", "2", "--eta", "0.2", "--cutoff", "4,4", "--g2", "1:2:0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("increase the cutoff"));
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn verify_passes_by_default_and_fails_under_truncation() {
    let o = noonamp(&["verify"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 10);

    let o = noonamp(&["verify", "--cutoff", "3,3"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let deficit = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "trace_deficit").unwrap();
    assert_eq!(deficit["passed"], false);
    assert!(String::from_utf8_lossy(&o.stderr).contains("check failed: trace_deficit"));
}

#[test]
fn qfunc_dumps_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q.csv");
    let o = noonamp(&["qfunc", "--n", "2", "--g2", "1.5", "--points", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(Path::new(&out)).unwrap();
    assert_eq!(text.lines().next().unwrap(), "re_alpha,im_alpha,re_beta,im_beta,q_value");
    assert_eq!(text.lines().count(), 1 + 81);
    for line in text.lines().skip(1) {
        let q: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(q >= 0.0);
    }
}
