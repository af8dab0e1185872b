use std::path::Path;
use std::process::{Command, Output};

fn bathsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bathsim")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bell_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = bathsim(&["bell", "--config", "bell_single_channel", "--out", path_arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    let f = json["steady_fidelity"].as_f64().unwrap();
    assert!((0.9..1.0).contains(&f), "{f}");
    assert!(dir.path().join("traces.csv").exists());
    assert!(stdout(&out).contains("steady fidelity"));
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = bathsim(&["sweep", "--axis", "n_bar", "--values", "0.1:2.0:20", "--out", path_arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("n_bar,steady_fidelity"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r.ends_with(',')), "no row should carry an error");
}

#[test]
fn rates_prints_a_table() {
    let out = bathsim(&["rates"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].contains("forward") && lines[0].contains("ratio"));
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("R1") && lines[2].starts_with("R2"));

    let json = bathsim(&["rates", "--json"]);
    let rows: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
}

#[test]
fn effective_prints_fidelities() {
    let out = bathsim(&["effective"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("exact") && text.contains("estimate   0.9167"), "{text}");
}

#[test]
fn bad_flag_is_a_usage_error() {
    let out = bathsim(&["bell", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let out = bathsim(&["sweep", "--axis", "n_bar"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("broken.json");
    let text = bathsim_core_json().replace("\"kappa_mhz\": 1.1", "\"kappa_mhz\": -1.1");
    std::fs::write(&cfg, text).unwrap();
    let out = bathsim(&["bell", "--config", path_arg(&cfg), "--out", path_arg(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("resonators[0].kappa_mhz"), "{err}");

    let out = bathsim(&["bell", "--config", "no_such_scenario"]);
    assert_eq!(out.status.code(), Some(1));
    let out = bathsim(&["sweep", "--axis", "omega", "--values", "1,2"]);
    assert_eq!(out.status.code(), Some(1));
}

fn bathsim_core_json() -> String {
    bathsim::device::BELL_JSON.to_string()
}
