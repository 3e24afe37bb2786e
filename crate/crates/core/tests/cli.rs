use std::process::Command;
use wsnloc::config::SimConfig;
use wsnloc::experiments::CSV_HEADER;

fn wsnloc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_wsnloc")).args(args).output().unwrap()
}

#[test]
fn default_config_round_trips() {
    let out = wsnloc(&["--print-default-config"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(SimConfig::from_toml(&text).unwrap(), SimConfig::default());
}

#[test]
fn run_writes_csv_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "node_count = 40\nrounds = 4\n").unwrap();
    let csv = dir.path().join("out.csv");
    let trace = dir.path().join("trace.jsonl");
    let out = wsnloc(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--schemes",
        "hybrid,diffusion",
        "--reps",
        "2",
        "--grid-res",
        "4",
        "--out",
        csv.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(lines.count(), 4);

    let trace = std::fs::read_to_string(&trace).unwrap();
    let records: Vec<serde_json::Value> = trace.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let net_size = 40 + 1 + 9;
    assert_eq!(records.len(), 4 * net_size);
    for key in ["round", "node", "role", "power", "energy", "events"] {
        assert!(records[0].get(key).is_some(), "{key}");
    }
}

#[test]
fn unknown_config_key_fails_with_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "comm_rnage = 20\n").unwrap();
    let out = wsnloc(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("comm_rnage"));
}

#[test]
fn bad_arguments_are_reported() {
    let out = wsnloc(&["sweep", "--preset", "fig9"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fig9"));
    let out = wsnloc(&["run", "--schemes", "hybrid,sdp"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("sdp"));
    let out = wsnloc(&["run", "--reps", "0"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("reps"));
}

#[test]
fn explicit_sweep_values() {
    let out = wsnloc(&[
        "sweep", "--param", "comm_range", "--values", "25,35", "--reps", "1", "--schemes", "bounding_box",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(values, ["25", "35"]);
}
