//! End-to-end behaviour of the binary: CSV schema, config handling, the
//! oracle subcommand and failure modes.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wpcr-sim"))
}

#[test]
fn simulate_writes_schema_conformant_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    std::fs::write(
        &cfg,
        "trials = 50\nseed = 3\nschemes = mrt_mrc,proposed\nmax_inner = 5\nmax_outer = 2\n\
         sweep_variable = p_rs_dbm\nsweep_values = 18,20\n",
    )
    .unwrap();
    let out = dir.path().join("r.csv");
    let status = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--output")
        .arg(&out)
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "scheme,sweep_variable,sweep_value,trials,outages,outage_prob,ci_low,ci_high,seed"
    );
    // 2 schemes x 2 sweep points.
    assert_eq!(lines.len(), 5);
    for row in &lines[1..] {
        assert_eq!(row.split(',').count(), 9);
    }
    // Sorted by scheme then value.
    assert!(lines[1].starts_with("mrt_mrc,p_rs_dbm,18"));
    assert!(lines[2].starts_with("mrt_mrc,p_rs_dbm,20"));
    assert!(lines[3].starts_with("proposed,p_rs_dbm,18"));
}

#[test]
fn trials_and_seed_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.cfg");
    std::fs::write(&cfg, "trials = 7\nschemes = mrt_mrc\n").unwrap();
    let out = dir.path().join("o.csv");
    let status = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--trials", "11", "--seed", "99"])
        .arg("--output")
        .arg(&out)
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let row = text.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[3], "11", "trials override");
    assert_eq!(cols[8], "99", "seed override");
}

#[test]
fn invalid_config_is_rejected_with_key_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "d = 2\n").unwrap();
    let output = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("multi-stream unsupported"), "stderr: {err}");
}

#[test]
fn unknown_preset_fails() {
    let output = bin().args(["preset", "fig7"]).output().unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("fig7"));
}

#[test]
fn oracle_subcommand_reports_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("o.cfg");
    std::fs::write(&cfg, "trials = 5\nseed = 12\n").unwrap();
    let output = bin()
        .args(["oracle", "--config"])
        .arg(&cfg)
        .args(["--grid", "21"])
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(output.status.success(), "stdout: {text}");
    assert!(text.contains("max relative deviation"), "stdout: {text}");
    assert!(text.contains("OK"), "stdout: {text}");
}
