use std::process::Command;

fn timris(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_timris"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn power_budget_prints_both_technologies() {
    let out = timris(&["power-budget", "--trials", "50"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("p_ris_rf_switch_mw = 3.456"));
    assert!(text.contains("p_ris_varactor_mw = 23.680"));
    assert!(text.contains("ratio_db = 8.36"));
}

#[test]
fn ber_sweep_writes_csv_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("ber.csv");
    std::fs::write(&cfg, "# short run\nsnr_db = 0, 20\n").unwrap();
    let status = timris(&[
        "ber-sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "40",
        "--seed",
        "5",
        "--scheme",
        "4,2",
        "--detector",
        "ml",
        "--out",
        out.to_str().unwrap(),
    ])
    .status;
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config=") && lines[0].ends_with(" seed=5"));
    assert_eq!(lines[1], timris::HEADER.join(","));
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("tim,4,2,4,ml,0,"));
}

#[test]
fn worker_count_does_not_change_output() {
    let a = timris(&["harvest-sweep", "--trials", "60", "--workers", "1"]);
    let b = timris(&["harvest-sweep", "--trials", "60", "--workers", "8"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn unknown_config_key_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "slots = 8\nnot_a_key = 1\n").unwrap();
    let out = timris(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2") && err.contains("not_a_key"), "{err}");
}

#[test]
fn validate_passes_on_defaults() {
    let out = timris(&["validate", "--trials", "20"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    assert!(!text.contains("FAIL"));
}
