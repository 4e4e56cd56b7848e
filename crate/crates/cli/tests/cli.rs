use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ncauto_core::verify::CheckReport;

fn ncauto(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncauto"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn ncauto")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn empty_suite_exits_zero_with_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "suite.json", r#"{"suite": []}"#);
    let out = ncauto(&["run", "--config", &config, "--out", "r.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        fs::read_to_string(dir.path().join("r.json")).unwrap(),
        "[]\n"
    );
}

#[test]
fn kernel_identity_suite_writes_one_passing_record() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "suite.json",
        r#"{"suite": [{"check": "kernel_identity", "params": {"p": 2, "q": 2, "levels": [2]}}]}"#,
    );
    let out = ncauto(&["run", "--config", &config, "--out", "r.json"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let reports: Vec<CheckReport> =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(reports.len(), 1);
    assert!(reports[0].passed);
    assert_eq!(reports[0].seed, 0x5EED);
    assert_eq!(reports[0].trials, 100);
    assert!(String::from_utf8_lossy(&out.stdout).contains("1/1 checks passed"));
}

#[test]
fn invalid_check_name_exits_two_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "suite.json",
        r#"{"suite": [{"check": "kernel", "params": {}}]}"#,
    );
    let out = ncauto(&["run", "--config", &config], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("suite[0]") && stderr.contains("kernel"),
        "{stderr}"
    );
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn failing_check_exits_one_and_still_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    // The block transpose is not an nc map; without `expect_violation` the
    // axiom check fails.
    let config = write(
        dir.path(),
        "suite.json",
        r#"{"seed": 3, "suite": [
            {"check": "cb_transpose", "params": {"p": 1, "level": 2}, "trials": 10},
            {"check": "nc_axioms", "trials": 10, "params": {
                "map": {"variant": "transpose_amplification", "params": {"p": 2}},
                "domain": {"kind": "matrix_polydisk", "params": {"d": 1}, "levels": {"generators": [2]}},
                "levels": [2, 4]}}
        ]}"#,
    );
    let out = ncauto(
        &[
            "run", "--config", &config, "--format", "csv", "--out", "r.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let csv_text = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let lines: Vec<&str> = csv_text.lines().collect();
    assert_eq!(
        lines[0],
        "check,seed,trials,max_residual,tolerance,passed,runtime_ms"
    );
    assert!(lines[1].starts_with("cb_transpose,3,11,") && lines[1].contains(",true,"));
    assert!(lines[2].starts_with("nc_axioms,3,10,") && lines[2].contains(",false,"));
}

#[test]
fn membership_and_apply() {
    let dir = tempfile::tempdir().unwrap();
    let domain = write(
        dir.path(),
        "domain.json",
        r#"{"kind": "rpq_ball", "params": {"p": 1, "q": 2}}"#,
    );
    let point = write(
        dir.path(),
        "point.json",
        r#"{"vars": [[[[0.6, 0]]], [[[0, 0.6]]]]}"#,
    );
    let out = ncauto(
        &["membership", "--domain", &domain, "--point", &point],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let verdict: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(verdict["member"], "yes");
    // |(0.6, 0.6i)| = 0.6 sqrt(2)
    assert!((verdict["margin"].as_f64().unwrap() - (1.0 - 0.6 * 2f64.sqrt())).abs() < 1e-12);

    let map = write(
        dir.path(),
        "map.json",
        r#"{"variant": "counterexample_map", "params": {"h": [[0, 0], [1, 0]]}}"#,
    );
    let triple = write(
        dir.path(),
        "triple.json",
        r#"{"vars": [[[[0,0],[0.9,0]],[[0,0],[0,0]]], [[[0,0],[0,0]],[[0.9,0],[0,0]]], [[[0,0],[0,0]],[[0,0],[0,0]]]]}"#,
    );
    let out = ncauto(&["apply", "--map", &map, "--point", &triple], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let image: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let z = &image["vars"][2];
    assert!((z[0][0][0].as_f64().unwrap() - 0.81).abs() < 1e-15);
    assert!((z[1][1][0].as_f64().unwrap() + 0.81).abs() < 1e-15);

    let outside = write(
        dir.path(),
        "outside.json",
        r#"{"vars": [[[[2, 0]]], [[[0, 0]]]]}"#,
    );
    let ha = write(
        dir.path(),
        "ha.json",
        r#"{"variant": "ha", "params": {"a": [[[0.1, 0], [0.2, 0]]]}}"#,
    );
    assert_eq!(
        ncauto(&["apply", "--map", &ha, "--point", &outside], dir.path())
            .status
            .code(),
        Some(1)
    );
    let broken = write(
        dir.path(),
        "broken.json",
        r#"{"variant": "ha", "params": {"a": 3}}"#,
    );
    assert_eq!(
        ncauto(
            &["apply", "--map", &broken, "--point", &outside],
            dir.path()
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn paper_suite_config_prints_and_parses() {
    let dir = tempfile::tempdir().unwrap();
    let out = ncauto(&["paper-suite", "--print-config"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let config = ncauto_cli::parse_config(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(config, ncauto_cli::builtin_paper_suite());
}
