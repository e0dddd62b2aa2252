//! End-to-end tests of the `redlab` binary: CLI grammar, exit codes, output
//! files, byte reproducibility, and manifest completeness.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn redlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_redlab"))
}

fn scratch(tag: &str) -> PathBuf {
    let mut dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.push(format!("cli-{tag}"));
    fs::remove_dir_all(&dir).ok();
    dir
}

fn run_ok(args: &[&str]) -> Output {
    let out = redlab().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "args {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

// fast pearle settings shared by the CLI tests; max_steps is deliberately
// binding so that its mutation shows up in the outputs
const FAST_PEARLE: &[(&str, &str)] = &[
    ("p0", "0.36,0.64"),
    ("lambda", "1.0"),
    ("num_sources", "1"),
    ("dt", "0.001"),
    ("max_steps", "300"),
    ("runs", "120"),
    ("seed", "42"),
    ("mode", "auto"),
];

fn run_pearle_with(tag: &str, mutated: Option<(&str, &str)>) -> (Vec<u8>, String) {
    let dir = scratch(tag);
    let mut args: Vec<String> = vec!["run".into(), "pearle".into()];
    for (k, v) in FAST_PEARLE {
        let v = match mutated {
            Some((mk, mv)) if mk == *k => mv,
            _ => v,
        };
        args.push(format!("--{k}"));
        args.push(v.to_string());
    }
    args.push("--out".into());
    args.push(dir.display().to_string());
    let args_ref: Vec<&str> = args.iter().map(String::as_str).collect();
    run_ok(&args_ref);
    let csv = fs::read(dir.join("trajectories.csv")).unwrap();
    let manifest = fs::read_to_string(dir.join("manifest.txt")).unwrap();
    (csv, manifest)
}

#[test]
fn identical_invocations_produce_identical_bytes() {
    let (csv_a, manifest_a) = run_pearle_with("repro-a", None);
    let (csv_b, manifest_b) = run_pearle_with("repro-b", None);
    assert_eq!(csv_a, csv_b);
    assert_eq!(manifest_a, manifest_b);
}

#[test]
fn every_pearle_parameter_is_in_the_manifest_and_effective() {
    let (baseline_csv, manifest) = run_pearle_with("manifest-base", None);
    for (key, _) in FAST_PEARLE {
        assert!(
            manifest.contains(&format!("{key} = ")),
            "manifest missing key {key}:\n{manifest}"
        );
    }
    let mutations: &[(&str, &str)] = &[
        ("p0", "0.35,0.65"),
        ("lambda", "1.5"),
        ("num_sources", "2"),
        ("dt", "0.0015"),
        ("max_steps", "301"),
        ("runs", "121"),
        ("seed", "43"),
        ("mode", "general"),
    ];
    for (key, value) in mutations {
        let (csv, mutated_manifest) = run_pearle_with(&format!("mut-{key}"), Some((key, value)));
        assert_ne!(
            csv, baseline_csv,
            "mutating `{key}` did not change the trajectory output"
        );
        assert!(
            mutated_manifest.contains(&format!("{key} = {value}")),
            "mutated manifest does not record {key} = {value}"
        );
    }
}

#[test]
fn unknown_scenario_exits_1() {
    let out = redlab().args(["run", "warp-drive"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown scenario"));
}

#[test]
fn config_parse_error_exits_2_with_line_diagnostics() {
    let dir = scratch("parse-error");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("broken.conf");
    fs::write(&cfg, "[pearle]\nthis line has no equals sign\n").unwrap();
    let out = redlab()
        .args(["run", "pearle", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
}

#[test]
fn bad_values_exit_2_and_name_the_key() {
    let out = redlab()
        .args(["run", "pearle", "--lambda", "-3", "--runs", "120"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("lambda"), "stderr: {stderr}");
    assert!(stderr.contains("intensity"), "stderr: {stderr}");
}

#[test]
fn invariant_violation_during_run_exits_3() {
    let dir = scratch("unstable");
    // an intentionally unstable block integration: large coupling and step
    let out = redlab()
        .args([
            "run",
            "blocks",
            "--coupling",
            "60",
            "--dt",
            "0.5",
            "--t_final",
            "50",
            "--out",
            dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("invariant"), "stderr: {stderr}");
}

#[test]
fn validate_accepts_the_default_config() {
    let dir = scratch("validate-ok");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("default.conf");
    fs::write(&cfg, reduction_lab::config::DEFAULT_CONFIG).unwrap();
    let out = run_ok(&["validate", "--config", cfg.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("ok"));
}

#[test]
fn validate_reports_diagnostics_and_exits_2() {
    let dir = scratch("validate-bad");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.conf");
    fs::write(
        &cfg,
        "[pearle]\np0 = 0.4,0.5\nlambda = -1\n\n[epr]\nlambda_a = -2\n",
    )
    .unwrap();
    let out = redlab()
        .args(["validate", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("p0"), "stdout: {stdout}");
    assert!(stdout.contains("lambda"), "stdout: {stdout}");
    assert!(stdout.contains("lambda_a"), "stdout: {stdout}");
}

#[test]
fn missing_config_file_exits_4() {
    let out = redlab()
        .args(["validate", "--config", "/definitely/not/here.conf"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn epr_scenario_reports_contingency_table() {
    let dir = scratch("epr");
    let out = run_ok(&[
        "run",
        "epr",
        "--runs",
        "300",
        "--dt",
        "0.001",
        "--out",
        dir.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("contingency"), "{stdout}");
    let csv = fs::read_to_string(dir.join("epr_runs.csv")).unwrap();
    assert!(csv.starts_with("run,outcome_channel,absorption_time\n"));
    assert_eq!(csv.lines().count(), 301);
    // outcomes only on the live channels
    for line in csv.lines().skip(1) {
        let outcome: i64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(outcome == 0 || outcome == 1);
    }
}

#[test]
fn crosscheck_scenario_passes_and_reports_the_flag() {
    let dir = scratch("crosscheck");
    let out = run_ok(&[
        "run",
        "crosscheck",
        "--runs",
        "20000",
        "--dt",
        "0.001",
        "--resolution",
        "80",
        "--target_interior",
        "0.001",
        "--out",
        dir.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("crosscheck PASS"), "{stdout}");
    let csv = fs::read_to_string(dir.join("crosscheck.csv")).unwrap();
    assert!(csv.starts_with("source,resolution,estimate,error_bound\n"));
}
