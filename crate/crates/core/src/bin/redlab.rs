//! Thin command-line front end.
//!
//! ```text
//! redlab run <scenario> [--config FILE] [--out DIR] [--seed U64] [--key value ...]
//! redlab validate --config FILE
//! ```
//!
//! Scenarios: blocks, proximity, pearle, fokker-planck, epr, crosscheck.
//! Unrecognized `--key value` pairs override config keys of the scenario's
//! section. The default output directory comes from `REDLAB_OUT` (falling
//! back to `./redlab-out`). Exit codes: 0 success, 1 unknown scenario,
//! 2 config problems, 3 invariant violation during the run, 4 i/o.

use std::path::PathBuf;
use std::process::ExitCode;

use reduction_lab::scenario::{run_scenario, validate_config, RunError, RunRequest, OUT_DIR_ENV};
use reduction_lab::Scenario;

const USAGE: &str = "usage:
  redlab run <scenario> [--config FILE] [--out DIR] [--seed U64] [--key value ...]
  redlab validate --config FILE

scenarios: blocks | proximity | pearle | fokker-planck | epr | crosscheck";

fn fail(code: i32, message: &str) -> ExitCode {
    eprintln!("redlab: {message}");
    ExitCode::from(code.clamp(0, 255) as u8)
}

fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("redlab-out"))
}

fn read_config(path: &str) -> Result<String, RunError> {
    Ok(std::fs::read_to_string(path)?)
}

fn cmd_run(args: &[String]) -> Result<(), RunError> {
    let scenario_name = args
        .first()
        .ok_or_else(|| RunError::UnknownScenario("<missing>".to_string()))?;
    let scenario: Scenario = scenario_name.parse()?;

    let mut config_text = None;
    let mut out_dir = default_out_dir();
    let mut seed = None;
    let mut overrides = Vec::new();
    let mut i = 1;
    while i < args.len() {
        let flag = &args[i];
        let key = flag.strip_prefix("--").ok_or_else(|| {
            RunError::Config(vec![reduction_lab::config::Diagnostic {
                line: None,
                key: None,
                message: format!("expected `--key value`, got `{flag}`"),
            }])
        })?;
        let value = args.get(i + 1).ok_or_else(|| {
            RunError::Config(vec![reduction_lab::config::Diagnostic {
                line: None,
                key: Some(key.to_string()),
                message: "missing value".to_string(),
            }])
        })?;
        match key {
            "config" => config_text = Some(read_config(value)?),
            "out" => out_dir = PathBuf::from(value),
            "seed" => {
                seed = Some(value.parse::<u64>().map_err(|_| {
                    RunError::Config(vec![reduction_lab::config::Diagnostic {
                        line: None,
                        key: Some("seed".to_string()),
                        message: format!("`{value}` is not a u64"),
                    }])
                })?)
            }
            other => overrides.push((other.to_string(), value.clone())),
        }
        i += 2;
    }

    let req = RunRequest {
        scenario,
        config_text,
        overrides,
        seed,
        out_dir: out_dir.clone(),
    };
    let output = run_scenario(&req)?;
    print!("{}", output.summary);
    eprintln!("results in {}", out_dir.display());
    Ok(())
}

fn cmd_validate(args: &[String]) -> Result<bool, RunError> {
    let mut config_path = None;
    let mut i = 0;
    while i < args.len() {
        if args[i] == "--config" {
            config_path = args.get(i + 1).cloned();
            i += 2;
        } else {
            return Err(RunError::Config(vec![reduction_lab::config::Diagnostic {
                line: None,
                key: None,
                message: format!("unexpected argument `{}`", args[i]),
            }]));
        }
    }
    let path = config_path.ok_or_else(|| {
        RunError::Config(vec![reduction_lab::config::Diagnostic {
            line: None,
            key: None,
            message: "validate requires --config FILE".to_string(),
        }])
    })?;
    let text = read_config(&path)?;
    let diags = validate_config(&text)?;
    if diags.is_empty() {
        println!("ok: {path} is valid");
        Ok(true)
    } else {
        for d in &diags {
            println!("{d}");
        }
        Ok(false)
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.first().map(String::as_str) {
        Some("run") => match cmd_run(&args[1..]) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e.exit_code(), &e.to_string()),
        },
        Some("validate") => match cmd_validate(&args[1..]) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(2),
            Err(e) => fail(e.exit_code(), &e.to_string()),
        },
        _ => {
            eprintln!("{USAGE}");
            ExitCode::from(2)
        }
    }
}
