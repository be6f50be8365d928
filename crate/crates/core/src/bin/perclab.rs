//! `perclab <experiment> [--config file] [--out dir] [--key value]...`
//!
//! Exit status: 0 when every embedded check passes, 1 when a check fails, 2 on an error
//! (in which case nothing is written).

use std::process::ExitCode;

use perclab::harness::{experiments, find_experiment, run_experiment, ExperimentSpec};

const USAGE: &str =
    "usage: perclab list\n       perclab <experiment> [--config FILE] [--out DIR] [--KEY VALUE]...\n       perclab <experiment> --help";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match real_main(&args) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("perclab: {msg}");
            ExitCode::from(2)
        }
    }
}

fn real_main(args: &[String]) -> Result<ExitCode, String> {
    let Some(name) = args.first() else {
        return Err(USAGE.into());
    };
    if name == "list" {
        for e in experiments() {
            println!("{:<24} {}", e.name, e.anchor);
        }
        return Ok(ExitCode::SUCCESS);
    }
    if name == "--help" || name == "-h" {
        println!("{USAGE}");
        return Ok(ExitCode::SUCCESS);
    }
    let exp = find_experiment(name).map_err(|e| e.to_string())?;

    let mut config = None;
    let mut out = None;
    let mut overrides = Vec::new();
    let mut rest = args[1..].iter();
    while let Some(flag) = rest.next() {
        if flag == "--help" || flag == "-h" {
            println!("{}: {}\n", exp.name, exp.anchor);
            for p in exp.params {
                println!("  --{:<16} {:<14} {}", p.key, p.default, p.help);
            }
            return Ok(ExitCode::SUCCESS);
        }
        let key = flag.strip_prefix("--").ok_or_else(|| format!("unexpected argument '{flag}'\n{USAGE}"))?;
        let value = rest.next().ok_or_else(|| format!("--{key} needs a value"))?;
        match key {
            "config" => config = Some(std::fs::read_to_string(value).map_err(|e| format!("{value}: {e}"))?),
            "out" => out = Some(value.clone()),
            _ => overrides.push((key.to_string(), value.clone())),
        }
    }
    let dir = out.unwrap_or_else(|| format!("runs/{}", exp.name));
    let spec = ExperimentSpec::new(name, config.as_deref(), &overrides, &dir).map_err(|e| e.to_string())?;
    let manifest = run_experiment(&spec).map_err(|e| e.to_string())?;

    for c in &manifest.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        if c.detail.is_empty() {
            println!("{tag} {}", c.name);
        } else {
            println!("{tag} {} ({})", c.name, c.detail);
        }
    }
    println!("wrote {} files to {dir} in {:.1}s", manifest.outputs.len() + 1, manifest.wall_clock_seconds);
    Ok(if manifest.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
