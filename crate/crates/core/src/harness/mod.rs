//! Named, reproducible experiments: parameter validation, output files with digests and a
//! JSON run manifest.

mod experiments;
pub mod params;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
pub use params::{Kind, ParamDef, Params, Value};

/// Result of one embedded assertion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

/// What an experiment body hands back; the harness does all the writing.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<(String, Vec<u8>)>,
    pub checks: Vec<Check>,
    pub replicate_seeds: Vec<u64>,
    pub summary: serde_json::Value,
}

impl Outcome {
    pub fn file(&mut self, name: &str, body: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), body.into()));
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }
}

pub struct Experiment {
    pub name: &'static str,
    /// One-line description of what the experiment reproduces.
    pub anchor: &'static str,
    pub params: &'static [ParamDef],
    pub validate: fn(&Params) -> Result<()>,
    pub run: fn(&Params) -> Result<Outcome>,
}

/// The catalogue in its fixed order.
pub fn experiments() -> &'static [Experiment] {
    experiments::CATALOGUE
}

/// `(name, anchor)` for every registered experiment.
pub fn list_experiments() -> Vec<(&'static str, &'static str)> {
    experiments().iter().map(|e| (e.name, e.anchor)).collect()
}

pub fn find_experiment(name: &str) -> Result<&'static Experiment> {
    experiments()
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| LabError::Parameter(format!("unknown experiment '{name}'; try `perclab list`")))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub params: Params,
    pub output_dir: PathBuf,
}

impl ExperimentSpec {
    /// Resolves and validates the parameters; `config` is the text of a `key = value` file.
    pub fn new(name: &str, config: Option<&str>, overrides: &[(String, String)], output_dir: impl AsRef<Path>) -> Result<ExperimentSpec> {
        let exp = find_experiment(name)?;
        let cfg = match config {
            Some(text) => params::parse_config(text)?,
            None => Vec::new(),
        };
        let params = Params::resolve(exp.params, &cfg, overrides)?;
        if params.int("seed") < 0 {
            return Err(LabError::Parameter("seed must be nonnegative".into()));
        }
        (exp.validate)(&params)?;
        Ok(ExperimentSpec { name: name.to_string(), params, output_dir: output_dir.as_ref().to_path_buf() })
    }

    /// Defaults only.
    pub fn defaults(name: &str, output_dir: impl AsRef<Path>) -> Result<ExperimentSpec> {
        Self::new(name, None, &[], output_dir)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub anchor: String,
    pub tool_version: String,
    pub params: Params,
    pub seed: u64,
    pub replicate_seeds: Vec<u64>,
    pub wall_clock_seconds: f64,
    /// File name to SHA-256 digest (hex) of its bytes.
    pub outputs: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub summary: serde_json::Value,
}

impl RunManifest {
    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs the experiment, writes its outputs and `manifest.json` into the output directory
/// and returns the manifest. Nothing is written when the body fails.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunManifest> {
    let exp = find_experiment(&spec.name)?;
    (exp.validate)(&spec.params)?;
    let start = Instant::now();
    let out = (exp.run)(&spec.params)?;
    let wall = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(&spec.output_dir)?;
    let mut outputs = BTreeMap::new();
    for (name, body) in &out.files {
        if name == "manifest.json" || name.contains('/') || name.contains('\\') {
            return Err(LabError::Internal(format!("bad output file name {name}")));
        }
        std::fs::write(spec.output_dir.join(name), body)?;
        outputs.insert(name.clone(), sha256_hex(body));
    }
    let passed = out.checks.iter().all(|c| c.passed);
    let manifest = RunManifest {
        experiment: exp.name.to_string(),
        anchor: exp.anchor.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        params: spec.params.clone(),
        seed: spec.params.seed(),
        replicate_seeds: out.replicate_seeds,
        wall_clock_seconds: wall,
        outputs,
        checks: out.checks,
        passed,
        summary: out.summary,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| LabError::Internal(e.to_string()))?;
    std::fs::write(spec.output_dir.join("manifest.json"), json + "\n")?;
    Ok(manifest)
}
