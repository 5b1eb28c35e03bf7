//! Experiment orchestration: config files, seeds, replicate fan-out and
//! result files.
//!
//! Replicate `i` of a run with base seed `s` draws from
//! [`stream_rng`](crate::rng::stream_rng)`(s, i)`, and results are merged in
//! replicate order, so outputs do not depend on the number of worker threads.

mod config;
mod exec;
mod output;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{config_err, Result};
use crate::rng::derive_seed;

pub use config::{
    parse_config, parse_config_str, uniform_times, DiagnosticsExperiment, DualExperiment, DualityExperiment,
    Experiment, ForwardExperiment, KernelExperiment, LimitCase, LimitDualExperiment, ModelSpec, PdeExperiment,
    Resolved, RunConfig, ScalingTableExperiment,
};
pub use output::OutputDir;

/// Written before any result file and completed afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    /// SHA-256 of the canonical JSON of the parsed config.
    pub config_hash: String,
    pub version: String,
    pub base_seed: u64,
    pub replicate_seeds: Vec<u64>,
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: Option<f64>,
    pub files: Vec<String>,
}

/// Result of a `--check`-style pass/fail rule attached to an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub checks: Vec<CheckResult>,
    pub dir: PathBuf,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn config_hash(config: &RunConfig) -> Result<String> {
    let canonical = serde_json::to_string(config)?;
    Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
}

fn now() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Runs `config` with at most `jobs` worker threads, writing results into
/// `config.output`.
pub fn run_experiment(config: &RunConfig, jobs: usize) -> Result<RunOutcome> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| config_err(format!("cannot start {jobs} workers: {e}")))?;
    let mut out = OutputDir::create(&config.output)?;
    let mut manifest = RunManifest {
        experiment: config.experiment.name().to_string(),
        config_hash: config_hash(config)?,
        version: env!("CARGO_PKG_VERSION").to_string(),
        base_seed: config.seed,
        replicate_seeds: (0..config.replicates as u64).map(|i| derive_seed(config.seed, i)).collect(),
        started: now(),
        finished: None,
        files: Vec::new(),
    };
    out.write_json("manifest.json", &manifest)?;
    out.write_json("config.json", config)?;
    let checks = match pool.install(|| exec::run(config, &mut out)) {
        Ok(checks) => checks,
        Err(e) => {
            out.cleanup();
            return Err(e);
        }
    };
    manifest.files = out.files().to_vec();
    manifest.finished = Some(now());
    out.write_json("manifest.json", &manifest)?;
    Ok(RunOutcome {
        manifest,
        checks,
        dir: config.output.clone(),
    })
}

/// Parses `path` and applies command-line overrides.
pub fn load_config(path: &Path, seed: Option<u64>, output: Option<PathBuf>) -> Result<RunConfig> {
    let mut config = parse_config(path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(o) = output {
        config.output = o;
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FORWARD: &str = r#"{
        "seed": 3,
        "replicates": 2,
        "experiment": {
            "kind": "forward",
            "model": {"d": 1, "radius": {"kind": "fixed", "radius": 1.0}, "u": 0.5, "sigma": 1.0, "n": 1000, "side": 4.0},
            "initial": {"shape": "half_torus"},
            "observables": [{"family": "gaussian_bump", "center": [1.0], "width": 0.2}],
            "horizon": 0.05
        }
    }"#;

    #[test]
    fn defaults_are_filled() {
        let c = parse_config_str(FORWARD).unwrap();
        let Experiment::Forward(f) = &c.experiment else { panic!() };
        let times = f.sample_times.as_ref().unwrap();
        assert_eq!(times.len(), 10);
        assert!((times[9] - 0.05).abs() < 1e-15);
        // R/4 in simulation units is n^{-β} R / 4 rescaled
        assert!((f.h.unwrap() - 0.1 / 4.0).abs() < 1e-3);
        assert_eq!(c.output, PathBuf::from("out"));
    }

    #[test]
    fn invariant_errors_name_the_problem() {
        let alpha = FORWARD.replace(r#"{"kind": "fixed", "radius": 1.0}"#, r#"{"kind": "stable", "alpha": 2.5}"#);
        let e = parse_config_str(&alpha).unwrap_err().to_string();
        assert!(e.contains("alpha must be in (1,2)"), "{e}");
        let small = FORWARD.replace(r#""n": 1000, "side": 4.0"#, r#""side": 3.0"#);
        let e = parse_config_str(&small).unwrap_err().to_string();
        assert!(e.contains("L > 4R violated"), "{e}");
        let unknown = FORWARD.replace(r#""horizon": 0.05"#, r#""horizon": 0.05, "extra": 1"#);
        let e = parse_config_str(&unknown).unwrap_err().to_string();
        assert!(e.contains("experiment") && e.contains("extra"), "{e}");
    }

    #[test]
    fn hash_round_trips() {
        let c = parse_config_str(FORWARD).unwrap();
        let again = parse_config_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(config_hash(&c).unwrap(), config_hash(&again).unwrap());
    }

    #[test]
    fn zero_replicates_writes_manifest_only() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = parse_config_str(FORWARD).unwrap();
        c.replicates = 0;
        c.output = dir.path().join("run");
        let outcome = run_experiment(&c, 1).unwrap();
        assert!(outcome.manifest.replicate_seeds.is_empty());
        let text = std::fs::read_to_string(dir.path().join("run/observables.csv")).unwrap();
        assert_eq!(text.lines().count(), 1);
        let m: RunManifest =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("run/manifest.json")).unwrap()).unwrap();
        assert_eq!(m, outcome.manifest);
    }
}
