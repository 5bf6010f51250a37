//! `iclab run`: one scenario into an output directory.

use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::emit::{emit_csv, emit_summary};
use crate::error::{CliError, CliResult};
use crate::scenarios::{run_scenario, ScenarioOutput};

pub const OUT_ENV: &str = "ICLAB_OUT";

/// `--out`, then `ICLAB_OUT`, then the config's `out_dir`.
pub fn resolve_out_dir(cli: Option<&Path>, env: Option<&str>, cfg: &ExperimentConfig) -> PathBuf {
    match (cli, env) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(e)) if !e.is_empty() => PathBuf::from(e),
        _ => cfg.out_dir.clone(),
    }
}

/// Runs the scenario and writes runs.csv and summary.json into `dir`.
pub fn run_to_dir(cfg: &ExperimentConfig, dir: &Path) -> CliResult<ScenarioOutput> {
    let out = run_scenario(cfg)?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    emit_csv(&out.records, &dir.join("runs.csv"))?;
    emit_summary(&out.records, &out.assertions, &dir.join("summary.json"))?;
    Ok(out)
}
