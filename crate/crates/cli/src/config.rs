//! Experiment configuration, read from TOML.
//!
//! Only `scenario` and `n` are required; every other key has a default.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Scenario names and the algorithms each one understands.
pub const REGISTRY: &[(&str, &[&str])] = &[
    (
        "shared_regression",
        &["icl", "ogd", "alt_projection", "sequential_ls", "rehearsal"],
    ),
    (
        "parallel_failure",
        &["icl", "alt_projection", "sequential_ls"],
    ),
    ("subspace_stream", &["primal", "dual", "isvd", "oja"]),
    (
        "rehearsal_sweep",
        &["uniform_random", "reservoir", "first_k"],
    ),
    ("bound_rate", &["icl"]),
    (
        "relaxed_vs_exact",
        &["icl", "relaxed_exact", "relaxed_zeta"],
    ),
];

/// Algorithms run when the config does not list any.
pub fn default_algorithms(scenario: &str) -> Vec<String> {
    let all = REGISTRY
        .iter()
        .find(|(s, _)| *s == scenario)
        .map(|(_, a)| *a)
        .unwrap_or(&[]);
    let picked: &[&str] = if scenario == "rehearsal_sweep" {
        &all[..2]
    } else {
        all
    };
    picked.iter().map(|s| (*s).to_owned()).collect()
}

pub fn scenario_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|(s, _)| *s).collect()
}

fn d_t_count() -> usize {
    10
}
fn d_m_per_task() -> usize {
    30
}
fn d_rank_per_task() -> usize {
    20
}
fn d_s_grid() -> Vec<usize> {
    vec![5, 20, 80]
}
fn d_trials() -> usize {
    20
}
fn d_tol_rank() -> f64 {
    iclab::DEFAULT_RANK_TOL
}
fn d_delta() -> f64 {
    0.05
}
fn d_zeta_constant() -> f64 {
    1.0
}
fn d_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn d_offsets() -> Vec<f64> {
    vec![1.0, 2.0]
}
fn d_dims() -> Vec<usize> {
    vec![3, 4, 5]
}
fn d_m_grid() -> Vec<usize> {
    vec![250, 1000, 4000]
}
fn d_ogd_steps() -> usize {
    10_000
}
fn d_threshold() -> f64 {
    0.7
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SlackScheduleName {
    #[default]
    Running,
    Final,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub n: usize,
    #[serde(default = "d_t_count")]
    pub t_count: usize,
    #[serde(default = "d_m_per_task")]
    pub m_per_task: usize,
    #[serde(default = "d_rank_per_task")]
    pub rank_per_task: usize,
    /// Empty means every default algorithm of the scenario.
    #[serde(default)]
    pub algorithms: Vec<String>,
    #[serde(default = "d_s_grid")]
    pub s_grid: Vec<usize>,
    #[serde(default = "d_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_tol_rank")]
    pub tol_rank: f64,
    #[serde(default = "d_delta")]
    pub delta: f64,
    #[serde(default = "d_zeta_constant")]
    pub zeta_constant: f64,
    #[serde(default = "d_out_dir")]
    pub out_dir: PathBuf,
    /// parallel_failure: distances between the two solution sets.
    #[serde(default = "d_offsets")]
    pub offsets: Vec<f64>,
    /// subspace_stream: dimension of each batch's subspace.
    #[serde(default = "d_dims")]
    pub dims: Vec<usize>,
    /// bound_rate: per-task sample sizes.
    #[serde(default = "d_m_grid")]
    pub m_grid: Vec<usize>,
    /// bound_rate and rehearsal_sweep: power-law exponent of sparse
    /// coordinate sampling; absent means Gaussian sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling_exponent: Option<f64>,
    /// bound_rate: largest allowed gap ratio between grid steps.
    #[serde(default = "d_threshold")]
    pub rate_threshold: f64,
    #[serde(default = "d_ogd_steps")]
    pub ogd_steps: usize,
    #[serde(default)]
    pub slack_schedule: SlackScheduleName,
}

impl ExperimentConfig {
    /// Config with every default applied.
    pub fn minimal(scenario: &str, n: usize) -> Self {
        Self {
            scenario: scenario.to_owned(),
            n,
            t_count: d_t_count(),
            m_per_task: d_m_per_task(),
            rank_per_task: d_rank_per_task(),
            algorithms: Vec::new(),
            s_grid: d_s_grid(),
            trials: d_trials(),
            seed: 0,
            tol_rank: d_tol_rank(),
            delta: d_delta(),
            zeta_constant: d_zeta_constant(),
            out_dir: d_out_dir(),
            offsets: d_offsets(),
            dims: d_dims(),
            m_grid: d_m_grid(),
            sampling_exponent: None,
            rate_threshold: d_threshold(),
            ogd_steps: d_ogd_steps(),
            slack_schedule: SlackScheduleName::default(),
        }
    }

    pub fn from_toml_str(s: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| CliError::Config(e.message().to_owned()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Runtime(e.to_string()))
    }

    /// Algorithms to run, defaults applied.
    pub fn algorithm_list(&self) -> Vec<String> {
        if self.algorithms.is_empty() {
            default_algorithms(&self.scenario)
        } else {
            self.algorithms.clone()
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let Some((_, known)) = REGISTRY.iter().find(|(s, _)| *s == self.scenario) else {
            return Err(CliError::Config(format!(
                "unknown scenario `{}`; valid scenarios: {}",
                self.scenario,
                scenario_names().join(", ")
            )));
        };
        for a in &self.algorithms {
            if !known.contains(&a.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown algorithm `{a}` for scenario `{}`; valid algorithms: {}",
                    self.scenario,
                    known.join(", ")
                )));
            }
        }
        let fail = |msg: String| Err(CliError::Config(msg));
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.n == 0 {
            return fail("n must be at least 1".into());
        }
        if !(self.tol_rank > 0.0 && self.tol_rank < 1.0) {
            return fail(format!(
                "tol_rank must lie in (0, 1), got {}",
                self.tol_rank
            ));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return fail(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !(self.zeta_constant > 0.0 && self.zeta_constant.is_finite()) {
            return fail("zeta_constant must be positive".into());
        }
        if self.s_grid.is_empty()
            || self.s_grid.windows(2).any(|w| w[1] <= w[0])
            || self.s_grid[0] == 0
        {
            return fail("s_grid must be a non-empty increasing list of positive sizes".into());
        }
        if self.m_grid.is_empty() || self.m_grid.contains(&0) {
            return fail("m_grid must be a non-empty list of positive sizes".into());
        }
        if self.offsets.iter().any(|o| *o == 0.0 || !o.is_finite()) || self.offsets.is_empty() {
            return fail("offsets must be finite and non-zero".into());
        }
        if let Some(e) = self.sampling_exponent {
            if !(e > 0.0 && e.is_finite()) {
                return fail(format!("sampling_exponent must be positive, got {e}"));
            }
        }
        if self.ogd_steps == 0 {
            return fail("ogd_steps must be at least 1".into());
        }
        Ok(())
    }
}

pub fn parse_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::from_toml_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg =
            ExperimentConfig::from_toml_str("scenario = \"shared_regression\"\nn = 50\n").unwrap();
        assert_eq!(cfg, ExperimentConfig::minimal("shared_regression", 50));
        assert_eq!(cfg.t_count, 10);
        assert_eq!(cfg.trials, 20);
        assert_eq!(cfg.tol_rank, 1e-10);
        assert_eq!(cfg.delta, 0.05);
        assert_eq!(cfg.zeta_constant, 1.0);
        assert_eq!(cfg.algorithm_list().len(), 5);
    }

    #[test]
    fn unknown_scenario_lists_valid_ones() {
        let err = ExperimentConfig::from_toml_str("scenario = \"foo\"\nn = 5\n").unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("foo")
                && msg.contains("shared_regression")
                && msg.contains("relaxed_vs_exact")
        );
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_missing_and_mistyped_keys() {
        let unknown =
            ExperimentConfig::from_toml_str("scenario = \"bound_rate\"\nn = 5\nbogus = 1\n")
                .unwrap_err();
        assert!(unknown.to_string().contains("bogus"));
        let missing = ExperimentConfig::from_toml_str("scenario = \"bound_rate\"\n").unwrap_err();
        assert!(missing.to_string().contains("`n`"));
        let typed = ExperimentConfig::from_toml_str("scenario = \"bound_rate\"\nn = \"five\"\n")
            .unwrap_err();
        assert!(matches!(typed, CliError::Config(_)));
    }

    #[test]
    fn unknown_algorithm_rejected() {
        let err = ExperimentConfig::from_toml_str(
            "scenario = \"subspace_stream\"\nn = 20\nalgorithms = [\"primal\", \"ogd\"]\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("ogd"));
    }

    #[test]
    fn round_trip() {
        let text = "scenario = \"rehearsal_sweep\"\nn = 40\ntrials = 3\ns_grid = [2, 4]\nsampling_exponent = 2.5\nslack_schedule = \"final\"\n";
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(
            ExperimentConfig::from_toml_str("scenario = \"bound_rate\"\nn = 5\ntrials = 0\n")
                .is_err()
        );
    }
}
