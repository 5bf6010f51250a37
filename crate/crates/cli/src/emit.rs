//! runs.csv and summary.json writers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use iclab::metrics::{mean_and_se, RunRecord};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::scenarios::Assertion;

pub const CSV_HEADER: &str =
    "scenario,algorithm,task_index,trial,train_loss,max_forgetting,population_risk,memory_floats,wall_micros";

/// 17 significant digits, enough to round-trip any f64.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_owned()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_owned()
    } else {
        format!("{x:.16e}")
    }
}

pub fn csv_string(records: &[RunRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.algorithm,
            r.task_index,
            r.trial,
            format_float(r.train_loss),
            format_float(r.max_forgetting),
            format_float(r.population_risk.unwrap_or(f64::NAN)),
            r.memory_floats,
            r.wall_micros
        );
    }
    out
}

pub fn emit_csv(records: &[RunRecord], path: &Path) -> CliResult<()> {
    std::fs::write(path, csv_string(records)).map_err(|e| CliError::io(path, e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std_error: f64,
}

impl Stat {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let (mean, std_error) = mean_and_se(values);
        Some(Self { mean, std_error })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub scenario: String,
    pub algorithm: String,
    pub records: usize,
    pub train_loss: Option<Stat>,
    pub max_forgetting: Option<Stat>,
    pub population_risk: Option<Stat>,
    pub memory_floats: Option<Stat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub groups: Vec<GroupSummary>,
    pub assertions: Vec<Assertion>,
    pub all_passed: bool,
    /// Names of the failed assertions.
    pub failures: Vec<String>,
}

pub fn summarize(records: &[RunRecord], assertions: &[Assertion]) -> Summary {
    let mut groups: BTreeMap<(&str, &str), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((&r.scenario, &r.algorithm))
            .or_default()
            .push(r);
    }
    let groups = groups
        .into_iter()
        .map(|((scenario, algorithm), rs)| {
            let col = |f: &dyn Fn(&RunRecord) -> Option<f64>| {
                let v: Vec<f64> = rs
                    .iter()
                    .filter_map(|r| f(r))
                    .filter(|x| x.is_finite())
                    .collect();
                Stat::of(&v)
            };
            GroupSummary {
                scenario: scenario.to_owned(),
                algorithm: algorithm.to_owned(),
                records: rs.len(),
                train_loss: col(&|r| Some(r.train_loss)),
                max_forgetting: col(&|r| Some(r.max_forgetting)),
                population_risk: col(&|r| r.population_risk),
                memory_floats: col(&|r| Some(r.memory_floats as f64)),
            }
        })
        .collect();
    let failures: Vec<String> = assertions
        .iter()
        .filter(|a| !a.passed)
        .map(|a| a.name.clone())
        .collect();
    Summary {
        groups,
        assertions: assertions.to_vec(),
        all_passed: failures.is_empty(),
        failures,
    }
}

pub fn emit_summary(records: &[RunRecord], assertions: &[Assertion], path: &Path) -> CliResult<()> {
    let summary = summarize(records, assertions);
    let text =
        serde_json::to_string_pretty(&summary).map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}
