use std::path::Path;
use std::process::Command;

use iclab_cli::acceptance::deterministic_columns;
use iclab_cli::config::ExperimentConfig;
use iclab_cli::emit::CSV_HEADER;
use iclab_cli::run::resolve_out_dir;
use iclab_cli::run_scenario;

fn iclab() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_iclab"));
    c.env_remove("ICLAB_OUT");
    c
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn shared_regression_record_count_and_order() {
    let mut cfg = ExperimentConfig::minimal("shared_regression", 30);
    cfg.t_count = 4;
    cfg.m_per_task = 16;
    cfg.rank_per_task = 8;
    cfg.trials = 3;
    let out = run_scenario(&cfg).unwrap();
    assert_eq!(out.records.len(), 3 * 5 * 4);
    let keys: Vec<_> = out
        .records
        .iter()
        .map(|r| (r.algorithm.clone(), r.trial, r.task_index))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(out.all_passed(), "{:?}", out.assertions);
}

#[test]
fn seed_changes_output_but_reruns_do_not() {
    let mut cfg = ExperimentConfig::minimal("subspace_stream", 15);
    cfg.trials = 2;
    let a = run_scenario(&cfg).unwrap().records;
    let b = run_scenario(&cfg).unwrap().records;
    let strip = |rs: &[iclab::metrics::RunRecord]| {
        rs.iter()
            .map(|r| (r.train_loss.to_bits(), r.max_forgetting.to_bits()))
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&a), strip(&b));
    cfg.seed = 99;
    let c = run_scenario(&cfg).unwrap().records;
    assert_ne!(strip(&a), strip(&c));
}

#[test]
fn out_dir_precedence() {
    let cfg = ExperimentConfig::minimal("bound_rate", 10);
    assert_eq!(
        resolve_out_dir(Some(Path::new("a")), Some("b"), &cfg),
        Path::new("a")
    );
    assert_eq!(resolve_out_dir(None, Some("b"), &cfg), Path::new("b"));
    assert_eq!(resolve_out_dir(None, None, &cfg), Path::new("out"));
}

#[test]
fn run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "scenario = \"parallel_failure\"\nn = 4\ntrials = 2\nout_dir = \"ignored\"\n",
    );
    let out = dir.path().join("results");
    let status = iclab()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .arg("--seed")
        .arg("3")
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 3 * 2);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["all_passed"], true);
    assert_eq!(summary["groups"].as_array().unwrap().len(), 3);
}

#[test]
fn env_var_overrides_config_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "scenario = \"subspace_stream\"\nn = 15\ntrials = 1\n",
    );
    let out = dir.path().join("from_env");
    let status = iclab()
        .arg("run")
        .arg(&cfg)
        .env("ICLAB_OUT", &out)
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    assert!(out.join("runs.csv").exists());
}

#[test]
fn identical_runs_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "scenario = \"relaxed_vs_exact\"\nn = 12\nt_count = 3\nm_per_task = 8\nrank_per_task = 5\ntrials = 2\n");
    let mut csvs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        assert!(iclab()
            .arg("run")
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap()
            .status
            .success());
        csvs.push(deterministic_columns(
            &std::fs::read_to_string(out.join("runs.csv")).unwrap(),
        ));
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn failed_assertion_exits_with_one_and_lists_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "scenario = \"bound_rate\"\nn = 20\nt_count = 2\nrank_per_task = 5\ntrials = 2\nm_grid = [2, 3]\nrate_threshold = 1e-9\n",
    );
    let out = iclab()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("all_task_gap_rate"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "scenario = \"foo\"\nn = 3\n");
    let out = iclab().arg("run").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("shared_regression"));
    let missing = iclab()
        .arg("run")
        .arg(dir.path().join("nope.toml"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // rank must stay below n
    let cfg = write_config(
        dir.path(),
        "scenario = \"shared_regression\"\nn = 5\nrank_per_task = 5\nm_per_task = 5\ntrials = 1\n",
    );
    let out = iclab()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(
        matches!(out.status.code(), Some(2) | Some(3)),
        "{:?}",
        out.status
    );
}

#[test]
fn scenarios_lists_registry() {
    let out = iclab().arg("scenarios").output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    for s in iclab_cli::config::scenario_names() {
        assert!(text.contains(s));
    }
}
