use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use iclab_cli::acceptance::{run_criterion, CRITERIA};
use iclab_cli::config::{default_algorithms, REGISTRY};
use iclab_cli::run::{resolve_out_dir, run_to_dir, OUT_ENV};
use iclab_cli::{parse_config, CliError};

#[derive(Parser)]
#[command(
    name = "iclab",
    version,
    about = "Continual-learning experiments with exact and baseline learners"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a TOML config.
    Run {
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; beats ICLAB_OUT and the config's out_dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List scenarios and their algorithms.
    Scenarios,
    /// Run the acceptance suite.
    Check {
        /// Only these criteria (1-9); all when omitted.
        #[arg(long = "only", value_delimiter = ',')]
        only: Vec<usize>,
    },
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    let mut source = std::error::Error::source(e);
    while let Some(s) = source {
        eprintln!("  caused by: {s}");
        source = s.source();
    }
    ExitCode::from(e.exit_code() as u8)
}

fn run(config: PathBuf, seed: Option<u64>, out: Option<PathBuf>) -> Result<bool, CliError> {
    let mut cfg = parse_config(&config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let env = std::env::var(OUT_ENV).ok();
    let dir = resolve_out_dir(out.as_deref(), env.as_deref(), &cfg);
    let result = run_to_dir(&cfg, &dir)?;
    println!(
        "{} records written to {}",
        result.records.len(),
        dir.display()
    );
    for a in &result.assertions {
        println!(
            "{} {}: {}",
            if a.passed { "PASS" } else { "FAIL" },
            a.name,
            a.detail
        );
    }
    if !result.all_passed() {
        let failed: Vec<&str> = result
            .assertions
            .iter()
            .filter(|a| !a.passed)
            .map(|a| a.name.as_str())
            .collect();
        eprintln!("failed assertions: {}", failed.join(","));
    }
    Ok(result.all_passed())
}

fn check(only: Vec<usize>) -> Result<bool, CliError> {
    let scratch = tempfile::tempdir().map_err(|e| CliError::io(std::env::temp_dir(), e))?;
    let ids: Vec<usize> = if only.is_empty() {
        CRITERIA.iter().map(|(i, _)| *i).collect()
    } else {
        only
    };
    let mut all = true;
    for id in ids {
        let result = run_criterion(id, scratch.path())?;
        println!("{}", result.line());
        all &= result.passed;
    }
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, seed, out } => run(config, seed, out),
        Command::Scenarios => {
            for (name, algs) in REGISTRY {
                println!(
                    "{name}: {} (default: {})",
                    algs.join(", "),
                    default_algorithms(name).join(", ")
                );
            }
            Ok(true)
        }
        Command::Check { only } => check(only),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => fail(&e),
    }
}
