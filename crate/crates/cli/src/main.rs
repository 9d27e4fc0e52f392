use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;

use gexp_cli::{emit_report, run_experiment, ExperimentConfig, CATALOG};

#[derive(Parser)]
#[command(name = "gexp", version, about = "Run sublinear-expectation experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more experiment configs.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Output root; each config writes to <out>/<config stem>/ unless its output.path is set.
        #[arg(long, default_value = "gexp-out")]
        out: PathBuf,
        /// Worker threads (0 uses all cores).
        #[arg(long, default_value_t = 0)]
        parallel: usize,
    },
    /// List registered experiments.
    List,
}

enum Status {
    Passed,
    Failed,
}

fn run_one(path: &PathBuf, out: &PathBuf) -> Result<Status> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut config = ExperimentConfig::parse(&text).with_context(|| format!("{}", path.display()))?;
    config
        .apply_seed_override(std::env::var("GEXP_SEED").ok().as_deref())
        .context("GEXP_SEED")?;
    let dir = match &config.output.path {
        Some(p) => PathBuf::from(p),
        None => out.join(path.file_stem().unwrap_or_default()),
    };
    let start = Instant::now();
    let bundle = run_experiment(&config).with_context(|| format!("{}", path.display()))?;
    let summary = emit_report(&bundle, &config, start.elapsed().as_secs_f64(), &dir)
        .with_context(|| format!("writing {}", dir.display()))?;
    for check in &summary.checks {
        eprintln!(
            "{}: {} {:?} (estimate {:.6}, target {:.6}, tolerance {:.3e})",
            summary.experiment_id, check.check_id, check.verdict, check.estimate, check.target, check.tolerance
        );
    }
    Ok(if summary.all_passed { Status::Passed } else { Status::Failed })
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::List => {
            for (id, description) in CATALOG {
                println!("{id:<18} {description}");
            }
            ExitCode::SUCCESS
        }
        Command::Run { configs, out, parallel } => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(parallel).build() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let results: Vec<Result<Status>> = pool.install(|| configs.par_iter().map(|c| run_one(c, &out)).collect());
            let mut code = 0u8;
            for result in results {
                match result {
                    Ok(Status::Passed) => {}
                    Ok(Status::Failed) => code = code.max(1),
                    Err(e) => {
                        eprintln!("error: {e:#}");
                        code = 2;
                    }
                }
            }
            ExitCode::from(code)
        }
    }
}
