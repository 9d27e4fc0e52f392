use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use gexp_core::CheckReport;

use crate::config::{ExperimentConfig, OutputFormat};
use crate::experiments::{ReportBundle, Table};

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment_id: String,
    pub config_hash: String,
    pub seed: u64,
    pub wall_time_s: f64,
    pub all_passed: bool,
    pub checks: Vec<CheckReport>,
}

/// SHA-256 of the effective config's canonical JSON.
pub fn config_hash(config: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(config.to_json().as_bytes()))
}

fn write_table(table: &Table, dir: &Path, format: OutputFormat) -> io::Result<PathBuf> {
    match format {
        OutputFormat::Csv => {
            let path = dir.join(format!("{}.csv", table.name));
            let mut text = table.header.join(",");
            text.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|c| csv_cell(c)).collect();
                text.push_str(&cells.join(","));
                text.push('\n');
            }
            fs::write(&path, text)?;
            Ok(path)
        }
        OutputFormat::Json => {
            let path = dir.join(format!("{}.json", table.name));
            fs::write(&path, serde_json::to_string_pretty(table)?)?;
            Ok(path)
        }
    }
}

fn csv_cell(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// Writes every table plus `summary.json` into `dir` and returns the summary.
pub fn emit_report(
    bundle: &ReportBundle,
    config: &ExperimentConfig,
    wall_time_s: f64,
    dir: &Path,
) -> io::Result<Summary> {
    fs::create_dir_all(dir)?;
    for table in &bundle.tables {
        write_table(table, dir, config.output.format)?;
    }
    let summary = Summary {
        experiment_id: bundle.experiment_id.clone(),
        config_hash: config_hash(config),
        seed: config.mc.seed,
        wall_time_s,
        all_passed: bundle.passed(),
        checks: bundle.checks.clone(),
    };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}
