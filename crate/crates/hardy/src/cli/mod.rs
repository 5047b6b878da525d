//! Declarative experiment runner behind the `hardy` binary.

mod config;
mod report;
mod runner;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::error::HardyError;

pub use config::{ExperimentConfig, ExperimentKind, OutputPaths, SplineSampling};
pub use report::{csv_string, format_float, json_string, svg_string, write_text, CSV_HEADER};
pub use runner::{execute, reference_value, thread_count, ReportRow, RunRecord, Series};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(HardyError),
    #[error("could not write reports: {0}")]
    Output(HardyError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Output(_) => 1,
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub runs: Vec<RunRecord>,
    pub written: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.error.is_some()).count()
    }

    /// 0 when every run converged without tripping an invariant, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        u8::from(self.failures() > 0)
    }
}

/// Loads and validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let cfg = ExperimentConfig::load(path).map_err(CliError::Validation)?;
    cfg.validate().map_err(CliError::Validation)?;
    Ok(cfg)
}

/// Runs a config file and writes its CSV, JSON and SVG reports.
///
/// Outputs default to `<stem>.csv`, `<stem>.json` and `<stem>-<k>.svg` next to the config.
pub fn run_config(path: &Path) -> Result<RunOutcome, CliError> {
    let cfg = load_config(path)?;
    let runs = execute(&cfg, thread_count());
    let written = write_reports(&cfg, path, &runs).map_err(CliError::Output)?;
    Ok(RunOutcome { runs, written })
}

pub fn write_reports(cfg: &ExperimentConfig, config_path: &Path, runs: &[RunRecord]) -> crate::Result<Vec<PathBuf>> {
    let base = config_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let stem = config_path.file_stem().and_then(|s| s.to_str()).unwrap_or("report").to_string();
    let csv_path = ExperimentConfig::resolve(&base, cfg.output.csv.as_deref().unwrap_or(Path::new(&format!("{stem}.csv"))));
    let json_path = ExperimentConfig::resolve(&base, cfg.output.json.as_deref().unwrap_or(Path::new(&format!("{stem}.json"))));
    let svg_dir = ExperimentConfig::resolve(&base, cfg.output.svg_dir.as_deref().unwrap_or(Path::new("")));

    let rows: Vec<ReportRow> = runs.iter().flat_map(|r| r.rows.iter().cloned()).collect();
    write_text(&csv_path, &csv_string(&rows)?)?;
    write_text(&json_path, &json_string(cfg, runs)?)?;
    let mut written = vec![csv_path, json_path];
    for (k, series) in runs.iter().filter_map(|r| r.series.as_ref()).enumerate() {
        if series.points.is_empty() {
            continue;
        }
        let path = svg_dir.join(format!("{stem}-{k}.svg"));
        write_text(&path, &svg_string(series))?;
        written.push(path);
    }
    Ok(written)
}
