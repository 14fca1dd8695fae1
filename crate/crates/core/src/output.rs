//! CSV and JSON serialization of sweep results.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::{experiment_pairs, ConfigDocument, ConfigError};
use crate::experiments::{ExperimentConfig, SweepResult};

pub const CSV_COLUMNS: [&str; 9] = [
    "sweep_variable",
    "value",
    "mean_error",
    "sem_error",
    "mean_leakage",
    "runs",
    "seed",
    "config_digest",
    "series",
];

pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in &result.rows {
        w.write_record([
            r.variable.name().to_string(),
            r.value.to_string(),
            format!("{:e}", r.estimate.mean_error),
            format!("{:e}", r.estimate.sem_error),
            format!("{:e}", r.estimate.mean_leakage),
            r.estimate.runs.to_string(),
            r.seed.to_string(),
            r.config_digest.clone(),
            r.series.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonRow {
    pub series: String,
    pub sweep_variable: String,
    pub value: f64,
    pub mean_error: f64,
    pub sem_error: f64,
    pub mean_leakage: f64,
    pub runs: usize,
    pub seed: u64,
    pub config_digest: String,
    pub max_unitarity_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonFailure {
    pub series: String,
    pub value: f64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonDocument {
    pub configs: Vec<BTreeMap<String, String>>,
    pub rows: Vec<JsonRow>,
    pub failures: Vec<JsonFailure>,
}

impl JsonDocument {
    pub fn new(result: &SweepResult, configs: &[ExperimentConfig]) -> Self {
        let configs = configs
            .iter()
            .map(|c| experiment_pairs(c).into_iter().map(|(k, v)| (k.to_string(), v)).collect())
            .collect();
        let rows = result
            .rows
            .iter()
            .map(|r| JsonRow {
                series: r.series.clone(),
                sweep_variable: r.variable.name().into(),
                value: r.value,
                mean_error: r.estimate.mean_error,
                sem_error: r.estimate.sem_error,
                mean_leakage: r.estimate.mean_leakage,
                runs: r.estimate.runs,
                seed: r.seed,
                config_digest: r.config_digest.clone(),
                max_unitarity_defect: r.estimate.max_unitarity_defect,
            })
            .collect();
        let failures = result
            .failures
            .iter()
            .map(|f| JsonFailure {
                series: f.series.clone(),
                value: f.value,
                message: f.message.clone(),
            })
            .collect();
        Self {
            configs,
            rows,
            failures,
        }
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Re-parses the embedded configurations.
    pub fn experiments(&self) -> Result<Vec<ExperimentConfig>, ConfigError> {
        self.configs
            .iter()
            .map(|m| ConfigDocument::from_pairs(m.clone()).map(|d| d.experiment))
            .collect()
    }
}

pub fn write_json<W: Write>(result: &SweepResult, configs: &[ExperimentConfig], out: W) -> serde_json::Result<()> {
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, &JsonDocument::new(result, configs))?;
    out.write_all(b"\n").map_err(serde_json::Error::io)
}

/// Fixed-width table for terminal output.
pub fn summary_table(result: &SweepResult) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<18} {:<10} {:>10} {:>12} {:>10} {:>12} {:>6}",
        "series", "variable", "value", "mean_error", "sem", "leakage", "runs"
    );
    for r in &result.rows {
        let e = &r.estimate;
        let _ = writeln!(
            s,
            "{:<18} {:<10} {:>10} {:>12.4e} {:>10.2e} {:>12.4e} {:>6}",
            r.series,
            r.variable.name(),
            r.value,
            e.mean_error,
            e.sem_error,
            e.mean_leakage,
            e.runs
        );
    }
    for f in &result.failures {
        let _ = writeln!(s, "FAILED {} at {}: {}", f.series, f.value, f.message);
    }
    s
}
