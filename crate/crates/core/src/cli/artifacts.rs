//! Run artifacts: CSV tables and the JSON report.
//!
//! Floats in CSV files are written with 17 significant digits so they parse back to the same
//! `f64`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::CliError;
use crate::ais::AisPath;
use crate::diagnostics::{diagnose, log_normalized_weights, Estimate, MeanWeight};
use crate::num::mean_and_variance;

pub const WEIGHTS_CSV: &str = "weights.csv";
pub const VARIANCE_CSV: &str = "variance_curve.csv";
pub const HISTORY_CSV: &str = "history.csv";
pub const REPORT_JSON: &str = "report.json";
pub const GRAPH_JSON: &str = "graph.json";

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn weights_csv(paths: &[AisPath<f64>]) -> String {
    let mut out = String::from("path_id,log_weight\n");
    for (k, p) in paths.iter().enumerate() {
        writeln!(out, "{k},{}", fmt_float(p.final_log_weight())).expect("write to string");
    }
    out
}

pub fn variance_csv(thetas: &[f64], curve: &[f64]) -> String {
    let mut out = String::from("level,theta,var_log_w_normalized\n");
    for (l, v) in curve.iter().enumerate() {
        writeln!(out, "{},{},{}", l + 1, fmt_float(thetas[l + 1]), fmt_float(*v)).expect("write to string");
    }
    out
}

pub fn history_csv(paths: &[AisPath<f64>]) -> String {
    let levels = paths.first().map_or(0, |p| p.log_weight_history.len());
    let mut out = String::from("path_id");
    for l in 1..=levels {
        write!(out, ",l{l}").expect("write to string");
    }
    out.push('\n');
    for (k, p) in paths.iter().enumerate() {
        write!(out, "{k}").expect("write to string");
        for &x in &p.log_weight_history {
            write!(out, ",{}", fmt_float(x)).expect("write to string");
        }
        out.push('\n');
    }
    out
}

fn corrupt(file: &str, line: usize, why: impl std::fmt::Display) -> CliError {
    CliError::Corrupt(format!("{file} line {line}: {why}"))
}

/// Parses a CSV with the given header into rows of floats (the first column must be an index
/// counting up from `first_index`).
fn parse_table(text: &str, file: &str, header: &str, first_index: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == header => {}
        Some(h) => return Err(corrupt(file, 1, format!("unexpected header {h:?}"))),
        None => return Err(corrupt(file, 1, "empty file")),
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let mut fields = line.split(',');
            let idx: usize = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| corrupt(file, k + 2, "bad index"))?;
            if idx != k + first_index {
                return Err(corrupt(file, k + 2, format!("index {idx} out of sequence")));
            }
            fields
                .map(|f| f.parse::<f64>().map_err(|e| corrupt(file, k + 2, e)))
                .collect()
        })
        .collect()
}

pub fn parse_weights(text: &str) -> Result<Vec<f64>, CliError> {
    let rows = parse_table(text, WEIGHTS_CSV, "path_id,log_weight", 0)?;
    rows.into_iter()
        .enumerate()
        .map(|(k, r)| match r.as_slice() {
            [w] => Ok(*w),
            _ => Err(corrupt(WEIGHTS_CSV, k + 2, "expected two columns")),
        })
        .collect()
}

/// `(theta, variance)` per level.
pub fn parse_variance(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let rows = parse_table(text, VARIANCE_CSV, "level,theta,var_log_w_normalized", 1)?;
    rows.into_iter()
        .enumerate()
        .map(|(k, r)| match r.as_slice() {
            [t, v] => Ok((*t, *v)),
            _ => Err(corrupt(VARIANCE_CSV, k + 2, "expected three columns")),
        })
        .collect()
}

pub fn parse_history(text: &str, levels: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let mut header = String::from("path_id");
    for l in 1..=levels {
        write!(header, ",l{l}").expect("write to string");
    }
    let rows = parse_table(text, HISTORY_CSV, &header, 0)?;
    if let Some(k) = rows.iter().position(|r| r.len() != levels) {
        return Err(corrupt(HISTORY_CSV, k + 2, format!("expected {levels} levels")));
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportObservables {
    pub magnetization: Estimate<f64>,
    pub positive_magnetization: Estimate<f64>,
    pub abs_magnetization: Estimate<f64>,
}

/// Summary quantities derived from the final weights alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSummary {
    pub efficiency: f64,
    /// `L / efficiency`: Swendsen-Wang updates per effective sample.
    pub iterations_per_effective_sample: f64,
    pub final_var_log_w_normalized: f64,
    pub mean_weight: MeanWeight<f64>,
}

impl WeightSummary {
    pub fn from_log_weights(log_w: &[f64], levels: usize) -> Result<Self, CliError> {
        let efficiency = crate::diagnostics::sample_efficiency(log_w)?;
        let logs = log_normalized_weights(log_w)?;
        Ok(Self {
            efficiency,
            iterations_per_effective_sample: levels as f64 / efficiency,
            final_var_log_w_normalized: mean_and_variance(&logs).1,
            mean_weight: crate::diagnostics::mean_weight(log_w)?,
        })
    }

    /// Largest absolute difference between matching fields.
    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        [
            (self.efficiency, other.efficiency),
            (self.iterations_per_effective_sample, other.iterations_per_effective_sample),
            (self.final_var_log_w_normalized, other.final_var_log_w_normalized),
            (self.mean_weight.log_mean, other.mean_weight.log_mean),
            (self.mean_weight.relative_error, other.mean_weight.relative_error),
        ]
        .iter()
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub num_paths: usize,
    pub levels: usize,
    pub n_interior: usize,
    pub n_edges: usize,
    pub diagnostics_available: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observables: Option<ReportObservables>,
}

pub struct RunOutputs {
    pub report: RunReport,
    pub variance_curve: Option<Vec<f64>>,
}

pub fn summarize(
    config: &ExperimentConfig,
    n_interior: usize,
    n_edges: usize,
    paths: &[AisPath<f64>],
) -> Result<RunOutputs, CliError> {
    let mut report = RunReport {
        config: config.clone(),
        num_paths: paths.len(),
        levels: config.levels,
        n_interior,
        n_edges,
        diagnostics_available: false,
        weights: None,
        observables: None,
    };
    if paths.len() < 2 {
        return Ok(RunOutputs { report, variance_curve: None });
    }
    let diag = diagnose(paths)?;
    let final_w: Vec<f64> = paths.iter().map(AisPath::final_log_weight).collect();
    report.diagnostics_available = true;
    report.weights = Some(WeightSummary::from_log_weights(&final_w, config.levels)?);
    report.observables = Some(ReportObservables {
        magnetization: diag.observables.magnetization,
        positive_magnetization: diag.observables.positive_magnetization,
        abs_magnetization: diag.observables.abs_magnetization,
    });
    Ok(RunOutputs { report, variance_curve: Some(diag.variance_curve) })
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn read_file(dir: &Path, name: &str) -> Result<String, CliError> {
    let path = dir.join(name);
    std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}
