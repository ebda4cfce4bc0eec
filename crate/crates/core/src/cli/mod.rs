//! Command implementations behind the `ising-ais` binary.
//!
//! Exit codes: 0 success, 2 configuration error, 3 model exceeds an enumeration limit,
//! 4 I/O error, 5 artifacts inconsistent with their report.

pub mod artifacts;
pub mod config;

use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::ais::{run_ensemble, run_ensemble_with_workers};
use crate::diagnostics::{magnetization, positive_magnetization, variance_curve};
use crate::model::GraphDocument;
use crate::oracle;
use crate::Error as CoreError;
use artifacts::{RunReport, WeightSummary};
pub use config::{ExperimentConfig, ModelSpec, OUTPUT_ROOT_ENV};

/// Tolerance for recomputed diagnostics in `report`.
pub const REPORT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    SizeGuard(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("corrupt artifact: {0}")]
    Corrupt(String),
    #[error("verification failed: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::SizeGuard(_) => 3,
            Self::Io(_) => 4,
            Self::Corrupt(_) | Self::Mismatch(_) => 5,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::SizeGuard { .. } => Self::SizeGuard(e.to_string()),
            other => Self::Config(other.to_string()),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub workers: Option<usize>,
    /// Also write the per-level history matrix.
    pub history: bool,
}

/// Result of `run`, for printing.
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub report: RunReport,
}

/// Builds the model, runs the ensemble and writes all artifacts.
pub fn cmd_run(config_path: &Path, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let dir = cfg.resolve_output_dir(config_path);
    run_config(&cfg, &dir, opts)
}

pub fn run_config(cfg: &ExperimentConfig, dir: &Path, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let (graph, geometry) = cfg.build_model()?;
    let ais = cfg.ais_config()?;
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;

    let paths = match opts.workers {
        Some(w) => run_ensemble_with_workers(&graph, &ais, w),
        None => run_ensemble(&graph, &ais),
    }
    .map_err(|e| CliError::Config(e.to_string()))?;

    let outputs = artifacts::summarize(cfg, graph.n_interior(), graph.num_edges(), &paths)?;
    let doc = GraphDocument::new(&graph, geometry.as_ref());
    artifacts::write_file(dir, artifacts::GRAPH_JSON, &to_json(&doc))?;
    artifacts::write_file(dir, artifacts::WEIGHTS_CSV, &artifacts::weights_csv(&paths))?;
    if let Some(curve) = &outputs.variance_curve {
        artifacts::write_file(
            dir,
            artifacts::VARIANCE_CSV,
            &artifacts::variance_csv(ais.schedule.thetas(), curve),
        )?;
    }
    if opts.history {
        artifacts::write_file(dir, artifacts::HISTORY_CSV, &artifacts::history_csv(&paths))?;
    }
    artifacts::write_file(dir, artifacts::REPORT_JSON, &to_json(&outputs.report))?;
    Ok(RunSummary { output_dir: dir.to_path_buf(), report: outputs.report })
}

fn to_json<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactExpectations {
    pub magnetization: f64,
    pub abs_magnetization: f64,
    pub positive_magnetization: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetailedBalanceResiduals {
    pub field_scale: f64,
    pub detailed_balance: f64,
    pub stationarity: f64,
    pub max_row_sum_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub n_interior: usize,
    pub n_edges: usize,
    pub log_z_theta0: f64,
    pub log_z_theta1: f64,
    /// `Z(1) / Z(0)`, the expected AIS weight.
    pub mean_weight: f64,
    pub log_mean_weight: f64,
    pub expectations: ExactExpectations,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detailed_balance: Option<Vec<DetailedBalanceResiduals>>,
}

/// Exact values for a model small enough to enumerate.
pub fn cmd_oracle(config_path: &Path, detailed_balance: bool) -> Result<OracleReport, CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    oracle_for(&cfg, detailed_balance)
}

pub fn oracle_for(cfg: &ExperimentConfig, detailed_balance: bool) -> Result<OracleReport, CliError> {
    let (g, _) = cfg.build_model()?;
    let n = g.n_interior();
    let p0 = oracle::enumerate_pv(&g, 0.0)?;
    let p1 = oracle::enumerate_pv(&g, 1.0)?;
    let spins = |k: usize| crate::model::SpinConfig::from_bits(n, k as u64);
    let expectations = ExactExpectations {
        magnetization: p1.expectation(|k| magnetization(&spins(k))),
        abs_magnetization: p1.expectation(|k| magnetization::<f64>(&spins(k)).abs()),
        positive_magnetization: p1.expectation(|k| positive_magnetization(&spins(k))),
    };
    let residuals = if detailed_balance {
        let mut out = Vec::new();
        for scale in [0.0, 0.5, 1.0] {
            let p = oracle::exact_sw_transition(&g, scale)?;
            let pi = oracle::enumerate_pv(&g, scale)?.probs();
            let row_err = (0..p.n_states)
                .map(|s| (p.row(s).iter().sum::<f64>() - 1.0).abs())
                .fold(0.0, f64::max);
            out.push(DetailedBalanceResiduals {
                field_scale: scale,
                detailed_balance: p.detailed_balance_residual(&pi),
                stationarity: p.stationarity_residual(&pi),
                max_row_sum_error: row_err,
            });
        }
        Some(out)
    } else {
        None
    };
    Ok(OracleReport {
        n_interior: n,
        n_edges: g.num_edges(),
        log_z_theta0: p0.log_z,
        log_z_theta1: p1.log_z,
        mean_weight: (p1.log_z - p0.log_z).exp(),
        log_mean_weight: p1.log_z - p0.log_z,
        expectations,
        detailed_balance: residuals,
    })
}

pub fn oracle_json(report: &OracleReport) -> String {
    to_json(report)
}

/// Diagnostics recomputed from a run directory.
pub struct Verification {
    pub report: RunReport,
    pub recomputed: Option<WeightSummary>,
    /// `(level, theta, variance)` as stored in `variance_curve.csv`.
    pub curve: Vec<(usize, f64, f64)>,
    pub history_checked: bool,
}

/// Re-derives the diagnostics from `weights.csv` (and `history.csv` when present) and checks
/// them against `report.json` and `variance_curve.csv`.
pub fn cmd_report(dir: &Path) -> Result<Verification, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Io(format!("{} is not a directory", dir.display())));
    }
    let report: RunReport = serde_json::from_str(&artifacts::read_file(dir, artifacts::REPORT_JSON)?)
        .map_err(|e| CliError::Corrupt(format!("{}: {e}", artifacts::REPORT_JSON)))?;
    let log_w = artifacts::parse_weights(&artifacts::read_file(dir, artifacts::WEIGHTS_CSV)?)?;
    if log_w.len() != report.num_paths {
        return Err(CliError::Mismatch(format!(
            "weights.csv has {} paths, report says {}",
            log_w.len(),
            report.num_paths
        )));
    }
    if !report.diagnostics_available {
        return Ok(Verification { report, recomputed: None, curve: Vec::new(), history_checked: false });
    }

    let recomputed = WeightSummary::from_log_weights(&log_w, report.levels)?;
    let stored = report
        .weights
        .as_ref()
        .ok_or_else(|| CliError::Corrupt("report has diagnostics but no weight summary".into()))?;
    let diff = recomputed.max_abs_difference(stored);
    if !(diff <= REPORT_TOLERANCE) {
        return Err(CliError::Mismatch(format!(
            "weights.csv disagrees with report.json (max difference {diff:e})"
        )));
    }

    let curve = artifacts::parse_variance(&artifacts::read_file(dir, artifacts::VARIANCE_CSV)?)?;
    if curve.len() != report.levels {
        return Err(CliError::Mismatch(format!(
            "variance_curve.csv has {} levels, report says {}",
            curve.len(),
            report.levels
        )));
    }
    let last = curve[curve.len() - 1].1;
    if !((last - recomputed.final_var_log_w_normalized).abs() <= REPORT_TOLERANCE) {
        return Err(CliError::Mismatch("final level of variance_curve.csv disagrees with weights.csv".into()));
    }

    let history_path = dir.join(artifacts::HISTORY_CSV);
    let history_checked = history_path.exists();
    if history_checked {
        let rows = artifacts::parse_history(&artifacts::read_file(dir, artifacts::HISTORY_CSV)?, report.levels)?;
        if rows.iter().zip(&log_w).any(|(r, w)| r[r.len() - 1] != *w) {
            return Err(CliError::Mismatch("history.csv final column disagrees with weights.csv".into()));
        }
        let batch = variance_curve(&rows)?;
        if let Some(l) = batch.iter().zip(&curve).position(|(a, (_, b))| !((a - b).abs() <= REPORT_TOLERANCE)) {
            return Err(CliError::Mismatch(format!("variance_curve.csv disagrees with history.csv at level {}", l + 1)));
        }
    }

    let curve = curve.into_iter().enumerate().map(|(l, (t, v))| (l + 1, t, v)).collect();
    Ok(Verification { report, recomputed: Some(recomputed), curve, history_checked })
}
