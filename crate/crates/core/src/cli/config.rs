use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::ais::{AisConfig, Schedule};
use crate::model::{
    build_disk_triangulation, build_square_lattice, ArcCondition, IsingGraph, LatticeGeometry,
    SquareBoundary,
};

/// Environment variable naming the directory under which runs without an explicit
/// `output_dir` are written.
pub const OUTPUT_ROOT_ENV: &str = "ISING_AIS_OUTPUT_ROOT";

fn default_burnin() -> usize {
    100
}

fn default_steps_per_level() -> usize {
    1
}

/// One experiment, read from a single JSON document. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub beta: f64,
    /// Number of annealing levels `L` (equally spaced field scales).
    pub levels: usize,
    pub num_paths: usize,
    #[serde(default = "default_burnin")]
    pub burnin_steps: usize,
    #[serde(default = "default_steps_per_level")]
    pub steps_per_level: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `n1 × n2` grid with a one-vertex-thick boundary layer.
    Square { n1: usize, n2: usize, boundary: SquareBoundary },
    /// Random triangulation of the unit disk.
    Disk { mesh_size: f64, arcs: Vec<ArcCondition>, seed: u64 },
    /// Interior graph and field given directly.
    Explicit { n_interior: usize, edges: Vec<[usize; 2]>, field: Vec<f64> },
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, why: &str| Err(CliError::Config(format!("{field}: {why}")));
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("beta", "must be positive and finite");
        }
        for (name, value) in [
            ("levels", self.levels),
            ("num_paths", self.num_paths),
            ("burnin_steps", self.burnin_steps),
            ("steps_per_level", self.steps_per_level),
        ] {
            if value == 0 {
                return bad(name, "must be positive");
            }
        }
        match &self.model {
            ModelSpec::Square { n1, n2, .. } if *n1 == 0 || *n2 == 0 => {
                bad("model.n1/n2", "must be positive")
            }
            ModelSpec::Disk { mesh_size, .. } if !(*mesh_size > 0.0 && *mesh_size < 1.0) => {
                bad("model.mesh_size", "must lie in (0, 1)")
            }
            _ => Ok(()),
        }
    }

    pub fn build_model(&self) -> Result<(IsingGraph<f64>, Option<LatticeGeometry>), CliError> {
        let built = match &self.model {
            ModelSpec::Square { n1, n2, boundary } => {
                build_square_lattice(*n1, *n2, *boundary, self.beta).map(|l| (l.graph, Some(l.geometry)))
            }
            ModelSpec::Disk { mesh_size, arcs, seed } => {
                build_disk_triangulation(*mesh_size, arcs, *seed, self.beta).map(|l| (l.graph, Some(l.geometry)))
            }
            ModelSpec::Explicit { n_interior, edges, field } => {
                IsingGraph::new(*n_interior, edges.clone(), field.clone(), self.beta).map(|g| (g, None))
            }
        };
        built.map_err(|e| CliError::Config(format!("model: {e}")))
    }

    pub fn ais_config(&self) -> Result<AisConfig<f64>, CliError> {
        Ok(AisConfig {
            num_paths: self.num_paths,
            burnin_steps: self.burnin_steps,
            steps_per_level: self.steps_per_level,
            schedule: Schedule::linear(self.levels).map_err(|e| CliError::Config(e.to_string()))?,
            base_seed: self.base_seed,
        })
    }

    /// `output_dir` if set, else `$ISING_AIS_OUTPUT_ROOT/<config stem>`, else `runs/<config stem>`.
    pub fn resolve_output_dir(&self, config_path: &Path) -> PathBuf {
        if let Some(dir) = &self.output_dir {
            return dir.clone();
        }
        let stem = config_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into());
        let root = std::env::var_os(OUTPUT_ROOT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("runs"));
        root.join(stem)
    }
}
