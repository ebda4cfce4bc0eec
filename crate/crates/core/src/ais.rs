//! Annealed importance sampling with the boundary field switched on gradually.
//!
//! Every path starts from a Swendsen-Wang sample of the zero-field model and walks through the
//! levels of a [`Schedule`], where level `l` has the field scaled by `θ_l`. Before the moves at
//! level `l` the path picks up the log density ratio between levels `l` and `l - 1` at its current
//! configuration. Since the coupling term is identical at every level, that ratio reduces to
//! `β (θ_l - θ_{l-1}) Σ h_i s_i`.
//!
//! Each path draws from its own ChaCha stream (seeded by `base_seed`, stream id = path index), so
//! an ensemble is reproducible regardless of how paths are distributed over threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{IsingGraph, SpinConfig};
use crate::num::Real;
use crate::sw::SwKernel;

/// Field scales `0 = θ_0 <= θ_1 <= ... <= θ_L = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>")]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>", serialize = "T: Real + Serialize"))]
pub struct Schedule<T> {
    thetas: Vec<T>,
}

impl<T: Real> Schedule<T> {
    pub fn new(thetas: Vec<T>) -> Result<Self> {
        if thetas.len() < 2 {
            return Err(Error::Invalid("a schedule needs at least two entries".into()));
        }
        if thetas[0] != T::zero() || thetas[thetas.len() - 1] != T::one() {
            return Err(Error::Invalid("a schedule must start at 0 and end at 1".into()));
        }
        if thetas.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::Invalid("schedule is not non-decreasing".into()));
        }
        Ok(Self { thetas })
    }

    /// `L + 1` equally spaced values from 0 to 1.
    pub fn linear(levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::Invalid("schedule needs at least one level".into()));
        }
        let l = T::from_count(levels);
        let mut thetas: Vec<T> = (0..=levels).map(|k| T::from_count(k) / l).collect();
        thetas[levels] = T::one();
        Self::new(thetas)
    }

    /// Number of levels `L`.
    pub fn levels(&self) -> usize {
        self.thetas.len() - 1
    }

    pub fn thetas(&self) -> &[T] {
        &self.thetas
    }
}

impl<T: Real> TryFrom<Vec<T>> for Schedule<T> {
    type Error = Error;

    fn try_from(thetas: Vec<T>) -> Result<Self> {
        Self::new(thetas)
    }
}

impl<T> From<Schedule<T>> for Vec<T> {
    fn from(s: Schedule<T>) -> Self {
        s.thetas
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>", serialize = "T: Real + Serialize"))]
pub struct AisConfig<T> {
    pub num_paths: usize,
    /// Swendsen-Wang updates at zero field before the first level.
    pub burnin_steps: usize,
    pub steps_per_level: usize,
    pub schedule: Schedule<T>,
    pub base_seed: u64,
}

impl<T: Real> AisConfig<T> {
    /// 500 paths, 100 burn-in updates, one update per level over `levels` equal steps.
    pub fn with_levels(levels: usize, base_seed: u64) -> Result<Self> {
        Ok(Self {
            num_paths: 500,
            burnin_steps: 100,
            steps_per_level: 1,
            schedule: Schedule::linear(levels)?,
            base_seed,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_paths == 0 {
            return Err(Error::Invalid("num_paths must be at least 1".into()));
        }
        if self.steps_per_level == 0 {
            return Err(Error::Invalid("steps_per_level must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of one annealing path.
#[derive(Clone, Debug, PartialEq)]
pub struct AisPath<T> {
    pub final_spins: SpinConfig,
    /// Cumulative log weight after each level; entry `l - 1` is `log w_l`.
    pub log_weight_history: Vec<T>,
}

impl<T: Real> AisPath<T> {
    pub fn final_log_weight(&self) -> T {
        *self.log_weight_history.last().expect("at least one level")
    }
}

/// `log p̃_next(s) - log p̃_prev(s)` for unnormalized densities at field scales `theta_prev` and
/// `theta_next`.
pub fn log_weight_increment<T: Real>(
    g: &IsingGraph<T>,
    s: &SpinConfig,
    theta_prev: T,
    theta_next: T,
) -> Result<T> {
    g.check_spins(s)?;
    Ok(g.beta() * (theta_next - theta_prev) * g.field_sum_unchecked(s))
}

/// Random stream for one path.
pub fn path_rng(base_seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(path_index);
    rng
}

fn anneal<T: Real>(
    g: &IsingGraph<T>,
    cfg: &AisConfig<T>,
    path_index: usize,
    mut trace: Option<&mut Vec<SpinConfig>>,
) -> AisPath<T> {
    let mut rng = path_rng(cfg.base_seed, path_index as u64);
    let mut kernel = SwKernel::new(g);
    let mut s = SpinConfig::new(
        (0..g.n_interior())
            .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
            .collect(),
    )
    .expect("±1 by construction");
    for _ in 0..cfg.burnin_steps {
        kernel.step(g, T::zero(), &mut s, &mut rng);
    }

    let thetas = cfg.schedule.thetas();
    let levels = cfg.schedule.levels();
    let mut history = Vec::with_capacity(levels);
    let mut log_w = T::zero();
    for l in 1..=levels {
        if let Some(t) = trace.as_deref_mut() {
            t.push(s.clone());
        }
        let dtheta = thetas[l] - thetas[l - 1];
        if !dtheta.is_zero() {
            log_w = log_w + g.beta() * dtheta * g.field_sum_unchecked(&s);
        }
        history.push(log_w);
        if l < levels {
            for _ in 0..cfg.steps_per_level {
                kernel.step(g, thetas[l], &mut s, &mut rng);
            }
        }
    }
    AisPath { final_spins: s, log_weight_history: history }
}

/// Runs path `path_index` of the ensemble described by `cfg`.
pub fn run_path<T: Real>(g: &IsingGraph<T>, cfg: &AisConfig<T>, path_index: usize) -> Result<AisPath<T>> {
    cfg.validate()?;
    Ok(anneal(g, cfg, path_index, None))
}

/// Like [`run_path`], also returning the configuration at which each level's increment was
/// evaluated (entry `l - 1` is `s_{l-1/2}`).
pub fn run_path_traced<T: Real>(
    g: &IsingGraph<T>,
    cfg: &AisConfig<T>,
    path_index: usize,
) -> Result<(AisPath<T>, Vec<SpinConfig>)> {
    cfg.validate()?;
    let mut trace = Vec::with_capacity(cfg.schedule.levels());
    let path = anneal(g, cfg, path_index, Some(&mut trace));
    Ok((path, trace))
}

/// Runs all `num_paths` paths on the global rayon pool, in path order.
pub fn run_ensemble<T: Real>(g: &IsingGraph<T>, cfg: &AisConfig<T>) -> Result<Vec<AisPath<T>>> {
    cfg.validate()?;
    Ok((0..cfg.num_paths)
        .into_par_iter()
        .map(|k| anneal(g, cfg, k, None))
        .collect())
}

/// [`run_ensemble`] on a dedicated pool of `workers` threads.
pub fn run_ensemble_with_workers<T: Real>(
    g: &IsingGraph<T>,
    cfg: &AisConfig<T>,
    workers: usize,
) -> Result<Vec<AisPath<T>>> {
    if workers == 0 {
        return Err(Error::Invalid("worker count must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_ensemble(g, cfg))
}
