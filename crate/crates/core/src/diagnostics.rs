//! Importance-weight diagnostics for an AIS ensemble.
//!
//! Weights are normalized by their ensemble mean, `w̃_k = w_k / mean(w)`. Reported quantities are
//! the per-level variance of `log w̃`, the sample efficiency `1 / (1 + Var[w̃_L])` and
//! self-normalized estimates of spin observables. All variances use the unbiased (K - 1)
//! estimator. Every quantity is invariant under a common shift of the log weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ais::AisPath;
use crate::error::{Error, Result};
use crate::model::SpinConfig;
use crate::num::{log_sum_exp, mean_and_variance, Real};

/// `log(mean_k exp(log_w_k))`.
fn log_mean_exp<T: Real>(log_w: &[T]) -> Result<T> {
    if log_w.is_empty() {
        return Err(Error::Invalid("no weights given".into()));
    }
    if let Some(x) = log_w.iter().find(|x| x.is_nan() || **x == T::infinity()) {
        return Err(Error::Invalid(format!("log weight {x} is not usable")));
    }
    let lse = log_sum_exp(log_w);
    if !lse.is_finite() {
        return Err(Error::Invalid("every weight is zero".into()));
    }
    Ok(lse - T::from_count(log_w.len()).ln())
}

/// Divides each weight by the ensemble mean. The output averages to one.
pub fn normalize_weights<T: Real>(log_w: &[T]) -> Result<Vec<T>> {
    let shift = log_mean_exp(log_w)?;
    Ok(log_w.iter().map(|&x| (x - shift).exp()).collect())
}

/// `log w̃_k` for every path.
pub fn log_normalized_weights<T: Real>(log_w: &[T]) -> Result<Vec<T>> {
    let shift = log_mean_exp(log_w)?;
    Ok(log_w.iter().map(|&x| x - shift).collect())
}

fn require_pair(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::Invalid(format!("diagnostics need at least 2 paths, got {k}")));
    }
    Ok(())
}

/// Variance over paths of `log w̃_l`, one entry per level. Rows are per-path histories.
pub fn variance_curve<T: Real, R: AsRef<[T]>>(history: &[R]) -> Result<Vec<T>> {
    require_pair(history.len())?;
    let levels = history[0].as_ref().len();
    if history.iter().any(|r| r.as_ref().len() != levels) {
        return Err(Error::Structural("history rows have different lengths".into()));
    }
    let mut column = Vec::with_capacity(history.len());
    (0..levels)
        .map(|l| {
            column.clear();
            column.extend(history.iter().map(|r| r.as_ref()[l]));
            let logs = log_normalized_weights(&column)?;
            Ok(mean_and_variance(&logs).1)
        })
        .collect()
}

/// Variance curve of an ensemble.
pub fn ensemble_variance_curve<T: Real>(paths: &[AisPath<T>]) -> Result<Vec<T>> {
    let rows: Vec<&[T]> = paths.iter().map(|p| p.log_weight_history.as_slice()).collect();
    variance_curve(&rows)
}

/// `1 / (1 + Var[w̃])` over the final-level weights.
pub fn sample_efficiency<T: Real>(log_w: &[T]) -> Result<T> {
    require_pair(log_w.len())?;
    let w = normalize_weights(log_w)?;
    Ok(T::one() / (T::one() + mean_and_variance(&w).1))
}

/// Estimate with a standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub std_error: T,
    /// Set when at most one path carries non-negligible weight.
    pub degenerate: bool,
}

/// Self-normalized importance estimate `Σ w_k f(s_k) / Σ w_k` with delta-method standard error
/// `sqrt(Σ ω_k² (f_k - est)²)`, `ω_k = w_k / Σ w`.
pub fn weighted_observable<T: Real, F>(paths: &[AisPath<T>], obs: F) -> Result<Estimate<T>>
where
    F: Fn(&SpinConfig) -> T,
{
    require_pair(paths.len())?;
    let log_w: Vec<T> = paths.iter().map(AisPath::final_log_weight).collect();
    let values: Vec<T> = paths.iter().map(|p| obs(&p.final_spins)).collect();
    weighted_estimate(&log_w, &values)
}

/// Self-normalized estimate from raw log weights and observable values.
pub fn weighted_estimate<T: Real>(log_w: &[T], values: &[T]) -> Result<Estimate<T>> {
    if log_w.len() != values.len() {
        return Err(Error::Structural("weights and values differ in length".into()));
    }
    require_pair(log_w.len())?;
    let w = normalize_weights(log_w)?;
    let total: T = w.iter().copied().sum();
    let omega: Vec<T> = w.iter().map(|&x| x / total).collect();
    let value: T = omega.iter().zip(values).map(|(&o, &f)| o * f).sum();
    let var: T = omega
        .iter()
        .zip(values)
        .map(|(&o, &f)| o * o * (f - value) * (f - value))
        .sum();
    let sum_sq: T = omega.iter().map(|&o| o * o).sum();
    let degenerate = T::one() / sum_sq < T::lit(1.0 + 1e-6);
    Ok(Estimate { value, std_error: var.sqrt(), degenerate })
}

/// Standard error of the self-normalized estimate from `resamples` bootstrap replicates of the
/// paths. The point estimate is the plain weighted estimate.
pub fn bootstrap_observable<T: Real, F>(
    paths: &[AisPath<T>],
    obs: F,
    resamples: usize,
    seed: u64,
) -> Result<Estimate<T>>
where
    F: Fn(&SpinConfig) -> T,
{
    if resamples < 2 {
        return Err(Error::Invalid("bootstrap needs at least 2 resamples".into()));
    }
    let log_w: Vec<T> = paths.iter().map(AisPath::final_log_weight).collect();
    let values: Vec<T> = paths.iter().map(|p| obs(&p.final_spins)).collect();
    let point = weighted_estimate(&log_w, &values)?;
    let k = paths.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lw = vec![T::zero(); k];
    let mut fv = vec![T::zero(); k];
    let mut replicates = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        for slot in 0..k {
            let pick = rng.gen_range(0..k);
            lw[slot] = log_w[pick];
            fv[slot] = values[pick];
        }
        replicates.push(weighted_estimate(&lw, &fv)?.value);
    }
    Ok(Estimate { std_error: mean_and_variance(&replicates).1.sqrt(), ..point })
}

/// Ensemble mean of the raw weights, carried in log space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanWeight<T> {
    /// `log(mean_k w_k)`, an estimate of `log Z(1) - log Z(0)`.
    pub log_mean: T,
    /// Standard error of the mean divided by the mean.
    pub relative_error: T,
}

pub fn mean_weight<T: Real>(log_w: &[T]) -> Result<MeanWeight<T>> {
    require_pair(log_w.len())?;
    let log_mean = log_mean_exp(log_w)?;
    let w = normalize_weights(log_w)?;
    let var = mean_and_variance(&w).1;
    Ok(MeanWeight { log_mean, relative_error: (var / T::from_count(log_w.len())).sqrt() })
}

/// Total magnetization `Σ s_i`.
pub fn magnetization<T: Real>(s: &SpinConfig) -> T {
    T::lit(s.magnetization() as f64)
}

/// Indicator of `Σ s_i > 0`, distinguishing the two dominant profiles.
pub fn positive_magnetization<T: Real>(s: &SpinConfig) -> T {
    if s.magnetization() > 0 {
        T::one()
    } else {
        T::zero()
    }
}

/// Weighted mean spin of every vertex.
pub fn mean_spin_map<T: Real>(paths: &[AisPath<T>]) -> Result<Vec<T>> {
    require_pair(paths.len())?;
    let log_w: Vec<T> = paths.iter().map(AisPath::final_log_weight).collect();
    let w = normalize_weights(&log_w)?;
    let total: T = w.iter().copied().sum();
    let n = paths[0].final_spins.len();
    let mut map = vec![T::zero(); n];
    for (p, &wk) in paths.iter().zip(&w) {
        for (m, &s) in map.iter_mut().zip(p.final_spins.as_slice()) {
            *m = if s > 0 { *m + wk } else { *m - wk };
        }
    }
    Ok(map.into_iter().map(|m| m / total).collect())
}

/// Per-level variance of `log w̃` accumulated one path at a time (Welford updates).
///
/// `log w̃` differs from `log w` by a per-level constant, so the variance of the raw log weights
/// is accumulated directly.
#[derive(Clone, Debug)]
pub struct StreamingVarianceCurve<T> {
    count: usize,
    mean: Vec<T>,
    m2: Vec<T>,
}

impl<T: Real> StreamingVarianceCurve<T> {
    pub fn new(levels: usize) -> Self {
        Self { count: 0, mean: vec![T::zero(); levels], m2: vec![T::zero(); levels] }
    }

    pub fn push(&mut self, history: &[T]) -> Result<()> {
        if history.len() != self.mean.len() {
            return Err(Error::Structural(format!(
                "history of length {} pushed into a {}-level accumulator",
                history.len(),
                self.mean.len()
            )));
        }
        self.count += 1;
        let n = T::from_count(self.count);
        for ((mean, m2), &x) in self.mean.iter_mut().zip(&mut self.m2).zip(history) {
            let delta = x - *mean;
            *mean = *mean + delta / n;
            *m2 = *m2 + delta * (x - *mean);
        }
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn curve(&self) -> Result<Vec<T>> {
        require_pair(self.count)?;
        let denom = T::from_count(self.count - 1);
        Ok(self.m2.iter().map(|&m| m / denom).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSummary<T> {
    pub magnetization: Estimate<T>,
    pub positive_magnetization: Estimate<T>,
    pub abs_magnetization: Estimate<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport<T> {
    pub variance_curve: Vec<T>,
    pub efficiency: T,
    pub mean_weight: MeanWeight<T>,
    pub observables: ObservableSummary<T>,
}

/// Full diagnostics for an ensemble of at least two paths.
pub fn diagnose<T: Real>(paths: &[AisPath<T>]) -> Result<DiagnosticsReport<T>> {
    require_pair(paths.len())?;
    let final_w: Vec<T> = paths.iter().map(AisPath::final_log_weight).collect();
    Ok(DiagnosticsReport {
        variance_curve: ensemble_variance_curve(paths)?,
        efficiency: sample_efficiency(&final_w)?,
        mean_weight: mean_weight(&final_w)?,
        observables: ObservableSummary {
            magnetization: weighted_observable(paths, magnetization)?,
            positive_magnetization: weighted_observable(paths, positive_magnetization)?,
            abs_magnetization: weighted_observable(paths, |s| magnetization::<T>(s).abs())?,
        },
    })
}
