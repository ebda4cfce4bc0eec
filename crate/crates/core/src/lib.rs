//! Annealed importance sampling for Ising models with mixed boundary conditions.
//!
//! The boundary condition is folded into an external field on the interior vertices. Sampling
//! starts from the zero-field model, which Swendsen-Wang updates mix quickly, and switches the
//! field on over a schedule of levels while accumulating importance weights. The [`oracle`]
//! module enumerates small models exactly so every probabilistic statement can be checked.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the `*64` aliases below fix `f64`.

pub mod ais;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod model;
pub mod num;
pub mod oracle;
pub mod sw;

pub use error::{Error, Result};
pub use model::{BoundarySpec, LatticeGeometry, SpinConfig};
pub use num::Real;
pub use sw::EdgeConfig;

pub type IsingGraph64 = model::IsingGraph<f64>;
pub type IsingGraph32 = model::IsingGraph<f32>;
pub type Schedule64 = ais::Schedule<f64>;
pub type AisConfig64 = ais::AisConfig<f64>;
pub type AisPath64 = ais::AisPath<f64>;
pub type AisPath32 = ais::AisPath<f32>;
pub type ClusterPartition64 = sw::ClusterPartition<f64>;
pub type DiagnosticsReport64 = diagnostics::DiagnosticsReport<f64>;
pub type ExactDistribution64 = oracle::ExactDistribution<f64>;
