//! JSON form of a reduced model.

use serde::{Deserialize, Serialize};

use super::{IsingGraph, LatticeGeometry};
use crate::error::{Error, Result};
use crate::num::Real;

/// Serialized model. Keys are emitted in declaration order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument<T> {
    pub n_interior: usize,
    pub edges: Vec<[usize; 2]>,
    pub field: Vec<T>,
    pub beta: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<[f64; 2]>>,
}

impl<T: Real> GraphDocument<T> {
    pub fn new(graph: &IsingGraph<T>, geometry: Option<&LatticeGeometry>) -> Self {
        Self {
            n_interior: graph.n_interior(),
            edges: graph.edges().to_vec(),
            field: graph.field().to_vec(),
            beta: graph.beta(),
            coords: geometry.map(|g| g.coords.clone()),
        }
    }

    /// Validates the document back into a graph and optional geometry.
    pub fn into_parts(self) -> Result<(IsingGraph<T>, Option<LatticeGeometry>)> {
        if let Some(c) = &self.coords {
            if c.len() != self.n_interior {
                return Err(Error::Structural(format!(
                    "{} coordinates for {} interior vertices",
                    c.len(),
                    self.n_interior
                )));
            }
            if c.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::Structural("non-finite coordinate".into()));
            }
        }
        let graph = IsingGraph::new(self.n_interior, self.edges, self.field, self.beta)?;
        Ok((graph, self.coords.map(|coords| LatticeGeometry { coords })))
    }
}
