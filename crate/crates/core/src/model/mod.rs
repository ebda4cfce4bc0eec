//! Ising models with mixed boundary conditions.
//!
//! A model is stored in its reduced form: the interior graph, the inverse temperature and a
//! per-vertex external field `h_i = Σ f_b` collected from the boundary vertices adjacent to `i`.
//! The boundary itself only survives in [`BoundarySpec`], which the builders hand back for
//! inspection and export.

mod disk;
mod io;
mod square;

pub use disk::{build_disk_triangulation, quadrant_arcs, ArcCondition, DiskLattice};
pub use io::GraphDocument;
pub use square::{build_square_lattice, SquareBoundary, SquareLattice};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Interior graph, external field and inverse temperature.
///
/// Edges are stored with `i < j`, sorted, without duplicates or self-loops.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingGraph<T> {
    n_interior: usize,
    edges: Vec<[usize; 2]>,
    field: Vec<T>,
    beta: T,
}

impl<T: Real> IsingGraph<T> {
    /// Validates and canonicalizes an interior graph. Edge orientation is normalized and the
    /// edge list sorted; self-loops, duplicates and out-of-range endpoints are rejected.
    pub fn new(n_interior: usize, edges: Vec<[usize; 2]>, field: Vec<T>, beta: T) -> Result<Self> {
        if field.len() != n_interior {
            return Err(Error::Structural(format!(
                "field has {} entries for {} interior vertices",
                field.len(),
                n_interior
            )));
        }
        if !(beta > T::zero()) || !beta.is_finite() {
            return Err(Error::Structural(format!("beta must be positive and finite, got {beta}")));
        }
        if let Some(h) = field.iter().find(|h| !h.is_finite()) {
            return Err(Error::Structural(format!("non-finite field entry {h}")));
        }
        let mut edges: Vec<[usize; 2]> = edges
            .into_iter()
            .map(|[i, j]| if i <= j { [i, j] } else { [j, i] })
            .collect();
        for &[i, j] in &edges {
            if i == j {
                return Err(Error::Structural(format!("self-loop at vertex {i}")));
            }
            if j >= n_interior {
                return Err(Error::Structural(format!(
                    "edge ({i}, {j}) references a vertex outside 0..{n_interior}"
                )));
            }
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Structural(format!("duplicate edge ({}, {})", w[0][0], w[0][1])));
        }
        Ok(Self { n_interior, edges, field, beta })
    }

    /// Builds the reduced model from interior edges plus a boundary condition.
    pub fn with_boundary(
        n_interior: usize,
        edges: Vec<[usize; 2]>,
        boundary: &BoundarySpec,
        beta: T,
    ) -> Result<Self> {
        let field = boundary_to_field(n_interior, boundary)?;
        Self::new(n_interior, edges, field, beta)
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn field(&self) -> &[T] {
        &self.field
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// Same graph and field at another inverse temperature.
    pub fn with_beta(&self, beta: T) -> Result<Self> {
        Self::new(self.n_interior, self.edges.clone(), self.field.clone(), beta)
    }

    /// Same graph with every field entry multiplied by `scale`.
    pub fn with_scaled_field(&self, scale: T) -> Self {
        Self {
            field: self.field.iter().map(|&h| h * scale).collect(),
            ..self.clone()
        }
    }

    /// Interior degree of every vertex.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_interior];
        for &[i, j] in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn has_zero_field(&self) -> bool {
        self.field.iter().all(|h| h.is_zero())
    }

    /// Checks that `s` has one entry per interior vertex.
    pub fn check_spins(&self, s: &SpinConfig) -> Result<()> {
        if s.len() != self.n_interior {
            return Err(Error::Structural(format!(
                "spin configuration has {} entries for {} interior vertices",
                s.len(),
                self.n_interior
            )));
        }
        Ok(())
    }

    /// Returns `(Σ_{ij} s_i s_j, Σ_i h_i s_i)`. Neither term is multiplied by beta.
    pub fn energy_terms(&self, s: &SpinConfig) -> Result<(i64, T)> {
        self.check_spins(s)?;
        Ok(self.energy_terms_unchecked(s))
    }

    pub(crate) fn energy_terms_unchecked(&self, s: &SpinConfig) -> (i64, T) {
        let spins = s.as_slice();
        let coupling = self
            .edges
            .iter()
            .map(|&[i, j]| i64::from(spins[i] * spins[j]))
            .sum();
        (coupling, self.field_sum_unchecked(s))
    }

    #[inline]
    pub(crate) fn field_sum_unchecked(&self, s: &SpinConfig) -> T {
        self.field
            .iter()
            .zip(s.as_slice())
            .fold(T::zero(), |acc, (&h, &si)| if si > 0 { acc + h } else { acc - h })
    }

    /// Unnormalized log density `β (Σ s_i s_j + θ Σ h_i s_i)` at field scale `θ`.
    pub fn log_density(&self, s: &SpinConfig, field_scale: T) -> Result<T> {
        let (coupling, field) = self.energy_terms(s)?;
        Ok(self.beta * (T::lit(coupling as f64) + field_scale * field))
    }
}

/// `energy_terms` as a free function.
pub fn energy_terms<T: Real>(g: &IsingGraph<T>, s: &SpinConfig) -> Result<(i64, T)> {
    g.energy_terms(s)
}

/// Boundary vertices with their fixed values and the edges tying them to the interior.
///
/// Boundary vertices are numbered `0..values.len()`; `edges` holds `(interior, boundary)` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub values: Vec<i8>,
    pub edges: Vec<(usize, usize)>,
}

impl BoundarySpec {
    pub fn new(values: Vec<i8>, edges: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(v) = values.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::Structural(format!("boundary value {v} is not ±1")));
        }
        if let Some(&(_, b)) = edges.iter().find(|&&(_, b)| b >= values.len()) {
            return Err(Error::Structural(format!(
                "boundary edge references boundary vertex {b} of {}",
                values.len()
            )));
        }
        Ok(Self { values, edges })
    }

    pub fn num_boundary(&self) -> usize {
        self.values.len()
    }

    /// Same boundary with every value negated.
    pub fn negated(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| -v).collect(),
            edges: self.edges.clone(),
        }
    }
}

/// Folds the boundary condition into a per-vertex field `h_i = Σ_{ib} f_b`.
pub fn boundary_to_field<T: Real>(n_interior: usize, spec: &BoundarySpec) -> Result<Vec<T>> {
    let mut h = vec![0i64; n_interior];
    for &(i, b) in &spec.edges {
        if i >= n_interior {
            return Err(Error::Structural(format!(
                "boundary edge references interior vertex {i} of {n_interior}"
            )));
        }
        let f = *spec.values.get(b).ok_or_else(|| {
            Error::Structural(format!("boundary edge references boundary vertex {b}"))
        })?;
        h[i] += i64::from(f);
    }
    Ok(h.into_iter().map(|x| T::lit(x as f64)).collect())
}

/// One `±1` spin per interior vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(v) = spins.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::Structural(format!("spin value {v} is not ±1")));
        }
        Ok(Self(spins))
    }

    pub fn all_up(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Decodes a state index: bit `i` set means `s_i = +1`.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        Self((0..n).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect())
    }

    /// Inverse of [`SpinConfig::from_bits`].
    pub fn to_bits(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [i8] {
        &mut self.0
    }

    /// Total magnetization `Σ s_i`.
    pub fn magnetization(&self) -> i64 {
        self.0.iter().map(|&s| i64::from(s)).sum()
    }

    /// Global spin flip.
    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }
}

/// Planar coordinates of the interior vertices, used for export only.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeGeometry {
    pub coords: Vec<[f64; 2]>,
}
