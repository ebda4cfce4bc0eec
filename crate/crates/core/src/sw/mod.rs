//! Swendsen-Wang updates for Ising models with an external field.
//!
//! One update activates bonds between aligned neighbors, finds the connected components of the
//! active bonds and redraws every component as a block, biased by its total field. The field can
//! be scaled by a factor in `[0, 1]` at call time so a single graph serves every annealing level.
//!
//! The free functions expose the three stages separately; [`SwKernel`] fuses them and reuses its
//! buffers. Both consume random numbers in the same order, so for a given stream they produce the
//! same trajectory.

mod union_find;

pub use union_find::DisjointSets;

use rand::distributions::{Bernoulli, Distribution};
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{IsingGraph, SpinConfig};
use crate::num::{logistic, Real};

/// Bond indicators, parallel to [`IsingGraph::edges`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeConfig(Vec<bool>);

impl EdgeConfig {
    pub fn new(active: Vec<bool>) -> Self {
        Self(active)
    }

    /// Decodes a bond-state index: bit `e` set means edge `e` is active.
    pub fn from_bits(m: usize, bits: u64) -> Self {
        Self((0..m).map(|e| bits >> e & 1 == 1).collect())
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn num_active(&self) -> usize {
        self.0.iter().filter(|&&a| a).count()
    }
}

/// Connected components of the active bonds.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterPartition<T> {
    /// Component id per vertex; ids are `0..count`, numbered by smallest member vertex.
    pub labels: Vec<usize>,
    /// Total field `h_γ` per component.
    pub field_sums: Vec<T>,
}

impl<T: Real> ClusterPartition<T> {
    pub fn count(&self) -> usize {
        self.field_sums.len()
    }

    /// Same partition with every component field multiplied by `scale`.
    pub fn scale_field(mut self, scale: T) -> Self {
        for h in &mut self.field_sums {
            *h = *h * scale;
        }
        self
    }

    /// Members of every component, in vertex order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count()];
        for (v, &c) in self.labels.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

/// Probability of activating a bond between aligned spins, `1 - exp(-2β)`.
pub fn bond_probability<T: Real>(beta: T) -> T {
    -(T::lit(-2.0) * beta).exp_m1()
}

/// Probability that a component with total field `h` (already scaled) is set to `+1`.
pub fn plus_probability<T: Real>(beta: T, h: T) -> T {
    logistic(T::lit(2.0) * beta * h)
}

fn bond_distribution<T: Real>(beta: T) -> Bernoulli {
    Bernoulli::new(bond_probability(beta).as_f64()).expect("bond probability in [0, 1]")
}

#[inline]
fn draw_cluster_spin<T: Real, R: Rng + ?Sized>(beta: T, h: T, rng: &mut R) -> i8 {
    let p = if h.is_zero() { 0.5 } else { plus_probability(beta, h).as_f64() };
    if rng.gen_bool(p) {
        1
    } else {
        -1
    }
}

/// Draws bonds: anti-aligned edges stay inactive, aligned ones are active with probability
/// `1 - exp(-2β)`. One random draw per aligned edge, in edge order.
pub fn activate_edges<T: Real, R: Rng + ?Sized>(
    g: &IsingGraph<T>,
    s: &SpinConfig,
    rng: &mut R,
) -> Result<EdgeConfig> {
    g.check_spins(s)?;
    let bond = bond_distribution(g.beta());
    let spins = s.as_slice();
    Ok(EdgeConfig(
        g.edges()
            .iter()
            .map(|&[i, j]| spins[i] == spins[j] && bond.sample(rng))
            .collect(),
    ))
}

/// Components of the active-bond subgraph with their unscaled field sums.
pub fn connected_components<T: Real>(g: &IsingGraph<T>, w: &EdgeConfig) -> Result<ClusterPartition<T>> {
    if w.len() != g.num_edges() {
        return Err(Error::Structural(format!(
            "edge configuration has {} entries for {} edges",
            w.len(),
            g.num_edges()
        )));
    }
    let mut sets = DisjointSets::new(g.n_interior());
    for (&[i, j], &active) in g.edges().iter().zip(w.as_slice()) {
        if active {
            sets.union(i, j);
        }
    }
    let mut root_label = vec![usize::MAX; g.n_interior()];
    let mut labels = Vec::with_capacity(g.n_interior());
    let mut field_sums = Vec::new();
    for (v, &h) in g.field().iter().enumerate() {
        let r = sets.find(v);
        if root_label[r] == usize::MAX {
            root_label[r] = field_sums.len();
            field_sums.push(T::zero());
        }
        let c = root_label[r];
        labels.push(c);
        field_sums[c] = field_sums[c] + h;
    }
    Ok(ClusterPartition { labels, field_sums })
}

/// Gives every component a common spin, `+1` with probability `σ(2 β h_γ)`. One draw per
/// component, in id order.
pub fn assign_clusters<T: Real, R: Rng + ?Sized>(
    p: &ClusterPartition<T>,
    beta: T,
    rng: &mut R,
) -> SpinConfig {
    let block: Vec<i8> = p
        .field_sums
        .iter()
        .map(|&h| draw_cluster_spin(beta, h, rng))
        .collect();
    SpinConfig::new(p.labels.iter().map(|&c| block[c]).collect()).expect("±1 by construction")
}

/// One Swendsen-Wang update at field scale `field_scale`.
pub fn sw_step<T: Real, R: Rng + ?Sized>(
    g: &IsingGraph<T>,
    field_scale: T,
    s: &SpinConfig,
    rng: &mut R,
) -> Result<SpinConfig> {
    g.check_spins(s)?;
    let mut next = s.clone();
    SwKernel::new(g).step(g, field_scale, &mut next, rng);
    Ok(next)
}

/// Fused Swendsen-Wang update with reusable buffers.
///
/// A kernel is sized for one graph; stepping a different graph of the same size is fine.
#[derive(Clone, Debug)]
pub struct SwKernel<T> {
    sets: DisjointSets,
    root_label: Vec<u32>,
    vertex_label: Vec<u32>,
    cluster_field: Vec<T>,
    cluster_spin: Vec<i8>,
    bond: Bernoulli,
    beta: T,
}

const UNLABELED: u32 = u32::MAX;

impl<T: Real> SwKernel<T> {
    pub fn new(g: &IsingGraph<T>) -> Self {
        let n = g.n_interior();
        assert!(n < UNLABELED as usize, "graph too large for 32-bit component labels");
        Self {
            sets: DisjointSets::new(n),
            root_label: vec![UNLABELED; n],
            vertex_label: vec![0; n],
            cluster_field: Vec::with_capacity(n),
            cluster_spin: Vec::with_capacity(n),
            bond: bond_distribution(g.beta()),
            beta: g.beta(),
        }
    }

    /// Replaces `s` by one Swendsen-Wang update of it. `s` must match the graph size.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        g: &IsingGraph<T>,
        field_scale: T,
        s: &mut SpinConfig,
        rng: &mut R,
    ) {
        let n = g.n_interior();
        debug_assert_eq!(s.len(), n);
        if g.beta() != self.beta {
            self.bond = bond_distribution(g.beta());
            self.beta = g.beta();
        }
        self.sets.reset(n);
        self.root_label.clear();
        self.root_label.resize(n, UNLABELED);
        self.vertex_label.resize(n, 0);

        let spins = s.as_mut_slice();
        for &[i, j] in g.edges() {
            if spins[i] == spins[j] && self.bond.sample(rng) {
                self.sets.union(i, j);
            }
        }

        self.cluster_field.clear();
        for (v, &h) in g.field().iter().enumerate() {
            let r = self.sets.find(v);
            let mut c = self.root_label[r];
            if c == UNLABELED {
                c = self.cluster_field.len() as u32;
                self.root_label[r] = c;
                self.cluster_field.push(T::zero());
            }
            self.vertex_label[v] = c;
            self.cluster_field[c as usize] = self.cluster_field[c as usize] + h;
        }

        self.cluster_spin.clear();
        for &h in &self.cluster_field {
            self.cluster_spin.push(draw_cluster_spin(self.beta, h * field_scale, rng));
        }
        for (si, &c) in spins.iter_mut().zip(&self.vertex_label) {
            *si = self.cluster_spin[c as usize];
        }
    }

    /// Number of clusters formed by the most recent step.
    pub fn last_cluster_count(&self) -> usize {
        self.cluster_field.len()
    }
}
