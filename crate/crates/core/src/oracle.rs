//! Brute-force exact computations on small models.
//!
//! Everything here enumerates states explicitly and shares no code with the samplers: cluster
//! labeling is a separate depth-first search, and an independent row-transfer evaluation of the
//! partition function cross-checks the spin enumerator on grids. Spin states are indexed by
//! bitmask (bit `i` set means `s_i = +1`), bond states likewise by edge index. Field scales
//! multiply `h` everywhere it appears.

use crate::ais::Schedule;
use crate::error::{Error, Result};
use crate::model::{IsingGraph, SpinConfig};
use crate::num::{log_sum_exp, Real};

pub const MAX_SPIN_VERTICES: usize = 24;
pub const MAX_JOINT_BITS: usize = 24;
pub const MAX_BOND_EDGES: usize = 20;
pub const MAX_TRANSITION_VERTICES: usize = 9;
pub const MAX_TRANSITION_EDGES: usize = 16;
pub const MAX_STRIP_WIDTH: usize = 12;

fn guard(what: &'static str, got: usize, limit: usize) -> Result<()> {
    if got > limit {
        return Err(Error::SizeGuard { what, limit, got });
    }
    Ok(())
}

/// Normalized distribution over an enumerated state space.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution<T> {
    /// Unnormalized log weight per state; `-inf` for impossible states.
    pub log_weights: Vec<T>,
    pub log_z: T,
}

impl<T: Real> ExactDistribution<T> {
    fn from_log_weights(log_weights: Vec<T>) -> Self {
        let log_z = log_sum_exp(&log_weights);
        Self { log_weights, log_z }
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    pub fn prob(&self, state: usize) -> T {
        (self.log_weights[state] - self.log_z).exp()
    }

    pub fn probs(&self) -> Vec<T> {
        (0..self.len()).map(|k| self.prob(k)).collect()
    }

    /// `Σ_state p(state) f(state)`.
    pub fn expectation<F: Fn(usize) -> T>(&self, f: F) -> T {
        (0..self.len()).map(|k| self.prob(k) * f(k)).sum()
    }
}

fn log_field_factor<T: Real>(beta: T, scaled_field: &[T], bits: u64) -> T {
    let sum = scaled_field
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (i, &h)| if bits >> i & 1 == 1 { acc + h } else { acc - h });
    beta * sum
}

fn scaled_field<T: Real>(g: &IsingGraph<T>, field_scale: T) -> Vec<T> {
    g.field().iter().map(|&h| h * field_scale).collect()
}

#[inline]
fn aligned(bits: u64, i: usize, j: usize) -> bool {
    (bits >> i & 1) == (bits >> j & 1)
}

/// Ising distribution `p_V(s) ∝ exp(β Σ s_i s_j + β θ Σ h_i s_i)`.
pub fn enumerate_pv<T: Real>(g: &IsingGraph<T>, field_scale: T) -> Result<ExactDistribution<T>> {
    let n = g.n_interior();
    guard("interior vertices", n, MAX_SPIN_VERTICES)?;
    let h = scaled_field(g, field_scale);
    let beta = g.beta();
    let log_weights = (0..1u64 << n)
        .map(|bits| {
            let coupling = g
                .edges()
                .iter()
                .fold(0i64, |acc, &[i, j]| if aligned(bits, i, j) { acc + 1 } else { acc - 1 });
            beta * T::lit(coupling as f64) + log_field_factor(beta, &h, bits)
        })
        .collect();
    Ok(ExactDistribution::from_log_weights(log_weights))
}

/// Joint spin-bond distribution. State index is `(spin_bits << m) | bond_bits`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution<T> {
    pub dist: ExactDistribution<T>,
    pub n_vertices: usize,
    pub n_edges: usize,
}

impl<T: Real> JointDistribution<T> {
    /// `Σ_w p_VE(s, w)` per spin state.
    pub fn spin_marginal(&self) -> Vec<T> {
        let m = self.n_edges;
        (0..1usize << self.n_vertices)
            .map(|s| (0..1usize << m).map(|w| self.dist.prob(s << m | w)).sum())
            .collect()
    }

    /// `Σ_s p_VE(s, w)` per bond state.
    pub fn bond_marginal(&self) -> Vec<T> {
        let m = self.n_edges;
        (0..1usize << m)
            .map(|w| (0..1usize << self.n_vertices).map(|s| self.dist.prob(s << m | w)).sum())
            .collect()
    }
}

/// Joint vertex-edge distribution: per edge a factor `(1 - e^{-2β}) [s_i = s_j] [w = 1] +
/// e^{-2β} [w = 0]`, times the field factor `exp(β θ Σ h_i s_i)`.
pub fn enumerate_pve<T: Real>(g: &IsingGraph<T>, field_scale: T) -> Result<JointDistribution<T>> {
    let (n, m) = (g.n_interior(), g.num_edges());
    guard("interior vertices + edges", n + m, MAX_JOINT_BITS)?;
    let h = scaled_field(g, field_scale);
    let beta = g.beta();
    let log_bond = (T::one() - (T::lit(-2.0) * beta).exp()).ln();
    let log_free = T::lit(-2.0) * beta;
    let mut log_weights = Vec::with_capacity(1 << (n + m));
    for s in 0..1u64 << n {
        let field = log_field_factor(beta, &h, s);
        for w in 0..1u64 << m {
            let mut lw = field;
            for (e, &[i, j]) in g.edges().iter().enumerate() {
                if w >> e & 1 == 1 {
                    lw = if aligned(s, i, j) { lw + log_bond } else { T::neg_infinity() };
                } else {
                    lw = lw + log_free;
                }
            }
            log_weights.push(lw);
        }
    }
    Ok(JointDistribution {
        dist: ExactDistribution::from_log_weights(log_weights),
        n_vertices: n,
        n_edges: m,
    })
}

/// Component label per vertex of the subgraph of active bonds, by depth-first search.
fn bond_clusters(n: usize, edges: &[[usize; 2]], bonds: u64) -> (Vec<usize>, usize) {
    let mut adj = vec![Vec::new(); n];
    for (e, &[i, j]) in edges.iter().enumerate() {
        if bonds >> e & 1 == 1 {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for root in 0..n {
        if label[root] != usize::MAX {
            continue;
        }
        label[root] = count;
        stack.push(root);
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if label[u] == usize::MAX {
                    label[u] = count;
                    stack.push(u);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

fn cluster_fields<T: Real>(labels: &[usize], count: usize, h: &[T]) -> Vec<T> {
    let mut sums = vec![T::zero(); count];
    for (&c, &hi) in labels.iter().zip(h) {
        sums[c] = sums[c] + hi;
    }
    sums
}

/// `ln(e^x + e^{-x})` without overflow.
fn log_two_cosh<T: Real>(x: T) -> T {
    let a = x.abs();
    a + (T::lit(-2.0) * a).exp().ln_1p()
}

/// Bond distribution `p_E(w) ∝ Π_{w=1} (1 - e^{-2β}) Π_{w=0} e^{-2β} Π_γ (e^{-β h_γ} + e^{β h_γ})`.
pub fn enumerate_pe<T: Real>(g: &IsingGraph<T>, field_scale: T) -> Result<ExactDistribution<T>> {
    let (n, m) = (g.n_interior(), g.num_edges());
    guard("edges", m, MAX_BOND_EDGES)?;
    let h = scaled_field(g, field_scale);
    let beta = g.beta();
    let log_bond = (T::one() - (T::lit(-2.0) * beta).exp()).ln();
    let log_free = T::lit(-2.0) * beta;
    let log_weights = (0..1u64 << m)
        .map(|w| {
            let active = w.count_ones() as usize;
            let (labels, count) = bond_clusters(n, g.edges(), w);
            let clusters: T = cluster_fields(&labels, count, &h)
                .into_iter()
                .map(|hg| log_two_cosh(beta * hg))
                .sum();
            T::from_count(active) * log_bond + T::from_count(m - active) * log_free + clusters
        })
        .collect();
    Ok(ExactDistribution::from_log_weights(log_weights))
}

/// Dense row-stochastic matrix over spin states.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix<T> {
    pub n_states: usize,
    pub entries: Vec<T>,
}

impl<T: Real> TransitionMatrix<T> {
    pub fn get(&self, from: usize, to: usize) -> T {
        self.entries[from * self.n_states + to]
    }

    pub fn row(&self, from: usize) -> &[T] {
        &self.entries[from * self.n_states..(from + 1) * self.n_states]
    }

    /// `π P` for a row vector `π`.
    pub fn apply_left(&self, pi: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n_states];
        for (s, &ps) in pi.iter().enumerate() {
            for (o, &p) in out.iter_mut().zip(self.row(s)) {
                *o = *o + ps * p;
            }
        }
        out
    }

    /// Largest `|π(s) P(s,t) - π(t) P(t,s)| / max(π(s) P(s,t), π(t) P(t,s))` over pairs with a
    /// nonzero flow.
    pub fn detailed_balance_residual(&self, pi: &[T]) -> T {
        let mut worst = T::zero();
        for s in 0..self.n_states {
            for t in s + 1..self.n_states {
                let a = pi[s] * self.get(s, t);
                let b = pi[t] * self.get(t, s);
                let scale = a.max(b);
                if scale > T::zero() {
                    worst = worst.max((a - b).abs() / scale);
                }
            }
        }
        worst
    }

    /// Largest `|(π P)(t) - π(t)| / π(t)`.
    pub fn stationarity_residual(&self, pi: &[T]) -> T {
        self.apply_left(pi)
            .iter()
            .zip(pi)
            .map(|(&a, &b)| (a - b).abs() / b)
            .fold(T::zero(), T::max)
    }
}

/// Exact one-step Swendsen-Wang transition matrix `P(s, t) = Σ_w P(w | s) P(t | w)`.
pub fn exact_sw_transition<T: Real>(g: &IsingGraph<T>, field_scale: T) -> Result<TransitionMatrix<T>> {
    let (n, m) = (g.n_interior(), g.num_edges());
    guard("interior vertices", n, MAX_TRANSITION_VERTICES)?;
    guard("edges", m, MAX_TRANSITION_EDGES)?;
    let h = scaled_field(g, field_scale);
    let beta = g.beta();
    let two = T::lit(2.0);

    // P(t | w) is independent of s: store the support for every bond state.
    let targets: Vec<Vec<(usize, T)>> = (0..1u64 << m)
        .map(|w| {
            let (labels, count) = bond_clusters(n, g.edges(), w);
            let fields = cluster_fields(&labels, count, &h);
            let masks: Vec<usize> = (0..count)
                .map(|c| labels.iter().enumerate().filter(|(_, &l)| l == c).fold(0, |a, (v, _)| a | 1 << v))
                .collect();
            (0..1usize << count)
                .map(|choice| {
                    let mut t = 0;
                    let mut p = T::one();
                    for c in 0..count {
                        let x = two * beta * fields[c];
                        let up = T::one() / (T::one() + (-x).exp());
                        if choice >> c & 1 == 1 {
                            t |= masks[c];
                            p = p * up;
                        } else {
                            p = p * (T::one() - up);
                        }
                    }
                    (t, p)
                })
                .collect()
        })
        .collect();

    let q = (-two * beta).exp();
    let p_bond = T::one() - q;
    let n_states = 1usize << n;
    let mut entries = vec![T::zero(); n_states * n_states];
    for s in 0..n_states {
        let aligned_edges: Vec<usize> = g
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, &[i, j])| aligned(s as u64, i, j))
            .map(|(e, _)| e)
            .collect();
        let a = aligned_edges.len();
        let row = &mut entries[s * n_states..(s + 1) * n_states];
        for subset in 0..1usize << a {
            let mut w = 0u64;
            for (k, &e) in aligned_edges.iter().enumerate() {
                if subset >> k & 1 == 1 {
                    w |= 1 << e;
                }
            }
            let on = subset.count_ones() as i32;
            let pw = p_bond.powi(on) * q.powi(a as i32 - on);
            for &(t, pt) in &targets[w as usize] {
                row[t] = row[t] + pw * pt;
            }
        }
    }
    Ok(TransitionMatrix { n_states, entries })
}

/// Exact expected AIS weight, `Z(θ = 1) / Z(θ = 0)`. The value does not depend on the
/// intermediate levels; the schedule only fixes the endpoints.
pub fn exact_ais_mean_weight<T: Real>(g: &IsingGraph<T>, schedule: &Schedule<T>) -> Result<T> {
    let th = schedule.thetas();
    let z1 = enumerate_pv(g, th[th.len() - 1])?.log_z;
    let z0 = enumerate_pv(g, th[0])?.log_z;
    Ok((z1 - z0).exp())
}

/// `log Z` of an `n1 × n2` nearest-neighbor grid (row-major field, `n1` sites per row) by
/// row-to-row transfer, without reference to any edge list.
pub fn strip_log_z<T: Real>(n1: usize, n2: usize, field: &[T], beta: T, field_scale: T) -> Result<T> {
    guard("strip width", n1, MAX_STRIP_WIDTH)?;
    if field.len() != n1 * n2 || n1 == 0 || n2 == 0 {
        return Err(Error::Structural(format!(
            "field of length {} does not fit a {n1}x{n2} grid",
            field.len()
        )));
    }
    let spin = |row: usize, c: usize| -> i64 { if row >> c & 1 == 1 { 1 } else { -1 } };
    let rows = 1usize << n1;
    let within = |row: usize, r: usize| -> T {
        let bonds: i64 = (1..n1).map(|c| spin(row, c - 1) * spin(row, c)).sum();
        let f: T = (0..n1)
            .map(|c| field[r * n1 + c] * T::lit(spin(row, c) as f64))
            .sum();
        beta * (T::lit(bonds as f64) + field_scale * f)
    };
    let between = |a: usize, b: usize| -> T {
        let bonds: i64 = (0..n1).map(|c| spin(a, c) * spin(b, c)).sum();
        beta * T::lit(bonds as f64)
    };

    let mut log_v: Vec<T> = (0..rows).map(|row| within(row, 0)).collect();
    let mut terms = vec![T::zero(); rows];
    for r in 1..n2 {
        log_v = (0..rows)
            .map(|cur| {
                for (prev, t) in terms.iter_mut().enumerate() {
                    *t = log_v[prev] + between(prev, cur);
                }
                log_sum_exp(&terms) + within(cur, r)
            })
            .collect();
    }
    Ok(log_sum_exp(&log_v))
}

/// Exact `E[f(s)]` under `p_V` at the given field scale.
pub fn exact_expectation<T: Real, F: Fn(&SpinConfig) -> T>(
    g: &IsingGraph<T>,
    field_scale: T,
    f: F,
) -> Result<T> {
    let d = enumerate_pv(g, field_scale)?;
    let n = g.n_interior();
    Ok(d.expectation(|k| f(&SpinConfig::from_bits(n, k as u64))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_square_lattice, SquareBoundary};

    fn single(h: f64) -> IsingGraph<f64> {
        IsingGraph::new(1, vec![], vec![h], 0.5).unwrap()
    }

    fn pair() -> IsingGraph<f64> {
        IsingGraph::new(2, vec![[0, 1]], vec![0.0; 2], 0.5).unwrap()
    }

    #[test]
    fn two_state_boltzmann() {
        let d = enumerate_pv(&single(2.0), 1.0).unwrap();
        assert!((d.prob(1) - 0.880_797_077_977_882_4).abs() < 1e-15);
        let sum: f64 = d.probs().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aligned_pair_probability() {
        let d = enumerate_pv(&pair(), 1.0).unwrap();
        let p_aligned = d.prob(0) + d.prob(3);
        let expected = 0.5f64.exp() / (0.5f64.exp() + (-0.5f64).exp());
        assert!((p_aligned - expected).abs() < 1e-15);
        assert!((expected - 0.731_058_578_630_004_9).abs() < 1e-15);
    }

    #[test]
    fn single_edge_bond_probability() {
        let d = enumerate_pe(&pair(), 1.0).unwrap();
        let e1 = (-1.0f64).exp();
        let expected = 2.0 * (1.0 - e1) / (2.0 * (1.0 - e1) + 4.0 * e1);
        assert!((d.prob(1) - expected).abs() < 1e-15);
        assert!((expected - 0.462_117_157_260_009_8).abs() < 1e-12);
    }

    #[test]
    fn zero_field_bond_weights_count_clusters() {
        let g = build_square_lattice(2, 2, SquareBoundary::VERTICAL_PLUS, 0.4_f64).unwrap().graph;
        let d = enumerate_pe(&g, 0.0).unwrap();
        let (p, q) = (1.0 - (-0.8f64).exp(), (-0.8f64).exp());
        for w in 0..16u64 {
            let (_, count) = bond_clusters(4, g.edges(), w);
            let on = w.count_ones() as i32;
            let direct = p.powi(on) * q.powi(4 - on) * 2f64.powi(count as i32);
            assert!((d.log_weights[w as usize] - direct.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_forbids_bonds_across_unequal_spins() {
        let d = enumerate_pve(&pair(), 1.0).unwrap();
        // s = 0b01 (unequal), w = 1.
        assert_eq!(d.dist.prob(0b01 << 1 | 1), 0.0);
        assert!(d.dist.prob(0b11 << 1 | 1) > 0.0);
    }

    #[test]
    fn ais_weight_closed_forms() {
        let sched = Schedule::linear(5).unwrap();
        let r = exact_ais_mean_weight(&single(2.0), &sched).unwrap();
        assert!((r - (1f64.exp() + (-1f64).exp()) / 2.0).abs() < 1e-14);
        assert!((r - 1.543_080_634_815_243_7).abs() < 1e-14);
        assert!((exact_ais_mean_weight(&pair(), &sched).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn transfer_matrix_agrees_with_enumeration() {
        for (n1, n2, bc, beta, theta) in [
            (3, 3, SquareBoundary::VERTICAL_PLUS, 0.5_f64, 1.0_f64),
            (2, 5, SquareBoundary::QUADRANTS_ALTERNATING, 0.9, 0.4),
            (4, 3, SquareBoundary::VERTICAL_PLUS, 0.3, 0.0),
            (1, 6, SquareBoundary::QUADRANTS_ALTERNATING, 1.2, 1.0),
        ] {
            let g = build_square_lattice(n1, n2, bc, beta).unwrap().graph;
            let enumerated = enumerate_pv(&g, theta).unwrap().log_z;
            let transfer = strip_log_z(n1, n2, g.field(), beta, theta).unwrap();
            assert!((enumerated - transfer).abs() < 1e-12 * enumerated.abs().max(1.0));
        }
    }

    #[test]
    fn size_guards_are_errors() {
        let big = build_square_lattice(5, 5, SquareBoundary::VERTICAL_PLUS, 0.5_f64).unwrap().graph;
        assert!(matches!(enumerate_pv(&big, 1.0), Err(Error::SizeGuard { .. })));
        assert!(matches!(enumerate_pe(&big, 1.0), Err(Error::SizeGuard { .. })));
        let g4 = build_square_lattice(4, 3, SquareBoundary::VERTICAL_PLUS, 0.5_f64).unwrap().graph;
        assert!(matches!(exact_sw_transition(&g4, 1.0), Err(Error::SizeGuard { .. })));
        assert!(matches!(enumerate_pve(&g4, 1.0), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn transition_rows_sum_to_one() {
        let g = build_square_lattice(2, 2, SquareBoundary::VERTICAL_PLUS, 0.5_f64).unwrap().graph;
        let p = exact_sw_transition(&g, 0.7).unwrap();
        for s in 0..16 {
            assert!((p.row(s).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn log_z_grows_with_nonnegative_field() {
        let lat = build_square_lattice(
            3,
            2,
            SquareBoundary::Sides { left: 1, right: 1, top: 1, bottom: 1 },
            0.6_f64,
        )
        .unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=10 {
            let z = enumerate_pv(&lat.graph, k as f64 / 10.0).unwrap().log_z;
            assert!(z >= prev);
            prev = z;
        }
    }
}
