//! Random quasi-uniform triangulations of the unit disk.
//!
//! Boundary vertices sit equally spaced on the unit circle; interior vertices are a Poisson-disk
//! sample strictly inside it. The point set is Delaunay-triangulated and only edges touching at
//! least one interior vertex are kept.

use std::f64::consts::{PI, TAU};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BoundarySpec, IsingGraph, LatticeGeometry};
use crate::error::{Error, Result};
use crate::num::Real;

/// Minimum interior point separation, in units of the mesh size.
const EXCLUSION: f64 = 0.7;
/// Interior points stay inside radius `1 - MARGIN * mesh_size`.
const MARGIN: f64 = 0.5;
/// Random dart throws per expected point before the deterministic gap-filling sweep.
const DARTS_PER_POINT: f64 = 30.0;
/// Spacing of the gap-filling candidate grid, in units of the mesh size.
const FILL_SPACING: f64 = 0.1;

/// Boundary value on the half-open angular interval `[start, end)`, in radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcCondition {
    pub start: f64,
    pub end: f64,
    pub value: i8,
}

/// `+1` in quadrants I and III, `-1` in II and IV.
pub fn quadrant_arcs() -> Vec<ArcCondition> {
    (0..4)
        .map(|q| ArcCondition {
            start: q as f64 * PI / 2.0,
            end: (q + 1) as f64 * PI / 2.0,
            value: if q % 2 == 0 { 1 } else { -1 },
        })
        .collect()
}

const ARC_TOL: f64 = 1e-9;

fn validate_arcs(arcs: &[ArcCondition]) -> Result<()> {
    let first = arcs.first().ok_or_else(|| Error::Build("no boundary arcs given".into()))?;
    if first.start.abs() > ARC_TOL {
        return Err(Error::Build(format!("first arc must start at 0, starts at {}", first.start)));
    }
    for (k, arc) in arcs.iter().enumerate() {
        if arc.value != 1 && arc.value != -1 {
            return Err(Error::Build(format!("arc {k} has value {} (must be ±1)", arc.value)));
        }
        if !(arc.end > arc.start) {
            return Err(Error::Build(format!("arc {k} is empty or reversed")));
        }
        if let Some(next) = arcs.get(k + 1) {
            if (next.start - arc.end).abs() > ARC_TOL {
                return Err(Error::Build(format!("arcs {k} and {} are not contiguous", k + 1)));
            }
        }
    }
    let last = arcs.last().expect("non-empty");
    if (last.end - TAU).abs() > ARC_TOL {
        return Err(Error::Build(format!("last arc must end at 2π, ends at {}", last.end)));
    }
    Ok(())
}

fn arc_value(arcs: &[ArcCondition], angle: f64) -> i8 {
    arcs.iter()
        .find(|a| angle < a.end)
        .unwrap_or_else(|| arcs.last().expect("validated"))
        .value
}

#[derive(Clone, Debug)]
pub struct DiskLattice<T> {
    pub graph: IsingGraph<T>,
    pub geometry: LatticeGeometry,
    pub boundary: BoundarySpec,
    /// Positions of the boundary vertices on the unit circle.
    pub boundary_coords: Vec<[f64; 2]>,
}

impl<T> DiskLattice<T> {
    /// Lengths of all kept triangulation edges, including interior-to-boundary ones.
    pub fn edge_lengths(&self) -> Vec<f64>
    where
        T: Real,
    {
        let dist = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
        let interior = &self.geometry.coords;
        self.graph
            .edges()
            .iter()
            .map(|&[i, j]| dist(interior[i], interior[j]))
            .chain(
                self.boundary
                    .edges
                    .iter()
                    .map(|&(i, b)| dist(interior[i], self.boundary_coords[b])),
            )
            .collect()
    }
}

/// Uniform grid over `[-1, 1]^2` holding at most one point per cell.
struct PointGrid {
    cell: f64,
    dim: usize,
    slots: Vec<Option<usize>>,
    radius2: f64,
    reach: isize,
}

impl PointGrid {
    fn new(radius: f64) -> Self {
        let cell = radius / std::f64::consts::SQRT_2;
        let dim = (2.0 / cell).ceil() as usize + 1;
        Self { cell, dim, slots: vec![None; dim * dim], radius2: radius * radius, reach: 2 }
    }

    fn cell_of(&self, p: [f64; 2]) -> (usize, usize) {
        let cx = ((p[0] + 1.0) / self.cell) as usize;
        let cy = ((p[1] + 1.0) / self.cell) as usize;
        (cx.min(self.dim - 1), cy.min(self.dim - 1))
    }

    fn is_free(&self, p: [f64; 2], points: &[[f64; 2]]) -> bool {
        let (cx, cy) = self.cell_of(p);
        let (cx, cy) = (cx as isize, cy as isize);
        for gy in (cy - self.reach).max(0)..=(cy + self.reach).min(self.dim as isize - 1) {
            for gx in (cx - self.reach).max(0)..=(cx + self.reach).min(self.dim as isize - 1) {
                if let Some(k) = self.slots[gy as usize * self.dim + gx as usize] {
                    let q = points[k];
                    let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
                    if d2 < self.radius2 {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn insert(&mut self, p: [f64; 2], index: usize) {
        let (cx, cy) = self.cell_of(p);
        self.slots[cy * self.dim + cx] = Some(index);
    }
}

fn poisson_disk(mesh_size: f64, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let radius = EXCLUSION * mesh_size;
    let support = 1.0 - MARGIN * mesh_size;
    let mut grid = PointGrid::new(radius);
    let mut points = Vec::new();
    let mut try_insert = |p: [f64; 2], points: &mut Vec<[f64; 2]>| {
        if p[0].hypot(p[1]) < support && grid.is_free(p, points) {
            grid.insert(p, points.len());
            points.push(p);
        }
    };

    let expected = (PI * support * support) / (radius * radius);
    let darts = (DARTS_PER_POINT * expected).ceil() as usize;
    for _ in 0..darts {
        let r = support * rng.gen::<f64>().sqrt();
        let phi = TAU * rng.gen::<f64>();
        try_insert([r * phi.cos(), r * phi.sin()], &mut points);
    }

    // Sweep a jittered candidate grid in random order so no hole wider than the exclusion
    // radius plus one candidate spacing survives.
    let spacing = FILL_SPACING * mesh_size;
    let steps = (2.0 * support / spacing).ceil() as usize + 1;
    let mut candidates: Vec<[f64; 2]> = (0..steps)
        .flat_map(|a| (0..steps).map(move |b| (a, b)))
        .map(|(a, b)| {
            [-support + a as f64 * spacing, -support + b as f64 * spacing]
        })
        .filter(|p| p[0].hypot(p[1]) < support)
        .collect();
    candidates.shuffle(rng);
    for c in candidates {
        let jitter = [
            (rng.gen::<f64>() - 0.5) * spacing,
            (rng.gen::<f64>() - 0.5) * spacing,
        ];
        try_insert([c[0] + jitter[0], c[1] + jitter[1]], &mut points);
    }
    points
}

/// Builds a random quasi-uniform triangulation of the unit disk with spacing near `mesh_size`
/// and boundary values given by `arcs`, which must partition `[0, 2π)` in increasing order.
/// The result depends only on the arguments.
pub fn build_disk_triangulation<T: Real>(
    mesh_size: f64,
    arcs: &[ArcCondition],
    seed: u64,
    beta: T,
) -> Result<DiskLattice<T>> {
    if !(mesh_size > 0.0 && mesh_size < 1.0) {
        return Err(Error::Build(format!("mesh size must lie in (0, 1), got {mesh_size}")));
    }
    validate_arcs(arcs)?;

    let n_boundary = (TAU / mesh_size).ceil() as usize;
    let boundary_coords: Vec<[f64; 2]> = (0..n_boundary)
        .map(|k| {
            let phi = TAU * k as f64 / n_boundary as f64;
            [phi.cos(), phi.sin()]
        })
        .collect();
    let values: Vec<i8> = (0..n_boundary)
        .map(|k| arc_value(arcs, TAU * k as f64 / n_boundary as f64))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let interior = poisson_disk(mesh_size, &mut rng);
    if interior.is_empty() {
        return Err(Error::Build(format!("mesh size {mesh_size} leaves no interior point")));
    }

    let points: Vec<delaunator::Point> = boundary_coords
        .iter()
        .chain(&interior)
        .map(|p| delaunator::Point { x: p[0], y: p[1] })
        .collect();
    let tri = delaunator::triangulate(&points);
    if tri.triangles.is_empty() {
        return Err(Error::Build("point set could not be triangulated".into()));
    }

    let mut interior_edges = Vec::new();
    let mut boundary_edges = Vec::new();
    for t in tri.triangles.chunks_exact(3) {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            // Each undirected edge appears once per adjacent triangle; keep one orientation of
            // interior edges and both of mixed edges, then deduplicate.
            match (a >= n_boundary, b >= n_boundary) {
                (true, true) => {
                    let (i, j) = (a - n_boundary, b - n_boundary);
                    interior_edges.push([i.min(j), i.max(j)]);
                }
                (true, false) => boundary_edges.push((a - n_boundary, b)),
                (false, true) => boundary_edges.push((b - n_boundary, a)),
                (false, false) => {}
            }
        }
    }
    interior_edges.sort_unstable();
    interior_edges.dedup();
    boundary_edges.sort_unstable();
    boundary_edges.dedup();

    let boundary = BoundarySpec::new(values, boundary_edges)?;
    let graph = IsingGraph::with_boundary(interior.len(), interior_edges, &boundary, beta)?;
    Ok(DiskLattice {
        graph,
        geometry: LatticeGeometry { coords: interior },
        boundary,
        boundary_coords,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example4_arcs() -> Vec<ArcCondition> {
        let third = PI / 3.0;
        vec![
            ArcCondition { start: 0.0, end: third, value: 1 },
            ArcCondition { start: third, end: PI, value: -1 },
            ArcCondition { start: PI, end: 5.0 * third, value: 1 },
            ArcCondition { start: 5.0 * third, end: TAU, value: -1 },
        ]
    }

    #[test]
    fn all_plus_boundary_gives_positive_field() {
        let arcs = [ArcCondition { start: 0.0, end: TAU, value: 1 }];
        let disk = build_disk_triangulation(0.2, &arcs, 3, 0.3_f64).unwrap();
        let touched: std::collections::BTreeSet<usize> =
            disk.boundary.edges.iter().map(|&(i, _)| i).collect();
        assert!(!touched.is_empty());
        for i in touched {
            assert!(disk.graph.field()[i] > 0.0);
        }
    }

    #[test]
    fn quadrant_boundary_sums_to_zero() {
        // ceil(2π / 0.1) = 63 is odd, ceil(2π / 0.125) = 51; pick a size giving a multiple of 4.
        let h = TAU / 40.0 + 1e-9;
        let disk = build_disk_triangulation(h, &quadrant_arcs(), 1, 0.3_f64).unwrap();
        assert_eq!(disk.boundary.num_boundary() % 4, 0);
        let total: i32 = disk.boundary.values.iter().map(|&v| i32::from(v)).sum();
        assert_eq!(total, 0);
    }

    #[test]
    fn quasi_uniform_edge_lengths() {
        let h = 0.05;
        let disk = build_disk_triangulation(h, &example4_arcs(), 2024, 0.3_f64).unwrap();
        let lengths = disk.edge_lengths();
        let (lo, hi) = lengths
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &l| (lo.min(l), hi.max(l)));
        assert!(lo >= 0.4 * h, "shortest edge {lo}");
        assert!(hi <= 2.5 * h, "longest edge {hi}");
        assert!(disk.geometry.coords.iter().all(|p| p[0].hypot(p[1]) < 1.0));
    }

    #[test]
    fn deterministic_in_seed() {
        let a = build_disk_triangulation(0.15, &example4_arcs(), 9, 0.3_f64).unwrap();
        let b = build_disk_triangulation(0.15, &example4_arcs(), 9, 0.3_f64).unwrap();
        let c = build_disk_triangulation(0.15, &example4_arcs(), 10, 0.3_f64).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.geometry, b.geometry);
        assert_ne!(a.geometry, c.geometry);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_disk_triangulation(1.5, &quadrant_arcs(), 0, 0.3_f64).is_err());
        assert!(build_disk_triangulation(0.0, &quadrant_arcs(), 0, 0.3_f64).is_err());
        let gap = [
            ArcCondition { start: 0.0, end: 1.0, value: 1 },
            ArcCondition { start: 1.5, end: TAU, value: -1 },
        ];
        assert!(build_disk_triangulation(0.2, &gap, 0, 0.3_f64).is_err());
        let bad_value = [ArcCondition { start: 0.0, end: TAU, value: 0 }];
        assert!(build_disk_triangulation(0.2, &bad_value, 0, 0.3_f64).is_err());
    }

    #[test]
    fn arc_lookup_is_half_open() {
        let arcs = example4_arcs();
        assert_eq!(arc_value(&arcs, 0.0), 1);
        assert_eq!(arc_value(&arcs, PI / 3.0), -1);
        assert_eq!(arc_value(&arcs, PI), 1);
        assert_eq!(arc_value(&arcs, 6.0), -1);
    }
}
