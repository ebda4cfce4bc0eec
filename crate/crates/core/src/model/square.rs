//! Square lattices surrounded by a single layer of boundary vertices.

use serde::{Deserialize, Serialize};

use super::{BoundarySpec, IsingGraph, LatticeGeometry};
use crate::error::{Error, Result};
use crate::num::Real;

/// Boundary assignment for a square lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SquareBoundary {
    /// One value per side. `left`/`right` are the vertical sides.
    Sides { left: i8, right: i8, top: i8, bottom: i8 },
    /// Values for quadrants I..IV around the lattice center. A boundary vertex lying on an axis
    /// takes the value of the quadrant counterclockwise from it.
    Quadrants([i8; 4]),
}

impl SquareBoundary {
    /// `+1` on the vertical sides, `-1` on the horizontal ones.
    pub const VERTICAL_PLUS: Self = Self::Sides { left: 1, right: 1, top: -1, bottom: -1 };
    /// `+1` in quadrants I and III, `-1` in II and IV.
    pub const QUADRANTS_ALTERNATING: Self = Self::Quadrants([1, -1, 1, -1]);

    fn values(&self) -> [i8; 4] {
        match *self {
            Self::Sides { left, right, top, bottom } => [left, right, top, bottom],
            Self::Quadrants(q) => q,
        }
    }

    /// Value of a boundary vertex at `(x, y)` relative to the center, lying on `side`
    /// (0 left, 1 right, 2 bottom, 3 top).
    fn value_at(&self, side: usize, x: f64, y: f64) -> i8 {
        match *self {
            Self::Sides { left, right, top, bottom } => [left, right, bottom, top][side],
            Self::Quadrants(q) => q[quadrant(x, y)],
        }
    }
}

/// Quadrant index 0..4 with axis points assigned counterclockwise: the positive x axis belongs
/// to quadrant I, the positive y axis to II, and so on.
fn quadrant(x: f64, y: f64) -> usize {
    if x > 0.0 && y >= 0.0 {
        0
    } else if x <= 0.0 && y > 0.0 {
        1
    } else if x < 0.0 && y <= 0.0 {
        2
    } else {
        3
    }
}

#[derive(Clone, Debug)]
pub struct SquareLattice<T> {
    pub graph: IsingGraph<T>,
    pub geometry: LatticeGeometry,
    pub boundary: BoundarySpec,
}

/// Builds an `n1 × n2` grid (`n1` columns, `n2` rows) of interior vertices with nearest-neighbor
/// edges. Every perimeter vertex gets one boundary neighbor per exposed side, so corner vertices
/// see two. Interior vertex `(col, row)` has index `row * n1 + col`; row 0 is the bottom row.
pub fn build_square_lattice<T: Real>(
    n1: usize,
    n2: usize,
    bc: SquareBoundary,
    beta: T,
) -> Result<SquareLattice<T>> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::Build(format!("lattice dimensions must be positive, got {n1}x{n2}")));
    }
    if let Some(v) = bc.values().iter().find(|&&v| v != 1 && v != -1) {
        return Err(Error::Build(format!("boundary value {v} is not ±1")));
    }
    let idx = |c: usize, r: usize| r * n1 + c;
    let cx = (n1 as f64 - 1.0) / 2.0;
    let cy = (n2 as f64 - 1.0) / 2.0;

    let mut edges = Vec::with_capacity(n1 * (n2 - 1) + n2 * (n1 - 1));
    let mut coords = Vec::with_capacity(n1 * n2);
    for r in 0..n2 {
        for c in 0..n1 {
            coords.push([c as f64 - cx, r as f64 - cy]);
            if c + 1 < n1 {
                edges.push([idx(c, r), idx(c + 1, r)]);
            }
            if r + 1 < n2 {
                edges.push([idx(c, r), idx(c, r + 1)]);
            }
        }
    }

    let mut values = Vec::with_capacity(2 * (n1 + n2));
    let mut bedges = Vec::with_capacity(2 * (n1 + n2));
    let mut push = |side: usize, interior: usize, x: f64, y: f64| {
        bedges.push((interior, values.len()));
        values.push(bc.value_at(side, x, y));
    };
    for r in 0..n2 {
        let y = r as f64 - cy;
        push(0, idx(0, r), -cx - 1.0, y);
        push(1, idx(n1 - 1, r), cx + 1.0, y);
    }
    for c in 0..n1 {
        let x = c as f64 - cx;
        push(2, idx(c, 0), x, -cy - 1.0);
        push(3, idx(c, n2 - 1), x, cy + 1.0);
    }

    let boundary = BoundarySpec::new(values, bedges)?;
    let graph = IsingGraph::with_boundary(n1 * n2, edges, &boundary, beta)?;
    Ok(SquareLattice { graph, geometry: LatticeGeometry { coords }, boundary })
}
