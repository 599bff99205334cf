//! Optimal grid paths (A*) and turning-point extraction.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use serde::Serialize;
use thiserror::Error;

use crate::gridmap::{CellIndex, GridMap};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("no path from ({}, {}) to ({}, {})", .start.x, .start.y, .goal.x, .goal.y)]
    NoPath { start: CellIndex, goal: CellIndex },
    #[error("endpoint ({}, {}) is outside the map or blocked", .0.x, .0.y)]
    InvalidEndpoint(CellIndex),
}

/// Path cost as a count of orthogonal and diagonal unit steps.
///
/// Values of the form `a + b*sqrt(2)` are equal only when `(a, b)` are equal, so keeping
/// the counts makes ties exact instead of depending on summation order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct OctileCost {
    pub straight: u32,
    pub diagonal: u32,
}

impl OctileCost {
    pub fn value(self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * SQRT_2
    }

    fn step(self, diagonal: bool) -> Self {
        if diagonal {
            Self { diagonal: self.diagonal + 1, ..self }
        } else {
            Self { straight: self.straight + 1, ..self }
        }
    }

    fn plus(self, other: Self) -> Self {
        Self {
            straight: self.straight + other.straight,
            diagonal: self.diagonal + other.diagonal,
        }
    }

    /// Octile distance between two cells; admissible and consistent for 8-connected moves.
    pub fn between(a: CellIndex, b: CellIndex) -> Self {
        let dx = a.x.abs_diff(b.x) as u32;
        let dy = a.y.abs_diff(b.y) as u32;
        Self {
            straight: dx.max(dy) - dx.min(dy),
            diagonal: dx.min(dy),
        }
    }
}

/// An 8-connected cell path with its octile cost.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridPath {
    pub cells: Vec<CellIndex>,
    pub cost: f64,
}

/// Turning points of a path, in path order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexSet {
    pub vertices: Vec<CellIndex>,
    /// Positions of `vertices` within the source path.
    #[serde(skip)]
    pub path_indices: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
struct OpenEntry {
    f: OctileCost,
    g: OctileCost,
    cell: CellIndex,
}

impl Ord for OpenEntry {
    // BinaryHeap pops the greatest entry: smallest f, then largest g, then smallest (y, x).
    fn cmp(&self, other: &Self) -> Ordering {
        let f = if self.f == other.f {
            Ordering::Equal
        } else {
            other.f.value().total_cmp(&self.f.value())
        };
        let g = if self.g == other.g {
            Ordering::Equal
        } else {
            self.g.value().total_cmp(&other.g.value())
        };
        f.then(g)
            .then_with(|| (other.cell.y, other.cell.x).cmp(&(self.cell.y, self.cell.x)))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest 8-connected path under unit/`sqrt(2)` step costs.
pub fn astar(map: &GridMap, start: CellIndex, goal: CellIndex) -> Result<GridPath, OracleError> {
    for c in [start, goal] {
        if !map.is_traversable(c) {
            return Err(OracleError::InvalidEndpoint(c));
        }
    }
    let n = map.width() * map.height();
    let mut best_g: Vec<Option<OctileCost>> = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();

    best_g[map.linear_index(start)] = Some(OctileCost::default());
    open.push(OpenEntry {
        f: OctileCost::between(start, goal),
        g: OctileCost::default(),
        cell: start,
    });

    while let Some(OpenEntry { g, cell, .. }) = open.pop() {
        let ci = map.linear_index(cell);
        if closed[ci] {
            continue;
        }
        closed[ci] = true;
        if cell == goal {
            let mut cells = vec![cell];
            let mut k = ci;
            while parent[k] != usize::MAX {
                k = parent[k];
                cells.push(map.cell_at(k));
            }
            cells.reverse();
            return Ok(GridPath {
                cells,
                cost: g.value(),
            });
        }
        for (next, diagonal) in map.successors(cell) {
            let ni = map.linear_index(next);
            if closed[ni] {
                continue;
            }
            let candidate = g.step(diagonal);
            let better = match best_g[ni] {
                None => true,
                Some(old) => old != candidate && candidate.value() < old.value(),
            };
            if better {
                best_g[ni] = Some(candidate);
                parent[ni] = ci;
                open.push(OpenEntry {
                    f: candidate.plus(OctileCost::between(next, goal)),
                    g: candidate,
                    cell: next,
                });
            }
        }
    }
    Err(OracleError::NoPath { start, goal })
}

/// Direction is unchanged at one scale when the forward and backward spans point the
/// same way (zero cross product, positive dot product).
fn same_direction(back: (i64, i64), fwd: (i64, i64)) -> bool {
    back.0 * fwd.1 - back.1 * fwd.0 == 0 && back.0 * fwd.0 + back.1 * fwd.1 > 0
}

/// Scales at which a direction change must be seen for a point to count as a vertex.
pub const VERTEX_SCALES: [usize; 3] = [1, 2, 3];

/// Whether interior path position `i` is a turning point.
///
/// The point must change direction at every scale in [`VERTEX_SCALES`], comparing the span
/// back to `i - k` with the span forward to `i + k` (clamped to the path ends). Cells next
/// to an endpoint are never interior vertices: their backward or forward span is a single
/// step at every scale, which cannot separate a turn from the first step of a 22.5-degree
/// digital line.
pub fn is_turning_point(cells: &[CellIndex], i: usize) -> bool {
    let last = cells.len() - 1;
    if i <= 1 || i + 1 >= last {
        return false;
    }
    let delta = |from: usize, to: usize| {
        (
            cells[to].x as i64 - cells[from].x as i64,
            cells[to].y as i64 - cells[from].y as i64,
        )
    };
    VERTEX_SCALES.iter().all(|&k| {
        let back = delta(i.saturating_sub(k), i);
        let fwd = delta(i, (i + k).min(last));
        !same_direction(back, fwd)
    })
}

/// Endpoints plus every interior turning point.
pub fn extract_vertices(path: &GridPath) -> VertexSet {
    let cells = &path.cells;
    let path_indices: Vec<usize> = match cells.len() {
        0 => Vec::new(),
        1 => vec![0],
        n => std::iter::once(0)
            .chain((1..n - 1).filter(|&i| is_turning_point(cells, i)))
            .chain(std::iter::once(n - 1))
            .collect(),
    };
    VertexSet {
        vertices: path_indices.iter().map(|&i| cells[i]).collect(),
        path_indices,
    }
}
