//! Occupancy grids with start/goal cells.

mod format;
mod generate;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use format::{read_map, write_map};
pub use generate::{
    generate_map, generate_map_detailed, sample_start_goal_pairs, MapGenConfig, ObstacleShape,
    PlacedObstacle, MAX_GENERATION_ATTEMPTS,
};

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("invalid map dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("cell array has {actual} entries, expected {expected}")]
    CellCountMismatch { expected: usize, actual: usize },
    #[error("cell ({x}, {y}) lies outside the {width}x{height} map")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
    #[error("start and goal must be distinct cells")]
    StartEqualsGoal,
    #[error("endpoint ({x}, {y}) is an obstacle")]
    EndpointBlocked { x: usize, y: usize },
    #[error("expected exactly one {class:?} cell, found {count}")]
    EndpointCount { class: CellClass, count: usize },
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("no connected map found after {attempts} attempts")]
    GenerationFailed { attempts: usize },
    #[error("need {needed} free cells connected to the start, found {available}")]
    InsufficientFreeSpace { needed: usize, available: usize },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

/// Class of a single grid cell; the integer encoding is part of the file format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum CellClass {
    Free = 0,
    Obstacle = 1,
    Start = 2,
    Goal = 3,
}

impl CellClass {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::Free),
            1 => Some(Self::Obstacle),
            2 => Some(Self::Start),
            3 => Some(Self::Goal),
            _ => None,
        }
    }

    pub fn is_traversable(self) -> bool {
        self != Self::Obstacle
    }
}

/// Column/row address of a cell. Row 0 is the top row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct CellIndex {
    pub x: usize,
    pub y: usize,
}

impl CellIndex {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

impl From<[usize; 2]> for CellIndex {
    fn from([x, y]: [usize; 2]) -> Self {
        Self { x, y }
    }
}

impl From<CellIndex> for [usize; 2] {
    fn from(c: CellIndex) -> Self {
        [c.x, c.y]
    }
}

/// The eight king-move offsets, orthogonal first.
pub(crate) const NEIGHBOR_OFFSETS: [(isize, isize); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

/// Row-major occupancy grid.
///
/// Start and goal are kept both as stamped cell classes and as explicit fields; the
/// fields are what planners use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    cells: Vec<CellClass>,
    start: CellIndex,
    goal: CellIndex,
}

impl GridMap {
    /// Builds a map from free/obstacle cells and stamps `start` and `goal` into it.
    ///
    /// Any `Start`/`Goal` classes already present in `cells` are reset to `Free`.
    pub fn new(
        width: usize,
        height: usize,
        mut cells: Vec<CellClass>,
        start: CellIndex,
        goal: CellIndex,
    ) -> Result<Self, GridError> {
        if width == 0 || height == 0 || width.checked_mul(height).is_none() {
            return Err(GridError::InvalidDimensions { width, height });
        }
        if cells.len() != width * height {
            return Err(GridError::CellCountMismatch {
                expected: width * height,
                actual: cells.len(),
            });
        }
        for c in [start, goal] {
            if c.x >= width || c.y >= height {
                return Err(GridError::OutOfBounds {
                    x: c.x,
                    y: c.y,
                    width,
                    height,
                });
            }
            if cells[c.y * width + c.x] == CellClass::Obstacle {
                return Err(GridError::EndpointBlocked { x: c.x, y: c.y });
            }
        }
        if start == goal {
            return Err(GridError::StartEqualsGoal);
        }
        for cell in cells.iter_mut() {
            if matches!(cell, CellClass::Start | CellClass::Goal) {
                *cell = CellClass::Free;
            }
        }
        cells[start.y * width + start.x] = CellClass::Start;
        cells[goal.y * width + goal.x] = CellClass::Goal;
        Ok(Self {
            width,
            height,
            cells,
            start,
            goal,
        })
    }

    /// Obstacle-free map.
    pub fn empty(
        width: usize,
        height: usize,
        start: CellIndex,
        goal: CellIndex,
    ) -> Result<Self, GridError> {
        let len = width
            .checked_mul(height)
            .ok_or(GridError::InvalidDimensions { width, height })?;
        Self::new(width, height, vec![CellClass::Free; len], start, goal)
    }

    /// Builds a map whose start and goal are taken from the single `Start` and `Goal` cells.
    pub fn from_cells(
        width: usize,
        height: usize,
        cells: Vec<CellClass>,
    ) -> Result<Self, GridError> {
        if cells.len() != width.saturating_mul(height) {
            return Err(GridError::CellCountMismatch {
                expected: width.saturating_mul(height),
                actual: cells.len(),
            });
        }
        let find = |class: CellClass| -> Result<CellIndex, GridError> {
            let mut hits = cells
                .iter()
                .enumerate()
                .filter(|(_, &c)| c == class)
                .map(|(i, _)| i);
            let first = hits.next();
            let count = first.map_or(0, |_| 1 + hits.count());
            match (first, count) {
                (Some(i), 1) => Ok(CellIndex::new(i % width, i / width)),
                _ => Err(GridError::EndpointCount { class, count }),
            }
        };
        let start = find(CellClass::Start)?;
        let goal = find(CellClass::Goal)?;
        Self::new(width, height, cells, start, goal)
    }

    /// Same obstacles, different endpoints (old endpoint cells revert to `Free`).
    pub fn with_endpoints(&self, start: CellIndex, goal: CellIndex) -> Result<Self, GridError> {
        Self::new(self.width, self.height, self.cells.clone(), start, goal)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn start(&self) -> CellIndex {
        self.start
    }

    pub fn goal(&self) -> CellIndex {
        self.goal
    }

    pub fn cells(&self) -> &[CellClass] {
        &self.cells
    }

    pub fn contains(&self, c: CellIndex) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn linear_index(&self, c: CellIndex) -> usize {
        c.y * self.width + c.x
    }

    pub fn cell_at(&self, linear: usize) -> CellIndex {
        CellIndex::new(linear % self.width, linear / self.width)
    }

    pub fn class(&self, c: CellIndex) -> CellClass {
        self.cells[self.linear_index(c)]
    }

    /// True for in-bounds obstacle cells. Out-of-bounds coordinates are not obstacles.
    pub fn is_obstacle_at(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.cells[y as usize * self.width + x as usize] == CellClass::Obstacle
    }

    pub fn is_traversable(&self, c: CellIndex) -> bool {
        self.contains(c) && self.class(c).is_traversable()
    }

    pub fn count(&self, class: CellClass) -> usize {
        self.cells.iter().filter(|&&c| c == class).count()
    }

    /// 8-connected moves out of `c`. A diagonal move is refused when both orthogonal
    /// cells it passes between are obstacles. Yields `(neighbour, is_diagonal)`.
    pub fn successors(&self, c: CellIndex) -> impl Iterator<Item = (CellIndex, bool)> + '_ {
        let (x, y) = (c.x as isize, c.y as isize);
        NEIGHBOR_OFFSETS.iter().filter_map(move |&(dx, dy)| {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx as usize >= self.width || ny as usize >= self.height {
                return None;
            }
            let n = CellIndex::new(nx as usize, ny as usize);
            if !self.class(n).is_traversable() {
                return None;
            }
            let diagonal = dx != 0 && dy != 0;
            if diagonal && self.is_obstacle_at(x + dx, y) && self.is_obstacle_at(x, y + dy) {
                return None;
            }
            Some((n, diagonal))
        })
    }

    /// Flood fill over traversable cells using the same move model as [`Self::successors`].
    pub fn reachable_from(&self, origin: CellIndex) -> Vec<bool> {
        let mut seen = vec![false; self.cells.len()];
        if !self.is_traversable(origin) {
            return seen;
        }
        let mut queue = VecDeque::from([origin]);
        seen[self.linear_index(origin)] = true;
        while let Some(c) = queue.pop_front() {
            for (n, _) in self.successors(c) {
                let i = self.linear_index(n);
                if !seen[i] {
                    seen[i] = true;
                    queue.push_back(n);
                }
            }
        }
        seen
    }

    pub fn is_connected(&self, a: CellIndex, b: CellIndex) -> bool {
        self.contains(b) && self.reachable_from(a)[self.linear_index(b)]
    }
}
