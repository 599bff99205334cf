use serde::{Deserialize, Serialize};

use crate::gridmap::CellIndex;

/// A point in the continuous map frame. Pixel `(i, j)` spans `[i, i+1) x [j, j+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct ContinuousPoint {
    pub x: f64,
    pub y: f64,
}

impl ContinuousPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Centre of a grid cell.
    pub fn center_of(cell: CellIndex) -> Self {
        Self::new(cell.x as f64 + 0.5, cell.y as f64 + 0.5)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.distance_squared(other).sqrt()
    }

    pub fn distance_squared(&self, other: &Self) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for ContinuousPoint {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<ContinuousPoint> for [f64; 2] {
    fn from(p: ContinuousPoint) -> Self {
        [p.x, p.y]
    }
}
