//! Vertex-ness rasters: oracle construction, masking, sampling and the `VGM1` format.
//!
//! `VGM1` layout (little-endian): magic `b"VGM1"`, `u32` width, `u32` height, then
//! `width * height` `f32` probabilities in row-major order, row 0 first, each in `[0, 1]`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::ContinuousPoint;
use crate::gridmap::{CellIndex, GridMap};
use crate::oracle::{astar, extract_vertices, OracleError};

pub const VGM_MAGIC: &[u8; 4] = b"VGM1";
const HEADER_LEN: usize = 12;

/// Default Gaussian spread for oracle guidance, in pixels.
pub const DEFAULT_SIGMA: f64 = 4.0;

#[derive(Debug, Error, PartialEq)]
pub enum GuidanceError {
    #[error("raster has {actual} values, expected {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("value {value} at index {index} is not a probability")]
    InvalidValue { index: usize, value: f32 },
    #[error("raster has no positive probability")]
    NotSamplable,
    #[error("every probability is below tau = {tau}")]
    AllMasked { tau: f64 },
    #[error("tau must lie strictly between 0 and 1, got {0}")]
    InvalidThreshold(f64),
    #[error("sigma must be finite and non-negative, got {0}")]
    InvalidSigma(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Row-major per-pixel probability raster with at least one positive value.
#[derive(Clone, Debug, PartialEq)]
pub struct GuidanceMap {
    width: usize,
    height: usize,
    prob: Vec<f32>,
}

impl GuidanceMap {
    pub fn new(width: usize, height: usize, prob: Vec<f32>) -> Result<Self, GuidanceError> {
        let expected = width
            .checked_mul(height)
            .filter(|&n| n > 0)
            .ok_or(GuidanceError::InvalidDimensions { width, height })?;
        if prob.len() != expected {
            return Err(GuidanceError::DimensionMismatch {
                expected,
                actual: prob.len(),
            });
        }
        if let Some((index, &value)) = prob
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && (0.0..=1.0).contains(*v)))
        {
            return Err(GuidanceError::InvalidValue { index, value });
        }
        if !prob.iter().any(|&v| v > 0.0) {
            return Err(GuidanceError::NotSamplable);
        }
        Ok(Self {
            width,
            height,
            prob,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.prob
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.prob[y * self.width + x]
    }

    /// Number of pixels with positive probability.
    pub fn support_size(&self) -> usize {
        self.prob.iter().filter(|&&v| v > 0.0).count()
    }

    /// First index holding the maximum value.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.prob.iter().enumerate() {
            if v > self.prob[best] {
                best = i;
            }
        }
        best
    }
}

/// Masking threshold, strictly inside `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct MaskThreshold(f64);

impl MaskThreshold {
    pub fn new(tau: f64) -> Result<Self, GuidanceError> {
        if tau > 0.0 && tau < 1.0 {
            Ok(Self(tau))
        } else {
            Err(GuidanceError::InvalidThreshold(tau))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for MaskThreshold {
    type Error = GuidanceError;
    fn try_from(v: f64) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<MaskThreshold> for f64 {
    fn from(t: MaskThreshold) -> f64 {
        t.0
    }
}

/// Zeroes every probability below `tau`; survivors are left untouched.
pub fn apply_mask(g: &GuidanceMap, tau: MaskThreshold) -> Result<GuidanceMap, GuidanceError> {
    let prob: Vec<f32> = g
        .prob
        .iter()
        .map(|&v| if f64::from(v) < tau.0 { 0.0 } else { v })
        .collect();
    if !prob.iter().any(|&v| v > 0.0) {
        return Err(GuidanceError::AllMasked { tau: tau.0 });
    }
    Ok(GuidanceMap {
        width: g.width,
        height: g.height,
        prob,
    })
}

/// Which cells of the optimal path receive a kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuidanceMode {
    /// Every path cell (a heatmap around the whole optimal path).
    Path,
    /// Only the extracted vertices.
    Vertex,
}

/// Oracle stand-in for a trained network: Gaussian blobs (peak 1, truncated at
/// `3 * sigma`) on the A* path cells or its vertices, summed and clamped to 1.
/// `sigma == 0` marks exactly the chosen cells with 1.
pub fn oracle_guidance(
    map: &GridMap,
    start: CellIndex,
    goal: CellIndex,
    mode: GuidanceMode,
    sigma: f64,
) -> Result<GuidanceMap, GuidanceError> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(GuidanceError::InvalidSigma(sigma));
    }
    let path = astar(map, start, goal)?;
    let centers = match mode {
        GuidanceMode::Path => path.cells,
        GuidanceMode::Vertex => extract_vertices(&path).vertices,
    };
    Ok(splat_kernels(map.width(), map.height(), &centers, sigma))
}

fn splat_kernels(width: usize, height: usize, centers: &[CellIndex], sigma: f64) -> GuidanceMap {
    let mut acc = vec![0.0f64; width * height];
    let reach = (3.0 * sigma).floor() as usize;
    let cutoff = (3.0 * sigma) * (3.0 * sigma);
    for c in centers {
        let (x0, x1) = (c.x.saturating_sub(reach), (c.x + reach).min(width - 1));
        let (y0, y1) = (c.y.saturating_sub(reach), (c.y + reach).min(height - 1));
        for y in y0..=y1 {
            for x in x0..=x1 {
                let dx = x as f64 - c.x as f64;
                let dy = y as f64 - c.y as f64;
                let d2 = dx * dx + dy * dy;
                let v = if sigma == 0.0 {
                    1.0
                } else if d2 <= cutoff {
                    (-d2 / (2.0 * sigma * sigma)).exp()
                } else {
                    continue;
                };
                acc[y * width + x] += v;
            }
        }
    }
    GuidanceMap {
        width,
        height,
        prob: acc.into_iter().map(|v| v.min(1.0) as f32).collect(),
    }
}

/// Exact multinomial pixel sampler with uniform jitter inside the chosen pixel.
#[derive(Clone, Debug)]
pub struct GuidanceSampler {
    width: usize,
    cumulative: Vec<f64>,
}

impl GuidanceSampler {
    pub fn new(g: &GuidanceMap) -> Result<Self, GuidanceError> {
        let mut total = 0.0f64;
        let cumulative: Vec<f64> = g
            .prob
            .iter()
            .map(|&v| {
                total += f64::from(v);
                total
            })
            .collect();
        if total <= 0.0 {
            return Err(GuidanceError::NotSamplable);
        }
        Ok(Self {
            width: g.width,
            cumulative,
        })
    }

    pub fn total_mass(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Draws a pixel index with probability proportional to its value.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = self.total_mass();
        let u = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        if i < self.cumulative.len() {
            i
        } else {
            // u rounded up to the total: take the last pixel that carries mass.
            self.cumulative.partition_point(|&c| c < total)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ContinuousPoint {
        let i = self.sample_index(rng);
        let (x, y) = (i % self.width, i / self.width);
        ContinuousPoint::new(x as f64 + rng.random::<f64>(), y as f64 + rng.random::<f64>())
    }
}

/// One-off draw. Build a [`GuidanceSampler`] once when drawing repeatedly.
pub fn sample_point<R: Rng + ?Sized>(
    g: &GuidanceMap,
    rng: &mut R,
) -> Result<ContinuousPoint, GuidanceError> {
    Ok(GuidanceSampler::new(g)?.sample(rng))
}

pub fn write_guidance(g: &GuidanceMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * g.prob.len());
    out.extend_from_slice(VGM_MAGIC);
    out.extend_from_slice(&(g.width as u32).to_le_bytes());
    out.extend_from_slice(&(g.height as u32).to_le_bytes());
    for v in &g.prob {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn read_guidance(bytes: &[u8]) -> Result<GuidanceMap, GuidanceError> {
    let parse = |m: String| GuidanceError::Parse(m);
    if bytes.len() < HEADER_LEN || &bytes[..4] != VGM_MAGIC {
        return Err(parse("missing VGM1 header".into()));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let (width, height) = (word(4), word(8));
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| parse(format!("dimensions {width}x{height} overflow")))?;
    if width == 0 || height == 0 {
        return Err(parse(format!("invalid dimensions {width}x{height}")));
    }
    if bytes.len() != expected {
        return Err(parse(format!(
            "expected {expected} bytes for {width}x{height}, found {}",
            bytes.len()
        )));
    }
    let prob: Vec<f32> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    GuidanceMap::new(width, height, prob).map_err(|e| match e {
        GuidanceError::InvalidValue { index, value } => {
            parse(format!("value {value} at index {index} outside [0, 1]"))
        }
        other => other,
    })
}
