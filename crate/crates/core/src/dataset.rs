//! Ground-truth vertex rasters, focal loss and dataset export.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gridmap::{write_map, CellIndex, GridError, GridMap};
use crate::guidance::{write_guidance, GuidanceMap};
use crate::oracle::{astar, extract_vertices, OracleError};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("focal loss is defined for 0 < p_t <= 1, got {0}")]
    DomainError(f64),
    #[error("gamma must be finite and non-negative, got {0}")]
    InvalidGamma(f64),
    #[error("train fraction must lie in [0, 1], got {0}")]
    InvalidSplit(f64),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Binary raster in image convention: 0 at vertex pixels, 1 elsewhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexRaster {
    pub width: usize,
    pub height: usize,
    pub values: Vec<u8>,
}

impl VertexRaster {
    pub fn zero_count(&self) -> usize {
        self.values.iter().filter(|&&v| v == 0).count()
    }

    /// Guidance-polarity copy: 1.0 at vertex pixels, 0.0 elsewhere.
    pub fn to_target(&self) -> GuidanceMap {
        let prob = self
            .values
            .iter()
            .map(|&v| if v == 0 { 1.0 } else { 0.0 })
            .collect();
        GuidanceMap::new(self.width, self.height, prob)
            .expect("a vertex raster always marks both path endpoints")
    }
}

/// A* path, its vertices, then a raster with those pixels set to 0.
pub fn make_ground_truth(
    map: &GridMap,
    start: CellIndex,
    goal: CellIndex,
) -> Result<VertexRaster, DatasetError> {
    let path = astar(map, start, goal)?;
    let vertices = extract_vertices(&path);
    let mut values = vec![1u8; map.width() * map.height()];
    for v in &vertices.vertices {
        values[map.linear_index(*v)] = 0;
    }
    Ok(VertexRaster {
        width: map.width(),
        height: map.height(),
        values,
    })
}

/// Focusing parameter of the focal loss.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FocalParams {
    pub gamma: f64,
}

impl FocalParams {
    pub fn new(gamma: f64) -> Result<Self, DatasetError> {
        if gamma.is_finite() && gamma >= 0.0 {
            Ok(Self { gamma })
        } else {
            Err(DatasetError::InvalidGamma(gamma))
        }
    }
}

impl Default for FocalParams {
    fn default() -> Self {
        Self { gamma: 2.0 }
    }
}

/// `-(1 - p_t)^gamma * ln(p_t)`.
pub fn focal_loss(p_t: f64, params: FocalParams) -> Result<f64, DatasetError> {
    if !(p_t > 0.0 && p_t <= 1.0) {
        return Err(DatasetError::DomainError(p_t));
    }
    Ok(-(1.0 - p_t).powf(params.gamma) * p_t.ln())
}

/// One exported (map, start, goal) triple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestInstance {
    pub map_file: String,
    pub target_file: String,
    pub start: CellIndex,
    pub goal: CellIndex,
    pub split: Split,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub sigma_note: String,
    pub instances: Vec<ManifestInstance>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

const TARGET_NOTE: &str = "targets are unsmoothed binary vertex rasters (no Gaussian spread); \
    VGM1 targets use guidance polarity, 1.0 = vertex pixel and 0.0 elsewhere, the inverse of \
    the 0 = vertex image convention";

/// Maps with their start/goal pairs, ready for export.
#[derive(Clone, Debug)]
pub struct ExportJob<'a> {
    pub maps: &'a [GridMap],
    /// `pairs[i]` belongs to `maps[i]`.
    pub pairs: &'a [Vec<(CellIndex, CellIndex)>],
    pub seed: u64,
    /// Fraction of maps (not instances) assigned to the training split.
    pub train_fraction: f64,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), DatasetError> {
    fs::write(path, bytes).map_err(|source| DatasetError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Writes every instance's map (with its endpoints stamped) and VGM1 target into
/// `out_dir`, then `manifest.json`. The first `round(train_fraction * maps)` maps are
/// training maps.
pub fn export_dataset(job: &ExportJob<'_>, out_dir: &Path) -> Result<Manifest, DatasetError> {
    if !(0.0..=1.0).contains(&job.train_fraction) {
        return Err(DatasetError::InvalidSplit(job.train_fraction));
    }
    assert_eq!(job.maps.len(), job.pairs.len(), "one pair list per map");
    fs::create_dir_all(out_dir).map_err(|source| DatasetError::Io {
        path: out_dir.to_owned(),
        source,
    })?;
    let n_train = (job.train_fraction * job.maps.len() as f64).round() as usize;
    let mut instances = Vec::new();
    for (m, (map, pairs)) in job.maps.iter().zip(job.pairs).enumerate() {
        let split = if m < n_train { Split::Train } else { Split::Test };
        for (k, &(start, goal)) in pairs.iter().enumerate() {
            let stamped = map.with_endpoints(start, goal)?;
            let target = make_ground_truth(&stamped, start, goal)?.to_target();
            let map_file = format!("map_{m:05}_{k:03}.vmap");
            let target_file = format!("target_{m:05}_{k:03}.vgm");
            write_file(&out_dir.join(&map_file), &write_map(&stamped))?;
            write_file(&out_dir.join(&target_file), &write_guidance(&target))?;
            instances.push(ManifestInstance {
                map_file,
                target_file,
                start,
                goal,
                split,
            });
        }
    }
    let manifest = Manifest {
        seed: job.seed,
        sigma_note: TARGET_NOTE.to_owned(),
        instances,
    };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    write_file(&out_dir.join(MANIFEST_FILE), &json)?;
    Ok(manifest)
}
