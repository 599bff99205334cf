//! Vertex-guided RRT* planning on occupancy grids.
//!
//! The crate is organised bottom-up:
//!
//! * [`gridmap`] – occupancy grids, the procedural map generator and the `VMAP1` text format.
//! * [`oracle`] – optimal A* paths and the extraction of turning points ("vertices") from them.
//! * [`guidance`] – vertex-ness probability rasters, masking, pixel sampling and the `VGM1` format.
//! * [`planner`] – RRT* with an optional guided sampler mixed into the uniform one.
//! * [`dataset`] – ground-truth vertex rasters, focal loss and dataset export.
//! * [`bench`] – multi-trial experiment harness with CSV output and summaries.

pub mod bench;
pub mod dataset;
pub mod geometry;
pub mod gridmap;
pub mod guidance;
pub mod oracle;
pub mod planner;
pub mod seed;

pub use geometry::ContinuousPoint;
pub use gridmap::{CellClass, CellIndex, GridMap, MapGenConfig, ObstacleShape};
pub use guidance::{GuidanceMap, GuidanceMode, MaskThreshold};
pub use oracle::{GridPath, VertexSet};
pub use planner::{PlanResult, PlanStatus, PlannerConfig, Termination};
