//! Fixtures shared by the criterion benchmarks.

use vertexnet_core::gridmap::{generate_map, GridMap, MapGenConfig};

/// Default-density 200x200 map for the given seed.
pub fn desk_map(seed: u64) -> GridMap {
    generate_map(&MapGenConfig {
        seed,
        ..MapGenConfig::default()
    })
    .expect("default generator config always yields a map")
}
