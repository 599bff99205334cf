//! Procedural map generation.
//!
//! Obstacles are polygons (or discs) in a local frame centred on the origin, rotated by a
//! uniform angle, translated to a uniform position and rasterised by testing pixel centres.

use std::f64::consts::PI;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CellClass, CellIndex, GridError, GridMap};

/// Obstacle/endpoint draws allowed before giving up on a configuration.
pub const MAX_GENERATION_ATTEMPTS: usize = 64;
/// Start/goal redraws per obstacle layout before the layout itself is redrawn.
const ENDPOINT_DRAWS_PER_LAYOUT: usize = 8;
const MIN_MAP_SIDE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleShape {
    Triangle,
    Circle,
    Square,
    Bar,
    UShape,
}

impl ObstacleShape {
    pub const ALL: [ObstacleShape; 5] = [
        Self::Triangle,
        Self::Circle,
        Self::Square,
        Self::Bar,
        Self::UShape,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Triangle => "triangle",
            Self::Circle => "circle",
            Self::Square => "square",
            Self::Bar => "bar",
            Self::UShape => "u_shape",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapGenConfig {
    pub width: usize,
    pub height: usize,
    /// Inclusive `(min, max)` number of obstacles.
    pub obstacle_count_range: (usize, usize),
    pub shape_set: Vec<ObstacleShape>,
    /// Inclusive `(min, max)` obstacle extent in pixels.
    pub obstacle_size_range: (f64, f64),
    pub seed: u64,
}

impl Default for MapGenConfig {
    fn default() -> Self {
        Self {
            width: 200,
            height: 200,
            obstacle_count_range: (4, 12),
            shape_set: ObstacleShape::ALL.to_vec(),
            obstacle_size_range: (12.0, 48.0),
            seed: 0,
        }
    }
}

impl MapGenConfig {
    pub fn validate(&self) -> Result<(), GridError> {
        let bad = |msg: String| Err(GridError::InvalidConfig(msg));
        if self.width < MIN_MAP_SIDE || self.height < MIN_MAP_SIDE {
            return bad(format!(
                "maps must be at least {MIN_MAP_SIDE}x{MIN_MAP_SIDE}, got {}x{}",
                self.width, self.height
            ));
        }
        let (lo, hi) = self.obstacle_count_range;
        if lo > hi {
            return bad(format!("empty obstacle count range [{lo}, {hi}]"));
        }
        if self.shape_set.is_empty() {
            return bad("shape set is empty".into());
        }
        let (smin, smax) = self.obstacle_size_range;
        if !(smin.is_finite() && smax.is_finite() && smin > 0.0 && smin <= smax) {
            return bad(format!("bad obstacle size range [{smin}, {smax}]"));
        }
        Ok(())
    }
}

/// An obstacle as drawn by the generator, before rasterisation.
#[derive(Clone, Debug, PartialEq)]
pub struct PlacedObstacle {
    pub shape: ObstacleShape,
    pub center: (f64, f64),
    pub rotation: f64,
    pub size: f64,
    /// World-frame polygons (a U-shape is three bars). Empty for circles.
    pub polygons: Vec<Vec<(f64, f64)>>,
}

impl PlacedObstacle {
    fn contains(&self, px: f64, py: f64) -> bool {
        match self.shape {
            ObstacleShape::Circle => {
                let r = self.size / 2.0;
                let (dx, dy) = (px - self.center.0, py - self.center.1);
                dx * dx + dy * dy <= r * r
            }
            _ => self.polygons.iter().any(|p| point_in_polygon(p, px, py)),
        }
    }

    /// Inclusive pixel bounding box, clipped to the map.
    fn pixel_bounds(&self, width: usize, height: usize) -> Option<(usize, usize, usize, usize)> {
        let (mut x0, mut y0, mut x1, mut y1) = if self.polygons.is_empty() {
            let r = self.size / 2.0;
            (
                self.center.0 - r,
                self.center.1 - r,
                self.center.0 + r,
                self.center.1 + r,
            )
        } else {
            self.polygons.iter().flatten().fold(
                (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
                |(a, b, c, d), &(x, y)| (a.min(x), b.min(y), c.max(x), d.max(y)),
            )
        };
        x0 = x0.floor().max(0.0);
        y0 = y0.floor().max(0.0);
        x1 = x1.ceil().min(width as f64 - 1.0);
        y1 = y1.ceil().min(height as f64 - 1.0);
        (x0 <= x1 && y0 <= y1).then_some((x0 as usize, y0 as usize, x1 as usize, y1 as usize))
    }

    fn rasterize(&self, width: usize, cells: &mut [CellClass]) {
        let height = cells.len() / width;
        let Some((x0, y0, x1, y1)) = self.pixel_bounds(width, height) else {
            return;
        };
        for y in y0..=y1 {
            for x in x0..=x1 {
                if self.contains(x as f64 + 0.5, y as f64 + 0.5) {
                    cells[y * width + x] = CellClass::Obstacle;
                }
            }
        }
    }
}

/// Crossing-number test; points exactly on an edge may fall either way.
fn point_in_polygon(poly: &[(f64, f64)], px: f64, py: f64) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[j];
        if (yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<(f64, f64)> {
    vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
}

fn local_polygons<R: Rng>(shape: ObstacleShape, size: f64, rng: &mut R) -> Vec<Vec<(f64, f64)>> {
    let h = size / 2.0;
    match shape {
        ObstacleShape::Circle => Vec::new(),
        ObstacleShape::Square => vec![rect(-h, -h, h, h)],
        ObstacleShape::Bar => {
            let aspect = rng.random_range(4.0..=8.0);
            let t = size / aspect / 2.0;
            vec![rect(-h, -t, h, t)]
        }
        ObstacleShape::UShape => {
            let t = (size / 5.0).max(1.0);
            vec![
                rect(-h, -h, -h + t, h),
                rect(h - t, -h, h, h),
                rect(-h, h - t, h, h),
            ]
        }
        ObstacleShape::Triangle => {
            // Redraw slivers; a triangle should cover at least an eighth of its box.
            let mut tri = Vec::new();
            for _ in 0..16 {
                tri = (0..3)
                    .map(|_| (rng.random_range(-h..=h), rng.random_range(-h..=h)))
                    .collect::<Vec<_>>();
                let area = ((tri[1].0 - tri[0].0) * (tri[2].1 - tri[0].1)
                    - (tri[2].0 - tri[0].0) * (tri[1].1 - tri[0].1))
                    .abs()
                    / 2.0;
                if area >= size * size / 8.0 {
                    break;
                }
            }
            vec![tri]
        }
    }
}

fn place_obstacle<R: Rng>(cfg: &MapGenConfig, rng: &mut R) -> PlacedObstacle {
    let shape = cfg.shape_set[rng.random_range(0..cfg.shape_set.len())];
    let (smin, smax) = cfg.obstacle_size_range;
    let size = if smin == smax {
        smin
    } else {
        rng.random_range(smin..=smax)
    };
    let rotation = rng.random_range(0.0..2.0 * PI);
    let center = (
        rng.random_range(0.0..cfg.width as f64),
        rng.random_range(0.0..cfg.height as f64),
    );
    let (sin, cos) = rotation.sin_cos();
    let polygons = local_polygons(shape, size, rng)
        .into_iter()
        .map(|poly| {
            poly.into_iter()
                .map(|(x, y)| (center.0 + x * cos - y * sin, center.1 + x * sin + y * cos))
                .collect()
        })
        .collect();
    PlacedObstacle {
        shape,
        center,
        rotation,
        size,
        polygons,
    }
}

/// Generates a connected map and also returns the obstacles that were drawn.
pub fn generate_map_detailed(
    cfg: &MapGenConfig,
) -> Result<(GridMap, Vec<PlacedObstacle>), GridError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (width, height) = (cfg.width, cfg.height);

    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let (lo, hi) = cfg.obstacle_count_range;
        let count = rng.random_range(lo..=hi);
        let obstacles: Vec<_> = (0..count).map(|_| place_obstacle(cfg, &mut rng)).collect();
        let mut cells = vec![CellClass::Free; width * height];
        for obstacle in &obstacles {
            obstacle.rasterize(width, &mut cells);
        }
        let free: Vec<usize> = cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == CellClass::Free)
            .map(|(i, _)| i)
            .collect();
        if free.len() < 2 {
            continue;
        }
        for _ in 0..ENDPOINT_DRAWS_PER_LAYOUT {
            let picks = index::sample(&mut rng, free.len(), 2);
            let start = CellIndex::new(free[picks.index(0)] % width, free[picks.index(0)] / width);
            let goal = CellIndex::new(free[picks.index(1)] % width, free[picks.index(1)] / width);
            let map = GridMap::new(width, height, cells.clone(), start, goal)?;
            if map.is_connected(start, goal) {
                return Ok((map, obstacles));
            }
        }
    }
    Err(GridError::GenerationFailed {
        attempts: MAX_GENERATION_ATTEMPTS,
    })
}

/// Generates a map whose start and goal are 8-connected through traversable cells.
pub fn generate_map(cfg: &MapGenConfig) -> Result<GridMap, GridError> {
    generate_map_detailed(cfg).map(|(map, _)| map)
}

/// Draws `n_starts` start cells and `n_goals` goal cells (all distinct, all `Free`) and
/// returns their cross product, starts outermost.
///
/// Candidates are restricted to the free cells reachable from the map's own start, so
/// every returned pair is connected.
pub fn sample_start_goal_pairs(
    map: &GridMap,
    n_starts: usize,
    n_goals: usize,
    seed: u64,
) -> Result<Vec<(CellIndex, CellIndex)>, GridError> {
    let reachable = map.reachable_from(map.start());
    let candidates: Vec<usize> = reachable
        .iter()
        .enumerate()
        .filter(|&(i, &r)| r && map.cells()[i] == CellClass::Free)
        .map(|(i, _)| i)
        .collect();
    let needed = n_starts + n_goals;
    if candidates.len() < needed {
        return Err(GridError::InsufficientFreeSpace {
            needed,
            available: candidates.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<CellIndex> = index::sample(&mut rng, candidates.len(), needed)
        .into_iter()
        .map(|k| map.cell_at(candidates[k]))
        .collect();
    let (starts, goals) = picks.split_at(n_starts);
    Ok(starts
        .iter()
        .flat_map(|&s| goals.iter().map(move |&g| (s, g)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent 8-connected flood fill (no corner cutting) used as a connectivity oracle.
    fn flood_connected(map: &GridMap, a: CellIndex, b: CellIndex) -> bool {
        let (w, h) = (map.width() as i64, map.height() as i64);
        let blocked = |x: i64, y: i64| {
            x < 0
                || y < 0
                || x >= w
                || y >= h
                || map.class(CellIndex::new(x as usize, y as usize)) == CellClass::Obstacle
        };
        let mut seen = vec![false; (w * h) as usize];
        let mut stack = vec![(a.x as i64, a.y as i64)];
        seen[(a.y as i64 * w + a.x as i64) as usize] = true;
        while let Some((x, y)) = stack.pop() {
            if (x, y) == (b.x as i64, b.y as i64) {
                return true;
            }
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if (dx, dy) == (0, 0) || blocked(nx, ny) {
                        continue;
                    }
                    if dx != 0 && dy != 0 && blocked(x + dx, y) && blocked(x, y + dy) {
                        continue;
                    }
                    let k = (ny * w + nx) as usize;
                    if !seen[k] {
                        seen[k] = true;
                        stack.push((nx, ny));
                    }
                }
            }
        }
        false
    }

    fn obstacle_components(map: &GridMap) -> usize {
        let (w, h) = (map.width(), map.height());
        let mut seen = vec![false; w * h];
        let mut components = 0;
        for i in 0..w * h {
            if seen[i] || map.cells()[i] != CellClass::Obstacle {
                continue;
            }
            components += 1;
            let mut stack = vec![i];
            seen[i] = true;
            while let Some(k) = stack.pop() {
                let (x, y) = ((k % w) as i64, (k / w) as i64);
                for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let n = ny as usize * w + nx as usize;
                    if !seen[n] && map.cells()[n] == CellClass::Obstacle {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
        }
        components
    }

    #[test]
    fn empty_configuration() {
        let cfg = MapGenConfig {
            width: 20,
            height: 20,
            obstacle_count_range: (0, 0),
            seed: 1,
            ..MapGenConfig::default()
        };
        let map = generate_map(&cfg).unwrap();
        assert_eq!(map.count(CellClass::Free), 398);
        assert_eq!(map.count(CellClass::Start), 1);
        assert_eq!(map.count(CellClass::Goal), 1);
        assert_eq!(map.count(CellClass::Obstacle), 0);
    }

    #[test]
    fn three_squares() {
        let cfg = MapGenConfig {
            shape_set: vec![ObstacleShape::Square],
            obstacle_count_range: (3, 3),
            seed: 7,
            ..MapGenConfig::default()
        };
        let (map, obstacles) = generate_map_detailed(&cfg).unwrap();
        assert_eq!(obstacles.len(), 3);
        assert!(obstacles.iter().all(|o| o.shape == ObstacleShape::Square));
        assert!((1..=3).contains(&obstacle_components(&map)));
        assert!(flood_connected(&map, map.start(), map.goal()));
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = MapGenConfig {
            seed: 42,
            ..MapGenConfig::default()
        };
        assert_eq!(generate_map(&cfg).unwrap(), generate_map(&cfg).unwrap());
        let other = MapGenConfig { seed: 43, ..cfg };
        assert_ne!(
            generate_map(&other).unwrap().cells(),
            generate_map(&MapGenConfig { seed: 42, ..other.clone() }).unwrap().cells()
        );
    }

    #[test]
    fn every_generated_map_is_connected_and_sized() {
        for seed in 0..40 {
            let cfg = MapGenConfig {
                width: 64,
                height: 48,
                obstacle_count_range: (2, 10),
                obstacle_size_range: (6.0, 20.0),
                seed,
                ..MapGenConfig::default()
            };
            let (map, obstacles) = generate_map_detailed(&cfg).unwrap();
            assert!((2..=10).contains(&obstacles.len()));
            assert_eq!((map.width(), map.height()), (64, 48));
            assert!(flood_connected(&map, map.start(), map.goal()), "seed {seed}");
        }
    }

    #[test]
    fn each_shape_rasterises_something() {
        for shape in ObstacleShape::ALL {
            let cfg = MapGenConfig {
                width: 60,
                height: 60,
                obstacle_count_range: (1, 1),
                shape_set: vec![shape],
                obstacle_size_range: (20.0, 20.0),
                seed: 3,
            };
            let (map, obs) = generate_map_detailed(&cfg).unwrap();
            assert_eq!(obs[0].shape, shape);
            assert!(map.count(CellClass::Obstacle) > 0, "{shape:?}");
        }
    }

    #[test]
    fn u_shape_is_open_on_one_side() {
        // Unrotated U-shape: the centre pixel is free, the three walls are not.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let obstacle = PlacedObstacle {
            shape: ObstacleShape::UShape,
            center: (15.0, 15.0),
            rotation: 0.0,
            size: 20.0,
            polygons: local_polygons(ObstacleShape::UShape, 20.0, &mut rng)
                .into_iter()
                .map(|p| p.into_iter().map(|(x, y)| (x + 15.0, y + 15.0)).collect())
                .collect(),
        };
        let mut cells = vec![CellClass::Free; 30 * 30];
        obstacle.rasterize(30, &mut cells);
        let at = |x: usize, y: usize| cells[y * 30 + x];
        assert_eq!(at(15, 15), CellClass::Free);
        assert_eq!(at(6, 15), CellClass::Obstacle);
        assert_eq!(at(23, 15), CellClass::Obstacle);
        assert_eq!(at(15, 23), CellClass::Obstacle);
        assert_eq!(at(15, 6), CellClass::Free);
    }

    #[test]
    fn invalid_configs_rejected() {
        let base = MapGenConfig::default();
        for cfg in [
            MapGenConfig { width: 7, ..base.clone() },
            MapGenConfig { obstacle_count_range: (3, 2), ..base.clone() },
            MapGenConfig { shape_set: vec![], ..base.clone() },
            MapGenConfig { obstacle_size_range: (0.0, 4.0), ..base.clone() },
        ] {
            assert!(matches!(generate_map(&cfg), Err(GridError::InvalidConfig(_))));
        }
    }

    #[test]
    fn over_dense_config_fails() {
        let cfg = MapGenConfig {
            width: 10,
            height: 10,
            obstacle_count_range: (6, 6),
            shape_set: vec![ObstacleShape::Square],
            obstacle_size_range: (40.0, 40.0),
            seed: 0,
        };
        assert_eq!(
            generate_map(&cfg),
            Err(GridError::GenerationFailed { attempts: MAX_GENERATION_ATTEMPTS })
        );
    }

    #[test]
    fn start_goal_pairs() {
        let map = generate_map(&MapGenConfig { seed: 11, ..MapGenConfig::default() }).unwrap();
        let pairs = sample_start_goal_pairs(&map, 12, 12, 3).unwrap();
        assert_eq!(pairs.len(), 144);
        for (s, g) in &pairs {
            assert_ne!(s, g);
            assert_eq!(map.class(*s), CellClass::Free);
            assert_eq!(map.class(*g), CellClass::Free);
            assert!(flood_connected(&map, *s, *g));
        }
        assert_eq!(pairs, sample_start_goal_pairs(&map, 12, 12, 3).unwrap());

        let empty = GridMap::empty(8, 8, CellIndex::new(0, 0), CellIndex::new(7, 7)).unwrap();
        let one = sample_start_goal_pairs(&empty, 1, 1, 0).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(empty.class(one[0].0), CellClass::Free);
        assert_eq!(
            sample_start_goal_pairs(&empty, 40, 40, 0),
            Err(GridError::InsufficientFreeSpace { needed: 80, available: 62 })
        );
    }
}
