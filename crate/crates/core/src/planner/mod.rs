//! RRT* with an optional guided sampler.
//!
//! Each iteration draws `u ~ U(0, 1)`; when `u < guided_mix` the point comes from the
//! guidance raster, otherwise uniformly from the map rectangle. The rest is textbook
//! RRT*: nearest, steer, collision gate, choose-parent, rewire.

mod collision;
mod tree;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::ContinuousPoint;
use crate::gridmap::GridMap;
use crate::guidance::{apply_mask, GuidanceError, GuidanceMap, GuidanceSampler, MaskThreshold};

pub use collision::{obstacle_free, steer};
pub use tree::{Node, NodeId, Tree, REWIRE_EPSILON};

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("invalid planner config: {0}")]
    InvalidConfig(String),
    #[error("guidance is not samplable: {0}")]
    NotSamplable(String),
    #[error("no collision-free parent for the new node")]
    NoValidParent,
}

/// When a run may stop before its iteration budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    /// Stop at the first goal connection.
    Initial,
    /// Stop once `best_cost <= (1 + epsilon) * reference_cost`.
    Optimal { epsilon: f64, reference_cost: f64 },
}

/// Default slack for the optimal-solution stopping rule.
pub const DEFAULT_OPTIMAL_EPSILON: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// Maximum extension length (pixels).
    pub steer_step: f64,
    /// Goal tolerance (pixels).
    pub goal_radius: f64,
    pub max_iterations: usize,
    /// Rewire radius is `min(rewire_gamma * sqrt(ln n / n), steer_step)`.
    pub rewire_gamma: f64,
    /// Probability of drawing from the guidance raster.
    pub guided_mix: f64,
    pub termination: Termination,
    pub seed: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            steer_step: 10.0,
            goal_radius: 5.0,
            max_iterations: 100_000,
            rewire_gamma: 300.0,
            guided_mix: 0.5,
            termination: Termination::Initial,
            seed: 0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlanError> {
        let bad = |m: String| Err(PlanError::InvalidConfig(m));
        if !(self.steer_step.is_finite() && self.steer_step > 0.0) {
            return bad(format!("steer_step must be positive, got {}", self.steer_step));
        }
        if !(self.goal_radius.is_finite() && self.goal_radius > 0.0) {
            return bad(format!("goal_radius must be positive, got {}", self.goal_radius));
        }
        if !(self.rewire_gamma.is_finite() && self.rewire_gamma >= 0.0) {
            return bad(format!("rewire_gamma must be non-negative, got {}", self.rewire_gamma));
        }
        if !(0.0..=1.0).contains(&self.guided_mix) {
            return bad(format!("guided_mix must lie in [0, 1], got {}", self.guided_mix));
        }
        if let Termination::Optimal {
            epsilon,
            reference_cost,
        } = self.termination
        {
            if !(epsilon.is_finite() && epsilon >= 0.0) {
                return bad(format!("epsilon must be non-negative, got {epsilon}"));
            }
            if !(reference_cost.is_finite() && reference_cost >= 0.0) {
                return bad(format!("reference cost must be non-negative, got {reference_cost}"));
            }
        }
        Ok(())
    }

    /// `min(gamma * sqrt(ln n / n), steer_step)` for a tree of `n` nodes.
    pub fn rewire_radius(&self, n: usize) -> f64 {
        let n = n.max(1) as f64;
        (self.rewire_gamma * (n.ln() / n).sqrt()).min(self.steer_step)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    /// The termination condition was met.
    Solved,
    /// The budget ran out first; a path may still have been found.
    IterationBudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub status: PlanStatus,
    pub best_cost: Option<f64>,
    pub iterations_used: usize,
    pub iterations_to_first_solution: Option<usize>,
    /// `None` when timing is suppressed.
    #[serde(rename = "wall_time_s")]
    pub wall_time: Option<f64>,
    #[serde(rename = "path")]
    pub best_path: Option<Vec<ContinuousPoint>>,
}

impl PlanResult {
    pub fn without_timing(mut self) -> Self {
        self.wall_time = None;
        self
    }
}

/// Applies `tau` and falls back to the unmasked raster (with a warning) if nothing survives.
pub fn prepare_guidance(guidance: &GuidanceMap, tau: Option<MaskThreshold>) -> GuidanceMap {
    match tau.map(|t| apply_mask(guidance, t)) {
        None => guidance.clone(),
        Some(Ok(masked)) => masked,
        Some(Err(err)) => {
            log::warn!("{err}; sampling from the unmasked guidance map");
            guidance.clone()
        }
    }
}

/// Outcome of one planner iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub iteration: usize,
    /// Node added this iteration, if the extension passed the collision gate.
    pub inserted: Option<NodeId>,
    pub best_cost: Option<f64>,
}

/// Incremental RRT* run; [`plan`] drives it to completion.
#[derive(Debug)]
pub struct RrtStar<'a> {
    map: &'a GridMap,
    config: PlannerConfig,
    sampler: Option<GuidanceSampler>,
    rng: ChaCha8Rng,
    tree: Tree,
    goal: ContinuousPoint,
    goal_node: Option<NodeId>,
    iterations: usize,
    first_solution: Option<usize>,
}

impl<'a> RrtStar<'a> {
    pub fn new(
        map: &'a GridMap,
        config: PlannerConfig,
        guidance: Option<&GuidanceMap>,
    ) -> Result<Self, PlanError> {
        config.validate()?;
        let sampler = match guidance {
            Some(g) => {
                if (g.width(), g.height()) != (map.width(), map.height()) {
                    return Err(PlanError::InvalidConfig(format!(
                        "guidance is {}x{} but the map is {}x{}",
                        g.width(),
                        g.height(),
                        map.width(),
                        map.height()
                    )));
                }
                Some(
                    GuidanceSampler::new(g)
                        .map_err(|e: GuidanceError| PlanError::NotSamplable(e.to_string()))?,
                )
            }
            None if config.guided_mix > 0.0 => {
                return Err(PlanError::NotSamplable(
                    "guided_mix > 0 but no guidance map was given".into(),
                ))
            }
            None => None,
        };
        let start = ContinuousPoint::center_of(map.start());
        let goal = ContinuousPoint::center_of(map.goal());
        let tree = Tree::new(
            start,
            map.width() as f64,
            map.height() as f64,
            config.steer_step.clamp(1.0, 16.0),
        );
        let mut planner = Self {
            map,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            sampler,
            tree,
            goal,
            goal_node: None,
            iterations: 0,
            first_solution: None,
        };
        planner.try_connect_goal(planner.tree.root());
        Ok(planner)
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn best_cost(&self) -> Option<f64> {
        self.goal_node.map(|g| self.tree.node(g).cost)
    }

    pub fn best_path(&self) -> Option<Vec<ContinuousPoint>> {
        self.goal_node.map(|g| self.tree.path_to(g))
    }

    pub fn iterations_to_first_solution(&self) -> Option<usize> {
        self.first_solution
    }

    pub fn is_done(&self) -> bool {
        match (self.config.termination, self.best_cost()) {
            (_, None) => false,
            (Termination::Initial, Some(_)) => true,
            (
                Termination::Optimal {
                    epsilon,
                    reference_cost,
                },
                Some(c),
            ) => c <= (1.0 + epsilon) * reference_cost,
        }
    }

    fn sample(&mut self) -> ContinuousPoint {
        let u: f64 = self.rng.random();
        match &self.sampler {
            Some(s) if u < self.config.guided_mix => s.sample(&mut self.rng),
            _ => ContinuousPoint::new(
                self.rng.random::<f64>() * self.map.width() as f64,
                self.rng.random::<f64>() * self.map.height() as f64,
            ),
        }
    }

    /// Links the goal to `id` when it is close enough and visible, or re-parents the
    /// existing goal node when `id` offers a cheaper route.
    fn try_connect_goal(&mut self, id: NodeId) {
        if Some(id) == self.goal_node {
            return;
        }
        let node = self.tree.node(id);
        let d = node.point.distance(&self.goal);
        if d > self.config.goal_radius {
            return;
        }
        let via = node.cost + d;
        let improves = match self.goal_node {
            None => true,
            Some(g) => via < self.tree.node(g).cost - REWIRE_EPSILON,
        };
        if !improves || !obstacle_free(self.map, node.point, self.goal) {
            return;
        }
        match self.goal_node {
            None => {
                self.goal_node = Some(self.tree.add_child(id, self.goal));
                self.first_solution = Some(self.iterations);
            }
            Some(g) => self.tree.reparent(g, id),
        }
    }

    /// Runs one iteration.
    pub fn step(&mut self) -> Result<StepReport, PlanError> {
        self.iterations += 1;
        let x_rand = self.sample();
        let nearest = self.tree.nearest(&x_rand);
        let x_new = steer(self.tree.node(nearest).point, x_rand, self.config.steer_step);
        let mut inserted = None;
        if obstacle_free(self.map, self.tree.node(nearest).point, x_new) {
            let radius = self.config.rewire_radius(self.tree.len());
            let id = self
                .tree
                .extend_and_rewire(self.map, x_new, radius, nearest)?;
            self.try_connect_goal(id);
            inserted = Some(id);
        }
        Ok(StepReport {
            iteration: self.iterations,
            inserted,
            best_cost: self.best_cost(),
        })
    }

    pub fn into_result(self, wall_time: Option<f64>) -> PlanResult {
        PlanResult {
            status: if self.is_done() {
                PlanStatus::Solved
            } else {
                PlanStatus::IterationBudgetExhausted
            },
            best_cost: self.best_cost(),
            iterations_used: self.iterations,
            iterations_to_first_solution: self.first_solution,
            wall_time,
            best_path: self.best_path(),
        }
    }
}

/// Plans from the map's start to its goal.
///
/// `guidance` must be present and samplable when `config.guided_mix > 0`; masking (and
/// its fallback) is applied beforehand with [`prepare_guidance`].
pub fn plan(
    map: &GridMap,
    config: &PlannerConfig,
    guidance: Option<&GuidanceMap>,
) -> Result<PlanResult, PlanError> {
    let started = Instant::now();
    let mut planner = RrtStar::new(map, config.clone(), guidance)?;
    while !planner.is_done() && planner.iterations() < config.max_iterations {
        planner.step()?;
    }
    Ok(planner.into_result(Some(started.elapsed().as_secs_f64())))
}
