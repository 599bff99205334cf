//! Multi-map, multi-algorithm experiment harness.
//!
//! Every trial gets its own seed derived from `(base_seed, map id, algorithm, trial)`, so
//! adding an algorithm or map never changes the trials that already existed. Guidance
//! rasters are built once per (map, algorithm) and shared by that pair's trials.

mod records;
mod summary;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gridmap::GridMap;
use crate::guidance::{
    oracle_guidance, read_guidance, GuidanceError, GuidanceMap, GuidanceMode, MaskThreshold,
    DEFAULT_SIGMA,
};
use crate::oracle::{astar, OracleError};
use crate::planner::{plan, prepare_guidance, PlanStatus, PlannerConfig, Termination};
use crate::seed::derive_seed;

pub use records::{read_trials_csv, write_trials_csv, TrialRecord, TrialStatus, TRIAL_CSV_HEADER};
pub use summary::{
    read_summary_csv, summarize, write_summary_csv, Metric, SummaryRow, SUMMARY_CSV_HEADER,
};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("guidance file {0} not found")]
    GuidanceFileMissing(PathBuf),
    #[error("invalid algorithm: {0}")]
    InvalidAlgorithm(String),
    #[error("invalid benchmark config: {0}")]
    InvalidConfig(String),
    #[error("no records to summarize")]
    EmptyInput,
    #[error("map {map}: {source}")]
    Reference { map: String, source: OracleError },
    #[error("map {map}: {source}")]
    Guidance { map: String, source: GuidanceError },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmName {
    RrtStar,
    NrrtStar,
    VnrrtStar,
    MVnrrtStar,
}

impl AlgorithmName {
    pub const ALL: [AlgorithmName; 4] = [
        Self::RrtStar,
        Self::NrrtStar,
        Self::VnrrtStar,
        Self::MVnrrtStar,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::RrtStar => "rrt_star",
            Self::NrrtStar => "nrrt_star",
            Self::VnrrtStar => "vnrrt_star",
            Self::MVnrrtStar => "m_vnrrt_star",
        }
    }
}

impl fmt::Display for AlgorithmName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmName {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| BenchError::InvalidAlgorithm(format!("unknown algorithm {s:?}")))
    }
}

/// Where a guided algorithm gets its raster from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GuidanceSource {
    OraclePath,
    OracleVertex,
    /// A `VGM1` file. A `{map}` placeholder in the path is replaced by the map id.
    File(PathBuf),
}

impl GuidanceSource {
    fn resolve_path(path: &Path, map_id: &str) -> PathBuf {
        PathBuf::from(path.to_string_lossy().replace("{map}", map_id))
    }

    /// Builds or reads the unmasked raster for `map`.
    pub fn load(&self, map: &GridMap, map_id: &str, sigma: f64) -> Result<GuidanceMap, BenchError> {
        let wrap = |source: GuidanceError| BenchError::Guidance {
            map: map_id.to_owned(),
            source,
        };
        match self {
            Self::OraclePath => {
                oracle_guidance(map, map.start(), map.goal(), GuidanceMode::Path, sigma).map_err(wrap)
            }
            Self::OracleVertex => {
                oracle_guidance(map, map.start(), map.goal(), GuidanceMode::Vertex, sigma)
                    .map_err(wrap)
            }
            Self::File(template) => {
                let path = Self::resolve_path(template, map_id);
                let bytes = std::fs::read(&path).map_err(|e| match e.kind() {
                    std::io::ErrorKind::NotFound => BenchError::GuidanceFileMissing(path.clone()),
                    _ => BenchError::Io(e),
                })?;
                read_guidance(&bytes).map_err(wrap)
            }
        }
    }
}

/// `oracle-path`, `oracle-vertex` or `file:<path>`.
impl FromStr for GuidanceSource {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oracle-path" => Ok(Self::OraclePath),
            "oracle-vertex" => Ok(Self::OracleVertex),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(Self::File(PathBuf::from(p))),
                _ => Err(BenchError::InvalidConfig(format!(
                    "guidance must be oracle-path, oracle-vertex or file:<path>, got {s:?}"
                ))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmSpec {
    name: AlgorithmName,
    tau: Option<MaskThreshold>,
    guidance_source: Option<GuidanceSource>,
}

impl AlgorithmSpec {
    /// `tau` is required exactly for `m_vnrrt_star`; `rrt_star` takes no guidance.
    pub fn new(
        name: AlgorithmName,
        tau: Option<MaskThreshold>,
        guidance_source: Option<GuidanceSource>,
    ) -> Result<Self, BenchError> {
        if tau.is_some() != (name == AlgorithmName::MVnrrtStar) {
            return Err(BenchError::InvalidAlgorithm(format!(
                "{name}: tau is required for m_vnrrt_star and only for it"
            )));
        }
        let guidance_source = match (name, guidance_source) {
            (AlgorithmName::RrtStar, Some(_)) => {
                return Err(BenchError::InvalidAlgorithm(
                    "rrt_star does not take a guidance source".into(),
                ))
            }
            (AlgorithmName::RrtStar, None) => None,
            (AlgorithmName::NrrtStar, None) => Some(GuidanceSource::OraclePath),
            (_, None) => Some(GuidanceSource::OracleVertex),
            (_, Some(src)) => Some(src),
        };
        Ok(Self {
            name,
            tau,
            guidance_source,
        })
    }

    pub fn rrt_star() -> Self {
        Self::new(AlgorithmName::RrtStar, None, None).unwrap()
    }

    pub fn nrrt_star() -> Self {
        Self::new(AlgorithmName::NrrtStar, None, None).unwrap()
    }

    pub fn vnrrt_star() -> Self {
        Self::new(AlgorithmName::VnrrtStar, None, None).unwrap()
    }

    pub fn m_vnrrt_star(tau: MaskThreshold) -> Self {
        Self::new(AlgorithmName::MVnrrtStar, Some(tau), None).unwrap()
    }

    pub fn name(&self) -> AlgorithmName {
        self.name
    }

    pub fn tau(&self) -> Option<MaskThreshold> {
        self.tau
    }

    pub fn guidance_source(&self) -> Option<&GuidanceSource> {
        self.guidance_source.as_ref()
    }

    /// Display label, e.g. `m_vnrrt_star_tau0.9`.
    pub fn label(&self) -> String {
        label_for(self.name, self.tau.map(f64::from))
    }
}

pub(crate) fn label_for(name: AlgorithmName, tau: Option<f64>) -> String {
    match tau {
        Some(t) => format!("{name}_tau{t}"),
        None => name.to_string(),
    }
}

/// A benchmark map with a stable identifier (used for seeding and CSV output).
#[derive(Clone, Debug)]
pub struct BenchMap {
    pub id: String,
    pub map: GridMap,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TerminationKind {
    Initial,
    /// Stop within `(1 + epsilon)` of the map's A* cost.
    Optimal { epsilon: f64 },
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub trials: usize,
    pub termination: TerminationKind,
    pub base_seed: u64,
    /// Template for every run; `seed` and `termination` are overwritten per trial and
    /// `guided_mix` is forced to 0 for `rrt_star`.
    pub planner: PlannerConfig,
    pub sigma: f64,
    pub jobs: usize,
    pub record_timing: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            trials: 50,
            termination: TerminationKind::Initial,
            base_seed: 0,
            planner: PlannerConfig::default(),
            sigma: DEFAULT_SIGMA,
            jobs: 1,
            record_timing: true,
        }
    }
}

pub fn trial_seed(base_seed: u64, map_id: &str, algorithm: AlgorithmName, trial: usize) -> u64 {
    derive_seed(base_seed, &[map_id, algorithm.as_str()], &[trial as u64])
}

fn load_guidance(
    spec: &AlgorithmSpec,
    bench_map: &BenchMap,
    sigma: f64,
) -> Result<Option<GuidanceMap>, BenchError> {
    let Some(source) = &spec.guidance_source else {
        return Ok(None);
    };
    let raw = source.load(&bench_map.map, &bench_map.id, sigma)?;
    Ok(Some(prepare_guidance(&raw, spec.tau)))
}

struct Job<'a> {
    map: &'a BenchMap,
    spec: &'a AlgorithmSpec,
    guidance: Option<&'a GuidanceMap>,
    reference_cost: f64,
    trial: usize,
}

fn run_trial(job: &Job<'_>, cfg: &BenchConfig) -> TrialRecord {
    let seed = trial_seed(cfg.base_seed, &job.map.id, job.spec.name, job.trial);
    let termination = match cfg.termination {
        TerminationKind::Initial => Termination::Initial,
        TerminationKind::Optimal { epsilon } => Termination::Optimal {
            epsilon,
            reference_cost: job.reference_cost,
        },
    };
    let planner = PlannerConfig {
        seed,
        termination,
        guided_mix: if job.spec.name == AlgorithmName::RrtStar {
            0.0
        } else {
            cfg.planner.guided_mix
        },
        ..cfg.planner.clone()
    };
    let started = Instant::now();
    let outcome = plan(&job.map.map, &planner, job.guidance);
    let elapsed = started.elapsed().as_secs_f64();
    let mut record = TrialRecord {
        map_id: job.map.id.clone(),
        algorithm: job.spec.name,
        tau: job.spec.tau.map(f64::from),
        trial: job.trial,
        seed,
        status: TrialStatus::Error,
        path_length: None,
        time_s: cfg.record_timing.then_some(elapsed),
        iterations: 0,
        iters_to_first: None,
    };
    match outcome {
        Ok(r) => {
            record.status = match r.status {
                PlanStatus::Solved => TrialStatus::Solved,
                PlanStatus::IterationBudgetExhausted => TrialStatus::BudgetExhausted,
            };
            if r.status == PlanStatus::Solved {
                record.path_length = r.best_cost;
            }
            record.iterations = r.iterations_used;
            record.iters_to_first = r.iterations_to_first_solution;
        }
        Err(e) => log::warn!("map {} {} trial {}: {e}", job.map.id, job.spec.label(), job.trial),
    }
    record
}

/// Runs `cfg.trials` trials of every algorithm on every map.
///
/// Planner failures become `error` records; guidance or reference-path failures abort,
/// since they mean the inputs violate the harness preconditions.
pub fn run_benchmark(
    maps: &[BenchMap],
    algorithms: &[AlgorithmSpec],
    cfg: &BenchConfig,
) -> Result<Vec<TrialRecord>, BenchError> {
    if cfg.jobs == 0 {
        return Err(BenchError::InvalidConfig("jobs must be at least 1".into()));
    }
    cfg.planner
        .validate()
        .map_err(|e| BenchError::InvalidConfig(e.to_string()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| BenchError::InvalidConfig(e.to_string()))?;

    pool.install(|| {
        let references: Vec<f64> = maps
            .par_iter()
            .map(|m| match cfg.termination {
                TerminationKind::Initial => Ok(0.0),
                TerminationKind::Optimal { .. } => astar(&m.map, m.map.start(), m.map.goal())
                    .map(|p| p.cost)
                    .map_err(|source| BenchError::Reference {
                        map: m.id.clone(),
                        source,
                    }),
            })
            .collect::<Result<_, _>>()?;

        let pairs: Vec<(usize, usize)> = (0..maps.len())
            .flat_map(|m| (0..algorithms.len()).map(move |a| (m, a)))
            .collect();
        let guidance: Vec<Option<GuidanceMap>> = pairs
            .par_iter()
            .map(|&(m, a)| load_guidance(&algorithms[a], &maps[m], cfg.sigma))
            .collect::<Result<_, _>>()?;

        let jobs: Vec<Job<'_>> = pairs
            .iter()
            .zip(&guidance)
            .flat_map(|(&(m, a), g)| {
                let reference_cost = references[m];
                (0..cfg.trials).map(move |trial| Job {
                    map: &maps[m],
                    spec: &algorithms[a],
                    guidance: g.as_ref(),
                    reference_cost,
                    trial,
                })
            })
            .collect();
        Ok(jobs.par_iter().map(|job| run_trial(job, cfg)).collect())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::{generate_map, MapGenConfig};

    fn small_maps(n: u64) -> Vec<BenchMap> {
        (0..n)
            .map(|s| BenchMap {
                id: format!("m{s}"),
                map: generate_map(&MapGenConfig {
                    width: 60,
                    height: 60,
                    obstacle_count_range: (2, 5),
                    obstacle_size_range: (6.0, 16.0),
                    seed: s,
                    ..MapGenConfig::default()
                })
                .unwrap(),
            })
            .collect()
    }

    #[test]
    fn spec_invariants() {
        let tau = MaskThreshold::new(0.5).unwrap();
        assert!(AlgorithmSpec::new(AlgorithmName::VnrrtStar, Some(tau), None).is_err());
        assert!(AlgorithmSpec::new(AlgorithmName::MVnrrtStar, None, None).is_err());
        assert!(AlgorithmSpec::new(
            AlgorithmName::RrtStar,
            None,
            Some(GuidanceSource::OracleVertex)
        )
        .is_err());
        assert_eq!(AlgorithmSpec::nrrt_star().guidance_source(), Some(&GuidanceSource::OraclePath));
        assert_eq!(AlgorithmSpec::m_vnrrt_star(tau).label(), "m_vnrrt_star_tau0.5");
    }

    #[test]
    fn three_trials_three_seeds() {
        let maps = small_maps(1);
        let cfg = BenchConfig { trials: 3, ..BenchConfig::default() };
        let recs = run_benchmark(&maps, &[AlgorithmSpec::rrt_star()], &cfg).unwrap();
        assert_eq!(recs.len(), 3);
        assert_ne!(recs[0].seed, recs[1].seed);
        assert_ne!(recs[1].seed, recs[2].seed);
        assert_ne!(recs[0].seed, recs[2].seed);
    }

    #[test]
    fn rerun_is_identical_apart_from_time() {
        let maps = small_maps(2);
        let algs = [
            AlgorithmSpec::rrt_star(),
            AlgorithmSpec::vnrrt_star(),
            AlgorithmSpec::m_vnrrt_star(MaskThreshold::new(0.9).unwrap()),
        ];
        let cfg = BenchConfig {
            trials: 2,
            jobs: 3,
            termination: TerminationKind::Optimal { epsilon: 0.2 },
            planner: PlannerConfig { max_iterations: 5000, ..PlannerConfig::default() },
            ..BenchConfig::default()
        };
        let strip = |mut v: Vec<TrialRecord>| {
            v.iter_mut().for_each(|r| r.time_s = None);
            v
        };
        let a = strip(run_benchmark(&maps, &algs, &cfg).unwrap());
        let b = strip(run_benchmark(&maps, &algs, &BenchConfig { jobs: 1, ..cfg.clone() }).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.len(), 2 * 3 * 2);
        for r in &a {
            assert_eq!(r.path_length.is_some(), r.status == TrialStatus::Solved);
        }
    }

    #[test]
    fn adding_an_algorithm_does_not_perturb_existing_trials() {
        let maps = small_maps(1);
        let cfg = BenchConfig { trials: 2, record_timing: false, ..BenchConfig::default() };
        let alone = run_benchmark(&maps, &[AlgorithmSpec::vnrrt_star()], &cfg).unwrap();
        let both =
            run_benchmark(&maps, &[AlgorithmSpec::rrt_star(), AlgorithmSpec::vnrrt_star()], &cfg)
                .unwrap();
        assert_eq!(alone[..], both[2..]);
    }

    #[test]
    fn missing_guidance_file() {
        let maps = small_maps(1);
        let spec = AlgorithmSpec::new(
            AlgorithmName::VnrrtStar,
            None,
            Some(GuidanceSource::File("/nonexistent/{map}.vgm".into())),
        )
        .unwrap();
        let err = run_benchmark(&maps, &[spec], &BenchConfig::default()).unwrap_err();
        assert!(
            matches!(&err, BenchError::GuidanceFileMissing(p) if p == Path::new("/nonexistent/m0.vgm")),
            "{err}"
        );
    }

    #[test]
    fn planner_errors_become_failed_trials() {
        // A 2x2 raster cannot guide a 60x60 map: the planner rejects it, the harness records it.
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("tiny.vgm");
        let tiny = GuidanceMap::new(2, 2, vec![1.0; 4]).unwrap();
        std::fs::write(&file, crate::guidance::write_guidance(&tiny)).unwrap();
        let spec =
            AlgorithmSpec::new(AlgorithmName::VnrrtStar, None, Some(GuidanceSource::File(file)))
                .unwrap();
        let cfg = BenchConfig { trials: 2, ..BenchConfig::default() };
        let recs = run_benchmark(&small_maps(1), &[spec], &cfg).unwrap();
        assert_eq!(recs.len(), 2);
        assert!(recs.iter().all(|r| r.status == TrialStatus::Error && r.path_length.is_none()));
    }

    #[test]
    fn guidance_source_from_str() {
        assert_eq!("oracle-path".parse::<GuidanceSource>().unwrap(), GuidanceSource::OraclePath);
        assert_eq!("oracle-vertex".parse::<GuidanceSource>().unwrap(), GuidanceSource::OracleVertex);
        assert_eq!(
            "file:out/{map}.vgm".parse::<GuidanceSource>().unwrap(),
            GuidanceSource::File("out/{map}.vgm".into())
        );
        for bad in ["file:", "oracle", ""] {
            assert!(bad.parse::<GuidanceSource>().is_err());
        }
    }
}
