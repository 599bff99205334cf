use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::json;
use thiserror::Error;
use vertexnet_core::bench::{
    read_trials_csv, run_benchmark, summarize, write_summary_csv, write_trials_csv,
    AlgorithmName, AlgorithmSpec, BenchConfig, BenchError, BenchMap, GuidanceSource,
    TerminationKind,
};
use vertexnet_core::dataset::{export_dataset, DatasetError, ExportJob, Split};
use vertexnet_core::gridmap::{
    generate_map, read_map, sample_start_goal_pairs, write_map, GridError, GridMap, MapGenConfig,
    ObstacleShape,
};
use vertexnet_core::guidance::{
    apply_mask, oracle_guidance, write_guidance, GuidanceError, GuidanceMode, MaskThreshold,
};
use vertexnet_core::oracle::{astar, extract_vertices, OracleError};
use vertexnet_core::planner::{plan, prepare_guidance, PlanError, PlannerConfig, Termination};
use vertexnet_core::seed::derive_seed;

use crate::{
    Algo, BenchArgs, Cli, Command, ExportArgs, ExtractArgs, GenMapsArgs, MakeGuidanceArgs,
    MapGenArgs, ModeArg, PlanArgs, PlannerArgs, SummarizeArgs, TerminationArg,
};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flag values or combinations; exit code 2.
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Grid(GridError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Guidance(GuidanceError),
    #[error(transparent)]
    Plan(PlanError),
    #[error(transparent)]
    Bench(BenchError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        match e {
            GridError::InvalidConfig(_) => Self::Usage(e.to_string()),
            e => Self::Grid(e),
        }
    }
}

impl From<GuidanceError> for CliError {
    fn from(e: GuidanceError) -> Self {
        match e {
            GuidanceError::InvalidThreshold(_) | GuidanceError::InvalidSigma(_) => {
                Self::Usage(e.to_string())
            }
            e => Self::Guidance(e),
        }
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::InvalidConfig(_) => Self::Usage(e.to_string()),
            e => Self::Plan(e),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::InvalidConfig(_) | BenchError::InvalidAlgorithm(_) => {
                Self::Usage(e.to_string())
            }
            e => Self::Bench(e),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: &Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::GenMaps(a) => gen_maps(a, cli.seed, out),
        Command::Plan(a) => plan_cmd(a, cli.seed, out),
        Command::Bench(a) => bench(a, cli.seed, out),
        Command::ExtractVertices(a) => extract(a, out),
        Command::MakeGuidance(a) => make_guidance(a, out),
        Command::ExportDataset(a) => export(a, cli.seed, out),
        Command::Summarize(a) => summarize_cmd(a, out),
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

fn require_out<'a>(out: Option<&'a Path>, what: &str) -> Result<&'a Path> {
    out.ok_or_else(|| CliError::Usage(format!("--out <{what}> is required")))
}

/// Writes to `out` when given, otherwise to stdout.
fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(io_err(path)),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|()| stdout.flush())
                .map_err(io_err(Path::new("<stdout>")))
        }
    }
}

fn emit_json(out: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    emit(out, &bytes)
}

fn load_map(path: &Path) -> Result<GridMap> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    read_map(&bytes).map_err(|e| CliError::Io {
        path: path.to_owned(),
        source: io::Error::new(io::ErrorKind::InvalidData, e),
    })
}

/// Every `.vmap` file in `dir`, sorted by name, with its file stem as the id.
fn load_map_dir(dir: &Path) -> Result<Vec<BenchMap>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .map(|e| e.map(|e| e.path()).map_err(io_err(dir)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.extension().is_some_and(|x| x == "vmap"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Io {
            path: dir.to_owned(),
            source: io::Error::new(io::ErrorKind::NotFound, "no .vmap files"),
        });
    }
    paths
        .iter()
        .map(|p| {
            Ok(BenchMap {
                id: p.file_stem().unwrap_or_default().to_string_lossy().into_owned(),
                map: load_map(p)?,
            })
        })
        .collect()
}

fn map_config(a: &MapGenArgs, seed: u64) -> Result<MapGenConfig> {
    let shape_set = if a.shapes.is_empty() {
        ObstacleShape::ALL.to_vec()
    } else {
        a.shapes
            .iter()
            .map(|s| {
                ObstacleShape::from_name(s)
                    .ok_or_else(|| CliError::Usage(format!("unknown shape {s:?}")))
            })
            .collect::<Result<_>>()?
    };
    let cfg = MapGenConfig {
        width: a.width,
        height: a.height,
        obstacle_count_range: (a.min_obstacles, a.max_obstacles),
        shape_set,
        obstacle_size_range: (a.min_size, a.max_size),
        seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn gen_maps(a: &GenMapsArgs, seed: u64, out: Option<&Path>) -> Result<()> {
    let dir = require_out(out, "dir")?;
    map_config(&a.map, seed)?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut listed = Vec::with_capacity(a.count);
    for i in 0..a.count {
        let cfg = map_config(&a.map, derive_seed(seed, &["gen-maps"], &[i as u64]))?;
        let map = generate_map(&cfg)?;
        let name = format!("map_{i:05}.vmap");
        let path = dir.join(&name);
        fs::write(&path, write_map(&map)).map_err(io_err(&path))?;
        listed.push(json!({ "file": name, "start": map.start(), "goal": map.goal() }));
    }
    emit_json(None, &json!({ "maps": listed }))
}

fn algorithm_name(a: Algo) -> AlgorithmName {
    match a {
        Algo::Rrt => AlgorithmName::RrtStar,
        Algo::Nrrt => AlgorithmName::NrrtStar,
        Algo::Vnrrt => AlgorithmName::VnrrtStar,
        Algo::MVnrrt => AlgorithmName::MVnrrtStar,
    }
}

fn parse_source(a: &PlannerArgs) -> Result<Option<GuidanceSource>> {
    a.guidance.as_deref().map(str::parse).transpose().map_err(CliError::from)
}

fn planner_template(a: &PlannerArgs) -> PlannerConfig {
    let d = PlannerConfig::default();
    PlannerConfig {
        steer_step: a.steer_step.unwrap_or(d.steer_step),
        goal_radius: a.goal_radius.unwrap_or(d.goal_radius),
        max_iterations: a.max_iterations.unwrap_or(d.max_iterations),
        rewire_gamma: a.rewire_gamma.unwrap_or(d.rewire_gamma),
        guided_mix: a.mix.unwrap_or(d.guided_mix),
        ..d
    }
}

fn plan_cmd(a: &PlanArgs, seed: u64, out: Option<&Path>) -> Result<()> {
    let map = load_map(&a.map)?;
    let tau = a.tau.map(MaskThreshold::new).transpose()?;
    let spec = AlgorithmSpec::new(algorithm_name(a.algo), tau, parse_source(&a.planner)?)?;
    let map_id = a.map.file_stem().unwrap_or_default().to_string_lossy();
    let guidance = spec
        .guidance_source()
        .map(|src| src.load(&map, &map_id, a.planner.sigma))
        .transpose()?
        .map(|g| prepare_guidance(&g, spec.tau()));

    let termination = match a.planner.termination {
        TerminationArg::Initial => Termination::Initial,
        TerminationArg::Optimal => Termination::Optimal {
            epsilon: a.planner.epsilon,
            reference_cost: astar(&map, map.start(), map.goal())?.cost,
        },
    };
    let mut config = PlannerConfig {
        termination,
        seed,
        ..planner_template(&a.planner)
    };
    if spec.name() == AlgorithmName::RrtStar {
        config.guided_mix = 0.0;
    }
    let mut result = plan(&map, &config, guidance.as_ref())?;
    if a.planner.no_timing {
        result = result.without_timing();
    }
    let mut bytes = serde_json::to_vec_pretty(&result)?;
    bytes.push(b'\n');
    emit(out, &bytes)
}

fn bench(a: &BenchArgs, seed: u64, out: Option<&Path>) -> Result<()> {
    let maps = load_map_dir(&a.maps)?;
    let source = parse_source(&a.planner)?;
    let mut algorithms = Vec::new();
    for &algo in &a.algo {
        let name = algorithm_name(algo);
        let src = (name != AlgorithmName::RrtStar).then(|| source.clone()).flatten();
        if name == AlgorithmName::MVnrrtStar {
            for &t in &a.tau {
                algorithms.push(AlgorithmSpec::new(name, Some(MaskThreshold::new(t)?), src.clone())?);
            }
        } else {
            algorithms.push(AlgorithmSpec::new(name, None, src)?);
        }
    }
    let cfg = BenchConfig {
        trials: a.trials,
        termination: match a.planner.termination {
            TerminationArg::Initial => TerminationKind::Initial,
            TerminationArg::Optimal => TerminationKind::Optimal {
                epsilon: a.planner.epsilon,
            },
        },
        base_seed: seed,
        planner: planner_template(&a.planner),
        sigma: a.planner.sigma,
        jobs: a.jobs,
        record_timing: !a.planner.no_timing,
    };
    let records = run_benchmark(&maps, &algorithms, &cfg)?;
    let mut buf = Vec::new();
    write_trials_csv(&records, &mut buf, cfg.record_timing)?;
    emit(out, &buf)?;
    if let Some(path) = &a.summary {
        let map_set = a
            .maps
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "maps".into());
        let mut buf = Vec::new();
        write_summary_csv(&summarize(&records, &map_set)?, &mut buf)?;
        fs::write(path, buf).map_err(io_err(path))?;
    }
    Ok(())
}

fn extract(a: &ExtractArgs, out: Option<&Path>) -> Result<()> {
    let map = load_map(&a.map)?;
    let path = astar(&map, map.start(), map.goal())?;
    let vertices = extract_vertices(&path);
    emit_json(
        out,
        &json!({
            "cost": path.cost,
            "path": path.cells,
            "vertices": vertices.vertices,
        }),
    )
}

fn make_guidance(a: &MakeGuidanceArgs, out: Option<&Path>) -> Result<()> {
    let dest = require_out(out, "file")?;
    let map = load_map(&a.map)?;
    let mode = match a.mode {
        ModeArg::Path => GuidanceMode::Path,
        ModeArg::Vertex => GuidanceMode::Vertex,
    };
    let mut g = oracle_guidance(&map, map.start(), map.goal(), mode, a.sigma)?;
    if let Some(t) = a.tau {
        g = apply_mask(&g, MaskThreshold::new(t)?)?;
    }
    fs::write(dest, write_guidance(&g)).map_err(io_err(dest))?;
    emit_json(
        None,
        &json!({ "width": g.width(), "height": g.height(), "support": g.support_size() }),
    )
}

fn export(a: &ExportArgs, seed: u64, out: Option<&Path>) -> Result<()> {
    let dir = require_out(out, "dir")?;
    let maps: Vec<GridMap> = match &a.maps {
        Some(src) => load_map_dir(src)?.into_iter().map(|m| m.map).collect(),
        None => {
            map_config(&a.map, seed)?;
            (0..a.count)
                .map(|i| {
                    let cfg = map_config(&a.map, derive_seed(seed, &["export-dataset", "map"], &[i as u64]))?;
                    Ok(generate_map(&cfg)?)
                })
                .collect::<Result<_>>()?
        }
    };
    let pairs = maps
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let s = derive_seed(seed, &["export-dataset", "pairs"], &[i as u64]);
            sample_start_goal_pairs(m, a.starts, a.goals, s)
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let job = ExportJob {
        maps: &maps,
        pairs: &pairs,
        seed,
        train_fraction: a.train_fraction,
    };
    let manifest = export_dataset(&job, dir).map_err(|e| match e {
        DatasetError::InvalidSplit(_) => CliError::Usage(e.to_string()),
        e => e.into(),
    })?;
    let train = manifest.instances.iter().filter(|i| i.split == Split::Train).count();
    emit_json(
        None,
        &json!({
            "instances": manifest.instances.len(),
            "train": train,
            "test": manifest.instances.len() - train,
        }),
    )
}

fn summarize_cmd(a: &SummarizeArgs, out: Option<&Path>) -> Result<()> {
    let file = fs::File::open(&a.input).map_err(io_err(&a.input))?;
    let records = read_trials_csv(io::BufReader::new(file))?;
    let rows = summarize(&records, &a.map_set)?;
    let mut buf = Vec::new();
    write_summary_csv(&rows, &mut buf)?;
    emit(out, &buf)
}
