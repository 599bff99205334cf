use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

use commands::CliError;

/// Vertex-guided RRT* toolkit.
#[derive(Debug, Parser)]
#[command(name = "vertexnet", version)]
pub struct Cli {
    /// Base seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output file or directory, depending on the subcommand. Defaults to stdout for
    /// single-file outputs.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate random obstacle maps as VMAP1 files.
    GenMaps(GenMapsArgs),
    /// Plan on one map and print the result as JSON.
    Plan(PlanArgs),
    /// Run a multi-trial benchmark and write the raw trial CSV.
    Bench(BenchArgs),
    /// Print the A* path and its vertices as JSON.
    ExtractVertices(ExtractArgs),
    /// Build an oracle guidance raster (VGM1).
    MakeGuidance(MakeGuidanceArgs),
    /// Generate maps and write ground-truth training targets plus a manifest.
    ExportDataset(ExportArgs),
    /// Aggregate a trial CSV into the summary CSV.
    Summarize(SummarizeArgs),
}

#[derive(Debug, Args)]
pub struct MapGenArgs {
    #[arg(long, default_value_t = 200)]
    pub width: usize,
    #[arg(long, default_value_t = 200)]
    pub height: usize,
    #[arg(long, default_value_t = 4)]
    pub min_obstacles: usize,
    #[arg(long, default_value_t = 12)]
    pub max_obstacles: usize,
    #[arg(long, default_value_t = 12.0)]
    pub min_size: f64,
    #[arg(long, default_value_t = 48.0)]
    pub max_size: f64,
    /// Comma-separated subset of triangle,circle,square,bar,u_shape.
    #[arg(long, value_delimiter = ',')]
    pub shapes: Vec<String>,
}

#[derive(Debug, Args)]
pub struct GenMapsArgs {
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[command(flatten)]
    pub map: MapGenArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Rrt,
    Nrrt,
    Vnrrt,
    MVnrrt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TerminationArg {
    Initial,
    Optimal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Path,
    Vertex,
}

#[derive(Debug, Args)]
pub struct PlannerArgs {
    #[arg(long, value_enum, default_value = "initial")]
    pub termination: TerminationArg,
    /// Slack for `--termination optimal`, relative to the A* cost.
    #[arg(long, default_value_t = vertexnet_core::planner::DEFAULT_OPTIMAL_EPSILON)]
    pub epsilon: f64,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub steer_step: Option<f64>,
    #[arg(long)]
    pub goal_radius: Option<f64>,
    #[arg(long)]
    pub rewire_gamma: Option<f64>,
    /// Probability of drawing from the guidance raster.
    #[arg(long)]
    pub mix: Option<f64>,
    /// Kernel spread for oracle guidance.
    #[arg(long, default_value_t = vertexnet_core::guidance::DEFAULT_SIGMA)]
    pub sigma: f64,
    /// oracle-path, oracle-vertex or file:<path>.
    #[arg(long)]
    pub guidance: Option<String>,
    /// Suppress wall-clock fields.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, value_enum, default_value = "vnrrt")]
    pub algo: Algo,
    /// Masking threshold; required for m-vnrrt.
    #[arg(long)]
    pub tau: Option<f64>,
    #[command(flatten)]
    pub planner: PlannerArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of .vmap files; each file stem is the map id.
    #[arg(long)]
    pub maps: PathBuf,
    /// Algorithms to run (comma-separated).
    #[arg(long, value_enum, value_delimiter = ',', default_value = "rrt,nrrt,vnrrt,m-vnrrt")]
    pub algo: Vec<Algo>,
    /// Masking thresholds for m-vnrrt (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.9,0.99")]
    pub tau: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Also write the summary CSV here.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub planner: PlannerArgs,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub map: PathBuf,
}

#[derive(Debug, Args)]
pub struct MakeGuidanceArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, value_enum, default_value = "vertex")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = vertexnet_core::guidance::DEFAULT_SIGMA)]
    pub sigma: f64,
    /// Apply this mask before writing.
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Read maps from this directory instead of generating them.
    #[arg(long)]
    pub maps: Option<PathBuf>,
    /// Number of maps to generate when `--maps` is absent.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 2)]
    pub starts: usize,
    #[arg(long, default_value_t = 2)]
    pub goals: usize,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    #[command(flatten)]
    pub map: MapGenArgs,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    /// Raw trial CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "random")]
    pub map_set: String,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                CliError::Usage(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
