//! `vds`: command-line front end.
//!
//! Exit codes: 0 on success, 2 for usage or input parse errors, 3 when a
//! processing stage fails. Failures print a JSON object on stderr.
//!
//! Randomness comes from a single `--seed`. Stage seeds are derived with
//! `vds_core::rng::derive_seed(seed, stream)` where the stream index is 1 for
//! calibration, 2 for drawing points and 3 for the 2-opt scan order.

mod experiment;
mod failure;
mod pipeline;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use vds_core::calibration::{self, BetaEstimate};
use vds_core::density::{tsp_adjusted_density, DensitySpec};
use vds_core::rng::{derive_seed, stream};
use vds_core::sampler::draw_points;
use vds_core::trajectory::{empirical_distribution, parameterize, resample, tv_distance};
use vds_core::tsp::{solve_exact, solve_heuristic, HeuristicConfig, Method, Tour};
use vds_core::{DensityGrid, PointSet};

use failure::{stage, usage, Failure};

#[derive(Parser, Debug)]
#[command(name = "vds", version, about = "Continuous variable-density sampling curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a normalized density grid and write it to a file.
    Density(DensityArgs),
    /// Draw i.i.d. points from a density.
    Sample(SampleArgs),
    /// Order a point set along a short open path.
    Tsp(TspArgs),
    /// Parameterize a path, resample it and measure its occupation.
    Trajectory(TrajectoryArgs),
    /// Estimate the path-length constant from uniform drawings.
    Calibrate(CalibrateArgs),
    /// Number of drawings needed for a target sample count.
    ChooseN(ChooseNArgs),
    /// Run the full sampling pipeline.
    Pipeline(pipeline::PipelineArgs),
    /// Compare k-space sampling schemes by reconstruction SNR.
    Experiment(experiment::ExperimentArgs),
}

#[derive(Args, Debug, Clone)]
pub(crate) struct GridArgs {
    /// `uniform`, `radial:<decay>:<plateau_radius>` or a density file.
    #[arg(long)]
    density: String,
    /// Dimension for builtin densities.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Cells per axis for builtin densities.
    #[arg(long, default_value_t = 64)]
    resolution: usize,
}

impl GridArgs {
    fn load(&self) -> Result<DensityGrid, Failure> {
        load_density(&self.density, self.dim, self.resolution)
    }
}

pub(crate) fn load_density(spec: &str, dim: usize, resolution: usize) -> Result<DensityGrid, Failure> {
    DensitySpec::parse(spec).and_then(|s| s.build(dim, resolution)).map_err(usage)
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Number of points.
    #[arg(short, long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Draw from the exponent-adjusted density instead of the given one.
    #[arg(long)]
    adjusted: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TspArgs {
    #[arg(long)]
    points: PathBuf,
    #[arg(long, default_value_t = Method::Heuristic)]
    method: Method,
    #[arg(long, default_value_t = HeuristicConfig::default().neighbor_list_size)]
    neighbors: usize,
    #[arg(long, default_value_t = HeuristicConfig::default().two_opt_max_passes)]
    passes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrajectoryArgs {
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    tour: PathBuf,
    /// Arc-length step between resampled points.
    #[arg(long)]
    delta_t: f64,
    /// Cells per axis of the occupation partition.
    #[arg(long, default_value_t = 4)]
    partition: usize,
    /// Target density to report the TV distance against.
    #[arg(long)]
    density: Option<String>,
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct CalibrateArgs {
    #[arg(long, default_value_t = calibration::DEFAULT_DIM)]
    dim: usize,
    #[arg(long, default_value_t = calibration::DEFAULT_N_PER_TRIAL)]
    n_per_trial: usize,
    #[arg(long, default_value_t = calibration::DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ChooseNArgs {
    /// Target density; points are drawn from its exponent-adjusted version.
    #[command(flatten)]
    grid: GridArgs,
    /// Calibration file written by `calibrate`.
    #[arg(long)]
    beta: PathBuf,
    /// Requested number of resampled points.
    #[arg(long)]
    target: usize,
    #[arg(long)]
    delta_t: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return Failure::Usage(e.to_string()).report(),
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Density(a) => {
            let g = a.grid.load()?;
            let kind = DensitySpec::parse(&a.grid.density).map_err(usage)?;
            write(&a.out, &g.to_text()).map(|_| println!("{}", json!({"density": kind.to_string(), "out": a.out})))
        }
        Command::Sample(a) => {
            let g = a.grid.load()?;
            let g = if a.adjusted { tsp_adjusted_density(&g).map_err(stage("adjust"))? } else { g };
            let ps = draw_points(&g, a.n, derive_seed(a.seed, stream::DRAW));
            ps.write_csv(&a.out).map_err(stage("write"))
        }
        Command::Tsp(a) => {
            let ps = read_points(&a.points)?;
            let tour = match a.method {
                Method::Exact => solve_exact(&ps).map_err(stage("solve"))?,
                Method::Heuristic => {
                    let config = HeuristicConfig {
                        neighbor_list_size: a.neighbors,
                        two_opt_max_passes: a.passes,
                        seed: derive_seed(a.seed, stream::TSP),
                    };
                    solve_heuristic(&ps, &config)
                }
            };
            tour.write_csv(&a.out).map_err(stage("write"))?;
            println!("{}", json!({"method": tour.method, "length": tour.length, "n": ps.len()}));
            Ok(())
        }
        Command::Trajectory(a) => {
            let ps = read_points(&a.points)?;
            let tour = Tour::read_csv(&a.tour).map_err(usage)?;
            let target = a.density.as_deref().map(|d| load_density(d, ps.dim(), a.resolution)).transpose()?;
            let traj = parameterize(&ps, &tour).map_err(stage("parameterize"))?;
            let samples = resample(&traj, a.delta_t).map_err(stage("resample"))?;
            let emp = empirical_distribution(&traj, a.partition).map_err(stage("measure"))?;
            let tv = match &target {
                Some(g) => {
                    let coarse = g.aggregate(a.partition).map_err(stage("measure"))?;
                    Some(tv_distance(&emp, &coarse).map_err(stage("measure"))?)
                }
                None => None,
            };
            create_dir(&a.out_dir)?;
            traj.write_csv(&a.out_dir.join("trajectory.csv")).map_err(stage("write"))?;
            samples.write_csv(&a.out_dir.join("samples.csv")).map_err(stage("write"))?;
            write(&a.out_dir.join("empirical.txt"), &emp.to_text().map_err(stage("write"))?)?;
            println!("{}", json!({"T": traj.total_length(), "N_s": samples.len(), "tv": tv}));
            Ok(())
        }
        Command::Calibrate(a) => {
            let est =
                calibration::estimate_beta(a.dim, a.n_per_trial, a.trials, derive_seed(a.seed, stream::CALIBRATION))
                    .map_err(stage("calibrate"))?;
            match &a.out {
                Some(path) => write(path, &est.to_json()),
                None => {
                    println!("{}", est.to_json());
                    Ok(())
                }
            }
        }
        Command::ChooseN(a) => {
            let est = read_beta(&a.beta)?;
            let g = a.grid.load()?;
            if est.dim != g.dim() {
                return Err(usage(vds_core::Error::DimensionMismatch { expected: g.dim(), got: est.dim }));
            }
            let drawing = tsp_adjusted_density(&g).map_err(stage("adjust"))?;
            let n = calibration::choose_n(a.target, a.delta_t, &drawing, est.beta).map_err(stage("choose-n"))?;
            println!(
                "{}",
                json!({"n": n, "expected_length": calibration::expected_length(n, &drawing, est.beta), "beta": est.beta})
            );
            Ok(())
        }
        Command::Pipeline(a) => pipeline::run(a),
        Command::Experiment(a) => experiment::run(a),
    }
}

pub(crate) fn read_points(path: &Path) -> Result<PointSet, Failure> {
    PointSet::read_csv(path).map_err(usage)
}

pub(crate) fn read_beta(path: &Path) -> Result<BetaEstimate, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(e.into()))?;
    BetaEstimate::from_json(&text).map_err(usage)
}

pub(crate) fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Stage { stage: "write", error: e.into() })
}

pub(crate) fn create_dir(path: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(path).map_err(|e| Failure::Stage { stage: "write", error: e.into() })
}
