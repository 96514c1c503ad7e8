//! Draw, link and resample: the whole sampling pipeline in one command.

use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use vds_core::calibration::{self, choose_n, estimate_beta};
use vds_core::density::tsp_adjusted_density;
use vds_core::rng::{derive_seed, stream};
use vds_core::sampler::draw_points;
use vds_core::trajectory::{empirical_distribution, parameterize, resample, tv_distance};
use vds_core::tsp::{solve_heuristic, HeuristicConfig};

use crate::failure::{stage, Failure};
use crate::{create_dir, load_density, read_beta, write};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Target density spec (builtin or file).
    pub density: String,
    pub dim: usize,
    pub resolution: usize,
    pub target_samples: usize,
    pub delta_t: f64,
    /// Cells per axis of the partition used for the TV report.
    pub partition: usize,
    pub seed: u64,
    /// Path-length constant; estimated when absent.
    pub beta: Option<f64>,
    pub calibration_n_per_trial: usize,
    pub calibration_trials: usize,
    pub tsp: HeuristicConfig,
    pub out_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            density: "radial:2:0.05".into(),
            dim: 2,
            resolution: 64,
            target_samples: 1000,
            delta_t: 1e-3,
            partition: 4,
            seed: 0,
            beta: None,
            calibration_n_per_trial: calibration::DEFAULT_N_PER_TRIAL,
            calibration_trials: calibration::DEFAULT_TRIALS,
            tsp: HeuristicConfig::default(),
            out_dir: None,
        }
    }
}

#[derive(Args, Debug)]
pub struct PipelineArgs {
    /// JSON file with any subset of the pipeline settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `uniform`, `radial:<decay>:<plateau_radius>` or a density file.
    #[arg(long)]
    density: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    resolution: Option<usize>,
    /// Requested number of resampled points.
    #[arg(long)]
    target_samples: Option<usize>,
    #[arg(long)]
    delta_t: Option<f64>,
    #[arg(long)]
    partition: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Path-length constant as a number or a file written by `calibrate`.
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Key results, written to `summary.json`.
#[derive(Debug, Serialize)]
struct Summary {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "T")]
    length: f64,
    #[serde(rename = "N_s")]
    samples: usize,
    tv: f64,
    beta: f64,
    target_samples: usize,
    delta_t: f64,
    partition: usize,
    seed: u64,
}

fn resolve(args: PipelineArgs) -> Result<(PipelineConfig, PathBuf), Failure> {
    let mut c = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => PipelineConfig::default(),
    };
    c.density = args.density.unwrap_or(c.density);
    c.dim = args.dim.unwrap_or(c.dim);
    c.resolution = args.resolution.unwrap_or(c.resolution);
    c.target_samples = args.target_samples.unwrap_or(c.target_samples);
    c.delta_t = args.delta_t.unwrap_or(c.delta_t);
    c.partition = args.partition.unwrap_or(c.partition);
    c.seed = args.seed.unwrap_or(c.seed);
    if let Some(b) = args.beta {
        c.beta = Some(match b.parse::<f64>() {
            Ok(v) => v,
            Err(_) => read_beta(b.as_ref())?.beta,
        });
    }
    if args.out_dir.is_some() {
        c.out_dir = args.out_dir;
    }
    let out = c.out_dir.clone().ok_or_else(|| Failure::Usage("an output directory is required (--out-dir)".into()))?;
    if !(c.delta_t > 0.0 && c.delta_t.is_finite()) {
        return Err(Failure::Usage(format!("delta_t must be positive, got {}", c.delta_t)));
    }
    if c.partition == 0 {
        return Err(Failure::Usage("partition must be at least 1".into()));
    }
    Ok((c, out))
}

pub fn run(args: PipelineArgs) -> Result<(), Failure> {
    let (c, out) = resolve(args)?;
    let target = load_density(&c.density, c.dim, c.resolution)?;
    let drawing = tsp_adjusted_density(&target).map_err(stage("adjust"))?;
    let beta = match c.beta {
        Some(b) => b,
        None => {
            estimate_beta(
                target.dim(),
                c.calibration_n_per_trial,
                c.calibration_trials,
                derive_seed(c.seed, stream::CALIBRATION),
            )
            .map_err(stage("calibrate"))?
            .beta
        }
    };
    let n = choose_n(c.target_samples, c.delta_t, &drawing, beta).map_err(stage("choose-n"))?;
    let points = draw_points(&drawing, n, derive_seed(c.seed, stream::DRAW));
    let tour = solve_heuristic(&points, &HeuristicConfig { seed: derive_seed(c.seed, stream::TSP), ..c.tsp });
    let traj = parameterize(&points, &tour).map_err(stage("parameterize"))?;
    let samples = resample(&traj, c.delta_t).map_err(stage("resample"))?;
    let emp = empirical_distribution(&traj, c.partition).map_err(stage("measure"))?;
    let coarse = target.aggregate(c.partition).map_err(stage("measure"))?;
    let tv = tv_distance(&emp, &coarse).map_err(stage("measure"))?;

    create_dir(&out)?;
    write(&out.join("target_density.txt"), &target.to_text())?;
    write(&out.join("drawing_density.txt"), &drawing.to_text())?;
    write(&out.join("points.csv"), &points.to_csv())?;
    write(&out.join("tour.csv"), &tour.to_csv())?;
    write(&out.join("trajectory.csv"), &traj.to_csv())?;
    write(&out.join("samples.csv"), &samples.to_csv())?;
    write(&out.join("empirical.txt"), &emp.to_text().map_err(stage("measure"))?)?;
    let summary = Summary {
        n,
        length: traj.total_length(),
        samples: samples.len(),
        tv,
        beta,
        target_samples: c.target_samples,
        delta_t: c.delta_t,
        partition: c.partition,
        seed: c.seed,
    };
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write(&out.join("summary.json"), &format!("{text}\n"))?;
    println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
    Ok(())
}
