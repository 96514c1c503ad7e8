//! k-space sampling scheme comparison with file output.

use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use vds_core::recon::{report_csv, run_experiment, shepp_logan, ExperimentConfig, Scheme};
use vds_core::stats::median;
use vds_core::wavelet::Wavelet;

use crate::failure::{stage, Failure};
use crate::{create_dir, write};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
struct ExperimentFile {
    #[serde(flatten)]
    experiment: ExperimentConfig,
    out_dir: Option<PathBuf>,
    /// Also write masks and reconstructed images.
    images: bool,
}

impl Default for ExperimentFile {
    fn default() -> Self {
        ExperimentFile { experiment: ExperimentConfig::default(), out_dir: None, images: true }
    }
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// JSON file with any subset of the experiment settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Target density: `uniform`, `radial:<decay>:<plateau_radius>` or a file.
    #[arg(long)]
    density: Option<String>,
    /// Image side (power of two, at least 8).
    #[arg(long)]
    side: Option<usize>,
    /// Acceleration factor r.
    #[arg(long)]
    acceleration: Option<f64>,
    /// Comma-separated subset of iid-target, tsp-target, tsp-adjusted.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<Scheme>>,
    /// First seed; runs use `seed, seed + 1, …`.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of seeds.
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    wavelet: Option<Wavelet>,
    /// Skip writing masks and images.
    #[arg(long)]
    no_images: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct SchemeSummary {
    scheme: Scheme,
    runs: usize,
    median_snr_db: f64,
    median_sampled_count: f64,
}

fn resolve(args: ExperimentArgs) -> Result<(ExperimentFile, PathBuf), Failure> {
    let mut f = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => ExperimentFile::default(),
    };
    let c = &mut f.experiment;
    if let Some(d) = args.density {
        c.density = d;
    }
    c.side = args.side.unwrap_or(c.side);
    c.acceleration = args.acceleration.unwrap_or(c.acceleration);
    if let Some(s) = args.schemes {
        c.schemes = s;
    }
    if args.seed.is_some() || args.runs.is_some() {
        let first = args.seed.unwrap_or_else(|| c.seeds.first().copied().unwrap_or(0));
        let runs = args.runs.unwrap_or(c.seeds.len() as u64);
        c.seeds = (first..first + runs).collect();
    }
    c.recon.iterations = args.iterations.unwrap_or(c.recon.iterations);
    c.recon.wavelet = args.wavelet.unwrap_or(c.recon.wavelet);
    if args.no_images {
        f.images = false;
    }
    if args.out_dir.is_some() {
        f.out_dir = args.out_dir;
    }
    let out = f.out_dir.clone().ok_or_else(|| Failure::Usage("an output directory is required (--out-dir)".into()))?;
    if f.experiment.seeds.is_empty() || f.experiment.schemes.is_empty() {
        return Err(Failure::Usage("at least one scheme and one seed are required".into()));
    }
    Ok((f, out))
}

pub fn run(args: ExperimentArgs) -> Result<(), Failure> {
    let (f, out) = resolve(args)?;
    let c = &f.experiment;
    let runs = run_experiment(c).map_err(stage("experiment"))?;
    create_dir(&out)?;
    write(&out.join("report.csv"), &report_csv(&runs))?;
    let mut summary = Vec::new();
    for scheme in Scheme::ALL {
        let rows: Vec<_> = runs.iter().filter(|r| r.scheme == scheme).collect();
        if rows.is_empty() {
            continue;
        }
        summary.push(SchemeSummary {
            scheme,
            runs: rows.len(),
            median_snr_db: median(&rows.iter().map(|r| r.snr_db).collect::<Vec<_>>()),
            median_sampled_count: median(&rows.iter().map(|r| r.mask.sampled_count() as f64).collect::<Vec<_>>()),
        });
    }
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write(&out.join("summary.json"), &format!("{text}\n"))?;
    if f.images {
        let phantom = shepp_logan(c.side).map_err(stage("phantom"))?;
        phantom.write_files(&out, "phantom").map_err(stage("write"))?;
        for r in &runs {
            let stem = format!("{}_seed{}", r.scheme, r.seed);
            write(&out.join(format!("mask_{stem}.pbm")), &r.mask.to_pbm())?;
            r.image.write_files(&out, &format!("recon_{stem}")).map_err(stage("write"))?;
        }
    }
    println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
    Ok(())
}
