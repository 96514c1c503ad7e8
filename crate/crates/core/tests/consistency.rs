//! Seeded end-to-end checks across modules.

use vds_core::calibration::{estimate_beta, expected_length};
use vds_core::density::{radial_polynomial_density, tsp_adjusted_density};
use vds_core::recon::{
    measure, run_experiment, scheme_mask, shepp_logan, wavelet_l1, zero_filled, ExperimentConfig, ReconConfig,
    SamplingMask, Scheme,
};
use vds_core::sampler::{draw_points, empirical_cell_histogram};
use vds_core::stats::tv_between;
use vds_core::trajectory::{empirical_distribution, parameterize, resample};
use vds_core::tsp::{solve_heuristic, HeuristicConfig};
use vds_core::wavelet::Dwt2;

#[test]
fn fine_resampling_matches_occupation() {
    let target = radial_polynomial_density(2, 32, 2.0, 0.05).unwrap();
    let ps = draw_points(&tsp_adjusted_density(&target).unwrap(), 500, 21);
    let traj = parameterize(&ps, &solve_heuristic(&ps, &HeuristicConfig::default())).unwrap();
    let samples = resample(&traj, traj.total_length() / 1e5).unwrap();
    let hist = empirical_cell_histogram(&samples, 4);
    let total: u64 = hist.iter().sum();
    let freq: Vec<f64> = hist.iter().map(|&c| c as f64 / total as f64).collect();
    let exact = empirical_distribution(&traj, 4).unwrap();
    assert!(tv_between(&freq, exact.masses()) < 0.01);
}

#[test]
fn measured_length_follows_the_length_law() {
    let beta = estimate_beta(2, 10_000, 10, 5).unwrap().beta;
    let g = radial_polynomial_density(2, 64, 2.0, 0.05).unwrap();
    let ps = draw_points(&g, 10_000, 6);
    let measured = solve_heuristic(&ps, &HeuristicConfig::default()).length;
    let predicted = expected_length(10_000, &g, beta);
    assert!((measured / predicted - 1.0).abs() < 0.15, "{measured} vs {predicted}");
}

#[test]
fn path_masks_are_eight_connected() {
    let side = 64;
    let g = radial_polynomial_density(2, side, 1.0, 0.05).unwrap();
    let ps = draw_points(&g, 300, 3);
    let traj = parameterize(&ps, &solve_heuristic(&ps, &HeuristicConfig::default())).unwrap();
    let samples = resample(&traj, 1.0 / side as f64).unwrap();
    let bin = |x: f64| ((x * side as f64).floor() as i64).min(side as i64 - 1);
    for w in 0..samples.len() - 1 {
        let (a, b) = (samples.point(w), samples.point(w + 1));
        assert!((bin(a[0]) - bin(b[0])).abs() <= 1 && (bin(a[1]) - bin(b[1])).abs() <= 1, "step {w}");
    }
}

#[test]
fn masks_hit_the_requested_count() {
    let config = ExperimentConfig { side: 32, ..Default::default() };
    let g = radial_polynomial_density(2, 32, 1.0, 0.05).unwrap();
    let target = (32.0 * 32.0 / config.acceleration).round();
    for scheme in Scheme::ALL {
        for seed in 0..3 {
            let (mask, _) = scheme_mask(scheme, &g, &config, seed).unwrap();
            let got = mask.sampled_count() as f64;
            assert!((got - target).abs() <= 0.02 * target, "{scheme} seed {seed}: {got}");
        }
    }
    let (iid, _) = scheme_mask(Scheme::IidTarget, &g, &config, 0).unwrap();
    assert_eq!(iid.sampled_count() as f64, target);
}

#[test]
fn reconstruction_lowers_the_wavelet_l1_norm() {
    let config = ExperimentConfig { side: 32, seeds: vec![0, 1], ..Default::default() };
    let phantom = shepp_logan(32).unwrap();
    let levels = Dwt2::default_levels(32);
    for run in run_experiment(&config).unwrap() {
        let y = measure(&phantom, &run.mask).unwrap();
        let start = wavelet_l1(&zero_filled(&y, &run.mask).unwrap(), config.recon.wavelet, levels).unwrap();
        let end = wavelet_l1(&run.image, config.recon.wavelet, levels).unwrap();
        assert!(end <= start + 1e-9, "{} seed {}: {end} > {start}", run.scheme, run.seed);
        assert!(run.data_residual < 1e-9);
    }
}

#[test]
fn experiment_rows_are_sorted_and_reproducible() {
    let config = ExperimentConfig {
        side: 32,
        seeds: vec![3, 1],
        recon: ReconConfig { iterations: 20, ..Default::default() },
        ..Default::default()
    };
    let a = run_experiment(&config).unwrap();
    let b = run_experiment(&config).unwrap();
    let rows: Vec<String> = a.iter().map(|r| r.csv_row()).collect();
    assert_eq!(rows, b.iter().map(|r| r.csv_row()).collect::<Vec<_>>());
    let keys: Vec<(Scheme, u64)> = a.iter().map(|r| (r.scheme, r.seed)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(SamplingMask::full(16).acceleration(), 1.0);
}
