//! Path-length law `L(N) = N^{(d-1)/d} · β(d) · ∫ p^{(d-1)/d}` and its
//! inversion for choosing how many points to draw.
//!
//! `β(d)` is estimated with the heuristic solver, so estimates carry the
//! heuristic's optimality gap (a few percent upward). That bias is left in:
//! it is consistent between calibration and use.
//!
//! The number of drawings is chosen so that resampling the resulting curve
//! at step `Δt` gives at least the requested number of samples. Read
//! literally, the closed form `N = ⌊Δt · L⁻¹(Ñ)⌋` mixes units (`L⁻¹` already
//! maps a length to a count); [`choose_n`] instead inverts
//! `⌊L(N)/Δt⌋ + 1 ≥ Ñ` directly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::DensityGrid;
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::sampler::draw_points;
use crate::stats;
use crate::tsp::{solve_heuristic, HeuristicConfig};

/// Mean and standard error of `T / N^{(d-1)/d}` over uniform trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaEstimate {
    pub dim: usize,
    pub beta: f64,
    pub std_error: f64,
    pub trials: usize,
    pub n_per_trial: usize,
    pub seed: u64,
}

pub const DEFAULT_DIM: usize = 2;
pub const DEFAULT_N_PER_TRIAL: usize = 10_000;
pub const DEFAULT_TRIALS: usize = 20;

/// Runs `trials` uniform drawings of `n_per_trial` points and solves each
/// with the heuristic. Trial `t` draws with `derive_seed(seed, 2t)` and
/// scans 2-opt with `derive_seed(seed, 2t + 1)`.
pub fn estimate_beta(dim: usize, n_per_trial: usize, trials: usize, seed: u64) -> Result<BetaEstimate> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    if n_per_trial < 100 {
        return Err(Error::Config(format!("n_per_trial must be at least 100, got {n_per_trial}")));
    }
    if trials < 2 {
        return Err(Error::Config(format!("trials must be at least 2, got {trials}")));
    }
    let uniform = DensityGrid::uniform(dim, 1)?;
    let scale = (n_per_trial as f64).powf((dim as f64 - 1.0) / dim as f64);
    let ratios: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let ps = draw_points(&uniform, n_per_trial, derive_seed(seed, 2 * t));
            let config = HeuristicConfig { seed: derive_seed(seed, 2 * t + 1), ..Default::default() };
            solve_heuristic(&ps, &config).length / scale
        })
        .collect();
    Ok(BetaEstimate {
        dim,
        beta: stats::mean(&ratios),
        std_error: stats::std_error(&ratios),
        trials,
        n_per_trial,
        seed,
    })
}

/// `∫ g^{(d-1)/d}` as a cell sum.
pub fn density_integral(g: &DensityGrid) -> f64 {
    let p = (g.dim() as f64 - 1.0) / g.dim() as f64;
    g.values().iter().map(|v| if *v == 0.0 { 0.0 } else { v.powf(p) }).sum::<f64>() * g.cell_volume()
}

/// Predicted path length through `n` points drawn from `g`.
pub fn expected_length(n: usize, g: &DensityGrid, beta: f64) -> f64 {
    let d = g.dim() as f64;
    (n as f64).powf((d - 1.0) / d) * beta * density_integral(g)
}

/// Predicted number of resampled points at step `delta_t`.
fn predicted_samples(n: usize, g: &DensityGrid, beta: f64, delta_t: f64) -> f64 {
    (expected_length(n, g, beta) / delta_t).floor() + 1.0
}

/// Smallest `N` whose predicted resampled count `⌊L(N)/Δt⌋ + 1` reaches
/// `target_samples`.
pub fn choose_n(target_samples: usize, delta_t: f64, g: &DensityGrid, beta: f64) -> Result<usize> {
    if target_samples == 0 {
        return Err(Error::UnreachableTarget);
    }
    if !delta_t.is_finite() || delta_t <= 0.0 {
        return Err(Error::InvalidStep(delta_t));
    }
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::Config(format!("beta must be positive, got {beta}")));
    }
    let d = g.dim() as f64;
    let want = target_samples as f64;
    let closed = (want * delta_t / (beta * density_integral(g))).powf(d / (d - 1.0)).ceil();
    let mut n = (closed as usize).max(1);
    while n > 1 && predicted_samples(n - 1, g, beta, delta_t) >= want {
        n -= 1;
    }
    while predicted_samples(n, g, beta, delta_t) < want {
        n += 1;
    }
    Ok(n)
}

impl BetaEstimate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }

    pub fn from_json(text: &str) -> Result<BetaEstimate> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::radial_polynomial_density;

    #[test]
    fn expected_length_uniform_is_beta_sqrt_n() {
        let g = DensityGrid::uniform(2, 8).unwrap();
        assert!((expected_length(400, &g, 0.7) - 14.0).abs() < 1e-12);
    }

    #[test]
    fn expected_length_scaling_law() {
        for d in [2usize, 3] {
            let g = radial_polynomial_density(d, 6, 2.0, 0.1).unwrap();
            let ratio = expected_length(4000, &g, 0.7) / expected_length(1000, &g, 0.7);
            assert!((ratio - 4f64.powf((d as f64 - 1.0) / d as f64)).abs() < 1e-12);
            let mut prev = 0.0;
            for n in 1..200 {
                let l = expected_length(n, &g, 0.7);
                assert!(l > prev);
                prev = l;
            }
        }
    }

    #[test]
    fn choose_n_closed_form_uniform() {
        let g = DensityGrid::uniform(2, 4).unwrap();
        let (b, s) = (0.75, 1e-3);
        for target in [500usize, 5_000, 50_000] {
            let n = choose_n(target, s, &g, b).unwrap();
            let approx = (target as f64 * s / b).powi(2);
            assert!((n as f64 - approx).abs() <= 0.01 * approx + 2.0, "{n} vs {approx}");
            assert!(predicted_samples(n, &g, b, s) >= target as f64);
            if n > 1 {
                assert!(predicted_samples(n - 1, &g, b, s) < target as f64);
            }
        }
    }

    #[test]
    fn choose_n_monotone_and_errors() {
        let g = radial_polynomial_density(2, 32, 2.0, 0.05).unwrap();
        let mut prev = 0;
        for target in (1..3000).step_by(37) {
            let n = choose_n(target, 2e-3, &g, 0.76).unwrap();
            assert!(n >= prev);
            prev = n;
        }
        assert_eq!(choose_n(0, 1e-3, &g, 0.7), Err(Error::UnreachableTarget));
        assert_eq!(choose_n(1, 1e-3, &g, 0.7), Ok(1));
        assert!(choose_n(10, 0.0, &g, 0.7).is_err());
    }

    #[test]
    fn estimate_is_deterministic_and_validated() {
        let a = estimate_beta(2, 500, 3, 42).unwrap();
        let b = estimate_beta(2, 500, 3, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.beta > 0.0 && a.std_error >= 0.0);
        assert!(estimate_beta(2, 99, 3, 1).is_err());
        assert!(estimate_beta(2, 100, 1, 1).is_err());
        let back = BetaEstimate::from_json(&a.to_json()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn dimension_dependence() {
        let b2 = estimate_beta(2, 10_000, 4, 3).unwrap();
        let b3 = estimate_beta(3, 10_000, 4, 3).unwrap();
        assert!(b2.beta.is_finite() && b3.beta.is_finite());
        assert!((b2.beta - b3.beta).abs() > 5.0 * (b2.std_error + b3.std_error));
    }
}
