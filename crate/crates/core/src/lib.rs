//! Continuous sampling trajectories with a prescribed occupation density.
//!
//! Points drawn i.i.d. from `π ∝ π̃^{d/(d-1)}` and linked by a short
//! open travelling-salesman path give a curve whose arc-length occupation
//! measure approaches `π̃`. The crate covers each stage:
//!
//! - [`density`]: grid densities and the exponent maps between `π̃` and `π`;
//! - [`sampler`]: reproducible inverse-CDF point drawing;
//! - [`tsp`]: exact (Held-Karp) and heuristic (nearest neighbour + 2-opt) paths;
//! - [`trajectory`]: constant-speed parameterization, resampling and exact
//!   per-cell occupation;
//! - [`calibration`]: the path-length constant and the choice of the number
//!   of drawings;
//! - [`recon`]: a compressed-sensing harness scoring k-space sampling schemes.

pub mod calibration;
pub mod density;
pub mod error;
pub mod fourier;
pub mod partition;
pub mod recon;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod trajectory;
pub mod tsp;
pub mod wavelet;

pub use density::{DensityGrid, DensitySpec};
pub use error::{Error, Result};
pub use sampler::PointSet;
pub use trajectory::{EmpiricalDistribution, Trajectory};
pub use tsp::{HeuristicConfig, Method, Tour};
