//! Unitary 2D discrete Fourier transform on square row-major arrays.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward and inverse plans for one side length.
pub struct Fft2 {
    side: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(side: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 { side, forward: planner.plan_fft_forward(side), inverse: planner.plan_fft_inverse(side) }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// In-place unitary forward transform (`1/n` scaling for an `n × n` array).
    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, &*self.forward);
    }

    /// In-place unitary inverse transform.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, &*self.inverse);
    }

    fn apply(&self, data: &mut [Complex64], plan: &dyn Fft<f64>) {
        let n = self.side;
        assert_eq!(data.len(), n * n, "array is not {n}x{n}");
        plan.process(data);
        let mut column = vec![Complex64::default(); n];
        for c in 0..n {
            for r in 0..n {
                column[r] = data[r * n + c];
            }
            plan.process(&mut column);
            for r in 0..n {
                data[r * n + c] = column[r];
            }
        }
        let scale = 1.0 / n as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}
