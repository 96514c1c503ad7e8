//! Orthonormal periodic wavelet transforms (Haar, Daubechies-4) on square
//! power-of-two images, Mallat layout.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wavelet {
    Haar,
    #[serde(alias = "db4", alias = "daubechies-4")]
    Daubechies4,
}

impl Wavelet {
    fn lowpass(self) -> Vec<f64> {
        match self {
            Wavelet::Haar => vec![1.0 / SQRT_2, 1.0 / SQRT_2],
            Wavelet::Daubechies4 => {
                let s3 = 3f64.sqrt();
                let k = 4.0 * SQRT_2;
                vec![(1.0 + s3) / k, (3.0 + s3) / k, (3.0 - s3) / k, (1.0 - s3) / k]
            }
        }
    }
}

impl std::str::FromStr for Wavelet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haar" => Ok(Wavelet::Haar),
            "db4" | "daubechies4" | "daubechies-4" => Ok(Wavelet::Daubechies4),
            _ => Err(Error::Parse(format!("unknown wavelet {s:?}"))),
        }
    }
}

/// A multi-level 2D transform for one image side.
#[derive(Debug, Clone)]
pub struct Dwt2 {
    side: usize,
    levels: usize,
    low: Vec<f64>,
    high: Vec<f64>,
}

impl Dwt2 {
    pub fn new(wavelet: Wavelet, side: usize, levels: usize) -> Result<Self> {
        if !side.is_power_of_two() || side < 2 {
            return Err(Error::Config(format!("wavelet side {side} must be a power of two")));
        }
        let max_levels = side.trailing_zeros() as usize;
        if levels == 0 || levels > max_levels {
            return Err(Error::Config(format!("levels must lie in 1..={max_levels} for side {side}, got {levels}")));
        }
        let low = wavelet.lowpass();
        let len = low.len();
        let high = (0..len).map(|k| if k % 2 == 0 { low[len - 1 - k] } else { -low[len - 1 - k] }).collect();
        Ok(Dwt2 { side, levels, low, high })
    }

    /// `log2(side) - 3`, at least 1.
    pub fn default_levels(side: usize) -> usize {
        (side.trailing_zeros() as usize).saturating_sub(3).max(1)
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.side * self.side);
        let mut len = self.side;
        let mut buf = vec![Complex64::default(); self.side];
        for _ in 0..self.levels {
            self.each_line(data, len, &mut buf, Self::analyze);
            len /= 2;
        }
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.side * self.side);
        let mut buf = vec![Complex64::default(); self.side];
        for level in (0..self.levels).rev() {
            let len = self.side >> level;
            self.each_line(data, len, &mut buf, Self::synthesize);
        }
    }

    /// Applies a 1D step to every row, then every column, of the leading
    /// `len × len` block.
    fn each_line(
        &self,
        data: &mut [Complex64],
        len: usize,
        buf: &mut [Complex64],
        step: fn(&Self, &[Complex64], &mut [Complex64]),
    ) {
        let n = self.side;
        let mut line = vec![Complex64::default(); len];
        for r in 0..len {
            line.copy_from_slice(&data[r * n..r * n + len]);
            step(self, &line, &mut buf[..len]);
            data[r * n..r * n + len].copy_from_slice(&buf[..len]);
        }
        for c in 0..len {
            for r in 0..len {
                line[r] = data[r * n + c];
            }
            step(self, &line, &mut buf[..len]);
            for r in 0..len {
                data[r * n + c] = buf[r];
            }
        }
    }

    fn analyze(&self, x: &[Complex64], out: &mut [Complex64]) {
        let len = x.len();
        let half = len / 2;
        for i in 0..half {
            let (mut a, mut d) = (Complex64::default(), Complex64::default());
            for (k, (&h, &g)) in self.low.iter().zip(&self.high).enumerate() {
                let v = x[(2 * i + k) % len];
                a += v * h;
                d += v * g;
            }
            out[i] = a;
            out[half + i] = d;
        }
    }

    fn synthesize(&self, y: &[Complex64], out: &mut [Complex64]) {
        let len = y.len();
        let half = len / 2;
        out.fill(Complex64::default());
        for i in 0..half {
            let (a, d) = (y[i], y[half + i]);
            for (k, (&h, &g)) in self.low.iter().zip(&self.high).enumerate() {
                out[(2 * i + k) % len] += a * h + d * g;
            }
        }
    }
}
