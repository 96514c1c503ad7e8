//! Compressed-sensing harness for k-space sampling schemes.
//!
//! A phantom is measured on a subset of its unitary 2D Fourier coefficients
//! and reconstructed by Douglas-Rachford splitting of
//! `min ‖Ψ*x‖₁ subject to (F x)|mask = y`, with `Ψ` an orthonormal wavelet
//! basis. Sampling schemes are compared by the SNR of the reconstruction.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::choose_n;
use crate::density::{tsp_adjusted_density, DensityGrid, DensitySpec};
use crate::error::{Error, Result};
use crate::fourier::Fft2;
use crate::partition::axis_cell;
use crate::rng::{derive_seed, stream};
use crate::sampler::{draw_points, PointSet, PointStream};
use crate::trajectory::{parameterize, resample};
use crate::tsp::{solve_heuristic, HeuristicConfig};
use crate::wavelet::{Dwt2, Wavelet};

/// SNR reported for an exact reconstruction.
pub const SNR_CAP_DB: f64 = 300.0;

/// Square complex image, row-major, row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    side: usize,
    pixels: Vec<Complex64>,
}

fn check_side(side: usize) -> Result<()> {
    if side < 8 || !side.is_power_of_two() {
        return Err(Error::InvalidSide(side));
    }
    Ok(())
}

impl Image {
    pub fn new(side: usize, pixels: Vec<Complex64>) -> Result<Self> {
        check_side(side)?;
        if pixels.len() != side * side {
            return Err(Error::ShapeMismatch { expected: side * side, got: pixels.len() });
        }
        Ok(Image { side, pixels })
    }

    pub fn from_real(side: usize, values: &[f64]) -> Result<Self> {
        Image::new(side, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(side: usize) -> Result<Self> {
        Image::new(side, vec![Complex64::default(); side * side])
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn pixels(&self) -> &[Complex64] {
        &self.pixels
    }

    pub fn norm(&self) -> f64 {
        l2(&self.pixels)
    }

    /// 8-bit binary PGM of the pixel magnitudes, scaled so the maximum is 255.
    pub fn to_pgm(&self) -> Vec<u8> {
        let max = self.pixels.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
        let mut out = format!("P5\n{} {}\n255\n", self.side, self.side).into_bytes();
        out.extend(self.pixels.iter().map(|c| (c.norm() * scale).round().clamp(0.0, 255.0) as u8));
        out
    }

    /// Interleaved `re, im` float64 little-endian pixels.
    pub fn to_f64_bytes(&self) -> Vec<u8> {
        self.pixels.iter().flat_map(|c| [c.re.to_le_bytes(), c.im.to_le_bytes()]).flatten().collect()
    }

    pub fn sidecar_json(&self) -> String {
        serde_json::json!({
            "side": self.side,
            "dtype": "complex128",
            "layout": "row-major, interleaved re/im float64 little-endian",
        })
        .to_string()
    }

    pub fn from_f64_bytes(side: usize, bytes: &[u8]) -> Result<Image> {
        if bytes.len() != side * side * 16 {
            return Err(Error::ShapeMismatch { expected: side * side * 16, got: bytes.len() });
        }
        let vals: Vec<f64> =
            bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk"))).collect();
        Image::new(side, vals.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect())
    }

    /// Writes `<stem>.pgm`, `<stem>.f64` and `<stem>.json`.
    pub fn write_files(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::write(dir.join(format!("{stem}.pgm")), self.to_pgm())?;
        std::fs::write(dir.join(format!("{stem}.f64")), self.to_f64_bytes())?;
        std::fs::write(dir.join(format!("{stem}.json")), self.sidecar_json())?;
        Ok(())
    }

    /// Reads an image back from its `.f64` dump and JSON sidecar.
    pub fn read_files(dir: &Path, stem: &str) -> Result<Image> {
        let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{stem}.json")))?)
            .map_err(|e| Error::Parse(e.to_string()))?;
        let side = meta["side"].as_u64().ok_or_else(|| Error::Parse("sidecar lacks side".into()))? as usize;
        Image::from_f64_bytes(side, &std::fs::read(dir.join(format!("{stem}.f64")))?)
    }
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// One ellipse of a phantom: intensity, semi-axes, centre, rotation (degrees).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub intensity: f64,
    pub a: f64,
    pub b: f64,
    pub x0: f64,
    pub y0: f64,
    pub phi_deg: f64,
}

/// The ten-ellipse Shepp-Logan table in its modified, higher-contrast form
/// (outer skull intensity 1).
pub const SHEPP_LOGAN: [Ellipse; 10] = [
    Ellipse { intensity: 1.0, a: 0.69, b: 0.92, x0: 0.0, y0: 0.0, phi_deg: 0.0 },
    Ellipse { intensity: -0.8, a: 0.6624, b: 0.874, x0: 0.0, y0: -0.0184, phi_deg: 0.0 },
    Ellipse { intensity: -0.2, a: 0.11, b: 0.31, x0: 0.22, y0: 0.0, phi_deg: -18.0 },
    Ellipse { intensity: -0.2, a: 0.16, b: 0.41, x0: -0.22, y0: 0.0, phi_deg: 18.0 },
    Ellipse { intensity: 0.1, a: 0.21, b: 0.25, x0: 0.0, y0: 0.35, phi_deg: 0.0 },
    Ellipse { intensity: 0.1, a: 0.046, b: 0.046, x0: 0.0, y0: 0.1, phi_deg: 0.0 },
    Ellipse { intensity: 0.1, a: 0.046, b: 0.046, x0: 0.0, y0: -0.1, phi_deg: 0.0 },
    Ellipse { intensity: 0.1, a: 0.046, b: 0.023, x0: -0.08, y0: -0.605, phi_deg: 0.0 },
    Ellipse { intensity: 0.1, a: 0.023, b: 0.023, x0: 0.0, y0: -0.606, phi_deg: 0.0 },
    Ellipse { intensity: 0.1, a: 0.023, b: 0.046, x0: 0.06, y0: -0.605, phi_deg: 0.0 },
];

/// Sub-pixel samples per axis when rasterizing phantoms.
const PHANTOM_SUPERSAMPLE: usize = 8;

/// Rasterizes ellipses on `[-1,1]²` by averaging a regular sub-pixel grid,
/// then clamps to `[0, 1]`.
pub fn rasterize_ellipses(side: usize, ellipses: &[Ellipse]) -> Result<Image> {
    check_side(side)?;
    let s = PHANTOM_SUPERSAMPLE;
    let fine = (side * s) as f64;
    let prepared: Vec<(f64, f64, f64, f64, f64, f64, f64)> = ellipses
        .iter()
        .map(|e| {
            let (sin, cos) = e.phi_deg.to_radians().sin_cos();
            (e.intensity, 1.0 / (e.a * e.a), 1.0 / (e.b * e.b), e.x0, e.y0, cos, sin)
        })
        .collect();
    let values: Vec<f64> = (0..side * side)
        .into_par_iter()
        .map(|idx| {
            let (row, col) = (idx / side, idx % side);
            let mut acc = 0.0;
            for sr in 0..s {
                let y = 1.0 - (2.0 * (row * s + sr) as f64 + 1.0) / fine;
                for sc in 0..s {
                    let x = -1.0 + (2.0 * (col * s + sc) as f64 + 1.0) / fine;
                    for &(intensity, ia2, ib2, x0, y0, cos, sin) in &prepared {
                        let (dx, dy) = (x - x0, y - y0);
                        let u = dx * cos + dy * sin;
                        let v = -dx * sin + dy * cos;
                        if u * u * ia2 + v * v * ib2 <= 1.0 {
                            acc += intensity;
                        }
                    }
                }
            }
            (acc / (s * s) as f64).clamp(0.0, 1.0)
        })
        .collect();
    Image::from_real(side, &values)
}

/// Shepp-Logan head phantom at `side × side`, intensities in `[0, 1]`.
pub fn shepp_logan(side: usize) -> Result<Image> {
    rasterize_ellipses(side, &SHEPP_LOGAN)
}

/// Sampled bins of the centred `side × side` Fourier grid. Row index is
/// `k_y`, column index `k_x`; bin `(side/2, side/2)` is DC.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingMask {
    side: usize,
    flags: Vec<bool>,
}

impl SamplingMask {
    pub fn empty(side: usize) -> Self {
        SamplingMask { side, flags: vec![false; side * side] }
    }

    pub fn full(side: usize) -> Self {
        SamplingMask { side, flags: vec![true; side * side] }
    }

    pub fn from_flags(side: usize, flags: Vec<bool>) -> Result<Self> {
        if flags.len() != side * side {
            return Err(Error::ShapeMismatch { expected: side * side, got: flags.len() });
        }
        Ok(SamplingMask { side, flags })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn is_set(&self, row: usize, col: usize) -> bool {
        self.flags[row * self.side + col]
    }

    pub fn sampled_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    /// `side² / sampled_count`.
    pub fn acceleration(&self) -> f64 {
        (self.side * self.side) as f64 / self.sampled_count() as f64
    }

    /// Bin of a point of `[0,1]²`; returns whether it was newly set.
    pub fn insert_point(&mut self, x: f64, y: f64) -> bool {
        let (row, col) = (axis_cell(y, self.side), axis_cell(x, self.side));
        !std::mem::replace(&mut self.flags[row * self.side + col], true)
    }

    /// Unshifted FFT-array offsets of the set bins, row-major over the
    /// centred layout.
    fn measured_offsets(&self) -> Vec<usize> {
        let n = self.side;
        let half = n / 2;
        self.flags
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(i, _)| {
                let (row, col) = (i / n, i % n);
                ((row + half) % n) * n + (col + half) % n
            })
            .collect()
    }

    /// Plain PBM (`P1`); 1 marks a sampled bin.
    pub fn to_pbm(&self) -> String {
        let mut out = format!("P1\n{} {}\n", self.side, self.side);
        for row in self.flags.chunks(self.side) {
            let line: Vec<&str> = row.iter().map(|&f| if f { "1" } else { "0" }).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn parse_pbm(text: &str) -> Result<SamplingMask> {
        let body: Vec<&str> =
            text.lines().map(|l| l.split('#').next().unwrap_or("")).flat_map(str::split_whitespace).collect();
        if body.first() != Some(&"P1") || body.len() < 3 {
            return Err(Error::Parse("expected a plain PBM (P1)".into()));
        }
        let w: usize = body[1].parse().map_err(|_| Error::Parse("bad PBM width".into()))?;
        let h: usize = body[2].parse().map_err(|_| Error::Parse("bad PBM height".into()))?;
        if w != h {
            return Err(Error::Parse(format!("mask must be square, got {w}x{h}")));
        }
        let flags = body[3..]
            .iter()
            .flat_map(|tok| tok.chars())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse(format!("bad PBM pixel {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        SamplingMask::from_flags(w, flags)
    }
}

/// Snaps 2D points to their Fourier bins; duplicates collapse.
pub fn mask_from_points(ps: &PointSet, side: usize) -> Result<SamplingMask> {
    if ps.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: ps.dim() });
    }
    let mut mask = SamplingMask::empty(side);
    for p in ps.iter() {
        mask.insert_point(p[0], p[1]);
    }
    Ok(mask)
}

/// Masked unitary DFT of `img`, row-major over the mask's set bins.
pub fn measure(img: &Image, mask: &SamplingMask) -> Result<Vec<Complex64>> {
    if img.side != mask.side {
        return Err(Error::SideMismatch(img.side, mask.side));
    }
    let mut spectrum = img.pixels.clone();
    Fft2::new(img.side).forward(&mut spectrum);
    Ok(mask.measured_offsets().into_iter().map(|o| spectrum[o]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReconConfig {
    pub wavelet: Wavelet,
    /// Decomposition depth; `None` means `log2(side) - 3`.
    pub levels: Option<usize>,
    pub iterations: usize,
    /// Soft threshold; `None` means 0.1 × the largest wavelet coefficient
    /// magnitude of the zero-filled reconstruction.
    pub dr_gamma: Option<f64>,
    pub tolerance: f64,
}

impl Default for ReconConfig {
    fn default() -> Self {
        ReconConfig { wavelet: Wavelet::Haar, levels: None, iterations: 300, dr_gamma: None, tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub image: Image,
    pub iterations: usize,
    /// Relative change of the splitting variable at the last iteration.
    pub residual: f64,
    pub gamma: f64,
}

/// Projection onto the affine set of images consistent with the data.
struct DataConstraint<'a> {
    fft: Fft2,
    offsets: Vec<usize>,
    y: &'a [Complex64],
}

impl DataConstraint<'_> {
    fn project(&self, u: &[Complex64], out: &mut [Complex64]) {
        out.copy_from_slice(u);
        self.fft.forward(out);
        for (&o, &v) in self.offsets.iter().zip(self.y) {
            out[o] = v;
        }
        self.fft.inverse(out);
    }
}

fn soft_threshold(coeffs: &mut [Complex64], gamma: f64) {
    for c in coeffs {
        let m = c.norm();
        *c = if m <= gamma { Complex64::default() } else { *c * (1.0 - gamma / m) };
    }
}

/// Douglas-Rachford reconstruction from masked Fourier data.
pub fn reconstruct(y: &[Complex64], mask: &SamplingMask, config: &ReconConfig) -> Result<Reconstruction> {
    let n = mask.side;
    check_side(n)?;
    if config.iterations == 0 {
        return Err(Error::Config("iterations must be at least 1".into()));
    }
    let offsets = mask.measured_offsets();
    if offsets.len() != y.len() {
        return Err(Error::ShapeMismatch { expected: offsets.len(), got: y.len() });
    }
    let levels = config.levels.unwrap_or_else(|| Dwt2::default_levels(n));
    let dwt = Dwt2::new(config.wavelet, n, levels)?;
    let constraint = DataConstraint { fft: Fft2::new(n), offsets, y };

    let zeros = vec![Complex64::default(); n * n];
    let mut z = vec![Complex64::default(); n * n];
    constraint.project(&zeros, &mut z);
    let gamma = match config.dr_gamma {
        Some(g) if g > 0.0 && g.is_finite() => g,
        Some(g) => return Err(Error::Config(format!("dr_gamma must be positive, got {g}"))),
        None => {
            let mut w = z.clone();
            dwt.forward(&mut w);
            let max = w.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if max > 0.0 {
                0.1 * max
            } else {
                1.0
            }
        }
    };

    let mut x = vec![Complex64::default(); n * n];
    let mut v = vec![Complex64::default(); n * n];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    for _ in 0..config.iterations {
        iterations += 1;
        constraint.project(&z, &mut x);
        for ((vi, xi), zi) in v.iter_mut().zip(&x).zip(&z) {
            *vi = 2.0 * xi - zi;
        }
        dwt.forward(&mut v);
        soft_threshold(&mut v, gamma);
        dwt.inverse(&mut v);
        let mut change = 0.0;
        for ((zi, vi), xi) in z.iter_mut().zip(&v).zip(&x) {
            let delta = vi - xi;
            change += delta.norm_sqr();
            *zi += delta;
        }
        let scale = l2(&z);
        residual = if scale > 0.0 { change.sqrt() / scale } else { 0.0 };
        if residual < config.tolerance {
            break;
        }
    }
    constraint.project(&z, &mut x);
    Ok(Reconstruction { image: Image::new(n, x)?, iterations, residual, gamma })
}

/// Minimum-energy image consistent with the data: measured coefficients in
/// place, all others zero.
pub fn zero_filled(y: &[Complex64], mask: &SamplingMask) -> Result<Image> {
    check_side(mask.side)?;
    let offsets = mask.measured_offsets();
    if offsets.len() != y.len() {
        return Err(Error::ShapeMismatch { expected: offsets.len(), got: y.len() });
    }
    let n = mask.side;
    let mut spectrum = vec![Complex64::default(); n * n];
    for (&o, &v) in offsets.iter().zip(y) {
        spectrum[o] = v;
    }
    Fft2::new(n).inverse(&mut spectrum);
    Image::new(n, spectrum)
}

/// `‖Ψ* x‖₁` for an image.
pub fn wavelet_l1(img: &Image, wavelet: Wavelet, levels: usize) -> Result<f64> {
    let dwt = Dwt2::new(wavelet, img.side, levels)?;
    let mut w = img.pixels.clone();
    dwt.forward(&mut w);
    Ok(w.iter().map(|c| c.norm()).sum())
}

/// Relative mismatch between the measured coefficients of `img` and `y`.
pub fn data_residual(img: &Image, mask: &SamplingMask, y: &[Complex64]) -> Result<f64> {
    let got = measure(img, mask)?;
    let diff: Vec<Complex64> = got.iter().zip(y).map(|(a, b)| a - b).collect();
    let scale = l2(y);
    Ok(if scale > 0.0 { l2(&diff) / scale } else { l2(&diff) })
}

/// `20·log₁₀(‖ref‖ / ‖ref − est‖)`, capped at [`SNR_CAP_DB`].
pub fn snr_db(reference: &Image, estimate: &Image) -> Result<f64> {
    if reference.side != estimate.side {
        return Err(Error::SideMismatch(reference.side, estimate.side));
    }
    let signal = reference.norm();
    if signal == 0.0 {
        return Err(Error::ZeroReference);
    }
    let noise = l2(&reference.pixels.iter().zip(&estimate.pixels).map(|(a, b)| a - b).collect::<Vec<_>>());
    if noise == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((20.0 * (signal / noise).log10()).min(SNR_CAP_DB))
}

/// How k-space bins are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Independent draws from the target density, no continuity.
    #[serde(rename = "iid-target")]
    IidTarget,
    /// Shortest path through draws from the target density itself.
    #[serde(rename = "tsp-target")]
    TspTarget,
    /// Shortest path through draws from the exponent-adjusted density.
    #[serde(rename = "tsp-adjusted")]
    TspAdjusted,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::IidTarget, Scheme::TspTarget, Scheme::TspAdjusted];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::IidTarget => "iid-target",
            Scheme::TspTarget => "tsp-target",
            Scheme::TspAdjusted => "tsp-adjusted",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::Parse(format!("unknown scheme {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Target density `π̃` (builtin spec or file), built at the image side.
    pub density: String,
    pub side: usize,
    /// Acceleration factor: `side² / sampled_count`.
    pub acceleration: f64,
    pub schemes: Vec<Scheme>,
    pub seeds: Vec<u64>,
    /// Relative tolerance on the sampled bin count.
    pub count_tolerance: f64,
    /// Path-length constant used for the initial number of drawings.
    pub beta: f64,
    pub tsp: HeuristicConfig,
    pub recon: ReconConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            density: "radial:1:0.05".into(),
            side: 128,
            acceleration: 5.0,
            schemes: Scheme::ALL.to_vec(),
            seeds: (0..5).collect(),
            count_tolerance: 0.02,
            beta: 0.76,
            tsp: HeuristicConfig::default(),
            recon: ReconConfig::default(),
        }
    }
}

/// One reconstruction of the experiment.
#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub scheme: Scheme,
    pub seed: u64,
    pub side: usize,
    pub acceleration: f64,
    /// Number of points drawn before masking.
    pub drawings: usize,
    pub mask: SamplingMask,
    pub image: Image,
    pub snr_db: f64,
    pub iterations: usize,
    pub residual: f64,
    pub data_residual: f64,
}

pub const REPORT_HEADER: &str = "scheme,seed,n,r,sampled_count,snr_db,iterations,residual";

impl ExperimentRun {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6},{},{:.6e}",
            self.scheme,
            self.seed,
            self.side,
            self.acceleration,
            self.mask.sampled_count(),
            self.snr_db,
            self.iterations,
            self.residual
        )
    }
}

pub fn report_csv(runs: &[ExperimentRun]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for run in runs {
        out.push_str(&run.csv_row());
        out.push('\n');
    }
    out
}

/// Draws i.i.d. bins from `g` until exactly `target` distinct bins are set.
fn iid_mask(g: &DensityGrid, side: usize, target: usize, seed: u64) -> Result<(SamplingMask, usize)> {
    let mut mask = SamplingMask::empty(side);
    let mut stream = PointStream::new(g, seed);
    let mut count = 0;
    let mut draws = 0;
    let mut buf = Vec::with_capacity(2);
    let limit = 1000 * side * side;
    while count < target {
        if draws == limit {
            return Err(Error::Config(format!("{draws} draws reached only {count} of {target} bins")));
        }
        buf.clear();
        stream.next_into(&mut buf);
        draws += 1;
        if mask.insert_point(buf[0], buf[1]) {
            count += 1;
        }
    }
    Ok((mask, draws))
}

/// Mask traced by the shortest path through `n` draws, resampled at one bin
/// width.
fn path_mask(draw: &DensityGrid, side: usize, n: usize, seed: u64, tsp: &HeuristicConfig) -> Result<SamplingMask> {
    let ps = draw_points(draw, n.max(2), derive_seed(seed, stream::DRAW));
    let config = HeuristicConfig { seed: derive_seed(seed, stream::TSP), ..*tsp };
    let tour = solve_heuristic(&ps, &config);
    let traj = parameterize(&ps, &tour)?;
    let samples = resample(&traj, 1.0 / side as f64)?;
    mask_from_points(&samples, side)
}

/// Number of drawings and the mask they produced.
type Probe = Option<(usize, SamplingMask)>;

/// Searches the number of drawings so the path mask has `target` bins
/// within `tolerance`.
fn tsp_mask(
    draw: &DensityGrid,
    side: usize,
    target: usize,
    tolerance: f64,
    beta: f64,
    seed: u64,
    tsp: &HeuristicConfig,
) -> Result<(SamplingMask, usize)> {
    let want = target as f64;
    let slack = tolerance * want;
    let mut n = choose_n(target, 1.0 / side as f64, draw, beta)?.max(2);
    let (mut lo, mut hi): (Probe, Probe) = (None, None);
    for _ in 0..60 {
        let mask = path_mask(draw, side, n, seed, tsp)?;
        let got = mask.sampled_count() as f64;
        if (got - want).abs() <= slack {
            return Ok((mask, n));
        }
        if got < want {
            lo = Some((n, mask));
        } else {
            hi = Some((n, mask));
        }
        n = match (&lo, &hi) {
            (Some((a, _)), Some((b, _))) => {
                if b - a <= 1 {
                    break;
                }
                (a + b) / 2
            }
            _ => {
                // Bin count grows roughly like the path length, i.e. √N.
                let factor = (want / got.max(1.0)).powi(2).clamp(0.25, 4.0);
                ((n as f64 * factor).round() as usize).max(2)
            }
        };
        if n > 50 * side * side {
            break;
        }
    }
    let best = [lo, hi]
        .into_iter()
        .flatten()
        .min_by(|a, b| {
            let da = (a.1.sampled_count() as f64 - want).abs();
            let db = (b.1.sampled_count() as f64 - want).abs();
            da.total_cmp(&db)
        })
        .ok_or_else(|| Error::Config("no path mask produced".into()))?;
    // The count is not monotone in N (each N gives a new path), so look
    // around the bracket before giving up.
    for offset in 1..=64usize {
        for candidate in [best.0 + offset, best.0.saturating_sub(offset)] {
            if candidate < 2 {
                continue;
            }
            let mask = path_mask(draw, side, candidate, seed, tsp)?;
            if (mask.sampled_count() as f64 - want).abs() <= slack {
                return Ok((mask, candidate));
            }
        }
    }
    Err(Error::Config(format!(
        "path masks bracket {target} bins but the closest has {} (N = {})",
        best.1.sampled_count(),
        best.0
    )))
}

/// Builds the k-space mask of one scheme.
pub fn scheme_mask(
    scheme: Scheme,
    target_density: &DensityGrid,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<(SamplingMask, usize)> {
    let side = config.side;
    let target = ((side * side) as f64 / config.acceleration).round() as usize;
    if target == 0 || target > side * side {
        return Err(Error::Config(format!("acceleration {} gives {target} bins", config.acceleration)));
    }
    match scheme {
        Scheme::IidTarget => iid_mask(target_density, side, target, derive_seed(seed, stream::MASK)),
        Scheme::TspTarget => {
            tsp_mask(target_density, side, target, config.count_tolerance, config.beta, seed, &config.tsp)
        }
        Scheme::TspAdjusted => {
            let adjusted = tsp_adjusted_density(target_density)?;
            tsp_mask(&adjusted, side, target, config.count_tolerance, config.beta, seed, &config.tsp)
        }
    }
}

/// Runs every (scheme, seed) pair; rows come back sorted by scheme, then seed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRun>> {
    check_side(config.side)?;
    if config.acceleration.is_nan() || config.acceleration < 1.0 {
        return Err(Error::Config(format!("acceleration must be at least 1, got {}", config.acceleration)));
    }
    let target_density = DensitySpec::parse(&config.density)?.build(2, config.side)?;
    if target_density.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: target_density.dim() });
    }
    let phantom = shepp_logan(config.side)?;
    let mut jobs: Vec<(Scheme, u64)> =
        config.schemes.iter().flat_map(|&s| config.seeds.iter().map(move |&seed| (s, seed))).collect();
    jobs.sort();
    jobs.dedup();
    jobs.into_par_iter()
        .map(|(scheme, seed)| {
            let (mask, drawings) = scheme_mask(scheme, &target_density, config, seed)?;
            let y = measure(&phantom, &mask)?;
            let rec = reconstruct(&y, &mask, &config.recon)?;
            Ok(ExperimentRun {
                scheme,
                seed,
                side: config.side,
                acceleration: config.acceleration,
                drawings,
                snr_db: snr_db(&phantom, &rec.image)?,
                data_residual: data_residual(&rec.image, &mask, &y)?,
                iterations: rec.iterations,
                residual: rec.residual,
                mask,
                image: rec.image,
            })
        })
        .collect()
}
