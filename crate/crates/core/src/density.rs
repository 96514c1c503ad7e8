//! Piecewise-constant densities on regular grids over `[0,1]^d`.
//!
//! A [`DensityGrid`] stores one value per cell (mass per unit volume). All
//! integrals reduce to cell sums weighted by the cell volume `1/r^d`.
//!
//! The two exponent maps tie the drawing density to the curve density of a
//! travelling-salesman path: drawing i.i.d. points from `π ∝ π̃^{d/(d-1)}`
//! and linking them by a short path yields a curve whose arc-length
//! occupation tends to `π̃`.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::partition;

const NORMALIZED_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    dim: usize,
    resolution: usize,
    values: Vec<f64>,
    normalized: bool,
}

impl DensityGrid {
    /// Validates and wraps raw values (row-major, last axis fastest).
    pub fn new(dim: usize, resolution: usize, values: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if resolution == 0 {
            return Err(Error::InvalidResolution(resolution));
        }
        let expected = partition::cell_count(dim, resolution);
        if values.len() != expected {
            return Err(Error::ShapeMismatch { expected, got: values.len() });
        }
        validate_values(&values)?;
        let mut grid = DensityGrid { dim, resolution, values, normalized: false };
        grid.normalized = (grid.total_mass() - 1.0).abs() <= NORMALIZED_TOL;
        Ok(grid)
    }

    /// Constant density 1 on `[0,1]^d`.
    pub fn uniform(dim: usize, resolution: usize) -> Result<Self> {
        let n = if resolution == 0 { 0 } else { partition::cell_count(dim, resolution) };
        DensityGrid::new(dim, resolution, vec![1.0; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cell_volume(&self) -> f64 {
        1.0 / self.values.len() as f64
    }

    /// `Σ values · cell_volume`.
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    /// Mass of a single cell.
    pub fn cell_mass(&self, index: usize) -> Result<f64> {
        self.values
            .get(index)
            .map(|v| v * self.cell_volume())
            .ok_or(Error::IndexOutOfRange { index, len: self.values.len() })
    }

    pub fn cell_masses(&self) -> Vec<f64> {
        let vol = self.cell_volume();
        self.values.iter().map(|v| v * vol).collect()
    }

    /// Exact cell masses over an `m^d` partition.
    ///
    /// Grid cells straddling partition boundaries split their mass by
    /// overlap volume, so any `m` is accepted, not only divisors of the
    /// grid resolution.
    pub fn partition_masses(&self, m: usize) -> Vec<f64> {
        assert!(m >= 1, "partition resolution must be positive");
        let overlaps = axis_overlaps(self.resolution, m);
        let mut out = vec![0.0; partition::cell_count(self.dim, m)];
        let vol = self.cell_volume();
        for (idx, &v) in self.values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let multi = partition::unflatten(idx, self.dim, self.resolution);
            spread(&overlaps, &multi, 0, 0, v * vol, m, &mut out);
        }
        out
    }

    /// The same density resampled onto an `m^d` partition (exact overlap).
    pub fn aggregate(&self, m: usize) -> Result<DensityGrid> {
        let masses = self.partition_masses(m);
        let scale = partition::cell_count(self.dim, m) as f64;
        DensityGrid::new(self.dim, m, masses.into_iter().map(|w| w * scale).collect())
    }

    /// Density value at a point, using the partition convention of
    /// [`partition::cell_of`].
    pub fn value_at(&self, point: &[f64]) -> f64 {
        self.values[partition::cell_of(point, self.resolution)]
    }

    fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<DensityGrid> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        normalize(&DensityGrid::new(self.dim, self.resolution, values)?)
    }

    /// Serializes to the `vds-density` text format.
    pub fn to_text(&self) -> String {
        self.to_text_with_kind(None)
    }

    pub(crate) fn to_text_with_kind(&self, kind: Option<&str>) -> String {
        let mut out = format!("vds-density d={} r={}", self.dim, self.resolution);
        if let Some(kind) = kind {
            let _ = write!(out, " kind={kind}");
        }
        out.push('\n');
        let row = self.resolution;
        for chunk in self.values.chunks(row) {
            let line: Vec<String> = chunk.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the `vds-density` text format. Returns the grid and the optional
    /// `kind=` header token.
    pub fn parse_text(text: &str) -> Result<(DensityGrid, Option<String>)> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty density file".into()))?;
        let mut tokens = header.split_whitespace();
        if tokens.next() != Some("vds-density") {
            return Err(Error::Parse(format!("bad density header: {header:?}")));
        }
        let (mut dim, mut res, mut kind) = (None, None, None);
        for tok in tokens {
            let (key, value) = tok.split_once('=').ok_or_else(|| Error::Parse(format!("bad header token {tok:?}")))?;
            match key {
                "d" => dim = Some(parse_num::<usize>(value)?),
                "r" => res = Some(parse_num::<usize>(value)?),
                "kind" => kind = Some(value.to_string()),
                _ => return Err(Error::Parse(format!("unknown header key {key:?}"))),
            }
        }
        let dim = dim.ok_or_else(|| Error::Parse("missing d=".into()))?;
        let res = res.ok_or_else(|| Error::Parse("missing r=".into()))?;
        let values = lines.flat_map(str::split_whitespace).map(parse_num::<f64>).collect::<Result<Vec<_>>>()?;
        Ok((DensityGrid::new(dim, res, values)?, kind))
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<DensityGrid> {
        let text = std::fs::read_to_string(path)?;
        Ok(DensityGrid::parse_text(&text)?.0)
    }
}

fn parse_num<T: FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("invalid number {s:?}")))
}

fn validate_values(values: &[f64]) -> Result<()> {
    let mut any_positive = false;
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteValue(i));
        }
        if v < 0.0 {
            return Err(Error::NegativeValue(i));
        }
        any_positive |= v > 0.0;
    }
    if !any_positive {
        return Err(Error::AllZeroDensity);
    }
    Ok(())
}

/// For each grid cell along one axis, the partition cells it overlaps and
/// the fraction of its length inside each.
fn axis_overlaps(r: usize, m: usize) -> Vec<Vec<(usize, f64)>> {
    (0..r)
        .map(|a| {
            if m.is_multiple_of(r) || r.is_multiple_of(m) {
                // Aligned grids: exact integer arithmetic, no rounding.
                if r >= m {
                    return vec![(a * m / r, 1.0)];
                }
                let k = m / r;
                return (0..k).map(|j| (a * k + j, 1.0 / k as f64)).collect();
            }
            let lo = a as f64 / r as f64;
            let hi = (a + 1) as f64 / r as f64;
            let first = partition::axis_cell(lo, m);
            let last = ((hi * m as f64).ceil() as usize).min(m);
            (first..last)
                .filter_map(|b| {
                    let blo = (b as f64 / m as f64).max(lo);
                    let bhi = ((b + 1) as f64 / m as f64).min(hi);
                    (bhi > blo).then_some((b, (bhi - blo) * r as f64))
                })
                .collect()
        })
        .collect()
}

fn spread(
    overlaps: &[Vec<(usize, f64)>],
    multi: &[usize],
    axis: usize,
    flat: usize,
    weight: f64,
    m: usize,
    out: &mut [f64],
) {
    if axis == multi.len() {
        out[flat] += weight;
        return;
    }
    for &(b, frac) in &overlaps[multi[axis]] {
        spread(overlaps, multi, axis + 1, flat * m + b, weight * frac, m, out);
    }
}

/// Rescales a grid to unit mass.
pub fn normalize(raw: &DensityGrid) -> Result<DensityGrid> {
    validate_values(&raw.values)?;
    let total = raw.total_mass();
    let values = raw.values.iter().map(|v| v / total).collect();
    Ok(DensityGrid { dim: raw.dim, resolution: raw.resolution, values, normalized: true })
}

/// The density to draw from so that a shortest path through the draws has
/// occupation density `target`: `target^{d/(d-1)}`, normalized.
pub fn tsp_adjusted_density(target: &DensityGrid) -> Result<DensityGrid> {
    let d = target.dim as f64;
    let p = d / (d - 1.0);
    if target.dim == 2 {
        target.map_values(|v| v * v)
    } else {
        target.map_values(|v| if v == 0.0 { 0.0 } else { v.powf(p) })
    }
}

/// Inverse of [`tsp_adjusted_density`]: `drawing^{(d-1)/d}`, normalized.
pub fn inverse_adjusted_density(drawing: &DensityGrid) -> Result<DensityGrid> {
    let d = drawing.dim as f64;
    let p = (d - 1.0) / d;
    if drawing.dim == 2 {
        drawing.map_values(f64::sqrt)
    } else {
        drawing.map_values(|v| if v == 0.0 { 0.0 } else { v.powf(p) })
    }
}

/// Radially decreasing density centred on the hypercube.
///
/// Cells whose centre lies within `plateau_radius / 2` of the centre take the
/// value 1, the rest `(ρ₀ / dist)^decay` with `ρ₀ = plateau_radius / 2`. The
/// cell containing the centre point always takes the plateau value, so the
/// grid is never all zero.
pub fn radial_polynomial_density(
    dim: usize,
    resolution: usize,
    decay: f64,
    plateau_radius: f64,
) -> Result<DensityGrid> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    if resolution < 2 {
        return Err(Error::InvalidResolution(resolution));
    }
    if !decay.is_finite() || decay <= 0.0 {
        return Err(Error::InvalidDecay(decay));
    }
    if !(0.0..1.0).contains(&plateau_radius) {
        return Err(Error::InvalidPlateauRadius(plateau_radius));
    }
    let rho0 = plateau_radius / 2.0;
    let n = partition::cell_count(dim, resolution);
    let center_cell = partition::cell_of(&vec![0.5; dim], resolution);
    let values = (0..n)
        .map(|idx| {
            if idx == center_cell {
                return 1.0;
            }
            let dist = partition::unflatten(idx, dim, resolution)
                .iter()
                .map(|&i| {
                    let c = (i as f64 + 0.5) / resolution as f64 - 0.5;
                    c * c
                })
                .sum::<f64>()
                .sqrt();
            if dist <= rho0 {
                1.0
            } else {
                (rho0 / dist).powf(decay)
            }
        })
        .collect();
    normalize(&DensityGrid::new(dim, resolution, values)?)
}

/// A density described on the command line: a file path or a builtin.
#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    Uniform,
    Radial { decay: f64, plateau_radius: f64 },
    File(std::path::PathBuf),
}

impl DensitySpec {
    /// Parses `uniform`, `radial:<decay>:<plateau_radius>`, or a path.
    pub fn parse(spec: &str) -> Result<DensitySpec> {
        if spec == "uniform" {
            return Ok(DensitySpec::Uniform);
        }
        if let Some(rest) = spec.strip_prefix("radial:") {
            let (decay, plateau) = rest
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected radial:<decay>:<plateau_radius>, got {spec:?}")))?;
            return Ok(DensitySpec::Radial { decay: parse_num(decay)?, plateau_radius: parse_num(plateau)? });
        }
        if spec.is_empty() || spec.contains(':') && !Path::new(spec).exists() {
            return Err(Error::Parse(format!("unrecognized density spec {spec:?}")));
        }
        Ok(DensitySpec::File(spec.into()))
    }

    /// Builds the normalized grid. Builtins use `dim` and `resolution`; files
    /// carry their own shape.
    pub fn build(&self, dim: usize, resolution: usize) -> Result<DensityGrid> {
        match self {
            DensitySpec::Uniform => normalize(&DensityGrid::uniform(dim, resolution)?),
            DensitySpec::Radial { decay, plateau_radius } => {
                radial_polynomial_density(dim, resolution, *decay, *plateau_radius)
            }
            DensitySpec::File(path) => {
                let g = DensityGrid::read_file(path)?;
                if g.is_normalized() {
                    Ok(g)
                } else {
                    normalize(&g)
                }
            }
        }
    }
}

impl std::fmt::Display for DensitySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DensitySpec::Uniform => write!(f, "uniform"),
            DensitySpec::Radial { decay, plateau_radius } => write!(f, "radial:{decay}:{plateau_radius}"),
            DensitySpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(values: &[f64]) -> DensityGrid {
        DensityGrid::new(2, (values.len() as f64).sqrt() as usize, values.to_vec()).unwrap()
    }

    #[test]
    fn normalize_uniform_is_identity() {
        let g = DensityGrid::uniform(2, 4).unwrap();
        assert!(g.is_normalized());
        assert_eq!(normalize(&g).unwrap().values(), g.values());
    }

    #[test]
    fn normalize_single_cell() {
        let g = DensityGrid::new(2, 1, vec![5.0]).unwrap();
        assert_eq!(normalize(&g).unwrap().values(), &[1.0]);
    }

    #[test]
    fn normalize_hand_example() {
        let g = normalize(&grid(&[1.0, 1.0, 1.0, 3.0])).unwrap();
        let want = [2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 2.0];
        for (a, b) in g.values().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((g.total_mass() - 1.0).abs() < 1e-12);
        assert!((g.cell_mass(3).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn normalize_errors() {
        assert_eq!(DensityGrid::new(2, 2, vec![0.0; 4]), Err(Error::AllZeroDensity));
        assert_eq!(DensityGrid::new(2, 2, vec![1.0, f64::NAN, 0.0, 0.0]), Err(Error::NonFiniteValue(1)));
        assert_eq!(DensityGrid::new(2, 2, vec![1.0, 0.0, f64::INFINITY, 0.0]), Err(Error::NonFiniteValue(2)));
        assert_eq!(DensityGrid::new(2, 2, vec![1.0, 0.0, 0.0, -1.0]), Err(Error::NegativeValue(3)));
        assert!(matches!(DensityGrid::new(2, 2, vec![1.0; 3]), Err(Error::ShapeMismatch { .. })));
        assert_eq!(DensityGrid::new(1, 2, vec![1.0; 2]), Err(Error::InvalidDimension(1)));
    }

    #[test]
    fn adjusted_uniform_stays_uniform() {
        let g = DensityGrid::uniform(3, 3).unwrap();
        assert_eq!(tsp_adjusted_density(&g).unwrap().values(), g.values());
        assert_eq!(inverse_adjusted_density(&g).unwrap().values(), g.values());
    }

    #[test]
    fn adjusted_squares_in_two_dimensions() {
        let g = normalize(&grid(&[1.0, 2.0, 1.0, 2.0])).unwrap();
        let a = tsp_adjusted_density(&g).unwrap();
        let want = normalize(&grid(&[1.0, 4.0, 1.0, 4.0])).unwrap();
        for (x, y) in a.values().iter().zip(want.values()) {
            assert!((x - y).abs() < 1e-12);
        }
        let back = inverse_adjusted_density(&a).unwrap();
        for (x, y) in back.values().iter().zip(g.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn adjusted_three_halves_in_three_dimensions() {
        // 2x2x2 grid with values alternating 1 and 4.
        let raw: Vec<f64> = (0..8).map(|i| if i % 2 == 0 { 1.0 } else { 4.0 }).collect();
        let g = normalize(&DensityGrid::new(3, 2, raw).unwrap()).unwrap();
        let a = tsp_adjusted_density(&g).unwrap();
        let ratio = a.values()[1] / a.values()[0];
        assert!((ratio - 8.0).abs() < 1e-12);
        assert!((a.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cell_mass_checks() {
        let g = DensityGrid::uniform(2, 2).unwrap();
        assert_eq!(g.cell_mass(0).unwrap(), 0.25);
        assert_eq!(g.cell_mass(4), Err(Error::IndexOutOfRange { index: 4, len: 4 }));
    }

    #[test]
    fn radial_errors() {
        assert_eq!(radial_polynomial_density(2, 8, 0.0, 0.1), Err(Error::InvalidDecay(0.0)));
        assert_eq!(radial_polynomial_density(2, 8, -1.0, 0.1), Err(Error::InvalidDecay(-1.0)));
        assert_eq!(radial_polynomial_density(2, 1, 1.0, 0.1), Err(Error::InvalidResolution(1)));
        assert_eq!(radial_polynomial_density(2, 8, 1.0, 1.0), Err(Error::InvalidPlateauRadius(1.0)));
    }

    #[test]
    fn radial_plateau_covering_cube_is_uniform() {
        // r=2 cell centres sit at distance √2/4 ≈ 0.354 < 0.45 from the centre.
        let g = radial_polynomial_density(2, 2, 3.0, 0.9).unwrap();
        assert_eq!(g.values(), &[1.0; 4]);
    }

    #[test]
    fn radial_center_exceeds_corner() {
        let g = radial_polynomial_density(2, 64, 2.0, 0.05).unwrap();
        let center = g.value_at(&[0.5, 0.5]);
        let corner = g.values()[0];
        assert!(center > corner);
        assert!((g.total_mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn radial_direct_evaluation_oracle() {
        // plateau 0.3: ρ₀ = 0.15, so no r=4 cell centre (nearest at 0.177)
        // is in the plateau except the forced centre cell (2,2).
        let (r, rho0) = (4usize, 0.15f64);
        let g = radial_polynomial_density(2, r, 1.0, 2.0 * rho0).unwrap();
        let mut expect = Vec::new();
        for i in 0..r {
            for j in 0..r {
                let cx = (i as f64 + 0.5) / r as f64 - 0.5;
                let cy = (j as f64 + 0.5) / r as f64 - 0.5;
                let dist = (cx * cx + cy * cy).sqrt();
                expect.push(if (i, j) == (2, 2) { 1.0 } else { rho0 / dist });
            }
        }
        let total: f64 = expect.iter().sum::<f64>() / 16.0;
        for (got, want) in g.values().iter().zip(&expect) {
            assert!((got - want / total).abs() < 1e-12, "{got} vs {}", want / total);
        }
    }

    #[test]
    fn radial_zero_plateau_keeps_only_center_cell() {
        let g = radial_polynomial_density(2, 4, 1.0, 0.0).unwrap();
        let mut expect = vec![0.0; 16];
        expect[2 * 4 + 2] = 16.0;
        assert_eq!(g.values(), expect.as_slice());
    }

    #[test]
    fn partition_masses_aligned_and_unaligned() {
        let g = radial_polynomial_density(2, 12, 2.0, 0.1).unwrap();
        for m in [1, 2, 3, 4, 5, 7, 12, 24] {
            let masses = g.partition_masses(m);
            assert!((masses.iter().sum::<f64>() - 1.0).abs() < 1e-12, "m={m}");
        }
        // Unaligned partition agrees with brute-force point quadrature.
        let masses = g.partition_masses(5);
        let fine = 600;
        let mut brute = vec![0.0; 25];
        for i in 0..fine {
            for j in 0..fine {
                let p = [(i as f64 + 0.5) / fine as f64, (j as f64 + 0.5) / fine as f64];
                brute[partition::cell_of(&p, 5)] += g.value_at(&p) / (fine * fine) as f64;
            }
        }
        for (a, b) in masses.iter().zip(&brute) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn text_format_round_trips() {
        let g = radial_polynomial_density(3, 4, 1.5, 0.2).unwrap();
        let text = g.to_text_with_kind(Some("empirical"));
        assert!(text.starts_with("vds-density d=3 r=4 kind=empirical\n"));
        let (back, kind) = DensityGrid::parse_text(&text).unwrap();
        assert_eq!(back.values(), g.values());
        assert_eq!(kind.as_deref(), Some("empirical"));
        assert!(DensityGrid::parse_text("nope d=2 r=1\n1").is_err());
        assert!(DensityGrid::parse_text("vds-density d=2 r=2\n1 2 3").is_err());
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(DensitySpec::parse("uniform").unwrap(), DensitySpec::Uniform);
        assert_eq!(
            DensitySpec::parse("radial:2:0.05").unwrap(),
            DensitySpec::Radial { decay: 2.0, plateau_radius: 0.05 }
        );
        assert!(DensitySpec::parse("radial:x:0.05").is_err());
        assert!(DensitySpec::parse("radial:2").is_err());
        assert!(DensitySpec::parse("bogus:1").is_err());
    }

    fn arb_grid() -> impl Strategy<Value = DensityGrid> {
        (2usize..4, 1usize..5).prop_flat_map(|(d, r)| {
            let n = r.pow(d as u32);
            prop::collection::vec(0.0f64..10.0, n).prop_filter_map("needs a positive value", move |mut v| {
                v[0] += 1e-3;
                normalize(&DensityGrid::new(d, r, v).ok()?).ok()
            })
        })
    }

    proptest! {
        #[test]
        fn normalize_idempotent(g in arb_grid()) {
            let twice = normalize(&g).unwrap();
            for (a, b) in twice.values().iter().zip(g.values()) {
                prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
            }
            let masses: f64 = (0..g.len()).map(|i| g.cell_mass(i).unwrap()).sum();
            prop_assert!((masses - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn exponent_maps_are_inverse(g in arb_grid()) {
            let there = inverse_adjusted_density(&tsp_adjusted_density(&g).unwrap()).unwrap();
            let back = tsp_adjusted_density(&inverse_adjusted_density(&g).unwrap()).unwrap();
            for ((a, b), c) in there.values().iter().zip(back.values()).zip(g.values()) {
                prop_assert!((a - c).abs() <= 1e-9);
                prop_assert!((b - c).abs() <= 1e-9);
            }
        }
    }
}
