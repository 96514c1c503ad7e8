//! Constant-speed curves through a tour and their occupation measure.

use std::path::Path;

use crate::density::DensityGrid;
use crate::error::{Error, Result};
use crate::partition;
use crate::sampler::PointSet;
use crate::stats::tv_between;
use crate::tsp::{check_permutation, Tour};

/// Polyline through the tour vertices, parameterized on `[0,1]` at constant
/// speed `total_length`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    vertices: PointSet,
    cumulative: Vec<f64>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.vertices.dim()
    }

    pub fn vertices(&self) -> &PointSet {
        &self.vertices
    }

    /// Prefix sums of segment lengths; starts at 0, ends at the total length.
    pub fn cumulative_lengths(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn total_length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn segment_count(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Point at arc length `arc` (clamped to `[0, T]`).
    pub fn at_arc_length(&self, arc: f64) -> Vec<f64> {
        let total = self.total_length();
        if arc >= total {
            return self.vertices.point(self.vertices.len() - 1).to_vec();
        }
        if arc <= 0.0 {
            return self.vertices.point(0).to_vec();
        }
        // Segment k spans cumulative[k]..cumulative[k+1].
        let k = self.cumulative.partition_point(|&c| c <= arc) - 1;
        self.interpolate(k, arc)
    }

    fn interpolate(&self, k: usize, arc: f64) -> Vec<f64> {
        let a = self.vertices.point(k);
        let b = self.vertices.point(k + 1);
        let len = self.cumulative[k + 1] - self.cumulative[k];
        let t = if len > 0.0 { ((arc - self.cumulative[k]) / len).clamp(0.0, 1.0) } else { 0.0 };
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    }

    /// `γ(s)` for `s ∈ [0,1]`.
    pub fn eval(&self, s: f64) -> Vec<f64> {
        if s >= 1.0 {
            return self.at_arc_length(f64::INFINITY);
        }
        self.at_arc_length(s * self.total_length())
    }

    /// CSV of vertices in visit order with a `# total_length=` comment.
    pub fn to_csv(&self) -> String {
        format!("# total_length={:?}\n{}", self.total_length(), self.vertices.to_csv())
    }

    pub fn parse_csv(text: &str) -> Result<Trajectory> {
        let vertices = PointSet::parse_csv(text)?;
        let order: Vec<usize> = (0..vertices.len()).collect();
        from_ordered(vertices, &order)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

fn from_ordered(ps: PointSet, order: &[usize]) -> Result<Trajectory> {
    if ps.len() < 2 {
        return Err(Error::DegeneratePath);
    }
    let vertices = ps.reordered(order);
    let mut cumulative = Vec::with_capacity(vertices.len());
    cumulative.push(0.0);
    let mut acc = 0.0;
    for k in 1..vertices.len() {
        let a = vertices.point(k - 1);
        let b = vertices.point(k);
        acc += a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        cumulative.push(acc);
    }
    if acc.is_nan() || acc <= 0.0 {
        return Err(Error::DegeneratePath);
    }
    Ok(Trajectory { vertices, cumulative })
}

/// Builds the constant-speed curve visiting `ps` in tour order.
pub fn parameterize(ps: &PointSet, tour: &Tour) -> Result<Trajectory> {
    check_permutation(&tour.order, ps.len())?;
    from_ordered(ps.clone(), &tour.order)
}

/// Points at arc lengths `0, Δt, 2Δt, …` not exceeding `T`; there are
/// `⌊T/Δt⌋ + 1` of them.
pub fn resample(traj: &Trajectory, delta_t: f64) -> Result<PointSet> {
    if !delta_t.is_finite() || delta_t <= 0.0 {
        return Err(Error::InvalidStep(delta_t));
    }
    let total = traj.total_length();
    let count = (total / delta_t).floor() as usize + 1;
    let mut coords = Vec::with_capacity(count * traj.dim());
    let mut seg = 0;
    let last_seg = traj.segment_count() - 1;
    for i in 0..count {
        let arc = (i as f64 * delta_t).min(total);
        while seg < last_seg && traj.cumulative[seg + 1] <= arc {
            seg += 1;
        }
        coords.extend(traj.interpolate(seg, arc));
    }
    PointSet::new(traj.dim(), coords, traj.vertices.seed())
}

/// Fraction of arc length spent in each cell of an `m^d` partition.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    dim: usize,
    m: usize,
    masses: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(dim: usize, m: usize, masses: Vec<f64>) -> Result<Self> {
        let expected = partition::cell_count(dim, m);
        if masses.len() != expected {
            return Err(Error::ShapeMismatch { expected, got: masses.len() });
        }
        if let Some(i) = masses.iter().position(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::NegativeValue(i));
        }
        Ok(EmpiricalDistribution { dim, m, masses })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Sums blocks of `(m / coarse)^d` cells; `coarse` must divide `m`.
    pub fn aggregate(&self, coarse: usize) -> Result<EmpiricalDistribution> {
        if coarse == 0 || !self.m.is_multiple_of(coarse) {
            return Err(Error::ResolutionMismatch(self.m, coarse));
        }
        let factor = self.m / coarse;
        let mut out = vec![0.0; partition::cell_count(self.dim, coarse)];
        for (idx, &w) in self.masses.iter().enumerate() {
            let key = partition::unflatten(idx, self.dim, self.m).iter().fold(0, |acc, &i| acc * coarse + i / factor);
            out[key] += w;
        }
        EmpiricalDistribution::new(self.dim, coarse, out)
    }

    /// As a density grid (mass per unit volume).
    pub fn to_density(&self) -> Result<DensityGrid> {
        let scale = self.masses.len() as f64;
        DensityGrid::new(self.dim, self.m, self.masses.iter().map(|w| w * scale).collect())
    }

    /// The density file format with a `kind=empirical` header token.
    pub fn to_text(&self) -> Result<String> {
        Ok(self.to_density()?.to_text_with_kind(Some("empirical")))
    }

    pub fn parse_text(text: &str) -> Result<EmpiricalDistribution> {
        let (grid, kind) = DensityGrid::parse_text(text)?;
        if kind.as_deref() != Some("empirical") {
            return Err(Error::Parse("expected kind=empirical".into()));
        }
        EmpiricalDistribution::new(grid.dim(), grid.resolution(), grid.cell_masses())
    }
}

/// Exact occupation masses of `traj` over the `m^d` partition.
///
/// Each segment is cut at every plane `x_j = k/m` it crosses; every piece
/// contributes its length to the cell containing its midpoint.
pub fn empirical_distribution(traj: &Trajectory, m: usize) -> Result<EmpiricalDistribution> {
    if m == 0 {
        return Err(Error::InvalidResolution(m));
    }
    let dim = traj.dim();
    let mut masses = vec![0.0; partition::cell_count(dim, m)];
    let mut cuts = Vec::new();
    let mut mid = vec![0.0; dim];
    let mf = m as f64;
    for k in 0..traj.segment_count() {
        let a = traj.vertices.point(k);
        let b = traj.vertices.point(k + 1);
        let len = traj.cumulative[k + 1] - traj.cumulative[k];
        if len == 0.0 {
            continue;
        }
        cuts.clear();
        cuts.push(0.0);
        cuts.push(1.0);
        for j in 0..dim {
            let (lo, hi) = if a[j] <= b[j] { (a[j], b[j]) } else { (b[j], a[j]) };
            if hi == lo {
                continue;
            }
            let first = (lo * mf).floor() as i64 + 1;
            let last = (hi * mf).ceil() as i64 - 1;
            for plane in first..=last {
                let t = (plane as f64 / mf - a[j]) / (b[j] - a[j]);
                if t > 0.0 && t < 1.0 {
                    cuts.push(t);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        for w in cuts.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            if t1 <= t0 {
                continue;
            }
            let tm = 0.5 * (t0 + t1);
            for j in 0..dim {
                mid[j] = a[j] + tm * (b[j] - a[j]);
            }
            masses[partition::cell_of(&mid, m)] += (t1 - t0) * len;
        }
    }
    let total = traj.total_length();
    for w in &mut masses {
        *w /= total;
    }
    EmpiricalDistribution::new(dim, m, masses)
}

/// Total variation distance between an occupation distribution and a
/// density's cell masses at the same resolution.
pub fn tv_distance(a: &EmpiricalDistribution, b: &DensityGrid) -> Result<f64> {
    if a.m != b.resolution() {
        return Err(Error::ResolutionMismatch(a.m, b.resolution()));
    }
    if a.dim != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim, got: b.dim() });
    }
    let target = crate::density::normalize(b)?.cell_masses();
    Ok(tv_between(&a.masses, &target).clamp(0.0, 1.0))
}
