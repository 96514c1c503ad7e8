//! Reproducible i.i.d. point drawing from piecewise-constant densities.

use std::path::Path;

use crate::density::DensityGrid;
use crate::error::{Error, Result};
use crate::partition;
use crate::rng::Stream;

/// An ordered set of points in `[0,1]^d`, stored flat (`dim` coordinates per
/// point), with the seed that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    seed: u64,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::ShapeMismatch { expected: coords.len().div_ceil(dim) * dim, got: coords.len() });
        }
        if let Some((i, &v)) = coords.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::CoordinateOutOfRange { point: i / dim, value: v });
        }
        Ok(PointSet { dim, coords, seed })
    }

    pub fn from_points(dim: usize, points: &[Vec<f64>], seed: u64) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
        }
        PointSet::new(dim, points.concat(), seed)
    }

    pub fn empty(dim: usize, seed: u64) -> Self {
        PointSet { dim, coords: Vec::new(), seed }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Points reordered by `order`.
    pub fn reordered(&self, order: &[usize]) -> PointSet {
        let coords = order.iter().flat_map(|&i| self.point(i).iter().copied()).collect();
        PointSet { dim: self.dim, coords, seed: self.seed }
    }

    /// First `n` points.
    pub fn prefix(&self, n: usize) -> PointSet {
        let n = n.min(self.len());
        PointSet { dim: self.dim, coords: self.coords[..n * self.dim].to_vec(), seed: self.seed }
    }

    /// CSV with a `# seed=` comment line and an `x,y[,z,...]` header.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# seed={}\n{}\n", self.seed, axis_names(self.dim).join(","));
        for p in self.iter() {
            let row: Vec<String> = p.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<PointSet> {
        let mut seed = 0;
        let mut dim = None;
        let mut coords = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(s) = comment.trim().strip_prefix("seed=") {
                    seed = s.trim().parse().map_err(|_| Error::Parse(format!("bad seed {s:?}")))?;
                }
                continue;
            }
            match dim {
                None => {
                    let names: Vec<&str> = line.split(',').map(str::trim).collect();
                    if names != axis_names(names.len()) {
                        return Err(Error::Parse(format!("bad point header {line:?}")));
                    }
                    dim = Some(names.len());
                }
                Some(d) => {
                    let row: Vec<f64> = line
                        .split(',')
                        .map(|v| v.trim().parse().map_err(|_| Error::Parse(format!("bad coordinate {v:?}"))))
                        .collect::<Result<_>>()?;
                    if row.len() != d {
                        return Err(Error::DimensionMismatch { expected: d, got: row.len() });
                    }
                    coords.extend(row);
                }
            }
        }
        let dim = dim.ok_or_else(|| Error::Parse("missing point header".into()))?;
        PointSet::new(dim, coords, seed)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<PointSet> {
        PointSet::parse_csv(&std::fs::read_to_string(path)?)
    }
}

fn axis_names(dim: usize) -> Vec<String> {
    (0..dim)
        .map(|k| match k {
            0 => "x".to_string(),
            1 => "y".to_string(),
            2 => "z".to_string(),
            _ => format!("x{k}"),
        })
        .collect()
}

/// Cumulative cell-mass table for inverse-CDF cell selection.
struct CellTable {
    cumulative: Vec<f64>,
}

impl CellTable {
    fn new(g: &DensityGrid) -> Self {
        let mut acc = 0.0;
        let cumulative = g
            .values()
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect();
        CellTable { cumulative }
    }

    /// First cell whose cumulative mass exceeds `u · total`; never a
    /// zero-mass cell.
    fn select(&self, u: f64) -> usize {
        let total = *self.cumulative.last().unwrap();
        let target = u * total;
        let idx = self.cumulative.partition_point(|&c| c <= target);
        if idx < self.cumulative.len() {
            return idx;
        }
        // u·total rounded up to total: take the last cell with positive mass.
        let last = self.cumulative.len() - 1;
        (0..=last).rev().find(|&i| i == 0 || self.cumulative[i] > self.cumulative[i - 1]).unwrap()
    }
}

/// Endless i.i.d. stream of points from a density.
///
/// Each point consumes `1 + d` uniforms: one to select a cell by inverse
/// CDF, then one per axis to place the point uniformly inside the cell.
pub struct PointStream<'a> {
    grid: &'a DensityGrid,
    table: CellTable,
    stream: Stream,
    multi: Vec<usize>,
}

impl<'a> PointStream<'a> {
    pub fn new(grid: &'a DensityGrid, seed: u64) -> Self {
        PointStream { grid, table: CellTable::new(grid), stream: Stream::new(seed), multi: vec![0; grid.dim()] }
    }

    /// Appends the next point's coordinates to `out`.
    pub fn next_into(&mut self, out: &mut Vec<f64>) {
        let r = self.grid.resolution();
        let mut cell = self.table.select(self.stream.unit());
        for slot in self.multi.iter_mut().rev() {
            *slot = cell % r;
            cell /= r;
        }
        for &i in &self.multi {
            let x = (i as f64 + self.stream.unit()) / r as f64;
            out.push(x.min(1.0));
        }
    }
}

/// Draws `n` i.i.d. points from `g`. The result is a prefix of any longer
/// draw with the same seed.
pub fn draw_points(g: &DensityGrid, n: usize, seed: u64) -> PointSet {
    let mut stream = PointStream::new(g, seed);
    let mut coords = Vec::with_capacity(n * g.dim());
    for _ in 0..n {
        stream.next_into(&mut coords);
    }
    PointSet { dim: g.dim(), coords, seed }
}

/// Number of points in each cell of the `m^d` partition.
pub fn empirical_cell_histogram(ps: &PointSet, m: usize) -> Vec<u64> {
    assert!(m >= 1, "partition resolution must be positive");
    let mut counts = vec![0u64; partition::cell_count(ps.dim(), m)];
    for p in ps.iter() {
        counts[partition::cell_of(p, m)] += 1;
    }
    counts
}
