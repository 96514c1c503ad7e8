//! Index arithmetic for the regular `m^d` partition of the unit hypercube.
//!
//! Cells are addressed row-major with the last axis fastest; coordinate `k`
//! of a point selects the index along axis `k`. A coordinate equal to 1.0
//! belongs to the last cell of its axis.

/// Cell index along one axis for coordinate `x` at resolution `m`.
#[inline]
pub fn axis_cell(x: f64, m: usize) -> usize {
    let scaled = x * m as f64;
    if scaled <= 0.0 {
        0
    } else {
        (scaled.floor() as usize).min(m - 1)
    }
}

/// Flat cell index of a point.
#[inline]
pub fn cell_of(point: &[f64], m: usize) -> usize {
    point.iter().fold(0, |acc, &x| acc * m + axis_cell(x, m))
}

/// Number of cells in a `m^d` partition.
pub fn cell_count(dim: usize, m: usize) -> usize {
    m.pow(dim as u32)
}

/// Multi-index of a flat cell index.
pub fn unflatten(mut index: usize, dim: usize, m: usize) -> Vec<usize> {
    let mut out = vec![0; dim];
    for slot in out.iter_mut().rev() {
        *slot = index % m;
        index /= m;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_boundary_maps_to_last_cell() {
        assert_eq!(axis_cell(1.0, 4), 3);
        assert_eq!(axis_cell(0.0, 4), 0);
        assert_eq!(axis_cell(0.25, 4), 1);
        assert_eq!(axis_cell(0.2499, 4), 0);
    }

    #[test]
    fn flat_index_round_trips() {
        for idx in 0..27 {
            let multi = unflatten(idx, 3, 3);
            let center: Vec<f64> = multi.iter().map(|&i| (i as f64 + 0.5) / 3.0).collect();
            assert_eq!(cell_of(&center, 3), idx);
        }
    }
}
