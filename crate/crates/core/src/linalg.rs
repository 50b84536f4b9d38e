//! Dense helpers shared by the ranking routines.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};

pub fn require_square(a: ArrayView2<'_, f64>) -> Result<usize> {
    let (rows, cols) = a.dim();
    if rows != cols {
        return Err(Error::InvalidArgument(format!("matrix is {rows}x{cols}, expected square")));
    }
    Ok(rows)
}

/// Fails on the first negative or non-finite entry.
pub fn require_nonnegative(a: ArrayView2<'_, f64>) -> Result<()> {
    for ((row, column), &v) in a.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row, column });
        }
        if v < 0.0 {
            return Err(Error::NegativeEntry { row, column });
        }
    }
    Ok(())
}

/// Upper bound on the spectral radius of a nonnegative matrix from its
/// average 2-row sums, `max_i (sum_j a_ij r_j) / r_i` with `r` the row sums.
/// Falls back to the largest row sum when a row sum vanishes, and returns
/// the smaller of the two bounds otherwise.
pub fn average_two_row_sum_bound(a: ArrayView2<'_, f64>) -> f64 {
    let row_sums: Array1<f64> = a.sum_axis(ndarray::Axis(1));
    let max_row = row_sums.iter().copied().fold(0.0, f64::max);
    if row_sums.iter().any(|&r| r == 0.0) {
        return max_row;
    }
    let two_row = a.dot(&row_sums);
    let bound = two_row
        .iter()
        .zip(row_sums.iter())
        .map(|(t, r)| t / r)
        .fold(0.0, f64::max);
    bound.min(max_row)
}

fn to_nalgebra(a: ArrayView2<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// `I - r A`.
pub fn shifted_identity(a: ArrayView2<'_, f64>, r: f64) -> Array2<f64> {
    let n = a.nrows();
    let mut m = a.mapv(|v| -r * v);
    for i in 0..n {
        m[[i, i]] += 1.0;
    }
    m
}

/// Solves `M x = b` by LU with partial pivoting. `None` if `M` is singular.
pub fn lu_solve(m: ArrayView2<'_, f64>, b: &[f64]) -> Option<Vec<f64>> {
    let lu = to_nalgebra(m).lu();
    lu.solve(&DVector::from_column_slice(b)).map(|x| x.as_slice().to_vec())
}

/// Inverse by LU with partial pivoting. `None` if singular.
pub fn lu_inverse(m: ArrayView2<'_, f64>) -> Option<Array2<f64>> {
    let n = m.nrows();
    let inv = to_nalgebra(m).lu().try_inverse()?;
    Some(Array2::from_shape_fn((n, n), |(i, j)| inv[(i, j)]))
}

pub fn inf_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
