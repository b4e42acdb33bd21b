use nalgebra::{DMatrix, DVector};

use super::{CsrMatrix, LinalgError};

/// Pivots smaller than this multiple of the largest pivot count as zero.
const SINGULAR_PIVOT_RATIO: f64 = 1e-14;

/// Direct solve through a dense partially pivoted LU.
///
/// Meant for small systems (synthetic tests, tiny models); the matrix is
/// densified first.
pub fn dense_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let lu = a.to_dense().lu();
    let u: DMatrix<f64> = lu.u();
    let pivots = u.diagonal();
    let largest = pivots.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let smallest = pivots.iter().fold(f64::INFINITY, |m, p| m.min(p.abs()));
    if largest == 0.0 || smallest <= SINGULAR_PIVOT_RATIO * largest {
        return Err(LinalgError::Singular);
    }
    lu.solve(&DVector::from_column_slice(b))
        .map(|x| x.as_slice().to_vec())
        .ok_or(LinalgError::Singular)
}
