//! Zero fill-in incomplete LU factorization.
//!
//! The factors share the sparsity pattern of the input: `L` (unit diagonal)
//! is stored strictly below the diagonal and `U` on and above it. No pivoting
//! is performed; an exactly zero pivot aborts the factorization.

use super::{CsrMatrix, LinalgError, Preconditioner};

#[derive(Debug, Clone)]
pub struct Ilu0 {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    lu: Vec<f64>,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn factor(a: &CsrMatrix) -> Result<Self, LinalgError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                got: a.ncols(),
            });
        }
        let row_offsets = a.row_offsets().to_vec();
        let col_indices = a.col_indices().to_vec();
        let mut lu = a.values().to_vec();

        let mut diag = vec![usize::MAX; n];
        for i in 0..n {
            for k in row_offsets[i]..row_offsets[i + 1] {
                if col_indices[k] == i {
                    diag[i] = k;
                }
            }
            if diag[i] == usize::MAX {
                return Err(LinalgError::ZeroPivot { row: i });
            }
        }

        // position lookup for row i, reset after each row
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            for k in lo..hi {
                pos[col_indices[k]] = k;
            }
            for k in lo..hi {
                let j = col_indices[k];
                if j >= i {
                    break;
                }
                let pivot = lu[diag[j]];
                let factor = lu[k] / pivot;
                lu[k] = factor;
                if factor == 0.0 {
                    continue;
                }
                for kk in diag[j] + 1..row_offsets[j + 1] {
                    let p = pos[col_indices[kk]];
                    if p != usize::MAX {
                        lu[p] -= factor * lu[kk];
                    }
                }
            }
            for k in lo..hi {
                pos[col_indices[k]] = usize::MAX;
            }
            if lu[diag[i]] == 0.0 || !lu[diag[i]].is_finite() {
                return Err(LinalgError::ZeroPivot { row: i });
            }
        }

        Ok(Self {
            n,
            row_offsets,
            col_indices,
            lu,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `L U z = r` by forward and backward substitution.
    pub fn solve_into(&self, r: &[f64], z: &mut [f64]) {
        assert_eq!(r.len(), self.n);
        z.copy_from_slice(r);
        for i in 0..self.n {
            let mut acc = z[i];
            for k in self.row_offsets[i]..self.diag[i] {
                acc -= self.lu[k] * z[self.col_indices[k]];
            }
            z[i] = acc;
        }
        for i in (0..self.n).rev() {
            let mut acc = z[i];
            for k in self.diag[i] + 1..self.row_offsets[i + 1] {
                acc -= self.lu[k] * z[self.col_indices[k]];
            }
            z[i] = acc / self.lu[self.diag[i]];
        }
    }

    /// Lower factor with unit diagonal, as a dense matrix (tests and debugging).
    pub fn lower_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut l = nalgebra::DMatrix::identity(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_offsets[i]..self.diag[i] {
                l[(i, self.col_indices[k])] = self.lu[k];
            }
        }
        l
    }

    pub fn upper_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut u = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.diag[i]..self.row_offsets[i + 1] {
                u[(i, self.col_indices[k])] = self.lu[k];
            }
        }
        u
    }
}

impl Preconditioner for Ilu0 {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.solve_into(r, z);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};

    #[test]
    fn diagonal_matrix_gives_trivial_lower_factor() {
        let a = CsrMatrix::from_triplets(3, 3, vec![(0, 0, 2.0), (1, 1, -3.0), (2, 2, 0.5)]);
        let f = Ilu0::factor(&a).unwrap();
        assert_eq!(f.lower_dense(), DMatrix::identity(3, 3));
        assert_eq!(f.upper_dense(), a.to_dense());
    }

    #[test]
    fn triangular_matrix_is_factored_exactly() {
        let a = CsrMatrix::from_triplets(
            3,
            3,
            vec![
                (0, 0, 2.0),
                (1, 0, 1.0),
                (1, 1, 4.0),
                (2, 0, -1.0),
                (2, 1, 3.0),
                (2, 2, 1.0),
            ],
        );
        let f = Ilu0::factor(&a).unwrap();
        let prod = f.lower_dense() * f.upper_dense();
        assert!((prod - a.to_dense()).abs().max() < 1e-15);
    }

    /// Dense Doolittle LU without pivoting, the reference for a full pattern.
    fn dense_lu_no_pivot(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = a.nrows();
        let mut l = DMatrix::identity(n, n);
        let mut u = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..i).map(|k| l[(i, k)] * u[(k, j)]).sum();
                u[(i, j)] = a[(i, j)] - s;
            }
            for j in i + 1..n {
                let s: f64 = (0..i).map(|k| l[(j, k)] * u[(k, i)]).sum();
                l[(j, i)] = (a[(j, i)] - s) / u[(i, i)];
            }
        }
        (l, u)
    }

    #[test]
    fn full_pattern_matches_dense_lu() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let a = DMatrix::from_fn(5, 5, |i, j| {
            let v: f64 = rng.random_range(-1.0..1.0);
            if i == j {
                v + 6.0
            } else {
                v
            }
        });
        let f = Ilu0::factor(&CsrMatrix::from_dense(&a)).unwrap();
        let (l, u) = dense_lu_no_pivot(&a);
        assert!((f.lower_dense() - l).abs().max() < 1e-13);
        assert!((f.upper_dense() - u).abs().max() < 1e-13);
    }

    #[test]
    fn zero_pivot_is_reported_with_row() {
        let a = CsrMatrix::from_triplets(
            2,
            2,
            vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)],
        );
        assert_eq!(
            Ilu0::factor(&a).unwrap_err(),
            LinalgError::ZeroPivot { row: 1 }
        );
        let missing = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0)]);
        assert_eq!(
            Ilu0::factor(&missing).unwrap_err(),
            LinalgError::ZeroPivot { row: 1 }
        );
    }
}
