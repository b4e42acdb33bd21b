//! Sparse and small dense numerical kernels.
//!
//! Everything the Newton driver needs at FEM scale lives here: CSR storage,
//! block-diagonal factors for subspace bases, the ILU(0) preconditioner,
//! restarted GMRES, the power-method estimate of the largest eigenvalue and
//! a dense LU fallback for small systems.

mod block;
mod csr;
mod dense;
mod gmres;
mod ilu;
mod power;

pub use block::{BlockDiagonal, DiagBlock};
pub use csr::CsrMatrix;
pub use dense::dense_solve;
pub use gmres::{gmres_solve, GmresOptions, GmresOutcome};
pub use ilu::Ilu0;
pub use power::estimate_gamma;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("zero pivot in incomplete factorization at row {row}")]
    ZeroPivot { row: usize },
    #[error(
        "GMRES stagnated after {iterations} iterations (relative residual {relative_residual:.3e})"
    )]
    Stagnation {
        iterations: usize,
        relative_residual: f64,
    },
    #[error("matrix is numerically singular")]
    Singular,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A square linear map `x -> A x`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Approximate inverse used by GMRES, `z ~= A^{-1} r`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

/// The trivial preconditioner.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
