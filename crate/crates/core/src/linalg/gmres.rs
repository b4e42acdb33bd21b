//! Restarted GMRES with right preconditioning.
//!
//! Right preconditioning makes the minimized quantity the true
//! (non-preconditioned) residual, so the stopping test `||b - A x|| <= tol ||b||`
//! is checked on the quantity the Newton driver cares about. Every restart
//! recomputes the true residual explicitly before accepting convergence.

use super::{norm2, LinalgError, LinearOperator, Preconditioner};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    /// Relative residual target on the non-preconditioned system.
    pub tol: f64,
    /// Krylov dimension per cycle.
    pub restart: usize,
    /// Cap on the total number of inner iterations over all cycles.
    pub max_inner: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            tol: 0.1,
            restart: 200,
            max_inner: 2000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    /// Total inner iterations (Krylov vectors generated) over all cycles.
    pub iterations: usize,
    /// True relative residual `||b - A x|| / ||b||` at exit.
    pub relative_residual: f64,
    /// Estimated relative residual after every inner iteration.
    pub history: Vec<f64>,
}

pub fn gmres_solve(
    a: &dyn LinearOperator,
    b: &[f64],
    precond: &dyn Preconditioner,
    opts: &GmresOptions,
) -> Result<GmresOutcome, LinalgError> {
    let n = a.dim();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let restart = opts.restart.max(1);
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    let mut history = Vec::new();
    if bnorm == 0.0 {
        return Ok(GmresOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
            history,
        });
    }
    let target = opts.tol * bnorm;

    let mut total = 0usize;
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(restart + 1);
    // Hessenberg columns, each of length restart + 1
    let mut h: Vec<Vec<f64>> = Vec::with_capacity(restart);
    let mut cs = vec![0.0; restart];
    let mut sn = vec![0.0; restart];
    let mut g = vec![0.0; restart + 1];

    loop {
        a.apply(&x, &mut w);
        for i in 0..n {
            r[i] = b[i] - w[i];
        }
        let beta = norm2(&r);
        if beta <= target {
            return Ok(GmresOutcome {
                x,
                iterations: total,
                relative_residual: beta / bnorm,
                history,
            });
        }
        if total >= opts.max_inner {
            return Err(LinalgError::Stagnation {
                iterations: total,
                relative_residual: beta / bnorm,
            });
        }

        basis.clear();
        h.clear();
        g.iter_mut().for_each(|v| *v = 0.0);
        g[0] = beta;
        basis.push(r.iter().map(|v| v / beta).collect());

        let mut m = 0;
        while m < restart && total < opts.max_inner {
            let j = m;
            precond.apply(&basis[j], &mut z);
            a.apply(&z, &mut w);
            let mut col = vec![0.0; restart + 1];
            for (i, v) in basis.iter().enumerate() {
                let hij = super::dot(&w, v);
                col[i] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            let hnext = norm2(&w);
            col[j + 1] = hnext;

            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let denom = col[j].hypot(col[j + 1]);
            if denom == 0.0 {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = col[j] / denom;
                sn[j] = col[j + 1] / denom;
            }
            col[j] = denom;
            col[j + 1] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            h.push(col);

            total += 1;
            m += 1;
            let estimate = g[j + 1].abs();
            history.push(estimate / bnorm);
            if estimate <= target || hnext == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / hnext).collect());
        }

        // back substitution for the m x m triangular system
        let mut y = vec![0.0; m];
        for i in (0..m).rev() {
            let mut acc = g[i];
            for k in i + 1..m {
                acc -= h[k][i] * y[k];
            }
            y[i] = if h[i][i] != 0.0 { acc / h[i][i] } else { 0.0 };
        }
        let mut u = vec![0.0; n];
        for (yk, vk) in y.iter().zip(&basis) {
            for (ui, vi) in u.iter_mut().zip(vk) {
                *ui += yk * vi;
            }
        }
        precond.apply(&u, &mut z);
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi += zi;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CsrMatrix, IdentityPreconditioner, Ilu0};

    #[test]
    fn identity_system_converges_in_one_iteration() {
        let a = CsrMatrix::identity(4);
        let b = [1.0, -2.0, 3.0, 0.5];
        let out = gmres_solve(
            &a,
            &b,
            &IdentityPreconditioner,
            &GmresOptions {
                tol: 1e-12,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(out.iterations, 1);
        for (x, y) in out.x.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn two_by_two_is_exact_within_two_iterations() {
        let a = CsrMatrix::from_dense(&nalgebra::DMatrix::from_row_slice(
            2,
            2,
            &[3.0, 1.0, -2.0, 0.5],
        ));
        let b = [1.0, 4.0];
        let out = gmres_solve(
            &a,
            &b,
            &IdentityPreconditioner,
            &GmresOptions {
                tol: 1e-13,
                restart: 2,
                max_inner: 10,
            },
        )
        .unwrap();
        assert!(out.iterations <= 2);
        assert!(out.relative_residual <= 1e-13);
    }

    #[test]
    fn ilu_on_triangular_matrix_needs_one_iteration() {
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
        let ilu = Ilu0::factor(&a).unwrap();
        let out = gmres_solve(
            &a,
            &[1.0, 2.0, 3.0],
            &ilu,
            &GmresOptions {
                tol: 1e-12,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn stagnation_is_reported() {
        // a rotation-like operator where short Krylov spaces make no progress
        let n = 8;
        let triplets = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        let a = CsrMatrix::from_triplets(n, n, triplets);
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        let err = gmres_solve(
            &a,
            &b,
            &IdentityPreconditioner,
            &GmresOptions {
                tol: 1e-10,
                restart: 3,
                max_inner: 12,
            },
        )
        .unwrap_err();
        assert!(matches!(
            err,
            LinalgError::Stagnation { iterations: 12, .. }
        ));
    }
}
