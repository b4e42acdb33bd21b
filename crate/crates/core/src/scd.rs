//! Interface for SCD multifunctions and a few elementary instances.
//!
//! Graph points are written `(x, y)` with `y in Q(x)`. The resolvent
//! convention throughout the crate is `v = (gamma I + Q)^{-1}(w)`, so that
//! `(v, w - gamma v)` lies on the graph of `Q`.

use nalgebra::{DMatrix, DVector};

use crate::coulomb::StratumCensus;
use crate::error::ScdError;
use crate::subspaces::{BlockBasis, Side, SubspaceBasis};

/// Relative tolerance for graph membership tests (`tol * (1 + scale)`).
pub const GRAPH_TOL: f64 = 1e-10;

pub trait ScdMap: Send + Sync {
    fn dim(&self) -> usize;

    /// `(gamma I + Q)^{-1}(w)`.
    fn resolvent(&self, gamma: f64, w: &[f64]) -> Result<Vec<f64>, ScdError>;

    /// Absolute violation of `y in Q(x)`; zero on the graph.
    fn graph_residual(&self, x: &[f64], y: &[f64]) -> f64;

    /// One element of `S Q(x, y)` (primal, basis `(X, Y)`) or of `S* Q(x, y)`
    /// (dual, basis `(Y*, X*)`).
    fn select_subspace(&self, x: &[f64], y: &[f64], side: Side) -> Result<BlockBasis, ScdError>;

    /// Per-stratum counts, for maps built from contact cells.
    fn census(&self, _x: &[f64], _y: &[f64]) -> Option<StratumCensus> {
        None
    }
}

fn check_dims(n: usize, x: &[f64], y: &[f64]) -> Result<(), ScdError> {
    for v in [x, y] {
        if v.len() != n {
            return Err(ScdError::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
    }
    Ok(())
}

/// `Q = {0}` on `R^n`.
#[derive(Debug, Clone, Copy)]
pub struct ZeroMap {
    n: usize,
}

impl ZeroMap {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl ScdMap for ZeroMap {
    fn dim(&self) -> usize {
        self.n
    }

    fn resolvent(&self, gamma: f64, w: &[f64]) -> Result<Vec<f64>, ScdError> {
        Ok(w.iter().map(|wi| wi / gamma).collect())
    }

    fn graph_residual(&self, _x: &[f64], y: &[f64]) -> f64 {
        y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn select_subspace(&self, x: &[f64], y: &[f64], _side: Side) -> Result<BlockBasis, ScdError> {
        check_dims(self.n, x, y)?;
        Ok(BlockBasis::from_blocks(Vec::new(), self.n))
    }
}

/// Normal cone to the half line, `y in N_{R+}(x)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NormalConeRplus;

pub fn normal_cone_rplus() -> NormalConeRplus {
    NormalConeRplus
}

impl ScdMap for NormalConeRplus {
    fn dim(&self) -> usize {
        1
    }

    fn resolvent(&self, gamma: f64, w: &[f64]) -> Result<Vec<f64>, ScdError> {
        check_dims(1, w, w)?;
        Ok(vec![w[0].max(0.0) / gamma])
    }

    fn graph_residual(&self, x: &[f64], y: &[f64]) -> f64 {
        let (x, y) = (x[0], y[0]);
        (-x).max(0.0) + y.max(0.0) + x.abs().min(y.abs())
    }

    /// `rge(1, 0)` for `x > 0` and, by convention, at the origin; `rge(0, 1)`
    /// when `y < 0`. The one-dimensional subspaces are self-dual.
    fn select_subspace(&self, x: &[f64], y: &[f64], _side: Side) -> Result<BlockBasis, ScdError> {
        check_dims(1, x, y)?;
        let tol = GRAPH_TOL * (1.0 + x[0].abs() + y[0].abs());
        let (xv, yv) = (x[0], y[0]);
        if xv < -tol {
            return Err(ScdError::GraphViolation {
                relation: "x >= 0",
                residual: -xv,
                block: None,
            });
        }
        if yv > tol {
            return Err(ScdError::GraphViolation {
                relation: "y <= 0",
                residual: yv,
                block: None,
            });
        }
        let comp = xv.abs().min(yv.abs());
        if comp > tol {
            return Err(ScdError::GraphViolation {
                relation: "x y = 0",
                residual: comp,
                block: None,
            });
        }
        let basis = if yv < -tol {
            SubspaceBasis::fixed(1)
        } else {
            SubspaceBasis::free(1)
        };
        Ok(BlockBasis::from_dense(basis))
    }
}

type VecFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JacFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

/// Single-valued `Q = f` with a known Jacobian.
pub struct SmoothMap {
    n: usize,
    f: Box<VecFn>,
    jac: Box<JacFn>,
}

pub const SMOOTH_RESOLVENT_MAX_ITERS: usize = 100;

impl SmoothMap {
    pub fn new<F, J>(n: usize, f: F, jac: J) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        J: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self {
            n,
            f: Box::new(f),
            jac: Box::new(jac),
        }
    }

    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        (self.jac)(x)
    }
}

pub fn smooth_map<F, J>(n: usize, f: F, jac: J) -> SmoothMap
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    J: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
{
    SmoothMap::new(n, f, jac)
}

impl ScdMap for SmoothMap {
    fn dim(&self) -> usize {
        self.n
    }

    /// Damped Newton on `gamma v + f(v) = w`, started at `w / gamma`.
    fn resolvent(&self, gamma: f64, w: &[f64]) -> Result<Vec<f64>, ScdError> {
        check_dims(self.n, w, w)?;
        let w = DVector::from_column_slice(w);
        let residual = |v: &DVector<f64>| -> DVector<f64> {
            let fv = DVector::from_vec((self.f)(v.as_slice()));
            v * gamma + fv - &w
        };
        let mut v = &w / gamma;
        let mut r = residual(&v);
        let target = 1e-14 * (1.0 + w.norm());
        for _ in 0..SMOOTH_RESOLVENT_MAX_ITERS {
            let rn = r.norm();
            if rn <= target {
                return Ok(v.as_slice().to_vec());
            }
            let mut m = (self.jac)(v.as_slice());
            for i in 0..self.n {
                m[(i, i)] += gamma;
            }
            let Some(step) = m.lu().solve(&(-&r)) else {
                break;
            };
            let mut t = 1.0;
            loop {
                let trial = &v + &step * t;
                let rt = residual(&trial);
                if rt.norm() < rn || t < 1e-10 {
                    v = trial;
                    r = rt;
                    break;
                }
                t *= 0.5;
            }
        }
        if r.norm() <= target {
            return Ok(v.as_slice().to_vec());
        }
        Err(ScdError::NoConvergence {
            iterations: SMOOTH_RESOLVENT_MAX_ITERS,
        })
    }

    fn graph_residual(&self, x: &[f64], y: &[f64]) -> f64 {
        let fx = (self.f)(x);
        fx.iter()
            .zip(y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Primal `rge(I, J)`, dual `rge(I, J^T)`.
    fn select_subspace(&self, x: &[f64], y: &[f64], side: Side) -> Result<BlockBasis, ScdError> {
        check_dims(self.n, x, y)?;
        let residual = self.graph_residual(x, y);
        let scale = 1.0 + y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if residual > GRAPH_TOL * scale {
            return Err(ScdError::GraphViolation {
                relation: "y = f(x)",
                residual,
                block: None,
            });
        }
        let j = (self.jac)(x);
        let b = match side {
            Side::Primal => j,
            Side::Dual => j.transpose(),
        };
        Ok(BlockBasis::from_dense(SubspaceBasis::new(
            DMatrix::identity(self.n, self.n),
            b,
        )?))
    }
}
