//! Semismooth* Newton driver for `0 in f(x) + Q(x)`.
//!
//! The inclusion is solved through its decoupled form
//! `0 in (f(x) + Q(d), x - d)`. Every iteration projects onto the graph with
//! the resolvent (approximation step), builds a reduced `n x n` Newton system
//! from one subspace of `Q` at the projected point, and globalizes with a
//! non-monotone line search on the residual `||y_hat||`.

use std::borrow::Cow;

use thiserror::Error;

use crate::coulomb::StratumCensus;
use crate::error::ScdError;
use crate::linalg::{
    dense_solve, estimate_gamma, gmres_solve, CsrMatrix, GmresOptions, Ilu0, LinalgError,
};
use crate::scd::ScdMap;
use crate::subspaces::{BlockBasis, Side};

pub trait GeProblem {
    fn dim(&self) -> usize;
    fn f(&self, x: &[f64]) -> Vec<f64>;
    fn jacobian(&self, x: &[f64]) -> Cow<'_, CsrMatrix>;
    fn q(&self) -> &dyn ScdMap;
}

/// `f(x) = A x - l`.
pub struct AffineGe<Q> {
    a: CsrMatrix,
    l: Vec<f64>,
    q: Q,
}

impl<Q: ScdMap> AffineGe<Q> {
    pub fn new(a: CsrMatrix, l: Vec<f64>, q: Q) -> Self {
        assert_eq!(a.nrows(), a.ncols(), "system matrix must be square");
        assert_eq!(a.nrows(), l.len(), "right-hand side length");
        assert_eq!(a.nrows(), q.dim(), "multifunction dimension");
        Self { a, l, q }
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.l
    }

    pub fn map(&self) -> &Q {
        &self.q
    }
}

impl<Q: ScdMap> GeProblem for AffineGe<Q> {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn f(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.a.mul_vec(x);
        for (yi, li) in y.iter_mut().zip(&self.l) {
            *yi -= li;
        }
        y
    }

    fn jacobian(&self, _x: &[f64]) -> Cow<'_, CsrMatrix> {
        Cow::Borrowed(&self.a)
    }

    fn q(&self) -> &dyn ScdMap {
        &self.q
    }
}

type VecFn = dyn Fn(&[f64]) -> Vec<f64>;
type CsrFn = dyn Fn(&[f64]) -> CsrMatrix;

/// Generalized equation with a user supplied nonlinear `f`.
pub struct FnGe<Q> {
    n: usize,
    f: Box<VecFn>,
    jac: Box<CsrFn>,
    q: Q,
}

impl<Q: ScdMap> FnGe<Q> {
    pub fn new<F, J>(f: F, jac: J, q: Q) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + 'static,
        J: Fn(&[f64]) -> CsrMatrix + 'static,
    {
        Self {
            n: q.dim(),
            f: Box::new(f),
            jac: Box::new(jac),
            q,
        }
    }
}

impl<Q: ScdMap> GeProblem for FnGe<Q> {
    fn dim(&self) -> usize {
        self.n
    }

    fn f(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }

    fn jacobian(&self, x: &[f64]) -> Cow<'_, CsrMatrix> {
        Cow::Owned((self.jac)(x))
    }

    fn q(&self) -> &dyn ScdMap {
        &self.q
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaChoice {
    Fixed(f64),
    /// Power-method estimate of the largest eigenvalue of the Jacobian at `x0`.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// Newton system built from an adjoint subspace `(Y*, X*)`.
    #[default]
    DualA,
    /// Newton system built from a primal subspace `(X, Y)`.
    PrimalB,
}

/// Systems up to this size are solved directly under [`LinearSolver::Auto`].
pub const AUTO_DIRECT_MAX_DIM: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearSolver {
    /// Dense LU; intended for small systems.
    Direct,
    /// GMRES with ILU(0), relative residual target on the unpreconditioned system.
    Gmres(GmresOptions),
    /// [`LinearSolver::Direct`] up to [`AUTO_DIRECT_MAX_DIM`], GMRES beyond.
    Auto(GmresOptions),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub gamma: GammaChoice,
    pub newton_rel_tol: f64,
    pub max_iters: usize,
    pub variant: Variant,
    pub linear_solver: LinearSolver,
    pub line_search: bool,
    /// Store every iterate in [`SolverTrace::iterates`].
    pub keep_iterates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma: GammaChoice::Auto,
            newton_rel_tol: 1e-12,
            max_iters: 100,
            variant: Variant::DualA,
            linear_solver: LinearSolver::Auto(GmresOptions::default()),
            line_search: true,
            keep_iterates: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), &'static str> {
        if let GammaChoice::Fixed(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err("gamma must be positive and finite");
            }
        }
        if !(self.newton_rel_tol > 0.0) {
            return Err("newton_rel_tol must be positive");
        }
        if self.max_iters == 0 {
            return Err("max_iters must be at least 1");
        }
        if let LinearSolver::Gmres(o) | LinearSolver::Auto(o) = self.linear_solver {
            if !(o.tol > 0.0) || o.restart == 0 || o.max_inner == 0 {
                return Err("GMRES options must be positive");
            }
        }
        Ok(())
    }
}

/// Output of the approximation step at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphPointGe {
    pub x: Vec<f64>,
    pub d: Vec<f64>,
    /// `gamma (x - d)`.
    pub y1: Vec<f64>,
    /// `x - d`.
    pub y2: Vec<f64>,
    /// The point of `Q(d)` used for subspace selection, `y1 - f(x)`.
    pub z: Vec<f64>,
    pub gamma: f64,
}

impl GraphPointGe {
    pub fn residual_norm(&self) -> f64 {
        let s: f64 = self.y1.iter().chain(&self.y2).map(|v| v * v).sum();
        s.sqrt()
    }
}

pub fn approximation_step(
    x: &[f64],
    gamma: f64,
    prob: &dyn GeProblem,
) -> Result<GraphPointGe, ScdError> {
    let fx = prob.f(x);
    let w: Vec<f64> = x.iter().zip(&fx).map(|(xi, fi)| gamma * xi - fi).collect();
    let d = prob.q().resolvent(gamma, &w)?;
    let y2: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi - di).collect();
    let y1: Vec<f64> = y2.iter().map(|v| gamma * v).collect();
    let z: Vec<f64> = w.iter().zip(&d).map(|(wi, di)| wi - gamma * di).collect();
    Ok(GraphPointGe {
        x: x.to_vec(),
        d,
        y1,
        y2,
        z,
        gamma,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonDirection {
    pub dx: Vec<f64>,
    pub dd: Vec<f64>,
    /// GMRES iterations, `None` for direct solves.
    pub inner_iters: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveErrorKind {
    #[error("no convergence within {iterations} iterations")]
    MaxItersExceeded { iterations: usize },
    #[error("Newton system singular at iteration {iteration}: {reason}")]
    SingularSystem { iteration: usize, reason: String },
    #[error("line search failed at iteration {iteration}: residual {residual:.3e}, best trial {best_trial:.3e}")]
    LineSearchFailed {
        iteration: usize,
        residual: f64,
        best_trial: f64,
    },
    #[error("multifunction evaluation failed: {0}")]
    Map(#[from] ScdError),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
}

fn linear_solve(
    m: &CsrMatrix,
    rhs: &[f64],
    solver: LinearSolver,
) -> Result<(Vec<f64>, Option<usize>), LinalgError> {
    let opts = match solver {
        LinearSolver::Direct => return dense_solve(m, rhs).map(|x| (x, None)),
        LinearSolver::Auto(_) if m.nrows() <= AUTO_DIRECT_MAX_DIM => {
            return dense_solve(m, rhs).map(|x| (x, None))
        }
        LinearSolver::Gmres(o) | LinearSolver::Auto(o) => o,
    };
    let ilu = Ilu0::factor(&m.with_full_diagonal())?;
    let out = gmres_solve(m, rhs, &ilu, &opts)?;
    Ok((out.x, Some(out.iterations)))
}

fn singular(iteration: usize, e: impl ToString) -> SolveErrorKind {
    SolveErrorKind::SingularSystem {
        iteration,
        reason: e.to_string(),
    }
}

fn subspace(
    gp: &GraphPointGe,
    prob: &dyn GeProblem,
    side: Side,
) -> Result<BlockBasis, SolveErrorKind> {
    Ok(prob.q().select_subspace(&gp.d, &gp.z, side)?)
}

/// Solves `(Y*^T J + X*^T) dx = -(Y*^T y1 + X*^T y2)`.
pub fn newton_direction_dual(
    gp: &GraphPointGe,
    prob: &dyn GeProblem,
    solver: LinearSolver,
) -> Result<NewtonDirection, SolveErrorKind> {
    direction_dual_at(gp, prob, solver, 0)
}

fn direction_dual_at(
    gp: &GraphPointGe,
    prob: &dyn GeProblem,
    solver: LinearSolver,
    iteration: usize,
) -> Result<NewtonDirection, SolveErrorKind> {
    let basis = subspace(gp, prob, Side::Dual)?;
    let ys_t = basis.a().transpose();
    let xs_t = basis.b().transpose();
    let jac = prob.jacobian(&gp.x);
    let m = ys_t.left_mul_csr(&jac).add(&xs_t.to_csr());
    let mut rhs = ys_t.mul_vec(&gp.y1);
    for (r, v) in rhs.iter_mut().zip(xs_t.mul_vec(&gp.y2)) {
        *r = -(*r + v);
    }
    let (dx, inner_iters) = linear_solve(&m, &rhs, solver).map_err(|e| singular(iteration, e))?;
    let dd = dx.iter().zip(&gp.y2).map(|(a, b)| a + b).collect();
    Ok(NewtonDirection {
        dx,
        dd,
        inner_iters,
    })
}

/// Solves `(J X + Y) p = J y2 - y1`; `dd = X p`, `dx = dd - y2`.
pub fn newton_direction_primal(
    gp: &GraphPointGe,
    prob: &dyn GeProblem,
    solver: LinearSolver,
) -> Result<NewtonDirection, SolveErrorKind> {
    direction_primal_at(gp, prob, solver, 0)
}

fn direction_primal_at(
    gp: &GraphPointGe,
    prob: &dyn GeProblem,
    solver: LinearSolver,
    iteration: usize,
) -> Result<NewtonDirection, SolveErrorKind> {
    let basis = subspace(gp, prob, Side::Primal)?;
    let jac = prob.jacobian(&gp.x);
    let jx = basis
        .a()
        .transpose()
        .left_mul_csr(&jac.transpose())
        .transpose();
    let m = jx.add(&basis.b().to_csr());
    let mut rhs = jac.mul_vec(&gp.y2);
    for (r, v) in rhs.iter_mut().zip(&gp.y1) {
        *r -= v;
    }
    let (p, inner_iters) = linear_solve(&m, &rhs, solver).map_err(|e| singular(iteration, e))?;
    let dd = basis.a().mul_vec(&p);
    let dx = dd.iter().zip(&gp.y2).map(|(a, b)| a - b).collect();
    Ok(NewtonDirection {
        dx,
        dd,
        inner_iters,
    })
}

pub const MAX_LINE_SEARCH_TRIALS: usize = 20;

/// The `i`-th trial step: `1, 1/2, 1/4, 1/8, 1/32, 1/128`, then `0.1^j / 128`.
pub fn step_length(i: usize) -> f64 {
    const HEAD: [f64; 6] = [1.0, 0.5, 0.25, 0.125, 1.0 / 32.0, 1.0 / 128.0];
    if i < HEAD.len() {
        HEAD[i]
    } else {
        0.1f64.powi((i - HEAD.len() + 1) as i32) / 128.0
    }
}

/// Whether a trial residual passes the acceptance test at iteration `k`.
pub fn accepts(trial: f64, current: f64, alpha: f64, k: usize) -> bool {
    trial <= (1.0 - 0.1 * alpha + 0.1 / (k as f64 + 1.0)) * current
}

/// First admissible step along `dx` from `gp.x`, with the graph point at the
/// accepted trial.
pub fn line_search(
    gp: &GraphPointGe,
    dx: &[f64],
    k: usize,
    prob: &dyn GeProblem,
) -> Result<(f64, GraphPointGe), SolveErrorKind> {
    let current = gp.residual_norm();
    let mut best_trial = f64::INFINITY;
    for i in 0..MAX_LINE_SEARCH_TRIALS {
        let alpha = step_length(i);
        let trial: Vec<f64> = gp.x.iter().zip(dx).map(|(x, d)| x + alpha * d).collect();
        let next = approximation_step(&trial, gp.gamma, prob)?;
        let r = next.residual_norm();
        best_trial = best_trial.min(r);
        if accepts(r, current, alpha, k) {
            return Ok((alpha, next));
        }
    }
    Err(SolveErrorKind::LineSearchFailed {
        iteration: k,
        residual: current,
        best_trial,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub residual: f64,
    /// Step length that produced this iterate; `None` for the start point.
    pub alpha: Option<f64>,
    /// Inner linear-solver iterations of the step that produced this iterate.
    pub inner_iters: Option<usize>,
    pub census: Option<StratumCensus>,
    /// `||((x, d), y_hat) - ((x_end, x_end), 0)|| / ||x - x_end||`, filled in
    /// after a successful solve with the final iterate standing in for the solution.
    pub approximation_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverTrace {
    pub gamma: f64,
    pub records: Vec<IterationRecord>,
    /// `x^(0), x^(1), ...` when requested in the configuration.
    pub iterates: Vec<Vec<f64>>,
}

impl SolverTrace {
    /// Newton steps taken.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn total_inner_iters(&self) -> usize {
        self.records.iter().filter_map(|r| r.inner_iters).sum()
    }

    pub fn initial_residual(&self) -> f64 {
        self.records.first().map_or(0.0, |r| r.residual)
    }

    pub fn final_residual(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.residual)
    }

    /// `final / initial`, zero when the start point already solves the problem.
    pub fn reduction(&self) -> f64 {
        let r0 = self.initial_residual();
        if r0 == 0.0 {
            0.0
        } else {
            self.final_residual() / r0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind}")]
pub struct SolveError {
    pub kind: SolveErrorKind,
    pub trace: SolverTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    /// Last resolvent output, on the domain of `Q`.
    pub d: Vec<f64>,
    /// Point of `Q(d)` paired with `d`.
    pub z: Vec<f64>,
    pub trace: SolverTrace,
}

fn record(
    iter: usize,
    gp: &GraphPointGe,
    prob: &dyn GeProblem,
    alpha: Option<f64>,
    inner: Option<usize>,
) -> IterationRecord {
    IterationRecord {
        iter,
        residual: gp.residual_norm(),
        alpha,
        inner_iters: inner,
        census: prob.q().census(&gp.d, &gp.z),
        approximation_ratio: None,
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt()
}

pub fn solve(prob: &dyn GeProblem, x0: &[f64], cfg: &SolverConfig) -> Result<Solution, SolveError> {
    let mut trace = SolverTrace::default();
    let fail = |kind: SolveErrorKind, trace: &SolverTrace| SolveError {
        kind,
        trace: trace.clone(),
    };
    cfg.validate()
        .map_err(|e| fail(SolveErrorKind::InvalidConfig(e), &trace))?;
    if x0.len() != prob.dim() {
        let e = ScdError::DimensionMismatch {
            expected: prob.dim(),
            got: x0.len(),
        };
        return Err(fail(e.into(), &trace));
    }
    let gamma = match cfg.gamma {
        GammaChoice::Fixed(g) => g,
        GammaChoice::Auto => estimate_gamma(&prob.jacobian(x0)),
    };
    trace.gamma = gamma;
    if !(gamma > 0.0) {
        return Err(fail(
            SolveErrorKind::InvalidConfig("estimated gamma is not positive"),
            &trace,
        ));
    }

    let mut gp = approximation_step(x0, gamma, prob).map_err(|e| fail(e.into(), &trace))?;
    trace.records.push(record(0, &gp, prob, None, None));
    let r0 = gp.residual_norm();
    let mut path = vec![(gp.x.clone(), gp.d.clone(), r0)];
    if cfg.keep_iterates {
        trace.iterates.push(gp.x.clone());
    }

    let mut converged = r0 == 0.0;
    let mut k = 0;
    while !converged && k < cfg.max_iters {
        let dir = match cfg.variant {
            Variant::DualA => direction_dual_at(&gp, prob, cfg.linear_solver, k),
            Variant::PrimalB => direction_primal_at(&gp, prob, cfg.linear_solver, k),
        }
        .map_err(|e| fail(e, &trace))?;
        let (alpha, next) = if cfg.line_search {
            line_search(&gp, &dir.dx, k, prob).map_err(|e| fail(e, &trace))?
        } else {
            let trial: Vec<f64> = gp.x.iter().zip(&dir.dx).map(|(x, d)| x + d).collect();
            (
                1.0,
                approximation_step(&trial, gamma, prob).map_err(|e| fail(e.into(), &trace))?,
            )
        };
        gp = next;
        k += 1;
        trace
            .records
            .push(record(k, &gp, prob, Some(alpha), dir.inner_iters));
        let r = gp.residual_norm();
        path.push((gp.x.clone(), gp.d.clone(), r));
        if cfg.keep_iterates {
            trace.iterates.push(gp.x.clone());
        }
        converged = r == 0.0 || r <= cfg.newton_rel_tol * r0;
    }
    if !converged {
        return Err(fail(
            SolveErrorKind::MaxItersExceeded { iterations: k },
            &trace,
        ));
    }

    let xbar = &gp.x;
    for (rec, (x, d, r)) in trace.records.iter_mut().zip(&path) {
        let ex = dist(x, xbar);
        if ex > 0.0 {
            let ed = dist(d, xbar);
            rec.approximation_ratio = Some((ex * ex + ed * ed + r * r).sqrt() / ex);
        }
    }
    Ok(Solution {
        x: gp.x,
        d: gp.d,
        z: gp.z,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scd::{normal_cone_rplus, ZeroMap};

    fn one_d() -> AffineGe<crate::scd::NormalConeRplus> {
        AffineGe::new(CsrMatrix::identity(1), vec![1.0], normal_cone_rplus())
    }

    #[test]
    fn approximation_step_examples() {
        let prob = one_d();
        let gp = approximation_step(&[2.0], 1.0, &prob).unwrap();
        assert_eq!((gp.d[0], gp.y1[0], gp.y2[0]), (1.0, 1.0, 1.0));
        let at_solution = approximation_step(&[1.0], 1.0, &prob).unwrap();
        assert_eq!((at_solution.d[0], at_solution.residual_norm()), (1.0, 0.0));

        let a = CsrMatrix::from_dense(&nalgebra::DMatrix::from_row_slice(
            2,
            2,
            &[2.0, 1.0, 1.0, 3.0],
        ));
        let smooth = AffineGe::new(a, vec![1.0, -1.0], ZeroMap::new(2));
        let x = [0.5, 0.25];
        let gp = approximation_step(&x, 4.0, &smooth).unwrap();
        let fx = smooth.f(&x);
        for i in 0..2 {
            assert!((gp.d[i] - (x[i] - fx[i] / 4.0)).abs() < 1e-15);
            assert!((gp.y1[i] - fx[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn one_dimensional_directions() {
        let prob = one_d();
        let gp = approximation_step(&[2.0], 1.0, &prob).unwrap();
        let dual = newton_direction_dual(&gp, &prob, LinearSolver::Direct).unwrap();
        assert_eq!(dual.dx, vec![-1.0]);
        let primal = newton_direction_primal(&gp, &prob, LinearSolver::Direct).unwrap();
        assert_eq!(primal.dx, vec![-1.0]);
        assert_eq!(primal.dx[0] - primal.dd[0], -gp.y2[0]);
    }

    #[test]
    fn one_step_convergence() {
        let cfg = SolverConfig {
            gamma: GammaChoice::Fixed(1.0),
            linear_solver: LinearSolver::Direct,
            ..Default::default()
        };
        let sol = solve(&one_d(), &[2.0], &cfg).unwrap();
        assert_eq!(sol.trace.iterations(), 1);
        assert_eq!(sol.x, vec![1.0]);
    }

    #[test]
    fn sticking_blocks_give_projection_step() {
        let q = crate::coulomb::product_map(1, 0, 0.23);
        let prob = AffineGe::new(CsrMatrix::identity(3), vec![0.05, 0.0, -2.0], q);
        // x = 0 maps to a sticking point: w = (0.05, 0, -2), threshold 0.46
        let gp = approximation_step(&[0.0; 3], 1.0, &prob).unwrap();
        let dir = newton_direction_dual(&gp, &prob, LinearSolver::Direct).unwrap();
        for (dx, y2) in dir.dx.iter().zip(&gp.y2) {
            assert!((dx + y2).abs() < 1e-15);
        }
    }

    #[test]
    fn step_sequence() {
        let seq: Vec<f64> = (0..8).map(step_length).collect();
        let expect = [
            1.0,
            0.5,
            0.25,
            0.125,
            1.0 / 32.0,
            1.0 / 128.0,
            0.1 / 128.0,
            0.01 / 128.0,
        ];
        for (a, b) in seq.iter().zip(expect) {
            assert!((a - b).abs() <= 1e-18 * b.max(1.0));
        }
        assert!(accepts(0.95, 1.0, 1.0, 0));
        assert!(!accepts(1.01, 1.0, 1.0, 0));
        assert!(accepts(0.0, 1.0, 1.0, 40));
    }

    #[test]
    fn affine_smooth_problem_one_iteration() {
        let a = CsrMatrix::from_dense(&nalgebra::DMatrix::from_row_slice(
            2,
            2,
            &[4.0, 1.0, 1.0, 3.0],
        ));
        let prob = AffineGe::new(a, vec![1.0, 2.0], ZeroMap::new(2));
        for variant in [Variant::DualA, Variant::PrimalB] {
            let cfg = SolverConfig {
                variant,
                linear_solver: LinearSolver::Direct,
                ..Default::default()
            };
            let sol = solve(&prob, &[0.0, 0.0], &cfg).unwrap();
            assert_eq!(sol.trace.iterations(), 1, "{variant:?}");
        }
    }

    #[test]
    fn invalid_config_is_reported() {
        let cfg = SolverConfig {
            max_iters: 0,
            ..Default::default()
        };
        let err = solve(&one_d(), &[2.0], &cfg).unwrap_err();
        assert!(matches!(err.kind, SolveErrorKind::InvalidConfig(_)));
    }
}
