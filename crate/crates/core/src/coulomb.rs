//! Signorini contact with Coulomb friction, one node at a time.
//!
//! A contact cell relates the nodal displacement `v = (v1, v2, v3)` (tangential
//! part `v12`, normal part `v3`) to the pair `(g, theta)` of tangential force
//! and normal reaction:
//!
//! ```text
//! v3 >= 0, theta <= 0, v3 theta = 0,  g in -F theta d||.||(v12)
//! ```
//!
//! [`CoulombProduct`] stacks `p` cells and a trailing block of free dofs on
//! which the map is identically zero.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, Matrix2, Vector2};

use crate::error::ScdError;
use crate::scd::{ScdMap, GRAPH_TOL};
use crate::subspaces::{dual_subspace, BlockBasis, Side, SubspaceBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stratum {
    /// No contact.
    L,
    /// Sliding in strong contact.
    M1,
    /// Sliding in weak contact.
    M2,
    /// Sticking in strong contact, friction bound inactive.
    M3Plus,
    /// Sticking on the friction cone boundary.
    M3Minus,
    /// The origin.
    M4,
}

impl Stratum {
    pub const ALL: [Stratum; 6] = [
        Stratum::L,
        Stratum::M1,
        Stratum::M2,
        Stratum::M3Plus,
        Stratum::M3Minus,
        Stratum::M4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stratum::L => "L",
            Stratum::M1 => "M1",
            Stratum::M2 => "M2",
            Stratum::M3Plus => "M3+",
            Stratum::M3Minus => "M3-",
            Stratum::M4 => "M4",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-stratum node counts; `violations` counts cells that failed to classify.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StratumCensus {
    counts: [usize; 6],
    pub violations: usize,
}

impl StratumCensus {
    pub fn get(&self, s: Stratum) -> usize {
        self.counts[s.index()]
    }

    pub fn add(&mut self, s: Stratum) {
        self.counts[s.index()] += 1;
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.violations
    }
}

/// A point `(v, g, theta)` of the cell graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellPoint {
    pub v: [f64; 3],
    pub g: [f64; 2],
    pub theta: f64,
}

impl CellPoint {
    pub fn new(v: [f64; 3], g: [f64; 2], theta: f64) -> Self {
        Self { v, g, theta }
    }

    /// Reads `x = v` and `y = (g, theta)`.
    pub fn from_slices(x: &[f64], y: &[f64]) -> Self {
        Self {
            v: [x[0], x[1], x[2]],
            g: [y[0], y[1]],
            theta: y[2],
        }
    }

    pub fn y(&self) -> [f64; 3] {
        [self.g[0], self.g[1], self.theta]
    }

    pub fn norm(&self) -> f64 {
        let s: f64 =
            self.v.iter().chain(&self.g).map(|c| c * c).sum::<f64>() + self.theta * self.theta;
        s.sqrt()
    }

    fn v12_norm(&self) -> f64 {
        self.v[0].hypot(self.v[1])
    }

    fn g_norm(&self) -> f64 {
        self.g[0].hypot(self.g[1])
    }
}

fn tolerance(p: &CellPoint) -> f64 {
    GRAPH_TOL * (1.0 + p.norm())
}

/// Largest violated graph relation of a cell as `(relation, residual)`;
/// `("", 0.0)` on the graph.
pub fn cell_violation(p: &CellPoint, friction: f64) -> (&'static str, f64) {
    let tol = tolerance(p);
    let lambda = (-p.theta).max(0.0);
    let nv = p.v12_norm();
    let friction_residual = if nv > tol {
        let bound = friction * lambda / nv;
        (p.g[0] - bound * p.v[0]).hypot(p.g[1] - bound * p.v[1])
    } else {
        (p.g_norm() - friction * lambda).max(0.0)
    };
    let candidates = [
        ("v3 >= 0", (-p.v[2]).max(0.0)),
        ("theta <= 0", p.theta.max(0.0)),
        ("v3 theta = 0", p.v[2].abs().min(p.theta.abs())),
        ("g in -F theta d|v12|", friction_residual),
    ];
    candidates
        .into_iter()
        .fold(("", 0.0), |best, c| if c.1 > best.1 { c } else { best })
}

pub fn cell_residual(p: &CellPoint, friction: f64) -> f64 {
    cell_violation(p, friction).1
}

pub fn classify(p: &CellPoint, friction: f64) -> Result<Stratum, ScdError> {
    let tol = tolerance(p);
    let (relation, residual) = cell_violation(p, friction);
    if residual > tol {
        return Err(ScdError::GraphViolation {
            relation,
            residual,
            block: None,
        });
    }
    let sliding = p.v12_norm() > tol;
    if p.v[2] > tol {
        return Ok(Stratum::L);
    }
    if p.theta >= -tol {
        return Ok(if sliding { Stratum::M2 } else { Stratum::M4 });
    }
    if sliding {
        return Ok(Stratum::M1);
    }
    if p.g_norm() < -friction * p.theta - tol {
        Ok(Stratum::M3Plus)
    } else {
        Ok(Stratum::M3Minus)
    }
}

/// `(gamma I + Q~)^{-1}(w)` together with the graph value `w - gamma v`.
pub fn cell_resolvent(gamma: f64, w: [f64; 3], friction: f64) -> CellPoint {
    let v3 = w[2].max(0.0) / gamma;
    let theta = w[2].min(0.0);
    let nw = w[0].hypot(w[1]);
    let bound = friction * -theta;
    let (v1, v2) = if nw <= bound {
        (0.0, 0.0)
    } else {
        let s = (1.0 - bound / nw) / gamma;
        (s * w[0], s * w[1])
    };
    CellPoint {
        v: [v1, v2, v3],
        g: [w[0] - gamma * v1, w[1] - gamma * v2],
        theta,
    }
}

/// Lipschitz constant of `gamma * (gamma I + Q~)^{-1}`.
pub fn resolvent_lipschitz_bound(friction: f64) -> f64 {
    (2.0 * (1.0 + friction * friction)).sqrt()
}

fn embed(
    top_left: Matrix2<f64>,
    right: Vector2<f64>,
    bottom: Vector2<f64>,
    corner: f64,
) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(3, 3);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = top_left[(i, j)];
        }
        m[(i, 2)] = right[i];
        m[(2, i)] = bottom[i];
    }
    m[(2, 2)] = corner;
    m
}

fn basis(a: DMatrix<f64>, b: DMatrix<f64>) -> SubspaceBasis {
    SubspaceBasis::new(a, b).expect("closed-form cell bases have full rank")
}

/// Well-conditioned bases at a sliding point in strong contact.
fn m1_basis(p: &CellPoint, friction: f64, side: Side) -> SubspaceBasis {
    let nv = p.v12_norm();
    let dir = Vector2::new(p.v[0] / nv, p.v[1] / nv);
    let ft = -friction * p.theta;
    let denom = nv + ft;
    let outer = dir * dir.transpose();
    let s = Matrix2::identity() * (nv / denom) + outer * (ft / denom);
    let t = (Matrix2::identity() - outer) * (ft / denom);
    let zero = Vector2::zeros();
    match side {
        Side::Primal => basis(
            embed(s, zero, zero, 0.0),
            embed(t, -dir * friction, zero, 1.0),
        ),
        Side::Dual => basis(
            embed(s, zero, dir * friction, 0.0),
            embed(t, zero, zero, 1.0),
        ),
    }
}

/// Which element of the collection to use at `M3-` points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum M3MinusChoice {
    /// `rge(0, I3)`.
    #[default]
    Sticking,
    /// The second limit subspace, approached from sliding points.
    SlidingLimit,
}

/// The selected subspace: `rge(I3, 0)` on `L`, `M2`, `M4`; `rge(0, I3)` on
/// `M3+`, `M3-`; the closed-form bases on `M1`.
pub fn cell_subspace(p: &CellPoint, friction: f64, side: Side) -> Result<SubspaceBasis, ScdError> {
    cell_subspace_with(p, friction, side, M3MinusChoice::Sticking)
}

pub fn cell_subspace_with(
    p: &CellPoint,
    friction: f64,
    side: Side,
    m3minus: M3MinusChoice,
) -> Result<SubspaceBasis, ScdError> {
    Ok(match classify(p, friction)? {
        Stratum::L | Stratum::M2 | Stratum::M4 => SubspaceBasis::free(3),
        Stratum::M3Plus => SubspaceBasis::fixed(3),
        Stratum::M3Minus => match m3minus {
            M3MinusChoice::Sticking => SubspaceBasis::fixed(3),
            M3MinusChoice::SlidingLimit => {
                let primal = m3minus_sliding_limit(p, friction);
                match side {
                    Side::Primal => primal,
                    Side::Dual => dual_subspace(&primal)?,
                }
            }
        },
        Stratum::M1 => m1_basis(p, friction, side),
    })
}

fn m3minus_sliding_limit(p: &CellPoint, friction: f64) -> SubspaceBasis {
    let ng = p.g_norm();
    let dir = Vector2::new(p.g[0] / ng, p.g[1] / ng);
    let outer = dir * dir.transpose();
    let zero = Vector2::zeros();
    basis(
        embed(outer, zero, zero, 0.0),
        embed(Matrix2::identity() - outer, -dir * friction, zero, 1.0),
    )
}

fn weak_sliding_limit(alpha: f64, dir: Vector2<f64>, friction: f64) -> SubspaceBasis {
    let outer = dir * dir.transpose();
    let zero = Vector2::zeros();
    basis(
        embed(
            Matrix2::identity() * (1.0 - alpha) + outer * alpha,
            zero,
            zero,
            0.0,
        ),
        embed(
            (Matrix2::identity() - outer) * alpha,
            -dir * friction,
            zero,
            1.0,
        ),
    )
}

/// All primal limit subspaces at points of `M2`, `M3-` and `M4`.
///
/// At `M4` the continuous family is sampled on a `samples x samples` grid:
/// `alpha` uniform on `[0, 1]`, the direction uniform on the unit circle.
pub fn enumerate_limit_subspaces(
    p: &CellPoint,
    friction: f64,
    samples: usize,
) -> Result<Vec<SubspaceBasis>, ScdError> {
    let stratum = classify(p, friction)?;
    match stratum {
        Stratum::M2 => {
            let nv = p.v12_norm();
            let dir = Vector2::new(p.v[0] / nv, p.v[1] / nv);
            Ok(vec![
                SubspaceBasis::free(3),
                weak_sliding_limit(0.0, dir, friction),
            ])
        }
        Stratum::M3Minus => Ok(vec![
            SubspaceBasis::fixed(3),
            m3minus_sliding_limit(p, friction),
        ]),
        Stratum::M4 => {
            let samples = samples.max(1);
            let mut out = vec![SubspaceBasis::free(3), SubspaceBasis::fixed(3)];
            for i in 0..samples {
                let alpha = if samples == 1 {
                    0.0
                } else {
                    i as f64 / (samples - 1) as f64
                };
                for j in 0..samples {
                    let phi = 2.0 * PI * j as f64 / samples as f64;
                    out.push(weak_sliding_limit(
                        alpha,
                        Vector2::new(phi.cos(), phi.sin()),
                        friction,
                    ));
                }
            }
            Ok(out)
        }
        other => Err(ScdError::WrongStratum(other.name())),
    }
}

/// `Q = Q~ x ... x Q~ x {0}` with `cells` contact blocks followed by `tail`
/// unconstrained components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoulombProduct {
    cells: usize,
    tail: usize,
    friction: f64,
    m3minus: M3MinusChoice,
}

impl CoulombProduct {
    pub fn new(cells: usize, tail: usize, friction: f64) -> Self {
        assert!(friction > 0.0, "friction coefficient must be positive");
        Self {
            cells,
            tail,
            friction,
            m3minus: M3MinusChoice::default(),
        }
    }

    pub fn with_m3minus(mut self, choice: M3MinusChoice) -> Self {
        self.m3minus = choice;
        self
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn tail(&self) -> usize {
        self.tail
    }

    pub fn friction(&self) -> f64 {
        self.friction
    }

    pub fn cell(&self, x: &[f64], y: &[f64], i: usize) -> CellPoint {
        CellPoint::from_slices(&x[3 * i..3 * i + 3], &y[3 * i..3 * i + 3])
    }

    /// Stratum of every cell, or the first classification failure.
    pub fn strata(&self, x: &[f64], y: &[f64]) -> Result<Vec<Stratum>, ScdError> {
        (0..self.cells)
            .map(|i| classify(&self.cell(x, y, i), self.friction).map_err(|e| e.in_block(i)))
            .collect()
    }

    fn check(&self, x: &[f64], y: &[f64]) -> Result<(), ScdError> {
        let n = self.dim();
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
}

pub fn product_map(cells: usize, tail: usize, friction: f64) -> CoulombProduct {
    CoulombProduct::new(cells, tail, friction)
}

impl ScdMap for CoulombProduct {
    fn dim(&self) -> usize {
        3 * self.cells + self.tail
    }

    fn resolvent(&self, gamma: f64, w: &[f64]) -> Result<Vec<f64>, ScdError> {
        self.check(w, w)?;
        let mut v = Vec::with_capacity(w.len());
        for c in w[..3 * self.cells].chunks_exact(3) {
            v.extend_from_slice(&cell_resolvent(gamma, [c[0], c[1], c[2]], self.friction).v);
        }
        v.extend(w[3 * self.cells..].iter().map(|wi| wi / gamma));
        Ok(v)
    }

    fn graph_residual(&self, x: &[f64], y: &[f64]) -> f64 {
        let cells = (0..self.cells).map(|i| cell_residual(&self.cell(x, y, i), self.friction));
        let tail = y[3 * self.cells..].iter().map(|v| v.abs());
        cells.chain(tail).fold(0.0, f64::max)
    }

    fn select_subspace(&self, x: &[f64], y: &[f64], side: Side) -> Result<BlockBasis, ScdError> {
        self.check(x, y)?;
        let blocks = (0..self.cells)
            .map(|i| {
                cell_subspace_with(&self.cell(x, y, i), self.friction, side, self.m3minus)
                    .map_err(|e| e.in_block(i))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BlockBasis::from_blocks(blocks, self.tail))
    }

    fn census(&self, x: &[f64], y: &[f64]) -> Option<StratumCensus> {
        let mut census = StratumCensus::default();
        for i in 0..self.cells {
            match classify(&self.cell(x, y, i), self.friction) {
                Ok(s) => census.add(s),
                Err(_) => census.violations += 1,
            }
        }
        Some(census)
    }
}
