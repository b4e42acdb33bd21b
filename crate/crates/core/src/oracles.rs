//! Brute-force checks on SCD maps, independent of the closed-form subspace
//! formulas: graph-direction sampling, the semismooth* bracket, and finite
//! difference Jacobians.
//!
//! Nearby graph points are produced through the resolvent with `gamma = 1`:
//! for `(x, y)` on the graph, `x = (I + Q)^{-1}(x + y)`, so perturbing
//! `w = x + y` and mapping back always lands on the graph.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ScdError;
use crate::scd::ScdMap;
use crate::subspaces::{Side, SubspaceBasis};

/// Ratios below this are rounding noise rather than a measurable bracket.
pub const SEMISMOOTH_NOISE_FLOOR: f64 = 1e-9;

/// Directions `(x - x_base, y - y_base) / ||.||` from sampled graph points.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentSample {
    pub base_x: Vec<f64>,
    pub base_y: Vec<f64>,
    pub radius: f64,
    pub points: Vec<(Vec<f64>, Vec<f64>)>,
    pub distances: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

impl TangentSample {
    /// Largest relative distance of a sampled direction from `basis`.
    pub fn max_deviation(&self, basis: &SubspaceBasis) -> f64 {
        let q = basis.orthonormal();
        self.directions
            .iter()
            .map(|t| {
                let t = nalgebra::DVector::from_column_slice(t);
                (&t - &q * (q.transpose() * &t)).norm()
            })
            .fold(0.0, f64::max)
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Graph point `((I + Q)^{-1}(w), w - (I + Q)^{-1}(w))`.
pub fn graph_point_from(map: &dyn ScdMap, w: &[f64]) -> Result<(Vec<f64>, Vec<f64>), ScdError> {
    let x = map.resolvent(1.0, w)?;
    let y = w.iter().zip(&x).map(|(wi, xi)| wi - xi).collect();
    Ok((x, y))
}

/// Samples up to `count` graph points within `radius` of the base point.
pub fn sample_graph_directions(
    map: &dyn ScdMap,
    base_x: &[f64],
    base_y: &[f64],
    radius: f64,
    count: usize,
    seed: u64,
) -> Result<TangentSample, ScdError> {
    let n = map.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w_bar: Vec<f64> = base_x.iter().zip(base_y).map(|(x, y)| x + y).collect();
    let mut out = TangentSample {
        base_x: base_x.to_vec(),
        base_y: base_y.to_vec(),
        radius,
        points: Vec::with_capacity(count),
        distances: Vec::with_capacity(count),
        directions: Vec::with_capacity(count),
    };
    let mut attempts = 0;
    while out.points.len() < count && attempts < 20 * count.max(1) {
        attempts += 1;
        let step = radius * rng.random_range(0.5..1.0) / 4.0;
        let delta = random_unit(&mut rng, n);
        let w: Vec<f64> = w_bar
            .iter()
            .zip(&delta)
            .map(|(a, d)| a + step * d)
            .collect();
        let (x, y) = graph_point_from(map, &w)?;
        let r = (dist2(&x, base_x) + dist2(&y, base_y)).sqrt();
        if r == 0.0 || r > radius {
            continue;
        }
        let dir = x
            .iter()
            .zip(base_x)
            .chain(y.iter().zip(base_y))
            .map(|(a, b)| (a - b) / r)
            .collect();
        out.points.push((x, y));
        out.distances.push(r);
        out.directions.push(dir);
    }
    Ok(out)
}

/// Largest normalized bracket `|<x*, x - x_base> - <y*, y - y_base>|` over
/// sampled graph points and an orthonormal basis of the selected adjoint
/// subspace at each of them.
pub fn semismooth_star_ratio(
    map: &dyn ScdMap,
    base_x: &[f64],
    base_y: &[f64],
    radius: f64,
    count: usize,
    seed: u64,
) -> Result<f64, ScdError> {
    let n = map.dim();
    let sample = sample_graph_directions(map, base_x, base_y, radius, count, seed)?;
    let mut worst = 0.0f64;
    for ((x, y), r) in sample.points.iter().zip(&sample.distances) {
        let basis = map.select_subspace(x, y, Side::Dual)?.to_dense()?;
        let q = basis.orthonormal();
        for col in q.column_iter() {
            let (ys, xs) = (col.rows(0, n), col.rows(n, n));
            let mut bracket = 0.0;
            for i in 0..n {
                bracket += xs[i] * (x[i] - base_x[i]) - ys[i] * (y[i] - base_y[i]);
            }
            worst = worst.max(bracket.abs() / r);
        }
    }
    Ok(worst)
}

/// Absolute violation of `y in Q(x)`.
pub fn check_inclusion(map: &dyn ScdMap, x: &[f64], y: &[f64]) -> f64 {
    map.graph_residual(x, y)
}

/// `dist((x + t dx, y + t dy), graph) / t`, bounded above through the
/// resolvent projection. Near zero for tangent directions.
pub fn tangent_defect(
    map: &dyn ScdMap,
    base_x: &[f64],
    base_y: &[f64],
    dir: &[f64],
    step: f64,
) -> Result<f64, ScdError> {
    let n = map.dim();
    let xp: Vec<f64> = (0..n).map(|i| base_x[i] + step * dir[i]).collect();
    let yp: Vec<f64> = (0..n).map(|i| base_y[i] + step * dir[n + i]).collect();
    let w: Vec<f64> = xp.iter().zip(&yp).map(|(a, b)| a + b).collect();
    let (xg, yg) = graph_point_from(map, &w)?;
    Ok((dist2(&xp, &xg) + dist2(&yp, &yg)).sqrt() / step)
}

/// Sampled direction whose negation is farthest from being tangent, with
/// that negation's defect. A large defect shows the tangent cone is not a
/// subspace at the base point.
pub fn one_sided_witness(
    map: &dyn ScdMap,
    base_x: &[f64],
    base_y: &[f64],
    radius: f64,
    count: usize,
    seed: u64,
) -> Result<Option<(Vec<f64>, f64)>, ScdError> {
    let sample = sample_graph_directions(map, base_x, base_y, radius, count, seed)?;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for dir in sample.directions {
        let neg: Vec<f64> = dir.iter().map(|c| -c).collect();
        let defect = tangent_defect(map, base_x, base_y, &neg, radius)?;
        if best.as_ref().map_or(true, |(_, b)| defect > *b) {
            best = Some((dir, defect));
        }
    }
    Ok(best)
}

/// Central-difference Jacobian of `f` at `x`.
pub fn finite_difference_jacobian(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
    h: f64,
) -> DMatrix<f64> {
    let fx = f(x);
    let mut jac = DMatrix::zeros(fx.len(), x.len());
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        let hj = h * (1.0 + x[j].abs());
        xp[j] = x[j] + hj;
        let fp = f(&xp);
        xp[j] = x[j] - hj;
        let fm = f(&xp);
        xp[j] = x[j];
        for i in 0..fx.len() {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * hj);
        }
    }
    jac
}

/// `max |J - J_fd| / (1 + max |J|)`.
pub fn jacobian_check(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    jac: &DMatrix<f64>,
    x: &[f64],
    h: f64,
) -> f64 {
    let fd = finite_difference_jacobian(f, x, h);
    (jac - fd).abs().max() / (1.0 + jac.abs().max())
}
