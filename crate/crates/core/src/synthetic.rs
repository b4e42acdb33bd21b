//! Random contact generalized equations with a known solution.
//!
//! Every contact cell is placed at a prescribed graph point in the interior
//! of `L`, `M1` or `M3+`, a random symmetric positive definite matrix `A` is
//! drawn, and `l` is chosen so that `0 in A u - l + Q(u)` holds at the
//! prescribed point.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coulomb::{CellPoint, CoulombProduct, Stratum};
use crate::linalg::CsrMatrix;
use crate::newton::AffineGe;

pub struct SyntheticInstance {
    pub problem: AffineGe<CoulombProduct>,
    pub solution: Vec<f64>,
    /// The element of `Q(solution)` balancing `A u - l`.
    pub q_value: Vec<f64>,
    pub strata: Vec<Stratum>,
}

/// A graph point well inside the given stable stratum.
pub fn random_cell_point(rng: &mut impl Rng, stratum: Stratum, friction: f64) -> CellPoint {
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    let (c, s) = (phi.cos(), phi.sin());
    match stratum {
        Stratum::L => CellPoint::new(
            [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.5..1.5),
            ],
            [0.0, 0.0],
            0.0,
        ),
        Stratum::M1 => {
            let r = rng.random_range(0.5..1.5);
            let theta = rng.random_range(-1.5..-0.5);
            let gn = -friction * theta;
            CellPoint::new([r * c, r * s, 0.0], [gn * c, gn * s], theta)
        }
        Stratum::M3Plus => {
            let theta = rng.random_range(-1.5..-0.5);
            let gn = rng.random_range(0.0..0.5) * -friction * theta;
            CellPoint::new([0.0; 3], [gn * c, gn * s], theta)
        }
        other => panic!("no interior sampler for stratum {other}"),
    }
}

pub fn random_spd(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &b * b.transpose() * (0.5 / n as f64) + DMatrix::identity(n, n)
}

pub fn synthetic_contact_instance(
    cells: usize,
    tail: usize,
    friction: f64,
    seed: u64,
) -> SyntheticInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 3 * cells + tail;
    let stable = [Stratum::L, Stratum::M1, Stratum::M3Plus];
    let mut solution = Vec::with_capacity(n);
    let mut q_value = Vec::with_capacity(n);
    let mut strata = Vec::with_capacity(cells);
    for _ in 0..cells {
        let s = stable[rng.random_range(0..stable.len())];
        let p = random_cell_point(&mut rng, s, friction);
        solution.extend_from_slice(&p.v);
        q_value.extend_from_slice(&p.y());
        strata.push(s);
    }
    for _ in 0..tail {
        solution.push(rng.random_range(-1.0..1.0));
        q_value.push(0.0);
    }
    let a = random_spd(&mut rng, n);
    let au = &a * nalgebra::DVector::from_column_slice(&solution);
    let l = au.iter().zip(&q_value).map(|(a, y)| a + y).collect();
    SyntheticInstance {
        problem: AffineGe::new(
            CsrMatrix::from_dense(&a),
            l,
            CoulombProduct::new(cells, tail, friction),
        ),
        solution,
        q_value,
        strata,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coulomb::classify;
    use crate::newton::GeProblem;

    #[test]
    fn prescribed_point_solves_the_instance() {
        let inst = synthetic_contact_instance(6, 4, 0.23, 11);
        let q = inst.problem.q();
        assert!(q.graph_residual(&inst.solution, &inst.q_value) < 1e-14);
        let f = inst.problem.f(&inst.solution);
        for (fi, yi) in f.iter().zip(&inst.q_value) {
            assert!((fi + yi).abs() < 1e-12);
        }
        for (i, s) in inst.strata.iter().enumerate() {
            let p = CellPoint::from_slices(&inst.solution[3 * i..], &inst.q_value[3 * i..]);
            assert_eq!(classify(&p, 0.23).unwrap(), *s);
        }
    }
}
