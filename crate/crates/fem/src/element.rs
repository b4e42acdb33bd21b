//! Trilinear hexahedron for isotropic linear elasticity.

use nalgebra::{Matrix3, SMatrix, Vector3};

use crate::FemError;

pub type ElementMatrix = SMatrix<f64, 24, 24>;
/// Voigt order `(xx, yy, zz, yz, xz, xy)` with engineering shear strains.
pub type Elasticity = SMatrix<f64, 6, 6>;

const XI: [f64; 8] = [-1.0, 1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0];
const ETA: [f64; 8] = [-1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0, 1.0];
const ZETA: [f64; 8] = [-1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0];

const GAUSS: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    /// Young's modulus.
    pub e: f64,
    /// Poisson's ratio.
    pub nu: f64,
}

impl Material {
    pub fn new(e: f64, nu: f64) -> Result<Self, FemError> {
        if !(e > 0.0 && e.is_finite() && nu > 0.0 && nu < 0.5) {
            return Err(FemError::InvalidMaterial { e, nu });
        }
        Ok(Self { e, nu })
    }

    pub fn lame(&self) -> (f64, f64) {
        let (e, nu) = (self.e, self.nu);
        (
            e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)),
            e / (2.0 * (1.0 + nu)),
        )
    }

    pub fn elasticity(&self) -> Elasticity {
        let (lambda, mu) = self.lame();
        let mut d = Elasticity::zeros();
        for i in 0..3 {
            for j in 0..3 {
                d[(i, j)] = lambda;
            }
            d[(i, i)] += 2.0 * mu;
            d[(i + 3, i + 3)] = mu;
        }
        d
    }
}

fn shape_gradients(xi: f64, eta: f64, zeta: f64) -> [[f64; 3]; 8] {
    let mut g = [[0.0; 3]; 8];
    for a in 0..8 {
        let (p, q, r) = (1.0 + XI[a] * xi, 1.0 + ETA[a] * eta, 1.0 + ZETA[a] * zeta);
        g[a] = [
            0.125 * XI[a] * q * r,
            0.125 * ETA[a] * p * r,
            0.125 * ZETA[a] * p * q,
        ];
    }
    g
}

/// Stiffness `int B^T D B dx` with 2x2x2 Gauss quadrature.
///
/// Fails if the Jacobian determinant is not positive at some quadrature point.
pub fn hex8_stiffness(coords: &[[f64; 3]; 8], d: &Elasticity) -> Result<ElementMatrix, f64> {
    let mut ke = ElementMatrix::zeros();
    for &xi in &GAUSS {
        for &eta in &GAUSS {
            for &zeta in &GAUSS {
                let grads = shape_gradients(xi, eta, zeta);
                let mut jac = Matrix3::zeros();
                for a in 0..8 {
                    for i in 0..3 {
                        for j in 0..3 {
                            jac[(i, j)] += coords[a][i] * grads[a][j];
                        }
                    }
                }
                let det = jac.determinant();
                if !(det > 0.0) {
                    return Err(det);
                }
                let jinv_t = jac.try_inverse().ok_or(det)?.transpose();
                let mut b = SMatrix::<f64, 6, 24>::zeros();
                for a in 0..8 {
                    let n = jinv_t * Vector3::from(grads[a]);
                    let c = 3 * a;
                    b[(0, c)] = n[0];
                    b[(1, c + 1)] = n[1];
                    b[(2, c + 2)] = n[2];
                    b[(3, c + 1)] = n[2];
                    b[(3, c + 2)] = n[1];
                    b[(4, c)] = n[2];
                    b[(4, c + 2)] = n[0];
                    b[(5, c)] = n[1];
                    b[(5, c + 1)] = n[0];
                }
                ke += b.transpose() * d * b * det;
            }
        }
    }
    Ok(ke)
}

/// Consistent nodal forces of a constant traction on a bilinear quadrilateral.
pub fn face_load(coords: &[[f64; 3]; 4], traction: [f64; 3]) -> [[f64; 3]; 4] {
    const S: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];
    const T: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];
    let mut f = [[0.0; 3]; 4];
    for &xi in &GAUSS {
        for &eta in &GAUSS {
            let (mut dxi, mut deta) = (Vector3::zeros(), Vector3::zeros());
            for a in 0..4 {
                let x = Vector3::from(coords[a]);
                dxi += x * (0.25 * S[a] * (1.0 + T[a] * eta));
                deta += x * (0.25 * T[a] * (1.0 + S[a] * xi));
            }
            let da = dxi.cross(&deta).norm();
            for a in 0..4 {
                let n = 0.25 * (1.0 + S[a] * xi) * (1.0 + T[a] * eta);
                for i in 0..3 {
                    f[a][i] += n * traction[i] * da;
                }
            }
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cube() -> [[f64; 3]; 8] {
        let mut c = [[0.0; 3]; 8];
        for a in 0..8 {
            c[a] = [
                (XI[a] + 1.0) / 2.0,
                (ETA[a] + 1.0) / 2.0,
                (ZETA[a] + 1.0) / 2.0,
            ];
        }
        c
    }

    #[test]
    fn rejects_bad_material() {
        assert!(Material::new(70.0, 0.5).is_err());
        assert!(Material::new(-1.0, 0.3).is_err());
        assert!(Material::new(70.0, 0.334).is_ok());
    }

    #[test]
    fn inverted_element_is_degenerate() {
        let mut c = unit_cube();
        for a in 4..8 {
            c[a][2] = -1.0;
        }
        let d = Material::new(1.0, 0.3).unwrap().elasticity();
        assert!(hex8_stiffness(&c, &d).is_err());
    }

    #[test]
    fn unit_face_load_splits_evenly() {
        let f = face_load(
            &[
                [0.0, 0.0, 1.0],
                [1.0, 0.0, 1.0],
                [1.0, 1.0, 1.0],
                [0.0, 1.0, 1.0],
            ],
            [0.0, 0.0, -4.0],
        );
        for node in f {
            assert!((node[2] + 1.0).abs() < 1e-15);
        }
    }
}
