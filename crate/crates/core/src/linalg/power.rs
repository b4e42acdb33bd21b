use super::{dot, norm2, CsrMatrix};

/// Number of power iterations used for the proximal scaling.
pub const POWER_ITERATIONS: usize = 5;

/// Estimate of the largest eigenvalue of a symmetric positive semidefinite
/// matrix: five power iterations from the normalized all-ones vector, returning
/// the Rayleigh quotient of the last iterate fed into the matrix.
///
/// For symmetric PSD input the value never exceeds `lambda_max`.
pub fn estimate_gamma(a: &CsrMatrix) -> f64 {
    let n = a.nrows();
    assert!(
        n > 0 && a.ncols() == n,
        "power method needs a non-empty square matrix"
    );
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut rayleigh = 0.0;
    for _ in 0..POWER_ITERATIONS {
        a.mul_vec_into(&x, &mut y);
        rayleigh = dot(&x, &y) / dot(&x, &x);
        let ny = norm2(&y);
        if ny == 0.0 {
            return 0.0;
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
    }
    rayleigh
}
