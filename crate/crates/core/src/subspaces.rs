//! Algebra of `n`-dimensional subspaces of `R^{2n}`.
//!
//! A subspace `L` is carried as a basis pair `(A, B)` with `L = rge(A, B)`,
//! i.e. the column span of the stacked `2n x n` matrix `[A; B]`. Primal
//! subspaces list (domain, range) directions; dual subspaces are read in the
//! (range-dual, domain-dual) order `(y*, x*)`.
//!
//! All routines here are dense. `n` is a per-block dimension; FEM-scale bases
//! are assembled block-diagonally in [`BlockBasis`] and never densified by the
//! solver.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::ScdError;
use crate::linalg::{BlockDiagonal, DiagBlock};

/// Relative singular value cutoff for rank decisions.
pub const RANK_TOL: f64 = 1e-10;
/// Condition estimate above which `B` counts as singular.
pub const REGULARITY_COND_LIMIT: f64 = 1e14;

/// Which collection a subspace belongs to: tangent-type (primal) or adjoint (dual).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Primal,
    Dual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl SubspaceBasis {
    /// Checks shapes and full column rank of `[a; b]`.
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self, ScdError> {
        let n = a.nrows();
        if !a.is_square() {
            return Err(ScdError::DimensionMismatch {
                expected: n,
                got: a.ncols(),
            });
        }
        if b.shape() != (n, n) {
            return Err(ScdError::DimensionMismatch {
                expected: n,
                got: b.nrows(),
            });
        }
        let basis = Self { a, b };
        let rank = numerical_rank(&basis.stacked());
        if rank < n {
            return Err(ScdError::RankDeficient { rank, n });
        }
        Ok(basis)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn into_parts(self) -> (DMatrix<f64>, DMatrix<f64>) {
        (self.a, self.b)
    }

    /// `rge(I, 0)`.
    pub fn free(n: usize) -> Self {
        Self {
            a: DMatrix::identity(n, n),
            b: DMatrix::zeros(n, n),
        }
    }

    /// `rge(0, I)`.
    pub fn fixed(n: usize) -> Self {
        Self {
            a: DMatrix::zeros(n, n),
            b: DMatrix::identity(n, n),
        }
    }

    pub fn stacked(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut z = DMatrix::zeros(2 * n, n);
        z.view_mut((0, 0), (n, n)).copy_from(&self.a);
        z.view_mut((n, 0), (n, n)).copy_from(&self.b);
        z
    }

    /// Orthonormal `2n x n` basis of the same subspace.
    pub fn orthonormal(&self) -> DMatrix<f64> {
        let svd = self.stacked().svd(true, false);
        svd.u.expect("left singular vectors requested")
    }

    /// Orthogonal projector onto the subspace (`2n x 2n`, symmetric).
    pub fn projector(&self) -> DMatrix<f64> {
        let q = self.orthonormal();
        &q * q.transpose()
    }

    /// Norm of the component of `t` orthogonal to the subspace, relative to `||t||`.
    pub fn deviation(&self, t: &[f64]) -> f64 {
        let t = nalgebra::DVector::from_column_slice(t);
        let tn = t.norm();
        if tn == 0.0 {
            return 0.0;
        }
        let q = self.orthonormal();
        let proj = &q * (q.transpose() * &t);
        (t - proj).norm() / tn
    }

    /// Same subspace expressed through the basis `(A C, B C)`.
    pub fn rebased(&self, c: &DMatrix<f64>) -> Result<Self, ScdError> {
        Self::new(&self.a * c, &self.b * c)
    }
}

/// Validated constructor, see [`SubspaceBasis::new`].
pub fn make_basis(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<SubspaceBasis, ScdError> {
    SubspaceBasis::new(a, b)
}

fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.singular_values();
    let largest = sv.iter().fold(0.0f64, |acc, s| acc.max(*s));
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > RANK_TOL * largest).count()
}

/// `L* = {(-v*, u*) : (u*, v*) in L^perp}`.
///
/// `L^perp` is read off the eigenvectors of `I - P_L` with eigenvalue one,
/// which form an orthonormal basis of the null space of `[A^T B^T]`.
pub fn dual_subspace(l: &SubspaceBasis) -> Result<SubspaceBasis, ScdError> {
    let n = l.n();
    let complement = DMatrix::identity(2 * n, 2 * n) - l.projector();
    let eig = SymmetricEigen::new(complement);
    let mut perp = DMatrix::zeros(2 * n, n);
    let mut k = 0;
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        if *lambda > 0.5 && k < n {
            perp.set_column(k, &eig.eigenvectors.column(j));
            k += 1;
        }
    }
    if k < n {
        return Err(ScdError::RankDeficient { rank: k, n });
    }
    let u_star = perp.rows(0, n).into_owned();
    let v_star = perp.rows(n, n).into_owned();
    SubspaceBasis::new(-v_star, u_star)
}

/// A subspace in `Z_n^reg` together with its matrix `C_L = A B^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularSubspace {
    basis: SubspaceBasis,
    c: DMatrix<f64>,
}

impl RegularSubspace {
    pub fn basis(&self) -> &SubspaceBasis {
        &self.basis
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// Spectral norm of `C_L`, this subspace's contribution to the modulus of
    /// SCD regularity.
    pub fn c_norm(&self) -> f64 {
        spectral_norm(&self.c)
    }
}

pub fn c_matrix(l: &SubspaceBasis) -> Result<RegularSubspace, ScdError> {
    let sv = l.b().singular_values();
    let largest = sv.iter().fold(0.0f64, |acc, s| acc.max(*s));
    let smallest = sv.iter().fold(f64::INFINITY, |acc, s| acc.min(*s));
    let condition = if smallest == 0.0 {
        f64::INFINITY
    } else {
        largest / smallest
    };
    if !(condition <= REGULARITY_COND_LIMIT) {
        return Err(ScdError::NotRegular { condition });
    }
    // C B = A  <=>  B^T C^T = A^T
    let ct = l
        .b()
        .transpose()
        .lu()
        .solve(&l.a().transpose())
        .ok_or(ScdError::NotRegular { condition })?;
    Ok(RegularSubspace {
        basis: l.clone(),
        c: ct.transpose(),
    })
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values()
        .iter()
        .fold(0.0f64, |acc, s| acc.max(*s))
}

/// `||P_{L1} - P_{L2}||_2`.
pub fn subspace_metric(l1: &SubspaceBasis, l2: &SubspaceBasis) -> f64 {
    assert_eq!(l1.n(), l2.n(), "subspaces must live in the same space");
    spectral_norm(&(l1.projector() - l2.projector()))
}

/// Image of `L` under the sum rule for `F + h` with `jac = grad h(x)`.
///
/// Primal: `rge(A, jac A + B)`. Dual, with `(A, B)` read as `(Y*, X*)`:
/// `rge(Y*, jac^T Y* + X*)`.
pub fn sum_rule_transform(
    l: &SubspaceBasis,
    jac: &DMatrix<f64>,
    side: Side,
) -> Result<SubspaceBasis, ScdError> {
    let n = l.n();
    if jac.shape() != (n, n) {
        return Err(ScdError::DimensionMismatch {
            expected: n,
            got: jac.nrows(),
        });
    }
    let b = match side {
        Side::Primal => jac * l.a() + l.b(),
        Side::Dual => jac.transpose() * l.a() + l.b(),
    };
    SubspaceBasis::new(l.a().clone(), b)
}

/// Block-diagonal subspace of a product mapping; the tail behaves like the
/// zero map, contributing `rge(I, 0)` in either ordering.
pub fn product_blocks(
    blocks: &[SubspaceBasis],
    tail_dim: usize,
) -> Result<SubspaceBasis, ScdError> {
    BlockBasis::from_blocks(blocks.to_vec(), tail_dim).to_dense()
}

/// Block-diagonal subspace basis used at FEM scale.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockBasis {
    a: BlockDiagonal,
    b: BlockDiagonal,
}

impl BlockBasis {
    pub fn new(a: BlockDiagonal, b: BlockDiagonal) -> Self {
        assert!(
            a.same_partition(&b),
            "basis factors must share one block partition"
        );
        Self { a, b }
    }

    pub fn from_blocks(blocks: Vec<SubspaceBasis>, tail_dim: usize) -> Self {
        let mut a = Vec::with_capacity(blocks.len() + 1);
        let mut b = Vec::with_capacity(blocks.len() + 1);
        for blk in blocks {
            let (ba, bb) = blk.into_parts();
            a.push(DiagBlock::Dense(ba));
            b.push(DiagBlock::Dense(bb));
        }
        if tail_dim > 0 {
            a.push(DiagBlock::Identity(tail_dim));
            b.push(DiagBlock::Zero(tail_dim));
        }
        Self::new(BlockDiagonal::new(a), BlockDiagonal::new(b))
    }

    pub fn from_dense(basis: SubspaceBasis) -> Self {
        Self::from_blocks(vec![basis], 0)
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn a(&self) -> &BlockDiagonal {
        &self.a
    }

    pub fn b(&self) -> &BlockDiagonal {
        &self.b
    }

    pub fn to_dense(&self) -> Result<SubspaceBasis, ScdError> {
        SubspaceBasis::new(self.a.to_dense(), self.b.to_dense())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, data: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, data.len() / rows, data)
    }

    #[test]
    fn make_basis_accepts_and_rejects() {
        assert!(make_basis(DMatrix::identity(3, 3), DMatrix::zeros(3, 3)).is_ok());
        assert_eq!(
            make_basis(DMatrix::zeros(3, 3), DMatrix::zeros(3, 3)),
            Err(ScdError::RankDeficient { rank: 0, n: 3 })
        );
        assert!(make_basis(m(1, &[2.0]), m(1, &[1.0])).is_ok());
        assert!(matches!(
            make_basis(DMatrix::identity(2, 2), DMatrix::zeros(3, 3)),
            Err(ScdError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dual_fixed_points() {
        let free = SubspaceBasis::free(3);
        assert!(subspace_metric(&dual_subspace(&free).unwrap(), &free) < 1e-12);
        let fixed = SubspaceBasis::fixed(3);
        assert!(subspace_metric(&dual_subspace(&fixed).unwrap(), &fixed) < 1e-12);
        // L = rge(2, 1): L^perp spanned by (1, -2), image (2, 1)
        let l = make_basis(m(1, &[2.0]), m(1, &[1.0])).unwrap();
        assert!(subspace_metric(&dual_subspace(&l).unwrap(), &l) < 1e-12);
    }

    #[test]
    fn c_matrix_examples() {
        let l = make_basis(m(1, &[2.0]), m(1, &[1.0])).unwrap();
        let reg = c_matrix(&l).unwrap();
        assert!((reg.c()[(0, 0)] - 2.0).abs() < 1e-15);
        assert!((reg.c_norm() - 2.0).abs() < 1e-14);
        let id = make_basis(DMatrix::identity(2, 2), DMatrix::identity(2, 2)).unwrap();
        assert!(
            (c_matrix(&id).unwrap().c() - DMatrix::<f64>::identity(2, 2))
                .abs()
                .max()
                < 1e-15
        );
        assert!(matches!(
            c_matrix(&SubspaceBasis::free(3)),
            Err(ScdError::NotRegular { .. })
        ));
    }

    #[test]
    fn metric_examples() {
        let e1 = make_basis(m(1, &[1.0]), m(1, &[0.0])).unwrap();
        let e2 = make_basis(m(1, &[0.0]), m(1, &[1.0])).unwrap();
        assert!((subspace_metric(&e1, &e2) - 1.0).abs() < 1e-14);
        assert_eq!(subspace_metric(&e1, &e1), 0.0);
    }

    #[test]
    fn sum_rule_examples() {
        let l = make_basis(m(1, &[1.0]), m(1, &[0.0])).unwrap();
        let t = sum_rule_transform(&l, &m(1, &[2.0]), Side::Primal).unwrap();
        let expect = make_basis(m(1, &[1.0]), m(1, &[2.0])).unwrap();
        assert!(subspace_metric(&t, &expect) < 1e-14);
        let unchanged = sum_rule_transform(&l, &DMatrix::zeros(1, 1), Side::Dual).unwrap();
        assert_eq!(unchanged, l);
    }

    #[test]
    fn product_block_examples() {
        let e1 = make_basis(m(1, &[1.0]), m(1, &[0.0])).unwrap();
        let e2 = make_basis(m(1, &[0.0]), m(1, &[1.0])).unwrap();
        let single = product_blocks(std::slice::from_ref(&e1), 0).unwrap();
        assert_eq!(single, e1);
        let two = product_blocks(&[e1, e2], 0).unwrap();
        assert_eq!(two.a(), &m(2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(two.b(), &m(2, &[0.0, 0.0, 0.0, 1.0]));
        let cells = vec![SubspaceBasis::free(3); 2];
        let all = product_blocks(&cells, 4).unwrap();
        assert_eq!(all, SubspaceBasis::free(10));
    }
}
