use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use scd_core::linalg::{
    estimate_gamma, gmres_solve, CsrMatrix, GmresOptions, IdentityPreconditioner, Ilu0,
};

fn sparse_matrix(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec((-1.0f64..1.0, 0.0f64..1.0), n * n).prop_map(move |v| {
        let mut m = DMatrix::from_fn(n, n, |i, j| {
            let (val, keep) = v[i * n + j];
            if keep < 0.4 {
                val
            } else {
                0.0
            }
        });
        for i in 0..n {
            m[(i, i)] += n as f64;
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gmres_residual_history_is_monotone(m in (2usize..=30).prop_flat_map(sparse_matrix), seed in 0u64..1000) {
        let n = m.nrows();
        let a = CsrMatrix::from_dense(&m);
        let b: Vec<f64> = (0..n).map(|i| ((i as u64 * 7919 + seed) % 13) as f64 - 6.0).collect();
        prop_assume!(b.iter().any(|v| *v != 0.0));
        let opts = GmresOptions { tol: 1e-10, restart: n, max_inner: 10 * n };
        let out = gmres_solve(&a, &b, &IdentityPreconditioner, &opts).unwrap();
        for w in out.history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        let r: f64 = a.mul_vec(&out.x).iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let bn: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(r <= 1e-10 * bn * (1.0 + 1e-6));
    }

    #[test]
    fn ilu_preconditioned_gmres_meets_true_residual(m in (2usize..=30).prop_flat_map(sparse_matrix)) {
        let n = m.nrows();
        let a = CsrMatrix::from_dense(&m);
        let ilu = Ilu0::factor(&a).unwrap();
        let b = vec![1.0; n];
        let out = gmres_solve(&a, &b, &ilu, &GmresOptions { tol: 1e-6, restart: 5, max_inner: 20 * n }).unwrap();
        prop_assert!(out.relative_residual <= 1e-6);
    }

    #[test]
    fn power_estimate_never_exceeds_largest_eigenvalue(
        entries in (1usize..=50).prop_flat_map(|n| prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| (n, v)))
    ) {
        let (n, v) = entries;
        let b = DMatrix::from_vec(n, n, v);
        let spd = &b * b.transpose();
        let a = CsrMatrix::from_dense(&spd);
        let lmax = SymmetricEigen::new(spd).eigenvalues.iter().cloned().fold(0.0, f64::max);
        let g = estimate_gamma(&a);
        prop_assert!(g <= lmax * (1.0 + 1e-12) + 1e-14);
        prop_assert!(g >= 0.0);
    }

    #[test]
    fn csr_round_trip_and_transpose(m in (1usize..=12).prop_flat_map(sparse_matrix)) {
        let a = CsrMatrix::from_dense(&m);
        prop_assert_eq!(a.to_dense(), m.clone());
        prop_assert_eq!(a.transpose().to_dense(), m.transpose());
        for i in 0..a.nrows() {
            let cols: Vec<usize> = a.row(i).map(|(j, _)| j).collect();
            prop_assert!(cols.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
