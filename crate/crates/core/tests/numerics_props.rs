mod common;

use cff_core::numerics::{self, Matrix};
use common::{matrix, max_abs, unit};
use proptest::prelude::*;

fn hermitian(n: usize, seed: u64) -> Matrix {
    let g = matrix(n, n, seed);
    (&g + g.adjoint()).scale(0.5)
}

fn opnorm_oracle(m: &Matrix) -> f64 {
    // largest eigenvalue of M*M, via nalgebra directly
    common::hermitian_extremes(&(m.adjoint() * m))
        .1
        .max(0.0)
        .sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_reconstructs(n in 1usize..=16, seed: u64) {
        let m = hermitian(n, seed);
        let s = numerics::hermitian_spectrum(&m, 1e-9).unwrap();
        let d = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n, s.values.iter().map(|&x| common::c(x, 0.0))));
        let back = &s.vectors * d * s.vectors.adjoint();
        prop_assert!(numerics::fro(&(back - &m)) <= 1e-9 * numerics::fro(&m).max(1e-300));
        prop_assert!(max_abs(&(s.vectors.adjoint() * &s.vectors - Matrix::identity(n, n))) <= 1e-10);
        prop_assert!(s.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn psd_sqrt_squares_back(n in 1usize..=10, k in 1usize..=10, seed: u64) {
        // rank-deficient when k < n
        let b = matrix(n, k.min(n), seed);
        let m = &b * b.adjoint();
        let r = numerics::psd_sqrt(&m, 1e-9).unwrap();
        prop_assert!(max_abs(&(&r - r.adjoint())) == 0.0 || numerics::hermitian_defect(&r) <= 1e-12);
        prop_assert!(common::hermitian_extremes(&r).0 >= -1e-12 * numerics::operator_norm(&r).unwrap().max(1.0));
        let scale = numerics::operator_norm(&m).unwrap().max(1.0);
        prop_assert!(numerics::operator_norm(&(&r * &r - &m)).unwrap() <= 1e-9 * scale);
    }

    #[test]
    fn operator_norm_dominates_samples(rows in 1usize..=8, cols in 1usize..=8, seed: u64) {
        let m = matrix(rows, cols, seed);
        let norm = numerics::operator_norm(&m).unwrap();
        prop_assert!((norm - opnorm_oracle(&m)).abs() <= 1e-9 * norm.max(1.0));
        for t in 0..100 {
            let v = unit(cols, seed.wrapping_add(t));
            prop_assert!((&m * v).norm() <= norm + 1e-9);
        }
    }

    #[test]
    fn trace_norm_unitary_invariance(n in 1usize..=8, seed: u64) {
        let m = matrix(n, n, seed);
        let mut rng = cff_core::generate::rng_from_seed(seed.wrapping_add(1));
        let u = cff_core::generate::random_unitary(&mut rng, n, common::field(seed)).unwrap();
        let v = cff_core::generate::random_unitary(&mut rng, n, common::field(seed)).unwrap();
        let t = numerics::trace_norm(&m).unwrap();
        prop_assert!(t + 1e-12 >= numerics::operator_norm(&m).unwrap());
        prop_assert!((numerics::trace_norm(&(&u * &m * &v)).unwrap() - t).abs() <= 1e-9 * t.max(1.0));
        // tr √(M*M)
        let root = numerics::psd_sqrt(&(m.adjoint() * &m), 1e-9).unwrap();
        prop_assert!((root.trace().re - t).abs() <= 1e-8 * t.max(1.0));
    }

    #[test]
    fn penrose_identities(rows in 1usize..=8, cols in 1usize..=8, r in 1usize..=8, seed: u64) {
        let r = r.min(rows).min(cols);
        let a = matrix(rows, r, seed) * matrix(r, cols, seed.wrapping_add(7));
        let p = numerics::pinv(&a, 1e-12).unwrap();
        let tol = 1e-8 * numerics::operator_norm(&a).unwrap().max(1.0);
        let ptol = 1e-8 * numerics::operator_norm(&p).unwrap().max(1.0);
        prop_assert!(max_abs(&(&a * &p * &a - &a)) <= tol);
        prop_assert!(max_abs(&(&p * &a * &p - &p)) <= ptol);
        let ap = &a * &p;
        let pa = &p * &a;
        prop_assert!(max_abs(&(&ap - ap.adjoint())) <= 1e-8);
        prop_assert!(max_abs(&(&pa - pa.adjoint())) <= 1e-8);
        prop_assert_eq!(numerics::rank(&a, 1e-10).unwrap(), r);
    }

    #[test]
    fn intersection_dimension_matches_rank_formula(
        n in 2usize..=8, ka in 1usize..=8, kb in 1usize..=8, shared in 0usize..=8, seed: u64,
    ) {
        let ka = ka.min(n);
        let kb = kb.min(n);
        // a common block of `shared` columns makes the intersection nontrivial
        let shared = shared.min(ka).min(kb);
        let common_cols = matrix(n, shared, seed);
        let a = Matrix::from_fn(n, ka, |i, j| if j < shared { common_cols[(i, j)] } else { matrix(n, ka, seed ^ 1)[(i, j)] });
        let b = Matrix::from_fn(n, kb, |i, j| if j < shared { common_cols[(i, j)] } else { matrix(n, kb, seed ^ 2)[(i, j)] });
        let qa = numerics::orthonormalize(&a, 1e-10).unwrap();
        let qb = numerics::orthonormalize(&b, 1e-10).unwrap();
        let stacked = Matrix::from_fn(n, qa.ncols() + qb.ncols(), |i, j| {
            if j < qa.ncols() { qa[(i, j)] } else { qb[(i, j - qa.ncols())] }
        });
        let expect = qa.ncols() + qb.ncols() - numerics::rank(&stacked, 1e-10).unwrap();
        let got = numerics::subspace_intersection(&[qa.clone(), qb.clone()], 1e-8).unwrap();
        prop_assert_eq!(got.ncols(), expect);
        // every returned vector lies in both subspaces
        for v in got.column_iter() {
            prop_assert!((&qa * (qa.adjoint() * v) - v).norm() <= 1e-8);
            prop_assert!((&qb * (qb.adjoint() * v) - v).norm() <= 1e-8);
        }
    }
}
