mod common;

use apm::mats::{cholesky, det_spd, herm_eig, herm_eigvals, inverse_spd, sqrt_spd, sym_eig, sym_eigvals};
use apm::{HermitianMatrix, RealMatrix};
use common::spd;
use num_complex::Complex64;
use proptest::prelude::*;

fn rel(a: &RealMatrix, b: &RealMatrix) -> f64 {
    a.max_abs_diff(b) / b.max_abs().max(1e-300)
}

proptest! {
    #[test]
    fn inverse_is_an_involution(m in spd(6)) {
        let back = inverse_spd(&inverse_spd(&m).unwrap()).unwrap();
        prop_assert!(rel(&back, &m) < 1e-8);
    }

    #[test]
    fn inverse_times_matrix_is_identity(m in spd(6)) {
        let p = m.matmul(&inverse_spd(&m).unwrap()).unwrap();
        prop_assert!(p.max_abs_diff(&RealMatrix::identity(m.rows())) < 1e-9);
    }

    #[test]
    fn eigenvalues_match_trace_and_determinant(m in spd(6)) {
        let e = sym_eig(&m).unwrap();
        let sum: f64 = e.values.iter().sum();
        prop_assert!((sum - m.trace()).abs() <= 1e-10 * m.trace().abs());
        let prod: f64 = e.values.iter().product();
        let l = cholesky(&m).unwrap();
        let det: f64 = l.diag().iter().map(|x| x * x).product();
        prop_assert!((prod - det).abs() <= 1e-9 * det);
        prop_assert!((det_spd(&m).unwrap() - det).abs() <= 1e-12 * det);
    }

    #[test]
    fn eigenvectors_are_orthonormal_and_diagonalize(m in spd(6)) {
        let e = sym_eig(&m).unwrap();
        let v = &e.vectors;
        let n = m.rows();
        prop_assert!(v.transpose().matmul(v).unwrap().max_abs_diff(&RealMatrix::identity(n)) < 1e-12);
        let rebuilt = v.matmul(&RealMatrix::from_diag(&e.values)).unwrap().matmul(&v.transpose()).unwrap();
        prop_assert!(rel(&rebuilt, &m) < 1e-11);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn fast_and_jacobi_spectra_agree(m in spd(8)) {
        let slow = sym_eig(&m).unwrap().values;
        let fast = sym_eigvals(&m).unwrap();
        let scale = m.max_abs();
        for (a, b) in slow.iter().zip(&fast) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn sqrt_commutes_with_inverse(m in spd(5)) {
        let a = sqrt_spd(&inverse_spd(&m).unwrap()).unwrap();
        let b = inverse_spd(&sqrt_spd(&m).unwrap()).unwrap();
        prop_assert!(rel(&a, &b) < 1e-8);
        let r = sqrt_spd(&m).unwrap();
        prop_assert!(rel(&r.matmul(&r).unwrap(), &m) < 1e-10);
    }

    #[test]
    fn cholesky_reconstructs(m in spd(6)) {
        let l = cholesky(&m).unwrap();
        for i in 0..m.rows() {
            for j in i + 1..m.rows() {
                prop_assert_eq!(l[(i, j)], 0.0);
            }
        }
        prop_assert!(rel(&l.matmul(&l.transpose()).unwrap(), &m) < 1e-12);
    }

    #[test]
    fn hermitian_eigenpairs(
        n in 1usize..7,
        raw in prop::collection::vec(-1.0f64..1.0, 2 * 49),
    ) {
        let h = HermitianMatrix::from_fn(n, |i, j| {
            let (a, b) = (i.min(j), i.max(j));
            let z = Complex64::new(raw[a * 7 + b], if a == b { 0.0 } else { raw[49 + a * 7 + b] });
            if i <= j { z } else { z.conj() }
        });
        let e = herm_eig(&h).unwrap();
        let hv = h.matmul(&e.vectors).unwrap();
        for j in 0..n {
            for i in 0..n {
                prop_assert!((hv[(i, j)] - e.vectors[(i, j)] * e.values[j]).norm() < 1e-11);
            }
        }
        let vv = e.vectors.adjoint().matmul(&e.vectors).unwrap();
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((vv[(i, j)] - want).norm() < 1e-12);
            }
        }
        let fast = herm_eigvals(&h).unwrap();
        for (a, b) in fast.iter().zip(&e.values) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let tr: f64 = e.values.iter().sum();
        prop_assert!((tr - h.trace().re).abs() < 1e-12);
    }
}

#[test]
fn indefinite_and_asymmetric_inputs_are_rejected() {
    let indefinite = RealMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
    assert!(matches!(cholesky(&indefinite), Err(apm::Error::NotPositiveDefinite)));
    assert!(inverse_spd(&indefinite).is_err());
    let asym = RealMatrix::from_rows(&[&[1.0, 0.5], &[0.0, 1.0]]).unwrap();
    assert!(cholesky(&asym).is_err());
    assert!(sym_eig(&asym).is_err());
}
