//! Random valid covariances built as `S diag(ν, ν) Sᵀ` from explicit
//! symplectic factors, so the symplectic spectrum is known in advance.

#![allow(dead_code)]

use apm::{CovarianceMatrix, RealMatrix};
use proptest::prelude::*;
use rand::Rng;

/// Number of uniform `[-1, 1]` parameters consumed by [`state_from`].
pub fn param_count(s: usize) -> usize {
    3 * s + s * s
}

fn givens(n: usize, i: usize, j: usize, theta: f64) -> RealMatrix {
    let mut g = RealMatrix::identity(n);
    let (c, s) = (theta.cos(), theta.sin());
    g[(i, i)] = c;
    g[(j, j)] = c;
    g[(i, j)] = -s;
    g[(j, i)] = s;
    g
}

fn mul(a: &RealMatrix, b: &RealMatrix) -> RealMatrix {
    a.matmul(b).unwrap()
}

/// `S` and the chosen symplectic eigenvalues. `nus` overrides the spectrum
/// when given.
pub fn symplectic_parts(s: usize, p: &[f64], nus: Option<&[f64]>) -> (RealMatrix, Vec<f64>) {
    assert_eq!(p.len(), param_count(s));
    let n = 2 * s;
    let nu: Vec<f64> = match nus {
        Some(v) => v.to_vec(),
        None => p[..s].iter().map(|x| 0.5 + 1.5 * x.abs()).collect(),
    };
    let mut k = s;
    // Phase rotations of each (q_j, p_j).
    let mut sym = RealMatrix::identity(n);
    for j in 0..s {
        sym = mul(&givens(n, j, s + j, std::f64::consts::PI * p[k]), &sym);
        k += 1;
    }
    // Single-mode squeezers.
    let mut sq = RealMatrix::identity(n);
    for j in 0..s {
        let r = 0.8 * p[k];
        sq[(j, j)] = r.exp();
        sq[(s + j, s + j)] = (-r).exp();
        k += 1;
    }
    sym = mul(&sq, &sym);
    // Passive mixing R ⊕ R.
    let mut r = RealMatrix::identity(s);
    for i in 0..s {
        for j in i + 1..s {
            r = mul(&givens(s, i, j, std::f64::consts::PI * p[k]), &r);
            k += 1;
        }
    }
    sym = mul(&r.direct_sum(&r), &sym);
    // Shear p → p + T q with T symmetric.
    let mut shear = RealMatrix::identity(n);
    for i in 0..s {
        for j in i..s {
            let t = 0.5 * p[k];
            shear[(s + i, j)] = t;
            shear[(s + j, i)] = t;
            k += 1;
        }
    }
    sym = mul(&shear, &sym);
    assert_eq!(k, p.len());
    (sym, nu)
}

pub fn state_with(s: usize, p: &[f64], nus: Option<&[f64]>) -> (CovarianceMatrix, Vec<f64>) {
    let (sym, nu) = symplectic_parts(s, p, nus);
    let mut d = nu.clone();
    d.extend_from_slice(&nu);
    let full = mul(&mul(&sym, &RealMatrix::from_diag(&d)), &sym.transpose()).symmetrized();
    (CovarianceMatrix::from_full(&full).unwrap(), nu)
}

pub fn state_from(s: usize, p: &[f64]) -> (CovarianceMatrix, Vec<f64>) {
    state_with(s, p, None)
}

pub fn pure_state_from(s: usize, p: &[f64]) -> CovarianceMatrix {
    state_with(s, p, Some(&vec![0.5; s])).0
}

/// Strategy: `(s, params)` with `s` in `1..=max_s`.
pub fn params(max_s: usize) -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1..=max_s).prop_flat_map(|s| (Just(s), prop::collection::vec(-1.0f64..1.0, param_count(s))))
}

pub fn random_params(rng: &mut impl Rng, s: usize) -> Vec<f64> {
    (0..param_count(s)).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Random SPD matrix `B Bᵀ + floor·I` from `n²` parameters.
pub fn spd_from(n: usize, p: &[f64], floor: f64) -> RealMatrix {
    let b = RealMatrix::from_row_major(n, n, p.to_vec()).unwrap();
    b.matmul(&b.transpose())
        .unwrap()
        .add(&RealMatrix::identity(n).scale(floor))
        .unwrap()
        .symmetrized()
}

pub fn spd(max_n: usize) -> impl Strategy<Value = RealMatrix> {
    (1..=max_n).prop_flat_map(|n| prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |p| spd_from(n, &p, 0.1)))
}
