//! Eigensolvers for real symmetric and complex Hermitian matrices.
//!
//! `sym_eig` / `herm_eig` use cyclic Jacobi and return eigenvectors. The
//! `*_eigvals` variants reduce to a real tridiagonal matrix with Householder
//! reflectors and then run implicit QL; they return eigenvalues only and are
//! what the oracle uses on its N x N kernels.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use super::{HermitianMatrix, RealMatrix, JACOBI_TOL, MAX_JACOBI_SWEEPS};
use crate::{Error, Result};

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending and
/// eigenvectors in the matching columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: RealMatrix,
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending and
/// eigenvectors in the matching columns of a unitary matrix.
#[derive(Clone, Debug)]
pub struct HermEigen {
    pub values: Vec<f64>,
    pub vectors: HermitianMatrix,
}

trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_re(x: f64) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn conj(self) -> Self;
    fn abs_sq(self) -> f64;
    fn scale(self, k: f64) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_re(x: f64) -> Self {
        x
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn conj(self) -> Self {
        self
    }
    fn abs_sq(self) -> f64 {
        self * self
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs_sq(self) -> f64 {
        self.norm_sqr()
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
}

/// Cyclic Jacobi on a dense row-major `n x n` Hermitian array. On return the
/// array is diagonal and `v` holds the accumulated unitary.
fn jacobi<T: Scalar>(a: &mut [T], v: &mut [T], n: usize) -> Result<()> {
    let total: f64 = a.iter().map(|x| x.abs_sq()).sum::<f64>().sqrt();
    if total == 0.0 {
        return Ok(());
    }
    let off = |a: &[T]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j].abs_sq();
                }
            }
        }
        s.sqrt()
    };
    for _ in 0..MAX_JACOBI_SWEEPS {
        if off(a) <= JACOBI_TOL * total {
            return Ok(());
        }
        for p in 0..n {
            for q in p + 1..n {
                let z = a[p * n + q];
                let zabs = z.abs_sq().sqrt();
                if zabs == 0.0 {
                    continue;
                }
                let app = a[p * n + p].re();
                let aqq = a[q * n + q].re();
                // Skip entries already negligible against both diagonals.
                if zabs <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[p * n + q] = T::zero();
                    a[q * n + p] = T::zero();
                    continue;
                }
                // phase = conj(z)/|z| turns the pivot real; then a real
                // rotation annihilates it.
                let phase = z.conj().scale(1.0 / zabs);
                let zeta = (aqq - app) / (2.0 * zabs);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = [[c, s], [-s·phase, c·phase]] acting on (p, q).
                let upp = T::from_re(c);
                let upq = T::from_re(s);
                let uqp = phase.scale(-s);
                let uqq = phase.scale(c);
                // A <- A U (columns p, q)
                for r in 0..n {
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = arp * upp + arq * uqp;
                    a[r * n + q] = arp * upq + arq * uqq;
                }
                // A <- Uᴴ A (rows p, q)
                for col in 0..n {
                    let apc = a[p * n + col];
                    let aqc = a[q * n + col];
                    a[p * n + col] = upp.conj() * apc + uqp.conj() * aqc;
                    a[q * n + col] = upq.conj() * apc + uqq.conj() * aqc;
                }
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
                a[p * n + p] = T::from_re(a[p * n + p].re());
                a[q * n + q] = T::from_re(a[q * n + q].re());
                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = vrp * upp + vrq * uqp;
                    v[r * n + q] = vrp * upq + vrq * uqq;
                }
            }
        }
    }
    if off(a) <= JACOBI_TOL * total {
        Ok(())
    } else {
        Err(Error::NoConvergence {
            iterations: MAX_JACOBI_SWEEPS,
        })
    }
}

fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    idx
}

/// Jacobi eigendecomposition of a real symmetric matrix.
pub fn sym_eig(m: &RealMatrix) -> Result<Eigen> {
    let n = m.require_symmetric()?;
    let mut a = m.symmetrized().into_vec();
    let mut v = RealMatrix::identity(n).into_vec();
    jacobi(&mut a, &mut v, n)?;
    let raw: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    let order = sorted_order(&raw);
    let values = order.iter().map(|&k| raw[k]).collect();
    let vectors = RealMatrix::from_fn(n, n, |i, j| v[i * n + order[j]]);
    Ok(Eigen { values, vectors })
}

/// Jacobi eigendecomposition of a Hermitian matrix.
pub fn herm_eig(m: &HermitianMatrix) -> Result<HermEigen> {
    let n = m.dim();
    if !m.is_hermitian(1e-12) {
        return Err(Error::NotSymmetric);
    }
    let mut a = m.as_slice().to_vec();
    let mut v = HermitianMatrix::identity(n).as_slice().to_vec();
    jacobi(&mut a, &mut v, n)?;
    let raw: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let order = sorted_order(&raw);
    let values = order.iter().map(|&k| raw[k]).collect();
    let vectors = HermitianMatrix::from_fn(n, |i, j| v[i * n + order[j]]);
    Ok(HermEigen { values, vectors })
}

/// Householder reduction of a Hermitian array to real tridiagonal form.
/// Returns `(diag, sub)` with `sub[k]` coupling rows `k` and `k + 1`.
fn tridiagonalize<T: Scalar>(a: &mut [T], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut sub = vec![0.0; n];
    let mut v = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        let alpha = a[(k + 1) * n + k];
        let modulus = |z: T| z.re().hypot(z.im());
        let scale = (k + 2..n).map(|i| modulus(a[i * n + k])).fold(modulus(alpha), f64::max);
        if scale < f64::MIN_POSITIVE {
            // Nothing left to annihilate at working precision.
            sub[k] = 0.0;
            continue;
        }
        let xnorm_sq: f64 = (k + 2..n).map(|i| (modulus(a[i * n + k]) / scale).powi(2)).sum();
        if xnorm_sq == 0.0 && alpha.im() == 0.0 {
            sub[k] = alpha.re();
            continue;
        }
        let norm = scale * ((modulus(alpha) / scale).powi(2) + xnorm_sq).sqrt();
        let beta = if alpha.re() >= 0.0 { -norm } else { norm };
        // H = I - tau v vᴴ with Hᴴ x = beta e₁ and v₀ = 1.
        let tau = (T::from_re(beta) - alpha).scale(1.0 / beta);
        // 1/(alpha - beta) without squaring tiny moduli.
        let z = (alpha - T::from_re(beta)).scale(1.0 / scale);
        let inv = z.conj().scale(1.0 / (z.abs_sq() * scale));
        v[0] = T::one();
        for i in 1..m {
            v[i] = a[(k + 1 + i) * n + k] * inv;
        }
        // w = tau A v on the trailing block.
        for (i, wi) in w.iter_mut().enumerate().take(m) {
            let row = (k + 1 + i) * n + k + 1;
            let mut acc = T::zero();
            for j in 0..m {
                acc += a[row + j] * v[j];
            }
            *wi = tau * acc;
        }
        // w -= (tau/2)(wᴴ v) v
        let mut dot = T::zero();
        for i in 0..m {
            dot += w[i].conj() * v[i];
        }
        let corr = tau * dot.scale(-0.5);
        for i in 0..m {
            let vi = v[i];
            w[i] += corr * vi;
        }
        // A <- A - v wᴴ - w vᴴ
        for i in 0..m {
            let row = (k + 1 + i) * n + k + 1;
            let (vi, wi) = (v[i], w[i]);
            for j in 0..m {
                a[row + j] -= vi * w[j].conj() + wi * v[j].conj();
            }
        }
        sub[k] = beta;
    }
    let diag = (0..n).map(|i| a[i * n + i].re()).collect();
    (diag, sub)
}

/// Implicit QL with Wilkinson-style shifts on a symmetric tridiagonal matrix.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    // Absolute deflation as well as relative: low-rank inputs have clusters
    // of eigenvalues near zero that never pass the relative test alone.
    let norm = (0..n).map(|i| d[i].abs() + e[i].abs()).fold(0.0, f64::max);
    let floor = f64::EPSILON * norm;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::NoConvergence { iterations });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigenvalues (ascending) of a real symmetric matrix via Householder + QL.
pub fn sym_eigvals(m: &RealMatrix) -> Result<Vec<f64>> {
    let n = m.require_symmetric()?;
    let mut a = m.symmetrized().into_vec();
    let (mut d, mut e) = tridiagonalize(&mut a, n);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues (ascending) of a Hermitian matrix via Householder + QL.
///
/// Matrices with an identically zero imaginary part take the real path.
pub fn herm_eigvals(m: &HermitianMatrix) -> Result<Vec<f64>> {
    if m.is_real() {
        return sym_eigvals(&m.real_part());
    }
    if !m.is_hermitian(1e-12) {
        return Err(Error::NotSymmetric);
    }
    let n = m.dim();
    let mut a = m.as_slice().to_vec();
    let (mut d, mut e) = tridiagonalize(&mut a, n);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_spectrum_sorted() {
        let e = sym_eig(&RealMatrix::from_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        // eigenvector for 1 is e₂
        assert_eq!(e.vectors[(1, 0)].abs(), 1.0);
    }

    #[test]
    fn swap_matrix() {
        let m = RealMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let e = sym_eig(&m).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
        let ev = sym_eigvals(&m).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hermitian_identity_and_pauli_y() {
        let e = herm_eig(&HermitianMatrix::identity(2)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
        let y = HermitianMatrix::from_row_major(
            2,
            vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        )
        .unwrap();
        let e = herm_eig(&y).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
        let ev = herm_eigvals(&y).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hermitian_eigenvectors_satisfy_equation() {
        let h = HermitianMatrix::from_row_major(
            3,
            vec![
                c(2.0, 0.0),
                c(1.0, 1.0),
                c(0.0, -0.5),
                c(1.0, -1.0),
                c(3.0, 0.0),
                c(0.25, 0.0),
                c(0.0, 0.5),
                c(0.25, 0.0),
                c(-1.0, 0.0),
            ],
        )
        .unwrap();
        let e = herm_eig(&h).unwrap();
        let hv = h.matmul(&e.vectors).unwrap();
        for j in 0..3 {
            for i in 0..3 {
                let lhs = hv[(i, j)];
                let rhs = e.vectors[(i, j)] * e.values[j];
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
        let fast = herm_eigvals(&h).unwrap();
        for (a, b) in fast.iter().zip(&e.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_entries_and_near_zero_clusters() {
        // Rank one plus entries far below the square root of the smallest
        // normal number; squaring them underflows.
        let n = 40;
        let u: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar((-(k as f64) * 9.0).exp(), 0.3 * k as f64))
            .collect();
        let h = HermitianMatrix::from_fn(n, |i, j| u[i] * u[j].conj());
        let fast = herm_eigvals(&h).unwrap();
        let norm: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        assert!((fast[n - 1] - norm).abs() < 1e-14);
        assert!(fast[..n - 1].iter().all(|l| l.abs() < 1e-15));
        let slow = herm_eig(&h).unwrap().values;
        assert!((slow[n - 1] - norm).abs() < 1e-14);
    }

    #[test]
    fn empty_and_scalar() {
        assert!(sym_eigvals(&RealMatrix::zeros(0, 0)).unwrap().is_empty());
        assert_eq!(sym_eigvals(&RealMatrix::from_diag(&[5.0])).unwrap(), vec![5.0]);
        assert_eq!(sym_eig(&RealMatrix::zeros(2, 2)).unwrap().values, vec![0.0, 0.0]);
    }
}
