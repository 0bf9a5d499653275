//! Small dense linear algebra: real row-major matrices, Hermitian complex
//! matrices, Cholesky, SPD inverse and square root, and eigensolvers.
//!
//! Everything here is sized for the problem at hand: covariance blocks of a
//! few modes, plus the N x N position kernels the oracle diagonalizes.

mod eig;

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

pub use eig::{herm_eig, herm_eigvals, sym_eig, sym_eigvals, Eigen, HermEigen};

use crate::{Error, Result};

/// Jacobi sweep limit before reporting `NoConvergence`.
pub const MAX_JACOBI_SWEEPS: usize = 100;

/// Relative off-diagonal Frobenius norm at which Jacobi stops.
pub const JACOBI_TOL: f64 = 1e-12;

/// Dense real matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major entries. Fails if the entry count does
    /// not match or an entry is not finite.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(r, c, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diag().iter().sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * k).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// True when `|a_ij - a_ji| <= tol * max|a|`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        (0..self.rows)
            .all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol * scale))
    }

    pub(crate) fn require_square(&self) -> Result<usize> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        Ok(self.rows)
    }

    fn require_symmetric(&self) -> Result<usize> {
        let n = self.require_square()?;
        if !self.is_symmetric(1e-12) {
            return Err(Error::NotSymmetric);
        }
        Ok(n)
    }

    /// Assembles `[[a, b], [c, d]]` from four equally sized square blocks.
    pub fn block2(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        let s = a.require_square()?;
        for m in [b, c, d] {
            if m.rows != s || m.cols != s {
                return Err(Error::DimensionMismatch {
                    expected: s,
                    found: m.rows.max(m.cols),
                });
            }
        }
        Ok(Self::from_fn(2 * s, 2 * s, |i, j| match (i < s, j < s) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - s)],
            (false, true) => c[(i - s, j)],
            (false, false) => d[(i - s, j - s)],
        }))
    }

    /// Copies the `len x len` block starting at `(r0, c0)`.
    pub fn sub_block(&self, r0: usize, c0: usize, len: usize) -> Self {
        Self::from_fn(len, len, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (r, c) = (self.rows + other.rows, self.cols + other.cols);
        Self::from_fn(r, c, |i, j| {
            if i < self.rows && j < self.cols {
                self[(i, j)]
            } else if i >= self.rows && j >= self.cols {
                other[(i - self.rows, j - self.cols)]
            } else {
                0.0
            }
        })
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for RealMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = self.data.chunks(self.cols.max(1)).collect();
        f.debug_struct("RealMatrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("data", &rows)
            .finish()
    }
}

/// Square complex matrix, row-major, expected to be conjugate-symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Wraps row-major entries after checking conjugate symmetry to `1e-12`
    /// relative.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        let m = Self { dim, data };
        if !m.is_hermitian(1e-12) {
            return Err(Error::NotSymmetric);
        }
        Ok(m)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_real(m: &RealMatrix) -> Result<Self> {
        let n = m.require_square()?;
        Ok(Self::from_fn(n, |i, j| Complex64::new(m[(i, j)], 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * k).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        (0..self.dim).all(|i| {
            (0..=i).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol * scale)
        })
    }

    /// True when every entry has exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn real_part(&self) -> RealMatrix {
        RealMatrix::from_fn(self.dim, self.dim, |i, j| self[(i, j)].re)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }
}

impl Index<(usize, usize)> for HermitianMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for HermitianMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Lower-triangular `L` with `L Lᵀ = m`.
///
/// A pivot at or below `n · eps · max(diag)` is reported as
/// `NotPositiveDefinite`; there is no silent regularization.
pub fn cholesky(m: &RealMatrix) -> Result<RealMatrix> {
    let n = m.require_symmetric()?;
    let max_diag = m.diag().iter().fold(0.0_f64, |a, &d| a.max(d));
    let threshold = n as f64 * f64::EPSILON * max_diag;
    let mut l = RealMatrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = m[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > threshold) {
            return Err(Error::NotPositiveDefinite);
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut acc = m[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = acc / d;
        }
    }
    Ok(l)
}

/// Determinant of an SPD matrix from its Cholesky diagonal.
pub fn det_spd(m: &RealMatrix) -> Result<f64> {
    let l = cholesky(m)?;
    Ok(l.diag().iter().map(|d| d * d).product())
}

/// Inverse of an SPD matrix via Cholesky; the result is symmetrized.
pub fn inverse_spd(m: &RealMatrix) -> Result<RealMatrix> {
    let l = cholesky(m)?;
    let n = l.rows();
    // Invert L by forward substitution, then m⁻¹ = L⁻ᵀ L⁻¹.
    let mut linv = RealMatrix::zeros(n, n);
    for j in 0..n {
        linv[(j, j)] = 1.0 / l[(j, j)];
        for i in j + 1..n {
            let mut acc = 0.0;
            for k in j..i {
                acc -= l[(i, k)] * linv[(k, j)];
            }
            linv[(i, j)] = acc / l[(i, i)];
        }
    }
    let inv = linv.transpose().matmul(&linv)?;
    Ok(inv.symmetrized())
}

/// Solves `m X = b` for SPD `m`.
pub fn solve_spd(m: &RealMatrix, b: &RealMatrix) -> Result<RealMatrix> {
    let l = cholesky(m)?;
    let n = l.rows();
    if b.rows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.rows(),
        });
    }
    let mut x = b.clone();
    for c in 0..b.cols() {
        for i in 0..n {
            let mut acc = x[(i, c)];
            for k in 0..i {
                acc -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = acc / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut acc = x[(i, c)];
            for k in i + 1..n {
                acc -= l[(k, i)] * x[(k, c)];
            }
            x[(i, c)] = acc / l[(i, i)];
        }
    }
    Ok(x)
}

/// Symmetric positive definite square root via the eigendecomposition.
pub fn sqrt_spd(m: &RealMatrix) -> Result<RealMatrix> {
    // Cholesky doubles as the definiteness check with the shared threshold.
    cholesky(m)?;
    let Eigen { values, vectors } = sym_eig(m)?;
    if values.iter().any(|&v| v <= 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let n = values.len();
    let root = RealMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| vectors[(i, k)] * values[k].sqrt() * vectors[(j, k)])
            .sum()
    });
    Ok(root.symmetrized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(rows: &[&[f64]]) -> RealMatrix {
        RealMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn cholesky_identity() {
        let l = cholesky(&RealMatrix::identity(3)).unwrap();
        assert_eq!(l, RealMatrix::identity(3));
    }

    #[test]
    fn cholesky_two_by_two() {
        // [[2,0],[1,2]] · [[2,1],[0,2]] = [[4,2],[2,5]]
        let l = cholesky(&m(&[&[4.0, 2.0], &[2.0, 5.0]])).unwrap();
        assert!(l.max_abs_diff(&m(&[&[2.0, 0.0], &[1.0, 2.0]])) < 1e-15);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let err = cholesky(&m(&[&[1.0, 2.0], &[2.0, 1.0]])).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite));
    }

    #[test]
    fn cholesky_rejects_tiny_pivot() {
        let err = cholesky(&m(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite));
    }

    #[test]
    fn cholesky_rejects_asymmetric() {
        let err = cholesky(&m(&[&[4.0, 2.0], &[1.0, 5.0]])).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric));
    }

    #[test]
    fn inverse_diagonal() {
        let inv = inverse_spd(&RealMatrix::from_diag(&[2.0, 4.0])).unwrap();
        assert!(inv.max_abs_diff(&RealMatrix::from_diag(&[0.5, 0.25])) < 1e-15);
        let inv = inverse_spd(&RealMatrix::identity(2)).unwrap();
        assert_eq!(inv, RealMatrix::identity(2));
    }

    #[test]
    fn inverse_product_is_identity() {
        let a = m(&[&[4.0, 2.0], &[2.0, 5.0]]);
        let prod = a.matmul(&inverse_spd(&a).unwrap()).unwrap();
        assert!(prod.max_abs_diff(&RealMatrix::identity(2)) <= 1e-10);
    }

    #[test]
    fn solve_matches_inverse() {
        let a = m(&[&[4.0, 2.0, 0.5], &[2.0, 5.0, 1.0], &[0.5, 1.0, 3.0]]);
        let b = m(&[&[1.0, 0.0], &[2.0, 1.0], &[3.0, -1.0]]);
        let x = solve_spd(&a, &b).unwrap();
        let y = inverse_spd(&a).unwrap().matmul(&b).unwrap();
        assert!(x.max_abs_diff(&y) < 1e-13);
    }

    #[test]
    fn sqrt_examples() {
        let r = sqrt_spd(&RealMatrix::from_diag(&[4.0, 9.0])).unwrap();
        assert!(r.max_abs_diff(&RealMatrix::from_diag(&[2.0, 3.0])) < 1e-14);
        let r = sqrt_spd(&RealMatrix::identity(5)).unwrap();
        assert!(r.max_abs_diff(&RealMatrix::identity(5)) < 1e-14);
        let a = m(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let r = sqrt_spd(&a).unwrap();
        let sq = r.matmul(&r).unwrap();
        assert!(sq.max_abs_diff(&a) <= 1e-10 * a.max_abs());
        // eigenvalues 1 and 3: root has entries (1 ± √3)/2
        assert_relative_eq!(r[(0, 0)], (1.0 + 3f64.sqrt()) / 2.0, epsilon = 1e-14);
        assert_relative_eq!(r[(0, 1)], (3f64.sqrt() - 1.0) / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        assert!(matches!(
            sqrt_spd(&RealMatrix::from_diag(&[1.0, -1.0])),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn from_row_major_checks() {
        assert!(RealMatrix::from_row_major(2, 2, vec![1.0; 3]).is_err());
        assert!(matches!(
            RealMatrix::from_row_major(1, 1, vec![f64::NAN]),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn block_and_direct_sum() {
        let a = RealMatrix::from_diag(&[1.0]);
        let b = RealMatrix::from_diag(&[2.0]);
        let c = RealMatrix::from_diag(&[3.0]);
        let d = RealMatrix::from_diag(&[4.0]);
        let full = RealMatrix::block2(&a, &b, &c, &d).unwrap();
        assert_eq!(full.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(full.sub_block(1, 0, 1)[(0, 0)], 3.0);
        let ds = a.direct_sum(&d);
        assert_eq!(ds.as_slice(), &[1.0, 0.0, 0.0, 4.0]);
    }
}
