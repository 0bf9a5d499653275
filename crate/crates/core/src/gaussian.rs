//! Gaussian states described by their covariance matrix: validity,
//! symplectic spectra and von Neumann entropy.
//!
//! Conventions: natural units with ħ = 1, canonical ordering
//! `(q₁…q_s, p₁…p_s)`, and the symplectic form `Δ = [[0, I], [−I, 0]]`.
//! A covariance is a valid quantum state iff its smallest symplectic
//! eigenvalue is at least 1/2.

use serde::{Deserialize, Serialize};

use crate::mats::{self, cholesky, sqrt_spd, RealMatrix};
use crate::{Error, Result};

/// Absolute slack on `ν_min - 1/2` when deciding validity. Pure states sit
/// exactly on the boundary and must pass.
pub const VALIDITY_TOL: f64 = 1e-9;

const PAIRING_TOL: f64 = 1e-8;

/// Covariance matrix `α = [[α_qq, α_qp], [α_pq, α_pp]]` of an `s`-mode state,
/// with `α_pq = α_qpᵀ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CovarianceWire", into = "CovarianceWire")]
pub struct CovarianceMatrix {
    qq: RealMatrix,
    qp: RealMatrix,
    pp: RealMatrix,
}

#[derive(Serialize, Deserialize)]
struct CovarianceWire {
    s: usize,
    alpha_qq: Vec<f64>,
    alpha_qp: Vec<f64>,
    alpha_pp: Vec<f64>,
}

impl TryFrom<CovarianceWire> for CovarianceMatrix {
    type Error = Error;

    fn try_from(w: CovarianceWire) -> Result<Self> {
        CovarianceMatrix::new(
            RealMatrix::from_row_major(w.s, w.s, w.alpha_qq)?,
            RealMatrix::from_row_major(w.s, w.s, w.alpha_qp)?,
            RealMatrix::from_row_major(w.s, w.s, w.alpha_pp)?,
        )
    }
}

impl From<CovarianceMatrix> for CovarianceWire {
    fn from(a: CovarianceMatrix) -> Self {
        CovarianceWire {
            s: a.modes(),
            alpha_qq: a.qq.into_vec(),
            alpha_qp: a.qp.into_vec(),
            alpha_pp: a.pp.into_vec(),
        }
    }
}

impl CovarianceMatrix {
    /// Builds a covariance from its blocks. Checks shapes and symmetry of
    /// the diagonal blocks; physical validity is checked by [`validate`].
    pub fn new(qq: RealMatrix, qp: RealMatrix, pp: RealMatrix) -> Result<Self> {
        let s = qq.require_square()?;
        for m in [&qp, &pp] {
            if m.rows() != s || m.cols() != s {
                return Err(Error::DimensionMismatch {
                    expected: s,
                    found: m.rows().max(m.cols()),
                });
            }
        }
        if !qq.is_symmetric(1e-12) || !pp.is_symmetric(1e-12) {
            return Err(Error::NotSymmetric);
        }
        Ok(Self {
            qq: qq.symmetrized(),
            qp,
            pp: pp.symmetrized(),
        })
    }

    pub fn one_mode(qq: f64, qp: f64, pp: f64) -> Result<Self> {
        Self::new(
            RealMatrix::from_row_major(1, 1, vec![qq])?,
            RealMatrix::from_row_major(1, 1, vec![qp])?,
            RealMatrix::from_row_major(1, 1, vec![pp])?,
        )
    }

    /// Block-diagonal covariance with `α_qp = 0`.
    pub fn block_diagonal(qq: RealMatrix, pp: RealMatrix) -> Result<Self> {
        let s = qq.rows();
        Self::new(qq, RealMatrix::zeros(s, s), pp)
    }

    /// Splits a full `2s x 2s` matrix into blocks.
    pub fn from_full(full: &RealMatrix) -> Result<Self> {
        let n = full.require_square()?;
        if n % 2 != 0 {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                found: n,
            });
        }
        if !full.is_symmetric(1e-12) {
            return Err(Error::NotSymmetric);
        }
        let s = n / 2;
        Self::new(
            full.sub_block(0, 0, s),
            full.sub_block(0, s, s),
            full.sub_block(s, s, s),
        )
    }

    /// Thermal-like state `diag(ν, …, ν)` in every quadrature.
    pub fn isotropic(s: usize, nu: f64) -> Self {
        let d = RealMatrix::from_diag(&vec![nu; s]);
        Self {
            qq: d.clone(),
            qp: RealMatrix::zeros(s, s),
            pp: d,
        }
    }

    pub fn modes(&self) -> usize {
        self.qq.rows()
    }

    pub fn qq(&self) -> &RealMatrix {
        &self.qq
    }

    pub fn qp(&self) -> &RealMatrix {
        &self.qp
    }

    /// `α_pq = α_qpᵀ`.
    pub fn pq(&self) -> RealMatrix {
        self.qp.transpose()
    }

    pub fn pp(&self) -> &RealMatrix {
        &self.pp
    }

    /// The full `2s x 2s` matrix in `(q, p)` block layout.
    pub fn full(&self) -> RealMatrix {
        RealMatrix::block2(&self.qq, &self.qp, &self.pq(), &self.pp)
            .expect("blocks share the mode count")
    }

    /// Covariance of the tensor product of two states (modes of `self`
    /// first).
    pub fn direct_sum(&self, other: &Self) -> Self {
        Self {
            qq: self.qq.direct_sum(&other.qq),
            qp: self.qp.direct_sum(&other.qp),
            pp: self.pp.direct_sum(&other.pp),
        }
    }

    /// `α_qq α_pp − α_qp²` for a single mode.
    pub fn one_mode_discriminant(&self) -> Option<f64> {
        (self.modes() == 1).then(|| {
            let (a, b, c) = (self.qq[(0, 0)], self.pp[(0, 0)], self.qp[(0, 0)]);
            a * b - c * c
        })
    }
}

/// First moments `(m_q, m_p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanVector {
    pub m_q: Vec<f64>,
    pub m_p: Vec<f64>,
}

impl MeanVector {
    pub fn zero(s: usize) -> Self {
        Self {
            m_q: vec![0.0; s],
            m_p: vec![0.0; s],
        }
    }

    pub fn new(m_q: Vec<f64>, m_p: Vec<f64>) -> Result<Self> {
        if m_q.len() != m_p.len() {
            return Err(Error::DimensionMismatch {
                expected: m_q.len(),
                found: m_p.len(),
            });
        }
        if m_q.iter().chain(&m_p).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { m_q, m_p })
    }

    pub fn one_mode(m_q: f64, m_p: f64) -> Self {
        Self {
            m_q: vec![m_q],
            m_p: vec![m_p],
        }
    }

    pub fn modes(&self) -> usize {
        self.m_q.len()
    }
}

/// The symplectic form `Δ`. The sign only exists so tests can show the
/// spectrum does not depend on it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymplecticForm {
    modes: usize,
    sign: f64,
}

impl SymplecticForm {
    /// `[[0, I], [−I, 0]]`.
    pub fn standard(modes: usize) -> Self {
        Self { modes, sign: 1.0 }
    }

    /// `[[0, −I], [I, 0]]`.
    pub fn flipped(modes: usize) -> Self {
        Self { modes, sign: -1.0 }
    }

    pub fn matrix(&self) -> RealMatrix {
        let s = self.modes;
        RealMatrix::from_fn(2 * s, 2 * s, |i, j| {
            if j == i + s {
                self.sign
            } else if i == j + s {
                -self.sign
            } else {
                0.0
            }
        })
    }

    /// `Δ⁻¹ = −Δ`.
    pub fn inverse(&self) -> RealMatrix {
        self.matrix().scale(-1.0)
    }
}

/// Outcome of [`validate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    pub nu_min: f64,
    pub valid: bool,
}

/// Checks the uncertainty relation `ν_min ≥ 1/2` (within [`VALIDITY_TOL`]).
pub fn validate(alpha: &CovarianceMatrix) -> Result<Validity> {
    cholesky(alpha.qq())?;
    let nu_min = match symplectic_eigenvalues(alpha) {
        Ok(nu) => nu[0],
        // A covariance that is not even positive definite cannot be a state.
        Err(Error::NotPositiveDefinite) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(Validity {
        nu_min,
        valid: nu_min >= 0.5 - VALIDITY_TOL,
    })
}

/// Like [`validate`] but returns `InvalidState` on failure.
pub fn require_valid(alpha: &CovarianceMatrix) -> Result<Vec<f64>> {
    cholesky(alpha.qq())?;
    let nu = symplectic_eigenvalues(alpha).map_err(|e| match e {
        Error::NotPositiveDefinite => Error::InvalidState { nu_min: 0.0 },
        e => e,
    })?;
    if nu[0] < 0.5 - VALIDITY_TOL {
        return Err(Error::InvalidState { nu_min: nu[0] });
    }
    Ok(nu)
}

/// Symplectic eigenvalues `ν₁ ≤ … ≤ ν_s` of the covariance.
pub fn symplectic_eigenvalues(alpha: &CovarianceMatrix) -> Result<Vec<f64>> {
    symplectic_spectrum(&alpha.full(), &SymplecticForm::standard(alpha.modes()))
}

/// Symplectic spectrum of any SPD `2s x 2s` matrix: the moduli of the
/// eigenvalues of `Δ⁻¹ m`.
///
/// Computed as singular values of the antisymmetric `B = m^{1/2} Δ⁻¹ m^{1/2}`,
/// i.e. square roots of the eigenvalues of `B Bᵀ`, which come in pairs.
pub fn symplectic_spectrum(m: &RealMatrix, form: &SymplecticForm) -> Result<Vec<f64>> {
    let n = m.require_square()?;
    if n != 2 * form.modes {
        return Err(Error::DimensionMismatch {
            expected: 2 * form.modes,
            found: n,
        });
    }
    let root = sqrt_spd(m)?;
    let b = root.matmul(&form.inverse())?.matmul(&root)?;
    let bbt = b.matmul(&b.transpose())?.symmetrized();
    let values = mats::sym_eig(&bbt)?.values;
    let top = values.last().copied().unwrap_or(0.0).abs();
    let mut nu = Vec::with_capacity(form.modes);
    for pair in values.chunks(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if (hi - lo).abs() > PAIRING_TOL * hi.abs().max(1e-6 * top) {
            return Err(Error::PairingFailure(values));
        }
        nu.push((0.5 * (lo + hi)).max(0.0).sqrt());
    }
    Ok(nu)
}

/// Logarithm base used when reporting entropies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Nats,
    Bits,
}

impl LogBase {
    /// Converts a value in nats into this unit.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::Nats => nats,
            LogBase::Bits => nats / std::f64::consts::LN_2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LogBase::Nats => "nats",
            LogBase::Bits => "bits",
        }
    }
}

/// `g(x) = (x+1) ln(x+1) − x ln x`, the entropy of a thermal mode with mean
/// occupation `x`. `g(0) = 0`.
pub fn g(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::DomainError(format!("g requires x >= 0, got {x}")));
    }
    Ok(g_unchecked(x))
}

/// [`g`] in the requested unit.
pub fn g_in(x: f64, base: LogBase) -> Result<f64> {
    g(x).map(|v| base.from_nats(v))
}

pub(crate) fn g_unchecked(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    // ln(1+x) + x ln(1 + 1/x): avoids cancelling two large terms.
    x.ln_1p() + x * (1.0 / x).ln_1p()
}

/// `g(ν − 1/2)` for a symplectic eigenvalue, treating values within
/// [`VALIDITY_TOL`] below 1/2 as pure.
pub(crate) fn g_of_nu(nu: f64) -> Result<f64> {
    if nu < 0.5 - VALIDITY_TOL {
        return Err(Error::InvalidState { nu_min: nu });
    }
    Ok(g_unchecked((nu - 0.5).max(0.0)))
}

/// Von Neumann entropy `Σ_j g(ν_j − 1/2)` in nats.
pub fn entropy(alpha: &CovarianceMatrix) -> Result<f64> {
    let nu = require_valid(alpha)?;
    nu.into_iter().map(g_of_nu).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn one(qq: f64, qp: f64, pp: f64) -> CovarianceMatrix {
        CovarianceMatrix::one_mode(qq, qp, pp).unwrap()
    }

    #[test]
    fn vacuum_is_valid_and_pure() {
        let v = validate(&one(0.5, 0.0, 0.5)).unwrap();
        assert!(v.valid);
        assert_relative_eq!(v.nu_min, 0.5, epsilon = 1e-14);
        assert!(entropy(&one(0.5, 0.0, 0.5)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn squashed_vacuum_is_invalid() {
        let v = validate(&one(0.5, 0.0, 0.25)).unwrap();
        assert!(!v.valid);
        assert_relative_eq!(v.nu_min, (1.0f64 / 8.0).sqrt(), epsilon = 1e-14);
        assert!(matches!(
            entropy(&one(0.5, 0.0, 0.25)),
            Err(Error::InvalidState { .. })
        ));
    }

    #[test]
    fn correlated_one_mode() {
        let v = validate(&one(1.0, 0.5, 1.0)).unwrap();
        assert!(v.valid);
        assert_relative_eq!(v.nu_min, 0.75f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn validate_rejects_indefinite_qq() {
        assert!(matches!(
            validate(&one(-1.0, 0.0, 1.0)),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn validate_flags_non_positive_full_matrix() {
        // α_qq, α_pp > 0 but det < 0
        let v = validate(&one(1.0, 2.0, 1.0)).unwrap();
        assert!(!v.valid);
    }

    #[test]
    fn one_mode_spectrum_is_sqrt_det() {
        let nu = symplectic_eigenvalues(&one(3.0, 0.0, 0.7)).unwrap();
        assert_relative_eq!(nu[0], (2.1f64).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn two_mode_direct_sum_spectrum() {
        let a = one(1.0, 0.0, 1.0).direct_sum(&one(2.0, 0.0, 0.5));
        let nu = symplectic_eigenvalues(&a).unwrap();
        assert_relative_eq!(nu[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(nu[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn spectrum_ignores_form_sign() {
        let a = one(1.3, 0.4, 0.9).direct_sum(&one(0.6, -0.1, 2.0));
        let full = a.full();
        let s1 = symplectic_spectrum(&full, &SymplecticForm::standard(2)).unwrap();
        let s2 = symplectic_spectrum(&full, &SymplecticForm::flipped(2)).unwrap();
        for (x, y) in s1.iter().zip(&s2) {
            assert_relative_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn form_identities() {
        let d = SymplecticForm::standard(3).matrix();
        let dt = d.transpose();
        assert!(dt.max_abs_diff(&d.scale(-1.0)) == 0.0);
        let sq = d.matmul(&d).unwrap();
        assert!(sq.max_abs_diff(&RealMatrix::identity(6).scale(-1.0)) == 0.0);
    }

    #[test]
    fn g_values() {
        assert_eq!(g(0.0).unwrap(), 0.0);
        assert_relative_eq!(g(1.0).unwrap(), 2.0 * 2f64.ln(), epsilon = 1e-15);
        let direct = 1.5 * 1.5f64.ln() + 0.5 * 2f64.ln();
        assert_relative_eq!(g(0.5).unwrap(), direct, epsilon = 1e-15);
        assert_relative_eq!(g(0.5).unwrap(), 0.9547712524422192, epsilon = 1e-11);
        assert!(matches!(g(-0.1), Err(Error::DomainError(_))));
        assert!(g(f64::NAN).is_err());
        assert_relative_eq!(g_in(1.0, LogBase::Bits).unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn g_large_argument_is_accurate() {
        // g(x) = ln x + 1 + 1/(2x) + O(x⁻²)
        let x = 1e8;
        assert_relative_eq!(g(x).unwrap(), x.ln() + 1.0 + 0.5 / x, epsilon = 1e-13);
    }

    #[test]
    fn entropy_examples() {
        assert_relative_eq!(
            entropy(&one(1.0, 0.0, 1.0)).unwrap(),
            g(0.5).unwrap(),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            entropy(&one(1.0, 0.5, 1.0)).unwrap(),
            g(0.75f64.sqrt() - 0.5).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn json_round_trip() {
        let a = one(1.0, 0.5, 1.0).direct_sum(&one(0.7, 0.0, 2.0));
        let text = serde_json::to_string(&a).unwrap();
        assert!(text.contains("\"s\":2"));
        let back: CovarianceMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn json_rejects_bad_shape() {
        let text = r#"{"s":2,"alpha_qq":[1,0,0],"alpha_qp":[0,0,0,0],"alpha_pp":[1,0,0,1]}"#;
        assert!(serde_json::from_str::<CovarianceMatrix>(text).is_err());
        let asym = r#"{"s":2,"alpha_qq":[1,0.2,0,1],"alpha_qp":[0,0,0,0],"alpha_pp":[1,0,0,1]}"#;
        assert!(serde_json::from_str::<CovarianceMatrix>(asym).is_err());
    }
}
