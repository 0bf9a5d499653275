//! Approximate position measurement with Gaussian noise `β`.
//!
//! For a Gaussian input the outcome density is `N(m_q, α_qq + β)` and the
//! posterior state after outcome `x` is the Gaussian with covariance `α̂` and
//! mean `(K_q x, K_p x)` (for centered input), where
//!
//! ```text
//! α̂_qq = (α_qq⁻¹ + β⁻¹)⁻¹
//! α̂_pp = α_pp − α_pq (α_qq + β)⁻¹ α_qp + β⁻¹/4
//! α̂_qp = α̂_qq α_qq⁻¹ α_qp
//! K_q  = α_qq (α_qq + β)⁻¹,   K_p = α_pq (α_qq + β)⁻¹
//! ```
//!
//! `β` must be strictly positive definite here; the exact measurement
//! (`β = 0`) is handled separately in [`crate::er`] and [`crate::capacity`].

use serde::{Deserialize, Serialize};

use crate::gaussian::{require_valid, CovarianceMatrix, MeanVector};
use crate::mats::{cholesky, det_spd, inverse_spd, solve_spd, RealMatrix};
use crate::{Error, Result};

/// Symmetric positive definite measurement-noise covariance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NoiseWire", into = "NoiseWire")]
pub struct NoiseMatrix(RealMatrix);

#[derive(Serialize, Deserialize)]
struct NoiseWire {
    s: usize,
    beta: Vec<f64>,
}

impl TryFrom<NoiseWire> for NoiseMatrix {
    type Error = Error;

    fn try_from(w: NoiseWire) -> Result<Self> {
        NoiseMatrix::new(RealMatrix::from_row_major(w.s, w.s, w.beta)?)
    }
}

impl From<NoiseMatrix> for NoiseWire {
    fn from(n: NoiseMatrix) -> Self {
        NoiseWire {
            s: n.modes(),
            beta: n.0.into_vec(),
        }
    }
}

impl NoiseMatrix {
    pub fn new(beta: RealMatrix) -> Result<Self> {
        cholesky(&beta)?;
        Ok(Self(beta.symmetrized()))
    }

    /// `b · I_s`.
    pub fn scalar(s: usize, b: f64) -> Result<Self> {
        Self::new(RealMatrix::identity(s).scale(b))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(RealMatrix::from_diag(values))
    }

    pub fn modes(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.0
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        Self(self.0.direct_sum(&other.0))
    }
}

/// Gaussian posterior description: covariance `α̂` and the gains mapping an
/// outcome `x` to the posterior mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorModel {
    pub alpha_hat: CovarianceMatrix,
    #[serde(with = "square_matrix")]
    pub k_q: RealMatrix,
    #[serde(with = "square_matrix")]
    pub k_p: RealMatrix,
}

/// Gaussian density of the measurement outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    #[serde(with = "square_matrix")]
    pub covariance: RealMatrix,
    pub mean: Vec<f64>,
}

impl OutcomeDistribution {
    /// Probability density at `x`.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        let s = self.mean.len();
        if x.len() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                found: x.len(),
            });
        }
        let d: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        let rhs = RealMatrix::from_row_major(s, 1, d.clone())?;
        let sol = solve_spd(&self.covariance, &rhs)?;
        let quad: f64 = d.iter().zip(sol.as_slice()).map(|(a, b)| a * b).sum();
        let det = det_spd(&self.covariance)?;
        let norm = ((2.0 * std::f64::consts::PI).powi(s as i32) * det).sqrt();
        Ok((-0.5 * quad).exp() / norm)
    }
}

fn check_modes(alpha: &CovarianceMatrix, beta: &NoiseMatrix) -> Result<()> {
    if alpha.modes() != beta.modes() {
        return Err(Error::DimensionMismatch {
            expected: alpha.modes(),
            found: beta.modes(),
        });
    }
    Ok(())
}

/// Outcome density `N(m_q, α_qq + β)` for a state with mean `mean`.
pub fn outcome_distribution(
    alpha: &CovarianceMatrix,
    beta: &NoiseMatrix,
    mean: &MeanVector,
) -> Result<OutcomeDistribution> {
    check_modes(alpha, beta)?;
    if mean.modes() != alpha.modes() {
        return Err(Error::DimensionMismatch {
            expected: alpha.modes(),
            found: mean.modes(),
        });
    }
    require_valid(alpha)?;
    let covariance = alpha.qq().add(beta.matrix())?.symmetrized();
    Ok(OutcomeDistribution {
        covariance,
        mean: mean.m_q.clone(),
    })
}

/// Posterior covariance and mean gains for a valid Gaussian input.
pub fn posterior(alpha: &CovarianceMatrix, beta: &NoiseMatrix) -> Result<PosteriorModel> {
    check_modes(alpha, beta)?;
    require_valid(alpha)?;
    let b = beta.matrix();
    let sum_inv = inverse_spd(&alpha.qq().add(b)?)?;
    let qq_inv = inverse_spd(alpha.qq())?;
    let b_inv = inverse_spd(b)?;

    let hat_qq = inverse_spd(&qq_inv.add(&b_inv)?)?;
    debug_assert!({
        // Same matrix written as α_qq (α_qq + β)⁻¹ β.
        let alt = alpha.qq().matmul(&sum_inv)?.matmul(b)?;
        hat_qq.max_abs_diff(&alt) <= 1e-10 * hat_qq.max_abs().max(1.0)
    });

    let pq = alpha.pq();
    let k_q = alpha.qq().matmul(&sum_inv)?;
    let k_p = pq.matmul(&sum_inv)?;
    let hat_pp = alpha
        .pp()
        .sub(&k_p.matmul(alpha.qp())?)?
        .add(&b_inv.scale(0.25))?
        .symmetrized();
    let hat_qp = hat_qq.matmul(&qq_inv)?.matmul(alpha.qp())?;

    let alpha_hat = CovarianceMatrix::new(hat_qq, hat_qp, hat_pp)?;
    require_valid(&alpha_hat)?;
    Ok(PosteriorModel {
        alpha_hat,
        k_q,
        k_p,
    })
}

/// Posterior mean `(K_q x, K_p x)` after outcome `x` (centered input).
pub fn posterior_mean(model: &PosteriorModel, x: &[f64]) -> Result<MeanVector> {
    Ok(MeanVector {
        m_q: model.k_q.matvec(x)?,
        m_p: model.k_p.matvec(x)?,
    })
}

/// Serializes a square matrix as a flat row-major array.
mod square_matrix {
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    use crate::mats::RealMatrix;

    pub fn serialize<S: Serializer>(m: &RealMatrix, ser: S) -> Result<S::Ok, S::Error> {
        m.as_slice().serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<RealMatrix, D::Error> {
        let data = Vec::<f64>::deserialize(de)?;
        let n = (data.len() as f64).sqrt().round() as usize;
        RealMatrix::from_row_major(n, n, data).map_err(D::Error::custom)
    }
}
