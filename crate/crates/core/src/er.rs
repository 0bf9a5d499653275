//! Entropy reduction of the approximate position measurement.
//!
//! Among all states with covariance `α` the Gaussian one maximizes the
//! entropy reduction, and for it the posterior states are displaced copies of
//! a single Gaussian. Hence `ER(M; α) = H(ρ_α) − H(ρ_α̂)`.

use serde::{Deserialize, Serialize};

use crate::gaussian::{entropy, g_of_nu, CovarianceMatrix};
use crate::measurement::{posterior, NoiseMatrix, PosteriorModel};
use crate::{Error, Result};

/// Entropy reduction together with the pieces it was computed from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ERResult {
    pub value: f64,
    pub prior_entropy: f64,
    pub posterior_entropy: f64,
    pub posterior: PosteriorModel,
}

/// `ER(M; α)` in nats for noise covariance `β`.
pub fn entropy_reduction(alpha: &CovarianceMatrix, beta: &NoiseMatrix) -> Result<ERResult> {
    let prior_entropy = entropy(alpha)?;
    let posterior = posterior(alpha, beta)?;
    let posterior_entropy = entropy(&posterior.alpha_hat)?;
    Ok(ERResult {
        value: prior_entropy - posterior_entropy,
        prior_entropy,
        posterior_entropy,
        posterior,
    })
}

/// Closed form for one mode:
///
/// ```text
/// g(√(α_qq α_pp − α_qp²) − ½) − g(√((α_qq(β α_pp + ¼) − β α_qp²)/(α_qq + β)) − ½)
/// ```
pub fn er_one_mode(alpha_qq: f64, alpha_qp: f64, alpha_pp: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::DomainError(format!("noise variance must be positive, got {beta}")));
    }
    if !(alpha_qq > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let disc = alpha_qq * alpha_pp - alpha_qp * alpha_qp;
    let nu = disc.max(0.0).sqrt();
    let prior = g_of_nu(nu)?;
    let post_disc = (alpha_qq * (beta * alpha_pp + 0.25) - beta * alpha_qp * alpha_qp)
        / (alpha_qq + beta);
    let posterior = g_of_nu(post_disc.max(0.0).sqrt())?;
    Ok(prior - posterior)
}

/// Entropy reduction of the exact position measurement, `H(ρ_α)`.
///
/// Derived for one mode as the `β → 0` limit; applied unchanged to several
/// modes.
pub fn er_exact(alpha: &CovarianceMatrix) -> Result<f64> {
    entropy(alpha)
}
