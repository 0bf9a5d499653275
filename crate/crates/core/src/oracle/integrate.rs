use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{apply_measurement_factor, build_gaussian_kernel, kernel_entropy};
use super::{one_mode_entries, DensityKernel, GaussLegendre, KernelGrid, TAIL_SIGMAS};
use crate::gaussian::{require_valid, CovarianceMatrix, MeanVector};
use crate::mats::RealMatrix;
use crate::{Error, Result};

/// Outcome quadrature: `nodes` Gauss–Legendre points on
/// `m_q ± half_width_sigmas·√(α_qq + β)`. For Gaussian inputs posterior
/// entropies are computed at `sampled` evenly spread nodes only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes: usize,
    pub half_width_sigmas: f64,
    pub sampled: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes: 41,
            half_width_sigmas: TAIL_SIGMAS,
            sampled: 5,
        }
    }
}

/// Tolerance on `Σ w_i p(x_i) = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// Allowed standard deviation of the posterior entropy over outcomes for a
/// Gaussian input.
pub const SPREAD_TOL: f64 = 1e-4;

/// Result of an oracle entropy-reduction integration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleEr {
    pub value: f64,
    pub prior_entropy: f64,
    /// `Σ w_i p(x_i) H(ρ̂(x_i))`.
    pub mean_posterior_entropy: f64,
    /// `(x_i, w_i, p(x_i))` at every quadrature node.
    pub outcomes: Vec<(f64, f64, f64)>,
    /// `(x, H(ρ̂(x)))` at the nodes whose posterior was diagonalized.
    pub posterior_entropies: Vec<(f64, f64)>,
    pub weight_sum: f64,
    pub grid: KernelGrid,
}

/// Oracle `ER` of the centered Gaussian state with covariance `alpha`.
pub fn oracle_er(alpha: &CovarianceMatrix, beta: f64, grid: &KernelGrid, quad: &QuadratureSpec) -> Result<f64> {
    oracle_er_report(&MeanVector::zero(1), alpha, beta, grid, quad).map(|r| r.value)
}

/// Oracle `ER` of a displaced Gaussian state.
pub fn oracle_er_displaced(
    mean: &MeanVector,
    alpha: &CovarianceMatrix,
    beta: f64,
    grid: &KernelGrid,
    quad: &QuadratureSpec,
) -> Result<f64> {
    oracle_er_report(mean, alpha, beta, grid, quad).map(|r| r.value)
}

/// Full report for a Gaussian input.
///
/// The posterior entropy of a Gaussian input does not depend on the
/// outcome; this is checked at the sampled nodes (standard deviation at most
/// [`SPREAD_TOL`]) and their mean is used for the whole integral.
pub fn oracle_er_report(
    mean: &MeanVector,
    alpha: &CovarianceMatrix,
    beta: f64,
    grid: &KernelGrid,
    quad: &QuadratureSpec,
) -> Result<OracleEr> {
    let (a, _, _) = one_mode_entries(alpha)?;
    let kernel = build_gaussian_kernel(mean, alpha, grid)?;
    let center = mean.m_q[0];
    let reach = quad.half_width_sigmas * (a + beta).sqrt();
    let rule = GaussLegendre::new(quad.nodes).on(center - reach, center + reach);

    let outcomes: Vec<(f64, f64, f64)> = rule
        .iter()
        .map(|&(x, w)| apply_measurement_factor(&kernel, x, beta).map(|(_, p)| (x, w, p)))
        .collect::<Result<_>>()?;
    let weight_sum = check_normalization(&outcomes)?;

    let picks = sample_indices(quad.nodes, quad.sampled);
    let posterior_entropies: Vec<(f64, f64)> = picks
        .par_iter()
        .map(|&i| {
            let x = outcomes[i].0;
            posterior_entropy(&kernel, x, beta).map(|h| (x, h))
        })
        .collect::<Result<_>>()?;
    let hs: Vec<f64> = posterior_entropies.iter().map(|p| p.1).collect();
    let avg = hs.iter().sum::<f64>() / hs.len() as f64;
    let spread = (hs.iter().map(|h| (h - avg).powi(2)).sum::<f64>() / hs.len() as f64).sqrt();
    if spread > SPREAD_TOL {
        return Err(Error::GridTooSmall(format!(
            "posterior entropy varies with the outcome (std {spread:e})"
        )));
    }
    let prior_entropy = kernel_entropy(&kernel)?;
    let mean_posterior_entropy = weight_sum * avg;
    Ok(OracleEr {
        value: prior_entropy - mean_posterior_entropy,
        prior_entropy,
        mean_posterior_entropy,
        outcomes,
        posterior_entropies,
        weight_sum,
        grid: *grid,
    })
}

fn posterior_entropy(kernel: &DensityKernel, x: f64, beta: f64) -> Result<f64> {
    let (post, _) = apply_measurement_factor(kernel, x, beta)?;
    kernel_entropy(&post.normalized()?)
}

fn check_normalization(outcomes: &[(f64, f64, f64)]) -> Result<f64> {
    let sum: f64 = outcomes.iter().map(|(_, w, p)| w * p).sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::GridTooSmall(format!("outcome quadrature sums to {sum}")));
    }
    Ok(sum)
}

fn sample_indices(n: usize, k: usize) -> Vec<usize> {
    let k = k.clamp(1, n);
    if k == 1 {
        return vec![n / 2];
    }
    (0..k).map(|j| (j * (n - 1) + (k - 1) / 2) / (k - 1)).collect()
}

/// One Gaussian component of a mixture state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: MeanVector,
    pub alpha: CovarianceMatrix,
}

impl MixtureComponent {
    pub fn new(weight: f64, mean: MeanVector, alpha: CovarianceMatrix) -> Self {
        Self { weight, mean, alpha }
    }
}

/// Covariance `Σ w_i (α_i + m_i m_iᵀ)` of a centered mixture.
pub fn mixture_covariance(components: &[MixtureComponent]) -> Result<CovarianceMatrix> {
    let mut full = RealMatrix::zeros(2, 2);
    for c in components {
        one_mode_entries(&c.alpha)?;
        let m = [c.mean.m_q[0], c.mean.m_p[0]];
        let outer = RealMatrix::from_fn(2, 2, |i, j| m[i] * m[j]);
        full = full.add(&c.alpha.full().add(&outer)?.scale(c.weight))?;
    }
    CovarianceMatrix::from_full(&full.symmetrized())
}

/// Grid covering every component's prior and every component's posterior
/// for outcomes within the quadrature range of the total covariance.
pub fn mixture_grid(components: &[MixtureComponent], beta: f64, n: usize) -> Result<KernelGrid> {
    let total = mixture_covariance(components)?;
    let reach = TAIL_SIGMAS * (total.qq()[(0, 0)] + beta).sqrt();
    let mut l: f64 = 0.0;
    for c in components {
        let (a, _, _) = one_mode_entries(&c.alpha)?;
        let m = c.mean.m_q[0];
        let gain = a / (a + beta);
        let post = a * beta / (a + beta);
        let prior = m.abs() + TAIL_SIGMAS * a.max(beta).sqrt();
        let shifted = m.abs() * (1.0 - gain) + gain * reach + TAIL_SIGMAS * post.sqrt();
        l = l.max(prior).max(shifted);
    }
    KernelGrid::new(n, l)
}

/// Oracle `ER` of a centered mixture of Gaussian states, with the mixture's
/// total covariance.
///
/// Posterior entropies depend on the outcome here, so every quadrature node
/// is diagonalized.
pub fn mixture_er(
    components: &[MixtureComponent],
    beta: f64,
    grid: &KernelGrid,
    quad: &QuadratureSpec,
) -> Result<(OracleEr, CovarianceMatrix)> {
    if components.is_empty() {
        return Err(Error::DomainError("empty mixture".into()));
    }
    let wsum: f64 = components.iter().map(|c| c.weight).sum();
    if components.iter().any(|c| !(c.weight > 0.0)) || (wsum - 1.0).abs() > 1e-12 {
        return Err(Error::DomainError(format!("mixture weights must be positive and sum to 1, got {wsum}")));
    }
    let mq: f64 = components.iter().map(|c| c.weight * c.mean.m_q[0]).sum();
    let mp: f64 = components.iter().map(|c| c.weight * c.mean.m_p[0]).sum();
    if mq.abs().max(mp.abs()) > 1e-9 {
        return Err(Error::DomainError(format!("mixture mean must vanish, got ({mq}, {mp})")));
    }
    for c in components {
        require_valid(&c.alpha)?;
    }
    let total = mixture_covariance(components)?;

    let parts = components
        .iter()
        .map(|c| Ok((c.weight, build_gaussian_kernel(&c.mean, &c.alpha, grid)?)))
        .collect::<Result<Vec<_>>>()?;
    let kernel = DensityKernel::mixture(&parts)?;
    let reach = quad.half_width_sigmas * (total.qq()[(0, 0)] + beta).sqrt();
    let rule = GaussLegendre::new(quad.nodes).on(-reach, reach);

    let per_node: Vec<(f64, f64, f64, f64)> = rule
        .par_iter()
        .map(|&(x, w)| {
            let (post, p) = apply_measurement_factor(&kernel, x, beta)?;
            Ok((x, w, p, kernel_entropy(&post.normalized()?)?))
        })
        .collect::<Result<_>>()?;
    let outcomes: Vec<(f64, f64, f64)> = per_node.iter().map(|&(x, w, p, _)| (x, w, p)).collect();
    let weight_sum = check_normalization(&outcomes)?;
    let mean_posterior_entropy: f64 = per_node.iter().map(|&(_, w, p, h)| w * p * h).sum();
    let prior_entropy = kernel_entropy(&kernel)?;
    Ok((
        OracleEr {
            value: prior_entropy - mean_posterior_entropy,
            prior_entropy,
            mean_posterior_entropy,
            outcomes,
            posterior_entropies: per_node.iter().map(|&(x, _, _, h)| (x, h)).collect(),
            weight_sum,
            grid: *grid,
        },
        total,
    ))
}
