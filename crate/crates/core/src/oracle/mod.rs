//! Brute-force reference values for one mode.
//!
//! A density operator is represented by its position kernel `⟨ξ|ρ|ξ'⟩`
//! sampled on a uniform grid. The measurement acts on the kernel by
//! multiplication, entropies come from the spectrum of `h·K`, and the
//! entropy reduction `H(ρ) − ∫ p(x) H(ρ̂(x)) dx` is integrated by
//! Gauss–Legendre quadrature over outcomes. None of this uses the closed
//! forms in [`crate::er`] or [`crate::measurement`].

mod integrate;
mod kernel;
mod quadrature;
mod suite;

use serde::{Deserialize, Serialize};

use crate::gaussian::{CovarianceMatrix, MeanVector};
use crate::mats::HermitianMatrix;
use crate::{Error, Result};

pub use integrate::{
    mixture_covariance, mixture_er, mixture_grid, oracle_er, oracle_er_displaced,
    oracle_er_report, MixtureComponent, OracleEr, QuadratureSpec,
};
pub use kernel::{
    apply_measurement_factor, build_gaussian_kernel, check_squeezed_marginal, gaussian_kernel_entry,
    kernel_entropy, kernel_spectrum, oracle_posterior_moments, PosteriorMoments,
};
pub use quadrature::GaussLegendre;
pub use suite::{random_mixture, run_suite, CaseKind, OracleCase, SuiteOptions, SuiteReport};

/// Default number of grid points.
pub const DEFAULT_POINTS: usize = 384;

/// Smallest grid the oracle accepts.
pub const MIN_POINTS: usize = 64;

/// Half-width of the grid in standard deviations.
pub const TAIL_SIGMAS: f64 = 8.0;

/// Uniform grid `ξ_k = −L + k·2L/(N−1)`, `k = 0…N−1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelGrid {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "L")]
    half_width: f64,
}

impl KernelGrid {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < MIN_POINTS {
            return Err(Error::GridTooSmall(format!("{n} points, need at least {MIN_POINTS}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::DomainError(format!("grid half-width must be positive, got {half_width}")));
        }
        Ok(Self { n, half_width })
    }

    /// Grid wide enough for the prior, the measurement noise and every
    /// posterior reached by outcomes within `TAIL_SIGMAS` of the mean.
    pub fn for_measurement(alpha: &CovarianceMatrix, mean: &MeanVector, beta: f64, n: usize) -> Result<Self> {
        let (a, _, _) = one_mode_entries(alpha)?;
        if !(beta > 0.0) {
            return Err(Error::DomainError(format!("noise variance must be positive, got {beta}")));
        }
        let post = 1.0 / (1.0 / a + 1.0 / beta);
        let reach = TAIL_SIGMAS * a / (a + beta).sqrt();
        let l = (TAIL_SIGMAS * a.max(beta).sqrt()).max(reach + TAIL_SIGMAS * post.sqrt());
        Self::new(n, l + mean.m_q[0].abs())
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.step()
    }

    pub fn with_points(&self, n: usize) -> Result<Self> {
        Self::new(n, self.half_width)
    }
}

/// Position kernel of a one-mode density operator on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityKernel {
    pub grid: KernelGrid,
    pub entries: HermitianMatrix,
}

impl DensityKernel {
    /// `h·Tr K`.
    pub fn weight(&self) -> f64 {
        self.grid.step() * self.entries.trace().re
    }

    /// The kernel scaled to `h·Tr K = 1`.
    pub fn normalized(&self) -> Result<Self> {
        let w = self.weight();
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::GridTooSmall(format!("kernel has weight {w}")));
        }
        Ok(Self {
            grid: self.grid,
            entries: self.entries.scale(1.0 / w),
        })
    }

    /// Entrywise weighted sum of kernels on the same grid.
    pub fn mixture(parts: &[(f64, DensityKernel)]) -> Result<Self> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::DomainError("empty mixture".into()))?;
        let mut entries = HermitianMatrix::zeros(first.entries.dim());
        for (w, k) in parts {
            if k.grid != first.grid {
                return Err(Error::DimensionMismatch {
                    expected: first.grid.points(),
                    found: k.grid.points(),
                });
            }
            for (acc, x) in entries.as_mut_slice().iter_mut().zip(k.entries.as_slice()) {
                *acc += x * w;
            }
        }
        Ok(Self {
            grid: first.grid,
            entries,
        })
    }
}

fn one_mode_entries(alpha: &CovarianceMatrix) -> Result<(f64, f64, f64)> {
    if alpha.modes() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: alpha.modes(),
        });
    }
    Ok((alpha.qq()[(0, 0)], alpha.qp()[(0, 0)], alpha.pp()[(0, 0)]))
}
