use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{one_mode_entries, DensityKernel, KernelGrid, TAIL_SIGMAS};
use crate::gaussian::{require_valid, CovarianceMatrix, MeanVector};
use crate::mats::{herm_eigvals, HermitianMatrix};
use crate::{Error, Result};

/// Eigenvalues of `h·K` below this are treated as zero in the entropy.
pub const EIGEN_CLAMP: f64 = 1e-12;

/// `⟨ξ|ρ|ξ'⟩` of the one-mode Gaussian state with the given moments.
///
/// With `u = (ξ+ξ')/2` and `v = ξ'−ξ` the exponent is
/// `−(u−m_q)²/(2α_qq) − v²(α_pp − α_qp²/α_qq)/2 − i v (m_p + α_qp(u−m_q)/α_qq)`.
pub fn gaussian_kernel_entry(mean: (f64, f64), alpha: (f64, f64, f64), xi: f64, xi2: f64) -> Complex64 {
    let (m_q, m_p) = mean;
    let (a, c, b) = alpha;
    let u = 0.5 * (xi + xi2) - m_q;
    let v = xi2 - xi;
    let re = -u * u / (2.0 * a) - 0.5 * v * v * (b - c * c / a);
    let im = -v * (m_p + c * u / a);
    Complex64::from_polar((re.exp()) / (2.0 * PI * a).sqrt(), im)
}

/// Samples the kernel of a one-mode Gaussian state and normalizes it to
/// `h·Tr K = 1`.
pub fn build_gaussian_kernel(mean: &MeanVector, alpha: &CovarianceMatrix, grid: &KernelGrid) -> Result<DensityKernel> {
    let (a, c, b) = one_mode_entries(alpha)?;
    require_valid(alpha)?;
    let m = (mean.m_q[0], mean.m_p[0]);
    let entries = HermitianMatrix::from_fn(grid.points(), |k, l| {
        gaussian_kernel_entry(m, (a, c, b), grid.point(k), grid.point(l))
    });
    let kernel = DensityKernel { grid: *grid, entries };
    let w = kernel.weight();
    if (w - 1.0).abs() > 1e-6 {
        return Err(Error::GridTooSmall(format!(
            "kernel trace {w} on [-{L}, {L}] with {n} points",
            L = grid.half_width(),
            n = grid.points()
        )));
    }
    kernel.normalized()
}

/// Multiplies the kernel by `v(ξ)v(ξ')`, `v(ξ) = (2πβ)^{−1/4} exp(−(ξ−x)²/(4β))`.
///
/// Returns the unnormalized posterior kernel and the outcome density
/// `p(x) = h·Tr`. Fails if the posterior still has non-negligible mass at
/// the grid edges.
pub fn apply_measurement_factor(kernel: &DensityKernel, x: f64, beta: f64) -> Result<(DensityKernel, f64)> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::DomainError(format!("noise variance must be positive, got {beta}")));
    }
    let grid = kernel.grid;
    let n = grid.points();
    let norm = (2.0 * PI * beta).powf(-0.25);
    let v: Vec<f64> = (0..n)
        .map(|k| {
            let d = grid.point(k) - x;
            norm * (-d * d / (4.0 * beta)).exp()
        })
        .collect();
    let mut entries = kernel.entries.clone();
    for k in 0..n {
        for l in 0..n {
            entries[(k, l)] *= v[k] * v[l];
        }
    }
    let post = DensityKernel { grid, entries };
    let weight = post.weight();
    let edge = grid.step() * (post.entries[(0, 0)].re.abs() + post.entries[(n - 1, n - 1)].re.abs());
    if !(weight > 0.0) || edge > 1e-10 * weight {
        return Err(Error::GridTooSmall(format!(
            "posterior at x = {x} reaches the grid edge (edge mass {edge:e}, weight {weight:e})"
        )));
    }
    Ok((post, weight))
}

/// Eigenvalues of `h·K`, ascending.
pub fn kernel_spectrum(kernel: &DensityKernel) -> Result<Vec<f64>> {
    herm_eigvals(&kernel.entries.scale(kernel.grid.step()))
}

/// Largest entropy change the eigenvalue clamp may hide.
pub const CLAMP_BUDGET: f64 = 1e-6;

/// `−Σ λ ln λ` over the eigenvalues of `h·K` of a normalized kernel, in nats.
///
/// Eigenvalues below [`EIGEN_CLAMP`] contribute nothing; fails if their
/// `|λ ln |λ||` would add up to more than [`CLAMP_BUDGET`].
pub fn kernel_entropy(kernel: &DensityKernel) -> Result<f64> {
    let mut h = 0.0;
    let mut hidden = 0.0;
    for l in kernel_spectrum(kernel)? {
        if l >= EIGEN_CLAMP {
            h -= l * l.ln();
        } else if l != 0.0 {
            hidden += (l * l.abs().ln()).abs();
        }
    }
    if hidden > CLAMP_BUDGET {
        return Err(Error::GridTooSmall(format!("clamped eigenvalues carry {hidden:e} nats")));
    }
    Ok(h)
}

/// First and second moments read off a normalized kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorMoments {
    pub m_q: f64,
    pub m_p: f64,
    pub alpha_qq: f64,
    pub alpha_pp: f64,
    pub alpha_qp: f64,
}

/// Moments of a normalized kernel.
///
/// Position moments come from the diagonal. With `p = −i d/dξ` and
/// `D(v) = ∫ K(u − v/2, u + v/2) du` one has `⟨p⟩ = Re(i D'(0))` and
/// `⟨p²⟩ = −Re D''(0)`; the symmetrized `⟨qp⟩` is `Re(i U'(0))` with `u`
/// inserted in the integral. Derivatives use five-point stencils in steps of
/// one grid spacing.
pub fn oracle_posterior_moments(kernel: &DensityKernel) -> Result<PosteriorMoments> {
    let grid = kernel.grid;
    let n = grid.points();
    let h = grid.step();
    if n < 5 {
        return Err(Error::GridTooSmall("finite-difference stencil needs 5 points".into()));
    }
    let k = &kernel.entries;
    let mut q1 = 0.0;
    let mut q2 = 0.0;
    for i in 0..n {
        let d = k[(i, i)].re * h;
        let x = grid.point(i);
        q1 += x * d;
        q2 += x * x * d;
    }
    let band = |m: i64| -> (Complex64, Complex64) {
        let mut d = Complex64::new(0.0, 0.0);
        let mut u = Complex64::new(0.0, 0.0);
        for i in 0..n as i64 {
            let j = i + m;
            if j < 0 || j >= n as i64 {
                continue;
            }
            let e = k[(i as usize, j as usize)];
            d += e;
            u += e * (0.5 * (grid.point(i as usize) + grid.point(j as usize)));
        }
        (d * h, u * h)
    };
    let b: Vec<(Complex64, Complex64)> = (-2..=2).map(band).collect();
    let first = |f: [Complex64; 5]| (f[0] - f[1] * 8.0 + f[3] * 8.0 - f[4]) / (12.0 * h);
    let second = |f: [Complex64; 5]| (-f[0] + f[1] * 16.0 - f[2] * 30.0 + f[3] * 16.0 - f[4]) / (12.0 * h * h);
    let d = [b[0].0, b[1].0, b[2].0, b[3].0, b[4].0];
    let u = [b[0].1, b[1].1, b[2].1, b[3].1, b[4].1];
    let i = Complex64::new(0.0, 1.0);
    let p1 = (i * first(d)).re;
    let p2 = -second(d).re;
    let qp = (i * first(u)).re;
    Ok(PosteriorMoments {
        m_q: q1,
        m_p: p1,
        alpha_qq: q2 - q1 * q1,
        alpha_pp: p2 - p1 * p1,
        alpha_qp: qp - q1 * p1,
    })
}

/// Largest deviation between the position diagonal of the displaced
/// squeezed vacuum with covariance `diag(β, 1/(4β))` and the noise density
/// `(2πβ)^{−1/2} exp(−(ξ−x)²/(2β))`.
///
/// The displacements are whole grid steps so that `ξ − x` stays on the grid
/// and the diagonal is read from the sampled kernel.
pub fn check_squeezed_marginal(beta: f64, grid: &KernelGrid) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::DomainError(format!("noise variance must be positive, got {beta}")));
    }
    let spread = beta.max(0.25 / beta).sqrt();
    if grid.half_width() < TAIL_SIGMAS * spread {
        return Err(Error::GridTooSmall(format!(
            "half-width {} below {TAIL_SIGMAS} standard deviations ({spread})",
            grid.half_width()
        )));
    }
    let alpha = CovarianceMatrix::one_mode(beta, 0.0, 0.25 / beta)?;
    let kernel = build_gaussian_kernel(&MeanVector::zero(1), &alpha, grid)?;
    let n = grid.points() as i64;
    let h = grid.step();
    let mut worst: f64 = 0.0;
    for shift in -(n / 8)..=(n / 8) {
        let x = shift as f64 * h;
        for k in 0..n {
            let j = k - shift;
            if j < 0 || j >= n {
                continue;
            }
            let diag = kernel.entries[(j as usize, j as usize)];
            let d = grid.point(k as usize) - x;
            let target = (-d * d / (2.0 * beta)).exp() / (2.0 * PI * beta).sqrt();
            worst = worst.max((diag.re - target).abs()).max(diag.im.abs());
        }
    }
    Ok(worst)
}
