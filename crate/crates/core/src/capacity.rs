//! Energy-constrained entanglement-assisted capacity
//! `C_ea = max { ER(M; α) : Sp ε_qq α_qq + Sp ε_pp α_pp ≤ E }`.
//!
//! For oscillator-type Hamiltonians the maximum is attained on
//! block-diagonal covariances (`α_qp = 0`) that saturate the energy
//! constraint, so every solver here searches that set only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::er::entropy_reduction;
use crate::gaussian::{g_unchecked, symplectic_spectrum, CovarianceMatrix, SymplecticForm};
use crate::mats::{cholesky, inverse_spd, sqrt_spd, sym_eig, RealMatrix};
use crate::measurement::NoiseMatrix;
use crate::{Error, Result};

/// Grid resolution of the one-mode search before golden-section refinement.
pub const ONE_MODE_GRID: usize = 512;

/// Argument tolerance of the golden-section refinement.
pub const GOLDEN_TOL: f64 = 1e-10;

/// Quadratic oscillator Hamiltonian `qᵀ ε_qq q + pᵀ ε_pp p` and budget `E`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnergyWire", into = "EnergyWire")]
pub struct EnergyForm {
    eps_qq: RealMatrix,
    eps_pp: RealMatrix,
    energy: f64,
}

#[derive(Serialize, Deserialize)]
struct EnergyWire {
    s: usize,
    eps_qq: Vec<f64>,
    eps_pp: Vec<f64>,
    energy: f64,
}

impl TryFrom<EnergyWire> for EnergyForm {
    type Error = Error;

    fn try_from(w: EnergyWire) -> Result<Self> {
        EnergyForm::new(
            RealMatrix::from_row_major(w.s, w.s, w.eps_qq)?,
            RealMatrix::from_row_major(w.s, w.s, w.eps_pp)?,
            w.energy,
        )
    }
}

impl From<EnergyForm> for EnergyWire {
    fn from(h: EnergyForm) -> Self {
        EnergyWire {
            s: h.modes(),
            eps_qq: h.eps_qq.into_vec(),
            eps_pp: h.eps_pp.into_vec(),
            energy: h.energy,
        }
    }
}

impl EnergyForm {
    pub fn new(eps_qq: RealMatrix, eps_pp: RealMatrix, energy: f64) -> Result<Self> {
        cholesky(&eps_qq)?;
        cholesky(&eps_pp)?;
        if eps_qq.rows() != eps_pp.rows() {
            return Err(Error::DimensionMismatch {
                expected: eps_qq.rows(),
                found: eps_pp.rows(),
            });
        }
        if !energy.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            eps_qq: eps_qq.symmetrized(),
            eps_pp: eps_pp.symmetrized(),
            energy,
        })
    }

    /// `H = Σ (q_j² + p_j²)/2`, i.e. `ε_qq = ε_pp = I/2`.
    pub fn oscillator(s: usize, energy: f64) -> Result<Self> {
        let half = RealMatrix::identity(s).scale(0.5);
        Self::new(half.clone(), half, energy)
    }

    pub fn modes(&self) -> usize {
        self.eps_qq.rows()
    }

    pub fn eps_qq(&self) -> &RealMatrix {
        &self.eps_qq
    }

    pub fn eps_pp(&self) -> &RealMatrix {
        &self.eps_pp
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn with_energy(&self, energy: f64) -> Self {
        Self {
            energy,
            ..self.clone()
        }
    }

    /// Smallest attainable mean energy: the sum of the symplectic
    /// eigenvalues of `ε_qq ⊕ ε_pp`.
    pub fn ground_energy(&self) -> Result<f64> {
        let eps = self.eps_qq.direct_sum(&self.eps_pp);
        Ok(symplectic_spectrum(&eps, &SymplecticForm::standard(self.modes()))?
            .iter()
            .sum())
    }

    /// `α_qq` of the ground state, `½ Q⁻¹ (Q ε_pp Q)^{1/2} Q⁻¹` with
    /// `Q = ε_qq^{1/2}`; its `α_pp` is `α_qq⁻¹/4`.
    fn ground_qq(&self) -> Result<RealMatrix> {
        let q = sqrt_spd(&self.eps_qq)?;
        let q_inv = inverse_spd(&q)?;
        let w = sqrt_spd(&q.matmul(&self.eps_pp)?.matmul(&q)?.symmetrized())?;
        Ok(q_inv.matmul(&w)?.matmul(&q_inv)?.scale(0.5).symmetrized())
    }
}

/// `Sp ε_qq α_qq + Sp ε_pp α_pp`.
pub fn mean_energy(alpha: &CovarianceMatrix, h: &EnergyForm) -> Result<f64> {
    if alpha.modes() != h.modes() {
        return Err(Error::DimensionMismatch {
            expected: h.modes(),
            found: alpha.modes(),
        });
    }
    Ok(trace_product(h.eps_qq(), alpha.qq()) + trace_product(h.eps_pp(), alpha.pp()))
}

fn trace_product(a: &RealMatrix, b: &RealMatrix) -> f64 {
    let n = a.rows();
    let mut t = 0.0;
    for i in 0..n {
        for k in 0..n {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t
}

/// How a capacity value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityMethod {
    /// `g(E − 1/2)` for the exact measurement.
    ExactMeasurement,
    /// Grid plus golden-section search over the one-mode feasible interval.
    OneMode,
    /// Modes decoupled in a common eigenbasis, energy allocated between them.
    Decoupled,
    /// Coordinate ascent with restarts; a lower bound, not certified.
    CoordinateAscent,
}

/// Maximal entropy reduction under the energy constraint and its maximizer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub value: f64,
    pub optimizer_alpha: CovarianceMatrix,
    /// `mean_energy(optimizer_alpha) − E`.
    pub constraint_residual: f64,
    pub converged: bool,
    pub method: CapacityMethod,
}

/// One-mode search with oscillator coefficients `e_q q² + e_p p²`.
struct OneModeProblem {
    beta: f64,
    e_q: f64,
    e_p: f64,
    energy: f64,
}

struct OneModeOptimum {
    value: f64,
    alpha_qq: f64,
    alpha_pp: f64,
}

impl OneModeProblem {
    fn ground(&self) -> f64 {
        (self.e_q * self.e_p).sqrt()
    }

    /// Closed feasible interval of `α_qq`: `α_qq α_pp ≥ 1/4` with `α_pp` fixed
    /// by the energy constraint.
    fn window(&self) -> (f64, f64) {
        let disc = (self.energy * self.energy - self.e_q * self.e_p).max(0.0).sqrt();
        (
            (self.energy - disc) / (2.0 * self.e_q),
            (self.energy + disc) / (2.0 * self.e_q),
        )
    }

    fn alpha_pp(&self, a: f64) -> f64 {
        (self.energy - self.e_q * a) / self.e_p
    }

    fn objective(&self, a: f64) -> f64 {
        let b = self.alpha_pp(a);
        let prior = g_unchecked(((a * b).max(0.25)).sqrt() - 0.5);
        let post = (a * (self.beta * b + 0.25) / (a + self.beta)).max(0.25);
        prior - g_unchecked(post.sqrt() - 0.5)
    }

    fn solve(&self) -> OneModeOptimum {
        let (lo, hi) = self.window();
        if hi - lo <= 0.0 {
            return OneModeOptimum {
                value: 0.0,
                alpha_qq: lo,
                alpha_pp: self.alpha_pp(lo),
            };
        }
        let step = (hi - lo) / (ONE_MODE_GRID - 1) as f64;
        let point = |i: usize| if i + 1 == ONE_MODE_GRID { hi } else { lo + step * i as f64 };
        let (best_i, best_v) = (0..ONE_MODE_GRID)
            .map(|i| (i, self.objective(point(i))))
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        let a0 = point(best_i.saturating_sub(1));
        let a1 = point((best_i + 1).min(ONE_MODE_GRID - 1));
        let (a, v) = golden_max(|a| self.objective(a), a0, a1, GOLDEN_TOL);
        let (a, v) = if v >= best_v { (a, v) } else { (point(best_i), best_v) };
        OneModeOptimum {
            value: v,
            alpha_qq: a,
            alpha_pp: self.alpha_pp(a),
        }
    }
}

/// Golden-section maximization on `[a, b]`; returns the best argument seen
/// and its value.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn require_energy(energy: f64, minimum: f64) -> Result<()> {
    if !(energy >= minimum - 1e-12 * minimum.max(1.0)) {
        return Err(Error::InfeasibleEnergy { energy, minimum });
    }
    Ok(())
}

/// Capacity of the exact position measurement for `H = (q² + p²)/2`:
/// `g(E − 1/2)`, attained at `α_qq = α_pp = E`.
pub fn cea_exact(energy: f64) -> Result<f64> {
    require_energy(energy, 0.5)?;
    Ok(g_unchecked((energy - 0.5).max(0.0)))
}

/// One-mode capacity for `H = (q² + p²)/2` and noise variance `β`.
///
/// `β = 0` means the exact measurement and is answered by [`cea_exact`].
pub fn cea_one_mode(beta: f64, energy: f64) -> Result<CapacityResult> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::DomainError(format!("noise variance must be >= 0, got {beta}")));
    }
    require_energy(energy, 0.5)?;
    let energy = energy.max(0.5);
    if beta == 0.0 {
        return Ok(CapacityResult {
            value: cea_exact(energy)?,
            optimizer_alpha: CovarianceMatrix::one_mode(energy, 0.0, energy)?,
            constraint_residual: 0.0,
            converged: true,
            method: CapacityMethod::ExactMeasurement,
        });
    }
    let opt = OneModeProblem {
        beta,
        e_q: 0.5,
        e_p: 0.5,
        energy,
    }
    .solve();
    let alpha = CovarianceMatrix::one_mode(opt.alpha_qq, 0.0, opt.alpha_pp)?;
    let residual = 0.5 * (opt.alpha_qq + opt.alpha_pp) - energy;
    Ok(CapacityResult {
        value: opt.value,
        optimizer_alpha: alpha,
        constraint_residual: residual,
        converged: true,
        method: CapacityMethod::OneMode,
    })
}

/// Options for the general multimode search.
#[derive(Clone, Debug)]
pub struct AscentOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_sweeps: usize,
    pub step_tol: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            seed: 0x5eed,
            max_sweeps: 20_000,
            step_tol: 1e-9,
        }
    }
}

/// Multimode capacity for an oscillator-type Hamiltonian.
///
/// When `ε_qq`, `ε_pp` and `β` share an orthogonal eigenbasis the problem
/// splits into one-mode problems and only the energy split is searched.
/// Otherwise falls back to [`cea_coordinate_ascent`], whose result is a lower
/// bound.
pub fn cea_multimode(beta: &NoiseMatrix, h: &EnergyForm) -> Result<CapacityResult> {
    if beta.modes() != h.modes() {
        return Err(Error::DimensionMismatch {
            expected: h.modes(),
            found: beta.modes(),
        });
    }
    require_energy(h.energy(), h.ground_energy()?)?;
    match common_eigenbasis(&[h.eps_qq(), h.eps_pp(), beta.matrix()])? {
        Some(basis) => decoupled(beta, h, &basis),
        None => cea_coordinate_ascent(beta, h, &AscentOptions::default()),
    }
}

/// Orthogonal `O` with `Oᵀ M O` diagonal for every `M`, if one exists.
fn common_eigenbasis(mats: &[&RealMatrix]) -> Result<Option<RealMatrix>> {
    let n = mats[0].rows();
    // A generic combination separates the joint eigenspaces.
    let weights = [1.0, std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_PI];
    let mut mix = RealMatrix::zeros(n, n);
    for (m, w) in mats.iter().zip(weights.iter().cycle()) {
        mix = mix.add(&m.scale(*w))?;
    }
    let basis = sym_eig(&mix.symmetrized())?.vectors;
    for m in mats {
        let d = basis.transpose().matmul(m)?.matmul(&basis)?;
        let scale = m.max_abs().max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..n {
                if i != j && d[(i, j)].abs() > 1e-10 * scale {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some(basis))
}

fn rotate_diag(m: &RealMatrix, basis: &RealMatrix) -> Result<Vec<f64>> {
    Ok(basis.transpose().matmul(m)?.matmul(basis)?.diag())
}

fn decoupled(beta: &NoiseMatrix, h: &EnergyForm, basis: &RealMatrix) -> Result<CapacityResult> {
    let eq = rotate_diag(h.eps_qq(), basis)?;
    let ep = rotate_diag(h.eps_pp(), basis)?;
    let bs = rotate_diag(beta.matrix(), basis)?;
    let problems: Vec<OneModeProblem> = (0..h.modes())
        .map(|j| OneModeProblem {
            beta: bs[j],
            e_q: eq[j],
            e_p: ep[j],
            energy: 0.0,
        })
        .collect();
    let energies = allocate_energy(&problems, h.energy());

    let mut value = 0.0;
    let mut aq = Vec::with_capacity(problems.len());
    let mut ap = Vec::with_capacity(problems.len());
    for (p, e) in problems.iter().zip(&energies) {
        let opt = OneModeProblem { energy: *e, ..*p }.solve();
        value += opt.value;
        aq.push(opt.alpha_qq);
        ap.push(opt.alpha_pp);
    }
    let back = |d: &[f64]| -> Result<RealMatrix> {
        Ok(basis
            .matmul(&RealMatrix::from_diag(d))?
            .matmul(&basis.transpose())?
            .symmetrized())
    };
    let alpha = CovarianceMatrix::block_diagonal(back(&aq)?, back(&ap)?)?;
    let residual = mean_energy(&alpha, h)? - h.energy();
    Ok(CapacityResult {
        value,
        optimizer_alpha: alpha,
        constraint_residual: residual,
        converged: true,
        method: if h.modes() == 1 {
            CapacityMethod::OneMode
        } else {
            CapacityMethod::Decoupled
        },
    })
}

/// Splits `total` between independent modes whose capacities are concave
/// in energy: each mode maximizes `C_j(E_j) − λ E_j`, and `λ` is bisected
/// until the energies sum to `total`.
fn allocate_energy(problems: &[OneModeProblem], total: f64) -> Vec<f64> {
    let grounds: Vec<f64> = problems.iter().map(OneModeProblem::ground).collect();
    let excess = total - grounds.iter().sum::<f64>();
    if problems.len() == 1 || excess <= 0.0 {
        if problems.len() == 1 {
            return vec![total.max(grounds[0])];
        }
        return grounds;
    }
    let capacity = |j: usize, e: f64| {
        OneModeProblem {
            energy: e,
            ..problems[j]
        }
        .solve()
        .value
    };
    let demand = |lambda: f64| -> Vec<f64> {
        (0..problems.len())
            .map(|j| {
                let lo = grounds[j];
                golden_max(|e| capacity(j, e) - lambda * e, lo, lo + excess, 1e-12 * (1.0 + excess)).0
            })
            .collect()
    };
    let spent = |d: &[f64]| d.iter().zip(&grounds).map(|(e, g)| e - g).sum::<f64>();

    let mut lo = 0.0;
    let mut hi = 1.0;
    while spent(&demand(hi)) > excess && hi < 1e6 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if spent(&demand(mid)) > excess {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    let d = demand(0.5 * (lo + hi));
    // Spread the bisection residue over the modes' excess energies.
    let used = spent(&d);
    d.iter()
        .zip(&grounds)
        .map(|(e, g)| {
            let share = if used > 0.0 { (e - g) / used } else { 1.0 / problems.len() as f64 };
            g + share * excess
        })
        .collect()
}

/// General multimode search over block-diagonal covariances.
///
/// `α_qq = L Lᵀ` and `α_pp = α_qq⁻¹/4 + t·M Mᵀ`, which covers exactly the
/// valid block-diagonal states; `t ≥ 0` is fixed by the energy constraint.
/// Coordinates of `L` (log-diagonal) and `M` are improved one at a time with
/// adaptive steps, from the ground state and from seeded random restarts.
/// The best value found is a lower bound on the capacity.
pub fn cea_coordinate_ascent(
    beta: &NoiseMatrix,
    h: &EnergyForm,
    opts: &AscentOptions,
) -> Result<CapacityResult> {
    let s = h.modes();
    if beta.modes() != s {
        return Err(Error::DimensionMismatch {
            expected: s,
            found: beta.modes(),
        });
    }
    require_energy(h.energy(), h.ground_energy()?)?;
    let param = Parametrization { s, h, beta };
    let ground_l = cholesky(&h.ground_qq()?)?;
    let base = param.encode(&ground_l, &RealMatrix::identity(s));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    for restart in 0..opts.restarts.max(1) {
        let mut start = base.clone();
        if restart > 0 {
            let mut scale = 0.5;
            loop {
                let trial: Vec<f64> = base
                    .iter()
                    .map(|x| x + scale * rng.gen_range(-1.0..1.0))
                    .collect();
                if param.objective(&trial).is_finite() || scale < 1e-6 {
                    start = trial;
                    break;
                }
                scale *= 0.5;
            }
        }
        let (v, x, converged) = pattern_search(|x| param.objective(x), start, opts);
        if best.as_ref().is_none_or(|b| v > b.0) {
            best = Some((v, x, converged));
        }
    }
    let (value, x, converged) = best.expect("at least one restart");
    let alpha = param
        .decode(&x)
        .ok_or(Error::NoConvergence { iterations: opts.max_sweeps })?;
    let residual = mean_energy(&alpha, h)? - h.energy();
    Ok(CapacityResult {
        value,
        optimizer_alpha: alpha,
        constraint_residual: residual,
        converged,
        method: CapacityMethod::CoordinateAscent,
    })
}

struct Parametrization<'a> {
    s: usize,
    h: &'a EnergyForm,
    beta: &'a NoiseMatrix,
}

impl Parametrization<'_> {
    fn lower(&self, x: &[f64], log_diag: bool) -> RealMatrix {
        let mut l = RealMatrix::zeros(self.s, self.s);
        let mut k = 0;
        for i in 0..self.s {
            for j in 0..=i {
                l[(i, j)] = if i == j && log_diag { x[k].exp() } else { x[k] };
                k += 1;
            }
        }
        l
    }

    fn encode(&self, l: &RealMatrix, m: &RealMatrix) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.s * (self.s + 1));
        for i in 0..self.s {
            for j in 0..=i {
                x.push(if i == j { l[(i, j)].ln() } else { l[(i, j)] });
            }
        }
        for i in 0..self.s {
            for j in 0..=i {
                x.push(m[(i, j)]);
            }
        }
        x
    }

    fn decode(&self, x: &[f64]) -> Option<CovarianceMatrix> {
        let half = self.s * (self.s + 1) / 2;
        let l = self.lower(&x[..half], true);
        let m = self.lower(&x[half..], false);
        let qq = l.matmul(&l.transpose()).ok()?.symmetrized();
        let qq_inv = inverse_spd(&qq).ok()?;
        let base = trace_product(self.h.eps_qq(), &qq) + 0.25 * trace_product(self.h.eps_pp(), &qq_inv);
        let room = self.h.energy() - base;
        if room < 0.0 {
            return None;
        }
        let mut c = m.matmul(&m.transpose()).ok()?;
        let mut cost = trace_product(self.h.eps_pp(), &c);
        if cost < 1e-14 {
            c = RealMatrix::identity(self.s);
            cost = self.h.eps_pp().trace();
        }
        let pp = qq_inv.scale(0.25).add(&c.scale(room / cost)).ok()?.symmetrized();
        CovarianceMatrix::block_diagonal(qq, pp).ok()
    }

    fn objective(&self, x: &[f64]) -> f64 {
        self.decode(x)
            .and_then(|a| entropy_reduction(&a, self.beta).ok())
            .map_or(f64::NEG_INFINITY, |r| r.value)
    }
}

fn pattern_search(
    f: impl Fn(&[f64]) -> f64,
    mut x: Vec<f64>,
    opts: &AscentOptions,
) -> (f64, Vec<f64>, bool) {
    let mut fx = f(&x);
    let mut steps = vec![0.25; x.len()];
    for _ in 0..opts.max_sweeps {
        if steps.iter().all(|&s| s < opts.step_tol) {
            return (fx, x, true);
        }
        for i in 0..x.len() {
            let orig = x[i];
            let mut improved = false;
            for dir in [1.0, -1.0] {
                x[i] = orig + dir * steps[i];
                let v = f(&x);
                if v > fx {
                    fx = v;
                    improved = true;
                    break;
                }
            }
            if improved {
                steps[i] *= 1.5;
            } else {
                x[i] = orig;
                steps[i] *= 0.5;
            }
        }
    }
    let converged = steps.iter().all(|&s| s < opts.step_tol);
    (fx, x, converged)
}

/// One row of a capacity sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "C_ea_nats")]
    pub c_ea_nats: f64,
    pub alpha_qq_opt: f64,
    pub alpha_pp_opt: f64,
    pub converged: bool,
}

/// One-mode capacity for every `(β, E)` pair, ordered by `β` then `E`.
/// `β = 0` rows use the exact-measurement formula.
pub fn sweep(energies: &[f64], betas: &[f64]) -> Result<Vec<SweepRow>> {
    let pairs: Vec<(f64, f64)> = betas
        .iter()
        .flat_map(|&b| energies.iter().map(move |&e| (b, e)))
        .collect();
    pairs
        .par_iter()
        .map(|&(beta, energy)| {
            let r = cea_one_mode(beta, energy)?;
            Ok(SweepRow {
                beta,
                energy,
                c_ea_nats: r.value,
                alpha_qq_opt: r.optimizer_alpha.qq()[(0, 0)],
                alpha_pp_opt: r.optimizer_alpha.pp()[(0, 0)],
                converged: r.converged,
            })
        })
        .collect()
}

/// `steps` evenly spaced energies from `min` to `max` inclusive.
pub fn energy_grid(min: f64, max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..steps)
            .map(|i| {
                if i + 1 == steps {
                    max
                } else {
                    min + (max - min) * i as f64 / (steps - 1) as f64
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::er::er_one_mode;
    use crate::gaussian::g;
    use approx::assert_relative_eq;

    #[test]
    fn vacuum_and_thermal_energy() {
        let h = EnergyForm::oscillator(1, 1.0).unwrap();
        let vac = CovarianceMatrix::one_mode(0.5, 0.0, 0.5).unwrap();
        assert_relative_eq!(mean_energy(&vac, &h).unwrap(), 0.5, epsilon = 1e-15);
        let th = CovarianceMatrix::one_mode(3.0, 0.0, 3.0).unwrap();
        assert_relative_eq!(mean_energy(&th, &h).unwrap(), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn two_mode_energy_adds() {
        let h = EnergyForm::new(
            RealMatrix::from_diag(&[0.5, 2.0]),
            RealMatrix::from_diag(&[1.0, 0.25]),
            1.0,
        )
        .unwrap();
        let a = CovarianceMatrix::one_mode(1.0, 0.1, 2.0)
            .unwrap()
            .direct_sum(&CovarianceMatrix::one_mode(0.5, 0.0, 3.0).unwrap());
        let e = mean_energy(&a, &h).unwrap();
        assert_relative_eq!(e, 0.5 * 1.0 + 1.0 * 2.0 + 2.0 * 0.5 + 0.25 * 3.0, epsilon = 1e-15);
        let wrong = CovarianceMatrix::one_mode(1.0, 0.0, 1.0).unwrap();
        assert!(mean_energy(&wrong, &h).is_err());
    }

    #[test]
    fn ground_energy_of_oscillators() {
        assert_relative_eq!(
            EnergyForm::oscillator(3, 2.0).unwrap().ground_energy().unwrap(),
            1.5,
            epsilon = 1e-12
        );
        let h = EnergyForm::new(RealMatrix::from_diag(&[2.0]), RealMatrix::from_diag(&[0.5]), 2.0).unwrap();
        assert_relative_eq!(h.ground_energy().unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ground_state_has_ground_energy() {
        let h = EnergyForm::new(
            RealMatrix::from_rows(&[&[1.0, 0.3], &[0.3, 0.7]]).unwrap(),
            RealMatrix::from_rows(&[&[0.4, -0.1], &[-0.1, 1.2]]).unwrap(),
            3.0,
        )
        .unwrap();
        let qq = h.ground_qq().unwrap();
        let pp = inverse_spd(&qq).unwrap().scale(0.25);
        let a = CovarianceMatrix::block_diagonal(qq, pp).unwrap();
        assert_relative_eq!(
            mean_energy(&a, &h).unwrap(),
            h.ground_energy().unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn exact_capacity_values() {
        assert_eq!(cea_exact(0.5).unwrap(), 0.0);
        assert_relative_eq!(cea_exact(1.0).unwrap(), 0.9547712524422192, epsilon = 1e-11);
        assert_relative_eq!(cea_exact(2.0).unwrap(), g(1.5).unwrap(), epsilon = 1e-15);
        assert_relative_eq!(cea_exact(2.0).unwrap(), 1.682529, epsilon = 1e-6);
        assert!(matches!(cea_exact(0.4), Err(Error::InfeasibleEnergy { .. })));
    }

    #[test]
    fn one_mode_vacuum_budget() {
        for beta in [0.1, 1.0, 10.0] {
            let r = cea_one_mode(beta, 0.5).unwrap();
            assert_eq!(r.value, 0.0);
            assert_relative_eq!(r.optimizer_alpha.qq()[(0, 0)], 0.5, epsilon = 1e-12);
        }
        assert!(matches!(cea_one_mode(1.0, 0.3), Err(Error::InfeasibleEnergy { .. })));
        assert!(cea_one_mode(-1.0, 1.0).is_err());
    }

    #[test]
    fn one_mode_small_noise_approaches_exact() {
        for e in [1.0, 2.0] {
            let r = cea_one_mode(1e-6, e).unwrap();
            let bound = cea_exact(e).unwrap();
            assert!(r.value <= bound && r.value >= bound - 1e-3, "{e}: {} vs {bound}", r.value);
        }
    }

    #[test]
    fn one_mode_result_is_consistent() {
        let r = cea_one_mode(1.0, 2.0).unwrap();
        let a = r.optimizer_alpha.qq()[(0, 0)];
        let b = r.optimizer_alpha.pp()[(0, 0)];
        assert_relative_eq!(r.value, er_one_mode(a, 0.0, b, 1.0).unwrap(), epsilon = 1e-12);
        assert!(r.constraint_residual.abs() <= 1e-8 * 2.0);
        let w = (4.0f64 - 0.25).sqrt();
        assert!(a >= 2.0 - w && a <= 2.0 + w);
    }

    #[test]
    fn zero_noise_routes_to_exact() {
        let r = cea_one_mode(0.0, 1.0).unwrap();
        assert_eq!(r.method, CapacityMethod::ExactMeasurement);
        assert_relative_eq!(r.value, g(0.5).unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn golden_section_finds_peak() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3), -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
        assert!(v <= 0.0 && v > -1e-18);
    }

    #[test]
    fn grid_endpoints() {
        assert_eq!(energy_grid(0.5, 6.0, 56).len(), 56);
        assert_eq!(energy_grid(0.5, 6.0, 56)[55], 6.0);
        assert_eq!(energy_grid(0.5, 6.0, 12)[1], 1.0);
        assert_eq!(energy_grid(1.0, 2.0, 1), vec![1.0]);
    }

    #[test]
    fn energy_form_json_round_trip() {
        let h = EnergyForm::oscillator(2, 1.7).unwrap();
        let text = serde_json::to_string(&h).unwrap();
        let back: EnergyForm = serde_json::from_str(&text).unwrap();
        assert_eq!(h, back);
    }
}
