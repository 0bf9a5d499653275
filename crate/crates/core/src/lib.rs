//! Information-theoretic quantities of multi-mode Gaussian approximate
//! position measurements (noisy homodyning).
//!
//! The library computes, for a Gaussian input state with covariance `α` and
//! a position measurement with Gaussian noise covariance `β`:
//!
//! - the outcome distribution and the Gaussian posterior states
//!   ([`measurement`]),
//! - the entropy reduction `ER(M; α)`, maximal over all states with
//!   covariance `α` and attained by the Gaussian one ([`er`]),
//! - the energy-constrained entanglement-assisted capacity ([`capacity`]).
//!
//! Every closed form is checked against [`oracle`], which discretizes
//! density operators in the position representation and integrates the
//! entropy reduction directly.
//!
//! Entropies are in nats unless stated otherwise.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod cli;
pub mod er;
pub mod gaussian;
pub mod mats;
pub mod measurement;
pub mod oracle;

pub use capacity::{
    cea_exact, cea_multimode, cea_one_mode, mean_energy, sweep, CapacityResult, EnergyForm,
    SweepRow,
};
pub use er::{entropy_reduction, er_exact, er_one_mode, ERResult};
pub use gaussian::{
    entropy, g, symplectic_eigenvalues, validate, CovarianceMatrix, LogBase, MeanVector,
    SymplecticForm, Validity,
};
pub use mats::{HermitianMatrix, RealMatrix};
pub use measurement::{
    outcome_distribution, posterior, posterior_mean, NoiseMatrix, OutcomeDistribution,
    PosteriorModel,
};

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("symplectic eigenvalues did not pair: {0:?}")]
    PairingFailure(Vec<f64>),

    #[error("argument outside domain: {0}")]
    DomainError(String),

    #[error("uncertainty relation violated: nu_min = {nu_min} < 0.5")]
    InvalidState { nu_min: f64 },

    #[error("energy {energy} is below the ground-state energy {minimum}")]
    InfeasibleEnergy { energy: f64, minimum: f64 },

    #[error("kernel grid too small: {0}")]
    GridTooSmall(String),
}

pub type Result<T> = std::result::Result<T, Error>;
