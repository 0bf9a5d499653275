//! C ABI for the apm library.
//!
//! Every fallible function returns an [`ApmStatus`] and writes results
//! through out-pointers. States and posteriors cross the boundary as opaque
//! handles that the caller releases with the matching `_free` function.
//! Matrices are `s × s` blocks in row-major order. The message of the most
//! recent failure on the calling thread is available from
//! [`apm_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use apm::{CovarianceMatrix, Error, NoiseMatrix, PosteriorModel, RealMatrix};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApmStatus {
    Ok = 0,
    NullPointer = 1,
    DimensionMismatch = 2,
    NotPositiveDefinite = 3,
    NotSymmetric = 4,
    NonFinite = 5,
    NoConvergence = 6,
    DomainError = 7,
    InvalidState = 8,
    InfeasibleEnergy = 9,
    GridTooSmall = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

/// Opaque covariance matrix of an `s`-mode state.
pub struct ApmCovariance {
    inner: CovarianceMatrix,
}

/// Opaque result of a noisy position measurement.
pub struct ApmPosterior {
    inner: PosteriorModel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> ApmStatus {
    match e {
        Error::DimensionMismatch { .. } => ApmStatus::DimensionMismatch,
        Error::NotPositiveDefinite => ApmStatus::NotPositiveDefinite,
        Error::NotSymmetric => ApmStatus::NotSymmetric,
        Error::NonFinite => ApmStatus::NonFinite,
        Error::NoConvergence { .. } | Error::PairingFailure(_) => ApmStatus::NoConvergence,
        Error::DomainError(_) => ApmStatus::DomainError,
        Error::InvalidState { .. } => ApmStatus::InvalidState,
        Error::InfeasibleEnergy { .. } => ApmStatus::InfeasibleEnergy,
        Error::GridTooSmall(_) => ApmStatus::GridTooSmall,
    }
}

enum Failure {
    Status(ApmStatus, &'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null() -> Failure {
    Failure::Status(ApmStatus::NullPointer, "null pointer argument")
}

fn short() -> Failure {
    Failure::Status(ApmStatus::BufferTooSmall, "output buffer too small")
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ApmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ApmStatus::Ok,
        Ok(Err(Failure::Status(s, msg))) => {
            set_last_error(msg);
            s
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            ApmStatus::Panic
        }
    }
}

unsafe fn read<'a>(p: *const f64, len: usize) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null());
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn write(p: *mut f64, v: f64) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null());
    }
    *p = v;
    Ok(())
}

unsafe fn write_slice(p: *mut f64, len: usize, v: &[f64]) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null());
    }
    if len < v.len() {
        return Err(short());
    }
    slice::from_raw_parts_mut(p, v.len()).copy_from_slice(v);
    Ok(())
}

unsafe fn square(p: *const f64, s: usize) -> Result<RealMatrix, Failure> {
    Ok(RealMatrix::from_row_major(s, s, read(p, s * s)?.to_vec())?)
}

unsafe fn covariance<'a>(p: *const ApmCovariance) -> Result<&'a CovarianceMatrix, Failure> {
    p.as_ref().map(|c| &c.inner).ok_or_else(null)
}

unsafe fn boxed<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn apm_status_message(status: ApmStatus) -> *const c_char {
    let s: &'static CStr = match status {
        ApmStatus::Ok => c"ok",
        ApmStatus::NullPointer => c"null pointer argument",
        ApmStatus::DimensionMismatch => c"dimension mismatch",
        ApmStatus::NotPositiveDefinite => c"matrix is not positive definite",
        ApmStatus::NotSymmetric => c"matrix is not symmetric",
        ApmStatus::NonFinite => c"matrix has non-finite entries",
        ApmStatus::NoConvergence => c"no convergence",
        ApmStatus::DomainError => c"argument outside domain",
        ApmStatus::InvalidState => c"uncertainty relation violated",
        ApmStatus::InfeasibleEnergy => c"energy below the ground-state energy",
        ApmStatus::GridTooSmall => c"kernel grid too small",
        ApmStatus::BufferTooSmall => c"output buffer too small",
        ApmStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Message of the most recent failure on this thread. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn apm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds an `s`-mode covariance from its `α_qq`, `α_qp` and `α_pp` blocks.
///
/// # Safety
/// Each block pointer must reference `s*s` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn apm_covariance_new(
    s: usize,
    qq: *const f64,
    qp: *const f64,
    pp: *const f64,
    out: *mut *mut ApmCovariance,
) -> ApmStatus {
    guard(|| {
        let inner = CovarianceMatrix::new(square(qq, s)?, square(qp, s)?, square(pp, s)?)?;
        boxed(out, ApmCovariance { inner })
    })
}

/// One-mode covariance `[[qq, qp], [qp, pp]]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apm_covariance_one_mode(qq: f64, qp: f64, pp: f64, out: *mut *mut ApmCovariance) -> ApmStatus {
    guard(|| {
        let inner = CovarianceMatrix::one_mode(qq, qp, pp)?;
        boxed(out, ApmCovariance { inner })
    })
}

/// Releases a covariance handle. Null is ignored.
///
/// # Safety
/// `cov` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn apm_covariance_free(cov: *mut ApmCovariance) {
    if !cov.is_null() {
        drop(Box::from_raw(cov));
    }
}

/// Number of modes, or 0 for a null handle.
///
/// # Safety
/// `cov` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn apm_covariance_modes(cov: *const ApmCovariance) -> usize {
    cov.as_ref().map_or(0, |c| c.inner.modes())
}

/// Writes the `2s × 2s` covariance in row-major order to `out`.
///
/// # Safety
/// `cov` must be a live handle; `out` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn apm_covariance_full(cov: *const ApmCovariance, out: *mut f64, len: usize) -> ApmStatus {
    guard(|| write_slice(out, len, covariance(cov)?.full().as_slice()))
}

/// Symplectic eigenvalues in ascending order; `out` needs `s` slots.
///
/// # Safety
/// `cov` must be a live handle; `out` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn apm_symplectic_eigenvalues(cov: *const ApmCovariance, out: *mut f64, len: usize) -> ApmStatus {
    guard(|| write_slice(out, len, &apm::symplectic_eigenvalues(covariance(cov)?)?))
}

/// Smallest symplectic eigenvalue and whether the state is physical.
///
/// # Safety
/// `cov` must be a live handle; `nu_min` and `valid` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apm_validate(cov: *const ApmCovariance, nu_min: *mut f64, valid: *mut bool) -> ApmStatus {
    guard(|| {
        let v = apm::validate(covariance(cov)?)?;
        if valid.is_null() {
            return Err(null());
        }
        write(nu_min, v.nu_min)?;
        *valid = v.valid;
        Ok(())
    })
}

/// Von Neumann entropy in nats.
///
/// # Safety
/// `cov` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apm_entropy(cov: *const ApmCovariance, out: *mut f64) -> ApmStatus {
    guard(|| write(out, apm::entropy(covariance(cov)?)?))
}

/// `g(x) = (x+1) ln(x+1) − x ln x`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apm_g(x: f64, out: *mut f64) -> ApmStatus {
    guard(|| write(out, apm::g(x)?))
}

/// Posterior of a position measurement with noise covariance `beta`
/// (`s × s`, row-major).
///
/// # Safety
/// `cov` must be a live handle; `beta` must reference `s*s` doubles where
/// `s` is the mode count; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apm_posterior_new(
    cov: *const ApmCovariance,
    beta: *const f64,
    out: *mut *mut ApmPosterior,
) -> ApmStatus {
    guard(|| {
        let alpha = covariance(cov)?;
        let noise = NoiseMatrix::new(square(beta, alpha.modes())?)?;
        let inner = apm::posterior(alpha, &noise)?;
        boxed(out, ApmPosterior { inner })
    })
}

/// Releases a posterior handle. Null is ignored.
///
/// # Safety
/// `post` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn apm_posterior_free(post: *mut ApmPosterior) {
    if !post.is_null() {
        drop(Box::from_raw(post));
    }
}

/// New covariance handle holding the posterior covariance.
///
/// # Safety
/// `post` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apm_posterior_covariance(post: *const ApmPosterior, out: *mut *mut ApmCovariance) -> ApmStatus {
    guard(|| {
        let p = post.as_ref().ok_or_else(null)?;
        boxed(
            out,
            ApmCovariance {
                inner: p.inner.alpha_hat.clone(),
            },
        )
    })
}

/// Gains `K_q` and `K_p`, each `s × s` row-major.
///
/// # Safety
/// `post` must be a live handle; `k_q` and `k_p` must each have room for
/// `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn apm_posterior_gains(
    post: *const ApmPosterior,
    k_q: *mut f64,
    k_p: *mut f64,
    len: usize,
) -> ApmStatus {
    guard(|| {
        let p = post.as_ref().ok_or_else(null)?;
        write_slice(k_q, len, p.inner.k_q.as_slice())?;
        write_slice(k_p, len, p.inner.k_p.as_slice())
    })
}

/// Posterior mean for outcome `x` (length `s`) of a centered prior.
///
/// # Safety
/// `post` must be a live handle; `x` must reference `s` doubles; `m_q` and
/// `m_p` must each have room for `s` doubles.
#[no_mangle]
pub unsafe extern "C" fn apm_posterior_mean(
    post: *const ApmPosterior,
    x: *const f64,
    m_q: *mut f64,
    m_p: *mut f64,
) -> ApmStatus {
    guard(|| {
        let p = post.as_ref().ok_or_else(null)?;
        let s = p.inner.k_q.rows();
        let m = apm::posterior_mean(&p.inner, read(x, s)?)?;
        write_slice(m_q, s, &m.m_q)?;
        write_slice(m_p, s, &m.m_p)
    })
}

/// Entropy reduction in nats for noise covariance `beta` (`s × s`).
///
/// # Safety
/// `cov` must be a live handle; `beta` must reference `s*s` doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn apm_entropy_reduction(cov: *const ApmCovariance, beta: *const f64, out: *mut f64) -> ApmStatus {
    guard(|| {
        let alpha = covariance(cov)?;
        let noise = NoiseMatrix::new(square(beta, alpha.modes())?)?;
        write(out, apm::entropy_reduction(alpha, &noise)?.value)
    })
}

/// One-mode entropy reduction in nats.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apm_er_one_mode(alpha_qq: f64, alpha_qp: f64, alpha_pp: f64, beta: f64, out: *mut f64) -> ApmStatus {
    guard(|| write(out, apm::er_one_mode(alpha_qq, alpha_qp, alpha_pp, beta)?))
}

/// One-mode capacity for `H = (q² + p²)/2`. `beta = 0` is the exact
/// measurement. The optimal `α_qq` and `α_pp` are written when the pointers
/// are non-null.
///
/// # Safety
/// `value` must be writable; `alpha_qq` and `alpha_pp` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn apm_cea_one_mode(
    beta: f64,
    energy: f64,
    value: *mut f64,
    alpha_qq: *mut f64,
    alpha_pp: *mut f64,
) -> ApmStatus {
    guard(|| {
        let r = apm::cea_one_mode(beta, energy)?;
        write(value, r.value)?;
        if !alpha_qq.is_null() {
            *alpha_qq = r.optimizer_alpha.qq()[(0, 0)];
        }
        if !alpha_pp.is_null() {
            *alpha_pp = r.optimizer_alpha.pp()[(0, 0)];
        }
        Ok(())
    })
}

/// Capacity of the exact position measurement, `g(E − 1/2)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn apm_cea_exact(energy: f64, out: *mut f64) -> ApmStatus {
    guard(|| write(out, apm::cea_exact(energy)?))
}
