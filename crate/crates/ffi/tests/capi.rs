use std::ffi::CStr;
use std::ptr;

use apm_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(apm_last_error()) }.to_string_lossy().into_owned()
}

fn one_mode(qq: f64, qp: f64, pp: f64) -> *mut ApmCovariance {
    let mut cov = ptr::null_mut();
    assert_eq!(unsafe { apm_covariance_one_mode(qq, qp, pp, &mut cov) }, ApmStatus::Ok);
    cov
}

#[test]
fn entropy_and_spectrum() {
    let cov = one_mode(1.5, 0.0, 1.5);
    unsafe {
        assert_eq!(apm_covariance_modes(cov), 1);
        let mut h = 0.0;
        assert_eq!(apm_entropy(cov, &mut h), ApmStatus::Ok);
        let mut g1 = 0.0;
        assert_eq!(apm_g(1.0, &mut g1), ApmStatus::Ok);
        assert!((h - g1).abs() < 1e-12);
        let mut nu = [0.0; 1];
        assert_eq!(apm_symplectic_eigenvalues(cov, nu.as_mut_ptr(), 1), ApmStatus::Ok);
        assert!((nu[0] - 1.5).abs() < 1e-12);
        let mut full = [0.0; 4];
        assert_eq!(apm_covariance_full(cov, full.as_mut_ptr(), 4), ApmStatus::Ok);
        assert_eq!(full, [1.5, 0.0, 0.0, 1.5]);
        assert_eq!(apm_covariance_full(cov, full.as_mut_ptr(), 3), ApmStatus::BufferTooSmall);
        apm_covariance_free(cov);
    }
}

#[test]
fn invalid_state_is_reported() {
    let cov = one_mode(0.4, 0.0, 0.4);
    unsafe {
        let (mut nu, mut valid) = (0.0, true);
        assert_eq!(apm_validate(cov, &mut nu, &mut valid), ApmStatus::Ok);
        assert!(!valid);
        assert!((nu - 0.4).abs() < 1e-12);
        let mut h = 0.0;
        assert_eq!(apm_entropy(cov, &mut h), ApmStatus::InvalidState);
        assert!(last_error().starts_with("uncertainty relation violated: nu_min = 0.4"));
        let msg = CStr::from_ptr(apm_status_message(ApmStatus::InvalidState));
        assert_eq!(msg.to_str().unwrap(), "uncertainty relation violated");
        apm_covariance_free(cov);
    }
}

#[test]
fn posterior_round_trip() {
    let s = 2;
    let qq = [1.0, 0.2, 0.2, 0.8];
    let qp = [0.1, 0.0, 0.0, -0.1];
    let pp = [1.2, 0.0, 0.0, 1.5];
    let beta = [0.5, 0.0, 0.0, 2.0];
    unsafe {
        let mut cov = ptr::null_mut();
        assert_eq!(apm_covariance_new(s, qq.as_ptr(), qp.as_ptr(), pp.as_ptr(), &mut cov), ApmStatus::Ok);
        let mut post = ptr::null_mut();
        assert_eq!(apm_posterior_new(cov, beta.as_ptr(), &mut post), ApmStatus::Ok);

        let alpha = apm::CovarianceMatrix::new(
            apm::RealMatrix::from_row_major(2, 2, qq.to_vec()).unwrap(),
            apm::RealMatrix::from_row_major(2, 2, qp.to_vec()).unwrap(),
            apm::RealMatrix::from_row_major(2, 2, pp.to_vec()).unwrap(),
        )
        .unwrap();
        let noise = apm::NoiseMatrix::new(apm::RealMatrix::from_row_major(2, 2, beta.to_vec()).unwrap()).unwrap();
        let want = apm::posterior(&alpha, &noise).unwrap();

        let (mut kq, mut kp) = ([0.0; 4], [0.0; 4]);
        assert_eq!(apm_posterior_gains(post, kq.as_mut_ptr(), kp.as_mut_ptr(), 4), ApmStatus::Ok);
        assert_eq!(kq.as_slice(), want.k_q.as_slice());
        assert_eq!(kp.as_slice(), want.k_p.as_slice());

        let x = [1.0, -2.0];
        let (mut mq, mut mp) = ([0.0; 2], [0.0; 2]);
        assert_eq!(apm_posterior_mean(post, x.as_ptr(), mq.as_mut_ptr(), mp.as_mut_ptr()), ApmStatus::Ok);
        let m = apm::posterior_mean(&want, &x).unwrap();
        assert_eq!(mq.to_vec(), m.m_q);
        assert_eq!(mp.to_vec(), m.m_p);

        let mut hat = ptr::null_mut();
        assert_eq!(apm_posterior_covariance(post, &mut hat), ApmStatus::Ok);
        let mut full = [0.0; 16];
        assert_eq!(apm_covariance_full(hat, full.as_mut_ptr(), 16), ApmStatus::Ok);
        assert_eq!(full.as_slice(), want.alpha_hat.full().as_slice());

        let mut er = 0.0;
        assert_eq!(apm_entropy_reduction(cov, beta.as_ptr(), &mut er), ApmStatus::Ok);
        assert_eq!(er, apm::entropy_reduction(&alpha, &noise).unwrap().value);

        apm_covariance_free(hat);
        apm_posterior_free(post);
        apm_covariance_free(cov);
    }
}

#[test]
fn scalar_functions() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(apm_er_one_mode(1.0, 0.0, 1.0, 1.0, &mut v), ApmStatus::Ok);
        assert!((v - 0.26645).abs() < 5e-6);
        assert_eq!(apm_er_one_mode(1.0, 0.0, 1.0, 0.0, &mut v), ApmStatus::DomainError);

        let mut exact = 0.0;
        assert_eq!(apm_cea_exact(1.0, &mut exact), ApmStatus::Ok);
        assert!((exact - 0.954771).abs() < 1e-6);
        let (mut c, mut a, mut b) = (0.0, 0.0, 0.0);
        assert_eq!(apm_cea_one_mode(0.0, 1.0, &mut c, &mut a, &mut b), ApmStatus::Ok);
        assert_eq!(c, exact);
        assert_eq!((a, b), (1.0, 1.0));
        assert_eq!(apm_cea_one_mode(1.0, 2.0, &mut c, ptr::null_mut(), ptr::null_mut()), ApmStatus::Ok);
        assert_eq!(c, apm::cea_one_mode(1.0, 2.0).unwrap().value);
        assert_eq!(apm_cea_one_mode(1.0, 0.3, &mut c, ptr::null_mut(), ptr::null_mut()), ApmStatus::InfeasibleEnergy);
        assert_eq!(apm_g(-1.0, &mut v), ApmStatus::DomainError);
    }
}

#[test]
fn null_arguments_are_rejected() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(apm_entropy(ptr::null(), &mut v), ApmStatus::NullPointer);
        assert_eq!(apm_g(1.0, ptr::null_mut()), ApmStatus::NullPointer);
        assert_eq!(apm_covariance_one_mode(1.0, 0.0, 1.0, ptr::null_mut()), ApmStatus::NullPointer);
        let mut cov = ptr::null_mut();
        assert_eq!(
            apm_covariance_new(1, ptr::null(), ptr::null(), ptr::null(), &mut cov),
            ApmStatus::NullPointer
        );
        assert!(cov.is_null());
        assert_eq!(apm_covariance_modes(ptr::null()), 0);
        apm_covariance_free(ptr::null_mut());
        apm_posterior_free(ptr::null_mut());
        assert_eq!(last_error(), "null pointer argument");
    }
}

#[test]
fn asymmetric_blocks_are_rejected() {
    let qq = [1.0, 0.3, 0.0, 1.0];
    let zero = [0.0; 4];
    let pp = [1.0, 0.0, 0.0, 1.0];
    let mut cov = ptr::null_mut();
    let status = unsafe { apm_covariance_new(2, qq.as_ptr(), zero.as_ptr(), pp.as_ptr(), &mut cov) };
    assert_eq!(status, ApmStatus::NotSymmetric);
    assert!(cov.is_null());
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/apm.h")).unwrap();
    for name in [
        "typedef struct ApmCovariance ApmCovariance;",
        "typedef struct ApmPosterior ApmPosterior;",
        "APM_STATUS_INVALID_STATE = 8",
        "apm_covariance_new(",
        "apm_posterior_new(",
        "apm_entropy_reduction(",
        "apm_cea_one_mode(",
        "apm_last_error(void)",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
