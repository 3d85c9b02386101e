//! Exercise the C ABI surface from Rust: handle lifecycles, status codes,
//! error messages, buffer contracts, and numeric sanity of the narrowed
//! results.

use std::ffi::CStr;
use std::os::raw::c_char;
use std::ptr;

use qbd_ffi::*;

fn params(q: f64, nu: f64) -> *mut QbdParams {
    let mut p: *mut QbdParams = ptr::null_mut();
    let status = unsafe { qbd_params_new(q, nu, 192, 1e-40, &mut p) };
    assert_eq!(status, QbdStatus::Ok);
    assert!(!p.is_null());
    p
}

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    let len = unsafe { qbd_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(len < buf.len());
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(qbd_version()) };
    let s = v.to_str().unwrap();
    assert_eq!(s, env!("CARGO_PKG_VERSION"));
}

#[test]
fn params_validation_and_errors() {
    let mut p: *mut QbdParams = ptr::null_mut();
    let status = unsafe { qbd_params_new(1.5, 0.0, 192, 1e-40, &mut p) };
    assert_eq!(status, QbdStatus::InvalidArgument);
    assert!(p.is_null());
    assert!(last_error().contains("q out of range"));

    let status = unsafe { qbd_params_new(0.5, -2.0, 192, 1e-40, &mut p) };
    assert_eq!(status, QbdStatus::InvalidArgument);
    assert!(last_error().contains("nu out of range"));

    assert_eq!(
        unsafe { qbd_params_new(0.5, 0.0, 192, 1e-40, ptr::null_mut()) },
        QbdStatus::NullPointer
    );

    // free tolerates null
    unsafe { qbd_params_free(ptr::null_mut()) };
}

#[test]
fn scalar_evaluations() {
    let p = params(0.5, 0.0);
    unsafe {
        let mut c = 0.0f64;
        assert_eq!(qbd_c_constant(p, &mut c), QbdStatus::Ok);
        assert!((c - 2.0).abs() < 1e-14);

        let mut j = 0.0f64;
        assert_eq!(qbd_jnu(p, 1.0, &mut j), QbdStatus::Ok);
        assert!((j - 0.5866528696112797).abs() < 1e-14);

        assert_eq!(qbd_jnu(p, -1.0, &mut j), QbdStatus::InvalidArgument);

        let mut d = 0.0f64;
        assert_eq!(qbd_delta(p, 1, 1, &mut d), QbdStatus::Ok);
        assert!((d - 8.0).abs() < 1e-14);
        assert_eq!(qbd_delta(p, 0, 1, &mut d), QbdStatus::Ok);
        assert_eq!(d, 0.0);

        let mut pi = 0.0f64;
        assert_eq!(qbd_stationary_weight(p, 0, &mut pi), QbdStatus::Ok);
        assert_eq!(pi, 1.0);

        qbd_params_free(p);
    }
}

#[test]
fn engine_rows_and_heat_kernel() {
    let p = params(0.5, 1.0);
    unsafe {
        let mut e: *mut QbdEngine = ptr::null_mut();
        assert_eq!(qbd_engine_new(p, -8, 32, &mut e), QbdStatus::Ok);
        let len = qbd_engine_window_len(e);
        assert_eq!(len, 41);
        let (mut lo, mut hi) = (0i64, 0i64);
        assert_eq!(qbd_engine_window(e, &mut lo, &mut hi), QbdStatus::Ok);
        assert_eq!((lo, hi), (-8, 32));

        // wrong buffer size is rejected
        let mut short = vec![0.0f64; len - 1];
        assert_eq!(
            qbd_transition_row(e, 0, 0.5, short.as_mut_ptr(), short.len(), ptr::null_mut()),
            QbdStatus::BufferTooSmall
        );

        let mut probs = vec![0.0f64; len];
        let mut defect = 1.0f64;
        assert_eq!(
            qbd_transition_row(e, 0, 0.5, probs.as_mut_ptr(), len, &mut defect),
            QbdStatus::Ok
        );
        let sum: f64 = probs.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12, "sum {sum}");
        assert!(defect < 1e-12);
        assert!(probs.iter().all(|&x| x > -1e-15));

        // t = 0 gives the exact unit vector
        assert_eq!(
            qbd_transition_row(e, 3, 0.0, probs.as_mut_ptr(), len, &mut defect),
            QbdStatus::Ok
        );
        for (idx, &v) in probs.iter().enumerate() {
            let n = lo + idx as i64;
            assert_eq!(v, if n == 3 { 1.0 } else { 0.0 });
        }
        assert_eq!(defect, 0.0);

        // start state outside the window
        assert_eq!(
            qbd_transition_row(e, 99, 0.5, probs.as_mut_ptr(), len, ptr::null_mut()),
            QbdStatus::InvalidArgument
        );
        assert!(last_error().contains("outside window"));

        let mut rho = vec![0.0f64; len];
        assert_eq!(qbd_heat_kernel(e, 1.0, rho.as_mut_ptr(), len), QbdStatus::Ok);
        assert!(rho.iter().all(|v| v.is_finite()));
        assert_eq!(
            qbd_heat_kernel(e, 0.0, rho.as_mut_ptr(), len),
            QbdStatus::InvalidArgument
        );

        qbd_engine_free(e);
        qbd_params_free(p);
    }
}

#[test]
fn simulate_fills_report() {
    let p = params(0.5, 1.0);
    unsafe {
        let mut e: *mut QbdEngine = ptr::null_mut();
        assert_eq!(qbd_engine_new(p, -14, 38, &mut e), QbdStatus::Ok);
        let mut report = QbdSimReport {
            tv: -1.0,
            threshold: -1.0,
            z_max: -1.0,
            k_states: 0,
            n_valid: 0,
            n_guard: 0,
            n_maxed: 0,
            pass: 0,
        };
        let status = qbd_simulate(e, 0, 0.5, 5000, 7, -12, 30, 1_000_000, &mut report);
        assert_eq!(status, QbdStatus::Ok);
        assert_eq!(report.n_valid, 5000);
        assert_eq!(report.n_guard, 0);
        assert_eq!(report.pass, 1);
        assert!(report.tv >= 0.0 && report.tv <= report.threshold);
        qbd_engine_free(e);
        qbd_params_free(p);
    }
}

#[test]
fn verify_on_undersized_window_reports_failure() {
    let p = params(0.5, 0.0);
    unsafe {
        let mut e: *mut QbdEngine = ptr::null_mut();
        assert_eq!(qbd_engine_new(p, -4, 20, &mut e), QbdStatus::Ok);
        let mut pass = 2u8;
        assert_eq!(qbd_verify(e, &mut pass), QbdStatus::Ok);
        assert_eq!(pass, 0, "an undersized window cannot pass every check");
        qbd_engine_free(e);
        qbd_params_free(p);
    }
}

#[test]
fn generated_header_exists_with_expected_symbols() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("qbd.h");
    let text = std::fs::read_to_string(&header).expect("header generated by build.rs");
    for symbol in [
        "qbd_params_new",
        "qbd_engine_new",
        "qbd_transition_row",
        "qbd_heat_kernel",
        "qbd_simulate",
        "qbd_verify",
        "qbd_last_error",
        "QbdStatus",
        "QbdSimReport",
    ] {
        assert!(text.contains(symbol), "{symbol} missing from qbd.h");
    }
    // opaque handles are forward declarations only
    assert!(text.contains("typedef struct QbdParams QbdParams;"));
    assert!(text.contains("typedef struct QbdEngine QbdEngine;"));
}
