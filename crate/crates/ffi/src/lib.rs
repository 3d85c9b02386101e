//! C ABI for the q-Bessel birth-death library.
//!
//! Conventions:
//! - Handles (`QbdParams`, `QbdEngine`) are opaque; create with `*_new`,
//!   destroy with `*_free`. A successful `*_new` writes through its out
//!   pointer; ownership passes to the caller.
//! - Every fallible call returns a [`QbdStatus`]; on anything but `Ok` the
//!   thread-local error message is available through [`qbd_last_error`].
//! - Numeric results cross the boundary as `f64` (a narrowed view of the
//!   working-precision values; the Rust API and the CLI expose the full
//!   decimal expansion).
//! - The C header is generated into `include/qbd.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe, UnwindSafe};

use qbd_core::bdkernel::{heat_kernel, stationary_weight, transition_row};
use qbd_core::ctmcsim::{empirical_vs_analytic, simulate_ensemble, SimConfig};
use qbd_core::qbessel::{delta_q, jnu_series};
use qbd_core::qcore::{c_constant, GridWindow, QParams};
use qbd_core::qfourier::KernelMatrix;
use qbd_core::verify::{all_pass, run_all, VerifyConfig};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QbdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    CoverageError = 3,
    PrecisionCap = 4,
    BufferTooSmall = 5,
    Panicked = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_for(err: &qbd_core::Error) -> QbdStatus {
    use qbd_core::Error::*;
    match err {
        CacheUnderCoverage { .. } => QbdStatus::CoverageError,
        PrecisionCapExceeded { .. } => QbdStatus::PrecisionCap,
        _ => QbdStatus::InvalidArgument,
    }
}

fn guarded(f: impl FnOnce() -> QbdStatus + UnwindSafe) -> QbdStatus {
    match catch_unwind(f) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            QbdStatus::Panicked
        }
    }
}

/// Opaque parameter handle wrapping (q, nu, precision, truncation tolerance).
pub struct QbdParams {
    inner: QParams,
}

/// Opaque engine handle: a grid window with its Bessel cache and transform
/// matrix, ready to produce rows, kernels, and verification reports.
pub struct QbdEngine {
    matrix: KernelMatrix,
}

/// Aggregate report filled by `qbd_simulate`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct QbdSimReport {
    /// Total variation distance between empirical and analytic distributions.
    pub tv: f64,
    /// Acceptance threshold 3 sqrt(K / (2 n_valid)).
    pub threshold: f64,
    /// Largest per-state |z| among states with expected count >= 5.
    pub z_max: f64,
    /// States holding 99.9% of the analytic mass.
    pub k_states: u64,
    pub n_valid: u64,
    pub n_guard: u64,
    pub n_maxed: u64,
    /// 1 when the statistical criteria pass, else 0.
    pub pass: u8,
}

/// Version of the library as a NUL-terminated static string.
#[no_mangle]
pub extern "C" fn qbd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copy the last error message into `buf` (NUL-terminated, truncated to
/// `cap`). Returns the full message length in bytes, excluding the NUL.
///
/// # Safety
/// `buf` must point to `cap` writable bytes, or be null (then only the
/// required length is returned).
#[no_mangle]
pub unsafe extern "C" fn qbd_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Validate and allocate a parameter handle.
///
/// # Safety
/// `out` must be a valid pointer to a `*mut QbdParams` slot.
#[no_mangle]
pub unsafe extern "C" fn qbd_params_new(
    q: f64,
    nu: f64,
    precision_bits: u32,
    trunc_tol: f64,
    out: *mut *mut QbdParams,
) -> QbdStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return QbdStatus::NullPointer;
    }
    guarded(AssertUnwindSafe(|| match QParams::new(q, nu, precision_bits, trunc_tol) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(QbdParams { inner }));
            QbdStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_for(&e)
        }
    }))
}

/// Release a parameter handle. Null is tolerated.
///
/// # Safety
/// `p` must be a handle produced by `qbd_params_new`, or null.
#[no_mangle]
pub unsafe extern "C" fn qbd_params_free(p: *mut QbdParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Build an engine on the window [window_lo, window_hi]: evaluates the
/// Bessel cache over the doubled window and assembles the transform matrix.
///
/// # Safety
/// `params` must be a live handle; `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn qbd_engine_new(
    params: *const QbdParams,
    window_lo: i64,
    window_hi: i64,
    out: *mut *mut QbdEngine,
) -> QbdStatus {
    if params.is_null() || out.is_null() {
        set_error("null handle");
        return QbdStatus::NullPointer;
    }
    let p = &(*params).inner;
    guarded(AssertUnwindSafe(|| {
        let build = GridWindow::new(window_lo, window_hi)
            .and_then(|w| KernelMatrix::build(w, p));
        match build {
            Ok(matrix) => {
                *out = Box::into_raw(Box::new(QbdEngine { matrix }));
                QbdStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_for(&e)
            }
        }
    }))
}

/// Release an engine handle. Null is tolerated.
///
/// # Safety
/// `e` must be a handle produced by `qbd_engine_new`, or null.
#[no_mangle]
pub unsafe extern "C" fn qbd_engine_free(e: *mut QbdEngine) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Number of grid points in the engine's window (0 for null).
///
/// # Safety
/// `e` must be a live engine handle or null.
#[no_mangle]
pub unsafe extern "C" fn qbd_engine_window_len(e: *const QbdEngine) -> usize {
    if e.is_null() {
        return 0;
    }
    (*e).matrix.window().len()
}

/// Window bounds of the engine.
///
/// # Safety
/// All pointers must be valid; `e` must be a live engine handle.
#[no_mangle]
pub unsafe extern "C" fn qbd_engine_window(
    e: *const QbdEngine,
    out_lo: *mut i64,
    out_hi: *mut i64,
) -> QbdStatus {
    if e.is_null() || out_lo.is_null() || out_hi.is_null() {
        set_error("null handle");
        return QbdStatus::NullPointer;
    }
    *out_lo = (*e).matrix.window().n_lo();
    *out_hi = (*e).matrix.window().n_hi();
    QbdStatus::Ok
}

macro_rules! scalar_eval {
    ($params:expr, $out:expr, $body:expr) => {{
        if $params.is_null() || $out.is_null() {
            set_error("null handle");
            return QbdStatus::NullPointer;
        }
        let p = &(*$params).inner;
        guarded(AssertUnwindSafe(|| match $body(p) {
            Ok(v) => {
                *$out = v;
                QbdStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_for(&e)
            }
        }))
    }};
}

/// c_{q,nu}, narrowed to f64.
///
/// # Safety
/// `params` must be a live handle; `out` a valid f64 slot.
#[no_mangle]
pub unsafe extern "C" fn qbd_c_constant(params: *const QbdParams, out: *mut f64) -> QbdStatus {
    scalar_eval!(params, out, |p: &QParams| Ok::<_, qbd_core::Error>(
        c_constant(p).to_f64()
    ))
}

/// j_nu(x, q^2) at real x > 0, narrowed to f64.
///
/// # Safety
/// `params` must be a live handle; `out` a valid f64 slot.
#[no_mangle]
pub unsafe extern "C" fn qbd_jnu(params: *const QbdParams, x: f64, out: *mut f64) -> QbdStatus {
    scalar_eval!(params, out, |p: &QParams| jnu_series(x, p).map(|v| v.to_f64()))
}

/// delta_q(q^i, q^j), narrowed to f64.
///
/// # Safety
/// `params` must be a live handle; `out` a valid f64 slot.
#[no_mangle]
pub unsafe extern "C" fn qbd_delta(
    params: *const QbdParams,
    i: i64,
    j: i64,
    out: *mut f64,
) -> QbdStatus {
    scalar_eval!(params, out, |p: &QParams| Ok::<_, qbd_core::Error>(
        delta_q(i, j, p).to_f64()
    ))
}

/// The stationary weight pi_n = q^{2(nu+1)n}, narrowed to f64.
///
/// # Safety
/// `params` must be a live handle; `out` a valid f64 slot.
#[no_mangle]
pub unsafe extern "C" fn qbd_stationary_weight(
    params: *const QbdParams,
    n: i64,
    out: *mut f64,
) -> QbdStatus {
    scalar_eval!(params, out, |p: &QParams| Ok::<_, qbd_core::Error>(
        stationary_weight(n, p).to_f64()
    ))
}

/// Transition probabilities p_{.r}(t) over the engine window, written into
/// `out_probs` (length must equal the window length; index 0 is exponent
/// window_lo). `out_defect` receives |1 - sum p| and may be null.
///
/// # Safety
/// `e` must be a live engine handle; `out_probs` must point to `len` f64s.
#[no_mangle]
pub unsafe extern "C" fn qbd_transition_row(
    e: *const QbdEngine,
    r: i64,
    t: f64,
    out_probs: *mut f64,
    len: usize,
    out_defect: *mut f64,
) -> QbdStatus {
    if e.is_null() || out_probs.is_null() {
        set_error("null handle");
        return QbdStatus::NullPointer;
    }
    let matrix = &(*e).matrix;
    if len != matrix.window().len() {
        set_error("out_probs length does not match the window");
        return QbdStatus::BufferTooSmall;
    }
    let out = std::slice::from_raw_parts_mut(out_probs, len);
    guarded(AssertUnwindSafe(|| match transition_row(r, t, matrix) {
        Ok(row) => {
            for (slot, p) in out.iter_mut().zip(row.probs()) {
                *slot = p.to_f64();
            }
            if !out_defect.is_null() {
                *out_defect = row.defect().to_f64();
            }
            QbdStatus::Ok
        }
        Err(err) => {
            set_error(&err.to_string());
            status_for(&err)
        }
    }))
}

/// The heat kernel rho_t over the engine window, written into `out_values`.
///
/// # Safety
/// `e` must be a live engine handle; `out_values` must point to `len` f64s.
#[no_mangle]
pub unsafe extern "C" fn qbd_heat_kernel(
    e: *const QbdEngine,
    t: f64,
    out_values: *mut f64,
    len: usize,
) -> QbdStatus {
    if e.is_null() || out_values.is_null() {
        set_error("null handle");
        return QbdStatus::NullPointer;
    }
    let matrix = &(*e).matrix;
    if len != matrix.window().len() {
        set_error("out_values length does not match the window");
        return QbdStatus::BufferTooSmall;
    }
    let out = std::slice::from_raw_parts_mut(out_values, len);
    guarded(AssertUnwindSafe(|| match heat_kernel(t, matrix) {
        Ok(state) => {
            for (slot, v) in out.iter_mut().zip(state.rho().values()) {
                *slot = v.to_f64();
            }
            QbdStatus::Ok
        }
        Err(err) => {
            set_error(&err.to_string());
            status_for(&err)
        }
    }))
}

/// Run the invariant suite on the engine's window. Writes 1 into `out_pass`
/// when every check passes, else 0.
///
/// # Safety
/// `e` must be a live engine handle; `out_pass` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn qbd_verify(e: *const QbdEngine, out_pass: *mut u8) -> QbdStatus {
    if e.is_null() || out_pass.is_null() {
        set_error("null handle");
        return QbdStatus::NullPointer;
    }
    let matrix = &(*e).matrix;
    guarded(AssertUnwindSafe(|| {
        let cfg = VerifyConfig::with_window(*matrix.params(), matrix.window());
        match run_all(&cfg) {
            Ok(results) => {
                *out_pass = u8::from(all_pass(&results));
                QbdStatus::Ok
            }
            Err(err) => {
                set_error(&err.to_string());
                status_for(&err)
            }
        }
    }))
}

/// Simulate the chain (`n_paths` exponential-clock trajectories to `t_end`)
/// and compare end states against the analytic row at the same time.
///
/// # Safety
/// `e` must be a live engine handle; `out` a valid report slot.
#[no_mangle]
pub unsafe extern "C" fn qbd_simulate(
    e: *const QbdEngine,
    r: i64,
    t_end: f64,
    n_paths: u64,
    seed: u64,
    guard_lo: i64,
    guard_hi: i64,
    max_events: u64,
    out: *mut QbdSimReport,
) -> QbdStatus {
    if e.is_null() || out.is_null() {
        set_error("null handle");
        return QbdStatus::NullPointer;
    }
    let matrix = &(*e).matrix;
    guarded(AssertUnwindSafe(|| {
        let run = || -> qbd_core::Result<QbdSimReport> {
            let guard = GridWindow::new(guard_lo, guard_hi)?;
            let cfg = SimConfig {
                params: *matrix.params(),
                start: r,
                t_end,
                n_paths,
                seed,
                guard,
                max_events,
            };
            let stats = simulate_ensemble(&cfg)?;
            let row = transition_row(r, t_end, matrix)?;
            let report = empirical_vs_analytic(&stats, &row)?;
            Ok(QbdSimReport {
                tv: report.tv,
                threshold: report.threshold,
                z_max: report.z_max,
                k_states: report.k_states as u64,
                n_valid: stats.n_valid,
                n_guard: stats.n_guard,
                n_maxed: stats.n_maxed,
                pass: u8::from(report.pass),
            })
        };
        match run() {
            Ok(report) => {
                *out = report;
                QbdStatus::Ok
            }
            Err(err) => {
                set_error(&err.to_string());
                status_for(&err)
            }
        }
    }))
}
