//! Error types shared across the crate.

use crate::qcore::GridWindow;

/// Errors produced by parameter validation, window algebra, and the
/// numerical kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("q out of range: {0} (need 0 < q < 1)")]
    QOutOfRange(f64),

    #[error("nu out of range: {0} (need nu > -1)")]
    NuOutOfRange(f64),

    #[error("precision_bits out of range: {0} (need >= 64)")]
    PrecisionOutOfRange(u32),

    #[error("trunc_tol out of range: {0} (need 0 < trunc_tol < 1)")]
    TruncTolOutOfRange(f64),

    #[error("base out of range: {0} (need |base| < 1)")]
    BaseOutOfRange(f64),

    #[error("invalid window: n_lo = {n_lo} exceeds n_hi = {n_hi}")]
    InvalidWindow { n_lo: i64, n_hi: i64 },

    #[error("window too small: need at least {need} points, have {have}")]
    WindowTooSmall { need: usize, have: usize },

    #[error("window mismatch: {left} vs {right}")]
    WindowMismatch { left: GridWindow, right: GridWindow },

    #[error("value count {got} does not match window size {want}")]
    LengthMismatch { got: usize, want: usize },

    #[error("non-finite value at exponent {0}")]
    NonFinite(i64),

    #[error("Bessel cache does not cover exponent {needed}: cache spans {window}")]
    CacheUnderCoverage { needed: i64, window: GridWindow },

    #[error("precision escalation to {required} bits exceeds the cap of {cap} bits")]
    PrecisionCapExceeded { required: u64, cap: u32 },

    #[error("argument must be positive, got {0}")]
    NonPositiveArgument(f64),

    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("norm order out of range: {0} (need p >= 1)")]
    NormOrderOutOfRange(f64),

    #[error("start exponent {start} outside window {window}")]
    StartOutsideWindow { start: i64, window: GridWindow },

    #[error("invalid simulation config: {0}")]
    InvalidSimConfig(String),

    #[error("comparison inputs disagree: {0}")]
    ComparisonMismatch(String),

    #[error("config file error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
