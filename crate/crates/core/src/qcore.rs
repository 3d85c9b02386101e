//! Parameters, the geometric grid, and the q-calculus primitives every other
//! module builds on: q-shifted factorials, the normalization constant c_{q,nu},
//! Jackson integrals, inner products and L^p norms.
//!
//! All arithmetic runs in configurable-precision floating point ([`rug::Float`],
//! MPFR underneath). Every value is constructed at the working precision carried
//! by [`QParams`], so identical inputs and precision settings reproduce results
//! bit for bit.

use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};

/// Smallest accepted working precision.
pub const MIN_PRECISION_BITS: u32 = 64;

/// Default working precision. Enough headroom for the defect tolerances on the
/// default window, including the cancellation-heavy Bessel evaluations after
/// escalation.
pub const DEFAULT_PRECISION_BITS: u32 = 192;

/// Default series/product truncation tolerance.
pub const DEFAULT_TRUNC_TOL: f64 = 1e-40;

/// Default hard cap on escalated precision inside series evaluation.
pub const DEFAULT_ESCALATION_CAP_BITS: u32 = 1 << 16;

/// The pair (q, nu) plus working-precision configuration. Governs every
/// computation in the crate.
///
/// `q` and `nu` are taken as `f64` and treated as exact dyadic rationals from
/// then on: all derived quantities (powers of q, weights, series terms) are
/// computed from these exact values at the working precision, never through a
/// second rounding step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QParams {
    q: f64,
    nu: f64,
    precision_bits: u32,
    trunc_tol: f64,
    escalation_cap_bits: u32,
}

impl QParams {
    /// Validate and build a parameter set.
    pub fn new(q: f64, nu: f64, precision_bits: u32, trunc_tol: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::QOutOfRange(q));
        }
        if !(nu > -1.0) || !nu.is_finite() {
            return Err(Error::NuOutOfRange(nu));
        }
        if precision_bits < MIN_PRECISION_BITS {
            return Err(Error::PrecisionOutOfRange(precision_bits));
        }
        if !(trunc_tol > 0.0 && trunc_tol < 1.0) {
            return Err(Error::TruncTolOutOfRange(trunc_tol));
        }
        Ok(QParams {
            q,
            nu,
            precision_bits,
            trunc_tol,
            escalation_cap_bits: DEFAULT_ESCALATION_CAP_BITS,
        })
    }

    /// Defaults at the given (q, nu): 192 bits, truncation tolerance 1e-40.
    pub fn with_defaults(q: f64, nu: f64) -> Result<Self> {
        Self::new(q, nu, DEFAULT_PRECISION_BITS, DEFAULT_TRUNC_TOL)
    }

    /// Replace the hard cap on escalated series precision.
    pub fn with_escalation_cap(mut self, cap_bits: u32) -> Self {
        self.escalation_cap_bits = cap_bits;
        self
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn trunc_tol(&self) -> f64 {
        self.trunc_tol
    }

    pub fn escalation_cap_bits(&self) -> u32 {
        self.escalation_cap_bits
    }

    /// Embed an `f64` exactly at the working precision.
    pub fn real(&self, v: f64) -> Float {
        Float::with_val(self.precision_bits, v)
    }

    /// q at the working precision.
    pub fn q_real(&self) -> Float {
        self.real(self.q)
    }

    /// nu at the working precision.
    pub fn nu_real(&self) -> Float {
        self.real(self.nu)
    }

    /// q^k for an integer exponent, correctly rounded at the working precision.
    pub fn q_pow_i(&self, k: i64) -> Float {
        q_pow_i_prec(self.q, k, self.precision_bits)
    }

    /// q^e for an exponent held as a `Float`.
    ///
    /// Exponents must be assembled in `Float` arithmetic (where products of
    /// dyadic inputs with small integers stay exact), never in `f64`: an f64
    /// rounding of the exponent would poison all downstream tolerances.
    pub fn q_pow_f(&self, e: &Float) -> Float {
        Float::with_val(self.precision_bits, self.q_real().pow(e))
    }

    /// The Jackson weight exponent n*(2nu+2) as an exact `Float`.
    pub fn weight_exponent(&self, n: i64) -> Float {
        let two_nu_plus_2 = Float::with_val(self.precision_bits, 2.0 * self.nu + 2.0);
        Float::with_val(self.precision_bits, &two_nu_plus_2 * n)
    }

    /// (1-q) * q^{n(2nu+2)}, the Jackson measure of the grid point q^n.
    pub fn jackson_weight(&self, n: i64) -> Float {
        let w = self.q_pow_f(&self.weight_exponent(n));
        let one_minus_q = self.real(1.0 - self.q);
        Float::with_val(self.precision_bits, &one_minus_q * &w)
    }
}

fn q_pow_i_prec(q: f64, k: i64, prec: u32) -> Float {
    let base = Float::with_val(prec, q);
    Float::with_val(prec, base.pow(k as i32))
}

/// A contiguous window of grid exponents. The grid point at index n is
/// x = q^n, so `n_lo` indexes the largest point and `n_hi` the smallest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridWindow {
    n_lo: i64,
    n_hi: i64,
}

impl std::fmt::Display for GridWindow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.n_lo, self.n_hi)
    }
}

impl GridWindow {
    pub fn new(n_lo: i64, n_hi: i64) -> Result<Self> {
        if n_lo > n_hi {
            return Err(Error::InvalidWindow { n_lo, n_hi });
        }
        Ok(GridWindow { n_lo, n_hi })
    }

    pub fn n_lo(&self) -> i64 {
        self.n_lo
    }

    pub fn n_hi(&self) -> i64 {
        self.n_hi
    }

    pub fn len(&self) -> usize {
        (self.n_hi - self.n_lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.n_lo && n <= self.n_hi
    }

    /// Exponents in order, n_lo..=n_hi.
    pub fn exponents(&self) -> impl Iterator<Item = i64> {
        self.n_lo..=self.n_hi
    }

    pub fn index_of(&self, n: i64) -> Option<usize> {
        if self.contains(n) {
            Some((n - self.n_lo) as usize)
        } else {
            None
        }
    }

    pub fn exponent_at(&self, idx: usize) -> i64 {
        self.n_lo + idx as i64
    }

    /// The window with both endpoints removed; errors if fewer than 3 points.
    pub fn interior(&self) -> Result<GridWindow> {
        if self.len() < 3 {
            return Err(Error::WindowTooSmall {
                need: 3,
                have: self.len(),
            });
        }
        Ok(GridWindow {
            n_lo: self.n_lo + 1,
            n_hi: self.n_hi - 1,
        })
    }

    /// The central half of the window. Truncation error concentrates at the
    /// edges, so properties are asserted for functions supported here.
    pub fn middle_half(&self) -> GridWindow {
        let quarter = (self.len() / 4) as i64;
        GridWindow {
            n_lo: self.n_lo + quarter,
            n_hi: self.n_hi - quarter,
        }
    }

    /// [2*n_lo, 2*n_hi]: the exponent range a Bessel cache must cover so that
    /// kernel entries at argument q^{m+n} exist for all m, n in this window.
    pub fn doubled(&self) -> GridWindow {
        GridWindow {
            n_lo: 2 * self.n_lo,
            n_hi: 2 * self.n_hi,
        }
    }
}

/// A real-valued function on a truncated window of the geometric grid,
/// stored as one working-precision value per exponent.
#[derive(Clone, Debug)]
pub struct GridFunction {
    window: GridWindow,
    values: Vec<Float>,
    params: QParams,
}

impl GridFunction {
    pub fn new(window: GridWindow, values: Vec<Float>, params: QParams) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::LengthMismatch {
                got: values.len(),
                want: window.len(),
            });
        }
        for (idx, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(window.exponent_at(idx)));
            }
        }
        Ok(GridFunction {
            window,
            values,
            params,
        })
    }

    pub fn zeros(window: GridWindow, params: QParams) -> Self {
        let values = window.exponents().map(|_| params.real(0.0)).collect();
        GridFunction {
            window,
            values,
            params,
        }
    }

    /// Constant extension of `v` on the window.
    pub fn constant(window: GridWindow, params: QParams, v: f64) -> Self {
        let values = window.exponents().map(|_| params.real(v)).collect();
        GridFunction {
            window,
            values,
            params,
        }
    }

    /// Indicator of the single exponent `n`.
    pub fn indicator(window: GridWindow, params: QParams, n: i64) -> Result<Self> {
        if !window.contains(n) {
            return Err(Error::StartOutsideWindow { start: n, window });
        }
        let values = window
            .exponents()
            .map(|m| params.real(if m == n { 1.0 } else { 0.0 }))
            .collect();
        Ok(GridFunction {
            window,
            values,
            params,
        })
    }

    pub fn from_fn(
        window: GridWindow,
        params: QParams,
        mut f: impl FnMut(i64) -> Float,
    ) -> Result<Self> {
        let values: Vec<Float> = window.exponents().map(|n| f(n)).collect();
        Self::new(window, values, params)
    }

    pub fn window(&self) -> GridWindow {
        self.window
    }

    pub fn params(&self) -> &QParams {
        &self.params
    }

    pub fn values(&self) -> &[Float] {
        &self.values
    }

    /// Value at exponent n, if inside the window.
    pub fn value_at(&self, n: i64) -> Option<&Float> {
        self.window.index_of(n).map(|i| &self.values[i])
    }

    pub fn check_same_window(&self, other: &GridFunction) -> Result<()> {
        if self.window != other.window {
            return Err(Error::WindowMismatch {
                left: self.window,
                right: other.window,
            });
        }
        Ok(())
    }

    /// Pointwise linear combination a*self + b*other (windows must coincide).
    pub fn linear_combination(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        self.check_same_window(other)?;
        let prec = self.params.precision_bits();
        let (af, bf) = (self.params.real(a), self.params.real(b));
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(x, y)| {
                let mut acc = Float::with_val(prec, &af * x);
                acc += Float::with_val(prec, &bf * y);
                acc
            })
            .collect();
        GridFunction::new(self.window, values, self.params)
    }

    /// Pointwise difference self - other.
    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.linear_combination(1.0, other, -1.0)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_same_window(other)?;
        let prec = self.params.precision_bits();
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(x, y)| Float::with_val(prec, x * y))
            .collect();
        GridFunction::new(self.window, values, self.params)
    }

    /// Restriction to a sub-window.
    pub fn restrict(&self, to: GridWindow) -> Result<GridFunction> {
        if !self.window.contains(to.n_lo()) || !self.window.contains(to.n_hi()) {
            return Err(Error::WindowMismatch {
                left: self.window,
                right: to,
            });
        }
        let values = to
            .exponents()
            .map(|n| self.value_at(n).expect("contained").clone())
            .collect();
        GridFunction::new(to, values, self.params)
    }

    /// Zero-extension onto an enclosing window.
    pub fn extend(&self, to: GridWindow) -> Result<GridFunction> {
        if !to.contains(self.window.n_lo()) || !to.contains(self.window.n_hi()) {
            return Err(Error::WindowMismatch {
                left: self.window,
                right: to,
            });
        }
        let params = self.params;
        GridFunction::from_fn(to, params, |n| match self.value_at(n) {
            Some(v) => v.clone(),
            None => params.real(0.0),
        })
    }

    /// Max over the window of |f(q^n)|.
    pub fn max_abs(&self) -> Float {
        let mut best = self.params.real(0.0);
        for v in &self.values {
            let a = Float::with_val(self.params.precision_bits(), v.abs_ref());
            if a > best {
                best = a;
            }
        }
        best
    }
}

/// Finite q-shifted factorial (a; base)_n = prod_{k=0}^{n-1} (1 - a * base^k).
///
/// Total for any finite arguments; returns 1 when n = 0.
pub fn qpochhammer_finite(a: f64, base: f64, n: u32, params: &QParams) -> Float {
    let prec = params.precision_bits();
    pochhammer_finite_prec(&Float::with_val(prec, a), &Float::with_val(prec, base), n, prec)
}

pub(crate) fn pochhammer_finite_prec(a: &Float, base: &Float, n: u32, prec: u32) -> Float {
    let mut prod = Float::with_val(prec, 1);
    let mut term = a.clone();
    for _ in 0..n {
        let factor = Float::with_val(prec, 1 - &term);
        prod *= factor;
        term = Float::with_val(prec, &term * base);
    }
    prod
}

/// Infinite q-shifted factorial (a; base)_infty, truncated by tail bound.
///
/// The product stops at the first index K where |a| * base^K is small enough
/// that the dropped tail satisfies |log prod_{k>=K}| <= |a| base^K / (1 - base)
/// below `trunc_tol`, so the relative truncation error is below the tolerance.
pub fn qpochhammer_infinite(a: f64, base: f64, params: &QParams) -> Result<Float> {
    if !(base.abs() < 1.0) {
        return Err(Error::BaseOutOfRange(base));
    }
    let prec = params.precision_bits();
    Ok(pochhammer_inf_prec(
        &Float::with_val(prec, a),
        &Float::with_val(prec, base),
        prec,
        params.trunc_tol(),
    ))
}

pub(crate) fn pochhammer_inf_prec(a: &Float, base: &Float, prec: u32, tol: f64) -> Float {
    let mut prod = Float::with_val(prec, 1);
    if a.is_zero() {
        return prod;
    }
    let abs_base = base.to_f64().abs();
    // tail bound: |sum_{k>=K} log(1 - a b^k)| <= 2 |a b^K| / (1 - |b|)
    // once |a b^K| <= 1/2; require that bound below tol.
    let cutoff = tol * (1.0 - abs_base) / 4.0;
    let mut term = a.clone();
    loop {
        let t = term.to_f64().abs();
        if t < cutoff {
            break;
        }
        let factor = Float::with_val(prec, 1 - &term);
        prod *= factor;
        term = Float::with_val(prec, &term * base);
    }
    prod
}

/// The normalization constant
/// c_{q,nu} = (1/(1-q)) * (q^{2nu+2}; q^2)_infty / (q^2; q^2)_infty.
pub fn c_constant(params: &QParams) -> Float {
    c_constant_prec(params, params.precision_bits())
}

pub(crate) fn c_constant_prec(params: &QParams, prec: u32) -> Float {
    let q = Float::with_val(prec, params.q());
    let base = Float::with_val(prec, &q * &q);
    // q^{2nu+2} with the exponent assembled in Float arithmetic
    let e = Float::with_val(prec, 2.0 * params.nu() + 2.0);
    let a_num = Float::with_val(prec, q.pow(&e));
    let num = pochhammer_inf_prec(&a_num, &base, prec, params.trunc_tol());
    let den = pochhammer_inf_prec(&base, &base, prec, params.trunc_tol());
    let one_minus_q = Float::with_val(prec, 1.0 - params.q());
    let ratio = Float::with_val(prec, &num / &den);
    Float::with_val(prec, &ratio / &one_minus_q)
}

/// The q-Jackson integral of f against the measure t^{2nu+1} d_q t restricted
/// to the window: (1-q) * sum_n q^{n(2nu+2)} f(q^n).
pub fn jackson_integral(f: &GridFunction) -> Float {
    let params = f.params();
    let prec = params.precision_bits();
    let mut acc = Float::with_val(prec, 0);
    for (idx, n) in f.window().exponents().enumerate() {
        let w = params.jackson_weight(n);
        acc += Float::with_val(prec, &w * &f.values()[idx]);
    }
    acc
}

/// Inner product <f, g>_{q,nu} = Jackson integral of f*g.
pub fn inner_product(f: &GridFunction, g: &GridFunction) -> Result<Float> {
    f.check_same_window(g)?;
    Ok(jackson_integral(&f.mul(g)?))
}

/// L^p norm ||f||_{q,p,nu} = [ integral |f|^p x^{2nu+1} d_q x ]^{1/p}, p >= 1.
pub fn norm_p(f: &GridFunction, p: f64) -> Result<Float> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::NormOrderOutOfRange(p));
    }
    let params = f.params();
    let prec = params.precision_bits();
    let p_real = params.real(p);
    let mut acc = Float::with_val(prec, 0);
    for (idx, n) in f.window().exponents().enumerate() {
        let a = Float::with_val(prec, f.values()[idx].abs_ref());
        if a.is_zero() {
            continue;
        }
        let powed = Float::with_val(prec, a.pow(&p_real));
        let w = params.jackson_weight(n);
        acc += Float::with_val(prec, &w * &powed);
    }
    let inv_p = Float::with_val(prec, 1 / &p_real);
    Ok(Float::with_val(prec, acc.pow(&inv_p)))
}

/// ||f||_{q,2,nu} via the inner product (cheaper than `norm_p` at p = 2).
pub fn norm_2(f: &GridFunction) -> Float {
    let ip = inner_product(f, f).expect("same window");
    Float::with_val(f.params().precision_bits(), ip.sqrt_ref())
}
