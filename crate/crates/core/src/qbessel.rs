//! Evaluation of the normalized Hahn-Exton q-Bessel function j_nu(x, q^2),
//! its decay bound, the discrete delta, and a certified grid cache.
//!
//! The series
//!
//! ```text
//! j_nu(x, q^2) = sum_{n>=0} (-1)^n q^{n(n+1)} x^{2n} / ((q^{2nu+2}; q^2)_n (q^2; q^2)_n)
//! ```
//!
//! is summed directly. For arguments x = q^{-m} with m > 0 the partial sums
//! cancel down from a peak term of order q^{-m^2} to a result of order
//! q^{+m^2}, so the working precision is escalated by roughly
//! 2 m^2 log2(1/q) bits before summing and the result is rounded back.
//! Truncation stops only once the term magnitude falls below
//! trunc_tol x (result scale), where the scale comes from the decay estimate,
//! so the absolute truncation error is tolerance-small relative to the value
//! the estimate predicts.

use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::qcore::{pochhammer_inf_prec, GridWindow, QParams};

/// j_nu(x, q^2) for real x > 0 at the working precision of `params`.
///
/// Errors if the required precision escalation exceeds the configured cap
/// (an infeasibly large argument for the configuration).
pub fn jnu_series(x: f64, params: &QParams) -> Result<Float> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::NonPositiveArgument(x));
    }
    let prec = params.precision_bits();
    jnu_series_prec(&Float::with_val(prec, x), params).map(|(v, _)| v)
}

/// j_nu(q^m, q^2) for a grid exponent m (m may be negative).
pub fn jnu_at_exponent(m: i64, params: &QParams) -> Result<Float> {
    // build q^m at enough precision that the argument itself is not the
    // accuracy bottleneck for very negative m
    let (extra, _) = escalation_for_exponent(m, params);
    let arg_prec = params.precision_bits().saturating_add(extra.min(1 << 20) as u32);
    let q = Float::with_val(arg_prec, params.q());
    let x = Float::with_val(arg_prec, q.pow(m as i32));
    jnu_series_prec(&x, params).map(|(v, _)| v)
}

/// Extra bits demanded by the cancellation at argument q^{-m}: about
/// (2 m^2 + (2|nu|+2) m) log2(1/q), zero for arguments <= 1.
fn escalation_bits(m_neg: i64, params: &QParams) -> u64 {
    if m_neg <= 0 {
        return 0;
    }
    let m = m_neg as f64;
    let log2_inv_q = -(params.q().log2());
    let bits = (2.0 * m * m + (2.0 * params.nu().abs() + 2.0) * m) * log2_inv_q;
    bits.ceil() as u64
}

fn escalation_for_exponent(m: i64, params: &QParams) -> (u64, i64) {
    let m_neg = if m < 0 { -m } else { 0 };
    (escalation_bits(m_neg, params), m_neg)
}

/// Core summation. Returns the value rounded to the working precision along
/// with the escalated precision actually used.
pub(crate) fn jnu_series_prec(x: &Float, params: &QParams) -> Result<(Float, u32)> {
    let base_prec = params.precision_bits();

    // m = ceil(log_{1/q} x) for x > 1; the escalation driver.
    let log2_x = Float::with_val(64, x.log2_ref()).to_f64();
    let log2_inv_q = -(params.q().log2());
    let m_neg = if log2_x > 0.0 {
        (log2_x / log2_inv_q).ceil() as i64
    } else {
        0
    };

    let extra = escalation_bits(m_neg, params);
    let required = base_prec as u64 + extra + 32;
    let cap = params.escalation_cap_bits() as u64;
    if required > cap {
        return Err(Error::PrecisionCapExceeded {
            required,
            cap: params.escalation_cap_bits(),
        });
    }
    let wp = required as u32;

    let q = Float::with_val(wp, params.q());
    let qq = Float::with_val(wp, &q * &q);
    let two_nu_plus_2 = Float::with_val(wp, 2.0 * params.nu() + 2.0);
    let a = Float::with_val(wp, (&q).pow(&two_nu_plus_2)); // q^{2nu+2}
    let x_sq = Float::with_val(wp, x * x);

    // Stop once |term| < trunc_tol * scale, where scale = q^{m^2 + (2nu+1) m}
    // is the magnitude the decay estimate predicts for the result (x > 1),
    // and 1 for x <= 1. Stopping against the running maximum term would leave
    // a truncation error large relative to the cancelled result.
    let scale_exponent = if m_neg > 0 {
        let mf = Float::with_val(wp, m_neg);
        let e = Float::with_val(wp, &mf * &mf)
            + Float::with_val(wp, Float::with_val(wp, 2.0 * params.nu() + 1.0) * &mf);
        Float::with_val(wp, e)
    } else {
        Float::with_val(wp, 0)
    };
    let scale = Float::with_val(wp, (&q).pow(&scale_exponent));
    let tol = Float::with_val(wp, params.trunc_tol());
    let threshold = Float::with_val(wp, &tol * &scale);

    let mut sum = Float::with_val(wp, 1);
    let mut term = Float::with_val(wp, 1);
    // running factors for the term ratio
    // ratio_n = - q^{2(n+1)} x^2 / ((1 - q^{2nu+2n+2})(1 - q^{2n+2}))
    let mut a_pow = a.clone(); //  q^{2nu+2} * q^{2n}
    let mut b_pow = qq.clone(); //  q^{2n+2}
    let mut n: u32 = 0;
    loop {
        let denom = Float::with_val(wp, 1 - &a_pow) * Float::with_val(wp, 1 - &b_pow);
        let ratio = -Float::with_val(wp, &b_pow * &x_sq) / denom;
        term *= &ratio;
        sum += &term;
        n += 1;
        let past_peak = Float::with_val(32, ratio.abs_ref()).to_f64() < 1.0;
        let small = Float::with_val(wp, term.abs_ref()) < threshold;
        if past_peak && small {
            break;
        }
        if n > 1_000_000 {
            // not reachable for valid params
            return Err(Error::PrecisionCapExceeded {
                required,
                cap: params.escalation_cap_bits(),
            });
        }
        a_pow *= &qq;
        b_pow *= &qq;
    }

    Ok((Float::with_val(base_prec, sum), wp))
}

/// The constant prefactor of the decay estimate:
/// (-q^2; q^2)_inf (-q^{2nu+2}; q^2)_inf / (q^{2nu+2}; q^2)_inf.
pub fn decay_prefactor(params: &QParams) -> Float {
    let prec = params.precision_bits();
    let q = Float::with_val(prec, params.q());
    let qq = Float::with_val(prec, &q * &q);
    let e = Float::with_val(prec, 2.0 * params.nu() + 2.0);
    let a = Float::with_val(prec, (&q).pow(&e));
    let tol = params.trunc_tol();

    let num1 = pochhammer_inf_prec(&Float::with_val(prec, -&qq), &qq, prec, tol);
    let num2 = pochhammer_inf_prec(&Float::with_val(prec, -&a), &qq, prec, tol);
    let den = pochhammer_inf_prec(&a, &qq, prec, tol);
    Float::with_val(prec, &num1 * &num2) / den
}

/// The right-hand side of the decay estimate for |j_nu(q^n, q^2)|:
/// the prefactor above, times q^{n^2 - (2nu+1) n} when n < 0.
pub fn decay_bound(n: i64, params: &QParams) -> Float {
    let prec = params.precision_bits();
    let q = Float::with_val(prec, params.q());
    let mut bound = decay_prefactor(params);

    if n < 0 {
        // q^{n^2 - (2nu+1) n}, exponent assembled exactly in Float
        let nf = Float::with_val(prec, n);
        let expo = Float::with_val(prec, &nf * &nf)
            - Float::with_val(prec, Float::with_val(prec, 2.0 * params.nu() + 1.0) * &nf);
        bound *= Float::with_val(prec, (&q).pow(&expo));
    }
    bound
}

/// The discrete delta on the grid, indexed by exponents:
/// delta_q(q^i, q^j) = 0 for i != j and 1 / ((1-q) q^{2(nu+1)i}) for i = j.
pub fn delta_q(i: i64, j: i64, params: &QParams) -> Float {
    let prec = params.precision_bits();
    if i != j {
        return Float::with_val(prec, 0);
    }
    let w = params.q_pow_f(&params.weight_exponent(i)); // q^{2(nu+1)i}
    let denom = Float::with_val(prec, Float::with_val(prec, 1.0 - params.q()) * &w);
    Float::with_val(prec, 1 / denom)
}

/// Memoized j_nu(q^m, q^2) values over a window of exponents, each certified
/// against the decay estimate at construction.
#[derive(Clone, Debug)]
pub struct BesselGridCache {
    params: QParams,
    window: GridWindow,
    values: Vec<Float>,
    cert_bits: u32,
    max_escalated_bits: u32,
}

impl BesselGridCache {
    /// Evaluate j_nu(q^m, q^2) for every m in `window`.
    pub fn build(window: GridWindow, params: &QParams) -> Result<Self> {
        use rayon::prelude::*;

        let exps: Vec<i64> = window.exponents().collect();
        let computed: Vec<Result<(Float, u32)>> = exps
            .par_iter()
            .map(|&m| {
                let (extra, _) = escalation_for_exponent(m, params);
                let arg_prec =
                    params.precision_bits().saturating_add(extra.min(1 << 20) as u32) + 32;
                let q = Float::with_val(arg_prec, params.q());
                let x = Float::with_val(arg_prec, q.pow(m as i32));
                jnu_series_prec(&x, params)
            })
            .collect();

        let mut values = Vec::with_capacity(exps.len());
        let mut max_escalated = params.precision_bits();
        for item in computed {
            let (v, used) = item?;
            values.push(v);
            max_escalated = max_escalated.max(used);
        }

        let cache = BesselGridCache {
            params: *params,
            window,
            values,
            cert_bits: params.precision_bits(),
            max_escalated_bits: max_escalated,
        };
        cache.assert_decay_bound();
        Ok(cache)
    }

    /// Every cached value must sit within the decay estimate up to a factor
    /// 1 + 1e-6; a violation indicates an evaluation bug.
    fn assert_decay_bound(&self) {
        for (idx, m) in self.window.exponents().enumerate() {
            let bound = decay_bound(m, &self.params);
            let slack = Float::with_val(self.cert_bits, &bound * 1e-6f64);
            let limit = Float::with_val(self.cert_bits, &bound + &slack);
            let a = Float::with_val(self.cert_bits, self.values[idx].abs_ref());
            assert!(
                a <= limit,
                "cached j_nu(q^{m}) = {} exceeds decay bound {}",
                self.values[idx],
                bound
            );
        }
    }

    pub fn window(&self) -> GridWindow {
        self.window
    }

    pub fn params(&self) -> &QParams {
        &self.params
    }

    /// Precision at which the cached values are certified.
    pub fn cert_bits(&self) -> u32 {
        self.cert_bits
    }

    /// Largest escalated precision used during construction.
    pub fn max_escalated_bits(&self) -> u32 {
        self.max_escalated_bits
    }

    /// Cached value at exponent m.
    pub fn value(&self, m: i64) -> Result<&Float> {
        self.window
            .index_of(m)
            .map(|i| &self.values[i])
            .ok_or(Error::CacheUnderCoverage {
                needed: m,
                window: self.window,
            })
    }

    pub fn values(&self) -> &[Float] {
        &self.values
    }
}

/// Truncated-window defect of the orthogonality relation:
/// | c^2 * (1-q) sum_{k in window} q^{k(2nu+2)} j(q^{i+k}) j(q^{j+k}) - delta_q(i, j) |.
///
/// Requires the cache to cover i + k and j + k for every k in `window`.
pub fn orthogonality_defect(
    i: i64,
    j: i64,
    window: GridWindow,
    cache: &BesselGridCache,
) -> Result<Float> {
    let params = cache.params();
    let prec = params.precision_bits();
    let c = crate::qcore::c_constant(params);
    let c_sq = Float::with_val(prec, &c * &c);

    let mut acc = Float::with_val(prec, 0);
    for k in window.exponents() {
        let w = params.jackson_weight(k);
        let term = Float::with_val(prec, cache.value(i + k)? * cache.value(j + k)?);
        acc += Float::with_val(prec, &w * &term);
    }
    let lhs = Float::with_val(prec, &c_sq * &acc);
    let diff = Float::with_val(prec, &lhs - &delta_q(i, j, params));
    Ok(Float::with_val(prec, diff.abs_ref()))
}
