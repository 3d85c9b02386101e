//! Exact-rational reference oracle.
//!
//! Every finite partial product / partial sum here is computed in exact
//! rational arithmetic over the *exact dyadic value* of the `f64` inputs, so
//! the oracle and the implementation address the same mathematical quantity.
//! Truncation points carry rigorous tail bounds, returned alongside the
//! value. Nothing in this module calls into the library's evaluation paths.

// shared by several test targets, not all of which use every function
#![allow(dead_code)]

use rug::ops::Pow;
use rug::{Float, Rational};

/// The exact dyadic rational equal to an `f64`.
pub fn dyadic(x: f64) -> Rational {
    Rational::from_f64(x).expect("finite f64")
}

/// log10(|r|), approximated from the bit lengths (good to ~1e-2, which is
/// plenty for truncation decisions made with 5-digit margins).
fn log10_abs(r: &Rational) -> f64 {
    if r.cmp0() == std::cmp::Ordering::Equal {
        return f64::NEG_INFINITY;
    }
    let num_bits = r.numer().significant_bits() as f64;
    let den_bits = r.denom().significant_bits() as f64;
    (num_bits - den_bits) * std::f64::consts::LOG10_2
}

/// Exact (a; base)_n.
pub fn pochhammer_finite(a: &Rational, base: &Rational, n: u32) -> Rational {
    let mut prod = Rational::from(1);
    let mut term = a.clone();
    for _ in 0..n {
        prod *= Rational::from(1 - &term);
        term *= base;
    }
    prod
}

/// (a; base)_infty as a partial product P_K with a rigorous relative tail
/// bound: for |a| base^K <= 1/2,
/// |log(prod_{k>=K}(1 - a base^k))| <= 2 |a| base^K / (1 - base),
/// so |(a;base)_inf / P_K - 1| <= 4 |a| base^K / (1 - base).
///
/// K is chosen so that bound is below 10^-(digits + 5).
pub fn pochhammer_infinite(a: &Rational, base: &Rational, digits: u32) -> (Rational, f64) {
    assert!(base.clone().abs() < 1u32);
    if a.cmp0() == std::cmp::Ordering::Equal {
        return (Rational::from(1), 0.0);
    }
    let b = base.to_f64();
    assert!(b > 0.0 && b < 1.0);
    let target = -(digits as f64) - 5.0;
    let lg_b = b.log10();
    let lg_head = (4.0 * a.to_f64().abs() / (1.0 - b)).log10();
    let mut k = ((target - lg_head) / lg_b).ceil().max(1.0) as u32;
    // ensure the |a| base^K <= 1/2 premise
    while a.to_f64().abs() * b.powi(k as i32) > 0.5 {
        k += 1;
    }
    let prod = pochhammer_finite(a, base, k);
    let rel_bound = 10f64.powf(lg_head + (k as f64) * lg_b);
    (prod, rel_bound)
}

/// Exact partial sum of the normalized q-Bessel series
/// j_nu(x, q^2) = sum_n (-1)^n q^{n(n+1)} x^{2n} / ((q^{2nu+2}; q^2)_n (q^2; q^2)_n)
/// for integer 2nu+2, with a rigorous absolute tail bound (2 |t_{N+1}| once
/// the term ratio stays below 1/2).
///
/// Returns (partial sum, log10 of the absolute tail bound).
pub fn jnu(x: &Rational, q: &Rational, two_nu_plus_two: u32, digits: u32) -> (Rational, f64) {
    let qq = Rational::from(q * q);
    let a = Rational::from(q.pow(two_nu_plus_two)); // q^{2nu+2}
    let x_sq = Rational::from(x * x);

    let mut sum = Rational::from(1);
    let mut term = Rational::from(1);
    let mut a_pow = a.clone(); // q^{2nu+2} q^{2n}
    let mut b_pow = qq.clone(); // q^{2n+2}
    let mut peak_log = 0.0f64;

    loop {
        // ratio_n = -q^{2(n+1)} x^2 / ((1 - q^{2nu+2n+2})(1 - q^{2n+2}))
        let denom = Rational::from(1 - &a_pow) * Rational::from(1 - &b_pow);
        let ratio = -Rational::from(&b_pow * &x_sq) / denom;
        let ratio_small = ratio.clone().abs() <= Rational::from((1, 2));
        term *= &ratio;
        sum += &term;
        let t_log = log10_abs(&term);
        peak_log = peak_log.max(t_log);
        if ratio_small && t_log < peak_log - (digits as f64) - 5.0 && t_log < -(digits as f64) - 5.0
        {
            // tail <= 2 |t_{N+1}| <= 2 |t_N| / 2 = |t_N|
            return (sum, t_log);
        }
        a_pow *= &qq;
        b_pow *= &qq;
    }
}

/// c_{q,nu} = (1/(1-q)) (q^{2nu+2}; q^2)_inf / (q^2; q^2)_inf for integer
/// 2nu+2. Returns (rational approximation, relative error bound).
pub fn c_constant(q: &Rational, two_nu_plus_two: u32, digits: u32) -> (Rational, f64) {
    let qq = Rational::from(q * q);
    let a = Rational::from(q.pow(two_nu_plus_two));
    let (num, num_bound) = pochhammer_infinite(&a, &qq, digits);
    let (den, den_bound) = pochhammer_infinite(&qq, &qq, digits);
    let one_minus_q = Rational::from(1 - q);
    let value = num / den / one_minus_q;
    (value, num_bound + den_bound)
}

/// Relative deviation |value/oracle - 1| computed in high-precision floating
/// point (the rational oracle is embedded exactly).
pub fn relative_deviation(value: &Float, oracle: &Rational) -> f64 {
    let prec = value.prec() + 64;
    let oracle_f = Float::with_val(prec, oracle);
    if oracle_f.is_zero() {
        return value.clone().abs().to_f64();
    }
    let diff = Float::with_val(prec, value - &oracle_f);
    (diff.abs() / oracle_f.abs()).to_f64()
}

/// Agreement in significant decimal digits: -log10 of the relative deviation.
pub fn agreement_digits(value: &Float, oracle: &Rational) -> f64 {
    let dev = relative_deviation(value, oracle);
    if dev == 0.0 {
        f64::INFINITY
    } else {
        -dev.log10()
    }
}
