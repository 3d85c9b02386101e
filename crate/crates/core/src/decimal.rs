//! Decimal serialization of working-precision values.
//!
//! Artifacts carry numbers as decimal strings to the certified digit count,
//! never as binary float payloads, so results can be re-read and compared
//! across languages.

use rug::Float;

/// Decimal digits certified by a computation carried out at `prec_bits`:
/// floor((prec - 8) * log10(2)), reserving 8 bits for accumulated rounding.
pub fn certified_digits(prec_bits: u32) -> usize {
    let usable = prec_bits.saturating_sub(8) as f64;
    (usable * std::f64::consts::LOG10_2).floor() as usize
}

/// Scientific-notation decimal string at the value's certified digit count.
pub fn format_real(v: &Float) -> String {
    if v.is_zero() {
        return "0".to_string();
    }
    let digits = certified_digits(v.prec()).max(1);
    format!("{:.*e}", digits - 1, v)
}

/// Scientific-notation decimal string with an explicit digit count.
pub fn format_real_digits(v: &Float, digits: usize) -> String {
    if v.is_zero() {
        return "0".to_string();
    }
    format!("{:.*e}", digits.max(1) - 1, v)
}
