//! Exact rationals for weights, scores, supports and thresholds.
//!
//! Decimal inputs are converted through their shortest decimal rendering, so
//! `0.1` becomes exactly 1/10 and threshold comparisons behave the way the
//! numbers read.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub type Fraction = BigRational;

pub fn ratio(numerator: usize, denominator: usize) -> Fraction {
    Fraction::new(BigInt::from(numerator), BigInt::from(denominator))
}

pub fn zero() -> Fraction {
    Fraction::zero()
}

pub fn one() -> Fraction {
    Fraction::one()
}

/// Exact value of the decimal literal `x` prints as; `None` for NaN/infinity.
pub fn from_decimal(x: f64) -> Option<Fraction> {
    if !x.is_finite() {
        return None;
    }
    // f64's Display is the shortest round-trip form and never uses exponents.
    let text = x.to_string();
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.as_str()),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    let numerator: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let denominator = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = Fraction::new(numerator, denominator);
    Some(if negative { -value } else { value })
}

pub fn to_f64(x: &Fraction) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
