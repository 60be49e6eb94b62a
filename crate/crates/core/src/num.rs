//! Exact rational helpers.

use num_bigint::BigInt;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

/// `num / den` as an exact rational. Panics if `den == 0`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Exact value of a finite `f64`.
pub fn exact(value: f64) -> Option<Rational> {
    Rational::from_f64(value)
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// `2^-exp`.
pub fn dyadic(numerator: u64, exp: u32) -> Rational {
    Rational::new(BigInt::from(numerator), BigInt::one() << exp as usize)
}

pub fn max_of<'a, I: IntoIterator<Item = &'a Rational>>(values: I) -> Option<Rational> {
    values.into_iter().max().cloned()
}

pub fn abs(value: &Rational) -> Rational {
    value.abs()
}

pub fn is_zero(value: &Rational) -> bool {
    value.is_zero()
}

/// Sum of `weights[i] * values[i]`.
pub fn dot(weights: &[Rational], values: &[Rational]) -> Rational {
    weights
        .iter()
        .zip(values)
        .fold(Rational::zero(), |acc, (w, v)| acc + w * v)
}
