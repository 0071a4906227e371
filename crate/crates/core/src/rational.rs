//! Helpers around arbitrary-precision rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::expr;

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `base^exp` for any integer exponent.
pub fn pow(base: u64, exp: i64) -> Rational {
    let b = BigInt::from(base).pow(exp.unsigned_abs() as u32);
    if exp >= 0 {
        Rational::from_integer(b)
    } else {
        Rational::new(BigInt::one(), b)
    }
}

/// Canonical rendering: lowest terms, positive denominator, always `num/den`.
pub fn render(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `num/den`, a plain integer, or an arithmetic expression such as `1/10^12`.
pub fn parse(s: &str) -> Result<Rational> {
    expr::evaluate(s, None)
}

pub fn parse_tolerance(s: &str) -> Result<Rational> {
    let tol = parse(s)?;
    if !tol.is_positive() {
        return Err(Error::NonPositiveTolerance);
    }
    Ok(tol)
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        if r.is_zero() {
            0.0
        } else if r.is_positive() {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    })
}
