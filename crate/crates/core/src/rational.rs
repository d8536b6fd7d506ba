//! Exact rationals and the integer rounding used by size formulas.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: u128) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `NUM/DEN` or an integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::InvalidArgument(format!("expected NUM/DEN, got {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn ceil_u128(r: &Rational) -> Result<u128> {
    if r.is_negative() {
        return Err(Error::OutOfRange(format!("negative value {}", format_rational(r))));
    }
    let (q, rem) = r.numer().div_rem(r.denom());
    let c = if rem.is_zero() { q } else { q + 1 };
    c.to_u128().ok_or_else(|| Error::Overflow("value exceeds 128 bits".into()))
}

pub fn floor_u128(r: &Rational) -> Result<u128> {
    if r.is_negative() {
        return Err(Error::OutOfRange(format!("negative value {}", format_rational(r))));
    }
    r.to_integer().to_u128().ok_or_else(|| Error::Overflow("value exceeds 128 bits".into()))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `1 - r`.
pub fn complement(r: &Rational) -> Rational {
    Rational::one() - r
}

pub fn pow(r: &Rational, e: u32) -> Rational {
    num_traits::pow(r.clone(), e as usize)
}

/// Checks `0 <= eps < 1`.
pub fn check_epsilon(eps: &Rational) -> Result<()> {
    if eps.is_negative() || *eps >= Rational::one() {
        return Err(Error::InvalidEpsilon(format!("{} is outside [0, 1)", format_rational(eps))));
    }
    Ok(())
}
