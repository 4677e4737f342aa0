//! Number regimes: exact rationals for ray complexes, `f64` for the annulus.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, BigRational, FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Exact rational used by ray complexes.
pub type Q = BigRational;

pub trait Scalar:
    Clone
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// True for exact arithmetic.
    const EXACT: bool;

    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    /// Nearest representable value. Exact for rationals (binary expansion of the float).
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn half(&self) -> Self;
    fn abs_val(&self) -> Self;
    /// Tolerance the engine guarantees for metric identities.
    fn engine_eps() -> f64;

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn half(&self) -> Self {
        self * 0.5
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
    fn engine_eps() -> f64 {
        1e-9
    }
}

impl Scalar for Q {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn from_i64(v: i64) -> Self {
        Q::from_integer(BigInt::from(v))
    }
    fn from_f64(v: f64) -> Self {
        <Q as FromPrimitive>::from_f64(v).unwrap_or_else(Zero::zero)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn half(&self) -> Self {
        self / Q::from_integer(BigInt::from(2))
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
    fn engine_eps() -> f64 {
        0.0
    }
}

pub fn q(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// `2^k` as an exact rational.
pub fn q_pow2(k: u32) -> Q {
    Q::from_integer(BigInt::one() << k as usize)
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Q::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(Q::from_integer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_q("3"), Some(q(3)));
        assert_eq!(parse_q("-6/4"), Some(q_frac(-3, 2)));
        assert_eq!(parse_q("1/0"), None);
        assert_eq!(parse_q("x"), None);
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(q(8).to_string(), "8");
        assert_eq!(q_frac(2, 4).to_string(), "1/2");
        assert_eq!(q_pow2(62).to_string(), "4611686018427387904");
    }
}
