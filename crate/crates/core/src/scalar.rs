//! Exact scalar types the maps can run on.
//!
//! Every map in this crate is homogeneous of degree one and only ever
//! subtracts and compares coordinates, so a point with a common denominator
//! can be iterated on its integer numerators without changing any orbit,
//! region membership or permutation. `i128` is the fast lane for sampled
//! dyadic points, `BigInt` covers products with large matrices and
//! `BigRational` is the general exact type.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number used throughout the public API.
pub type Q = BigRational;

pub trait Scalar: Clone + Ord + Debug + Num + Signed + Send + Sync + 'static {
    fn from_i64(v: i64) -> Self;

    /// `None` when the value does not fit.
    fn from_bigint(v: &BigInt) -> Option<Self>;

    fn to_rational(&self) -> Q;

    fn to_f64(&self) -> f64;

    /// Smallest value `t` of this type such that `x < t` iff `x < r` for
    /// every `x` of this type.
    fn strict_bound(r: &Q) -> Option<Self>;

    fn mul_small(&self, k: usize) -> Self {
        self.clone() * Self::from_i64(k as i64)
    }
}

impl Scalar for i128 {
    fn from_i64(v: i64) -> Self {
        v as i128
    }

    fn from_bigint(v: &BigInt) -> Option<Self> {
        v.to_i128()
    }

    fn to_rational(&self) -> Q {
        Q::from_integer(BigInt::from(*self))
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn strict_bound(r: &Q) -> Option<Self> {
        r.ceil().to_integer().to_i128()
    }

    fn mul_small(&self, k: usize) -> Self {
        self * k as i128
    }
}

impl Scalar for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }

    fn from_bigint(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }

    fn to_rational(&self) -> Q {
        Q::from_integer(self.clone())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn strict_bound(r: &Q) -> Option<Self> {
        Some(r.ceil().to_integer())
    }
}

impl Scalar for Q {
    fn from_i64(v: i64) -> Self {
        Q::from_integer(BigInt::from(v))
    }

    fn from_bigint(v: &BigInt) -> Option<Self> {
        Some(Q::from_integer(v.clone()))
    }

    fn to_rational(&self) -> Q {
        self.clone()
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn strict_bound(r: &Q) -> Option<Self> {
        Some(r.clone())
    }
}

/// Float approximation that survives numerators and denominators far
/// outside the `f64` range.
pub fn rational_to_f64(r: &Q) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() {
            return v;
        }
    }
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits() as i64 - d.bits() as i64;
    // Bring both into a range where the quotient is representable.
    let (nn, dd) = if shift > 0 {
        (n.clone(), d << (shift as u64))
    } else {
        (n << ((-shift) as u64), d.clone())
    };
    let top = 64u64;
    let scale_n = nn.bits().saturating_sub(top);
    let scale_d = dd.bits().saturating_sub(top);
    let fn_ = ToPrimitive::to_f64(&(nn >> scale_n)).unwrap_or(f64::NAN);
    let fd = ToPrimitive::to_f64(&(dd >> scale_d)).unwrap_or(f64::NAN);
    fn_ / fd * 2f64.powi((shift + scale_n as i64 - scale_d as i64) as i32)
}

/// Parses `"p"`, `"p/q"` or a finite decimal such as `"0.25"` exactly.
pub fn parse_rational(s: &str) -> Result<Q> {
    let t = s.trim();
    let err = || Error::Parse(s.to_string());
    if t.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Q::new(p, q));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let negative = int.starts_with('-');
        let int_part: BigInt = match int.trim_start_matches(['-', '+']) {
            "" => BigInt::zero(),
            digits => digits.parse().map_err(|_| err())?,
        };
        let frac_part: BigInt = frac.parse().map_err(|_| err())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let mag = Q::new(int_part * &den + frac_part, den);
        return Ok(if negative { -mag } else { mag });
    }
    let p: BigInt = t.parse().map_err(|_| err())?;
    Ok(Q::from_integer(p))
}

/// Canonical exact rendering: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &Q) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering with `digits` significant digits.
pub fn format_decimal(r: &Q, digits: usize) -> String {
    let v = rational_to_f64(r);
    if v == 0.0 {
        return "0".to_string();
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), v);
    // `1.50000e-3` -> plain float parse and re-render without trailing zeros.
    let parsed: f64 = s.parse().unwrap_or(v);
    let mut out = format!("{parsed}");
    if out.contains('e') {
        return out;
    }
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    out
}

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Greatest common divisor of a slice of integers (zero for an empty or
/// all-zero slice).
pub fn gcd_all<T: Scalar + Integer>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |g, x| g.gcd(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("5/2").unwrap(), q(5, 2));
        assert_eq!(parse_rational(" 3 ").unwrap(), qi(3));
        assert_eq!(parse_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), q(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn formats_exact_and_decimal() {
        assert_eq!(format_rational(&q(6, 4)), "3/2");
        assert_eq!(format_rational(&qi(7)), "7");
        assert_eq!(format_decimal(&q(1, 3), 12), "0.333333333333");
        assert_eq!(format_decimal(&q(1, 4), 12), "0.25");
        assert_eq!(format_decimal(&qi(0), 12), "0");
    }

    #[test]
    fn huge_rationals_convert_to_float() {
        let big = BigInt::from(3) << 2000u32;
        let r = Q::new(big.clone(), big * 4);
        assert_eq!(rational_to_f64(&r), 0.25);
    }

    #[test]
    fn strict_bound_matches_rational_comparison() {
        let r = q(7, 2);
        let t = <i128 as Scalar>::strict_bound(&r).unwrap();
        for x in -5i128..10 {
            assert_eq!(x < t, x.to_rational() < r);
        }
        let r = qi(4);
        let t = <i128 as Scalar>::strict_bound(&r).unwrap();
        assert!(3 < t && !(4 < t));
    }
}
