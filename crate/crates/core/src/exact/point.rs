use num_traits::Signed;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, Scalar, Q};

/// A point of the cone `0 <= x_1 <= ... <= x_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrderedPoint<T = Q> {
    coords: Vec<T>,
}

/// A point of the nonnegative orthant with no ordering constraint.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FreePoint<T = Q> {
    coords: Vec<T>,
}

impl<T: Scalar> OrderedPoint<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain("empty point".into()));
        }
        if coords[0].is_negative() {
            return Err(Error::Domain(format!("negative coordinate {:?}", coords[0])));
        }
        if let Some(w) = coords.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::Domain(format!(
                "coordinates not nondecreasing at position {}",
                w + 1
            )));
        }
        Ok(OrderedPoint { coords })
    }

    pub(crate) fn new_unchecked(coords: Vec<T>) -> Self {
        debug_assert!(coords.windows(2).all(|w| w[0] <= w[1]));
        OrderedPoint { coords }
    }

    /// Sorts arbitrary nonnegative coordinates into a point of the cone.
    pub fn from_unsorted(mut coords: Vec<T>) -> Result<Self> {
        coords.sort();
        Self::new(coords)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn sum(&self) -> T {
        sum(&self.coords)
    }

    /// Largest coordinate.
    pub fn last(&self) -> &T {
        self.coords.last().expect("points are nonempty")
    }

    pub fn to_rational(&self) -> OrderedPoint<Q> {
        OrderedPoint { coords: self.coords.iter().map(Scalar::to_rational).collect() }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(Scalar::to_f64).collect()
    }
}

impl OrderedPoint<Q> {
    pub fn from_ints(xs: &[i64]) -> Result<Self> {
        Self::new(xs.iter().map(|&v| <Q as Scalar>::from_i64(v)).collect())
    }

    /// Parses a comma-separated list of exact numbers (`1/3,2,0.5`).
    pub fn parse(s: &str) -> Result<Self> {
        let coords = s.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
        Self::new(coords)
    }

    /// Divides every coordinate by `scale` (which must be positive).
    pub fn scaled_down(&self, scale: &Q) -> Result<Self> {
        if !scale.is_positive() {
            return Err(Error::Degenerate("nonpositive scale".into()));
        }
        Ok(OrderedPoint { coords: self.coords.iter().map(|c| c / scale).collect() })
    }
}

impl<T: Scalar> FreePoint<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain("empty point".into()));
        }
        if let Some(c) = coords.iter().find(|c| c.is_negative()) {
            return Err(Error::Domain(format!("negative coordinate {c:?}")));
        }
        Ok(FreePoint { coords })
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn sum(&self) -> T {
        sum(&self.coords)
    }

    pub fn sorted(&self) -> OrderedPoint<T> {
        let mut c = self.coords.clone();
        c.sort();
        OrderedPoint::new_unchecked(c)
    }
}

impl FreePoint<Q> {
    pub fn from_ints(xs: &[i64]) -> Result<Self> {
        Self::new(xs.iter().map(|&v| <Q as Scalar>::from_i64(v)).collect())
    }
}

pub(crate) fn sum<T: Scalar>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |acc, x| acc + x.clone())
}

fn serialize_coords<T: Scalar, S: Serializer>(coords: &[T], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(coords.iter().map(|c| format_rational(&c.to_rational())))
}

impl<T: Scalar> Serialize for OrderedPoint<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_coords(&self.coords, s)
    }
}

impl<T: Scalar> Serialize for FreePoint<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_coords(&self.coords, s)
    }
}

impl<'de> Deserialize<'de> for OrderedPoint<Q> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        let coords = raw
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        OrderedPoint::new(coords).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    #[test]
    fn validates_order_and_sign() {
        assert!(OrderedPoint::from_ints(&[0, 1, 1, 4]).is_ok());
        assert!(OrderedPoint::from_ints(&[2, 1]).is_err());
        assert!(OrderedPoint::from_ints(&[-1, 1]).is_err());
        assert!(OrderedPoint::<Q>::new(vec![]).is_err());
        assert!(FreePoint::from_ints(&[3, 1, 2]).is_ok());
        assert!(FreePoint::from_ints(&[3, -1, 2]).is_err());
    }

    #[test]
    fn parses_mixed_notation() {
        let p = OrderedPoint::parse("1/4, 0.5,1").unwrap();
        assert_eq!(p.coords(), &[q(1, 4), q(1, 2), q(1, 1)]);
        assert!(OrderedPoint::parse("1,x").is_err());
    }
}
