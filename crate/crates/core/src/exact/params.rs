use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of a subtractive map: deck sizes `a` and `b` and the index of
/// the coordinate that is subtracted from the last `b` coordinates.
///
/// Indices are 1-based as in the usual notation. `subtract == a` gives the
/// map `T_{a,b}`; `subtract < a` gives the variant family (Selmer for
/// `subtract == 1, b == 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct MapParams {
    a: usize,
    b: usize,
    subtract: usize,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    a: usize,
    b: usize,
    variant_index: usize,
}

impl TryFrom<RawParams> for MapParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        MapParams::variant(r.a, r.b, r.variant_index)
    }
}

impl From<MapParams> for RawParams {
    fn from(p: MapParams) -> Self {
        RawParams { a: p.a, b: p.b, variant_index: p.subtract }
    }
}

impl MapParams {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        Self::variant(a, b, a)
    }

    pub fn variant(a: usize, b: usize, subtract: usize) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::Parameter(format!("need a >= 1 and b >= 1, got a={a}, b={b}")));
        }
        if subtract == 0 || subtract > a {
            return Err(Error::Parameter(format!(
                "variant index must satisfy 1 <= i <= a, got i={subtract}, a={a}"
            )));
        }
        Ok(MapParams { a, b, subtract })
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    /// 1-based index of the subtracted coordinate.
    pub fn variant_index(&self) -> usize {
        self.subtract
    }

    pub fn is_variant(&self) -> bool {
        self.subtract != self.a
    }

    pub fn dim(&self) -> usize {
        self.a + self.b
    }

    /// The same deck sizes with the standard subtraction index.
    pub fn standard(&self) -> MapParams {
        MapParams { a: self.a, b: self.b, subtract: self.a }
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::Parameter(format!(
                "point has {n} coordinates but a+b = {}",
                self.dim()
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for MapParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_variant() {
            write!(f, "(a={}, b={}, i={})", self.a, self.b, self.subtract)
        } else {
            write!(f, "(a={}, b={})", self.a, self.b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(MapParams::new(0, 1).is_err());
        assert!(MapParams::new(1, 0).is_err());
        assert!(MapParams::variant(2, 1, 0).is_err());
        assert!(MapParams::variant(2, 1, 3).is_err());
        let p = MapParams::variant(2, 1, 1).unwrap();
        assert!(p.is_variant());
        assert_eq!(p.dim(), 3);
        assert!(!MapParams::new(2, 1).unwrap().is_variant());
    }

    #[test]
    fn variant_below_a_needs_a_at_least_two() {
        // i < a with a = 1 is impossible since i >= 1.
        assert!(MapParams::variant(1, 3, 1).map(|p| !p.is_variant()).unwrap());
    }
}
