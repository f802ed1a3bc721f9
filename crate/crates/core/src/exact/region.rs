use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::maps::step;
use crate::exact::{MapParams, OrderedPoint};
use crate::scalar::Scalar;

/// Exact membership flags. `in_d` is `None` when `b = 1`, where the set is
/// not defined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RegionFlags {
    pub in_a: bool,
    pub in_d: Option<bool>,
    pub in_theta: bool,
    pub in_gamma: bool,
}

/// `sigma(x) <= b x_{a+b}`.
pub fn in_a<T: Scalar>(x: &OrderedPoint<T>, p: MapParams) -> Result<bool> {
    p.check_dim(x.dim())?;
    Ok(in_a_raw(x.coords(), p.b()))
}

pub(crate) fn in_a_raw<T: Scalar>(c: &[T], b: usize) -> bool {
    let sigma = c.iter().fold(T::zero(), |acc, v| acc + v.clone());
    sigma <= c[c.len() - 1].mul_small(b)
}

/// `x_1 + ... + x_{a+1} <= x_{a+2}`; only defined for `b >= 2`.
pub fn in_d<T: Scalar>(x: &OrderedPoint<T>, p: MapParams) -> Result<bool> {
    p.check_dim(x.dim())?;
    if p.b() < 2 {
        return Err(Error::UnsupportedRegion("D"));
    }
    Ok(in_d_raw(x.coords(), p.a()))
}

pub(crate) fn in_d_raw<T: Scalar>(c: &[T], a: usize) -> bool {
    let head = c[..=a].iter().fold(T::zero(), |acc, v| acc + v.clone());
    head <= c[a + 1]
}

/// `x` outside `A` with `2 x_a >= x_{a+b}`.
pub fn in_theta<T: Scalar>(x: &OrderedPoint<T>, p: MapParams) -> Result<bool> {
    p.check_dim(x.dim())?;
    Ok(in_theta_raw(x.coords(), p))
}

pub(crate) fn in_theta_raw<T: Scalar>(c: &[T], p: MapParams) -> bool {
    !in_a_raw(c, p.b()) && c[p.a() - 1].mul_small(2) >= c[c.len() - 1]
}

/// Outside `A` with image inside `A`.
pub fn in_gamma<T: Scalar>(x: &OrderedPoint<T>, p: MapParams) -> Result<bool> {
    p.check_dim(x.dim())?;
    if in_a_raw(x.coords(), p.b()) {
        return Ok(false);
    }
    let y = step(x, p)?;
    Ok(in_a_raw(y.coords(), p.b()))
}

pub fn classify<T: Scalar>(x: &OrderedPoint<T>, p: MapParams) -> Result<RegionFlags> {
    p.check_dim(x.dim())?;
    let c = x.coords();
    let in_a = in_a_raw(c, p.b());
    let in_d = (p.b() >= 2).then(|| in_d_raw(c, p.a()));
    let in_theta = in_theta_raw(c, p);
    // Gamma is inside Theta, so skip the forward step when it cannot hold.
    let in_gamma = in_theta && in_gamma(x, p)?;
    Ok(RegionFlags { in_a, in_d, in_theta, in_gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Q};

    fn pt(xs: &[(i64, i64)]) -> OrderedPoint<Q> {
        OrderedPoint::new(xs.iter().map(|&(n, d)| q(n, d)).collect()).unwrap()
    }

    fn ints(xs: &[i64]) -> OrderedPoint<Q> {
        OrderedPoint::from_ints(xs).unwrap()
    }

    #[test]
    fn set_examples() {
        let p12 = MapParams::new(1, 2).unwrap();
        assert!(in_a(&ints(&[1, 1, 2]), p12).unwrap());
        let x = pt(&[(1, 1), (2, 1), (5, 2)]);
        assert!(!in_a(&x, p12).unwrap());
        assert!(!in_theta(&x, p12).unwrap());

        let p13 = MapParams::new(1, 3).unwrap();
        assert!(in_d(&ints(&[1, 2, 10, 20]), p13).unwrap());
    }

    #[test]
    fn d_undefined_for_b_one() {
        let p = MapParams::new(2, 1).unwrap();
        assert_eq!(in_d(&ints(&[1, 2, 3]), p), Err(Error::UnsupportedRegion("D")));
        assert_eq!(classify(&ints(&[1, 2, 3]), p).unwrap().in_d, None);
    }

    #[test]
    fn gamma_and_theta() {
        let p = MapParams::new(1, 2).unwrap();
        // sigma = 7 > 6, 2*2 >= 3, image (0,1,2) lies in A.
        let f = classify(&ints(&[2, 2, 3]), p).unwrap();
        assert!(!f.in_a && f.in_theta && f.in_gamma);
        // image (9,10,10) stays outside A.
        let f = classify(&ints(&[10, 19, 20]), p).unwrap();
        assert!(f.in_theta && !f.in_gamma);
        // points of A are never in Gamma
        assert!(!in_gamma(&ints(&[1, 1, 2]), p).unwrap());
    }

    #[test]
    fn d_inside_a_on_examples() {
        let p = MapParams::new(2, 3).unwrap();
        for xs in [[1, 1, 1, 3, 4], [0, 0, 1, 1, 1], [1, 2, 3, 6, 7]] {
            let f = classify(&ints(&xs), p).unwrap();
            if f.in_d == Some(true) {
                assert!(f.in_a);
            }
        }
    }
}
