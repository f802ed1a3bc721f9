use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{FreePoint, MapParams, OrderedPoint, Shuffle};
use crate::scalar::{Scalar, Q};

/// One application of the subtractive map with the stable tie-break.
///
/// Returns the image and the shuffle realizing it. For `i == a` this is
/// `T_{a,b}`; for `i < a` it is the variant subtracting `x_i`.
pub fn subtractive_step<T: Scalar>(
    x: &OrderedPoint<T>,
    p: MapParams,
) -> Result<(OrderedPoint<T>, Shuffle)> {
    p.check_dim(x.dim())?;
    let n = p.dim();
    let mut out = vec![T::zero(); n];
    let mut perm = vec![0usize; n];
    step_into(x.coords(), &mut out, p, Some(&mut perm));
    Ok((OrderedPoint::new_unchecked(out), Shuffle::from_raw(perm, p.a())))
}

/// Image only.
pub fn step<T: Scalar>(x: &OrderedPoint<T>, p: MapParams) -> Result<OrderedPoint<T>> {
    p.check_dim(x.dim())?;
    let mut out = vec![T::zero(); p.dim()];
    step_into(x.coords(), &mut out, p, None);
    Ok(OrderedPoint::new_unchecked(out))
}

/// Allocation-free step used by the orbit drivers. `src` must be sorted and
/// of length `a + b`; `dst` must have the same length.
///
/// Both decks are already sorted, so the ascending rearrangement is a merge.
/// On ties the first deck wins, which is exactly the rule "equal values keep
/// their original relative order".
pub(crate) fn step_into<T: Scalar>(
    src: &[T],
    dst: &mut [T],
    p: MapParams,
    mut perm: Option<&mut [usize]>,
) {
    let a = p.a();
    let b = p.b();
    let sub = src[p.variant_index() - 1].clone();
    let (mut i, mut j) = (0usize, 0usize);
    let mut tail = if b > 0 { Some(src[a].clone() - sub.clone()) } else { None };
    for (k, slot) in dst.iter_mut().enumerate() {
        let take_first = match &tail {
            None => true,
            Some(t) => i < a && src[i] <= *t,
        };
        if take_first {
            *slot = src[i].clone();
            if let Some(pm) = perm.as_deref_mut() {
                pm[i] = k;
            }
            i += 1;
        } else {
            *slot = tail.take().expect("tail present");
            if let Some(pm) = perm.as_deref_mut() {
                pm[a + j] = k;
            }
            j += 1;
            if j < b {
                tail = Some(src[a + j].clone() - sub.clone());
            }
        }
    }
}

/// The three-dimensional map acting in place on the orthant: keep the
/// smallest coordinate and subtract it from the other two. Tied minima use
/// the lowest index.
pub fn unordered_step3<T: Scalar>(x: &FreePoint<T>) -> Result<FreePoint<T>> {
    if x.dim() != 3 {
        return Err(Error::Parameter(format!("expected 3 coordinates, got {}", x.dim())));
    }
    let c = x.coords();
    let m = (0..3).fold(0, |best, i| if c[i] < c[best] { i } else { best });
    let min = c[m].clone();
    let out = c
        .iter()
        .enumerate()
        .map(|(i, v)| if i == m { v.clone() } else { v.clone() - min.clone() })
        .collect();
    Ok(FreePoint::new(out).expect("subtracting the minimum keeps coordinates nonnegative"))
}

fn normalize(coords: &[Q]) -> Result<Vec<Q>> {
    let s = coords.iter().fold(Q::zero(), |acc, c| acc + c);
    if s.is_zero() {
        return Err(Error::Degenerate("coordinate sum is zero".into()));
    }
    Ok(coords.iter().map(|c| c / &s).collect())
}

/// Radial projection `x -> x / sigma(x)` onto the unit simplex.
pub fn project_to_simplex(x: &OrderedPoint<Q>) -> Result<OrderedPoint<Q>> {
    Ok(OrderedPoint::new_unchecked(normalize(x.coords())?))
}

pub fn project_free_to_simplex(x: &FreePoint<Q>) -> Result<FreePoint<Q>> {
    FreePoint::new(normalize(x.coords())?)
}

/// `(x_1, ..., x_n) -> (x_1/x_n, ..., x_{n-1}/x_n)`, landing in
/// `B = {z : 0 <= z_1 <= ... <= z_{n-1} <= 1}`.
pub fn project_to_b(x: &OrderedPoint<Q>) -> Result<OrderedPoint<Q>> {
    if x.dim() < 2 {
        return Err(Error::Parameter("projection to B needs at least 2 coordinates".into()));
    }
    let last = x.last().clone();
    if last.is_zero() {
        return Err(Error::Degenerate("last coordinate is zero".into()));
    }
    let c = x.coords();
    Ok(OrderedPoint::new_unchecked(c[..c.len() - 1].iter().map(|v| v / &last).collect()))
}

/// Lift of `z` in `B` to `(z, 1)`.
pub fn lift_from_b(z: &OrderedPoint<Q>) -> Result<OrderedPoint<Q>> {
    if *z.last() > Q::one() {
        return Err(Error::Domain("point of B must have coordinates <= 1".into()));
    }
    let mut c = z.coords().to_vec();
    c.push(Q::one());
    Ok(OrderedPoint::new_unchecked(c))
}

/// The projected map `S_{a,b}` on `B`: lift, step, project.
pub fn s_map_step(z: &OrderedPoint<Q>, p: MapParams) -> Result<OrderedPoint<Q>> {
    p.check_dim(z.dim() + 1)?;
    let image = step(&lift_from_b(z)?, p)?;
    project_to_b(&image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    fn pt(xs: &[i64]) -> OrderedPoint<Q> {
        OrderedPoint::from_ints(xs).unwrap()
    }

    fn qp(xs: &[(i64, i64)]) -> OrderedPoint<Q> {
        OrderedPoint::new(xs.iter().map(|&(n, d)| q(n, d)).collect()).unwrap()
    }

    #[test]
    fn step_examples() {
        let p12 = MapParams::new(1, 2).unwrap();
        let (y, pi) = subtractive_step(&pt(&[1, 2, 3]), p12).unwrap();
        assert_eq!(y, pt(&[1, 1, 2]));
        assert!(pi.is_identity());

        let (y, _) = subtractive_step(&pt(&[0, 2, 5]), p12).unwrap();
        assert_eq!(y, pt(&[0, 2, 5]));

        let p21 = MapParams::new(2, 1).unwrap();
        let (y, pi) = subtractive_step(&pt(&[2, 3, 4]), p21).unwrap();
        assert_eq!(y, pt(&[1, 2, 3]));
        assert_eq!(pi.one_based(), vec![2, 3, 1]);

        let selmer = MapParams::variant(2, 1, 1).unwrap();
        let (y, _) = subtractive_step(&pt(&[1, 2, 3]), selmer).unwrap();
        assert_eq!(y, pt(&[1, 2, 2]));
    }

    #[test]
    fn ties_keep_first_deck_first() {
        // y = (2, 2, 3): the first deck's 2 goes before the second deck's 2.
        let p = MapParams::new(1, 2).unwrap();
        let (y, pi) = subtractive_step(&pt(&[2, 4, 5]), p).unwrap();
        assert_eq!(y, pt(&[2, 2, 3]));
        assert_eq!(pi.one_based(), vec![1, 2, 3]);
        let (_, pi) = subtractive_step(&pt(&[3, 4, 7]), p).unwrap();
        // y = (3, 1, 4) -> (1, 3, 4)
        assert_eq!(pi.one_based(), vec![2, 1, 3]);
    }

    #[test]
    fn step_rejects_wrong_dimension() {
        let p = MapParams::new(1, 2).unwrap();
        assert!(matches!(subtractive_step(&pt(&[1, 2]), p), Err(Error::Parameter(_))));
    }

    #[test]
    fn unordered_examples() {
        let f = |xs: &[i64]| unordered_step3(&FreePoint::from_ints(xs).unwrap()).unwrap();
        assert_eq!(f(&[1, 2, 3]), FreePoint::from_ints(&[1, 1, 2]).unwrap());
        assert_eq!(f(&[0, 2, 5]), FreePoint::from_ints(&[0, 2, 5]).unwrap());
        assert_eq!(f(&[5, 2, 4]), FreePoint::from_ints(&[3, 2, 2]).unwrap());
        // tied minimum: lowest index kept
        assert_eq!(f(&[2, 2, 5]), FreePoint::from_ints(&[2, 0, 3]).unwrap());
        assert!(unordered_step3(&FreePoint::from_ints(&[1, 2]).unwrap()).is_err());
    }

    #[test]
    fn simplex_projection_examples() {
        assert_eq!(project_to_simplex(&pt(&[1, 1, 2])).unwrap(), qp(&[(1, 4), (1, 4), (1, 2)]));
        let third = qp(&[(1, 3), (1, 3), (1, 3)]);
        assert_eq!(project_to_simplex(&third).unwrap(), third);
        assert_eq!(project_to_simplex(&pt(&[2, 3, 5])).unwrap(), qp(&[(1, 5), (3, 10), (1, 2)]));
        assert!(matches!(project_to_simplex(&pt(&[0, 0])), Err(Error::Degenerate(_))));
        let free = FreePoint::from_ints(&[3, 1, 0]).unwrap();
        let proj = project_free_to_simplex(&free).unwrap();
        assert_eq!(proj.coords(), &[q(3, 4), q(1, 4), q(0, 1)]);
    }

    #[test]
    fn b_projection_examples() {
        assert_eq!(project_to_b(&pt(&[1, 2, 4])).unwrap(), qp(&[(1, 4), (1, 2)]));
        assert_eq!(project_to_b(&pt(&[0, 0, 3])).unwrap(), pt(&[0, 0]));
        assert_eq!(project_to_b(&pt(&[1, 1, 1, 2])).unwrap(), qp(&[(1, 2), (1, 2), (1, 2)]));
        assert!(matches!(project_to_b(&pt(&[0, 0, 0])), Err(Error::Degenerate(_))));
    }

    #[test]
    fn s_map_examples() {
        let p = MapParams::new(1, 2).unwrap();
        let z = qp(&[(1, 4), (1, 2)]);
        assert_eq!(s_map_step(&z, p).unwrap(), qp(&[(1, 3), (1, 3)]));
        for t in [q(0, 1), q(1, 3), q(1, 1)] {
            let z = OrderedPoint::new(vec![q(0, 1), t.clone()]).unwrap();
            assert_eq!(s_map_step(&z, p).unwrap(), z);
        }
        let z = qp(&[(1, 3), (1, 3)]);
        assert_eq!(s_map_step(&z, p).unwrap(), qp(&[(0, 1), (1, 2)]));
        // z outside B
        assert!(s_map_step(&qp(&[(1, 2), (3, 2)]), p).is_err());
    }

    #[test]
    fn s_map_handles_zero_image_as_degenerate() {
        // a=1, b=1: z=(1) lifts to (1,1) which maps to (0,1): fine.
        let p = MapParams::new(1, 1).unwrap();
        let z = OrderedPoint::new(vec![q(1, 1)]).unwrap();
        assert_eq!(s_map_step(&z, p).unwrap(), OrderedPoint::new(vec![q(0, 1)]).unwrap());
    }
}
