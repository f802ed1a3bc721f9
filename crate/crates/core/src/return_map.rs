//! The first-return map to `Theta`, stopped on `Gamma`, and its cylinders.
//!
//! `Theta = {x outside A : 2 x_a >= x_{a+b}}` and `Gamma` is the part of the
//! complement of `A` mapped into `A` in one step. A point of `Gamma` is its
//! own return (time 0); any other point of `Theta` is followed until the
//! orbit is back in `Theta`, recording the shuffle of every step.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{in_a_raw, in_gamma, in_theta_raw, MapParams, OrderedPoint, Shuffle};
use crate::matrices::{forward_product, inverse_product, TransitionMatrix};
use crate::orbit::Orbit;
use crate::sample::{stream_rng, Base, Region, Sampler};
use crate::scalar::{Scalar, Q};

pub const DEFAULT_CAP: u64 = 100_000;

#[derive(Clone, Debug, Serialize)]
pub struct ReturnRecord<T: Scalar = Q> {
    pub start: OrderedPoint<T>,
    pub end: OrderedPoint<T>,
    pub return_time: u64,
    pub word: Vec<Shuffle>,
    /// `L_{pi_k} ... L_{pi_1}`; maps `start` to `end`.
    pub matrix: TransitionMatrix,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ReturnOutcome<T: Scalar = Q> {
    Returned(ReturnRecord<T>),
    /// The orbit entered `A` before returning. Cannot happen from `Theta`
    /// minus `Gamma`; reported rather than assumed.
    Absorbed { steps: u64, word: Vec<Shuffle>, point: OrderedPoint<T> },
    CapExceeded { steps: u64, word: Vec<Shuffle>, point: OrderedPoint<T> },
}

/// First return of `x` to `Theta`. Fails unless `x` is in `Theta`.
pub fn first_return<T: Scalar>(
    x: &OrderedPoint<T>,
    p: MapParams,
    cap: u64,
) -> Result<ReturnOutcome<T>> {
    p.check_dim(x.dim())?;
    if cap == 0 {
        return Err(Error::Parameter("cap must be at least 1".into()));
    }
    if !in_theta_raw(x.coords(), p) {
        return Err(Error::Precondition("first return needs a starting point in Theta".into()));
    }
    if in_gamma(x, p)? {
        return Ok(ReturnOutcome::Returned(ReturnRecord {
            start: x.clone(),
            end: x.clone(),
            return_time: 0,
            word: Vec::new(),
            matrix: TransitionMatrix::identity(p.dim(), crate::matrices::MatrixKind::Forward),
        }));
    }
    let mut word = Vec::new();
    let mut orbit = Orbit::new(x, p)?;
    loop {
        word.push(orbit.advance_recording()?);
        let steps = orbit.steps();
        if in_a_raw(orbit.coords(), p.b()) {
            return Ok(ReturnOutcome::Absorbed { steps, word, point: orbit.point() });
        }
        if in_theta_raw(orbit.coords(), p) {
            break;
        }
        if steps >= cap {
            return Ok(ReturnOutcome::CapExceeded { steps, word, point: orbit.point() });
        }
    }
    let y = orbit.point();
    let matrix = forward_product(&word, p)?;
    if matrix.apply(x.coords())? != y.coords() {
        return Err(Error::Invariant("return block matrix does not map start to end".into()));
    }
    Ok(ReturnOutcome::Returned(ReturnRecord {
        start: x.clone(),
        end: y,
        return_time: word.len() as u64,
        word,
        matrix,
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct CylinderCode<T: Scalar = Q> {
    /// One shuffle word per completed return.
    pub blocks: Vec<Vec<Shuffle>>,
    /// The orbit reached `Gamma` after this many blocks.
    pub absorbed_after: Option<usize>,
    /// A block exceeded the cap; its partial word is the last entry of
    /// `blocks`.
    pub cap_exceeded: bool,
    pub end: OrderedPoint<T>,
}

impl<T: Scalar> CylinderCode<T> {
    /// All blocks concatenated.
    pub fn word(&self) -> Vec<Shuffle> {
        self.blocks.iter().flatten().cloned().collect()
    }

    pub fn complete_blocks(&self) -> usize {
        self.blocks.len() - usize::from(self.cap_exceeded)
    }
}

/// Codes `x` by up to `n_returns` first-return blocks, stopping early on
/// `Gamma` or at a block that exceeds the cap.
pub fn code_orbit<T: Scalar>(
    x: &OrderedPoint<T>,
    p: MapParams,
    n_returns: usize,
    cap: u64,
) -> Result<CylinderCode<T>> {
    let mut code = CylinderCode {
        blocks: Vec::new(),
        absorbed_after: None,
        cap_exceeded: false,
        end: x.clone(),
    };
    for _ in 0..n_returns {
        match first_return(&code.end, p, cap)? {
            ReturnOutcome::Returned(r) if r.return_time == 0 => {
                code.absorbed_after = Some(code.blocks.len());
                break;
            }
            ReturnOutcome::Returned(r) => {
                code.blocks.push(r.word);
                code.end = r.end;
            }
            ReturnOutcome::Absorbed { .. } => {
                return Err(Error::Invariant(
                    "orbit entered A between two visits of Theta".into(),
                ));
            }
            ReturnOutcome::CapExceeded { word, point, .. } => {
                code.blocks.push(word);
                code.end = point;
                code.cap_exceeded = true;
                break;
            }
        }
    }
    if code.absorbed_after.is_none() && !code.cap_exceeded && in_gamma(&code.end, p)? {
        code.absorbed_after = Some(code.blocks.len());
    }
    Ok(code)
}

/// Pulls `y` back through the cylinder of `blocks` and checks that the
/// preimage lies in `Theta` and is coded by exactly these blocks, ending at
/// `y`.
pub fn fullness_check(
    blocks: &[Vec<Shuffle>],
    y: &OrderedPoint<BigInt>,
    p: MapParams,
    cap: u64,
) -> Result<bool> {
    if !in_theta_raw(y.coords(), p) {
        return Err(Error::Precondition("pullback target must be in Theta".into()));
    }
    let word: Vec<Shuffle> = blocks.iter().flatten().cloned().collect();
    let m = inverse_product(&word, p)?;
    let x = match OrderedPoint::new(m.apply(y.coords())?) {
        Ok(x) => x,
        Err(_) => return Ok(false),
    };
    if !in_theta_raw(x.coords(), p) {
        return Ok(false);
    }
    let code = code_orbit(&x, p, blocks.len(), cap)?;
    Ok(!code.cap_exceeded && code.blocks == blocks && code.end == *y)
}

/// `m x / sigma(m x)`.
pub fn projected_step(x: &[Q], m: &TransitionMatrix) -> Result<Vec<Q>> {
    let y = m.apply(x)?;
    let s: Q = y.iter().sum();
    if s.is_zero() {
        return Err(Error::Degenerate("image has zero coordinate sum".into()));
    }
    Ok(y.iter().map(|v| v / &s).collect())
}

/// `1 / (c . x)^n` with `c` the column sums of `m`: the Jacobian of the
/// projected inverse branch up to a constant factor.
pub fn jacobian_shape(m: &TransitionMatrix, x: &[Q]) -> Result<Q> {
    if x.len() != m.dim() {
        return Err(Error::Parameter("point length does not match matrix".into()));
    }
    if x.iter().any(|v| *v < Q::zero()) {
        return Err(Error::Domain("point must have nonnegative coordinates".into()));
    }
    let c = m.column_sums()?;
    let cx: Q = c.iter().zip(x).map(|(ci, xi)| Q::from_integer(ci.clone()) * xi).sum();
    if cx <= Q::zero() {
        return Err(Error::Invariant("c . x must be positive for a nonnegative unimodular matrix".into()));
    }
    Ok(Q::one() / num_traits::pow(cx, m.dim()))
}

/// `(2 a (a+b))^{a+b}`: the distortion constant on the projection of
/// `Theta`.
pub fn distortion_bound(p: MapParams) -> Q {
    let base = BigInt::from(2 * p.a() * p.dim());
    Q::from_integer(num_traits::pow(base, p.dim()))
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let ph = k as f64 / n;
    let z2 = z * z;
    let den = 1.0 + z2 / n;
    let centre = (ph + z2 / (2.0 * n)) / den;
    let half = z * (ph * (1.0 - ph) / n + z2 / (4.0 * n * n)).sqrt() / den;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct AlphaEstimate {
    pub params: MapParams,
    pub n_samples: u64,
    pub seed: u64,
    pub theta_hits: u64,
    pub gamma_hits: u64,
    /// Fractions of the ordered simplex, with 95% Wilson intervals.
    pub leb_theta: f64,
    pub leb_theta_ci: (f64, f64),
    pub leb_gamma: f64,
    pub leb_gamma_ci: (f64, f64),
    /// `(1/(2a(a+b)))^{a+b} leb_gamma / leb_theta`.
    pub alpha_lower: f64,
    /// The same bound from the pessimistic ends of both intervals.
    pub alpha_lower_conservative: f64,
    /// No sample landed in `Theta`.
    pub inconclusive: bool,
}

/// Monte Carlo estimate of the projected measures of `Theta` and `Gamma`
/// and of the lower bound they give for the absorbed fraction per return.
pub fn alpha_estimate(p: MapParams, n_samples: u64, seed: u64, bits: u32) -> Result<AlphaEstimate> {
    if n_samples < 1000 {
        return Err(Error::Parameter("alpha estimate needs at least 1000 samples".into()));
    }
    let sampler = Sampler::new(bits, Base::Simplex)?;
    let (theta_hits, gamma_hits) = (0..n_samples)
        .into_par_iter()
        .map(|id| -> Result<(u64, u64)> {
            let mut rng = stream_rng(seed, id);
            let x = sampler.draw(&mut rng, p, Region::Lambda)?;
            let theta = in_theta_raw(x.coords(), p);
            let gamma = theta && in_gamma(&x, p)?;
            Ok((u64::from(theta), u64::from(gamma)))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let constant = crate::scalar::rational_to_f64(&(Q::one() / distortion_bound(p)));
    let leb_theta = theta_hits as f64 / n_samples as f64;
    let leb_gamma = gamma_hits as f64 / n_samples as f64;
    let leb_theta_ci = wilson_interval(theta_hits, n_samples, 1.96);
    let leb_gamma_ci = wilson_interval(gamma_hits, n_samples, 1.96);
    let inconclusive = theta_hits == 0;
    let (alpha_lower, alpha_lower_conservative) = if inconclusive {
        (0.0, 0.0)
    } else {
        (
            constant * leb_gamma / leb_theta,
            constant * leb_gamma_ci.0 / leb_theta_ci.1,
        )
    };
    Ok(AlphaEstimate {
        params: p,
        n_samples,
        seed,
        theta_hits,
        gamma_hits,
        leb_theta,
        leb_theta_ci,
        leb_gamma,
        leb_gamma_ci,
        alpha_lower,
        alpha_lower_conservative,
        inconclusive,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaVisits {
    pub params: MapParams,
    pub n_samples: u64,
    pub visited: u64,
    /// Hitting time of `Theta` from a point outside `A` -> count.
    pub histogram: BTreeMap<u64, u64>,
}

/// Hitting times of `Theta` for orbits started outside `A`.
pub fn theta_visits(p: MapParams, n_samples: u64, cap: u64, seed: u64, bits: u32) -> Result<ThetaVisits> {
    let sampler = Sampler::new(bits, Base::Simplex)?;
    let times: Vec<Result<Option<u64>>> = (0..n_samples)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream_rng(seed, id);
            let x = sampler.draw(&mut rng, p, Region::ComplementA)?;
            theta_hitting_time(&x, p, cap)
        })
        .collect();
    let mut out = ThetaVisits { params: p, n_samples, visited: 0, histogram: BTreeMap::new() };
    for t in times {
        if let Some(k) = t? {
            out.visited += 1;
            *out.histogram.entry(k).or_default() += 1;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ReturnTimes {
    pub params: MapParams,
    pub n_samples: u64,
    /// Samples that started in `Gamma` (return time 0).
    pub in_gamma: u64,
    pub cap_exceeded: u64,
    /// Return time -> count, including time 0.
    pub histogram: BTreeMap<u64, u64>,
}

/// Distribution of first-return times for points sampled in `Theta`.
pub fn return_times(p: MapParams, n_samples: u64, cap: u64, seed: u64, bits: u32) -> Result<ReturnTimes> {
    let sampler = Sampler::new(bits, Base::Simplex)?;
    let rows: Vec<Result<Option<u64>>> = (0..n_samples)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream_rng(seed, id);
            let x = sampler.draw(&mut rng, p, Region::Theta)?;
            match first_return(&x, p, cap)? {
                ReturnOutcome::Returned(r) => Ok(Some(r.return_time)),
                ReturnOutcome::CapExceeded { .. } => Ok(None),
                ReturnOutcome::Absorbed { .. } => {
                    Err(Error::Invariant("orbit entered A before returning to Theta".into()))
                }
            }
        })
        .collect();
    let mut out = ReturnTimes { params: p, n_samples, in_gamma: 0, cap_exceeded: 0, histogram: BTreeMap::new() };
    for r in rows {
        match r? {
            Some(k) => {
                out.in_gamma += u64::from(k == 0);
                *out.histogram.entry(k).or_default() += 1;
            }
            None => out.cap_exceeded += 1,
        }
    }
    Ok(out)
}

/// First `k` with `T^k(x)` in `Theta`, or `None` if the orbit enters `A`
/// first or the cap is reached.
pub fn theta_hitting_time<T: Scalar>(x: &OrderedPoint<T>, p: MapParams, cap: u64) -> Result<Option<u64>> {
    let mut orbit = Orbit::new(x, p)?;
    loop {
        let c = orbit.coords();
        if in_theta_raw(c, p) {
            return Ok(Some(orbit.steps()));
        }
        if in_a_raw(c, p.b()) || orbit.steps() >= cap {
            return Ok(None);
        }
        orbit.advance()?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::{forward_matrix, inverse_matrix};
    use crate::scalar::{q, qi};

    fn pt(xs: &[i64]) -> OrderedPoint<Q> {
        OrderedPoint::from_ints(xs).unwrap()
    }

    #[test]
    fn gamma_point_returns_at_once() {
        let p = MapParams::new(1, 2).unwrap();
        let x = pt(&[2, 2, 3]);
        match first_return(&x, p, 10).unwrap() {
            ReturnOutcome::Returned(r) => {
                assert_eq!(r.return_time, 0);
                assert!(r.word.is_empty());
                assert_eq!(r.end, x);
            }
            other => panic!("unexpected {other:?}"),
        }
        let code = code_orbit(&x, p, 3, 10).unwrap();
        assert!(code.blocks.is_empty());
        assert_eq!(code.absorbed_after, Some(0));
    }

    #[test]
    fn block_from_theta_minus_gamma() {
        let p = MapParams::new(1, 2).unwrap();
        let x = pt(&[10, 19, 20]);
        match first_return(&x, p, 1000).unwrap() {
            ReturnOutcome::Returned(r) => {
                assert!(r.return_time >= 1);
                assert_eq!(r.matrix.apply(x.coords()).unwrap(), r.end.coords());
                assert!(in_theta_raw(r.end.coords(), p));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precondition() {
        let p = MapParams::new(1, 2).unwrap();
        assert!(matches!(first_return(&pt(&[1, 1, 2]), p, 10), Err(Error::Precondition(_))));
    }

    #[test]
    fn projected_examples() {
        let p = MapParams::new(1, 2).unwrap();
        let id = Shuffle::identity(p);
        let m = inverse_matrix(&id, p).unwrap();
        let l = forward_matrix(&id, p).unwrap();
        let x = vec![q(1, 3), q(1, 3), q(1, 3)];
        let y = projected_step(&x, &m).unwrap();
        assert_eq!(y, vec![q(1, 5), q(2, 5), q(2, 5)]);
        assert_eq!(projected_step(&y, &l).unwrap(), x);
        let i3 = TransitionMatrix::identity(3, crate::matrices::MatrixKind::Inverse);
        assert_eq!(projected_step(&x, &i3).unwrap(), x);
        assert_eq!(jacobian_shape(&i3, &x).unwrap(), qi(1));
        assert_eq!(jacobian_shape(&m, &x).unwrap(), q(27, 125));
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!(lo < 0.5 && hi > 0.5);
        assert_eq!(wilson_interval(0, 100, 1.96).0, 0.0);
    }

    #[test]
    fn alpha_small() {
        let p = MapParams::new(1, 2).unwrap();
        let e = alpha_estimate(p, 5000, 1, 64).unwrap();
        assert!(e.gamma_hits <= e.theta_hits);
        assert!(!e.inconclusive);
        assert!(e.alpha_lower > 0.0);
        let expect = e.leb_gamma / e.leb_theta / 216.0;
        assert!((e.alpha_lower - expect).abs() < 1e-15);
        assert!(alpha_estimate(p, 10, 1, 64).is_err());
    }
}
