//! Orbit iteration, limits and the experiments built on them.
//!
//! Every orbit goes through [`Orbit`], which checks two exact identities at
//! each step: the coordinate sum drops by exactly `b` times the subtracted
//! coordinate, and every sorted coordinate is nonincreasing. A failure is
//! reported as [`Error::Invariant`].

mod experiments;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{
    in_a_raw, in_d_raw, lift_from_b, project_to_b, s_map_step, step, step_into, sum, MapParams,
    OrderedPoint, Shuffle,
};
use crate::scalar::{Scalar, Q};

pub use experiments::{
    absorption_experiment, brun_experiment, variant_experiment, AbsorptionConfig,
    AbsorptionReport, BrunConfig, BrunReport, SampleOutcome, StartRegion, VariantConfig,
    VariantReport,
};

/// Stateful orbit with per-step invariant checks.
#[derive(Clone, Debug)]
pub struct Orbit<T: Scalar> {
    params: MapParams,
    current: Vec<T>,
    scratch: Vec<T>,
    sigma0: T,
    sigma: T,
    partial_sum: T,
    steps: u64,
}

impl<T: Scalar> Orbit<T> {
    pub fn new(x: &OrderedPoint<T>, p: MapParams) -> Result<Self> {
        p.check_dim(x.dim())?;
        let sigma0 = x.sum();
        Ok(Orbit {
            params: p,
            current: x.coords().to_vec(),
            scratch: x.coords().to_vec(),
            sigma: sigma0.clone(),
            sigma0,
            partial_sum: T::zero(),
            steps: 0,
        })
    }

    pub fn params(&self) -> MapParams {
        self.params
    }

    pub fn coords(&self) -> &[T] {
        &self.current
    }

    pub fn point(&self) -> OrderedPoint<T> {
        OrderedPoint::new_unchecked(self.current.clone())
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Sum of the subtracted coordinate over all steps taken so far.
    pub fn partial_sum(&self) -> &T {
        &self.partial_sum
    }

    pub fn sigma(&self) -> &T {
        &self.sigma
    }

    /// The subtracted coordinate is zero, so the map fixes the point.
    pub fn is_fixed(&self) -> bool {
        self.current[self.params.variant_index() - 1].is_zero()
    }

    pub fn in_a(&self) -> bool {
        in_a_raw(&self.current, self.params.b())
    }

    /// `None` when `b = 1`.
    pub fn in_d(&self) -> Option<bool> {
        (self.params.b() >= 2).then(|| in_d_raw(&self.current, self.params.a()))
    }

    pub fn advance(&mut self) -> Result<()> {
        self.advance_inner(None)
    }

    /// Advances and returns the shuffle of the step.
    pub fn advance_recording(&mut self) -> Result<Shuffle> {
        let mut perm = vec![0usize; self.current.len()];
        self.advance_inner(Some(&mut perm))?;
        Ok(Shuffle::from_raw(perm, self.params.a()))
    }

    fn advance_inner(&mut self, perm: Option<&mut [usize]>) -> Result<()> {
        let p = self.params;
        let subtracted = self.current[p.variant_index() - 1].clone();
        step_into(&self.current, &mut self.scratch, p, perm);
        std::mem::swap(&mut self.current, &mut self.scratch);
        self.steps += 1;
        self.partial_sum = self.partial_sum.clone() + subtracted.clone();
        let new_sigma = sum(&self.current);
        if new_sigma != self.sigma.clone() - subtracted.mul_small(p.b())
            || new_sigma.clone() + self.partial_sum.mul_small(p.b()) != self.sigma0
        {
            return Err(Error::Invariant(format!(
                "telescoping sum broken at step {} of orbit under {p}",
                self.steps
            )));
        }
        if self.current.iter().zip(&self.scratch).any(|(new, old)| new > old) {
            return Err(Error::Invariant(format!(
                "sorted coordinate increased at step {} under {p}",
                self.steps
            )));
        }
        self.sigma = new_sigma;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EnteredA,
    EnteredD,
    /// `x_{a+1} < eps * x_{a+b}` of the starting point.
    TailBelowEps,
    /// The subtracted coordinate vanished, so the orbit is constant from here.
    FixedPoint,
    Cap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopOn {
    /// Run until the limit is reached (or the cap).
    Limit,
    EnterA,
    EnterD,
}

#[derive(Clone, Debug)]
pub struct IterateOptions {
    pub eps: Q,
    pub cap: u64,
    pub stop_on: StopOn,
    pub record_trace: bool,
}

impl Default for IterateOptions {
    fn default() -> Self {
        IterateOptions {
            eps: default_eps(),
            cap: 1_000_000,
            stop_on: StopOn::Limit,
            record_trace: false,
        }
    }
}

/// `2^-40`.
pub fn default_eps() -> Q {
    Q::new(1.into(), num_bigint::BigInt::from(1u64 << 40))
}

#[derive(Clone, Debug)]
pub struct OrbitSummary<T: Scalar> {
    pub params: MapParams,
    pub start: OrderedPoint<T>,
    pub steps_taken: u64,
    pub stop_reason: StopReason,
    pub first_hit_a: Option<u64>,
    pub first_hit_d: Option<u64>,
    /// Exact point where iteration stopped.
    pub final_point: OrderedPoint<T>,
    /// Estimate of the limit of almost every nearby orbit; `None` unless the
    /// orbit stopped at its limit.
    pub limit_estimate: Option<OrderedPoint<T>>,
    /// Sum of the subtracted coordinate along the orbit.
    pub partial_sum: T,
    pub trace: Option<Vec<OrderedPoint<T>>>,
}

/// Iterates `x` under the map until its limit is reached, the requested
/// region is entered, or `cap` steps were taken.
///
/// The limit estimate follows the orbit's almost-everywhere behavior:
/// - below the tail threshold, the first `a+1` coordinates are set to zero;
/// - at a fixed point reached after at least one step (which only happens for
///   rationally dependent inputs), the mass left in the first `a+1`
///   coordinates is removed from the tail as well, as for the closed form on
///   `D`. Variants keep the stalled point as is.
/// - a starting point that is already fixed is its own limit.
pub fn iterate<T: Scalar>(
    x: &OrderedPoint<T>,
    p: MapParams,
    opts: &IterateOptions,
) -> Result<OrbitSummary<T>> {
    if opts.eps <= Q::zero() {
        return Err(Error::Parameter("eps must be positive".into()));
    }
    let mut orbit = Orbit::new(x, p)?;
    let a = p.a();
    let threshold = T::strict_bound(&(opts.eps.clone() * x.last().to_rational()))
        .ok_or_else(|| Error::Resource("tail threshold does not fit the scalar type".into()))?;
    let mut first_hit_a = None;
    let mut first_hit_d = None;
    let mut trace = opts.record_trace.then(Vec::new);
    let stop_reason = loop {
        let k = orbit.steps();
        if let Some(t) = trace.as_mut() {
            t.push(orbit.point());
        }
        if first_hit_a.is_none() && orbit.in_a() {
            first_hit_a = Some(k);
        }
        if first_hit_d.is_none() && orbit.in_d() == Some(true) {
            first_hit_d = Some(k);
        }
        match opts.stop_on {
            StopOn::EnterA if first_hit_a.is_some() => break StopReason::EnteredA,
            StopOn::EnterD if first_hit_d.is_some() => break StopReason::EnteredD,
            _ => {}
        }
        if a < orbit.coords().len() && orbit.coords()[a] < threshold {
            break StopReason::TailBelowEps;
        }
        if orbit.is_fixed() {
            break StopReason::FixedPoint;
        }
        if k >= opts.cap {
            break StopReason::Cap;
        }
        orbit.advance()?;
    };
    let final_point = orbit.point();
    let limit_estimate = match stop_reason {
        StopReason::TailBelowEps => Some(zero_head(&final_point, a)),
        StopReason::FixedPoint if orbit.steps() == 0 => Some(final_point.clone()),
        StopReason::FixedPoint if p.is_variant() => Some(final_point.clone()),
        StopReason::FixedPoint => Some(remove_head_mass(&final_point, a)),
        _ => None,
    };
    Ok(OrbitSummary {
        params: p,
        start: x.clone(),
        steps_taken: orbit.steps(),
        stop_reason,
        first_hit_a,
        first_hit_d,
        final_point,
        limit_estimate,
        partial_sum: orbit.partial_sum().clone(),
        trace,
    })
}

fn zero_head<T: Scalar>(x: &OrderedPoint<T>, a: usize) -> OrderedPoint<T> {
    let mut c = x.coords().to_vec();
    let head = (a + 1).min(c.len());
    c[..head].iter_mut().for_each(|v| *v = T::zero());
    OrderedPoint::new_unchecked(c)
}

/// `(0, ..., 0, x_{a+2} - s, ..., x_{a+b} - s)` with `s = x_1 + ... + x_{a+1}`.
fn remove_head_mass<T: Scalar>(x: &OrderedPoint<T>, a: usize) -> OrderedPoint<T> {
    let c = x.coords();
    let head = (a + 1).min(c.len());
    let s = sum(&c[..head]);
    let out = c
        .iter()
        .enumerate()
        .map(|(j, v)| if j < head { T::zero() } else { v.clone() - s.clone() })
        .collect();
    OrderedPoint::new_unchecked(out)
}

/// Closed-form limit of a point of `D`: the first `a+1` coordinates run the
/// Brun algorithm to zero and the tail loses exactly their total mass.
pub fn limit_closed_form_d<T: Scalar>(x: &OrderedPoint<T>, p: MapParams) -> Result<OrderedPoint<T>> {
    p.check_dim(x.dim())?;
    if p.b() < 2 {
        return Err(Error::UnsupportedRegion("D"));
    }
    if !in_d_raw(x.coords(), p.a()) {
        return Err(Error::Precondition("point is not in D".into()));
    }
    Ok(remove_head_mass(x, p.a()))
}

/// The `S_{a,b}`-invariant function `f(z) = lim z_{a+b-1}^{(k)}` on the
/// projection of `D`:
/// `f(z) = (z_{a+b-1} - s) / (1 - s)` with `s = z_1 + ... + z_{a+1}`.
///
/// Needs `b >= 3` so that `z_{a+b-1}` is a tail coordinate.
pub fn invariant_function(z: &OrderedPoint<Q>, p: MapParams) -> Result<Q> {
    p.check_dim(z.dim() + 1)?;
    if p.b() < 3 {
        return Err(Error::Precondition(
            "the closed form of the invariant function needs b >= 3".into(),
        ));
    }
    let lift = lift_from_b(z)?;
    if !in_d_raw(lift.coords(), p.a()) {
        return Err(Error::Precondition("point is not in the projection of D".into()));
    }
    let c = z.coords();
    let s: Q = c[..=p.a()].iter().sum();
    let den = Q::one() - &s;
    if den.is_zero() {
        return Err(Error::Degenerate("z_1 + ... + z_{a+1} = 1".into()));
    }
    Ok((c[c.len() - 1].clone() - s) / den)
}

/// `phi(x_1, x_2) = (x_1, x_2) / (1 + x_1 + x_2)`.
pub fn phi(x: &OrderedPoint<Q>) -> Result<OrderedPoint<Q>> {
    if x.dim() != 2 {
        return Err(Error::Parameter("phi acts on pairs".into()));
    }
    let den = Q::one() + x.sum();
    Ok(OrderedPoint::new_unchecked(x.coords().iter().map(|v| v / &den).collect()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ConjugacyOutcome {
    pub holds: bool,
    pub steps_verified: u64,
    /// Comparison stopped early because the orbit reached `x_1 = 0`.
    pub reached_boundary: bool,
}

/// Checks `phi(T_{1,1}^k(x)) = S_{1,2}^k(phi(x))` exactly for `k <= n_steps`.
pub fn conjugacy_check(x: &OrderedPoint<Q>, n_steps: u64) -> Result<ConjugacyOutcome> {
    if x.dim() != 2 {
        return Err(Error::Parameter("conjugacy check needs a point of the plane".into()));
    }
    let euclid = MapParams::new(1, 1)?;
    let s12 = MapParams::new(1, 2)?;
    let mut u = x.clone();
    let mut z = phi(x)?;
    if phi(&u)? != z {
        return Ok(ConjugacyOutcome { holds: false, steps_verified: 0, reached_boundary: false });
    }
    for k in 1..=n_steps {
        if u.coords()[0].is_zero() {
            return Ok(ConjugacyOutcome {
                holds: true,
                steps_verified: k - 1,
                reached_boundary: true,
            });
        }
        u = step(&u, euclid)?;
        z = s_map_step(&z, s12)?;
        if phi(&u)? != z {
            return Ok(ConjugacyOutcome { holds: false, steps_verified: k - 1, reached_boundary: false });
        }
    }
    Ok(ConjugacyOutcome { holds: true, steps_verified: n_steps, reached_boundary: false })
}

/// `S_{a,b}` iterated `k` times from `z`.
pub fn s_orbit(z: &OrderedPoint<Q>, p: MapParams, k: usize) -> Result<OrderedPoint<Q>> {
    let mut cur = z.clone();
    for _ in 0..k {
        cur = s_map_step(&cur, p)?;
    }
    Ok(cur)
}

/// Projection of a limit point to `B`, for comparing `T`-limits with
/// `S`-limits.
pub fn limit_in_b(limit: &OrderedPoint<Q>) -> Result<OrderedPoint<Q>> {
    project_to_b(limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi};

    fn pt(xs: &[i64]) -> OrderedPoint<Q> {
        OrderedPoint::from_ints(xs).unwrap()
    }

    fn gcd(mut a: i64, mut b: i64) -> i64 {
        while b != 0 {
            let r = a % b;
            a = b;
            b = r;
        }
        a
    }

    #[test]
    fn zero_minimum_is_its_own_limit() {
        let p = MapParams::new(1, 2).unwrap();
        let s = iterate(&pt(&[0, 1, 2]), p, &IterateOptions::default()).unwrap();
        assert_eq!(s.stop_reason, StopReason::FixedPoint);
        assert_eq!(s.steps_taken, 0);
        assert_eq!(s.limit_estimate.unwrap(), pt(&[0, 1, 2]));
        assert_eq!(s.first_hit_a, Some(0));
    }

    #[test]
    fn d_point_reaches_closed_form_limit() {
        let p = MapParams::new(1, 3).unwrap();
        let x = pt(&[1, 2, 10, 20]);
        let s = iterate(&x, p, &IterateOptions::default()).unwrap();
        assert_eq!(s.final_point, pt(&[0, 1, 8, 18]));
        assert_eq!(s.limit_estimate.unwrap(), pt(&[0, 0, 7, 17]));
        assert_eq!(limit_closed_form_d(&x, p).unwrap(), pt(&[0, 0, 7, 17]));
    }

    #[test]
    fn euclid_terminates_at_gcd() {
        let p = MapParams::new(1, 1).unwrap();
        let s = iterate(&pt(&[4, 6]), p, &IterateOptions::default()).unwrap();
        assert_eq!(s.final_point, pt(&[0, 2]));
        assert_eq!(s.stop_reason, StopReason::FixedPoint);
        for x1 in 1..30 {
            for x2 in x1..30 {
                let s = iterate(&pt(&[x1, x2]), p, &IterateOptions::default()).unwrap();
                assert_eq!(s.final_point, pt(&[0, gcd(x1, x2)]));
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let p = MapParams::new(2, 2).unwrap();
        assert_eq!(limit_closed_form_d(&pt(&[1, 1, 1, 10]), p).unwrap(), pt(&[0, 0, 0, 7]));
        let x = pt(&[0, 0, 0, 5]);
        assert_eq!(limit_closed_form_d(&x, p).unwrap(), x);
        assert!(matches!(limit_closed_form_d(&pt(&[1, 1, 3, 4]), p), Err(Error::Precondition(_))));
        let p21 = MapParams::new(2, 1).unwrap();
        assert!(limit_closed_form_d(&pt(&[1, 1, 3]), p21).is_err());
    }

    #[test]
    fn invariant_function_examples() {
        let p = MapParams::new(1, 3).unwrap();
        let z = OrderedPoint::new(vec![q(1, 10), q(1, 5), q(1, 2)]).unwrap();
        assert_eq!(invariant_function(&z, p).unwrap(), q(2, 7));
        let z0 = OrderedPoint::new(vec![qi(0), qi(0), q(3, 5)]).unwrap();
        assert_eq!(invariant_function(&z0, p).unwrap(), q(3, 5));
        // S-invariance along a few steps
        let mut cur = z.clone();
        for _ in 0..20 {
            cur = s_map_step(&cur, p).unwrap();
            assert_eq!(invariant_function(&cur, p).unwrap(), q(2, 7));
        }
        assert!(invariant_function(&z, MapParams::new(1, 2).unwrap()).is_err());
    }

    #[test]
    fn invariant_function_matches_iterated_limit() {
        // Scaled lift of z = (1/10, 1/5, 1/2): the exact orbit stalls at a
        // rational fixed point, whose limit estimate carries the closed form.
        let p = MapParams::new(1, 3).unwrap();
        let s = iterate(&pt(&[1, 2, 5, 10]), p, &IterateOptions::default()).unwrap();
        let lim = s.limit_estimate.unwrap();
        let c = lim.coords();
        assert_eq!(c[2].clone() / c[3].clone(), q(2, 7));
    }

    #[test]
    fn conjugacy_examples() {
        let x = pt(&[1, 1]);
        assert_eq!(phi(&x).unwrap(), OrderedPoint::new(vec![q(1, 3), q(1, 3)]).unwrap());
        let out = conjugacy_check(&x, 1).unwrap();
        assert!(out.holds);
        let out = conjugacy_check(&OrderedPoint::new(vec![qi(0), q(7, 3)]).unwrap(), 10).unwrap();
        assert!(out.holds && out.reached_boundary && out.steps_verified == 0);
        let out = conjugacy_check(&OrderedPoint::new(vec![q(3, 7), q(11, 5)]).unwrap(), 50).unwrap();
        assert!(out.holds);
        assert!(conjugacy_check(&pt(&[0, 0]), 3).unwrap().reached_boundary);
    }

    #[test]
    fn telescoping_and_monotonicity_along_orbit() {
        let p = MapParams::new(2, 3).unwrap();
        let x = OrderedPoint::new(vec![3i128, 7, 11, 19, 23]).unwrap();
        let mut orbit = Orbit::new(&x, p).unwrap();
        for _ in 0..40 {
            orbit.advance().unwrap();
            let expect = x.sum() - orbit.partial_sum().mul_small(3);
            assert_eq!(*orbit.sigma(), expect);
        }
    }

    #[test]
    fn cap_is_reported() {
        let p = MapParams::new(1, 1).unwrap();
        let opts = IterateOptions { cap: 3, ..Default::default() };
        let s = iterate(&pt(&[1, 100]), p, &opts).unwrap();
        assert_eq!(s.stop_reason, StopReason::Cap);
        assert_eq!(s.steps_taken, 3);
        assert!(s.limit_estimate.is_none());
    }

    #[test]
    fn stop_on_region() {
        let p = MapParams::new(1, 2).unwrap();
        let opts = IterateOptions { stop_on: StopOn::EnterA, ..Default::default() };
        let s = iterate(&pt(&[5, 6, 7]), p, &opts).unwrap();
        assert_eq!(s.stop_reason, StopReason::EnteredA);
        assert_eq!(s.first_hit_a, Some(s.steps_taken));
    }
}
