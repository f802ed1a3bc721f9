use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{in_a_raw, in_d_raw, step_into, MapParams, OrderedPoint};
use crate::orbit::{iterate, remove_head_mass, IterateOptions, Orbit, StopOn, StopReason};
use crate::sample::{stream_rng, Base, Region, Sampler};
use crate::scalar::{gcd_all, Scalar, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartRegion {
    /// Complement of `A` on the simplex.
    ComplementA,
    /// The whole ordered simplex.
    Lambda,
}

impl StartRegion {
    fn region(self) -> Region {
        match self {
            StartRegion::ComplementA => Region::ComplementA,
            StartRegion::Lambda => Region::Lambda,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AbsorptionConfig {
    pub params: MapParams,
    pub region: StartRegion,
    pub n_samples: u64,
    pub cap: u64,
    pub seed: u64,
    pub bits: u32,
    /// Only sample indices `offset..offset + n_samples` are run, so a subset
    /// of a larger run can be replayed with a different cap.
    #[serde(default)]
    pub offset: u64,
}

impl AbsorptionConfig {
    pub fn new(params: MapParams, n_samples: u64, cap: u64, seed: u64) -> Self {
        AbsorptionConfig {
            params,
            region: StartRegion::ComplementA,
            n_samples,
            cap,
            seed,
            bits: crate::sample::DEFAULT_BITS,
            offset: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleOutcome {
    pub sample_id: u64,
    pub first_hit_a: Option<u64>,
    /// Steps from the first visit of `A` to the first visit of `D`.
    pub d_after_a: Option<u64>,
    /// The orbit reached `A` only when the subtracted coordinate had become
    /// exactly zero, which for dyadic inputs means the bits ran out.
    pub stalled_entry: bool,
    /// Closed-form limit tail `x_{a+2}^inf` relative to `x_{a+b}` at the
    /// start, when `D` was reached.
    pub limit_tail_ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AbsorptionReport {
    pub config: AbsorptionConfig,
    pub absorbed: u64,
    pub absorbed_fraction: f64,
    /// Absorbed samples whose entry was caused by exhausted resolution.
    pub stalled_entries: u64,
    pub entered_d: u64,
    /// Absorbed samples that did not reach `D` within `cap` further steps.
    pub d_cap_exceeded: u64,
    /// Steps along which the closed-form limit was compared after entering `D`.
    pub closed_form_steps_checked: u64,
    pub first_hit_a_histogram: BTreeMap<u64, u64>,
    pub d_after_a_histogram: BTreeMap<u64, u64>,
    pub samples: Vec<SampleOutcome>,
}

/// Runs each sample until it enters `A`, then until it enters `D`, then
/// follows the orbit inside `D` checking that the closed-form limit is
/// constant along it and that the first `a+1` coordinates move by the Brun
/// map. Both checks are exact; a mismatch is an [`Error::Invariant`].
pub fn absorption_experiment(cfg: &AbsorptionConfig) -> Result<AbsorptionReport> {
    let p = cfg.params;
    if p.b() < 2 {
        return Err(Error::Parameter("absorption into A needs b >= 2".into()));
    }
    if p.is_variant() {
        return Err(Error::Parameter("absorption experiment runs the standard map".into()));
    }
    if cfg.cap == 0 {
        return Err(Error::Parameter("cap must be at least 1".into()));
    }
    let sampler = Sampler::new(cfg.bits, Base::Simplex)?;
    let outcomes: Vec<Result<(SampleOutcome, u64)>> = (cfg.offset..cfg.offset + cfg.n_samples)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream_rng(cfg.seed, id);
            let x = sampler.draw(&mut rng, p, cfg.region.region())?;
            absorb_one(id, &x, p, cfg.cap)
        })
        .collect();

    let mut report = AbsorptionReport {
        config: cfg.clone(),
        absorbed: 0,
        absorbed_fraction: 0.0,
        stalled_entries: 0,
        entered_d: 0,
        d_cap_exceeded: 0,
        closed_form_steps_checked: 0,
        first_hit_a_histogram: BTreeMap::new(),
        d_after_a_histogram: BTreeMap::new(),
        samples: Vec::with_capacity(outcomes.len()),
    };
    for o in outcomes {
        let (s, checked) = o?;
        report.closed_form_steps_checked += checked;
        if let Some(k) = s.first_hit_a {
            report.absorbed += 1;
            *report.first_hit_a_histogram.entry(k).or_default() += 1;
            match s.d_after_a {
                Some(j) => {
                    report.entered_d += 1;
                    *report.d_after_a_histogram.entry(j).or_default() += 1;
                }
                None => report.d_cap_exceeded += 1,
            }
        }
        if s.stalled_entry {
            report.stalled_entries += 1;
        }
        report.samples.push(s);
    }
    if cfg.n_samples > 0 {
        report.absorbed_fraction = report.absorbed as f64 / cfg.n_samples as f64;
    }
    Ok(report)
}

fn absorb_one(
    id: u64,
    x: &OrderedPoint<i128>,
    p: MapParams,
    cap: u64,
) -> Result<(SampleOutcome, u64)> {
    let mut orbit = Orbit::new(x, p)?;
    let mut outcome = SampleOutcome {
        sample_id: id,
        first_hit_a: None,
        d_after_a: None,
        stalled_entry: false,
        limit_tail_ratio: None,
    };
    while !orbit.in_a() {
        if orbit.steps() >= cap {
            return Ok((outcome, 0));
        }
        orbit.advance()?;
    }
    let hit = orbit.steps();
    outcome.first_hit_a = Some(hit);
    outcome.stalled_entry = orbit.is_fixed() && hit > 0;

    while orbit.in_d() != Some(true) {
        if orbit.steps() - hit >= cap {
            return Ok((outcome, 0));
        }
        orbit.advance()?;
    }
    outcome.d_after_a = Some(orbit.steps() - hit);
    let checked = follow_in_d(&mut orbit, cap)?;
    let limit = remove_head_mass(&orbit.point(), p.a());
    outcome.limit_tail_ratio =
        Some(limit.coords()[p.a() + 1] as f64 / *x.last() as f64);
    Ok((outcome, checked))
}

/// Follows an orbit inside `D` for at most `cap` steps or until it is fixed,
/// checking the closed-form limit and the head factorization at every step.
fn follow_in_d<T: Scalar>(orbit: &mut Orbit<T>, cap: u64) -> Result<u64> {
    let p = orbit.params();
    let a = p.a();
    let brun = MapParams::new(a, 1)?;
    let limit = remove_head_mass(&orbit.point(), a);
    let mut head = vec![T::zero(); a + 1];
    let mut checked = 0u64;
    while !orbit.is_fixed() && checked < cap {
        step_into(&orbit.coords()[..=a], &mut head, brun, None);
        let old_tail: Vec<T> = orbit.coords()[a + 1..].to_vec();
        let sub = orbit.coords()[a - 1].clone();
        orbit.advance()?;
        checked += 1;
        let c = orbit.coords();
        let tail_ok = c[a + 1..]
            .iter()
            .zip(&old_tail)
            .all(|(new, old)| *new == old.clone() - sub.clone());
        if c[..=a] != head[..] || !tail_ok || !in_d_raw(c, a) {
            return Err(Error::Invariant(format!(
                "orbit inside D does not split into a Brun head and a shifted tail at step {}",
                orbit.steps()
            )));
        }
        if remove_head_mass(&orbit.point(), a) != limit {
            return Err(Error::Invariant(format!(
                "closed-form limit changed along the orbit at step {}",
                orbit.steps()
            )));
        }
    }
    Ok(checked)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BrunConfig {
    pub a: usize,
    pub n_samples: u64,
    pub eps: Q,
    pub cap: u64,
    pub seed: u64,
    pub bits: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct BrunReport {
    pub config: BrunConfig,
    /// Samples whose coordinates all fell below `eps` times the initial
    /// scale within the cap.
    pub converged: u64,
    pub converged_fraction: f64,
    /// Samples run to exact termination that ended at `(0, ..., 0, gcd)`.
    pub gcd_matches: u64,
    pub gcd_runs: u64,
    pub mean_steps_to_eps: f64,
    pub max_steps_to_eps: u64,
}

/// The map with `b = 1` on dyadic points: convergence to zero below `eps`,
/// then an exact run to termination that must end at the gcd of the
/// numerators.
pub fn brun_experiment(cfg: &BrunConfig) -> Result<BrunReport> {
    let p = MapParams::new(cfg.a, 1)?;
    let sampler = Sampler::new(cfg.bits, Base::Simplex)?;
    let to_eps = IterateOptions {
        eps: cfg.eps.clone(),
        cap: cfg.cap,
        stop_on: StopOn::Limit,
        record_trace: false,
    };
    let exhaustive = IterateOptions {
        eps: Q::new(1.into(), num_bigint::BigInt::from(1u8) << 256),
        cap: cfg.cap,
        stop_on: StopOn::Limit,
        record_trace: false,
    };
    let rows: Vec<Result<(bool, u64, Option<bool>)>> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream_rng(cfg.seed, id);
            let x = sampler.draw(&mut rng, p, Region::Lambda)?;
            let s = iterate(&x, p, &to_eps)?;
            let converged = s.stop_reason == StopReason::TailBelowEps
                || (s.stop_reason == StopReason::FixedPoint && *s.final_point.last() == 0);
            let full = iterate(&x, p, &exhaustive)?;
            let gcd_ok = (full.stop_reason == StopReason::FixedPoint).then(|| {
                let d = gcd_all(x.coords());
                let c = full.final_point.coords();
                c[..c.len() - 1].iter().all(|v| *v == 0) && c[c.len() - 1] == d
            });
            Ok((converged, s.steps_taken, gcd_ok))
        })
        .collect();
    let mut report = BrunReport {
        config: cfg.clone(),
        converged: 0,
        converged_fraction: 0.0,
        gcd_matches: 0,
        gcd_runs: 0,
        mean_steps_to_eps: 0.0,
        max_steps_to_eps: 0,
    };
    let mut total_steps = 0u64;
    for r in rows {
        let (converged, steps, gcd_ok) = r?;
        if converged {
            report.converged += 1;
            total_steps += steps;
            report.max_steps_to_eps = report.max_steps_to_eps.max(steps);
        }
        if let Some(ok) = gcd_ok {
            report.gcd_runs += 1;
            report.gcd_matches += u64::from(ok);
        }
    }
    if cfg.n_samples > 0 {
        report.converged_fraction = report.converged as f64 / cfg.n_samples as f64;
    }
    if report.converged > 0 {
        report.mean_steps_to_eps = total_steps as f64 / report.converged as f64;
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VariantConfig {
    pub params: MapParams,
    pub n_samples: u64,
    pub cap: u64,
    pub seed: u64,
    pub bits: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct VariantReport {
    pub config: VariantConfig,
    /// Points of `A` checked for `T(A) in A`.
    pub forward_checked: u64,
    pub forward_failures: u64,
    /// `b <= a + 1 - i`, where the complement of `A` is invariant too.
    pub reverse_applies: bool,
    pub reverse_checked: u64,
    pub reverse_failures: u64,
    /// `b >= a + 3 - i`, where absorption into `A` is expected.
    pub absorbing_regime: bool,
    /// Complement samples whose orbit reached `A` within the cap.
    pub hit_a: u64,
    /// Complement samples whose orbit stalled (subtracted coordinate zero)
    /// outside `A`.
    pub stalled_outside_a: u64,
    pub orbit_samples: u64,
    pub first_hit_a_histogram: BTreeMap<u64, u64>,
}

pub fn variant_experiment(cfg: &VariantConfig) -> Result<VariantReport> {
    let p = cfg.params;
    if p.a() < 2 || !p.is_variant() {
        return Err(Error::Parameter(
            "variant experiment needs a >= 2 and a subtracted index i with 1 <= i <= a-1".into(),
        ));
    }
    let (a, b, i) = (p.a(), p.b(), p.variant_index());
    let reverse_applies = b + i <= a + 1;
    let absorbing_regime = b + i >= a + 3;
    let sampler = Sampler::new(cfg.bits, Base::Simplex)?;
    let n = p.dim();

    // Three independent stream families per sample index.
    // (forward ok, reverse ok, first hit of A, stalled outside A)
    type Row = (bool, Option<bool>, Option<u64>, bool);
    let rows: Vec<Result<Row>> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream_rng(cfg.seed, 3 * id);
            let x = sampler.draw(&mut rng, p, Region::A)?;
            let mut y = vec![0i128; n];
            step_into(x.coords(), &mut y, p, None);
            let forward_ok = in_a_raw(&y, b);

            let mut rng = stream_rng(cfg.seed, 3 * id + 1);
            let reverse_ok = if reverse_applies {
                let x = sampler.draw(&mut rng, p, Region::ComplementA)?;
                step_into(x.coords(), &mut y, p, None);
                Some(!in_a_raw(&y, b))
            } else {
                None
            };

            let mut rng = stream_rng(cfg.seed, 3 * id + 2);
            let x = sampler.draw(&mut rng, p, Region::ComplementA)?;
            let mut orbit = Orbit::new(&x, p)?;
            let mut hit = None;
            let mut stalled = false;
            loop {
                if orbit.in_a() {
                    hit = Some(orbit.steps());
                    break;
                }
                if orbit.is_fixed() {
                    stalled = true;
                    break;
                }
                if orbit.steps() >= cfg.cap {
                    break;
                }
                orbit.advance()?;
            }
            Ok((forward_ok, reverse_ok, hit, stalled))
        })
        .collect();

    let mut report = VariantReport {
        config: cfg.clone(),
        forward_checked: 0,
        forward_failures: 0,
        reverse_applies,
        reverse_checked: 0,
        reverse_failures: 0,
        absorbing_regime,
        hit_a: 0,
        stalled_outside_a: 0,
        orbit_samples: cfg.n_samples,
        first_hit_a_histogram: BTreeMap::new(),
    };
    for r in rows {
        let (forward_ok, reverse_ok, hit, stalled) = r?;
        report.forward_checked += 1;
        report.forward_failures += u64::from(!forward_ok);
        if let Some(ok) = reverse_ok {
            report.reverse_checked += 1;
            report.reverse_failures += u64::from(!ok);
        }
        if let Some(k) = hit {
            report.hit_a += 1;
            *report.first_hit_a_histogram.entry(k).or_default() += 1;
        }
        report.stalled_outside_a += u64::from(stalled);
    }
    Ok(report)
}
