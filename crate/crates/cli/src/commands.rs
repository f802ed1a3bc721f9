//! The subcommands. Each one computes a serializable result, then writes
//! its files in one pass at the end.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use sublab::cones::{complement_recursion, decay_bound, verify_tree, LevelCheck, MAX_DEPTH};
use sublab::exact::{classify, RegionFlags};
use sublab::orbit::{
    absorption_experiment, conjugacy_check, iterate, variant_experiment, AbsorptionConfig,
    AbsorptionReport, IterateOptions, StartRegion, StopOn, StopReason, VariantConfig, VariantReport,
};
use sublab::return_map::{alpha_estimate, return_times, theta_visits, AlphaEstimate};
use sublab::sample::{random_rational_point, stream_rng};
use sublab::scalar::format_rational;
use sublab::{MapParams, OrderedPoint, Q};

use crate::config::*;
use crate::error::{CliError, CliResult};
use crate::output::{exact_point, histogram_rows, Emitter, ExactNum};
use crate::svg;

#[derive(Serialize)]
struct ParamsOut {
    a: usize,
    b: usize,
    subtract_index: usize,
    variant: bool,
}

fn params_out(p: MapParams) -> ParamsOut {
    ParamsOut { a: p.a(), b: p.b(), subtract_index: p.variant_index(), variant: p.is_variant() }
}

#[derive(Serialize)]
pub struct OrbitOut {
    params: ParamsOut,
    start: Vec<ExactNum>,
    start_regions: RegionFlags,
    eps: ExactNum,
    cap: u64,
    stop_on: StopOn,
    steps_taken: u64,
    stop_reason: StopReason,
    #[serde(rename = "first_hit_A")]
    first_hit_a: Option<u64>,
    #[serde(rename = "first_hit_D")]
    first_hit_d: Option<u64>,
    final_point: Vec<ExactNum>,
    limit_estimate: Option<Vec<ExactNum>>,
    /// Sum of the subtracted coordinate over the steps taken.
    partial_sum: ExactNum,
}

struct OrbitRun {
    out: OrbitOut,
    trace: Option<Vec<OrderedPoint<Q>>>,
}

fn run_orbit(cfg: &ExperimentConfig) -> CliResult<OrbitRun> {
    let p = cfg.params()?;
    let text = cfg.point.as_deref().ok_or_else(|| CliError::Usage("--point is required".into()))?;
    let x = OrderedPoint::<Q>::parse(text)
        .map_err(|e| CliError::Usage(format!("bad --point {text:?}: {e}")))?;
    if x.dim() != p.dim() {
        return Err(CliError::Usage(format!("--point has {} coordinates, a + b = {}", x.dim(), p.dim())));
    }
    let digits = cfg.digits();
    let opts = IterateOptions {
        eps: cfg.eps()?,
        cap: cfg.cap.unwrap_or(DEFAULT_ORBIT_CAP),
        stop_on: cfg.stop_on.unwrap_or(StopOn::Limit),
        record_trace: cfg.trace.unwrap_or(false),
    };
    let s = iterate(&x, p, &opts)?;
    let out = OrbitOut {
        params: params_out(p),
        start: exact_point(&x, digits),
        start_regions: classify(&x, p)?,
        eps: ExactNum::new(&opts.eps, digits),
        cap: opts.cap,
        stop_on: opts.stop_on,
        steps_taken: s.steps_taken,
        stop_reason: s.stop_reason,
        first_hit_a: s.first_hit_a,
        first_hit_d: s.first_hit_d,
        final_point: exact_point(&s.final_point, digits),
        limit_estimate: s.limit_estimate.as_ref().map(|l| exact_point(l, digits)),
        partial_sum: ExactNum::new(&s.partial_sum, digits),
    };
    Ok(OrbitRun { out, trace: s.trace })
}

/// `orbit_summary.json`, plus `orbit_trace.csv` (and `orbit_trace.svg` for
/// three coordinates) with `--trace`.
pub fn orbit(cfg: &ExperimentConfig, out: &mut Emitter) -> CliResult<()> {
    let run = run_orbit(cfg)?;
    out.json("orbit_summary.json", "orbit", cfg, &run.out)?;
    if let Some(trace) = &run.trace {
        let n = trace.first().map_or(0, |x| x.dim());
        let mut header = vec!["step".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend((1..=n).map(|i| format!("x{i}_decimal")));
        let digits = cfg.digits();
        let rows: Vec<Vec<String>> = trace
            .iter()
            .enumerate()
            .map(|(k, x)| {
                let e = exact_point(x, digits);
                let mut r = vec![k.to_string()];
                r.extend(e.iter().map(|c| c.exact.clone()));
                r.extend(e.into_iter().map(|c| c.decimal));
                r
            })
            .collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        out.csv("orbit_trace.csv", &header, &rows)?;
        if n == 3 {
            out.text("orbit_trace.svg", &svg::render_trace(trace)?)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Quantiles {
    min: f64,
    p01: f64,
    median: f64,
    max: f64,
}

fn quantiles(mut v: Vec<f64>) -> Option<Quantiles> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let at = |f: f64| v[((v.len() - 1) as f64 * f).round() as usize];
    Some(Quantiles { min: v[0], p01: at(0.01), median: at(0.5), max: v[v.len() - 1] })
}

#[derive(Serialize)]
struct Recheck {
    samples: u64,
    cap: u64,
    absorbed_at_cap: u64,
    absorbed_at_recheck_cap: u64,
    /// Every sample absorbed under the smaller cap is absorbed at the same
    /// step under the larger one.
    consistent: bool,
}

#[derive(Serialize)]
struct ThetaOut {
    samples: u64,
    visited: u64,
    visited_fraction: f64,
    max_hitting_time: Option<u64>,
}

#[derive(Serialize)]
struct ReturnOut {
    samples: u64,
    in_gamma: u64,
    cap_exceeded: u64,
    mean_return_time: Option<f64>,
}

#[derive(Serialize)]
pub struct AbsorbOut {
    params: ParamsOut,
    region: StartRegion,
    samples: u64,
    cap: u64,
    seed: u64,
    bits: u32,
    absorbed: u64,
    absorbed_fraction: f64,
    /// Entries into `A` through a vanished subtracted coordinate.
    stalled_entries: u64,
    /// `D` coincides with `A` when `b = 2`.
    d_equals_a: bool,
    entered_d: u64,
    d_cap_exceeded: u64,
    closed_form_steps_checked: u64,
    /// Empirical distribution of `x_{a+2}` of the limit over `x_{a+b}` of the start.
    limit_tail_ratio: Option<Quantiles>,
    recheck: Option<Recheck>,
    alpha: Option<AlphaEstimate>,
    theta_visits: ThetaOut,
    return_times: ReturnOut,
}

struct AbsorbRun {
    out: AbsorbOut,
    report: AbsorptionReport,
    return_histogram: BTreeMap<u64, u64>,
}

fn run_absorb(cfg: &ExperimentConfig, p: MapParams) -> CliResult<AbsorbRun> {
    if p.b() < 2 {
        return Err(CliError::Usage("absorb needs b >= 2: A is a null set for b = 1".into()));
    }
    if p.is_variant() {
        return Err(CliError::Usage("absorb runs the standard map; use `variant` for variants".into()));
    }
    let seed = cfg.seed()?;
    let samples = cfg.samples();
    let cap = cfg.cap.unwrap_or(DEFAULT_ABSORB_CAP);
    let bits = cfg.bits();
    let mut ac = AbsorptionConfig::new(p, samples, cap, seed);
    ac.bits = bits;
    ac.region = cfg.region.unwrap_or(StartRegion::ComplementA);
    let report = absorption_experiment(&ac)?;

    let recheck = match cfg.recheck_cap {
        None => None,
        Some(rc) => {
            let n = cfg.recheck_samples.unwrap_or(samples / 10).min(samples);
            let mut rcfg = ac.clone();
            rcfg.n_samples = n;
            rcfg.cap = rc;
            let again = absorption_experiment(&rcfg)?;
            let first = &report.samples[..n as usize];
            let consistent = first
                .iter()
                .zip(&again.samples)
                .all(|(s, t)| s.first_hit_a.is_none() || s.first_hit_a == t.first_hit_a);
            Some(Recheck {
                samples: n,
                cap: rc,
                absorbed_at_cap: first.iter().filter(|s| s.first_hit_a.is_some()).count() as u64,
                absorbed_at_recheck_cap: again.absorbed,
                consistent,
            })
        }
    };

    let alpha_n = cfg.alpha_samples.unwrap_or(DEFAULT_ALPHA_SAMPLES);
    let alpha = (alpha_n > 0).then(|| alpha_estimate(p, alpha_n, seed, bits)).transpose()?;
    let tv = theta_visits(p, samples, cap, seed, bits)?;
    let rt = return_times(p, samples, cap, seed, bits)?;
    let returned: u64 = rt.histogram.values().sum();
    let mean_return = (returned > 0)
        .then(|| rt.histogram.iter().map(|(k, c)| (*k * *c) as f64).sum::<f64>() / returned as f64);

    let ratios: Vec<f64> = report.samples.iter().filter_map(|s| s.limit_tail_ratio).collect();
    let out = AbsorbOut {
        params: params_out(p),
        region: ac.region,
        samples,
        cap,
        seed,
        bits,
        absorbed: report.absorbed,
        absorbed_fraction: report.absorbed_fraction,
        stalled_entries: report.stalled_entries,
        d_equals_a: p.b() == 2,
        entered_d: report.entered_d,
        d_cap_exceeded: report.d_cap_exceeded,
        closed_form_steps_checked: report.closed_form_steps_checked,
        limit_tail_ratio: quantiles(ratios),
        recheck,
        alpha,
        theta_visits: ThetaOut {
            samples: tv.n_samples,
            visited: tv.visited,
            visited_fraction: tv.visited as f64 / tv.n_samples.max(1) as f64,
            max_hitting_time: tv.histogram.keys().next_back().copied(),
        },
        return_times: ReturnOut {
            samples: rt.n_samples,
            in_gamma: rt.in_gamma,
            cap_exceeded: rt.cap_exceeded,
            mean_return_time: mean_return,
        },
    };
    Ok(AbsorbRun { out, report, return_histogram: rt.histogram })
}

/// `absorb_summary.json` and the histogram/sample CSVs.
pub fn absorb(cfg: &ExperimentConfig, out: &mut Emitter) -> CliResult<()> {
    let run = run_absorb(cfg, cfg.params()?)?;
    out.json("absorb_summary.json", "absorb", cfg, &run.out)?;
    out.csv("absorb_histogram.csv", &["first_hit_a", "count"], &histogram_rows(&run.report.first_hit_a_histogram))?;
    out.csv("absorb_d_histogram.csv", &["steps_after_a", "count"], &histogram_rows(&run.report.d_after_a_histogram))?;
    let opt = |v: Option<u64>| v.map_or(String::new(), |k| k.to_string());
    let rows: Vec<Vec<String>> = run
        .report
        .samples
        .iter()
        .map(|s| {
            vec![
                s.sample_id.to_string(),
                opt(s.first_hit_a),
                opt(s.d_after_a),
                s.stalled_entry.to_string(),
                s.limit_tail_ratio.map_or(String::new(), |r| format!("{r:e}")),
            ]
        })
        .collect();
    out.csv(
        "absorb_samples.csv",
        &["sample", "first_hit_a", "d_after_a", "stalled_entry", "limit_tail_ratio"],
        &rows,
    )?;
    out.csv("absorb_return_times.csv", &["return_time", "count"], &histogram_rows(&run.return_histogram))?;
    Ok(())
}

#[derive(Serialize)]
struct LevelOut {
    depth: u32,
    cones: usize,
    complement_area: ExactNum,
    absorbed_area: Option<ExactNum>,
    decay_bound: ExactNum,
}

#[derive(Serialize)]
struct ConeOut {
    vectors: [[i64; 3]; 3],
    parent: Option<usize>,
    area: String,
}

#[derive(Serialize)]
pub struct ConesOut {
    depth: u32,
    a_area: ExactNum,
    levels: Vec<LevelOut>,
    checks: Vec<LevelCheck>,
    all_checks_pass: bool,
    /// Cones of each level up to `tree_max_depth`.
    tree: Vec<Vec<ConeOut>>,
}

fn run_cones(cfg: &ExperimentConfig) -> CliResult<(ConesOut, sublab::cones::SubdivisionTree)> {
    let depth = cfg.depth.unwrap_or(DEFAULT_DEPTH);
    if depth > MAX_DEPTH {
        return Err(sublab::Error::Resource(format!("depth {depth} exceeds the limit {MAX_DEPTH}")).into());
    }
    let digits = cfg.digits();
    let tree = complement_recursion(depth)?;
    let checks = verify_tree(&tree);
    let levels = (0..=depth)
        .map(|k| LevelOut {
            depth: k,
            cones: tree.levels[k as usize].len(),
            complement_area: ExactNum::new(&tree.complement_areas[k as usize], digits),
            absorbed_area: tree.absorbed_areas.get(k as usize).map(|a| ExactNum::new(a, digits)),
            decay_bound: ExactNum::new(&decay_bound(k), digits),
        })
        .collect();
    let tmax = cfg.tree_max_depth.unwrap_or(DEFAULT_TREE_MAX_DEPTH).min(depth);
    let cone_rows = (0..=tmax as usize)
        .map(|k| {
            tree.levels[k]
                .iter()
                .enumerate()
                .map(|(i, c)| ConeOut {
                    vectors: *c.vectors(),
                    parent: (k > 0).then(|| tree.parents[k][i]),
                    area: format_rational(&c.normalized_area()),
                })
                .collect()
        })
        .collect();
    let out = ConesOut {
        depth,
        a_area: ExactNum::new(&tree.a_area, digits),
        all_checks_pass: checks.iter().all(LevelCheck::all_ok),
        levels,
        checks,
        tree: cone_rows,
    };
    Ok((out, tree))
}

/// `cones_tree.json`, `cones_areas.csv` and one `cones_depth{k}.svg` per
/// depth up to `svg_max_depth`.
pub fn cones(cfg: &ExperimentConfig, out: &mut Emitter) -> CliResult<()> {
    let (res, tree) = run_cones(cfg)?;
    let rows: Vec<Vec<String>> = res
        .levels
        .iter()
        .map(|l| {
            let (ae, ad) = l
                .absorbed_area
                .as_ref()
                .map_or((String::new(), String::new()), |a| (a.exact.clone(), a.decimal.clone()));
            vec![
                l.depth.to_string(),
                l.cones.to_string(),
                l.complement_area.exact.clone(),
                l.complement_area.decimal.clone(),
                ae,
                ad,
                l.decay_bound.exact.clone(),
            ]
        })
        .collect();
    out.json("cones_tree.json", "cones", cfg, &res)?;
    out.csv(
        "cones_areas.csv",
        &[
            "depth",
            "cones",
            "complement_area",
            "complement_area_decimal",
            "absorbed_area",
            "absorbed_area_decimal",
            "decay_bound",
        ],
        &rows,
    )?;
    let smax = cfg.svg_max_depth.unwrap_or(DEFAULT_SVG_MAX_DEPTH).min(res.depth);
    for k in 0..=smax {
        out.text(&format!("cones_depth{k}.svg"), &svg::render_depth(&tree, k)?)?;
    }
    Ok(())
}

#[derive(Serialize)]
pub struct ConjugacyOut {
    samples: u64,
    steps: u64,
    seed: u64,
    max_den: i64,
    holds: u64,
    failures: Vec<u64>,
    /// Orbits that reached the boundary of the simplex before `steps`.
    reached_boundary: u64,
    steps_verified: u64,
    all_pass: bool,
}

fn run_conjugacy(cfg: &ExperimentConfig) -> CliResult<ConjugacyOut> {
    let seed = cfg.seed()?;
    let samples = cfg.samples();
    let steps = cfg.steps.unwrap_or(DEFAULT_STEPS);
    let max_den = cfg.max_den.unwrap_or(DEFAULT_MAX_DEN);
    if max_den < 1 {
        return Err(CliError::Usage("--max-den must be at least 1".into()));
    }
    let rows: Vec<sublab::Result<(bool, u64, bool)>> = (0..samples)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream_rng(seed, id);
            let x = random_rational_point(&mut rng, 2, max_den, 1);
            let o = conjugacy_check(&x, steps)?;
            Ok((o.holds, o.steps_verified, o.reached_boundary))
        })
        .collect();
    let mut out = ConjugacyOut {
        samples,
        steps,
        seed,
        max_den,
        holds: 0,
        failures: Vec::new(),
        reached_boundary: 0,
        steps_verified: 0,
        all_pass: false,
    };
    for (id, r) in rows.into_iter().enumerate() {
        let (holds, k, boundary) = r?;
        if holds {
            out.holds += 1;
        } else {
            out.failures.push(id as u64);
        }
        out.steps_verified += k;
        out.reached_boundary += u64::from(boundary);
    }
    out.all_pass = out.failures.is_empty();
    Ok(out)
}

pub fn conjugacy(cfg: &ExperimentConfig, out: &mut Emitter) -> CliResult<()> {
    let res = run_conjugacy(cfg)?;
    out.json("conjugacy.json", "conjugacy", cfg, &res)?;
    Ok(())
}

fn run_variant(cfg: &ExperimentConfig) -> CliResult<VariantReport> {
    let p = cfg.params()?;
    if !p.is_variant() {
        return Err(CliError::Usage("variant needs --variant-index i with i < a".into()));
    }
    let vc = VariantConfig {
        params: p,
        n_samples: cfg.samples(),
        cap: cfg.cap.unwrap_or(DEFAULT_ABSORB_CAP),
        seed: cfg.seed()?,
        bits: cfg.bits(),
    };
    Ok(variant_experiment(&vc)?)
}

/// `variant.json` and `variant_histogram.csv`.
pub fn variant(cfg: &ExperimentConfig, out: &mut Emitter) -> CliResult<()> {
    let r = run_variant(cfg)?;
    out.json("variant.json", "variant", cfg, &r)?;
    out.csv("variant_histogram.csv", &["first_hit_a", "count"], &histogram_rows(&r.first_hit_a_histogram))?;
    Ok(())
}

/// Runs every selected section and writes them together to `report.json`.
/// The absorb section uses the standard map for `(a, b)` even when a variant
/// index is set; the variant section requires one.
pub fn report(cfg: &ExperimentConfig, out: &mut Emitter) -> CliResult<()> {
    let sections = cfg.sections.clone().unwrap_or_default();
    if sections.is_empty() {
        return Err(CliError::Usage("report needs at least one section (--sections)".into()));
    }
    let mut bundle: BTreeMap<Section, Value> = BTreeMap::new();
    for s in sections {
        let v = match s {
            Section::Orbit => serde_json::to_value(run_orbit(cfg)?.out)?,
            Section::Absorb => serde_json::to_value(run_absorb(cfg, cfg.params()?.standard())?.out)?,
            Section::Cones => serde_json::to_value(run_cones(cfg)?.0)?,
            Section::Conjugacy => serde_json::to_value(run_conjugacy(cfg)?)?,
            Section::Variant => serde_json::to_value(run_variant(cfg)?)?,
        };
        bundle.insert(s, v);
    }
    out.json("report.json", "report", cfg, &bundle)?;
    Ok(())
}

