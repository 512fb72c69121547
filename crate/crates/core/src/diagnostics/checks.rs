use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimator::liminf_estimate;
use super::probes::{generate_probes, Companion, ProbeConfig, SequenceProbe};
use super::verdict::{aggregate, ProbeOutcome, Property, Term, Verdict, Witness};
use crate::engine::{extremum_over_set, Mode};
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::grid::{sample_set, GridSpec};
use crate::multifunction::{Multifunction, Problem};
use crate::set::SetDesc;

pub type PointFn<'a> = &'a (dyn Fn(&[f64]) -> Result<ExtReal> + Sync);
pub type GraphFn<'a> = &'a (dyn Fn(&[f64], f64) -> Result<ExtReal> + Sync);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Semi {
    Lower,
    Upper,
}

/// The level-set threshold `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelCap {
    pub lambda: f64,
}

impl LevelCap {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() {
            Ok(LevelCap { lambda })
        } else {
            Err(Error::InvalidConfig(format!("level cap must be finite, got {lambda}")))
        }
    }
}

/// Where probe points are allowed to go.
#[derive(Debug, Clone)]
pub enum Region {
    Whole,
    /// One-dimensional points in a set.
    Set(SetDesc),
    /// Points `(p, y)` with `y in m(p)`.
    Graph(Arc<Multifunction>),
    /// Points in the domain of `m`.
    DomainOf(Arc<Multifunction>),
}

impl Region {
    pub fn contains(&self, p: &[f64]) -> Result<bool> {
        match self {
            Region::Whole => Ok(true),
            Region::Set(s) => Ok(p.len() == 1 && s.member(p[0])),
            Region::Graph(m) => {
                if p.len() != m.arity + 1 {
                    return Ok(false);
                }
                let (head, y) = p.split_at(m.arity);
                Ok(m.in_domain(head)? && m.eval(head)?.member(y[0]))
            }
            Region::DomainOf(m) => m.in_domain(p),
        }
    }
}

fn norm_dist(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn finite_or(v: f64, fallback: f64) -> f64 {
    if v.is_nan() {
        fallback
    } else {
        v
    }
}

/// Probes whose tail stays inside `region`; the standard family always
/// contains directions that leave one-sided domains.
pub fn feasible_probes(probes: Vec<SequenceProbe>, region: &Region) -> Result<Vec<SequenceProbe>> {
    let mut out = Vec::new();
    for p in probes {
        let mut ok = true;
        for n in p.tail() {
            if !region.contains(&p.term(n))? {
                ok = false;
                break;
            }
        }
        if ok {
            out.push(p);
        }
    }
    Ok(out)
}

/// [`generate_probes`] restricted to [`feasible_probes`].
pub fn standard_probes(anchor: &[f64], cfg: &ProbeConfig, region: &Region) -> Result<Vec<SequenceProbe>> {
    feasible_probes(generate_probes(anchor, cfg), region)
}

fn tail_points(probe: &SequenceProbe, region: &Region) -> Result<Vec<(usize, Vec<f64>)>> {
    probe.validate()?;
    let mut out = Vec::new();
    for n in probe.tail() {
        let p = probe.term(n);
        if !region.contains(&p)? {
            return Err(Error::domain(format!("probe `{}` leaves the domain at term {n}: {p:?}", probe.label)));
        }
        out.push((n, p));
    }
    Ok(out)
}

/// Lower mode: a counterexample is a probe whose estimated `liminf f(s_n)`
/// falls more than `tol` below `f(s)`. Upper mode is Lower mode on `-f`.
pub fn check_function_semicontinuity(
    f: PointFn,
    region: &Region,
    s: &[f64],
    mode: Semi,
    probes: &[SequenceProbe],
    tol: f64,
) -> Result<Verdict> {
    match mode {
        Semi::Lower => fn_lower(f, region, s, probes, tol, Property::FnLsc),
        Semi::Upper => {
            let neg = |p: &[f64]| Ok(-f(p)?);
            fn_lower(&neg, region, s, probes, tol, Property::FnUsc)
        }
    }
}

fn fn_lower(f: PointFn, region: &Region, s: &[f64], probes: &[SequenceProbe], tol: f64, property: Property) -> Result<Verdict> {
    if !region.contains(s)? {
        return Err(Error::domain(format!("anchor {s:?} is outside the region")));
    }
    let fs = f(s)?.to_f64();
    let results = probes
        .par_iter()
        .map(|probe| {
            let pts = tail_points(probe, region)?;
            let mut ts = Vec::with_capacity(pts.len());
            let mut ys = Vec::with_capacity(pts.len());
            let mut terms = Vec::with_capacity(pts.len());
            for (n, p) in pts {
                let y = f(&p)?.to_f64();
                ts.push(norm_dist(&p, s));
                ys.push(y);
                terms.push(Term {
                    index: n,
                    margin: finite_or(fs - y, 0.0),
                    point: p,
                    value: y,
                });
            }
            let est = liminf_estimate(&ts, &ys);
            let deficit = finite_or(fs - est, 0.0);
            Ok(ProbeOutcome {
                counterexample: deficit > tol,
                witness: Witness {
                    probe: probe.materialize(None),
                    target: None,
                    terms,
                    estimate: est,
                    margin: deficit,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(property, results, probes.len(), tol, Vec::new()))
}

/// Points of `s` cut to `radius`: a `step` grid on each piece plus its endpoints.
fn sample_points(s: &SetDesc, radius: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for p in s.truncate(radius).pieces() {
        out.push(p.lo);
        let mut k = 1.0;
        while p.lo + k * step < p.hi {
            out.push(p.lo + k * step);
            k += 1.0;
        }
        if p.hi > p.lo {
            out.push(p.hi);
        }
    }
    out
}

/// For each target `b in m(p)` and probe `p_n -> p`, a counterexample is a
/// probe along which `dist(m(p_n), b)` stays at least `tol` away from 0.
/// Without explicit `targets`, `m(p)` is sampled on the grid's base window.
pub fn check_multifunction_lsc(
    m: &Arc<Multifunction>,
    p: &[f64],
    targets: Option<&[f64]>,
    probes: &[SequenceProbe],
    grid: &GridSpec,
    tol: f64,
) -> Result<Verdict> {
    grid.validate()?;
    let fiber = m.eval(p)?;
    let targets: Vec<f64> = match targets {
        Some(t) => t.to_vec(),
        None => sample_points(&fiber, grid.truncation_radius, grid.step),
    };
    for &b in &targets {
        if fiber.dist(b) != ExtReal::ZERO {
            return Err(Error::domain(format!("target {b} is not in {}({p:?}) = {fiber}", m.name)));
        }
    }
    let region = Region::DomainOf(m.clone());
    let results = probes
        .par_iter()
        .map(|probe| {
            let pts = tail_points(probe, &region)?;
            let ts: Vec<f64> = pts.iter().map(|(_, q)| norm_dist(q, p)).collect();
            let fibers = pts.iter().map(|(_, q)| m.eval(q)).collect::<Result<Vec<_>>>()?;
            let mut worst: Option<ProbeOutcome> = None;
            for &b in &targets {
                let ds: Vec<f64> = fibers.iter().map(|f| f.dist(b).to_f64()).collect();
                let est = liminf_estimate(&ts, &ds);
                if worst.as_ref().is_none_or(|w| est > w.witness.margin) {
                    let terms = pts
                        .iter()
                        .zip(&ds)
                        .map(|((n, q), &d)| Term {
                            index: *n,
                            point: q.clone(),
                            value: d,
                            margin: d,
                        })
                        .collect();
                    worst = Some(ProbeOutcome {
                        counterexample: est >= tol,
                        witness: Witness {
                            probe: probe.materialize(None),
                            target: Some(vec![b]),
                            terms,
                            estimate: est,
                            margin: est,
                        },
                    });
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut notes = Vec::new();
    if !fiber.is_bounded() {
        notes.push(format!("targets sampled from {} cut at radius {}", fiber, grid.truncation_radius));
    }
    Ok(aggregate(Property::MfLsc, results.into_iter().flatten().collect(), probes.len(), tol, notes))
}

/// `sup { dist(y, target) : y in s }`, exact for finite unions of intervals.
pub fn excess(s: &SetDesc, target: &SetDesc) -> f64 {
    let mut candidates = Vec::new();
    for p in s.pieces() {
        candidates.push(p.lo);
        candidates.push(p.hi);
    }
    let tp = target.pieces();
    for w in tp.windows(2) {
        let mid = 0.5 * (w[0].hi + w[1].lo);
        if s.member(mid) {
            candidates.push(mid);
        }
    }
    candidates
        .into_iter()
        .filter(|v| v.is_finite())
        .map(|v| target.dist(v).to_f64())
        .fold(0.0, f64::max)
}

/// A counterexample is a probe along which the excess of `m(p_n)` over `m(p)`
/// stays at least `tol`. Fibers are cut at the grid's outer radius.
pub fn check_multifunction_usc(
    m: &Arc<Multifunction>,
    p: &[f64],
    probes: &[SequenceProbe],
    grid: &GridSpec,
    tol: f64,
) -> Result<Verdict> {
    grid.validate()?;
    let radius = grid.truncation_radius * 2f64.powi(grid.tail_doublings as i32);
    let fiber = m.eval(p)?;
    let region = Region::DomainOf(m.clone());
    let results = probes
        .par_iter()
        .map(|probe| {
            let pts = tail_points(probe, &region)?;
            let mut ts = Vec::new();
            let mut es = Vec::new();
            let mut terms = Vec::new();
            let mut truncated = false;
            for (n, q) in pts {
                let fq = m.eval(&q)?;
                let cut = fq.truncate(radius);
                truncated |= cut != fq;
                let e = excess(&cut, &fiber);
                ts.push(norm_dist(&q, p));
                es.push(e);
                terms.push(Term {
                    index: n,
                    point: q,
                    value: e,
                    margin: e,
                });
            }
            let est = liminf_estimate(&ts, &es);
            Ok((
                ProbeOutcome {
                    counterexample: est >= tol,
                    witness: Witness {
                        probe: probe.materialize(None),
                        target: None,
                        terms,
                        estimate: est,
                        margin: est,
                    },
                },
                truncated,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut notes = Vec::new();
    if results.iter().any(|(_, t)| *t) {
        notes.push(format!("some probe fibers were cut at radius {radius}; excess measured on the cut fibers"));
    }
    Ok(aggregate(Property::MfUsc, results.into_iter().map(|(r, _)| r).collect(), probes.len(), tol, notes))
}

/// The companion `a_n` maximizing `dist(Phi_B(x_n, a), b)` over the sampled
/// `Phi_A(x_n)`; ties go to the smallest `a`.
fn adversarial_companion(prob: &Problem, x: f64, b: f64, grid: &GridSpec) -> Result<f64> {
    let sampling = sample_set(&prob.phi_a_at(x)?, grid)?;
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for s in &sampling.samples {
        let d = prob.phi_b_at(x, s.at)?.dist(b).to_f64();
        if d > best.0 {
            best = (d, s.at);
        }
    }
    Ok(best.1)
}

fn companions(prob: &Problem, probe: &SequenceProbe, anchor: &[f64], grid: &GridSpec) -> Result<Vec<f64>> {
    let (x, a, b) = (anchor[0], anchor[1], anchor[2]);
    let rule = probe.companion.clone().unwrap_or(Companion::Constant);
    (1..=probe.len)
        .map(|n| {
            let xn = probe.term(n)[0];
            Ok(match &rule {
                Companion::Fixed { values } => values[n - 1],
                Companion::Constant => a,
                Companion::InverseOffset { scale } => scale / (xn - x).abs(),
                Companion::Adversarial => adversarial_companion(prob, xn, b, grid)?,
            })
        })
        .collect()
}

/// Probes along `x` for an A-lsc check: each standard direction/rate with the
/// `hints` first, then the constant and adversarial companions.
pub fn a_lsc_probes(prob: &Problem, x: f64, cfg: &ProbeConfig, hints: &[Companion]) -> Result<Vec<SequenceProbe>> {
    let base = standard_probes(&[x], cfg, &Region::Set(prob.x_domain.clone()))?;
    let mut out = Vec::new();
    for probe in base {
        let rules = hints.iter().cloned().chain([Companion::Constant, Companion::Adversarial]);
        for c in rules {
            let tag = match &c {
                Companion::Fixed { .. } => "fixed",
                Companion::Constant => "constant",
                Companion::InverseOffset { .. } => "inverse-offset",
                Companion::Adversarial => "adversarial",
            };
            let label = format!("{} / a_n {tag}", probe.label);
            out.push(probe.clone().with_companion(c).with_label(label));
        }
    }
    Ok(out)
}

/// Definition-style A-lsc at `anchor = (x, a, b)`: along `x_n -> x` with any
/// feasible `a_n`, some `b_n in Phi_B(x_n, a_n)` must approach `b`. A probe is a
/// counterexample when `dist(Phi_B(x_n, a_n), b)` stays at least `tol`.
pub fn check_a_lsc(prob: &Problem, anchor: [f64; 3], probes: &[SequenceProbe], grid: &GridSpec, tol: f64) -> Result<Verdict> {
    grid.validate()?;
    let [x, a, b] = anchor;
    prob.check_x(x)?;
    if !prob.phi_a_at(x)?.member(a) {
        return Err(Error::domain(format!("a = {a} is not in Phi_A({x})")));
    }
    if prob.phi_b_at(x, a)?.dist(b) != ExtReal::ZERO {
        return Err(Error::domain(format!("b = {b} is not in Phi_B({x}, {a})")));
    }
    let region = Region::Set(prob.x_domain.clone());
    let results = probes
        .par_iter()
        .map(|probe| {
            let pts = tail_points(probe, &region)?;
            let comp = companions(prob, probe, &anchor, grid)?;
            let mut ts = Vec::new();
            let mut ds = Vec::new();
            let mut terms = Vec::new();
            for (n, q) in pts {
                let (xn, an) = (q[0], comp[n - 1]);
                if !prob.phi_a_at(xn)?.member(an) {
                    return Err(Error::domain(format!(
                        "probe `{}`: companion a_{n} = {an} is not in Phi_A({xn})",
                        probe.label
                    )));
                }
                let d = prob.phi_b_at(xn, an)?.dist(b).to_f64();
                ts.push((xn - x).abs());
                ds.push(d);
                terms.push(Term {
                    index: n,
                    point: vec![xn, an],
                    value: d,
                    margin: d,
                });
            }
            let est = liminf_estimate(&ts, &ds);
            Ok(ProbeOutcome {
                counterexample: est >= tol,
                witness: Witness {
                    probe: probe.materialize(Some(comp)),
                    target: Some(anchor.to_vec()),
                    terms,
                    estimate: est,
                    margin: est,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(Property::ALsc, results, probes.len(), tol, Vec::new()))
}

fn spread(v: Vec<f64>, k: usize) -> Vec<f64> {
    if v.len() <= k {
        return v;
    }
    (0..k).map(|i| v[i * (v.len() - 1) / (k - 1)]).collect()
}

/// Sequence criterion for K-inf-compactness of `u` on the graph of `m`.
///
/// (i) `u` is checked for lower semicontinuity at a few graph points above
/// the anchor, within a quarter of the base radius. (ii) Along each probe
/// `x_n -> x`, two sequences in the
/// sub-level sets `{y in m(x_n) : u(x_n, y) <= lambda}` are followed: the
/// minimizers and the farthest sampled points. Either escaping past the base
/// radius with nondecreasing magnitude, or staying at distance `>= tol` from
/// `m(x)`, is a counterexample.
pub fn check_k_inf_compact(
    u: GraphFn,
    m: &Arc<Multifunction>,
    anchor: &[f64],
    cap: LevelCap,
    probes: &[SequenceProbe],
    grid: &GridSpec,
    tol: f64,
) -> Result<Verdict> {
    grid.validate()?;
    let fiber = m.eval(anchor)?;
    let region = Region::DomainOf(m.clone());

    // (i)
    let graph = Region::Graph(m.clone());
    // Far out in the fiber a 128-term probe can be too short to resolve
    // features whose scale grows with |y|, so stay near the fiber's core.
    let ys = spread(sample_points(&fiber, grid.truncation_radius / 4.0, grid.step), 5);
    let joint = |p: &[f64]| {
        let (head, y) = p.split_at(p.len() - 1);
        u(head, y[0])
    };
    for y in ys {
        let mut point = anchor.to_vec();
        point.push(y);
        let fam = standard_probes(&point, &ProbeConfig { len: probes.first().map_or(128, |p| p.len), ..ProbeConfig::default() }, &graph)?;
        let v = check_function_semicontinuity(&joint, &graph, &point, Semi::Lower, &fam, tol)?;
        if v.is_counterexample() {
            let mut v = v;
            v.property = Property::KInfCompact;
            v.probes_tested += probes.len();
            v.notes.push(format!("condition (i): u is not lower semi-continuous at {point:?}"));
            return Ok(v);
        }
    }

    // (ii)
    let results = probes
        .par_iter()
        .map(|probe| {
            let pts = tail_points(probe, &region)?;
            let mut argmins = Vec::new();
            let mut farthest = Vec::new();
            for (n, q) in &pts {
                let fq = m.eval(q)?;
                let r = extremum_over_set(|y| u(q, y), &fq, Mode::Inf, grid)?;
                let trace = r.trace.as_ref().expect("extremum keeps its trace");
                let mut far: Option<(f64, f64)> = None;
                for &(y, _, v) in &trace.points {
                    if v <= cap.lambda && far.is_none_or(|(fy, _)| y.abs() > fy.abs()) {
                        far = Some((y, v));
                    }
                }
                if let (Some(y), true) = (r.arg, r.value <= ExtReal::Finite(cap.lambda)) {
                    argmins.push((*n, q.clone(), y, r.value.to_f64()));
                }
                if let Some((y, v)) = far {
                    farthest.push((*n, q.clone(), y, v));
                }
            }
            let mut outcomes = Vec::new();
            for seq in [&argmins, &farthest] {
                if seq.len() != pts.len() || seq.is_empty() {
                    continue;
                }
                let terms: Vec<Term> = seq
                    .iter()
                    .map(|(n, q, y, v)| {
                        let mut point = q.clone();
                        point.push(*y);
                        Term {
                            index: *n,
                            point,
                            value: *v,
                            margin: y.abs(),
                        }
                    })
                    .collect();
                let mags: Vec<f64> = seq.iter().map(|s| s.2.abs()).collect();
                let last = *mags.last().unwrap();
                let escapes = mags.windows(2).all(|w| w[1] >= w[0]) && last > grid.truncation_radius;
                let (counterexample, est) = if escapes {
                    (true, last)
                } else {
                    let ts: Vec<f64> = seq.iter().map(|s| norm_dist(&s.1, anchor)).collect();
                    let ds: Vec<f64> = seq.iter().map(|s| fiber.dist(s.2).to_f64()).collect();
                    let est = liminf_estimate(&ts, &ds);
                    (est >= tol, est)
                };
                outcomes.push(ProbeOutcome {
                    counterexample,
                    witness: Witness {
                        probe: probe.materialize(None),
                        target: None,
                        terms,
                        estimate: est,
                        margin: est,
                    },
                });
            }
            Ok(outcomes)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut v = aggregate(Property::KInfCompact, results.into_iter().flatten().collect(), probes.len(), tol, Vec::new());
    if v.is_counterexample() {
        v.notes.push(format!("condition (ii): sub-level points at lambda = {} do not cluster in m(x)", cap.lambda));
    }
    Ok(v)
}

/// For each cap, the sub-level set of `f` on the geometric sampling of `s`.
/// A counterexample is a sub-level point in every radius shell of an
/// unbounded `s`. Closedness is only looked at next to open endpoints of `s`
/// and is reported in the notes.
pub fn check_inf_compact(f: &(dyn Fn(f64) -> Result<ExtReal> + Sync), s: &SetDesc, caps: &[LevelCap], scan: &GridSpec) -> Result<Verdict> {
    let sampling = sample_set(s, scan)?;
    let values = sampling.samples.iter().map(|smp| f(smp.at)).collect::<Result<Vec<_>>>()?;
    let mut results = Vec::new();
    let mut notes = Vec::new();
    for cap in caps {
        let level = ExtReal::Finite(cap.lambda);
        let mut per_shell: Vec<Option<(f64, f64)>> = vec![None; sampling.shells as usize + 1];
        for (smp, v) in sampling.samples.iter().zip(&values) {
            if *v <= level {
                let slot = &mut per_shell[smp.shell as usize];
                if slot.is_none_or(|(y, _)| smp.at.abs() > y.abs()) {
                    *slot = Some((smp.at, v.to_f64()));
                }
            }
        }
        for (i, smp) in sampling.samples.iter().enumerate() {
            let r = sampling.piece_range(smp.piece);
            let piece = &sampling.pieces[smp.piece].piece;
            let at_open_end = (i == r.start && !piece.lo_closed && piece.lo.is_finite()) || (i + 1 == r.end && !piece.hi_closed && piece.hi.is_finite());
            if at_open_end && values[i] <= level {
                notes.push(format!("lambda = {}: sub-level set reaches the open endpoint near {} and may not be closed", cap.lambda, smp.at));
            }
        }
        let unbounded = sampling.truncated && sampling.shells > 0 && per_shell.iter().all(Option::is_some);
        let pts: Vec<(f64, f64)> = per_shell.iter().flatten().cloned().collect();
        if pts.is_empty() {
            continue;
        }
        let probe = SequenceProbe::custom(format!("radial scan, lambda = {}", cap.lambda), vec![0.0], pts.iter().map(|p| vec![p.0]).collect());
        let terms = pts
            .iter()
            .enumerate()
            .map(|(k, (y, v))| Term {
                index: k,
                point: vec![*y],
                value: *v,
                margin: y.abs(),
            })
            .collect();
        let far = pts.last().map_or(0.0, |p| p.0.abs());
        results.push(ProbeOutcome {
            counterexample: unbounded,
            witness: Witness {
                probe,
                target: None,
                terms,
                estimate: far,
                margin: far,
            },
        });
    }
    Ok(aggregate(Property::InfCompact, results, caps.len(), 0.0, notes))
}
