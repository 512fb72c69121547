//! Worst-loss `f#(x, a) = sup_b f(x, a, b)`, minimax value
//! `v#(x) = inf_a f#(x, a)` and their eps-solution sets.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::grid::{classify_runs, sample_set, ApproxSet, EdgeKind, GridSpec, Sampling};
use crate::multifunction::{Domain, Multifunction, Problem};
use crate::set::{Piece, SetDesc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Sup,
    Inf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Attained,
    DivergentPlusInf,
    DivergentMinusInf,
    /// The best point sits on the outermost sampled radius of an unbounded set.
    TruncationLimited,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Attained => "attained",
            Status::DivergentPlusInf => "divergent_plus_inf",
            Status::DivergentMinusInf => "divergent_minus_inf",
            Status::TruncationLimited => "truncation_limited",
        }
    }
}

/// Every evaluated point, sorted by (piece, abscissa). Reused by the solution sets.
#[derive(Debug, Clone)]
pub(crate) struct Trace {
    pub sampling: Sampling,
    pub points: Vec<(f64, usize, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtremumResult {
    pub value: ExtReal,
    /// Sampled points within `arg_tol` of `value`, merged into runs.
    pub witness: SetDesc,
    /// Best point found; absent for divergent searches.
    pub arg: Option<f64>,
    pub status: Status,
    pub truncation_radius_used: f64,
    pub grid_points_evaluated: usize,
    #[serde(skip)]
    pub(crate) trace: Option<Arc<Trace>>,
}

impl PartialEq for ExtremumResult {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
            && self.witness == other.witness
            && self.arg == other.arg
            && self.status == other.status
            && self.truncation_radius_used == other.truncation_radius_used
            && self.grid_points_evaluated == other.grid_points_evaluated
    }
}

fn score(mode: Mode, v: f64) -> f64 {
    match mode {
        Mode::Inf => v,
        Mode::Sup => -v,
    }
}

/// Difference of two scores; `inf - inf` counts as no change.
fn gain(from: f64, to: f64) -> f64 {
    let d = from - to;
    if d.is_nan() {
        0.0
    } else {
        d
    }
}

/// Extremum of `g` over `s`.
///
/// `g` is evaluated on the geometric sampling of `s`, the best few local
/// extrema are refined by a halving pattern search between their grid
/// neighbours, and for sets reaching past the outer radius the per-shell
/// running extremum decides divergence.
pub fn extremum_over_set<G>(mut g: G, s: &SetDesc, mode: Mode, grid: &GridSpec) -> Result<ExtremumResult>
where
    G: FnMut(f64) -> Result<ExtReal>,
{
    // Infinities map to IEEE infinities, which keeps the order; NaN never occurs.
    let sampling = sample_set(s, grid)?;
    let mut evaluated = 0usize;
    let mut values = Vec::with_capacity(sampling.samples.len());
    for smp in &sampling.samples {
        values.push(g(smp.at)?.to_f64());
        evaluated += 1;
    }
    let scores: Vec<f64> = values.iter().map(|v| score(mode, *v)).collect();
    let at = |i: usize| sampling.samples[i].at;

    // Samples are sorted, so the first strict minimum has the smallest abscissa.
    let mut best = 0;
    for (i, &sc) in scores.iter().enumerate().skip(1) {
        if sc < scores[best] {
            best = i;
        }
    }

    if sampling.truncated && scores[best] != f64::NEG_INFINITY && sampling.shells > 0 {
        let k = sampling.shells as usize;
        let mut per_shell = vec![f64::INFINITY; k + 1];
        for (smp, &sc) in sampling.samples.iter().zip(&scores) {
            let slot = &mut per_shell[smp.shell as usize];
            *slot = slot.min(sc);
        }
        for j in 1..=k {
            per_shell[j] = per_shell[j].min(per_shell[j - 1]);
        }
        let total = gain(per_shell[0], per_shell[k]);
        let last = gain(per_shell[k - 1], per_shell[k]);
        if total > grid.growth_cap && last > grid.growth_cap / k as f64 {
            let (value, status) = match mode {
                Mode::Sup => (ExtReal::PosInf, Status::DivergentPlusInf),
                Mode::Inf => (ExtReal::NegInf, Status::DivergentMinusInf),
            };
            let points = zip_points(&sampling, &values);
            return Ok(ExtremumResult {
                value,
                witness: SetDesc::Empty,
                arg: None,
                status,
                truncation_radius_used: sampling.outer_radius,
                grid_points_evaluated: evaluated,
                trace: Some(Arc::new(Trace { sampling, points })),
            });
        }
    }

    // Seeds: local extrema of the grid, best first.
    let ranges: Vec<std::ops::Range<usize>> = (0..sampling.pieces.len()).map(|p| sampling.piece_range(p)).collect();
    let seeds: Vec<usize> = if grid.seeded {
        let mut seeds = Vec::new();
        for r in &ranges {
            for i in r.clone() {
                let left_ok = i == r.start || scores[i] <= scores[i - 1];
                let right_ok = i + 1 == r.end || scores[i] <= scores[i + 1];
                if left_ok && right_ok {
                    seeds.push(i);
                }
            }
        }
        seeds.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]).then(at(i).total_cmp(&at(j))));
        seeds.truncate(4);
        seeds
    } else {
        vec![best]
    };

    let mut refined = Vec::new();
    let (mut arg, mut arg_value) = (at(best), values[best]);
    for &i in &seeds {
        let piece = sampling.samples[i].piece;
        let r = &ranges[piece];
        let x0 = at(i);
        let lo = if i > r.start { at(i - 1) } else { x0 };
        let hi = if i + 1 < r.end { at(i + 1) } else { x0 };
        let mut h = (x0 - lo).max(hi - x0) / 2.0;
        let (mut c, mut cv) = (x0, values[i]);
        if h > 0.0 {
            for _ in 0..grid.refinement_depth {
                let (mut nc, mut nv) = (c, cv);
                for cand in [c - h, c + h] {
                    if cand < lo || cand > hi || cand == c {
                        continue;
                    }
                    let v = g(cand)?.to_f64();
                    evaluated += 1;
                    if score(mode, v) < score(mode, nv) {
                        nc = cand;
                        nv = v;
                    }
                }
                c = nc;
                cv = nv;
                h /= 2.0;
            }
        }
        if c != x0 {
            refined.push((c, piece, cv));
        }
        let (sc, sa) = (score(mode, cv), score(mode, arg_value));
        if sc < sa || (sc == sa && c < arg) {
            arg = c;
            arg_value = cv;
        }
    }

    let truncated_edge = {
        let smp = sampling.samples[best];
        let r = &ranges[smp.piece];
        let sp = &sampling.pieces[smp.piece];
        (best + 1 == r.end && sp.hi_edge == EdgeKind::Truncated) || (best == r.start && sp.lo_edge == EdgeKind::Truncated)
    };
    let status = if truncated_edge && arg == at(best) {
        Status::TruncationLimited
    } else {
        Status::Attained
    };

    let mut points = zip_points(&sampling, &values);
    for q in refined {
        let pos = points.partition_point(|p| (p.1, p.0) < (q.1, q.0));
        if points.get(pos).is_none_or(|p| p.0 != q.0 || p.1 != q.1) {
            points.insert(pos, q);
        }
    }

    let witness = witness_runs(&points, arg_value, grid.arg_tol, arg);

    Ok(ExtremumResult {
        value: ExtReal::from_f64(arg_value)?,
        witness,
        arg: Some(arg),
        status,
        truncation_radius_used: sampling.outer_radius,
        grid_points_evaluated: evaluated,
        trace: Some(Arc::new(Trace { sampling, points })),
    })
}

fn zip_points(sampling: &Sampling, values: &[f64]) -> Vec<(f64, usize, f64)> {
    sampling.samples.iter().zip(values).map(|(s, v)| (s.at, s.piece, *v)).collect()
}

fn near(v: f64, target: f64, tol: f64) -> bool {
    v == target || (v - target).abs() <= tol
}

fn witness_runs(points: &[(f64, usize, f64)], value: f64, tol: f64, arg: f64) -> SetDesc {
    let mut pieces = vec![Piece::closed(arg, arg)];
    let mut i = 0;
    while i < points.len() {
        if !near(points[i].2, value, tol) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < points.len() && points[j + 1].1 == points[i].1 && near(points[j + 1].2, value, tol) {
            j += 1;
        }
        pieces.push(Piece::closed(points[i].0, points[j].0));
        i = j + 1;
    }
    SetDesc::from_pieces(pieces)
}

/// `f#(x, a) = sup { f(x, a, b) : b in Phi_B(x, a) }`.
pub fn worst_loss(prob: &Problem, x: f64, a: f64, grid: &GridSpec) -> Result<ExtremumResult> {
    prob.check_x(x)?;
    if !prob.phi_a_at(x)?.member(a) {
        return Err(Error::domain(format!("a = {a} is not in Phi_A({x})")));
    }
    let fiber = prob.phi_b_at(x, a)?;
    extremum_over_set(|b| prob.payoff(x, a, b), &fiber, Mode::Sup, grid)
}

/// `v#(x) = inf { f#(x, a) : a in Phi_A(x) }`; every `f#` is its own inner search.
pub fn minimax_value(prob: &Problem, x: f64, grid: &GridSpec) -> Result<ExtremumResult> {
    prob.check_x(x)?;
    let fiber = prob.phi_a_at(x)?;
    extremum_over_set(|a| Ok(worst_loss(prob, x, a, grid)?.value), &fiber, Mode::Inf, grid)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::InvalidConfig(format!("eps must be >= 0, got {eps}")));
    }
    Ok(())
}

/// Classifies the traced points with `keep` and bisects each change.
fn solution_from_trace<P>(trace: &Trace, mut keep: P, depth: u32) -> Result<ApproxSet>
where
    P: FnMut(f64, Option<ExtReal>) -> Result<bool>,
{
    let mut points = Vec::with_capacity(trace.points.len());
    for &(at, piece, v) in &trace.points {
        points.push((at, piece, keep(at, Some(ExtReal::from_f64(v)?))?));
    }
    let mut pred = |v: f64| keep(v, None);
    classify_runs(&trace.sampling, &points, &mut pred, depth)
}

/// `Phi*_A(x) ~ {a in Phi_A(x) : f#(x, a) <= v#(x) + eps}`.
pub fn solution_a(prob: &Problem, x: f64, eps: f64, grid: &GridSpec) -> Result<ApproxSet> {
    check_eps(eps)?;
    let v = minimax_value(prob, x, grid)?;
    solution_a_from(prob, x, eps, &v, grid)
}

/// [`solution_a`] reusing an already computed `minimax_value(prob, x, grid)`.
pub fn solution_a_from(prob: &Problem, x: f64, eps: f64, v: &ExtremumResult, grid: &GridSpec) -> Result<ApproxSet> {
    check_eps(eps)?;
    let whole = || -> Result<ApproxSet> {
        Ok(ApproxSet {
            set: prob.phi_a_at(x)?,
            extrapolated: false,
        })
    };
    let threshold = match v.value {
        ExtReal::PosInf => return whole(),
        _ if eps == f64::INFINITY => return whole(),
        ExtReal::NegInf => {
            return Ok(ApproxSet {
                set: v.witness.clone(),
                extrapolated: true,
            })
        }
        ExtReal::Finite(t) => ExtReal::Finite(t + eps),
    };
    let trace = v.trace.as_ref().ok_or_else(|| Error::InvalidConfig("extremum carries no trace".into()))?;
    solution_from_trace(
        trace,
        |a, known| {
            let fa = match known {
                Some(fa) => fa,
                None => worst_loss(prob, x, a, grid)?.value,
            };
            Ok(fa <= threshold)
        },
        grid.refinement_depth,
    )
}

/// `Phi*_B(x, a) ~ {b in Phi_B(x, a) : f(x, a, b) >= f#(x, a) - eps}`.
pub fn solution_b(prob: &Problem, x: f64, a: f64, eps: f64, grid: &GridSpec) -> Result<ApproxSet> {
    check_eps(eps)?;
    let w = worst_loss(prob, x, a, grid)?;
    let threshold = match w.value {
        ExtReal::Finite(t) if eps.is_finite() => ExtReal::Finite(t - eps),
        // Divergent f# or an unbounded eps: nothing is excluded.
        _ => {
            return Ok(ApproxSet {
                set: prob.phi_b_at(x, a)?,
                extrapolated: w.value == ExtReal::PosInf,
            })
        }
    };
    let trace = w.trace.as_ref().ok_or_else(|| Error::InvalidConfig("extremum carries no trace".into()))?;
    solution_from_trace(
        trace,
        |b, known| {
            let fb = match known {
                Some(fb) => fb,
                None => prob.payoff(x, a, b)?,
            };
            Ok(fb >= threshold)
        },
        grid.refinement_depth,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub v_sharp: ExtReal,
    pub status: Status,
    pub solution_a: SetDesc,
    pub extrapolated: bool,
}

/// `v#` and `Phi*_A` over `xs`, computed in parallel; rows keep the order of `xs`.
pub fn sweep(prob: &Problem, xs: &[f64], eps: f64, grid: &GridSpec) -> Result<Vec<SweepRow>> {
    check_eps(eps)?;
    xs.par_iter()
        .map(|&x| {
            let v = minimax_value(prob, x, grid)?;
            let sol = solution_a_from(prob, x, eps, &v, grid)?;
            Ok(SweepRow {
                x,
                v_sharp: v.value,
                status: v.status,
                solution_a: sol.set,
                extrapolated: sol.extrapolated,
            })
        })
        .collect()
}

/// `(x, a) -> f#(x, a)` as a point function.
pub fn fsharp_fn<'a>(prob: &'a Problem, grid: &'a GridSpec) -> impl Fn(&[f64]) -> Result<ExtReal> + Sync + 'a {
    move |p| Ok(worst_loss(prob, p[0], p[1], grid)?.value)
}

/// `x -> v#(x)` as a point function.
pub fn vsharp_fn<'a>(prob: &'a Problem, grid: &'a GridSpec) -> impl Fn(&[f64]) -> Result<ExtReal> + Sync + 'a {
    move |p| Ok(minimax_value(prob, p[0], grid)?.value)
}

/// The numerical `Phi*_A` as a multifunction on the state domain.
pub fn solution_a_multifunction(prob: &Problem, eps: f64, grid: &GridSpec) -> Multifunction {
    let (prob, grid) = (prob.clone(), grid.clone());
    Multifunction::new("solution_A", 1, Domain::Set(prob.x_domain.clone()), move |p| {
        Ok(solution_a(&prob, p[0], eps, &grid)?.set)
    })
}

/// Memoized `minimax_value` keyed by the bits of `x`, so the checks on `v#`
/// and `Phi*_A` of one problem share their evaluations.
pub struct MinimaxCache {
    prob: Problem,
    grid: GridSpec,
    cache: Mutex<HashMap<u64, Arc<ExtremumResult>>>,
}

impl MinimaxCache {
    pub fn new(prob: &Problem, grid: &GridSpec) -> Arc<Self> {
        Arc::new(MinimaxCache {
            prob: prob.clone(),
            grid: grid.clone(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn minimax(&self, x: f64) -> Result<Arc<ExtremumResult>> {
        if let Some(r) = self.cache.lock().unwrap().get(&x.to_bits()) {
            return Ok(r.clone());
        }
        let r = Arc::new(minimax_value(&self.prob, x, &self.grid)?);
        self.cache.lock().unwrap().insert(x.to_bits(), r.clone());
        Ok(r)
    }

    pub fn vsharp(&self, x: f64) -> Result<ExtReal> {
        Ok(self.minimax(x)?.value)
    }

    pub fn solution_a(&self, x: f64, eps: f64) -> Result<ApproxSet> {
        let v = self.minimax(x)?;
        solution_a_from(&self.prob, x, eps, &v, &self.grid)
    }

    /// Like [`solution_a_multifunction`], backed by this cache.
    pub fn solution_a_multifunction(self: &Arc<Self>, eps: f64) -> Multifunction {
        let me = self.clone();
        Multifunction::new("solution_A", 1, Domain::Set(self.prob.x_domain.clone()), move |p| {
            Ok(me.solution_a(p[0], eps)?.set)
        })
    }
}

/// The numerical `Phi*_B` as a multifunction on the graph of `Phi_A`.
pub fn solution_b_multifunction(prob: &Problem, eps: f64, grid: &GridSpec) -> Multifunction {
    let parent = prob.phi_a.clone();
    let (prob, grid) = (prob.clone(), grid.clone());
    Multifunction::new("solution_B", 2, Domain::GraphOf(parent), move |p| {
        Ok(solution_b(&prob, p[0], p[1], eps, &grid)?.set)
    })
}
