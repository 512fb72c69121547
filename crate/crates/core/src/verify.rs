//! Regression batteries behind `pminimax verify`.
//!
//! The example1 battery is a thinned-out copy of the acceptance suite that
//! finishes in well under a minute: coarser grids and fewer anchors, same
//! tolerances.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use crate::diagnostics::{
    a_lsc_probes, check_a_lsc, check_function_semicontinuity, check_k_inf_compact, check_multifunction_lsc, check_multifunction_usc,
    standard_probes, Companion, LevelCap, ProbeConfig, Region, Semi, SequenceProbe, Verdict,
};
use crate::dsl;
use crate::engine::{fsharp_fn, solution_b_multifunction, worst_loss, MinimaxCache};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::library::{self, NamedProblem};
use crate::multifunction::{swap_multifunction, swap_objective, Problem};

const TOL: f64 = 1e-4;

pub const EXAMPLE1_SOURCE: &str = include_str!("../problems/example1.mmx");
pub const CONTROL_COMPACT_SOURCE: &str = include_str!("../problems/control_compact.mmx");
pub const CONTROL_INDEPENDENT_SOURCE: &str = include_str!("../problems/control_independent.mmx");

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub results: Vec<CriterionResult>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn first_failure(&self) -> Option<&CriterionResult> {
        self.results.iter().find(|r| !r.passed)
    }
}

/// `Ok(detail)` passes, `Err(detail)` fails; errors from the library fail too.
type Check = Result<std::result::Result<String, String>>;

fn harmonic(anchor: f64, len: usize) -> SequenceProbe {
    SequenceProbe::harmonic(vec![anchor], vec![1.0], len).with_label("x_n = 1/n")
}

fn grid_points(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn all_clear(vs: &[Verdict]) -> std::result::Result<String, String> {
    match vs.iter().find(|v| v.is_counterexample()) {
        Some(v) => Err(v.summary()),
        None => Ok(format!("{} checks without counterexample", vs.len())),
    }
}

fn worst_loss_oracle(np: &NamedProblem, grid: &GridSpec) -> Check {
    let mut worst = (0.0f64, 0.0, 0.0);
    for x in grid_points(-1.0, 2.0, 0.05) {
        for a in grid_points(0.0, 10.0, 0.25) {
            let got = worst_loss(&np.problem, x, a, grid)?.value.to_f64();
            let err = (got - (np.oracles.fsharp)(x, a)).abs();
            if !(err <= worst.0) {
                worst = (err, x, a);
            }
        }
    }
    let detail = format!("max |f# - oracle| = {:.2e} at ({}, {})", worst.0, worst.1, worst.2);
    Ok(if worst.0 <= 1e-6 { Ok(detail) } else { Err(detail) })
}

fn minimax_oracle(np: &NamedProblem, cache: &MinimaxCache) -> Check {
    let xs: Vec<f64> = grid_points(-1.0, 2.0, 0.1).into_iter().filter(|x| x.abs() > 1e-9).collect();
    for &x in &xs {
        let v = cache.vsharp(x)?.to_f64();
        if (v - (np.oracles.vsharp)(x)).abs() > 1e-3 {
            return Ok(Err(format!("v#({x}) = {v}, oracle {}", (np.oracles.vsharp)(x))));
        }
        let sol = cache.solution_a(x, 1e-3)?.set;
        let target = (np.oracles.solution_a)(x);
        let (lo, hi) = sol.bounds().ok_or(Error::EmptySet)?;
        let (tlo, thi) = target.bounds().ok_or(Error::EmptySet)?;
        if !(lo <= tlo && thi <= hi && hi - lo <= 0.05) {
            return Ok(Err(format!("Phi*_A({x}) ~ {sol}, oracle {target}")));
        }
    }
    Ok(Ok(format!("{} states", xs.len())))
}

fn vsharp_discontinuity(prob: &Problem, cache: &Arc<MinimaxCache>) -> Check {
    let c = cache.clone();
    let v = move |p: &[f64]| c.vsharp(p[0]);
    let region = Region::Set(prob.x_domain.clone());
    let probe = [harmonic(0.0, 128)];
    let lower = check_function_semicontinuity(&v, &region, &[0.0], Semi::Lower, &probe, TOL)?;
    let upper = check_function_semicontinuity(&v, &region, &[0.0], Semi::Upper, &probe, TOL)?;
    let margin = lower.witness.as_ref().map_or(0.0, |w| w.margin);
    if lower.is_counterexample() && margin >= 0.9 && !upper.is_counterexample() {
        Ok(Ok(format!("lsc margin {margin:.4}; usc holds")))
    } else {
        Ok(Err(format!("{} / {}", lower.summary(), upper.summary())))
    }
}

fn a_lsc_failure(np: &NamedProblem, grid: &GridSpec) -> Check {
    let (anchor, shipped) = library::example1_witness();
    let adversarial = harmonic(0.0, 128).with_companion(Companion::Adversarial);
    for probe in [shipped, adversarial] {
        let v = check_a_lsc(&np.problem, anchor, std::slice::from_ref(&probe), grid, TOL)?;
        let w = match &v.witness {
            Some(w) if v.is_counterexample() => w,
            _ => return Ok(Err(format!("`{}`: {}", probe.label, v.summary()))),
        };
        if let Some(t) = w.terms.iter().find(|t| t.margin < 1.0) {
            return Ok(Err(format!("`{}`: term {} has margin {}", probe.label, t.index, t.margin)));
        }
    }
    Ok(Ok("shipped and adversarial companions both fail with margins >= 1".into()))
}

/// Deterministic points `(x, a)` of the graph of `Phi_A`.
fn graph_anchors(prob: &Problem, k: usize) -> Result<Vec<[f64; 2]>> {
    let xs = [-1.5, -0.5, 0.0, 0.3, 0.5, 0.8, 1.0, 1.5, 2.0, 0.25];
    let as_ = [0.0, 0.4, 1.0, 2.5, 0.75, 4.0, 0.2];
    let mut out = Vec::new();
    let mut i = 0;
    while out.len() < k && i < 4 * k + 20 {
        let (x, a) = (xs[i % xs.len()], as_[(i * 3) % as_.len()]);
        if prob.phi_a_at(x)?.member(a) {
            out.push([x, a]);
        }
        i += 1;
    }
    Ok(out)
}

fn phi_b_lsc(prob: &Problem, anchors: usize, grid: &GridSpec) -> Check {
    let cfg = ProbeConfig::default();
    let region = Region::DomainOf(prob.phi_b.clone());
    let mut vs = Vec::new();
    for p in graph_anchors(prob, anchors)? {
        let probes = standard_probes(&p, &cfg, &region)?;
        vs.push(check_multifunction_lsc(&prob.phi_b, &p, None, &probes, grid, TOL)?);
    }
    Ok(all_clear(&vs))
}

fn k_inf_split(prob: &Problem, swap_anchors: &[[f64; 2]], grid: &GridSpec) -> Check {
    let f = fsharp_fn(prob, grid);
    let u = |p: &[f64], a: f64| f(&[p[0], a]);
    let cap = LevelCap::new(0.5)?;
    let v = check_k_inf_compact(&u, &prob.phi_a, &[0.0], cap, &[harmonic(0.0, 128)], grid, TOL)?;
    let zero = v.witness.as_ref().is_some_and(|w| w.terms.iter().all(|t| t.value.abs() <= 1e-6));
    if !(v.is_counterexample() && zero) {
        return Ok(Err(format!("f#: {}", v.summary())));
    }
    let m = Arc::new(swap_multifunction(prob, grid));
    let obj = swap_objective(prob);
    let su = |p: &[f64], a: f64| obj(p[0], p[1], a);
    let region = Region::DomainOf(m.clone());
    let mut vs = Vec::new();
    for p in swap_anchors {
        let probes = standard_probes(p, &ProbeConfig::default(), &region)?;
        vs.push(check_k_inf_compact(&su, &m, p, cap, &probes, grid, TOL)?);
    }
    Ok(all_clear(&vs).map(|s| format!("f# fails with u = 0 along (1/n, n); swapped problem: {s}")))
}

fn solution_escape(cache: &Arc<MinimaxCache>, grid: &GridSpec) -> Check {
    let m = Arc::new(cache.solution_a_multifunction(1e-6));
    let v = check_multifunction_usc(&m, &[0.0], &[harmonic(0.0, 128)], grid, TOL)?;
    let w = match &v.witness {
        Some(w) if v.is_counterexample() => w,
        _ => return Ok(Err(v.summary())),
    };
    match w.terms.iter().find(|t| t.margin < t.index as f64 / 2.0) {
        Some(t) => Ok(Err(format!("excess {} < n/2 at n = {}", t.margin, t.index))),
        None => Ok(Ok(format!("excess >= n/2 on all {} tail terms", w.terms.len()))),
    }
}

fn continuity_suite(prob: &Problem, f_anchors: usize, b_anchors: usize, grid: &GridSpec) -> Check {
    let f = fsharp_fn(prob, grid);
    let region = Region::Graph(prob.phi_a.clone());
    let cfg = ProbeConfig::default();
    let mut vs = Vec::new();
    for p in graph_anchors(prob, f_anchors)? {
        let probes = standard_probes(&p, &cfg, &region)?;
        for mode in [Semi::Lower, Semi::Upper] {
            vs.push(check_function_semicontinuity(&f, &region, &p, mode, &probes, TOL)?);
        }
    }
    let m = Arc::new(solution_b_multifunction(prob, 1e-6, grid));
    for p in graph_anchors(prob, b_anchors)? {
        let probes = standard_probes(&p, &cfg, &region)?;
        vs.push(check_multifunction_usc(&m, &p, &probes, grid, TOL)?);
    }
    Ok(all_clear(&vs))
}

/// Parsed fixture against the builtin on a `k^3` joint grid, plus the round trip.
pub fn parser_differential(np: &NamedProblem, source: &str, k: usize) -> Check {
    let ast = dsl::parse(source)?;
    if dsl::parse(&dsl::format(&ast))? != ast {
        return Ok(Err("parse(format(ast)) differs from ast".into()));
    }
    let parsed = ast.to_problem(np.id)?;
    let b = &np.problem;
    let step = |i: usize, lo: f64, hi: f64| lo + (hi - lo) * i as f64 / (k - 1) as f64;
    let mut n = 0;
    for i in 0..k {
        let x = step(i, -3.0, 3.0);
        if parsed.phi_a_at(x)? != b.phi_a_at(x)? {
            return Ok(Err(format!("Phi_A differs at {x}")));
        }
        for j in 0..k {
            let a = step(j, 0.0, 6.0);
            if !b.phi_a_at(x)?.member(a) {
                continue;
            }
            if parsed.phi_b_at(x, a)? != b.phi_b_at(x, a)? {
                return Ok(Err(format!("Phi_B differs at ({x}, {a})")));
            }
            for l in 0..k {
                let bb = step(l, 0.0, 6.0);
                let (u, v) = (parsed.payoff(x, a, bb)?.to_f64(), b.payoff(x, a, bb)?.to_f64());
                if u.to_bits() != v.to_bits() {
                    return Ok(Err(format!("f differs at ({x}, {a}, {bb}): {u} vs {v}")));
                }
                n += 1;
            }
        }
    }
    Ok(Ok(format!("{n} points agree exactly; round trip holds")))
}

fn control_battery(np: &NamedProblem, grid: &GridSpec) -> Check {
    let prob = &np.problem;
    let cache = MinimaxCache::new(prob, grid);
    for x in grid_points(-2.0, 2.0, 0.25) {
        let v = cache.vsharp(x)?.to_f64();
        if (v - (np.oracles.vsharp)(x)).abs() > 1e-3 {
            return Ok(Err(format!("v#({x}) = {v}, oracle {}", (np.oracles.vsharp)(x))));
        }
    }
    let region = Region::Set(prob.x_domain.clone());
    let cfg = ProbeConfig { len: 64, ..ProbeConfig::default() };
    let c = cache.clone();
    let v = move |p: &[f64]| c.vsharp(p[0]);
    let m = Arc::new(cache.solution_a_multifunction(1e-6));
    let mut vs = Vec::new();
    for x in [-0.5, 0.25] {
        let probes = standard_probes(&[x], &cfg, &region)?;
        let a = prob.phi_a_at(x)?.bounds().map_or(0.0, |(lo, _)| lo);
        let b = prob.phi_b_at(x, a)?.bounds().map_or(0.0, |(lo, _)| lo);
        vs.push(check_a_lsc(prob, [x, a, b], &a_lsc_probes(prob, x, &cfg, &[])?, grid, TOL)?);
        vs.push(check_function_semicontinuity(&v, &region, &[x], Semi::Lower, &probes, TOL)?);
        vs.push(check_function_semicontinuity(&v, &region, &[x], Semi::Upper, &probes, TOL)?);
        vs.push(check_multifunction_usc(&m, &[x], &probes, grid, TOL)?);
    }
    Ok(all_clear(&vs))
}

fn run_criterion(out: &mut dyn Write, results: &mut Vec<CriterionResult>, id: u32, name: &'static str, f: impl FnOnce() -> Check) -> Result<()> {
    let t = Instant::now();
    let (passed, detail) = match f() {
        Ok(Ok(d)) => (true, d),
        Ok(Err(d)) => (false, d),
        Err(e) => (false, format!("error: {e}")),
    };
    let seconds = t.elapsed().as_secs_f64();
    writeln!(out, "{} {id:>2} {name}: {detail} ({seconds:.1} s)", if passed { "PASS" } else { "FAIL" })?;
    results.push(CriterionResult { id, name, passed, detail, seconds });
    Ok(())
}

/// Runs the battery of builtin `id`, writing one line per criterion to `out`.
pub fn run(id: &str, out: &mut dyn Write) -> Result<Outcome> {
    let np = library::builtin(id).ok_or_else(|| Error::InvalidConfig(format!("unknown builtin `{id}`; available: {}", library::BUILTIN_IDS.join(", "))))?;
    let grid = GridSpec::default();
    let prob = np.problem.clone();
    let mut results = Vec::new();
    let r = &mut results;
    match id {
        "example1" => {
            let cache = MinimaxCache::new(&prob, &grid);
            run_criterion(out, r, 1, "worst-loss oracle", || worst_loss_oracle(&np, &grid))?;
            run_criterion(out, r, 2, "minimax oracle", || minimax_oracle(&np, &cache))?;
            run_criterion(out, r, 3, "v# discontinuity at 0", || vsharp_discontinuity(&prob, &cache))?;
            run_criterion(out, r, 4, "A-lsc failure at (0, 0, 0)", || a_lsc_failure(&np, &grid))?;
            run_criterion(out, r, 5, "Phi_B lsc", || phi_b_lsc(&prob, 6, &grid))?;
            run_criterion(out, r, 6, "K-inf-compactness split", || k_inf_split(&prob, &[[0.5, 0.0], [-1.0, 0.5]], &grid))?;
            run_criterion(out, r, 7, "Phi*_A escape at 0", || solution_escape(&cache, &grid))?;
            run_criterion(out, r, 9, "f# continuity and Phi*_B usc", || continuity_suite(&prob, 6, 4, &grid))?;
            run_criterion(out, r, 10, "parser differential", || parser_differential(&np, EXAMPLE1_SOURCE, 10))?;
        }
        "control_compact" | "control_independent" => {
            let src = if id == "control_compact" { CONTROL_COMPACT_SOURCE } else { CONTROL_INDEPENDENT_SOURCE };
            run_criterion(out, r, 8, "control sanity", || control_battery(&np, &grid))?;
            run_criterion(out, r, 10, "parser differential", || parser_differential(&np, src, 10))?;
        }
        _ => unreachable!("builtin ids are checked above"),
    }
    let outcome = Outcome { results };
    match outcome.first_failure() {
        Some(f) => writeln!(out, "FAILED: first failing criterion {} ({})", f.id, f.name)?,
        None => writeln!(out, "all criteria passed")?,
    }
    Ok(outcome)
}
