//! Multifunctions, two-stage problems, graph sampling and the swap construction.
//!
//! A problem is a triple `(Phi_A, Phi_B, f)`: `Phi_A` maps a state `x` to the
//! first player's action set, `Phi_B` maps `(x, a)` to the second player's
//! action set, and `f(x, a, b)` is the payoff. The swap construction treats
//! `(x, b)` as the parameter and `a` as the variable:
//! `Phi_B^{swap}(x, b) = {a in Phi_A(x) : b in Phi_B(x, a)}` and
//! `f^{swap}(x, b, a) = f(x, a, b)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::grid::{classify_runs, sample_set, ApproxSet, GridSpec};
use crate::set::SetDesc;

pub type SetRule = dyn Fn(&[f64]) -> Result<SetDesc> + Send + Sync;
pub type PointPredicate = dyn Fn(&[f64]) -> Result<bool> + Send + Sync;
pub type PayoffFn = dyn Fn(f64, f64, f64) -> Result<f64> + Send + Sync;

/// Where a multifunction is defined.
#[derive(Clone)]
pub enum Domain {
    /// One-argument map defined on a subset of the line.
    Set(SetDesc),
    /// Two-argument map defined on the graph of a one-argument map.
    GraphOf(Arc<Multifunction>),
    /// Membership decided by a predicate (for example a projection of a graph).
    Predicate(Arc<PointPredicate>),
    /// Defined exactly where the rule yields a nonempty set.
    Implicit,
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Set(s) => write!(f, "Set({s})"),
            Domain::GraphOf(m) => write!(f, "GraphOf({})", m.name),
            Domain::Predicate(_) => f.write_str("Predicate"),
            Domain::Implicit => f.write_str("Implicit"),
        }
    }
}

/// A set-valued map `point -> SetDesc`, strict on its domain.
#[derive(Clone)]
pub struct Multifunction {
    pub name: String,
    pub arity: usize,
    pub domain: Domain,
    rule: Arc<SetRule>,
}

impl fmt::Debug for Multifunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Multifunction")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl Multifunction {
    pub fn new<F>(name: impl Into<String>, arity: usize, domain: Domain, rule: F) -> Self
    where
        F: Fn(&[f64]) -> Result<SetDesc> + Send + Sync + 'static,
    {
        Multifunction {
            name: name.into(),
            arity,
            domain,
            rule: Arc::new(rule),
        }
    }

    pub fn in_domain(&self, p: &[f64]) -> Result<bool> {
        if p.len() != self.arity {
            return Ok(false);
        }
        match &self.domain {
            Domain::Set(s) => Ok(s.member(p[0])),
            Domain::GraphOf(parent) => {
                let (head, last) = p.split_at(p.len() - 1);
                if !parent.in_domain(head)? {
                    return Ok(false);
                }
                Ok(parent.eval(head)?.member(last[0]))
            }
            Domain::Predicate(test) => test(p),
            Domain::Implicit => match (self.rule)(p) {
                Ok(s) => Ok(!s.is_empty()),
                Err(Error::Domain(_)) => Ok(false),
                Err(e) => Err(e),
            },
        }
    }

    /// Evaluates the map at `p`; points outside the domain are an error.
    pub fn eval(&self, p: &[f64]) -> Result<SetDesc> {
        if p.len() != self.arity {
            return Err(Error::domain(format!(
                "`{}` takes {} coordinates, got {}",
                self.name,
                self.arity,
                p.len()
            )));
        }
        let implicit = matches!(self.domain, Domain::Implicit);
        if !implicit && !self.in_domain(p)? {
            return Err(Error::domain(format!("{p:?} is outside the domain of `{}`", self.name)));
        }
        let value = (self.rule)(p)?.normalize();
        if value.is_empty() {
            if implicit {
                return Err(Error::domain(format!("{p:?} is outside the domain of `{}`", self.name)));
            }
            return Err(Error::NotStrict {
                name: self.name.clone(),
                point: p.to_vec(),
            });
        }
        Ok(value)
    }

    /// The rule itself, for callers that already know `p` is in the domain.
    pub(crate) fn eval_unchecked(&self, p: &[f64]) -> Result<SetDesc> {
        (self.rule)(p)
    }
}

/// The triple `(Phi_A, Phi_B, f)` with its state domain.
#[derive(Clone)]
pub struct Problem {
    pub id: String,
    pub x_domain: SetDesc,
    pub phi_a: Arc<Multifunction>,
    pub phi_b: Arc<Multifunction>,
    payoff: Arc<PayoffFn>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("id", &self.id)
            .field("x_domain", &self.x_domain)
            .field("phi_a", &self.phi_a)
            .field("phi_b", &self.phi_b)
            .finish_non_exhaustive()
    }
}

impl Problem {
    /// Assembles a problem from rules. `phi_a` is defined on `x_domain` and
    /// `phi_b` on the graph of `phi_a`.
    pub fn new<A, B, F>(id: impl Into<String>, x_domain: SetDesc, phi_a: A, phi_b: B, payoff: F) -> Self
    where
        A: Fn(f64) -> Result<SetDesc> + Send + Sync + 'static,
        B: Fn(f64, f64) -> Result<SetDesc> + Send + Sync + 'static,
        F: Fn(f64, f64, f64) -> Result<f64> + Send + Sync + 'static,
    {
        let phi_a = Arc::new(Multifunction::new("phi_A", 1, Domain::Set(x_domain.clone()), move |p| {
            phi_a(p[0])
        }));
        let phi_b = Arc::new(Multifunction::new("phi_B", 2, Domain::GraphOf(phi_a.clone()), move |p| {
            phi_b(p[0], p[1])
        }));
        Problem {
            id: id.into(),
            x_domain,
            phi_a,
            phi_b,
            payoff: Arc::new(payoff),
        }
    }

    pub fn check_x(&self, x: f64) -> Result<()> {
        if self.x_domain.member(x) {
            Ok(())
        } else {
            Err(Error::domain(format!("x = {x} is outside the state domain {}", self.x_domain)))
        }
    }

    pub fn phi_a_at(&self, x: f64) -> Result<SetDesc> {
        self.phi_a.eval(&[x])
    }

    pub fn phi_b_at(&self, x: f64, a: f64) -> Result<SetDesc> {
        self.phi_b.eval(&[x, a])
    }

    /// `f(x, a, b)` without graph membership checks. Non-finite payoffs are rejected.
    pub fn payoff(&self, x: f64, a: f64, b: f64) -> Result<ExtReal> {
        let v = (self.payoff)(x, a, b)?;
        if v.is_finite() {
            Ok(ExtReal::Finite(v))
        } else {
            Err(Error::NonFinitePayoff { point: vec![x, a, b] })
        }
    }

    /// `f(x, a, b)` after checking `(x, a, b)` lies on the graph of `Phi_B`.
    pub fn payoff_checked(&self, x: f64, a: f64, b: f64) -> Result<ExtReal> {
        if !self.phi_b_at(x, a)?.member(b) {
            return Err(Error::domain(format!("b = {b} is not in Phi_B({x}, {a})")));
        }
        self.payoff(x, a, b)
    }
}

/// A finite sample of a graph `{(p, y) : y in m(p)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSample {
    pub points: Vec<Vec<f64>>,
    pub restriction: Option<SetDesc>,
    /// Some fiber was unbounded or reached past `radius` and was cut there.
    pub truncated: bool,
    pub radius: f64,
}

fn grid_over(set: &SetDesc, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for p in set.pieces() {
        if p.lo == p.hi {
            out.push(p.lo);
            continue;
        }
        let n = ((p.hi - p.lo) / step + 1e-9).floor() as usize;
        for k in 0..=n {
            let v = p.lo + k as f64 * step;
            if p.contains(v) {
                out.push(v);
            }
        }
        if p.hi_closed && out.last() != Some(&p.hi) {
            out.push(p.hi);
        }
    }
    out
}

/// Samples the graph of `m` above the given base points: each fiber is cut
/// to `[-radius, radius]` and gridded with `grid.step`.
pub fn graph_sample_at(m: &Multifunction, base: &[Vec<f64>], grid: &GridSpec) -> Result<GraphSample> {
    grid.validate()?;
    let radius = grid.truncation_radius;
    let mut truncated = false;
    let mut points = Vec::new();
    for p in base {
        let fiber = m.eval(p)?;
        let cut = fiber.truncate(radius);
        if cut != fiber {
            truncated = true;
        }
        for y in grid_over(&cut, grid.step) {
            debug_assert!(fiber.member(y));
            let mut q = p.clone();
            q.push(y);
            points.push(q);
        }
    }
    Ok(GraphSample {
        points,
        restriction: None,
        truncated,
        radius,
    })
}

/// `Gr_Z(m)` for a one-argument map, sampled on a product grid.
pub fn graph_sample(m: &Multifunction, z: &SetDesc, grid: &GridSpec) -> Result<GraphSample> {
    if m.arity != 1 {
        return Err(Error::domain("graph_sample over a set needs a one-argument multifunction"));
    }
    if z.is_empty() {
        return Ok(GraphSample {
            points: Vec::new(),
            restriction: Some(z.clone()),
            truncated: false,
            radius: grid.truncation_radius,
        });
    }
    if !z.is_bounded() {
        return Err(Error::domain(format!("restriction {z} must be compact")));
    }
    if let Domain::Set(dom) = &m.domain {
        if !dom.contains_set(z) {
            return Err(Error::domain(format!("{z} is not contained in the domain {dom}")));
        }
    }
    let base: Vec<Vec<f64>> = grid_over(z, grid.step).into_iter().map(|x| vec![x]).collect();
    let mut out = graph_sample_at(m, &base, grid)?;
    out.restriction = Some(z.clone());
    Ok(out)
}

/// `{a in Phi_A(x) : b in Phi_B(x, a)}`, found by classifying the geometric
/// `a`-grid and bisecting every membership change. The result is always an
/// approximation; `extrapolated` marks runs extended past the last radius.
pub fn swap_section(prob: &Problem, x: f64, b: f64, grid: &GridSpec) -> Result<ApproxSet> {
    prob.check_x(x)?;
    let fiber = prob.phi_a_at(x)?;
    let sampling = sample_set(&fiber, grid)?;
    // Every sampled `a` lies in `fiber`, so the domain checks can be skipped.
    let mut pred = |a: f64| -> Result<bool> { Ok(prob.phi_b.eval_unchecked(&[x, a])?.member(b)) };
    let mut points = Vec::with_capacity(sampling.samples.len());
    for s in &sampling.samples {
        points.push((s.at, s.piece, pred(s.at)?));
    }
    classify_runs(&sampling, &points, &mut pred, grid.refinement_depth)
}

/// `f^{swap}(x, b, a) = f(x, a, b)`, defined on the graph of the swapped map.
pub fn swap_objective(prob: &Problem) -> impl Fn(f64, f64, f64) -> Result<ExtReal> + Send + Sync + '_ {
    move |x, b, a| prob.payoff_checked(x, a, b)
}

/// The swapped map `(x, b) -> Phi_B^{swap}(x, b)` as a [`Multifunction`],
/// defined where the section is nonempty.
pub fn swap_multifunction(prob: &Problem, grid: &GridSpec) -> Multifunction {
    let prob = prob.clone();
    let grid = grid.clone();
    Multifunction::new("phi_B_swap", 2, Domain::Implicit, move |p| {
        if !prob.x_domain.member(p[0]) {
            return Err(Error::domain(format!("x = {} is outside the state domain", p[0])));
        }
        Ok(swap_section(&prob, p[0], p[1], &grid)?.set)
    })
}
