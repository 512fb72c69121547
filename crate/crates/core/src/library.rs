//! Built-in problems: the counterexample and two controls where the
//! first player's action sets are compact or the second player's sets do not
//! depend on the first player's action.
//!
//! The closures below spell out the same arithmetic, in the same order, as the
//! shipped `.mmx` files, so builtin and parsed problems agree bit for bit.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    check_a_lsc, check_function_semicontinuity, check_k_inf_compact, check_multifunction_usc, Companion, LevelCap, Outcome,
    Property, Region, Semi, SequenceProbe, Verdict,
};
use crate::engine::{fsharp_fn, solution_a_multifunction, vsharp_fn};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::multifunction::Problem;
use crate::set::SetDesc;

/// States are modelled on `[-X_MAX, X_MAX]`.
pub const X_MAX: f64 = 10.0;

pub const BUILTIN_IDS: [&str; 3] = ["example1", "control_compact", "control_independent"];

/// Closed-form `f#`, `v#` and `Phi*_A`.
#[derive(Clone, Copy)]
pub struct Oracles {
    pub fsharp: fn(f64, f64) -> f64,
    pub vsharp: fn(f64) -> f64,
    pub solution_a: fn(f64) -> SetDesc,
}

/// What a stored witness is run against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subject {
    PhiB,
    FSharp,
    VSharp,
    SolutionA,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedWitness {
    pub label: String,
    pub property: Property,
    pub subject: Subject,
    pub anchor: Vec<f64>,
    pub probe: SequenceProbe,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub expected: Outcome,
}

#[derive(Clone)]
pub struct NamedProblem {
    pub id: &'static str,
    pub problem: Problem,
    pub oracles: Oracles,
    pub witnesses: Vec<NamedWitness>,
    /// Problem-specific companions tried first by A-lsc checks.
    pub hints: Vec<Companion>,
}

pub fn example1_phi_b(x: f64, a: f64) -> f64 {
    if x <= 0.0 || a < 1.0 / (2.0 * x) {
        0.0
    } else if a <= 1.0 / x {
        2.0 * (2.0 * x + 1.0) * a - 2.0 - 1.0 / x
    } else {
        2.0 + 1.0 / x
    }
}

pub fn example1_payoff(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 || a < 1.0 / (2.0 * x) {
        1.0 + a - b
    } else if a <= 1.0 / x {
        (2.0 * x + 1.0) * a - b
    } else {
        2.0 + a - b
    }
}

pub fn example1_fsharp(x: f64, a: f64) -> f64 {
    if x <= 0.0 || a < 1.0 / (2.0 * x) {
        1.0 + a
    } else if a <= 1.0 / x {
        (2.0 * x + 1.0) * (1.0 / x - a)
    } else {
        a - 1.0 / x
    }
}

pub fn example1_vsharp(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        0.0
    }
}

pub fn example1_solution_a(x: f64) -> SetDesc {
    if x <= 0.0 {
        SetDesc::point(0.0)
    } else {
        SetDesc::point(1.0 / x)
    }
}

/// `(f#(x, a), v#(x), Phi*_A(x))` in closed form.
pub fn example1_oracles(x: f64, a: f64) -> (f64, f64, SetDesc) {
    (example1_fsharp(x, a), example1_vsharp(x), example1_solution_a(x))
}

/// Anchor `(x, a, b) = (0, 0, 0)` and the probe `x_n = 1/n` with `a_n = n`.
pub fn example1_witness() -> ([f64; 3], SequenceProbe) {
    let probe = SequenceProbe::harmonic(vec![0.0], vec![1.0], 128)
        .with_companion(Companion::InverseOffset { scale: 1.0 })
        .with_label("x_n = 1/n, a_n = n");
    ([0.0, 0.0, 0.0], probe)
}

fn x_domain() -> SetDesc {
    SetDesc::closed(-X_MAX, X_MAX)
}

fn harmonic_from_zero() -> SequenceProbe {
    SequenceProbe::harmonic(vec![0.0], vec![1.0], 128).with_label("x_n = 1/n")
}

pub fn example1() -> NamedProblem {
    let problem = Problem::new(
        "example1",
        x_domain(),
        |_| Ok(SetDesc::halfline(0.0)),
        |x, a| Ok(SetDesc::halfline(example1_phi_b(x, a))),
        |x, a, b| Ok(example1_payoff(x, a, b)),
    );
    let (anchor, probe) = example1_witness();
    NamedProblem {
        id: "example1",
        problem,
        oracles: Oracles {
            fsharp: example1_fsharp,
            vsharp: example1_vsharp,
            solution_a: example1_solution_a,
        },
        witnesses: vec![
            NamedWitness {
                label: "Phi_B is not A-lsc at (0, 0, 0)".into(),
                property: Property::ALsc,
                subject: Subject::PhiB,
                anchor: anchor.to_vec(),
                probe,
                lambda: None,
                expected: Outcome::CounterexampleFound,
            },
            NamedWitness {
                label: "v# is not lsc at 0".into(),
                property: Property::FnLsc,
                subject: Subject::VSharp,
                anchor: vec![0.0],
                probe: harmonic_from_zero(),
                lambda: None,
                expected: Outcome::CounterexampleFound,
            },
            NamedWitness {
                label: "Phi*_A is not usc at 0".into(),
                property: Property::MfUsc,
                subject: Subject::SolutionA,
                anchor: vec![0.0],
                probe: harmonic_from_zero(),
                lambda: None,
                expected: Outcome::CounterexampleFound,
            },
            NamedWitness {
                label: "f# is not K-inf-compact: f#(1/n, n) = 0".into(),
                property: Property::KInfCompact,
                subject: Subject::FSharp,
                anchor: vec![0.0],
                probe: harmonic_from_zero(),
                lambda: Some(0.5),
                expected: Outcome::CounterexampleFound,
            },
        ],
        hints: vec![Companion::InverseOffset { scale: 1.0 }],
    }
}

fn control_compact_vsharp(x: f64) -> f64 {
    let knee = std::f64::consts::FRAC_1_SQRT_2;
    if x <= knee {
        1.0
    } else if x <= 1.0 {
        (2.0 * x + 1.0) * (1.0 - x) / x
    } else {
        0.0
    }
}

fn control_compact_solution_a(x: f64) -> SetDesc {
    let knee = std::f64::consts::FRAC_1_SQRT_2;
    if x < knee {
        SetDesc::point(0.0)
    } else if x == knee {
        SetDesc::union_of([SetDesc::point(0.0), SetDesc::point(1.0)])
    } else if x <= 1.0 {
        SetDesc::point(1.0)
    } else {
        SetDesc::point(1.0 / x)
    }
}

/// example1 with `Phi_A(x) = [0, 1]`.
pub fn control_compact() -> NamedProblem {
    let problem = Problem::new(
        "control_compact",
        x_domain(),
        |_| Ok(SetDesc::closed(0.0, 1.0)),
        |x, a| Ok(SetDesc::halfline(example1_phi_b(x, a))),
        |x, a, b| Ok(example1_payoff(x, a, b)),
    );
    NamedProblem {
        id: "control_compact",
        problem,
        oracles: Oracles {
            fsharp: example1_fsharp,
            vsharp: control_compact_vsharp,
            solution_a: control_compact_solution_a,
        },
        witnesses: vec![
            NamedWitness {
                label: "A-lsc holds at (0, 0, 0) against the adversarial companion".into(),
                property: Property::ALsc,
                subject: Subject::PhiB,
                anchor: vec![0.0, 0.0, 0.0],
                probe: harmonic_from_zero().with_companion(Companion::Adversarial),
                lambda: None,
                expected: Outcome::NoCounterexampleFound,
            },
            NamedWitness {
                label: "v# is lsc at 0".into(),
                property: Property::FnLsc,
                subject: Subject::VSharp,
                anchor: vec![0.0],
                probe: harmonic_from_zero(),
                lambda: None,
                expected: Outcome::NoCounterexampleFound,
            },
        ],
        hints: Vec::new(),
    }
}

fn control_independent_fsharp(x: f64, a: f64) -> f64 {
    (a - x) * (a - x)
}

fn control_independent_vsharp(x: f64) -> f64 {
    let m = x.min(0.0);
    m * m
}

fn control_independent_solution_a(x: f64) -> SetDesc {
    SetDesc::point(x.max(0.0))
}

/// `Phi_B(x, a) = [0, +inf)` for every `a`, with `f = (a - x)^2 - b^2`.
pub fn control_independent() -> NamedProblem {
    let problem = Problem::new(
        "control_independent",
        x_domain(),
        |_| Ok(SetDesc::halfline(0.0)),
        |_, _| Ok(SetDesc::halfline(0.0)),
        |x, a, b| Ok((a - x) * (a - x) - b * b),
    );
    NamedProblem {
        id: "control_independent",
        problem,
        oracles: Oracles {
            fsharp: control_independent_fsharp,
            vsharp: control_independent_vsharp,
            solution_a: control_independent_solution_a,
        },
        witnesses: vec![NamedWitness {
            label: "A-lsc holds at (1, 0, 0) against the adversarial companion".into(),
            property: Property::ALsc,
            subject: Subject::PhiB,
            anchor: vec![1.0, 0.0, 0.0],
            probe: SequenceProbe::harmonic(vec![1.0], vec![1.0], 128).with_companion(Companion::Adversarial),
            lambda: None,
            expected: Outcome::NoCounterexampleFound,
        }],
        hints: Vec::new(),
    }
}

pub fn builtin(id: &str) -> Option<NamedProblem> {
    match id {
        "example1" => Some(example1()),
        "control_compact" => Some(control_compact()),
        "control_independent" => Some(control_independent()),
        _ => None,
    }
}

/// Runs a stored witness through the check its property names.
pub fn run_witness(prob: &Problem, w: &NamedWitness, grid: &GridSpec, tol: f64) -> Result<Verdict> {
    let probes = std::slice::from_ref(&w.probe);
    let mismatch = || Error::InvalidConfig(format!("witness `{}`: {:?} cannot be checked on {:?}", w.label, w.property, w.subject));
    match (w.property, w.subject) {
        (Property::ALsc, Subject::PhiB) => {
            let [x, a, b] = <[f64; 3]>::try_from(w.anchor.as_slice()).map_err(|_| mismatch())?;
            check_a_lsc(prob, [x, a, b], probes, grid, tol)
        }
        (Property::FnLsc | Property::FnUsc, Subject::VSharp) => {
            let mode = if w.property == Property::FnLsc { Semi::Lower } else { Semi::Upper };
            let v = vsharp_fn(prob, grid);
            check_function_semicontinuity(&v, &Region::Set(prob.x_domain.clone()), &w.anchor, mode, probes, tol)
        }
        (Property::MfUsc, Subject::SolutionA) => {
            let m = Arc::new(solution_a_multifunction(prob, 1e-6, grid));
            check_multifunction_usc(&m, &w.anchor, probes, grid, tol)
        }
        (Property::KInfCompact, Subject::FSharp) => {
            let f = fsharp_fn(prob, grid);
            let u = |p: &[f64], a: f64| f(&[p[0], a]);
            let cap = LevelCap::new(w.lambda.ok_or_else(mismatch)?)?;
            check_k_inf_compact(&u, &prob.phi_a, &w.anchor, cap, probes, grid, tol)
        }
        _ => Err(mismatch()),
    }
}
