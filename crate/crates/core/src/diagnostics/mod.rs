//! One-sided checks of semicontinuity, A-lower semicontinuity and
//! (K-)inf-compactness along finite probe families.
//!
//! A `CounterexampleFound` verdict is backed by a replayable witness. The
//! absence of a counterexample only covers the probes that were tried.

mod checks;
mod estimator;
mod probes;
mod verdict;

pub use checks::{
    a_lsc_probes, check_a_lsc, check_function_semicontinuity, check_inf_compact, check_k_inf_compact, check_multifunction_lsc,
    check_multifunction_usc, excess, feasible_probes, standard_probes, GraphFn, LevelCap, PointFn, Region, Semi,
};
pub use estimator::liminf_estimate;
pub use probes::{generate_probes, Companion, ProbeConfig, Rate, SequenceProbe, MIN_PROBE_LEN};
pub use verdict::{Outcome, Property, Term, Verdict, Witness};
