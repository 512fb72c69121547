//! Parametric two-stage minimax over set-valued constraints.
//!
//! The first player picks `a in Phi_A(x)`, the second answers with
//! `b in Phi_B(x, a)` and the payoff is `f(x, a, b)`. The crate computes the
//! worst-loss function `f#`, the minimax value `v#` and their solution sets,
//! and probes the semicontinuity hypotheses under which they behave well.

pub mod cli;
pub mod diagnostics;
pub mod dsl;
pub mod engine;
pub mod error;
pub mod extreal;
pub mod grid;
pub mod library;
pub mod multifunction;
pub mod report;
pub mod set;
pub mod verify;

pub use error::{Error, Result};
pub use extreal::ExtReal;
pub use grid::{ApproxSet, GridSpec};
pub use multifunction::{Multifunction, Problem};
pub use set::SetDesc;
