//! Plain-text problem files (`.mmx`).
//!
//! ```text
//! x_domain = interval(-10, 10);
//! phi_A = halfline(0);
//! phi_B = halfline(piecewise {
//!     x <= 0 or a < 1 / (2 * x) -> 0;
//!     a <= 1 / x -> 2 * (2 * x + 1) * a - 2 - 1 / x;
//!     otherwise -> 2 + 1 / x;
//! });
//! f = a - b;  # line comment
//! ```

mod ast;
mod eval;
mod format;
mod lexer;
mod parser;

use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

pub use ast::{BinOp, BoolOp, Branch, CmpOp, Decl, Expr, ExprKind, ProblemAst, Span, Type, Var};
pub use eval::{eval_expr, Env, Value};
pub use format::{format, format_expr};
pub use parser::parse;

use crate::error::{Error, Result};
use crate::multifunction::Problem;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{column}: {message} (expected {expected})")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    /// The token class that would have been accepted.
    pub expected: String,
}

impl ParseError {
    pub(crate) fn new(at: Span, message: impl Into<String>, expected: &str) -> Self {
        ParseError {
            line: at.line,
            column: at.column,
            message: message.into(),
            expected: expected.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalErrorKind {
    #[error("division by zero")]
    DivisionByZero,
    #[error("no piecewise guard matched")]
    NoGuardMatched,
    #[error("ill-typed expression: {0}")]
    IllTyped(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub line: usize,
    pub column: usize,
}

impl ProblemAst {
    /// Builds a [`Problem`] evaluating this tree.
    pub fn to_problem(&self, id: impl Into<String>) -> Result<Problem> {
        let x_domain = eval::set(&self.x_domain, &Env::default())?;
        let ast = Arc::new(self.clone());
        let (pa, pb, pf) = (ast.clone(), ast.clone(), ast);
        Ok(Problem::new(
            id,
            x_domain,
            move |x| Ok(eval::set(&pa.phi_a, &Env::new(x, 0.0, 0.0))?),
            move |x, a| Ok(eval::set(&pb.phi_b, &Env::new(x, a, 0.0))?),
            move |x, a, b| Ok(eval::num(&pf.f, &Env::new(x, a, b))?),
        ))
    }
}

/// Parses `src` into a problem named `id`.
pub fn problem_from_source(id: impl Into<String>, src: &str) -> Result<Problem> {
    parse(src)?.to_problem(id)
}

/// Reads and parses a `.mmx` file; the file stem becomes the problem id.
pub fn load_problem(path: &Path) -> Result<Problem> {
    let src = std::fs::read_to_string(path)?;
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "problem".into());
    problem_from_source(id, &src).map_err(|e| match e {
        Error::Parse(mut pe) => {
            pe.message = format!("{}: {}", path.display(), pe.message);
            Error::Parse(pe)
        }
        other => other,
    })
}

#[cfg(test)]
mod tests;
