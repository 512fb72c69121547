use crate::set::SetDesc;

use super::ast::*;
use super::{EvalError, EvalErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Boolean(bool),
    Set(SetDesc),
}

/// Values of `x`, `a`, `b`; the parser guarantees only bound ones are read.
#[derive(Debug, Clone, Copy, Default)]
pub struct Env(pub [f64; 3]);

impl Env {
    pub fn new(x: f64, a: f64, b: f64) -> Self {
        Env([x, a, b])
    }
}

fn err(kind: EvalErrorKind, span: Span) -> EvalError {
    EvalError {
        kind,
        line: span.line,
        column: span.column,
    }
}

pub(crate) fn num(e: &Expr, env: &Env) -> Result<f64, EvalError> {
    Ok(match &e.kind {
        ExprKind::Num(v) => *v,
        ExprKind::Var(v) => env.0[v.index()],
        ExprKind::Neg(inner) => -num(inner, env)?,
        ExprKind::Binary(op, l, r) => {
            let (l, r) = (num(l, env)?, num(r, env)?);
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => {
                    if r == 0.0 {
                        return Err(err(EvalErrorKind::DivisionByZero, e.span));
                    }
                    l / r
                }
            }
        }
        ExprKind::Piecewise(branches) => num(pick(branches, e.span, env)?, env)?,
        _ => unreachable!("type-checked as a number"),
    })
}

pub(crate) fn boolean(e: &Expr, env: &Env) -> Result<bool, EvalError> {
    Ok(match &e.kind {
        ExprKind::Compare(op, l, r) => {
            let (l, r) = (num(l, env)?, num(r, env)?);
            match op {
                CmpOp::Lt => l < r,
                CmpOp::Le => l <= r,
                CmpOp::Gt => l > r,
                CmpOp::Ge => l >= r,
            }
        }
        ExprKind::Logic(BoolOp::And, l, r) => boolean(l, env)? && boolean(r, env)?,
        ExprKind::Logic(BoolOp::Or, l, r) => boolean(l, env)? || boolean(r, env)?,
        ExprKind::Piecewise(branches) => boolean(pick(branches, e.span, env)?, env)?,
        _ => unreachable!("type-checked as a boolean"),
    })
}

pub(crate) fn set(e: &Expr, env: &Env) -> Result<SetDesc, EvalError> {
    Ok(match &e.kind {
        ExprKind::Halfline(lo) => SetDesc::halfline(num(lo, env)?),
        ExprKind::Interval(lo, hi) => SetDesc::closed(num(lo, env)?, num(hi, env)?),
        ExprKind::Union(parts) => SetDesc::union_of(parts.iter().map(|p| set(p, env)).collect::<Result<Vec<_>, _>>()?),
        ExprKind::Piecewise(branches) => set(pick(branches, e.span, env)?, env)?,
        _ => unreachable!("type-checked as a set"),
    })
}

/// First branch whose guard holds.
fn pick<'a>(branches: &'a [Branch], span: Span, env: &Env) -> Result<&'a Expr, EvalError> {
    for br in branches {
        match &br.guard {
            None => return Ok(&br.value),
            Some(g) if boolean(g, env)? => return Ok(&br.value),
            Some(_) => {}
        }
    }
    Err(err(EvalErrorKind::NoGuardMatched, span))
}

/// Evaluates a type-checked expression.
pub fn eval_expr(e: &Expr, env: &Env) -> Result<Value, EvalError> {
    match super::parser::type_of(e) {
        Ok(Type::Number) => num(e, env).map(Value::Number),
        Ok(Type::Boolean) => boolean(e, env).map(Value::Boolean),
        Ok(Type::Set) => set(e, env).map(Value::Set),
        Err(pe) => Err(EvalError {
            kind: EvalErrorKind::IllTyped(pe.message),
            line: pe.line,
            column: pe.column,
        }),
    }
}
