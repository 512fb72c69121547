use std::fmt::Write;

use super::ast::*;
use super::parser::{P_ADD, P_AND, P_ATOM, P_CMP, P_MUL, P_OR, P_UNARY};

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Logic(BoolOp::Or, ..) => P_OR,
        ExprKind::Logic(BoolOp::And, ..) => P_AND,
        ExprKind::Compare(..) => P_CMP,
        ExprKind::Binary(BinOp::Add | BinOp::Sub, ..) => P_ADD,
        ExprKind::Binary(BinOp::Mul | BinOp::Div, ..) => P_MUL,
        ExprKind::Neg(_) => P_UNARY,
        _ => P_ATOM,
    }
}

fn child(out: &mut String, e: &Expr, min: u8, indent: usize) {
    if prec(e) < min {
        out.push('(');
        expr(out, e, indent);
        out.push(')');
    } else {
        expr(out, e, indent);
    }
}

fn infix(out: &mut String, op: &str, p: u8, l: &Expr, r: &Expr, indent: usize) {
    // Left associative: an equal-precedence right operand needs parentheses.
    child(out, l, p, indent);
    let _ = write!(out, " {op} ");
    child(out, r, p + 1, indent);
}

fn expr(out: &mut String, e: &Expr, indent: usize) {
    match &e.kind {
        ExprKind::Num(v) => {
            let _ = write!(out, "{v}");
        }
        ExprKind::Var(v) => out.push_str(v.name()),
        ExprKind::Neg(inner) => {
            out.push('-');
            child(out, inner, P_UNARY, indent);
        }
        ExprKind::Binary(op, l, r) => {
            let (s, p) = match op {
                BinOp::Add => ("+", P_ADD),
                BinOp::Sub => ("-", P_ADD),
                BinOp::Mul => ("*", P_MUL),
                BinOp::Div => ("/", P_MUL),
            };
            infix(out, s, p, l, r, indent);
        }
        ExprKind::Compare(op, l, r) => {
            let s = match op {
                CmpOp::Lt => "<",
                CmpOp::Le => "<=",
                CmpOp::Gt => ">",
                CmpOp::Ge => ">=",
            };
            infix(out, s, P_CMP, l, r, indent);
        }
        ExprKind::Logic(op, l, r) => {
            let (s, p) = match op {
                BoolOp::And => ("and", P_AND),
                BoolOp::Or => ("or", P_OR),
            };
            infix(out, s, p, l, r, indent);
        }
        ExprKind::Piecewise(branches) => {
            out.push_str("piecewise {\n");
            for br in branches {
                out.push_str(&"    ".repeat(indent + 1));
                match &br.guard {
                    Some(g) => expr(out, g, indent + 1),
                    None => out.push_str("otherwise"),
                }
                out.push_str(" -> ");
                expr(out, &br.value, indent + 1);
                out.push_str(";\n");
            }
            out.push_str(&"    ".repeat(indent));
            out.push('}');
        }
        ExprKind::Halfline(lo) => {
            out.push_str("halfline(");
            expr(out, lo, indent);
            out.push(')');
        }
        ExprKind::Interval(lo, hi) => {
            out.push_str("interval(");
            expr(out, lo, indent);
            out.push_str(", ");
            expr(out, hi, indent);
            out.push(')');
        }
        ExprKind::Union(parts) => {
            out.push_str("union(");
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                expr(out, p, indent);
            }
            out.push(')');
        }
    }
}

pub fn format_expr(e: &Expr) -> String {
    let mut out = String::new();
    expr(&mut out, e, 0);
    out
}

/// Canonical text: the four declarations in fixed order, one per line.
pub fn format(ast: &ProblemAst) -> String {
    let mut out = String::new();
    for d in Decl::ALL {
        let _ = write!(out, "{} = ", d.name());
        expr(&mut out, ast.get(d), 0);
        out.push_str(";\n");
    }
    out
}
