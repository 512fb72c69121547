use super::ast::*;
use super::lexer::{lex, Tok};
use super::ParseError;

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    scope: &'static [Var],
}

// Binding strength, loosest first.
pub(crate) const P_OR: u8 = 1;
pub(crate) const P_AND: u8 = 2;
pub(crate) const P_CMP: u8 = 3;
pub(crate) const P_ADD: u8 = 4;
pub(crate) const P_MUL: u8 = 5;
pub(crate) const P_UNARY: u8 = 6;
pub(crate) const P_ATOM: u8 = 7;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError::new(self.span(), format!("unexpected {}", self.peek().describe()), expected)
    }

    fn expect(&mut self, t: Tok) -> Result<Span, ParseError> {
        if *self.peek() == t {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(&format!("`{}`", t.symbol())))
        }
    }

    fn is_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == name)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.or()
    }

    fn or(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and()?;
        while self.is_ident("or") {
            let span = self.bump().1;
            let rhs = self.and()?;
            lhs = Expr::new(ExprKind::Logic(BoolOp::Or, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.cmp()?;
        while self.is_ident("and") {
            let span = self.bump().1;
            let rhs = self.cmp()?;
            lhs = Expr::new(ExprKind::Logic(BoolOp::And, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn cmp(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.add()?;
        loop {
            let op = match self.peek() {
                Tok::Lt => CmpOp::Lt,
                Tok::Le => CmpOp::Le,
                Tok::Gt => CmpOp::Gt,
                Tok::Ge => CmpOp::Ge,
                _ => return Ok(lhs),
            };
            let span = self.bump().1;
            let rhs = self.add()?;
            lhs = Expr::new(ExprKind::Compare(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn add(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.mul()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let span = self.bump().1;
            let rhs = self.mul()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn mul(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let span = self.bump().1;
            let rhs = self.unary()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            let span = self.bump().1;
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), span));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::new(ExprKind::Num(v), span))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let var = match name.as_str() {
                    "x" => Some(Var::X),
                    "a" => Some(Var::A),
                    "b" => Some(Var::B),
                    _ => None,
                };
                if let Some(v) = var {
                    if !self.scope.contains(&v) {
                        return Err(ParseError::new(span, format!("variable `{}` is not in scope here", v.name()), "variable in scope"));
                    }
                    self.bump();
                    return Ok(Expr::new(ExprKind::Var(v), span));
                }
                match name.as_str() {
                    "piecewise" => self.piecewise(),
                    "halfline" => {
                        self.bump();
                        self.expect(Tok::LParen)?;
                        let lo = self.expr()?;
                        self.expect(Tok::RParen)?;
                        Ok(Expr::new(ExprKind::Halfline(Box::new(lo)), span))
                    }
                    "interval" => {
                        self.bump();
                        self.expect(Tok::LParen)?;
                        let lo = self.expr()?;
                        self.expect(Tok::Comma)?;
                        let hi = self.expr()?;
                        self.expect(Tok::RParen)?;
                        Ok(Expr::new(ExprKind::Interval(Box::new(lo), Box::new(hi)), span))
                    }
                    "union" => {
                        self.bump();
                        self.expect(Tok::LParen)?;
                        let mut parts = vec![self.expr()?];
                        while *self.peek() == Tok::Comma {
                            self.bump();
                            parts.push(self.expr()?);
                        }
                        self.expect(Tok::RParen)?;
                        Ok(Expr::new(ExprKind::Union(parts), span))
                    }
                    _ => Err(ParseError::new(span, format!("unknown name `{name}`"), "expression")),
                }
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    fn piecewise(&mut self) -> Result<Expr, ParseError> {
        let span = self.bump().1;
        self.expect(Tok::LBrace)?;
        let mut branches = Vec::new();
        while *self.peek() != Tok::RBrace {
            let guard = if self.is_ident("otherwise") {
                self.bump();
                None
            } else {
                Some(self.expr()?)
            };
            self.expect(Tok::Arrow)?;
            let value = self.expr()?;
            self.expect(Tok::Semi)?;
            branches.push(Branch { guard, value });
        }
        if branches.is_empty() {
            return Err(self.unexpected("piecewise branch"));
        }
        self.bump();
        Ok(Expr::new(ExprKind::Piecewise(branches), span))
    }
}

fn mismatch(e: &Expr, want: Type, got: Type) -> ParseError {
    ParseError::new(e.span, format!("expected a {want}, found a {got}"), &want.to_string())
}

/// Infers the type of `e`, rejecting ill-typed trees.
pub(crate) fn type_of(e: &Expr) -> Result<Type, ParseError> {
    let want = |e: &Expr, t: Type| -> Result<(), ParseError> {
        let got = type_of(e)?;
        if got == t {
            Ok(())
        } else {
            Err(mismatch(e, t, got))
        }
    };
    Ok(match &e.kind {
        ExprKind::Num(_) | ExprKind::Var(_) => Type::Number,
        ExprKind::Neg(inner) => {
            want(inner, Type::Number)?;
            Type::Number
        }
        ExprKind::Binary(_, l, r) => {
            want(l, Type::Number)?;
            want(r, Type::Number)?;
            Type::Number
        }
        ExprKind::Compare(_, l, r) => {
            want(l, Type::Number)?;
            want(r, Type::Number)?;
            Type::Boolean
        }
        ExprKind::Logic(_, l, r) => {
            want(l, Type::Boolean)?;
            want(r, Type::Boolean)?;
            Type::Boolean
        }
        ExprKind::Piecewise(branches) => {
            let t = type_of(&branches[0].value)?;
            for br in branches {
                if let Some(g) = &br.guard {
                    want(g, Type::Boolean)?;
                }
                want(&br.value, t)?;
            }
            t
        }
        ExprKind::Halfline(lo) => {
            want(lo, Type::Number)?;
            Type::Set
        }
        ExprKind::Interval(lo, hi) => {
            want(lo, Type::Number)?;
            want(hi, Type::Number)?;
            Type::Set
        }
        ExprKind::Union(parts) => {
            for p in parts {
                want(p, Type::Set)?;
            }
            Type::Set
        }
    })
}

/// Parses a problem file: exactly the four declarations, each once.
pub fn parse(src: &str) -> Result<ProblemAst, ParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0, scope: &[] };
    let mut slots: [Option<Expr>; 4] = Default::default();
    while *p.peek() != Tok::Eof {
        let span = p.span();
        let decl = match p.peek() {
            Tok::Ident(name) => Decl::from_name(name).ok_or_else(|| ParseError::new(span, format!("unknown declaration `{name}`"), "declaration name"))?,
            _ => return Err(p.unexpected("declaration name")),
        };
        let slot = &Decl::ALL.iter().position(|d| *d == decl).unwrap();
        if slots[*slot].is_some() {
            return Err(ParseError::new(span, format!("`{}` is declared twice", decl.name()), "declaration name"));
        }
        p.bump();
        p.expect(Tok::Assign)?;
        p.scope = decl.scope();
        let e = p.expr()?;
        let got = type_of(&e)?;
        if got != decl.result_type() {
            return Err(mismatch(&e, decl.result_type(), got));
        }
        p.expect(Tok::Semi)?;
        slots[*slot] = Some(e);
    }
    let missing: Vec<&str> = Decl::ALL.iter().zip(&slots).filter(|(_, s)| s.is_none()).map(|(d, _)| d.name()).collect();
    if !missing.is_empty() {
        return Err(ParseError::new(p.span(), format!("missing declarations: {}", missing.join(", ")), "declaration"));
    }
    let [x_domain, phi_a, phi_b, f] = slots.map(Option::unwrap);
    Ok(ProblemAst { x_domain, phi_a, phi_b, f })
}
