use std::fmt;

/// 1-based source position of a node's first character.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    A,
    B,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::A => "a",
            Var::B => "b",
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolOp {
    And,
    Or,
}

/// One `guard -> value` arm; `guard == None` is `otherwise`.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub guard: Option<Expr>,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
    Logic(BoolOp, Box<Expr>, Box<Expr>),
    Piecewise(Vec<Branch>),
    Halfline(Box<Expr>),
    Interval(Box<Expr>, Box<Expr>),
    Union(Vec<Expr>),
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

/// Structural equality; positions are ignored.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Type {
    Number,
    Boolean,
    Set,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Type::Number => "number",
            Type::Boolean => "boolean",
            Type::Set => "set",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decl {
    XDomain,
    PhiA,
    PhiB,
    F,
}

impl Decl {
    pub const ALL: [Decl; 4] = [Decl::XDomain, Decl::PhiA, Decl::PhiB, Decl::F];

    pub fn name(self) -> &'static str {
        match self {
            Decl::XDomain => "x_domain",
            Decl::PhiA => "phi_A",
            Decl::PhiB => "phi_B",
            Decl::F => "f",
        }
    }

    pub fn from_name(s: &str) -> Option<Decl> {
        Decl::ALL.into_iter().find(|d| d.name() == s)
    }

    /// Variables the right-hand side may use.
    pub fn scope(self) -> &'static [Var] {
        match self {
            Decl::XDomain => &[],
            Decl::PhiA => &[Var::X],
            Decl::PhiB => &[Var::X, Var::A],
            Decl::F => &[Var::X, Var::A, Var::B],
        }
    }

    pub fn result_type(self) -> Type {
        match self {
            Decl::F => Type::Number,
            _ => Type::Set,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemAst {
    pub x_domain: Expr,
    pub phi_a: Expr,
    pub phi_b: Expr,
    pub f: Expr,
}

impl ProblemAst {
    pub fn get(&self, d: Decl) -> &Expr {
        match d {
            Decl::XDomain => &self.x_domain,
            Decl::PhiA => &self.phi_a,
            Decl::PhiB => &self.phi_b,
            Decl::F => &self.f,
        }
    }
}
