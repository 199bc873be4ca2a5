use crate::ast::{Builtin, Span};

/// A parsed program: a block without braces.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceAst {
    pub body: Block,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub items: Vec<Item>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    /// `function name(p1, p2) { body }`; `name` is in scope in `body`.
    Function {
        name: String,
        params: Vec<String>,
        body: Block,
        span: Span,
    },
    /// `name = value`, scoping over the rest of the block.
    Let {
        name: String,
        value: Expr,
        span: Span,
    },
    Expr(Expr),
}

impl Item {
    pub fn span(&self) -> Span {
        match self {
            Item::Function { span, .. } | Item::Let { span, .. } => *span,
            Item::Expr(e) => e.span,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Number(f64),
    Bool(bool),
    Unit,
    Var(String),
    /// Application of a user function: `f(a, b)`.
    Call { callee: Box<Expr>, args: Vec<Expr> },
    /// Builtin call, either named (`log(x)`) or infix (`a + b`).
    Builtin { op: Builtin, args: Vec<Expr> },
    Neg(Box<Expr>),
    If {
        cond: Box<Expr>,
        then_branch: Box<Expr>,
        else_branch: Box<Expr>,
    },
    Block(Block),
    /// Anonymous `function(p1, p2) { body }`.
    Lambda { params: Vec<String>, body: Block },
    Sample(Box<Expr>),
    Weight(Box<Expr>),
    DWeight(Box<Expr>),
    /// `flip()`, sugar for `sample(bernoulli(0.5))`.
    Flip,
    /// `fix(function(self, p...) { body })`.
    Fix(Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }
}

/// Names that may only appear in call position and never as binders.
pub const RESERVED_CALLS: &[&str] = &[
    "sample",
    "weight",
    "dweight",
    "flip",
    "fix",
    "log",
    "exp",
    "logpdf",
    "bernoulli",
    "normal",
    "gamma",
    "exponential",
];
