//! Core calculus: an untyped lambda calculus with `fix`, `if`, `sample` and
//! `weight`, plus the continuation-carrying weight forms produced by the CPS
//! transform.
//!
//! Terms are generic over an annotation so that the same tree shape serves as
//! the plain desugared program ([`CoreTerm`], annotated with source spans) and
//! as the uniquely labeled program consumed by the analysis ([`LabeledTerm`]).

mod label;

pub use label::{
    assign_labels, assign_labels_with, collect_lambdas, dump_labels, LabelScheme, LambdaInfo,
    LabelError, LambdaSet,
};

use std::collections::BTreeSet;
use std::fmt;

/// Source position (1-based). `Span::SYNTHETIC` marks nodes with no source.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub const SYNTHETIC: Span = Span { line: 0, col: 0 };

    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }

    pub fn is_synthetic(&self) -> bool {
        self.line == 0
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_synthetic() {
            write!(f, "<generated>")
        } else {
            write!(f, "{}:{}", self.line, self.col)
        }
    }
}

/// Program label. Labels are positive and unique within a labeled program.
pub type Label = u32;

/// Annotation carried on every node of a [`LabeledTerm`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LabelInfo {
    pub label: Label,
    pub span: Span,
}

/// What the runtime and the pretty-printer need to know about an annotation.
pub trait Annotation: Clone + fmt::Debug {
    fn span(&self) -> Span;
    fn label(&self) -> Option<Label> {
        None
    }
}

impl Annotation for () {
    fn span(&self) -> Span {
        Span::SYNTHETIC
    }
}

impl Annotation for Span {
    fn span(&self) -> Span {
        *self
    }
}

impl Annotation for LabelInfo {
    fn span(&self) -> Span {
        self.span
    }
    fn label(&self) -> Option<Label> {
        Some(self.label)
    }
}

/// Probability distributions available as constants. None of them range over
/// functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Distribution {
    Bernoulli { p: f64 },
    Normal { mean: f64, sd: f64 },
    /// Shape/scale parameterization.
    Gamma { shape: f64, scale: f64 },
    Exponential { rate: f64 },
}

/// Primitive operators. They are constants of the calculus, always appear
/// saturated in call position, and are never analyzed as lambdas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Builtin {
    Add,
    Sub,
    Mul,
    Div,
    Le,
    Lt,
    Log,
    Exp,
    LogPdf,
    Bernoulli,
    Normal,
    Gamma,
    Exponential,
}

impl Builtin {
    pub fn arity(self) -> usize {
        match self {
            Builtin::Log | Builtin::Exp | Builtin::Bernoulli | Builtin::Exponential => 1,
            _ => 2,
        }
    }

    /// Name used in call syntax (`log(x)`, `normal(m, s)`), or the infix symbol.
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Add => "+",
            Builtin::Sub => "-",
            Builtin::Mul => "*",
            Builtin::Div => "/",
            Builtin::Le => "<=",
            Builtin::Lt => "<",
            Builtin::Log => "log",
            Builtin::Exp => "exp",
            Builtin::LogPdf => "logpdf",
            Builtin::Bernoulli => "bernoulli",
            Builtin::Normal => "normal",
            Builtin::Gamma => "gamma",
            Builtin::Exponential => "exponential",
        }
    }

    pub fn from_call_name(name: &str) -> Option<Builtin> {
        Some(match name {
            "log" => Builtin::Log,
            "exp" => Builtin::Exp,
            "logpdf" => Builtin::LogPdf,
            "bernoulli" => Builtin::Bernoulli,
            "normal" => Builtin::Normal,
            "gamma" => Builtin::Gamma,
            "exponential" => Builtin::Exponential,
            _ => return None,
        })
    }

    pub fn is_infix(self) -> bool {
        matches!(
            self,
            Builtin::Add | Builtin::Sub | Builtin::Mul | Builtin::Div | Builtin::Le | Builtin::Lt
        )
    }

    /// Distribution constructors build a distribution value; every other
    /// builtin computes a datum from its arguments.
    pub fn is_distribution(self) -> bool {
        matches!(
            self,
            Builtin::Bernoulli | Builtin::Normal | Builtin::Gamma | Builtin::Exponential
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Constant {
    Unit,
    Bool(bool),
    Real(f64),
    Dist(Distribution),
    Builtin(Builtin),
}

/// Shortest text that parses back to the same double.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "1e999".to_string() } else { "-1e999".to_string() }
    } else {
        format!("{x:?}")
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Distribution::Bernoulli { p } => write!(f, "bernoulli({})", fmt_real(p)),
            Distribution::Normal { mean, sd } => {
                write!(f, "normal({}, {})", fmt_real(mean), fmt_real(sd))
            }
            Distribution::Gamma { shape, scale } => {
                write!(f, "gamma({}, {})", fmt_real(shape), fmt_real(scale))
            }
            Distribution::Exponential { rate } => write!(f, "exponential({})", fmt_real(rate)),
        }
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Unit => write!(f, "()"),
            Constant::Bool(b) => write!(f, "{b}"),
            Constant::Real(x) => write!(f, "{}", fmt_real(*x)),
            Constant::Dist(d) => write!(f, "{d}"),
            Constant::Builtin(op) => write!(f, "{}", op.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TermKind<A> {
    Var(String),
    Const(Constant),
    Lam(String, Term<A>),
    App(Term<A>, Term<A>),
    Fix(Term<A>),
    If(Term<A>, Term<A>, Term<A>),
    Sample(Term<A>),
    Weight(Term<A>),
    DWeight(Term<A>),
    /// `weight k e`: adds `e` to the log-weight and pauses with continuation `k`.
    WeightCps(Term<A>, Term<A>),
    /// `dweight k e`: adds `e` to the log-weight and continues into `k`.
    DWeightCps(Term<A>, Term<A>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term<A> {
    pub ann: A,
    pub kind: Box<TermKind<A>>,
}

/// Desugared program, annotated with the source span of each node.
pub type CoreTerm = Term<Span>;
/// Program with a unique label on every subterm and unique binder names.
pub type LabeledTerm = Term<LabelInfo>;

impl<A> Term<A> {
    pub fn new(ann: A, kind: TermKind<A>) -> Self {
        Term {
            ann,
            kind: Box::new(kind),
        }
    }

    /// Direct subterms, left to right.
    pub fn children(&self) -> Vec<&Term<A>> {
        match &*self.kind {
            TermKind::Var(_) | TermKind::Const(_) => vec![],
            TermKind::Lam(_, b)
            | TermKind::Fix(b)
            | TermKind::Sample(b)
            | TermKind::Weight(b)
            | TermKind::DWeight(b) => vec![b],
            TermKind::App(a, b) | TermKind::WeightCps(a, b) | TermKind::DWeightCps(a, b) => {
                vec![a, b]
            }
            TermKind::If(c, t, e) => vec![c, t, e],
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Rebuild the tree with a new annotation on every node.
    pub fn map_ann<B>(&self, f: &mut impl FnMut(&A) -> B) -> Term<B> {
        let ann = f(&self.ann);
        let kind = match &*self.kind {
            TermKind::Var(x) => TermKind::Var(x.clone()),
            TermKind::Const(c) => TermKind::Const(c.clone()),
            TermKind::Lam(x, b) => TermKind::Lam(x.clone(), b.map_ann(f)),
            TermKind::App(a, b) => TermKind::App(a.map_ann(f), b.map_ann(f)),
            TermKind::Fix(b) => TermKind::Fix(b.map_ann(f)),
            TermKind::If(c, t, e) => TermKind::If(c.map_ann(f), t.map_ann(f), e.map_ann(f)),
            TermKind::Sample(b) => TermKind::Sample(b.map_ann(f)),
            TermKind::Weight(b) => TermKind::Weight(b.map_ann(f)),
            TermKind::DWeight(b) => TermKind::DWeight(b.map_ann(f)),
            TermKind::WeightCps(k, b) => TermKind::WeightCps(k.map_ann(f), b.map_ann(f)),
            TermKind::DWeightCps(k, b) => TermKind::DWeightCps(k.map_ann(f), b.map_ann(f)),
        };
        Term::new(ann, kind)
    }

    /// Drop all annotations.
    pub fn erase(&self) -> Term<()> {
        self.map_ann(&mut |_| ())
    }

    /// Free variables of the term, in first-occurrence order.
    pub fn free_vars(&self) -> Vec<String> {
        fn go<A>(t: &Term<A>, bound: &mut Vec<String>, out: &mut Vec<String>) {
            match &*t.kind {
                TermKind::Var(x) => {
                    if !bound.iter().any(|b| b == x) && !out.iter().any(|o| o == x) {
                        out.push(x.clone());
                    }
                }
                TermKind::Lam(x, b) => {
                    bound.push(x.clone());
                    go(b, bound, out);
                    bound.pop();
                }
                _ => {
                    for c in t.children() {
                        go(c, bound, out);
                    }
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// All binder names, in pre-order.
    pub fn binders(&self) -> Vec<&str> {
        fn go<'a, A>(t: &'a Term<A>, out: &mut Vec<&'a str>) {
            if let TermKind::Lam(x, _) = &*t.kind {
                out.push(x);
            }
            for c in t.children() {
                go(c, out);
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    pub fn has_free(&self, name: &str) -> bool {
        match &*self.kind {
            TermKind::Var(x) => x == name,
            TermKind::Lam(x, b) => x != name && b.has_free(name),
            _ => self.children().iter().any(|c| c.has_free(name)),
        }
    }

    /// If this node is a saturated-or-partial builtin application spine
    /// `op a1 ... ak`, return the operator and arguments.
    pub fn builtin_spine(&self) -> Option<(Builtin, Vec<&Term<A>>)> {
        let mut args = Vec::new();
        let mut head = self;
        while let TermKind::App(f, a) = &*head.kind {
            args.push(a);
            head = f;
        }
        match &*head.kind {
            TermKind::Const(Constant::Builtin(op)) if !args.is_empty() => {
                args.reverse();
                Some((*op, args))
            }
            _ => None,
        }
    }
}

impl LabeledTerm {
    pub fn label(&self) -> Label {
        self.ann.label
    }

    /// Every label in the program, in pre-order.
    pub fn labels(&self) -> Vec<Label> {
        let mut out = Vec::with_capacity(self.size());
        self.visit(&mut |t| out.push(t.label()));
        out
    }

    pub fn label_set(&self) -> BTreeSet<Label> {
        self.labels().into_iter().collect()
    }

    /// Pre-order visit.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a LabeledTerm)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Find the subterm with the given label.
    pub fn find(&self, label: Label) -> Option<&LabeledTerm> {
        if self.label() == label {
            return Some(self);
        }
        self.children().into_iter().find_map(|c| c.find(label))
    }
}

/// Shorthand constructors for unannotated terms, handy in tests and in
/// program generators.
pub mod build {
    use super::*;

    pub fn var(x: &str) -> Term<()> {
        Term::new((), TermKind::Var(x.to_string()))
    }
    pub fn real(c: f64) -> Term<()> {
        Term::new((), TermKind::Const(Constant::Real(c)))
    }
    pub fn boolean(b: bool) -> Term<()> {
        Term::new((), TermKind::Const(Constant::Bool(b)))
    }
    pub fn unit() -> Term<()> {
        Term::new((), TermKind::Const(Constant::Unit))
    }
    pub fn dist(d: Distribution) -> Term<()> {
        Term::new((), TermKind::Const(Constant::Dist(d)))
    }
    pub fn lam(x: &str, body: Term<()>) -> Term<()> {
        Term::new((), TermKind::Lam(x.to_string(), body))
    }
    pub fn app(f: Term<()>, a: Term<()>) -> Term<()> {
        Term::new((), TermKind::App(f, a))
    }
    pub fn fix(f: Term<()>) -> Term<()> {
        Term::new((), TermKind::Fix(f))
    }
    pub fn ite(c: Term<()>, t: Term<()>, e: Term<()>) -> Term<()> {
        Term::new((), TermKind::If(c, t, e))
    }
    pub fn sample(d: Term<()>) -> Term<()> {
        Term::new((), TermKind::Sample(d))
    }
    pub fn weight(w: Term<()>) -> Term<()> {
        Term::new((), TermKind::Weight(w))
    }
    pub fn dweight(w: Term<()>) -> Term<()> {
        Term::new((), TermKind::DWeight(w))
    }
    pub fn prim(op: Builtin, args: Vec<Term<()>>) -> Term<()> {
        args.into_iter().fold(
            Term::new((), TermKind::Const(Constant::Builtin(op))),
            app,
        )
    }

    /// Attach synthetic spans so the term can be used where a [`CoreTerm`]
    /// is expected.
    pub fn core(t: Term<()>) -> CoreTerm {
        t.map_ann(&mut |_| Span::SYNTHETIC)
    }
}

/// Alpha-equivalence, ignoring annotations.
pub fn alpha_eq<A, B>(a: &Term<A>, b: &Term<B>) -> bool {
    fn go<A, B>(a: &Term<A>, b: &Term<B>, env: &mut Vec<(String, String)>) -> bool {
        match (&*a.kind, &*b.kind) {
            (TermKind::Var(x), TermKind::Var(y)) => {
                for (l, r) in env.iter().rev() {
                    if l == x || r == y {
                        return l == x && r == y;
                    }
                }
                x == y
            }
            (TermKind::Const(c), TermKind::Const(d)) => match (c, d) {
                (Constant::Real(x), Constant::Real(y)) => x.to_bits() == y.to_bits(),
                _ => c == d,
            },
            (TermKind::Lam(x, p), TermKind::Lam(y, q)) => {
                env.push((x.clone(), y.clone()));
                let r = go(p, q, env);
                env.pop();
                r
            }
            (TermKind::App(a1, a2), TermKind::App(b1, b2))
            | (TermKind::WeightCps(a1, a2), TermKind::WeightCps(b1, b2))
            | (TermKind::DWeightCps(a1, a2), TermKind::DWeightCps(b1, b2)) => {
                go(a1, b1, env) && go(a2, b2, env)
            }
            (TermKind::Fix(p), TermKind::Fix(q))
            | (TermKind::Sample(p), TermKind::Sample(q))
            | (TermKind::Weight(p), TermKind::Weight(q))
            | (TermKind::DWeight(p), TermKind::DWeight(q)) => go(p, q, env),
            (TermKind::If(a1, a2, a3), TermKind::If(b1, b2, b3)) => {
                go(a1, b1, env) && go(a2, b2, env) && go(a3, b3, env)
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}

#[cfg(test)]
mod tests {
    use super::build::*;
    use super::*;

    #[test]
    fn alpha_eq_respects_binding_structure() {
        let a = lam("x", lam("y", var("x")));
        let b = lam("p", lam("q", var("p")));
        let c = lam("p", lam("q", var("q")));
        assert!(alpha_eq(&a, &b));
        assert!(!alpha_eq(&a, &c));
    }

    #[test]
    fn builtin_spine_is_recovered() {
        let t = prim(Builtin::Add, vec![real(1.0), var("x")]);
        let (op, args) = t.builtin_spine().unwrap();
        assert_eq!(op, Builtin::Add);
        assert_eq!(args.len(), 2);
        assert!(app(var("f"), real(1.0)).builtin_spine().is_none());
    }

    #[test]
    fn free_vars_skip_bound_names() {
        let t = app(lam("x", app(var("x"), var("y"))), var("z"));
        assert_eq!(t.free_vars(), vec!["y".to_string(), "z".to_string()]);
    }
}
