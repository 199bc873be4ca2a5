//! Closure conversion: variables are resolved to either the parameter of the
//! enclosing lambda or a slot in its captured environment, so evaluation never
//! looks names up.

use std::sync::Arc;

use crate::ast::{Annotation, Builtin, Constant, Label, Span, Term, TermKind};

use super::value::Value;
use super::RuntimeError;

pub(crate) type LamId = u32;

#[derive(Clone, Copy, Debug)]
pub(crate) enum VarRef {
    Param,
    Captured(u32),
}

#[derive(Debug)]
pub(crate) struct Node {
    pub code: Code,
    pub span: Span,
    pub label: Option<Label>,
}

#[derive(Debug)]
pub(crate) enum Code {
    Var(VarRef),
    Const(Value),
    Lam(LamId),
    App(Box<Node>, Box<Node>),
    /// Saturated builtin application, arguments left to right.
    Prim(Builtin, Vec<Node>),
    Fix(Box<Node>),
    If(Box<Node>, Box<Node>, Box<Node>),
    Sample(Box<Node>),
    Weight(Box<Node>),
    DWeight(Box<Node>),
    WeightCps(Box<Node>, Box<Node>),
    DWeightCps(Box<Node>, Box<Node>),
}

#[derive(Debug)]
pub(crate) struct LamCode {
    pub captures: Vec<VarRef>,
    pub body: Node,
}

#[derive(Debug)]
pub(crate) struct Program {
    pub lams: Vec<LamCode>,
    pub main: Node,
}

struct Ctx {
    param: Option<String>,
    captures: Vec<String>,
    refs: Vec<VarRef>,
}

struct Compiler {
    ctxs: Vec<Ctx>,
    lams: Vec<Option<LamCode>>,
}

pub(crate) fn compile<A: Annotation>(t: &Term<A>) -> Result<Arc<Program>, RuntimeError> {
    let mut c = Compiler {
        ctxs: vec![Ctx {
            param: None,
            captures: Vec::new(),
            refs: Vec::new(),
        }],
        lams: Vec::new(),
    };
    let main = c.node(t)?;
    let lams = c
        .lams
        .into_iter()
        .map(|l| l.expect("every lambda is finished"))
        .collect();
    Ok(Arc::new(Program { lams, main }))
}

impl Compiler {
    fn resolve(&mut self, depth: usize, name: &str) -> Option<VarRef> {
        let ctx = &self.ctxs[depth];
        if ctx.param.as_deref() == Some(name) {
            return Some(VarRef::Param);
        }
        if let Some(i) = ctx.captures.iter().position(|c| c == name) {
            return Some(VarRef::Captured(i as u32));
        }
        if depth == 0 {
            return None;
        }
        let outer = self.resolve(depth - 1, name)?;
        let ctx = &mut self.ctxs[depth];
        ctx.captures.push(name.to_string());
        ctx.refs.push(outer);
        Some(VarRef::Captured(ctx.refs.len() as u32 - 1))
    }

    fn node<A: Annotation>(&mut self, t: &Term<A>) -> Result<Node, RuntimeError> {
        let span = t.ann.span();
        let label = t.ann.label();
        let b = |n: Node| Box::new(n);
        if let Some((op, args)) = t.builtin_spine() {
            if args.len() == op.arity() {
                let args = args
                    .into_iter()
                    .map(|a| self.node(a))
                    .collect::<Result<_, _>>()?;
                return Ok(Node {
                    code: Code::Prim(op, args),
                    span,
                    label,
                });
            }
        }
        let code = match &*t.kind {
            TermKind::Var(x) => {
                let depth = self.ctxs.len() - 1;
                let r = self.resolve(depth, x).ok_or_else(|| RuntimeError::Unbound {
                    span,
                    name: x.clone(),
                })?;
                Code::Var(r)
            }
            TermKind::Const(c) => Code::Const(match c {
                Constant::Unit => Value::Unit,
                Constant::Bool(v) => Value::Bool(*v),
                Constant::Real(x) => Value::Real(*x),
                Constant::Dist(d) => Value::Dist(*d),
                Constant::Builtin(op) => Value::Partial(*op, Arc::new(Vec::new())),
            }),
            TermKind::Lam(x, body) => {
                let id = self.lams.len();
                self.lams.push(None);
                self.ctxs.push(Ctx {
                    param: Some(x.clone()),
                    captures: Vec::new(),
                    refs: Vec::new(),
                });
                let body = self.node(body);
                let ctx = self.ctxs.pop().expect("pushed above");
                self.lams[id] = Some(LamCode {
                    captures: ctx.refs,
                    body: body?,
                });
                Code::Lam(id as LamId)
            }
            TermKind::App(f, a) => Code::App(b(self.node(f)?), b(self.node(a)?)),
            TermKind::Fix(f) => Code::Fix(b(self.node(f)?)),
            TermKind::If(c, x, y) => {
                Code::If(b(self.node(c)?), b(self.node(x)?), b(self.node(y)?))
            }
            TermKind::Sample(d) => Code::Sample(b(self.node(d)?)),
            TermKind::Weight(w) => Code::Weight(b(self.node(w)?)),
            TermKind::DWeight(w) => Code::DWeight(b(self.node(w)?)),
            TermKind::WeightCps(k, w) => Code::WeightCps(b(self.node(k)?), b(self.node(w)?)),
            TermKind::DWeightCps(k, w) => Code::DWeightCps(b(self.node(k)?), b(self.node(w)?)),
        };
        Ok(Node { code, span, label })
    }
}
