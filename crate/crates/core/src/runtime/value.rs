use std::fmt;
use std::sync::Arc;

use crate::ast::{fmt_real, Builtin, Distribution};

use super::compile::LamId;

/// Runtime values. Cheap to clone; closures share their captured
/// environment.
#[derive(Clone, Debug)]
pub enum Value {
    Unit,
    Bool(bool),
    Real(f64),
    Dist(Distribution),
    Closure(Arc<Closure>),
    /// `fix f` for a closure `f`: applying it to `v` applies `f` to itself
    /// and the result to `v`.
    Fix(Arc<Closure>),
    /// A builtin waiting for more arguments.
    Partial(Builtin, Arc<Vec<Value>>),
    /// A value that depends on a random draw. Only produced by the
    /// instrumented evaluator.
    Tainted(Box<Value>),
}

#[derive(Debug)]
pub struct Closure {
    pub(crate) lam: LamId,
    pub(crate) captured: Arc<[Value]>,
}

impl Value {
    /// Strip any taint marker.
    pub fn plain(&self) -> &Value {
        match self {
            Value::Tainted(v) => v.plain(),
            v => v,
        }
    }

    pub fn is_tainted(&self) -> bool {
        matches!(self, Value::Tainted(_))
    }

    pub fn as_real(&self) -> Option<f64> {
        match self.plain() {
            Value::Real(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self.plain() {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self.plain() {
            Value::Unit => "unit",
            Value::Bool(_) => "boolean",
            Value::Real(_) => "real",
            Value::Dist(_) => "distribution",
            Value::Closure(_) | Value::Fix(_) | Value::Partial(..) => "function",
            Value::Tainted(_) => unreachable!(),
        }
    }

    /// Structural equality on data; functions are never equal. Reals
    /// compare bit-for-bit so that reproducibility checks are exact.
    pub fn same(&self, other: &Value) -> bool {
        match (self.plain(), other.plain()) {
            (Value::Unit, Value::Unit) => true,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Real(a), Value::Real(b)) => a.to_bits() == b.to_bits(),
            (Value::Dist(a), Value::Dist(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.plain() {
            Value::Unit => write!(f, "()"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Real(x) => write!(f, "{}", fmt_real(*x)),
            Value::Dist(d) => write!(f, "{d}"),
            Value::Closure(_) | Value::Fix(_) => write!(f, "<function>"),
            Value::Partial(op, _) => write!(f, "<builtin {}>", op.name()),
            Value::Tainted(_) => unreachable!(),
        }
    }
}
