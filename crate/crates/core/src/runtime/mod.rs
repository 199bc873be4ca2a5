//! Evaluation of core and CPS programs: a CEK-style machine over
//! closure-converted code, with seeded random draws.

mod builtin;
mod compile;
mod dist;
mod machine;
mod rng;
mod value;

pub use builtin::{apply_builtin, BuiltinError};
pub use dist::{draw, log_density, validate, InvalidParameters};
pub use machine::{Evaluator, Observer, Outcome, TraceEvent, WeightKind};
pub use rng::{Rng, RngStream};
pub use value::{Closure, Value};

use crate::ast::{Annotation, Span, Term};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum RuntimeError {
    #[error("{span}: type error: {message}")]
    Type { span: Span, message: String },
    #[error("{span}: unbound variable `{name}`")]
    Unbound { span: Span, name: String },
    #[error("{span}: invalid distribution parameters: {dist}")]
    InvalidDistribution { span: Span, dist: String },
    #[error("{span}: weight is NaN")]
    NanWeight { span: Span },
    #[error("{span}: weight would pause with pending work; only CPS-converted programs can pause")]
    PauseNotInTailPosition { span: Span },
}

/// Compile and run a closed program once.
pub fn eval<A: Annotation>(t: &Term<A>, w0: f64, rng: &mut Rng) -> Result<Outcome, RuntimeError> {
    Evaluator::new(t)?.eval(w0, rng)
}
