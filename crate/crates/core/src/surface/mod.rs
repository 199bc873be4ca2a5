//! Concrete syntax: a small JavaScript-flavored language that desugars into
//! the core calculus, plus a printer that goes back the other way.

mod desugar;
mod lexer;
mod parser;
mod pretty;
mod syntax;

pub use desugar::desugar;
pub use parser::parse_program;
pub use pretty::pretty;
pub use syntax::{Block, Expr, ExprKind, Item, SurfaceAst, RESERVED_CALLS};

use crate::ast::{CoreTerm, Span};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SurfaceError {
    #[error("{span}: parse error: {message}")]
    Parse { span: Span, message: String },
    #[error("{span}: unbound variable `{name}`")]
    Unbound { span: Span, name: String },
    #[error("{span}: {message}")]
    Invalid { span: Span, message: String },
}

impl SurfaceError {
    pub fn span(&self) -> Span {
        match self {
            SurfaceError::Parse { span, .. }
            | SurfaceError::Unbound { span, .. }
            | SurfaceError::Invalid { span, .. } => *span,
        }
    }
}

/// Parse and desugar in one step.
pub fn parse_core(source: &str) -> Result<CoreTerm, SurfaceError> {
    desugar(&parse_program(source)?)
}
