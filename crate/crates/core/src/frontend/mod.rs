//! Kernel-language front end: lexer, parser, OpenMP pragmas and directive
//! extraction.

use std::fmt;

use serde::Serialize;

mod ast;
pub mod directive;
mod lexer;
mod parser;
mod pragma;
mod pretty;

pub use ast::*;
pub use directive::{extract_directives, Directive, VarClass};
pub use parser::parse;
pub use pragma::{
    parse_pragma, Clause, DirectiveKind, Pragma, PragmaLine, ReductionOp, Schedule, ScheduleKind,
    ScheduleModifier,
};
pub use pretty::{erase_spans, expr as pretty_expr, pretty};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Syntax,
    UnknownPragma,
    Semantic,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Syntax => "syntax error",
            ErrorKind::UnknownPragma => "unknown pragma",
            ErrorKind::Semantic => "semantic error",
        })
    }
}

/// A fatal front-end error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontendError {
    pub kind: ErrorKind,
    pub span: Span,
    pub message: String,
}

impl FrontendError {
    pub fn new(kind: ErrorKind, span: Span, message: impl Into<String>) -> Self {
        FrontendError {
            kind,
            span,
            message: message.into(),
        }
    }
}

impl fmt::Display for FrontendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.span, self.kind, self.message)
    }
}

impl std::error::Error for FrontendError {}

/// A non-fatal front-end warning.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: ErrorKind,
    pub span: Span,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: warning: {}", self.span, self.message)
    }
}
