//! The surface language: parsing, pretty printing, elaboration, multi-operation
//! desugaring and lowering to Core Eff.

pub mod ast;
pub mod desugar;
pub mod eval;
pub mod lexer;
pub mod lower;
pub mod parser;
pub mod pretty;
mod scope;
pub mod typing;

use std::fmt;

pub use ast::{Expr, ExprKind, SurfaceProgram, Type};
pub use desugar::desugar_multi_op;
pub use lower::lower;
pub use parser::{parse, parse_type};
pub use pretty::{pretty, pretty_expr, pretty_type};
pub use typing::elaborate;

use ast::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Parse,
    Scope,
    Type,
    Desugar,
    Expand,
}

/// An error in a surface program, with the position it was detected at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceError {
    pub phase: Phase,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl SurfaceError {
    fn at(phase: Phase, span: Span, message: impl Into<String>) -> SurfaceError {
        SurfaceError {
            phase,
            line: span.line,
            col: span.col,
            message: message.into(),
        }
    }

    pub fn parse(span: Span, message: impl Into<String>) -> SurfaceError {
        SurfaceError::at(Phase::Parse, span, message)
    }

    pub fn scope(span: Span, message: impl Into<String>) -> SurfaceError {
        SurfaceError::at(Phase::Scope, span, message)
    }

    pub fn ty(span: Span, message: impl Into<String>) -> SurfaceError {
        SurfaceError::at(Phase::Type, span, message)
    }

    pub fn desugar(span: Span, message: impl Into<String>) -> SurfaceError {
        SurfaceError::at(Phase::Desugar, span, message)
    }

    pub fn expand(span: Span, message: impl Into<String>) -> SurfaceError {
        SurfaceError::at(Phase::Expand, span, message)
    }
}

impl fmt::Display for SurfaceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.phase {
            Phase::Parse => "parse error",
            Phase::Scope => "scope error",
            Phase::Type => "type error",
            Phase::Desugar => "desugar error",
            Phase::Expand => "expand error",
        };
        if self.line == 0 {
            write!(f, "{what}: {}", self.message)
        } else {
            write!(f, "{what} at {}:{}: {}", self.line, self.col, self.message)
        }
    }
}

impl std::error::Error for SurfaceError {}
