//! Primitive operations shared by every language level.
//!
//! Booleans are `unit + unit` with `inl ()` as true. Each evaluator maps
//! [`PrimResult`] back into its own value domain.

use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Prim {
    Add,
    Sub,
    Mul,
    Band,
    Eq,
    Lt,
    Show,
    Concat,
    /// `unit -> empty`; applying it is a tag-mismatch runtime error. Used by the
    /// multi-operation desugaring for branches that a well-behaved handler never reaches.
    TagMismatch,
}

/// Argument and result shapes of a primitive, independent of any type language.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Unit,
    Int,
    Str,
    Bool,
    Empty,
}

pub enum PrimResult {
    Int(i64),
    Str(String),
    Bool(bool),
}

pub const ALL: [Prim; 9] = [
    Prim::Add,
    Prim::Sub,
    Prim::Mul,
    Prim::Band,
    Prim::Eq,
    Prim::Lt,
    Prim::Show,
    Prim::Concat,
    Prim::TagMismatch,
];

impl Prim {
    pub fn name(self) -> &'static str {
        match self {
            Prim::Add => "add",
            Prim::Sub => "sub",
            Prim::Mul => "mul",
            Prim::Band => "band",
            Prim::Eq => "eq",
            Prim::Lt => "lt",
            Prim::Show => "show",
            Prim::Concat => "concat",
            Prim::TagMismatch => "tag_mismatch",
        }
    }

    /// Curried signature: argument shapes then result shape.
    pub fn signature(self) -> (&'static [Shape], Shape) {
        use Shape::*;
        match self {
            Prim::Add | Prim::Sub | Prim::Mul | Prim::Band => (&[Int, Int], Int),
            Prim::Eq | Prim::Lt => (&[Int, Int], Bool),
            Prim::Show => (&[Int], Str),
            Prim::Concat => (&[Str, Str], Str),
            Prim::TagMismatch => (&[Unit], Empty),
        }
    }

    pub fn arity(self) -> usize {
        self.signature().0.len()
    }

    pub fn apply_int2(self, a: i64, b: i64) -> PrimResult {
        match self {
            Prim::Add => PrimResult::Int(a.wrapping_add(b)),
            Prim::Sub => PrimResult::Int(a.wrapping_sub(b)),
            Prim::Mul => PrimResult::Int(a.wrapping_mul(b)),
            Prim::Band => PrimResult::Int(a & b),
            Prim::Eq => PrimResult::Bool(a == b),
            Prim::Lt => PrimResult::Bool(a < b),
            _ => unreachable!("{} is not a binary integer primitive", self.name()),
        }
    }
}

impl fmt::Display for Prim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Prim {
    type Err = ();
    fn from_str(s: &str) -> Result<Prim, ()> {
        ALL.iter().copied().find(|p| p.name() == s).ok_or(())
    }
}

/// A first-order primitive argument, extracted from an evaluator's value domain.
#[derive(Clone, Debug, PartialEq)]
pub enum PrimArg {
    Unit,
    Int(i64),
    Str(String),
}

/// Apply a fully saturated primitive.
pub fn apply(prim: Prim, args: &[PrimArg]) -> Result<PrimResult, crate::RunError> {
    use crate::RunError;
    let bad = || RunError::TagMismatch(format!("bad arguments to primitive {prim}"));
    match (prim, args) {
        (
            Prim::Add | Prim::Sub | Prim::Mul | Prim::Band | Prim::Eq | Prim::Lt,
            [PrimArg::Int(a), PrimArg::Int(b)],
        ) => Ok(prim.apply_int2(*a, *b)),
        (Prim::Show, [PrimArg::Int(a)]) => Ok(PrimResult::Str(a.to_string())),
        (Prim::Concat, [PrimArg::Str(a), PrimArg::Str(b)]) => {
            Ok(PrimResult::Str(format!("{a}{b}")))
        }
        (Prim::TagMismatch, [PrimArg::Unit]) => Err(RunError::TagMismatch(
            "operation result tag does not match its request".into(),
        )),
        _ => Err(bad()),
    }
}
