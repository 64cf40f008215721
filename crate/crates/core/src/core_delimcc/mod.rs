//! Core delimcc: multi-prompt delimited control with `sh0`/`pushpr`, a built-in
//! free structure (`ret`/`act`) and a universal type.

mod ast;
mod check;
pub mod fixtures;
mod sexpr;

pub use ast::{DComp, DProgram, DType, DValue};
pub use check::{check_delimcc, check_value, prim_dtype, DTypeCtx};
