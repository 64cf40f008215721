//! Core Eff: single-operation effects with first-class instances and handlers.

mod ast;
mod check;
mod sexpr;

pub use ast::{CoreComp, CoreEffProgram, CoreType, CoreValue, Handler};
pub use check::{infer_comp, infer_value, is_core_anf, prim_type, TypeCtx, TypeError};
