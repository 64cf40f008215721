//! Core Eff and Core delimcc as executable definitions.
//!
//! The crate contains:
//!
//! * [`surface`]: a small Eff-like source language, its parser, pretty printer,
//!   multi-operation desugaring and lowering into Core Eff;
//! * [`dyneff`]: the expansion of dynamically created effects (`withnew`,
//!   `newref`, `get`, `put`) into ordinary handlers;
//! * [`core_eff`] and [`eff_denot`]: Core Eff, its typechecker and its
//!   denotational interpreter;
//! * [`core_delimcc`], [`delimcc_denot`] and [`delimcc_step`]: Core delimcc,
//!   its typechecker, its direct ("bubble-up") denotational interpreter and a
//!   small-step reducer over evaluation contexts;
//! * [`translate`]: the compositional translation from Core Eff to Core delimcc.
//!
//! All three evaluators report an [`Outcome`] with a byte-identical rendering, so
//! agreement between them is plain equality.

pub mod core_delimcc;
pub mod core_eff;
pub mod delimcc_denot;
pub mod delimcc_step;
pub mod dyneff;
pub mod eff_denot;
mod name;
pub mod observe;
pub mod pipeline;
pub mod prim;
pub mod surface;
pub mod translate;

pub use name::Name;
pub use observe::{ErrorKind, Observed, Outcome, RunError, Session, DEFAULT_FUEL};
