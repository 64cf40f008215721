//! Small-step reducer for Core delimcc.
//!
//! The machine keeps the evaluation context as an explicit stack of frames.
//! `sh0 p` cuts the stack at the nearest `pushpr p` frame; the frames above it
//! become a continuation value which, when applied, pushes `pushpr p` and the
//! saved frames back. Captured frames keep their environments, so a
//! continuation can be resumed any number of times.

mod machine;
pub mod rewrite;

pub use machine::{
    run_step, run_step_session, run_step_traced, Frame, MValue, Machine, Step, STEP_TRACE_LIMIT,
};
