//! From source text to Core Eff, and from Core Eff to an [`Outcome`] along
//! each of the three evaluation routes.

use std::fmt;
use std::str::FromStr;

use crate::core_eff::{infer_comp, CoreEffProgram, CoreType, TypeCtx, TypeError};
use crate::delimcc_denot::run_delimcc_session;
use crate::delimcc_step::run_step_session;
use crate::dyneff::expand_dynamic;
use crate::eff_denot::run_eff_session;
use crate::surface::{desugar_multi_op, elaborate, lower, parse, SurfaceError, SurfaceProgram};
use crate::translate::translate;
use crate::Outcome;

/// Which evaluator runs a program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Semantics {
    /// The Core Eff denotational interpreter.
    Eff,
    /// Translation to Core delimcc, then its denotational interpreter.
    Trans,
    /// Translation to Core delimcc, then the small-step reducer.
    Step,
}

impl Semantics {
    pub const ALL: [Semantics; 3] = [Semantics::Eff, Semantics::Trans, Semantics::Step];

    pub fn name(self) -> &'static str {
        match self {
            Semantics::Eff => "eff",
            Semantics::Trans => "trans",
            Semantics::Step => "step",
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Semantics {
    type Err = String;
    fn from_str(s: &str) -> Result<Semantics, String> {
        Semantics::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown semantics `{s}` (expected eff, trans or step)"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PipelineError {
    Surface(SurfaceError),
    Type(TypeError),
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::Surface(e) => write!(f, "{e}"),
            PipelineError::Type(e) => write!(f, "type error: {e}"),
        }
    }
}

impl std::error::Error for PipelineError {}

impl From<SurfaceError> for PipelineError {
    fn from(e: SurfaceError) -> Self {
        PipelineError::Surface(e)
    }
}

impl From<TypeError> for PipelineError {
    fn from(e: TypeError) -> Self {
        PipelineError::Type(e)
    }
}

/// A checked program at every stage the tools can show.
#[derive(Clone, Debug)]
pub struct Compiled {
    /// The parsed and elaborated program, before any rewriting.
    pub source: SurfaceProgram,
    /// Single-operation, expanded and elaborated.
    pub single_op: SurfaceProgram,
    pub core: CoreEffProgram,
    pub ty: CoreType,
}

/// Parse and elaborate, without rewriting.
pub fn front(src: &str) -> Result<SurfaceProgram, SurfaceError> {
    let mut p = parse(src)?;
    elaborate(&mut p)?;
    Ok(p)
}

/// Expand dynamic effects and desugar multi-operation effects, elaborating after each pass.
pub fn to_single_op(p: &SurfaceProgram) -> Result<SurfaceProgram, SurfaceError> {
    let mut expanded = expand_dynamic(p)?;
    elaborate(&mut expanded)?;
    let mut single = desugar_multi_op(&expanded)?;
    elaborate(&mut single)?;
    Ok(single)
}

pub fn compile_surface(source: SurfaceProgram) -> Result<Compiled, PipelineError> {
    let single_op = to_single_op(&source)?;
    let core = lower(&single_op)?;
    let ty = infer_comp(&mut TypeCtx::new(), &core.body)?;
    Ok(Compiled {
        source,
        single_op,
        core,
        ty,
    })
}

pub fn compile(src: &str) -> Result<Compiled, PipelineError> {
    compile_surface(front(src)?)
}

/// Run a Core Eff program along one route.
pub fn run_core(p: &CoreEffProgram, semantics: Semantics, fuel: u64) -> Result<Outcome, TypeError> {
    Ok(run_core_counted(p, semantics, fuel)?.0)
}

/// Like [`run_core`], also reporting the number of steps charged against the fuel.
pub fn run_core_counted(
    p: &CoreEffProgram,
    semantics: Semantics,
    fuel: u64,
) -> Result<(Outcome, u64), TypeError> {
    let (outcome, session) = match semantics {
        Semantics::Eff => run_eff_session(p, fuel),
        Semantics::Trans => run_delimcc_session(&translate(p)?, fuel),
        Semantics::Step => run_step_session(&translate(p)?, fuel),
    };
    Ok((outcome, session.steps()))
}

pub fn run_source(src: &str, semantics: Semantics, fuel: u64) -> Result<Outcome, PipelineError> {
    let c = compile(src)?;
    Ok(run_core(&c.core, semantics, fuel)?)
}
