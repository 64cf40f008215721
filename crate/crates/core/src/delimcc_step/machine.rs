use std::fmt;
use std::rc::Rc;

use crate::core_delimcc::{check_delimcc, prim_dtype, DComp, DProgram, DType, DTypeCtx, DValue};
use crate::core_eff::TypeError;
use crate::observe::{Observed, Outcome, RunError, Session};
use crate::prim::{self, Prim, PrimArg, PrimResult};
use crate::Name;

/// Upper bound on the number of configurations recorded by [`run_step_traced`].
pub const STEP_TRACE_LIMIT: usize = 10_000;

type Env<'a> = im::HashMap<Name, MValue<'a>>;

#[derive(Clone)]
pub enum MValue<'a> {
    Unit,
    Int(i64),
    Str(Rc<str>),
    Prompt {
        id: u64,
        answer: &'a DType,
    },
    Pair(Rc<(MValue<'a>, MValue<'a>)>),
    Inl(Rc<MValue<'a>>, &'a DType),
    Inr(Rc<MValue<'a>>, &'a DType),
    Univ(Rc<MValue<'a>>),
    Ret(Rc<MValue<'a>>, &'a DType),
    Act(Rc<(MValue<'a>, MValue<'a>)>),
    Closure(Rc<Closure<'a>>),
    Prim(Prim, Rc<Vec<PrimArg>>),
    /// A captured continuation `fun x -> pushpr p Cp[x]`.
    Cont(Rc<Captured<'a>>),
}

pub struct Closure<'a> {
    self_name: Option<&'a Name>,
    param: &'a Name,
    param_ty: &'a DType,
    ret_ty: Option<&'a DType>,
    body: &'a DComp,
    env: Env<'a>,
}

pub struct Captured<'a> {
    prompt: u64,
    answer: &'a DType,
    hole_ty: &'a DType,
    /// Frames between the `sh0` and its prompt, innermost last.
    frames: Vec<Frame<'a>>,
}

#[derive(Clone)]
pub enum Frame<'a> {
    Let {
        binder: &'a Name,
        body: &'a DComp,
        env: Env<'a>,
    },
    PushPr {
        id: u64,
        answer: &'a DType,
    },
}

enum Control<'a> {
    Eval(&'a DComp, Env<'a>),
    Return(MValue<'a>),
}

pub enum Step<'a> {
    Continue,
    Done(MValue<'a>),
    /// `sh0` found no matching `pushpr` anywhere on the stack.
    Unhandled(u64),
}

pub struct Machine<'a> {
    control: Control<'a>,
    stack: Vec<Frame<'a>>,
    pub session: Session,
}

impl fmt::Debug for MValue<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.observe())
    }
}

impl<'a> MValue<'a> {
    pub fn observe(&self) -> Observed {
        match self {
            MValue::Unit => Observed::Unit,
            MValue::Int(n) => Observed::Int(*n),
            MValue::Str(s) => Observed::Str(s.to_string()),
            MValue::Prompt { id, .. } => Observed::Inst(*id),
            MValue::Pair(p) => Observed::Pair(Box::new(p.0.observe()), Box::new(p.1.observe())),
            MValue::Inl(v, _) => Observed::Inl(Box::new(v.observe())),
            MValue::Inr(v, _) => Observed::Inr(Box::new(v.observe())),
            MValue::Univ(_) => Observed::Opaque("univ".into()),
            MValue::Ret(..) | MValue::Act(_) => Observed::Opaque("free".into()),
            MValue::Closure(_) | MValue::Prim(..) | MValue::Cont(_) => Observed::Fn,
        }
    }

    fn conforms(&self, t: &DType) -> bool {
        match (self, t) {
            (_, DType::Dyn) => true,
            (MValue::Unit, DType::Unit)
            | (MValue::Int(_), DType::Int)
            | (MValue::Str(_), DType::Str) => true,
            (MValue::Pair(p), DType::Pair(a, b)) => p.0.conforms(a) && p.1.conforms(b),
            (MValue::Inl(v, _), DType::Sum(a, _)) => v.conforms(a),
            (MValue::Inr(v, _), DType::Sum(_, b)) => v.conforms(b),
            (MValue::Closure(_) | MValue::Prim(..) | MValue::Cont(_), DType::Arrow(..)) => true,
            (MValue::Prompt { answer, .. }, DType::Prompt(a)) => *answer == &**a,
            (MValue::Univ(_), DType::Univ)
            | (MValue::Ret(..) | MValue::Act(_), DType::Free(..)) => true,
            _ => false,
        }
    }

    /// The type of a runtime value, reconstructed from the annotations it carries.
    pub fn type_of(&self) -> Result<DType, TypeError> {
        Ok(match self {
            MValue::Unit => DType::Unit,
            MValue::Int(_) => DType::Int,
            MValue::Str(_) => DType::Str,
            MValue::Prompt { answer, .. } => DType::prompt((*answer).clone()),
            MValue::Pair(p) => DType::pair(p.0.type_of()?, p.1.type_of()?),
            MValue::Inl(_, t) | MValue::Inr(_, t) | MValue::Ret(_, t) => (*t).clone(),
            MValue::Univ(_) => DType::Univ,
            MValue::Act(p) => match p.1.type_of()? {
                DType::Arrow(_, free) => *free,
                other => return Err(type_mismatch("a continuation", other)),
            },
            MValue::Closure(c) => {
                let ret = match c.ret_ty {
                    Some(t) => t.clone(),
                    None => {
                        let mut ctx = env_ctx(&c.env)?;
                        ctx.push(c.param.clone(), c.param_ty.clone());
                        check_delimcc(&mut ctx, c.body)?
                    }
                };
                DType::arrow(c.param_ty.clone(), ret)
            }
            MValue::Prim(p, args) => {
                let mut t = prim_dtype(*p);
                for _ in 0..args.len() {
                    t = match t {
                        DType::Arrow(_, r) => *r,
                        other => return Err(type_mismatch("a primitive function", other)),
                    };
                }
                t
            }
            MValue::Cont(c) => DType::arrow(c.hole_ty.clone(), c.answer.clone()),
        })
    }
}

fn type_mismatch(expected: &str, found: impl fmt::Display) -> TypeError {
    TypeError {
        location: "machine".into(),
        expected: expected.into(),
        found: found.to_string(),
    }
}

fn env_ctx(env: &Env<'_>) -> Result<DTypeCtx, TypeError> {
    let mut ctx = DTypeCtx::new();
    for (name, v) in env.iter() {
        ctx.push(name.clone(), v.type_of()?);
    }
    Ok(ctx)
}

fn prim_arg(v: &MValue<'_>) -> Result<PrimArg, RunError> {
    match v {
        MValue::Unit => Ok(PrimArg::Unit),
        MValue::Int(n) => Ok(PrimArg::Int(*n)),
        MValue::Str(s) => Ok(PrimArg::Str(s.to_string())),
        other => Err(RunError::TagMismatch(format!(
            "primitive argument {other:?}"
        ))),
    }
}

fn bool_value<'a>(b: bool) -> MValue<'a> {
    // booleans produced by primitives carry no source annotation; both summands are unit
    static BOOL: std::sync::OnceLock<DType> = std::sync::OnceLock::new();
    let t: &'static DType = BOOL.get_or_init(|| DType::sum(DType::Unit, DType::Unit));
    if b {
        MValue::Inl(Rc::new(MValue::Unit), t)
    } else {
        MValue::Inr(Rc::new(MValue::Unit), t)
    }
}

fn value<'a>(env: &Env<'a>, v: &'a DValue) -> Result<MValue<'a>, RunError> {
    Ok(match v {
        DValue::Var(x) => env
            .get(x)
            .cloned()
            .ok_or_else(|| RunError::Stuck(format!("unbound variable {x}")))?,
        DValue::Unit => MValue::Unit,
        DValue::Int(n) => MValue::Int(*n),
        DValue::Str(s) => MValue::Str(s.as_str().into()),
        DValue::Prim(p) => MValue::Prim(*p, Rc::new(Vec::new())),
        DValue::Lam {
            param,
            param_ty,
            body,
        } => MValue::Closure(Rc::new(Closure {
            self_name: None,
            param,
            param_ty,
            ret_ty: None,
            body,
            env: env.clone(),
        })),
        DValue::RecLam {
            self_name,
            param,
            param_ty,
            ret_ty,
            body,
        } => MValue::Closure(Rc::new(Closure {
            self_name: Some(self_name),
            param,
            param_ty,
            ret_ty: Some(ret_ty),
            body,
            env: env.clone(),
        })),
        DValue::IUniv(v) => MValue::Univ(Rc::new(value(env, v)?)),
        DValue::Ret(v, t) => MValue::Ret(Rc::new(value(env, v)?), t),
        DValue::Act(a, k) => MValue::Act(Rc::new((value(env, a)?, value(env, k)?))),
        DValue::Pair(a, b) => MValue::Pair(Rc::new((value(env, a)?, value(env, b)?))),
        DValue::Inl(v, t) => MValue::Inl(Rc::new(value(env, v)?), t),
        DValue::Inr(v, t) => MValue::Inr(Rc::new(value(env, v)?), t),
    })
}

enum Transition<'a> {
    Next(Control<'a>),
    Unhandled(u64),
}

impl<'a> Machine<'a> {
    pub fn new(program: &'a DComp, fuel: u64) -> Machine<'a> {
        Machine {
            control: Control::Eval(program, Env::new()),
            stack: Vec::new(),
            session: Session::new(fuel),
        }
    }

    pub fn depth(&self) -> usize {
        self.stack.len()
    }

    /// Perform one transition.
    pub fn step(&mut self) -> Result<Step<'a>, RunError> {
        self.session.tick()?;
        let control = std::mem::replace(&mut self.control, Control::Return(MValue::Unit));
        self.control = match control {
            Control::Return(v) => match self.stack.pop() {
                None => return Ok(Step::Done(v)),
                Some(Frame::Let {
                    binder,
                    body,
                    mut env,
                }) => {
                    env.insert(binder.clone(), v);
                    Control::Eval(body, env)
                }
                // pushpr p (vl v) ~> vl v
                Some(Frame::PushPr { .. }) => Control::Return(v),
            },
            Control::Eval(e, env) => match self.eval(e, env)? {
                Transition::Next(c) => c,
                Transition::Unhandled(p) => return Ok(Step::Unhandled(p)),
            },
        };
        Ok(Step::Continue)
    }

    fn apply(&mut self, f: MValue<'a>, arg: MValue<'a>) -> Result<Control<'a>, RunError> {
        match f {
            MValue::Closure(c) => {
                let mut env = c.env.clone();
                if let Some(name) = c.self_name {
                    env.insert(name.clone(), MValue::Closure(c.clone()));
                }
                env.insert(c.param.clone(), arg);
                Ok(Control::Eval(c.body, env))
            }
            MValue::Prim(p, args) => {
                let mut args = (*args).clone();
                args.push(prim_arg(&arg)?);
                if args.len() < p.arity() {
                    return Ok(Control::Return(MValue::Prim(p, Rc::new(args))));
                }
                Ok(Control::Return(match prim::apply(p, &args)? {
                    PrimResult::Int(n) => MValue::Int(n),
                    PrimResult::Str(s) => MValue::Str(s.into()),
                    PrimResult::Bool(b) => bool_value(b),
                }))
            }
            // (fun x -> pushpr p Cp[x]) v
            MValue::Cont(c) => {
                self.stack.push(Frame::PushPr {
                    id: c.prompt,
                    answer: c.answer,
                });
                self.stack.extend(c.frames.iter().cloned());
                Ok(Control::Return(arg))
            }
            other => Err(RunError::Stuck(format!(
                "applying a non-function {other:?}"
            ))),
        }
    }

    fn eval(&mut self, e: &'a DComp, mut env: Env<'a>) -> Result<Transition<'a>, RunError> {
        let next = match e {
            DComp::Vl(v) => Control::Return(value(&env, v)?),
            DComp::Let {
                binder,
                bound,
                body,
            } => {
                self.stack.push(Frame::Let {
                    binder,
                    body,
                    env: env.clone(),
                });
                Control::Eval(bound, env)
            }
            DComp::App(f, a) => {
                let f = value(&env, f)?;
                let a = value(&env, a)?;
                self.apply(f, a)?
            }
            DComp::NewPr(t) => Control::Return(MValue::Prompt {
                id: self.session.fresh_id(),
                answer: t,
            }),
            DComp::PushPr(p, body) => {
                let (id, answer) = prompt(&value(&env, p)?)?;
                self.stack.push(Frame::PushPr { id, answer });
                Control::Eval(body, env)
            }
            // pushpr p Cp[sh0 p (fun k -> e)] ~> let k = (fun x -> pushpr p Cp[x]) in e
            DComp::Sh0 {
                prompt: p,
                k,
                hole_ty,
                body,
            } => {
                let (id, answer) = prompt(&value(&env, p)?)?;
                let Some(at) = self
                    .stack
                    .iter()
                    .rposition(|f| matches!(f, Frame::PushPr { id: q, .. } if *q == id))
                else {
                    return Ok(Transition::Unhandled(id));
                };
                let frames = self.stack.split_off(at + 1);
                self.stack.pop();
                let cont = MValue::Cont(Rc::new(Captured {
                    prompt: id,
                    answer,
                    hole_ty,
                    frames,
                }));
                env.insert(k.clone(), cont);
                Control::Eval(body, env)
            }
            DComp::WithFree {
                scrutinee,
                ret,
                ret_body,
                arg,
                k,
                act_body,
            } => match value(&env, scrutinee)? {
                MValue::Ret(u, _) => {
                    env.insert(ret.clone(), (*u).clone());
                    Control::Eval(ret_body, env)
                }
                MValue::Act(p) => {
                    env.insert(arg.clone(), p.0.clone());
                    env.insert(k.clone(), p.1.clone());
                    Control::Eval(act_body, env)
                }
                other => return Err(RunError::TagMismatch(format!("with_free on {other:?}"))),
            },
            DComp::PUniv(v, t) => match value(&env, v)? {
                MValue::Univ(x) if x.conforms(t) => Control::Return((*x).clone()),
                other => return Err(RunError::TagMismatch(format!("p_univ of {other:?} at {t}"))),
            },
            DComp::Case {
                scrutinee,
                left,
                left_body,
                right,
                right_body,
            } => match value(&env, scrutinee)? {
                MValue::Inl(v, _) => {
                    env.insert(left.clone(), (*v).clone());
                    Control::Eval(left_body, env)
                }
                MValue::Inr(v, _) => {
                    env.insert(right.clone(), (*v).clone());
                    Control::Eval(right_body, env)
                }
                other => return Err(RunError::TagMismatch(format!("case on {other:?}"))),
            },
            DComp::Proj1(v) | DComp::Proj2(v) => match value(&env, v)? {
                MValue::Pair(p) => Control::Return(if matches!(e, DComp::Proj1(_)) {
                    p.0.clone()
                } else {
                    p.1.clone()
                }),
                other => return Err(RunError::TagMismatch(format!("projection from {other:?}"))),
            },
            DComp::Absurd(..) => return Err(RunError::Absurd),
            DComp::Print(v) => match value(&env, v)? {
                MValue::Str(text) => {
                    self.session.print(&text);
                    Control::Return(MValue::Unit)
                }
                other => return Err(RunError::TagMismatch(format!("printing {other:?}"))),
            },
            DComp::Cast(v, t) => {
                let v = value(&env, v)?;
                if !v.conforms(t) {
                    return Err(RunError::TagMismatch(format!("cast of {v:?} to {t}")));
                }
                Control::Return(v)
            }
        };
        Ok(Transition::Next(next))
    }

    /// The answer type of the whole configuration: the type of the control,
    /// pushed through every frame of the stack. Reduction must leave it unchanged.
    pub fn answer_type(&self) -> Result<DType, TypeError> {
        let mut t = match &self.control {
            Control::Eval(e, env) => check_delimcc(&mut env_ctx(env)?, e)?,
            Control::Return(v) => v.type_of()?,
        };
        for frame in self.stack.iter().rev() {
            t = match frame {
                Frame::Let { binder, body, env } => {
                    let mut ctx = env_ctx(env)?;
                    ctx.push((*binder).clone(), t);
                    check_delimcc(&mut ctx, body)?
                }
                Frame::PushPr { answer, .. } => {
                    if **answer != t {
                        return Err(type_mismatch(&answer.to_string(), t));
                    }
                    t
                }
            };
        }
        Ok(t)
    }

    /// One-line description of the configuration, for step traces.
    pub fn describe(&self) -> String {
        let control = match &self.control {
            Control::Eval(e, _) => {
                let mut text = e.to_string();
                if text.len() > 120 {
                    let cut = (0..=117)
                        .rev()
                        .find(|i| text.is_char_boundary(*i))
                        .unwrap_or(0);
                    text.truncate(cut);
                    text.push_str("...");
                }
                format!("eval {text}")
            }
            Control::Return(v) => format!("return {v:?}"),
        };
        let frames: Vec<String> = self
            .stack
            .iter()
            .map(|f| match f {
                Frame::Let { binder, .. } => format!("let {binder}"),
                Frame::PushPr { id, .. } => format!("pushpr {id}"),
            })
            .collect();
        format!("{control} | [{}]", frames.join(", "))
    }
}

fn prompt<'a>(v: &MValue<'a>) -> Result<(u64, &'a DType), RunError> {
    match v {
        MValue::Prompt { id, answer } => Ok((*id, answer)),
        other => Err(RunError::TagMismatch(format!(
            "expected a prompt, got {other:?}"
        ))),
    }
}

fn drive<'a>(m: &mut Machine<'a>, mut on_step: impl FnMut(&Machine<'a>)) -> Outcome {
    loop {
        on_step(m);
        match m.step() {
            Ok(Step::Continue) => {}
            Ok(Step::Done(v)) => {
                return Outcome::Value {
                    value: v.observe(),
                    trace: m.session.take_trace(),
                }
            }
            Ok(Step::Unhandled(p)) => {
                return Outcome::UnhandledEffect {
                    instance: p,
                    trace: m.session.take_trace(),
                }
            }
            Err(err) => return Outcome::from_error(err, m.session.take_trace()),
        }
    }
}

pub fn run_step_session(p: &DProgram, fuel: u64) -> (Outcome, Session) {
    let mut m = Machine::new(&p.body, fuel);
    let outcome = drive(&mut m, |_| {});
    (outcome, m.session)
}

pub fn run_step(p: &DProgram, fuel: u64) -> Outcome {
    run_step_session(p, fuel).0
}

/// Run while recording up to [`STEP_TRACE_LIMIT`] configurations.
pub fn run_step_traced(p: &DProgram, fuel: u64) -> (Outcome, Vec<String>) {
    let mut m = Machine::new(&p.body, fuel);
    let mut configs = Vec::new();
    let outcome = drive(&mut m, |m| {
        if configs.len() < STEP_TRACE_LIMIT {
            configs.push(m.describe());
        }
    });
    (outcome, configs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_delimcc::fixtures::exd;
    use crate::DEFAULT_FUEL;

    fn steps(body: DComp) -> (Outcome, u64) {
        let p = DProgram::new(body);
        let (out, s) = run_step_session(&p, DEFAULT_FUEL);
        (out, s.steps())
    }

    #[test]
    fn a_value_is_done() {
        let e = DComp::Vl(DValue::Int(1));
        let mut m = Machine::new(&e, 10);
        assert!(matches!(m.step(), Ok(Step::Continue)));
        let Ok(Step::Done(v)) = m.step() else {
            panic!("expected done")
        };
        assert_eq!(v.observe(), Observed::Int(1));
    }

    #[test]
    fn pushpr_over_a_value_takes_two_steps() {
        let with_prompt = |body| DComp::let_("p", DComp::NewPr(DType::Int), body);
        let (out, pushed) = steps(with_prompt(DComp::pushpr(
            DValue::var("p"),
            DComp::Vl(DValue::Int(7)),
        )));
        let (_, bare) = steps(with_prompt(DComp::Vl(DValue::Int(7))));
        assert_eq!(out.value(), Some(&Observed::Int(7)));
        assert_eq!(pushed - bare, 2);
    }

    #[test]
    fn exd_gives_135() {
        assert_eq!(
            run_step(&exd(), DEFAULT_FUEL).value(),
            Some(&Observed::Int(135))
        );
    }

    #[test]
    fn divergence_runs_out_of_fuel() {
        // (rec f x. f x) ()
        let f = DValue::RecLam {
            self_name: "f".into(),
            param: "x".into(),
            param_ty: DType::Unit,
            ret_ty: DType::Int,
            body: Box::new(DComp::App(DValue::var("f"), DValue::var("x"))),
        };
        let p = DProgram::new(DComp::App(f, DValue::Unit));
        assert_eq!(run_step(&p, 1000), Outcome::OutOfFuel);
    }

    #[test]
    fn unmatched_sh0_is_unhandled() {
        let body = DComp::let_(
            "p",
            DComp::NewPr(DType::Int),
            DComp::sh0(DValue::var("p"), "k", DType::Int, DComp::Vl(DValue::Int(0))),
        );
        let (out, _) = steps(body);
        assert_eq!(
            out,
            Outcome::UnhandledEffect {
                instance: 1,
                trace: vec![]
            }
        );
    }

    #[test]
    fn answer_type_is_preserved_by_every_step() {
        let p = exd();
        let mut m = Machine::new(&p.body, DEFAULT_FUEL);
        let t0 = m.answer_type().unwrap();
        assert_eq!(t0, DType::Int);
        loop {
            match m.step().unwrap() {
                Step::Continue => assert_eq!(m.answer_type().unwrap(), t0, "at {}", m.describe()),
                Step::Done(v) => {
                    assert_eq!(v.type_of().unwrap(), t0);
                    break;
                }
                Step::Unhandled(_) => panic!("unexpected escape"),
            }
        }
    }

    #[test]
    fn traced_run_is_bounded() {
        let (out, configs) = run_step_traced(&exd(), DEFAULT_FUEL);
        assert_eq!(out.value(), Some(&Observed::Int(135)));
        assert!(!configs.is_empty() && configs.len() <= STEP_TRACE_LIMIT);
    }
}
