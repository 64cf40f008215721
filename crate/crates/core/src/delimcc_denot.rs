//! Direct denotational interpreter for Core delimcc.
//!
//! `sh0` creates a bubble holding its prompt, its body and the identity
//! context. `let` grows the bubble's context. `pushpr` pricks a bubble with a
//! matching prompt by releasing the body on the accumulated context, and
//! relays any other bubble outward with the context extended by itself.

use std::fmt;
use std::rc::Rc;

use crate::core_delimcc::{DComp, DProgram, DType, DValue};
use crate::observe::{Observed, Outcome, RunError, Session};
use crate::prim::{self, Prim, PrimArg, PrimResult};
use crate::Name;

pub type Env<'a> = im::HashMap<Name, DDenot<'a>>;

pub type DKont<'a> = Rc<dyn Fn(DDenot<'a>, &mut Session) -> Result<DRes<'a>, RunError> + 'a>;

#[derive(Clone)]
pub enum DDenot<'a> {
    Unit,
    Int(i64),
    Str(Rc<str>),
    Prompt(PromptTag<'a>),
    Pair(Rc<(DDenot<'a>, DDenot<'a>)>),
    Inl(Rc<DDenot<'a>>),
    Inr(Rc<DDenot<'a>>),
    Univ(Rc<DDenot<'a>>),
    Free(Rc<FreeNode<'a>>),
    Fn(DFunc<'a>),
}

#[derive(Clone, Copy, Debug)]
pub struct PromptTag<'a> {
    pub id: u64,
    pub answer: &'a DType,
}

pub enum FreeNode<'a> {
    Ret(DDenot<'a>),
    Act(DDenot<'a>, DDenot<'a>),
}

#[derive(Clone)]
pub enum DFunc<'a> {
    Closure(Rc<DClosure<'a>>),
    Native(DKont<'a>),
}

pub struct DClosure<'a> {
    self_name: Option<&'a Name>,
    param: &'a Name,
    body: &'a DComp,
    env: Env<'a>,
}

#[derive(Clone)]
pub enum DRes<'a> {
    V(DDenot<'a>),
    Bubble {
        prompt: u64,
        /// The `sh0` body, awaiting the captured continuation as a function value.
        body: DKont<'a>,
        /// The context accumulated between the `sh0` and the current point.
        k: DKont<'a>,
        /// Set when the `sh0` body has the `vl (act v k)` shape.
        act_origin: bool,
    },
}

impl fmt::Debug for DDenot<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", observe(self))
    }
}

impl fmt::Debug for DRes<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DRes::V(d) => write!(f, "V({d:?})"),
            DRes::Bubble {
                prompt, act_origin, ..
            } => write!(f, "Bubble{{prompt: {prompt}, act_origin: {act_origin}}}"),
        }
    }
}

impl<'a> DDenot<'a> {
    pub fn native(
        f: impl Fn(DDenot<'a>, &mut Session) -> Result<DRes<'a>, RunError> + 'a,
    ) -> DDenot<'a> {
        DDenot::Fn(DFunc::Native(Rc::new(f)))
    }

    fn bool(b: bool) -> DDenot<'a> {
        if b {
            DDenot::Inl(Rc::new(DDenot::Unit))
        } else {
            DDenot::Inr(Rc::new(DDenot::Unit))
        }
    }
}

pub fn observe(d: &DDenot<'_>) -> Observed {
    match d {
        DDenot::Unit => Observed::Unit,
        DDenot::Int(n) => Observed::Int(*n),
        DDenot::Str(s) => Observed::Str(s.to_string()),
        DDenot::Prompt(p) => Observed::Inst(p.id),
        DDenot::Pair(p) => Observed::Pair(Box::new(observe(&p.0)), Box::new(observe(&p.1))),
        DDenot::Inl(v) => Observed::Inl(Box::new(observe(v))),
        DDenot::Inr(v) => Observed::Inr(Box::new(observe(v))),
        DDenot::Univ(_) => Observed::Opaque("univ".into()),
        DDenot::Free(_) => Observed::Opaque("free".into()),
        DDenot::Fn(_) => Observed::Fn,
    }
}

pub fn conforms(d: &DDenot<'_>, t: &DType) -> bool {
    match (d, t) {
        (_, DType::Dyn) => true,
        (DDenot::Unit, DType::Unit)
        | (DDenot::Int(_), DType::Int)
        | (DDenot::Str(_), DType::Str) => true,
        (DDenot::Pair(p), DType::Pair(a, b)) => conforms(&p.0, a) && conforms(&p.1, b),
        (DDenot::Inl(v), DType::Sum(a, _)) => conforms(v, a),
        (DDenot::Inr(v), DType::Sum(_, b)) => conforms(v, b),
        (DDenot::Fn(_), DType::Arrow(..)) => true,
        (DDenot::Prompt(p), DType::Prompt(a)) => p.answer == &**a,
        (DDenot::Univ(_), DType::Univ) | (DDenot::Free(_), DType::Free(..)) => true,
        _ => false,
    }
}

pub fn lift_d<'a>(f: DKont<'a>, r: DRes<'a>, s: &mut Session) -> Result<DRes<'a>, RunError> {
    match r {
        DRes::V(v) => f(v, s),
        DRes::Bubble {
            prompt,
            body,
            k,
            act_origin,
        } => {
            let k: DKont<'a> = Rc::new(move |c, s| {
                let r = s.nested(|s| k(c, s))?;
                lift_d(f.clone(), r, s)
            });
            Ok(DRes::Bubble {
                prompt,
                body,
                k,
                act_origin,
            })
        }
    }
}

/// `pushpr p r`.
pub fn pushpr_denot<'a>(p: u64, r: DRes<'a>, s: &mut Session) -> Result<DRes<'a>, RunError> {
    match r {
        DRes::V(x) => Ok(DRes::V(x)),
        DRes::Bubble {
            prompt, body, k, ..
        } if prompt == p => {
            s.stats.body_applications += 1;
            let cont = DDenot::native(move |c, s| {
                let r = s.nested(|s| k(c, s))?;
                pushpr_denot(p, r, s)
            });
            body(cont, s)
        }
        DRes::Bubble {
            prompt,
            body,
            k,
            act_origin,
        } => {
            let k: DKont<'a> = Rc::new(move |c, s| {
                let r = s.nested(|s| k(c, s))?;
                pushpr_denot(p, r, s)
            });
            Ok(DRes::Bubble {
                prompt,
                body,
                k,
                act_origin,
            })
        }
    }
}

pub fn apply<'a>(f: &DDenot<'a>, arg: DDenot<'a>, s: &mut Session) -> Result<DRes<'a>, RunError> {
    match f {
        DDenot::Fn(DFunc::Closure(c)) => eval_d(closure_env(c, arg), c.body, s),
        DDenot::Fn(DFunc::Native(n)) => n(arg, s),
        other => Err(RunError::Stuck(format!(
            "applying a non-function {other:?}"
        ))),
    }
}

fn closure_env<'a>(c: &Rc<DClosure<'a>>, arg: DDenot<'a>) -> Env<'a> {
    let mut env = c.env.clone();
    if let Some(name) = c.self_name {
        env.insert(name.clone(), DDenot::Fn(DFunc::Closure(c.clone())));
    }
    env.insert(c.param.clone(), arg);
    env
}

fn prim_arg(d: &DDenot<'_>) -> Result<PrimArg, RunError> {
    match d {
        DDenot::Unit => Ok(PrimArg::Unit),
        DDenot::Int(n) => Ok(PrimArg::Int(*n)),
        DDenot::Str(s) => Ok(PrimArg::Str(s.to_string())),
        other => Err(RunError::TagMismatch(format!(
            "primitive argument {other:?}"
        ))),
    }
}

fn prim_value<'a>(p: Prim, args: Vec<PrimArg>) -> DDenot<'a> {
    DDenot::native(move |a, _s| {
        let mut args = args.clone();
        args.push(prim_arg(&a)?);
        if args.len() < p.arity() {
            return Ok(DRes::V(prim_value(p, args)));
        }
        Ok(DRes::V(match prim::apply(p, &args)? {
            PrimResult::Int(n) => DDenot::Int(n),
            PrimResult::Str(s) => DDenot::Str(s.into()),
            PrimResult::Bool(b) => DDenot::bool(b),
        }))
    })
}

pub fn eval_value<'a>(env: &Env<'a>, v: &'a DValue) -> Result<DDenot<'a>, RunError> {
    Ok(match v {
        DValue::Var(x) => env
            .get(x)
            .cloned()
            .ok_or_else(|| RunError::Stuck(format!("unbound variable {x}")))?,
        DValue::Unit => DDenot::Unit,
        DValue::Int(n) => DDenot::Int(*n),
        DValue::Str(s) => DDenot::Str(s.as_str().into()),
        DValue::Prim(p) => prim_value(*p, Vec::new()),
        DValue::Lam { param, body, .. } => DDenot::Fn(DFunc::Closure(Rc::new(DClosure {
            self_name: None,
            param,
            body,
            env: env.clone(),
        }))),
        DValue::RecLam {
            self_name,
            param,
            body,
            ..
        } => DDenot::Fn(DFunc::Closure(Rc::new(DClosure {
            self_name: Some(self_name),
            param,
            body,
            env: env.clone(),
        }))),
        DValue::IUniv(v) => DDenot::Univ(Rc::new(eval_value(env, v)?)),
        DValue::Ret(v, _) => DDenot::Free(Rc::new(FreeNode::Ret(eval_value(env, v)?))),
        DValue::Act(a, k) => DDenot::Free(Rc::new(FreeNode::Act(
            eval_value(env, a)?,
            eval_value(env, k)?,
        ))),
        DValue::Pair(a, b) => DDenot::Pair(Rc::new((eval_value(env, a)?, eval_value(env, b)?))),
        DValue::Inl(v, _) => DDenot::Inl(Rc::new(eval_value(env, v)?)),
        DValue::Inr(v, _) => DDenot::Inr(Rc::new(eval_value(env, v)?)),
    })
}

fn prompt_id(d: &DDenot<'_>) -> Result<u64, RunError> {
    match d {
        DDenot::Prompt(p) => Ok(p.id),
        other => Err(RunError::TagMismatch(format!(
            "expected a prompt, got {other:?}"
        ))),
    }
}

pub fn eval_d<'a>(env: Env<'a>, e: &'a DComp, s: &mut Session) -> Result<DRes<'a>, RunError> {
    s.nested(|s| eval_loop(env, e, s))
}

fn eval_loop<'a>(
    mut env: Env<'a>,
    mut e: &'a DComp,
    s: &mut Session,
) -> Result<DRes<'a>, RunError> {
    loop {
        s.tick()?;
        match e {
            DComp::Vl(v) => return Ok(DRes::V(eval_value(&env, v)?)),
            DComp::Let {
                binder,
                bound,
                body,
            } => match eval_d(env.clone(), bound, s)? {
                DRes::V(d) => {
                    env.insert(binder.clone(), d);
                    e = body;
                }
                r => {
                    let rest: DKont<'a> = Rc::new(move |x, s| {
                        let mut env = env.clone();
                        env.insert(binder.clone(), x);
                        eval_d(env, body, s)
                    });
                    return lift_d(rest, r, s);
                }
            },
            DComp::App(f, a) => {
                let fd = eval_value(&env, f)?;
                let ad = eval_value(&env, a)?;
                match fd {
                    DDenot::Fn(DFunc::Closure(c)) => {
                        env = closure_env(&c, ad);
                        e = c.body;
                    }
                    other => return apply(&other, ad, s),
                }
            }
            DComp::NewPr(t) => {
                return Ok(DRes::V(DDenot::Prompt(PromptTag {
                    id: s.fresh_id(),
                    answer: t,
                })))
            }
            DComp::PushPr(p, body) => {
                let id = prompt_id(&eval_value(&env, p)?)?;
                let r = eval_d(env, body, s)?;
                return pushpr_denot(id, r, s);
            }
            DComp::Sh0 {
                prompt, k, body, ..
            } => {
                let id = prompt_id(&eval_value(&env, prompt)?)?;
                let act_origin = body.is_act_form();
                s.stats.bubbles += 1;
                if !act_origin {
                    s.stats.foreign_bubbles += 1;
                }
                let body_fn: DKont<'a> = Rc::new(move |kv, s| {
                    let mut env = env.clone();
                    env.insert(k.clone(), kv);
                    eval_d(env, body, s)
                });
                return Ok(DRes::Bubble {
                    prompt: id,
                    body: body_fn,
                    k: Rc::new(|c, _s| Ok(DRes::V(c))),
                    act_origin,
                });
            }
            DComp::WithFree {
                scrutinee,
                ret,
                ret_body,
                arg,
                k,
                act_body,
            } => match eval_value(&env, scrutinee)? {
                DDenot::Free(node) => match &*node {
                    FreeNode::Ret(u) => {
                        env.insert(ret.clone(), u.clone());
                        e = ret_body;
                    }
                    FreeNode::Act(a, kv) => {
                        env.insert(arg.clone(), a.clone());
                        env.insert(k.clone(), kv.clone());
                        e = act_body;
                    }
                },
                other => return Err(RunError::TagMismatch(format!("with_free on {other:?}"))),
            },
            DComp::PUniv(v, t) => match eval_value(&env, v)? {
                DDenot::Univ(x) if conforms(&x, t) => return Ok(DRes::V((*x).clone())),
                other => return Err(RunError::TagMismatch(format!("p_univ of {other:?} at {t}"))),
            },
            DComp::Case {
                scrutinee,
                left,
                left_body,
                right,
                right_body,
            } => match eval_value(&env, scrutinee)? {
                DDenot::Inl(v) => {
                    env.insert(left.clone(), (*v).clone());
                    e = left_body;
                }
                DDenot::Inr(v) => {
                    env.insert(right.clone(), (*v).clone());
                    e = right_body;
                }
                other => return Err(RunError::TagMismatch(format!("case on {other:?}"))),
            },
            DComp::Proj1(v) | DComp::Proj2(v) => match eval_value(&env, v)? {
                DDenot::Pair(p) => {
                    let d = if matches!(e, DComp::Proj1(_)) {
                        p.0.clone()
                    } else {
                        p.1.clone()
                    };
                    return Ok(DRes::V(d));
                }
                other => return Err(RunError::TagMismatch(format!("projection from {other:?}"))),
            },
            DComp::Absurd(..) => return Err(RunError::Absurd),
            DComp::Print(v) => match eval_value(&env, v)? {
                DDenot::Str(text) => {
                    s.print(&text);
                    return Ok(DRes::V(DDenot::Unit));
                }
                other => return Err(RunError::TagMismatch(format!("printing {other:?}"))),
            },
            DComp::Cast(v, t) => {
                let d = eval_value(&env, v)?;
                if !conforms(&d, t) {
                    return Err(RunError::TagMismatch(format!("cast of {d:?} to {t}")));
                }
                return Ok(DRes::V(d));
            }
        }
    }
}

pub fn outcome_of(r: Result<DRes<'_>, RunError>, s: &mut Session) -> Outcome {
    match r {
        Ok(DRes::V(d)) => Outcome::Value {
            value: observe(&d),
            trace: s.take_trace(),
        },
        Ok(DRes::Bubble { prompt, .. }) => Outcome::UnhandledEffect {
            instance: prompt,
            trace: s.take_trace(),
        },
        Err(err) => Outcome::from_error(err, s.take_trace()),
    }
}

pub fn run_delimcc_session(p: &DProgram, fuel: u64) -> (Outcome, Session) {
    let mut s = Session::new(fuel);
    let r = eval_d(Env::new(), &p.body, &mut s);
    let outcome = outcome_of(r, &mut s);
    (outcome, s)
}

pub fn run_delimcc(p: &DProgram, fuel: u64) -> Outcome {
    run_delimcc_session(p, fuel).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_delimcc::fixtures::exd;
    use crate::DEFAULT_FUEL;

    fn unit_prompt() -> DComp {
        DComp::NewPr(DType::Int)
    }

    #[test]
    fn values_denote_themselves() {
        let out = run_delimcc(&DProgram::new(DComp::Vl(DValue::Int(3))), DEFAULT_FUEL);
        assert_eq!(out.golden_text(), "\n3\n");
    }

    #[test]
    fn exd_gives_135() {
        let out = run_delimcc(&exd(), DEFAULT_FUEL);
        assert_eq!(out.value(), Some(&Observed::Int(135)));
    }

    #[test]
    fn pushpr_over_a_value_is_identity() {
        let mut s = Session::new(10);
        let r = pushpr_denot(1, DRes::V(DDenot::Int(4)), &mut s).unwrap();
        let DRes::V(d) = r else {
            panic!("expected a value")
        };
        assert_eq!(observe(&d), Observed::Int(4));
        assert_eq!(s.stats.body_applications, 0);
    }

    #[test]
    fn matching_pushpr_applies_the_body_once() {
        let mut s = Session::new(100);
        // body = fun k -> k 20, bubble context = fun c -> c + 1
        let body: DKont<'_> = Rc::new(|k, s| apply(&k, DDenot::Int(20), s));
        let k: DKont<'_> = Rc::new(|c, _| match c {
            DDenot::Int(n) => Ok(DRes::V(DDenot::Int(n + 1))),
            other => Ok(DRes::V(other)),
        });
        let bubble = DRes::Bubble {
            prompt: 2,
            body,
            k,
            act_origin: false,
        };
        let r = pushpr_denot(2, bubble, &mut s).unwrap();
        let DRes::V(d) = r else {
            panic!("expected a value")
        };
        assert_eq!(observe(&d), Observed::Int(21));
        assert_eq!(s.stats.body_applications, 1);
    }

    #[test]
    fn other_prompts_relay_the_bubble() {
        let mut s = Session::new(100);
        let body: DKont<'_> = Rc::new(|_, _| Ok(DRes::V(DDenot::Int(0))));
        let bubble = DRes::Bubble {
            prompt: 5,
            body,
            k: Rc::new(|c, _| Ok(DRes::V(c))),
            act_origin: true,
        };
        let r = pushpr_denot(6, bubble, &mut s).unwrap();
        let DRes::Bubble {
            prompt, act_origin, ..
        } = r
        else {
            panic!("expected a bubble")
        };
        assert_eq!(prompt, 5);
        assert!(act_origin);
        assert_eq!(s.stats.body_applications, 0);
    }

    #[test]
    fn escaped_sh0_is_unhandled() {
        let body = DComp::let_(
            "p",
            unit_prompt(),
            DComp::sh0(DValue::var("p"), "k", DType::Int, DComp::Vl(DValue::Int(0))),
        );
        let out = run_delimcc(&DProgram::new(body), DEFAULT_FUEL);
        assert_eq!(
            out,
            Outcome::UnhandledEffect {
                instance: 1,
                trace: vec![]
            }
        );
    }

    #[test]
    fn let_grows_a_bubble_without_running_its_body() {
        // let p = newpr in pushpr p (let x = sh0 p (k. k 1) in let y = x + 1 in vl y)
        let inc = DComp::App(DValue::Prim(Prim::Add), DValue::var("x"));
        let body = DComp::let_(
            "p",
            unit_prompt(),
            DComp::pushpr(
                DValue::var("p"),
                DComp::let_(
                    "x",
                    DComp::sh0(
                        DValue::var("p"),
                        "k",
                        DType::Int,
                        DComp::App(DValue::var("k"), DValue::Int(1)),
                    ),
                    DComp::let_("f", inc, DComp::App(DValue::var("f"), DValue::Int(1))),
                ),
            ),
        );
        let (out, s) = run_delimcc_session(&DProgram::new(body), DEFAULT_FUEL);
        assert_eq!(out.value(), Some(&Observed::Int(2)));
        assert_eq!(s.stats.bubbles, 1);
        assert_eq!(s.stats.body_applications, 1);
    }
}
