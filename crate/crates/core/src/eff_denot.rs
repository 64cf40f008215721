//! Denotational interpreter for Core Eff.
//!
//! A computation denotes either a value ([`EffRes::V`]) or a suspended operation
//! request ([`EffRes::E`]) carrying the instance, the argument and the
//! continuation up to the point where the request surfaced. `let` grows the
//! continuation through [`lift_eff`]; handlers dispatch on the instance id.

use std::fmt;
use std::rc::Rc;

use crate::core_eff::{CoreComp, CoreEffProgram, CoreType, CoreValue, Handler};
use crate::observe::{Observed, Outcome, RunError, Session};
use crate::prim::{self, Prim, PrimArg, PrimResult};
use crate::Name;

pub type Env<'a> = im::HashMap<Name, Denot<'a>>;

/// A continuation or any other semantic function from values to results.
pub type Kont<'a> = Rc<dyn Fn(Denot<'a>, &mut Session) -> Result<EffRes<'a>, RunError> + 'a>;

#[derive(Clone)]
pub enum Denot<'a> {
    Unit,
    Int(i64),
    Str(Rc<str>),
    Inst(Instance<'a>),
    Pair(Rc<(Denot<'a>, Denot<'a>)>),
    Inl(Rc<Denot<'a>>),
    Inr(Rc<Denot<'a>>),
    Fn(Func<'a>),
}

/// An effect instance: its id plus the operation's argument and result types,
/// used as the runtime tag for retractions.
#[derive(Clone, Copy, Debug)]
pub struct Instance<'a> {
    pub id: u64,
    pub arg: &'a CoreType,
    pub res: &'a CoreType,
}

#[derive(Clone)]
pub enum Func<'a> {
    Closure(Rc<Closure<'a>>),
    Native(Kont<'a>),
}

pub struct Closure<'a> {
    param: &'a Name,
    body: &'a CoreComp,
    env: Env<'a>,
}

#[derive(Clone)]
pub enum EffRes<'a> {
    V(Denot<'a>),
    E {
        inst: u64,
        arg: Denot<'a>,
        k: Kont<'a>,
    },
}

impl fmt::Debug for Denot<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", observe(self))
    }
}

impl fmt::Debug for EffRes<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EffRes::V(d) => write!(f, "V({d:?})"),
            EffRes::E { inst, arg, .. } => write!(f, "E{{inst: {inst}, arg: {arg:?}}}"),
        }
    }
}

impl<'a> Denot<'a> {
    pub fn native(
        f: impl Fn(Denot<'a>, &mut Session) -> Result<EffRes<'a>, RunError> + 'a,
    ) -> Denot<'a> {
        Denot::Fn(Func::Native(Rc::new(f)))
    }

    fn bool(b: bool) -> Denot<'a> {
        if b {
            Denot::Inl(Rc::new(Denot::Unit))
        } else {
            Denot::Inr(Rc::new(Denot::Unit))
        }
    }
}

pub fn observe(d: &Denot<'_>) -> Observed {
    match d {
        Denot::Unit => Observed::Unit,
        Denot::Int(n) => Observed::Int(*n),
        Denot::Str(s) => Observed::Str(s.to_string()),
        Denot::Inst(i) => Observed::Inst(i.id),
        Denot::Pair(p) => Observed::Pair(Box::new(observe(&p.0)), Box::new(observe(&p.1))),
        Denot::Inl(v) => Observed::Inl(Box::new(observe(v))),
        Denot::Inr(v) => Observed::Inr(Box::new(observe(v))),
        Denot::Fn(_) => Observed::Fn,
    }
}

/// Whether a denotation carries the runtime tag of type `t`.
pub fn conforms(d: &Denot<'_>, t: &CoreType) -> bool {
    match (d, t) {
        (_, CoreType::Dyn) => true,
        (Denot::Unit, CoreType::Unit)
        | (Denot::Int(_), CoreType::Int)
        | (Denot::Str(_), CoreType::Str) => true,
        (Denot::Pair(p), CoreType::Pair(a, b)) => conforms(&p.0, a) && conforms(&p.1, b),
        (Denot::Inl(v), CoreType::Sum(a, _)) => conforms(v, a),
        (Denot::Inr(v), CoreType::Sum(_, b)) => conforms(v, b),
        (Denot::Fn(_), CoreType::Arrow(..) | CoreType::EffH(..)) => true,
        (Denot::Inst(i), CoreType::Eff(a, b)) => i.arg == &**a && i.res == &**b,
        _ => false,
    }
}

/// `lift f r`: feed a value to `f`; extend the continuation of a request with `f`.
pub fn lift_eff<'a>(f: Kont<'a>, r: EffRes<'a>, s: &mut Session) -> Result<EffRes<'a>, RunError> {
    match r {
        EffRes::V(v) => f(v, s),
        EffRes::E { inst, arg, k } => Ok(EffRes::E {
            inst,
            arg,
            k: lifted(f, k),
        }),
    }
}

fn lifted<'a>(f: Kont<'a>, k: Kont<'a>) -> Kont<'a> {
    Rc::new(move |x, s| {
        let r = s.nested(|s| k(x, s))?;
        lift_eff(f.clone(), r, s)
    })
}

pub fn apply<'a>(f: &Denot<'a>, arg: Denot<'a>, s: &mut Session) -> Result<EffRes<'a>, RunError> {
    match f {
        Denot::Fn(Func::Closure(c)) => {
            let mut env = c.env.clone();
            env.insert(c.param.clone(), arg);
            eval_comp(env, c.body, s)
        }
        Denot::Fn(Func::Native(n)) => n(arg, s),
        other => Err(RunError::Stuck(format!(
            "applying a non-function {other:?}"
        ))),
    }
}

fn prim_arg(d: &Denot<'_>) -> Result<PrimArg, RunError> {
    match d {
        Denot::Unit => Ok(PrimArg::Unit),
        Denot::Int(n) => Ok(PrimArg::Int(*n)),
        Denot::Str(s) => Ok(PrimArg::Str(s.to_string())),
        other => Err(RunError::TagMismatch(format!(
            "primitive argument {other:?}"
        ))),
    }
}

fn prim_value<'a>(p: Prim, args: Vec<PrimArg>) -> Denot<'a> {
    Denot::native(move |a, _s| {
        let mut args = args.clone();
        args.push(prim_arg(&a)?);
        if args.len() < p.arity() {
            return Ok(EffRes::V(prim_value(p, args)));
        }
        Ok(EffRes::V(match prim::apply(p, &args)? {
            PrimResult::Int(n) => Denot::Int(n),
            PrimResult::Str(s) => Denot::Str(s.into()),
            PrimResult::Bool(b) => Denot::bool(b),
        }))
    })
}

fn lookup<'a>(env: &Env<'a>, x: &Name) -> Result<Denot<'a>, RunError> {
    env.get(x)
        .cloned()
        .ok_or_else(|| RunError::Stuck(format!("unbound variable {x}")))
}

pub fn eval_value<'a>(env: &Env<'a>, v: &'a CoreValue) -> Result<Denot<'a>, RunError> {
    Ok(match v {
        CoreValue::Var(x) => lookup(env, x)?,
        CoreValue::Unit => Denot::Unit,
        CoreValue::Int(n) => Denot::Int(*n),
        CoreValue::Str(s) => Denot::Str(s.as_str().into()),
        CoreValue::Prim(p) => prim_value(*p, Vec::new()),
        CoreValue::Lam { param, body, .. } => Denot::Fn(Func::Closure(Rc::new(Closure {
            param,
            body,
            env: env.clone(),
        }))),
        CoreValue::Op(inst) => {
            let id = instance(&eval_value(env, inst)?)?.id;
            Denot::native(move |arg, _s| {
                Ok(EffRes::E {
                    inst: id,
                    arg,
                    k: Rc::new(|x, _s| Ok(EffRes::V(x))),
                })
            })
        }
        CoreValue::Handler(h) => {
            let inst = instance(&eval_value(env, &h.instance)?)?;
            let hd = Rc::new(HandlerDen {
                inst,
                clauses: h,
                env: env.clone(),
            });
            Denot::native(move |th, s| {
                let r = apply(&th, Denot::Unit, s)?;
                hd.handle(r, s)
            })
        }
        CoreValue::Pair(a, b) => Denot::Pair(Rc::new((eval_value(env, a)?, eval_value(env, b)?))),
        CoreValue::Inl(v, _) => Denot::Inl(Rc::new(eval_value(env, v)?)),
        CoreValue::Inr(v, _) => Denot::Inr(Rc::new(eval_value(env, v)?)),
    })
}

fn instance<'a>(d: &Denot<'a>) -> Result<Instance<'a>, RunError> {
    match d {
        Denot::Inst(i) => Ok(*i),
        other => Err(RunError::TagMismatch(format!(
            "expected an effect instance, got {other:?}"
        ))),
    }
}

/// The recursive dispatcher behind a handler value.
struct HandlerDen<'a> {
    inst: Instance<'a>,
    clauses: &'a Handler,
    env: Env<'a>,
}

impl<'a> HandlerDen<'a> {
    fn handle(self: &Rc<Self>, r: EffRes<'a>, s: &mut Session) -> Result<EffRes<'a>, RunError> {
        let h = self.clauses;
        match r {
            EffRes::V(v) => {
                let mut env = self.env.clone();
                env.insert(h.val_binder.clone(), v);
                eval_comp(env, &h.val_body, s)
            }
            EffRes::E { inst, arg, k } if inst == self.inst.id => {
                if !conforms(&arg, self.inst.arg) {
                    return Err(RunError::TagMismatch(format!(
                        "operation argument {arg:?} for instance {inst}"
                    )));
                }
                // deep handler: the resumption is handled again by this handler
                let me = self.clone();
                let resume = Denot::native(move |b, s| {
                    let r = s.nested(|s| k(b, s))?;
                    me.handle(r, s)
                });
                let mut env = self.env.clone();
                env.insert(h.arg_binder.clone(), arg);
                env.insert(h.k_binder.clone(), resume);
                eval_comp(env, &h.op_body, s)
            }
            EffRes::E { inst, arg, k } => {
                let me = self.clone();
                let relayed: Kont<'a> = Rc::new(move |b, s| {
                    let r = s.nested(|s| k(b, s))?;
                    me.handle(r, s)
                });
                Ok(EffRes::E {
                    inst,
                    arg,
                    k: relayed,
                })
            }
        }
    }
}

pub fn eval_comp<'a>(
    env: Env<'a>,
    e: &'a CoreComp,
    s: &mut Session,
) -> Result<EffRes<'a>, RunError> {
    s.nested(|s| eval_loop(env, e, s))
}

fn eval_loop<'a>(
    mut env: Env<'a>,
    mut e: &'a CoreComp,
    s: &mut Session,
) -> Result<EffRes<'a>, RunError> {
    loop {
        s.tick()?;
        match e {
            CoreComp::Val(v) => return Ok(EffRes::V(eval_value(&env, v)?)),
            CoreComp::Let {
                binder,
                bound,
                body,
            } => match eval_comp(env.clone(), bound, s)? {
                EffRes::V(d) => {
                    env.insert(binder.clone(), d);
                    e = body;
                }
                r => {
                    let rest: Kont<'a> = Rc::new(move |x, s| {
                        let mut env = env.clone();
                        env.insert(binder.clone(), x);
                        eval_comp(env, body, s)
                    });
                    return lift_eff(rest, r, s);
                }
            },
            CoreComp::App(f, a) => {
                let fd = eval_value(&env, f)?;
                let ad = eval_value(&env, a)?;
                match fd {
                    Denot::Fn(Func::Closure(c)) => {
                        env = c.env.clone();
                        env.insert(c.param.clone(), ad);
                        e = c.body;
                    }
                    other => return apply(&other, ad, s),
                }
            }
            CoreComp::NewP(a, b) => {
                return Ok(EffRes::V(Denot::Inst(Instance {
                    id: s.fresh_id(),
                    arg: a,
                    res: b,
                })))
            }
            CoreComp::WithHandle(h, body) => {
                let hd = eval_value(&env, h)?;
                let thunk_env = env.clone();
                let thunk = Denot::native(move |_, s| eval_comp(thunk_env.clone(), body, s));
                return apply(&hd, thunk, s);
            }
            CoreComp::Case {
                scrutinee,
                left,
                left_body,
                right,
                right_body,
            } => match eval_value(&env, scrutinee)? {
                Denot::Inl(v) => {
                    env.insert(left.clone(), (*v).clone());
                    e = left_body;
                }
                Denot::Inr(v) => {
                    env.insert(right.clone(), (*v).clone());
                    e = right_body;
                }
                other => return Err(RunError::TagMismatch(format!("case on {other:?}"))),
            },
            CoreComp::Proj1(v) | CoreComp::Proj2(v) => match eval_value(&env, v)? {
                Denot::Pair(p) => {
                    let d = if matches!(e, CoreComp::Proj1(_)) {
                        p.0.clone()
                    } else {
                        p.1.clone()
                    };
                    return Ok(EffRes::V(d));
                }
                other => return Err(RunError::TagMismatch(format!("projection from {other:?}"))),
            },
            CoreComp::Absurd(..) => return Err(RunError::Absurd),
            CoreComp::Print(v) => match eval_value(&env, v)? {
                Denot::Str(text) => {
                    s.print(&text);
                    return Ok(EffRes::V(Denot::Unit));
                }
                other => return Err(RunError::TagMismatch(format!("printing {other:?}"))),
            },
            CoreComp::Cast(v, t) => {
                let d = eval_value(&env, v)?;
                if !conforms(&d, t) {
                    return Err(RunError::TagMismatch(format!("cast of {d:?} to {t}")));
                }
                return Ok(EffRes::V(d));
            }
        }
    }
}

/// Run a closed program under a fresh session, returning the session for inspection.
pub fn run_eff_session(p: &CoreEffProgram, fuel: u64) -> (Outcome, Session) {
    let mut s = Session::new(fuel);
    let outcome = match eval_comp(Env::new(), &p.body, &mut s) {
        Ok(EffRes::V(d)) => Outcome::Value {
            value: observe(&d),
            trace: s.take_trace(),
        },
        Ok(EffRes::E { inst, .. }) => Outcome::UnhandledEffect {
            instance: inst,
            trace: s.take_trace(),
        },
        Err(err) => Outcome::from_error(err, s.take_trace()),
    };
    (outcome, s)
}

pub fn run_eff(p: &CoreEffProgram, fuel: u64) -> Outcome {
    run_eff_session(p, fuel).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_FUEL;

    fn ret<'a>() -> Kont<'a> {
        Rc::new(|d, _| Ok(EffRes::V(d)))
    }

    fn double<'a>() -> Kont<'a> {
        Rc::new(|d, _| match d {
            Denot::Int(n) => Ok(EffRes::V(Denot::Int(2 * n))),
            other => Ok(EffRes::V(other)),
        })
    }

    fn resume(r: EffRes<'_>, x: i64, s: &mut Session) -> Observed {
        match r {
            EffRes::V(d) => observe(&d),
            EffRes::E { k, .. } => match k(Denot::Int(x), s).unwrap() {
                EffRes::V(d) => observe(&d),
                EffRes::E { inst, .. } => Observed::Inst(inst),
            },
        }
    }

    #[test]
    fn lift_of_a_value_applies_the_function() {
        let mut s = Session::new(100);
        let r = lift_eff(double(), EffRes::V(Denot::Int(4)), &mut s).unwrap();
        assert_eq!(resume(r, 0, &mut s), Observed::Int(8));
    }

    #[test]
    fn lift_of_a_request_keeps_instance_and_extends_k() {
        let mut s = Session::new(100);
        let req = EffRes::E {
            inst: 3,
            arg: Denot::Unit,
            k: ret(),
        };
        let r = lift_eff(double(), req, &mut s).unwrap();
        let EffRes::E { inst, .. } = &r else {
            panic!("expected a request")
        };
        assert_eq!(*inst, 3);
        assert_eq!(resume(r, 5, &mut s), Observed::Int(10));
    }

    #[test]
    fn lift_of_return_is_identity() {
        let mut s = Session::new(100);
        let req = EffRes::E {
            inst: 1,
            arg: Denot::Int(9),
            k: double(),
        };
        let r = lift_eff(ret(), req, &mut s).unwrap();
        assert_eq!(resume(r, 7, &mut s), Observed::Int(14));
    }

    #[test]
    fn unhandled_operation_escapes() {
        let body = CoreComp::let_(
            "p",
            CoreComp::NewP(CoreType::Int, CoreType::Int),
            CoreComp::App(CoreValue::op(CoreValue::var("p")), CoreValue::Int(5)),
        );
        let out = run_eff(&CoreEffProgram::new(body), DEFAULT_FUEL);
        assert_eq!(
            out,
            Outcome::UnhandledEffect {
                instance: 1,
                trace: vec![]
            }
        );
    }

    #[test]
    fn print_appends_to_the_trace() {
        let body = CoreComp::let_(
            "_",
            CoreComp::Print(CoreValue::str("x")),
            CoreComp::Print(CoreValue::str("y")),
        );
        let out = run_eff(&CoreEffProgram::new(body), DEFAULT_FUEL);
        assert_eq!(out.golden_text(), "xy\n()\n");
    }

    #[test]
    fn failed_cast_is_a_tag_mismatch() {
        let body = CoreComp::let_(
            "d",
            CoreComp::Cast(CoreValue::Int(1), CoreType::Dyn),
            CoreComp::Cast(CoreValue::var("d"), CoreType::Str),
        );
        let out = run_eff(&CoreEffProgram::new(body), DEFAULT_FUEL);
        assert!(matches!(
            out,
            Outcome::RuntimeError {
                error: crate::ErrorKind::TagMismatch,
                ..
            }
        ));
    }

    #[test]
    fn fuel_bounds_the_run() {
        let src = "effect e { tick : unit -> unit }
            let p = new e in
            with handler { | val (x : unit) -> x | p#tick(a, k) -> k a; k a } handle
              p#tick (); p#tick (); p#tick ()";
        let c = crate::pipeline::compile(src).unwrap();
        assert_eq!(run_eff(&c.core, 5), Outcome::OutOfFuel);
        assert!(matches!(
            run_eff(&c.core, DEFAULT_FUEL),
            Outcome::Value { .. }
        ));
    }
}
