//! A direct evaluator for surface programs with multi-operation effects.
//!
//! It gives handlers their meaning without desugaring: a request carries the
//! operation name, and a handler for the right instance that has no clause for
//! that operation passes the request outward. Dynamic-effect syntax is not
//! supported; expand it first.

use std::fmt;
use std::rc::Rc;

use super::ast::*;
use crate::observe::{Observed, Outcome, RunError, Session};
use crate::prim::{self, Prim, PrimArg, PrimResult};
use crate::Name;

type Env<'a> = im::HashMap<Name, Val<'a>>;
type Kont<'a> = Rc<dyn Fn(Val<'a>, &mut Session) -> Result<Res<'a>, RunError> + 'a>;

#[derive(Clone)]
enum Val<'a> {
    Unit,
    Int(i64),
    Str(Rc<str>),
    Inst(u64, Rc<Type>),
    Pair(Rc<(Val<'a>, Val<'a>)>),
    Inl(Rc<Val<'a>>),
    Inr(Rc<Val<'a>>),
    Fn(Kont<'a>),
}

enum Res<'a> {
    V(Val<'a>),
    E {
        inst: u64,
        op: &'a Name,
        arg: Val<'a>,
        k: Kont<'a>,
    },
}

impl fmt::Debug for Val<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", observe(self))
    }
}

fn observe(v: &Val<'_>) -> Observed {
    match v {
        Val::Unit => Observed::Unit,
        Val::Int(n) => Observed::Int(*n),
        Val::Str(s) => Observed::Str(s.to_string()),
        Val::Inst(id, _) => Observed::Inst(*id),
        Val::Pair(p) => Observed::Pair(Box::new(observe(&p.0)), Box::new(observe(&p.1))),
        Val::Inl(v) => Observed::Inl(Box::new(observe(v))),
        Val::Inr(v) => Observed::Inr(Box::new(observe(v))),
        Val::Fn(_) => Observed::Fn,
    }
}

fn bool_val<'a>(b: bool) -> Val<'a> {
    if b {
        Val::Inl(Rc::new(Val::Unit))
    } else {
        Val::Inr(Rc::new(Val::Unit))
    }
}

fn conforms(v: &Val<'_>, t: &Type) -> bool {
    match (v, t) {
        (_, Type::Dyn) => true,
        (_, Type::Bool) => conforms(v, &t.normalize()),
        (Val::Unit, Type::Unit) | (Val::Int(_), Type::Int) | (Val::Str(_), Type::Str) => true,
        (Val::Pair(p), Type::Pair(a, b)) => conforms(&p.0, a) && conforms(&p.1, b),
        (Val::Inl(v), Type::Sum(a, _)) => conforms(v, a),
        (Val::Inr(v), Type::Sum(_, b)) => conforms(v, b),
        (Val::Fn(_), Type::Arrow(..) | Type::Handler(..)) => true,
        (Val::Inst(_, it), t @ Type::Effect(..)) => it.normalize() == t.normalize(),
        _ => false,
    }
}

/// Feed the value of `r` to `f`, or extend the continuation of its request with `f`.
fn bind<'a>(
    r: Res<'a>,
    s: &mut Session,
    f: impl Fn(Val<'a>, &mut Session) -> Result<Res<'a>, RunError> + 'a,
) -> Result<Res<'a>, RunError> {
    match r {
        Res::V(v) => f(v, s),
        Res::E { inst, op, arg, k } => {
            let f: Kont<'a> = Rc::new(f);
            Ok(Res::E {
                inst,
                op,
                arg,
                k: extend(k, f),
            })
        }
    }
}

fn extend<'a>(k: Kont<'a>, f: Kont<'a>) -> Kont<'a> {
    Rc::new(move |x, s| match s.nested(|s| k(x, s))? {
        Res::V(v) => f(v, s),
        Res::E { inst, op, arg, k } => Ok(Res::E {
            inst,
            op,
            arg,
            k: extend(k, f.clone()),
        }),
    })
}

fn apply<'a>(f: &Val<'a>, a: Val<'a>, s: &mut Session) -> Result<Res<'a>, RunError> {
    match f {
        Val::Fn(k) => s.nested(|s| k(a, s)),
        other => Err(RunError::Stuck(format!(
            "applying a non-function {other:?}"
        ))),
    }
}

fn prim_val<'a>(p: Prim, args: Vec<PrimArg>) -> Val<'a> {
    Val::Fn(Rc::new(move |a, _s| {
        let mut args = args.clone();
        args.push(match a {
            Val::Unit => PrimArg::Unit,
            Val::Int(n) => PrimArg::Int(n),
            Val::Str(s) => PrimArg::Str(s.to_string()),
            other => {
                return Err(RunError::TagMismatch(format!(
                    "primitive argument {other:?}"
                )))
            }
        });
        if args.len() < p.arity() {
            return Ok(Res::V(prim_val(p, args)));
        }
        Ok(Res::V(match prim::apply(p, &args)? {
            PrimResult::Int(n) => Val::Int(n),
            PrimResult::Str(s) => Val::Str(s.into()),
            PrimResult::Bool(b) => bool_val(b),
        }))
    }))
}

struct HandlerVal<'a> {
    inst: u64,
    clauses: &'a Clauses,
    env: Env<'a>,
}

impl<'a> HandlerVal<'a> {
    fn handle(self: &Rc<Self>, r: Res<'a>, s: &mut Session) -> Result<Res<'a>, RunError> {
        match r {
            Res::V(v) => match &self.clauses.val {
                Some(vc) => eval(self.env.update(vc.binder.clone(), v), &vc.body, s),
                None => Ok(Res::V(v)),
            },
            Res::E { inst, op, arg, k } => {
                let me = self.clone();
                let resume: Kont<'a> = Rc::new(move |b, s| {
                    let r = s.nested(|s| k(b, s))?;
                    me.handle(r, s)
                });
                let clause = self.clauses.ops.iter().find(|c| c.op == *op);
                match clause {
                    Some(c) if inst == self.inst => {
                        let env = self
                            .env
                            .update(c.arg.clone(), arg)
                            .update(c.k.clone(), Val::Fn(resume));
                        eval(env, &c.body, s)
                    }
                    _ => Ok(Res::E {
                        inst,
                        op,
                        arg,
                        k: resume,
                    }),
                }
            }
        }
    }
}

fn lookup<'a>(env: &Env<'a>, x: &Name) -> Result<Val<'a>, RunError> {
    if let Some(v) = env.get(x) {
        return Ok(v.clone());
    }
    match x.as_str().parse::<Prim>() {
        Ok(p) => Ok(prim_val(p, Vec::new())),
        Err(()) => Err(RunError::Stuck(format!("unbound variable {x}"))),
    }
}

fn handler_val<'a>(
    env: &Env<'a>,
    clauses: &'a Clauses,
    s: &mut Session,
) -> Result<Rc<HandlerVal<'a>>, RunError> {
    let inst = match clauses.ops.first() {
        Some(c) => match lookup(env, &c.instance)? {
            Val::Inst(id, _) => id,
            other => {
                return Err(RunError::TagMismatch(format!(
                    "expected an effect instance, got {other:?}"
                )))
            }
        },
        // mirrors the unreachable instance that lowering allocates for such handlers
        None => s.fresh_id(),
    };
    Ok(Rc::new(HandlerVal {
        inst,
        clauses,
        env: env.clone(),
    }))
}

fn eval<'a>(env: Env<'a>, e: &'a Expr, s: &mut Session) -> Result<Res<'a>, RunError> {
    s.nested(|s| {
        s.tick()?;
        eval_inner(env, e, s)
    })
}

fn eval_inner<'a>(env: Env<'a>, e: &'a Expr, s: &mut Session) -> Result<Res<'a>, RunError> {
    let v = |v: Val<'a>| Ok(Res::V(v));
    match &e.kind {
        ExprKind::Var(x) => v(lookup(&env, x)?),
        ExprKind::Unit => v(Val::Unit),
        ExprKind::Int(n) => v(Val::Int(*n)),
        ExprKind::Str(t) => v(Val::Str(t.as_str().into())),
        ExprKind::Bool(b) => v(bool_val(*b)),
        ExprKind::Lam { param, body, .. } => v(Val::Fn(Rc::new(move |a, s| {
            eval(env.update(param.clone(), a), body, s)
        }))),
        ExprKind::App(f, a) => {
            let rf = eval(env.clone(), f, s)?;
            bind(rf, s, move |fv, s| {
                let ra = eval(env.clone(), a, s)?;
                bind(ra, s, move |av, s| apply(&fv, av, s))
            })
        }
        ExprKind::Let {
            binder,
            bound,
            body,
        } => {
            let r = eval(env.clone(), bound, s)?;
            bind(r, s, move |x, s| {
                eval(env.update(binder.clone(), x), body, s)
            })
        }
        ExprKind::Seq(a, b) => {
            let r = eval(env.clone(), a, s)?;
            bind(r, s, move |_, s| eval(env.clone(), b, s))
        }
        ExprKind::Pair(a, b) => {
            let ra = eval(env.clone(), a, s)?;
            bind(ra, s, move |av, s| {
                let rb = eval(env.clone(), b, s)?;
                bind(rb, s, move |bv, _| {
                    Ok(Res::V(Val::Pair(Rc::new((av.clone(), bv)))))
                })
            })
        }
        ExprKind::Fst(x) | ExprKind::Snd(x) => {
            let first = matches!(e.kind, ExprKind::Fst(_));
            let r = eval(env, x, s)?;
            bind(r, s, move |p, _| match p {
                Val::Pair(p) => Ok(Res::V(if first { p.0.clone() } else { p.1.clone() })),
                other => Err(RunError::TagMismatch(format!("projection from {other:?}"))),
            })
        }
        ExprKind::Inl(_, x) | ExprKind::Inr(_, x) => {
            let left = matches!(e.kind, ExprKind::Inl(..));
            let r = eval(env, x, s)?;
            bind(r, s, move |x, _| {
                Ok(Res::V(if left {
                    Val::Inl(Rc::new(x))
                } else {
                    Val::Inr(Rc::new(x))
                }))
            })
        }
        ExprKind::Case {
            scrutinee,
            left,
            left_body,
            right,
            right_body,
        } => {
            let r = eval(env.clone(), scrutinee, s)?;
            bind(r, s, move |x, s| match x {
                Val::Inl(x) => eval(env.update(left.clone(), (*x).clone()), left_body, s),
                Val::Inr(x) => eval(env.update(right.clone(), (*x).clone()), right_body, s),
                other => Err(RunError::TagMismatch(format!("case on {other:?}"))),
            })
        }
        ExprKind::If(c, t, f) => {
            let r = eval(env.clone(), c, s)?;
            bind(r, s, move |x, s| match x {
                Val::Inl(_) => eval(env.clone(), t, s),
                Val::Inr(_) => eval(env.clone(), f, s),
                other => Err(RunError::TagMismatch(format!("condition {other:?}"))),
            })
        }
        ExprKind::Absurd(_, x) => {
            let r = eval(env, x, s)?;
            bind(r, s, |_, _| Err(RunError::Absurd))
        }
        ExprKind::Print(x) => {
            let r = eval(env, x, s)?;
            bind(r, s, |x, s| match x {
                Val::Str(text) => {
                    s.print(&text);
                    Ok(Res::V(Val::Unit))
                }
                other => Err(RunError::TagMismatch(format!("printing {other:?}"))),
            })
        }
        ExprKind::Bin(op @ (BinOp::And | BinOp::Or), a, b) => {
            let is_and = *op == BinOp::And;
            let r = eval(env.clone(), a, s)?;
            bind(r, s, move |x, s| match (x, is_and) {
                (Val::Inl(_), true) | (Val::Inr(_), false) => eval(env.clone(), b, s),
                (x @ (Val::Inl(_) | Val::Inr(_)), _) => Ok(Res::V(x)),
                (other, _) => Err(RunError::TagMismatch(format!("boolean operand {other:?}"))),
            })
        }
        ExprKind::Bin(op, a, b) => {
            let prim = match op {
                BinOp::Add => Prim::Add,
                BinOp::Sub => Prim::Sub,
                BinOp::Mul => Prim::Mul,
                BinOp::Concat => Prim::Concat,
                BinOp::Eq => Prim::Eq,
                BinOp::Lt => Prim::Lt,
                BinOp::And | BinOp::Or => unreachable!(),
            };
            let ra = eval(env.clone(), a, s)?;
            bind(ra, s, move |av, s| {
                let rb = eval(env.clone(), b, s)?;
                let av = av.clone();
                bind(rb, s, move |bv, s| {
                    let partial = match apply(&prim_val(prim, Vec::new()), av.clone(), s)? {
                        Res::V(f) => f,
                        Res::E { .. } => unreachable!("primitives perform no effects"),
                    };
                    apply(&partial, bv, s)
                })
            })
        }
        ExprKind::New(..) => {
            let ty = e.ty.get().cloned().unwrap_or(Type::Dyn);
            v(Val::Inst(s.fresh_id(), Rc::new(ty)))
        }
        ExprKind::Op { instance, op, arg } => {
            let ri = eval(env.clone(), instance, s)?;
            bind(ri, s, move |iv, s| {
                let Val::Inst(id, _) = iv else {
                    return Err(RunError::TagMismatch(format!(
                        "expected an effect instance, got {iv:?}"
                    )));
                };
                let ra = eval(env.clone(), arg, s)?;
                bind(ra, s, move |av, _| {
                    Ok(Res::E {
                        inst: id,
                        op,
                        arg: av,
                        k: Rc::new(|x, _| Ok(Res::V(x))),
                    })
                })
            })
        }
        ExprKind::Handle { body, clauses } => {
            let h = handler_val(&env, clauses, s)?;
            let r = eval(env, body, s)?;
            h.handle(r, s)
        }
        ExprKind::Handler(clauses) => {
            let h = handler_val(&env, clauses, s)?;
            v(Val::Fn(Rc::new(move |thunk, s| {
                let r = apply(&thunk, Val::Unit, s)?;
                h.handle(r, s)
            })))
        }
        ExprKind::WithHandle { handler, body } => {
            let rh = eval(env.clone(), handler, s)?;
            bind(rh, s, move |hv, s| {
                let env = env.clone();
                let thunk = Val::Fn(Rc::new(move |_, s| eval(env.clone(), body, s)));
                apply(&hv, thunk, s)
            })
        }
        ExprKind::Cast(t, x) => {
            let r = eval(env, x, s)?;
            bind(r, s, move |x, _| {
                if conforms(&x, t) {
                    Ok(Res::V(x))
                } else {
                    Err(RunError::TagMismatch(format!("cast of {x:?}")))
                }
            })
        }
        ExprKind::WithNew(..) | ExprKind::NewRef(..) | ExprKind::Get(..) | ExprKind::Put(..) => {
            Err(RunError::Stuck(
                "dynamic effect syntax must be expanded first".into(),
            ))
        }
    }
}

/// Evaluate a scope-checked program directly. Elaboration is optional but
/// gives `new` instances their runtime type for casts.
pub fn run_surface(p: &SurfaceProgram, fuel: u64) -> Outcome {
    let mut s = Session::new(fuel);
    let mut env = Env::new();
    for i in p.instances() {
        let ty = Type::Effect(i.effect.clone(), i.args.clone());
        env.insert(i.name.clone(), Val::Inst(s.fresh_id(), Rc::new(ty)));
    }
    match eval(env, &p.body, &mut s) {
        Ok(Res::V(v)) => Outcome::Value {
            value: observe(&v),
            trace: s.take_trace(),
        },
        Ok(Res::E { inst, .. }) => Outcome::UnhandledEffect {
            instance: inst,
            trace: s.take_trace(),
        },
        Err(err) => Outcome::from_error(err, s.take_trace()),
    }
}
