//! Lowering of elaborated, single-operation surface programs into Core Eff
//! A-normal form by left-to-right let-insertion.

use std::collections::HashMap;

use super::ast::*;
use super::SurfaceError;
use crate::core_eff::{CoreComp, CoreEffProgram, CoreType, CoreValue, Handler};
use crate::prim::Prim;
use crate::Name;

/// Expects an elaborated program with dynamic sugar expanded and one operation per effect.
pub fn lower(p: &SurfaceProgram) -> Result<CoreEffProgram, SurfaceError> {
    let mut lw = Lower {
        effects: HashMap::new(),
        bound: Vec::new(),
        next: 0,
    };
    for e in p.effects() {
        if e.ops.len() != 1 {
            return Err(SurfaceError::desugar(
                e.span,
                format!("effect `{}` still has {} operations", e.name, e.ops.len()),
            ));
        }
        lw.effects.insert(e.name.clone(), e);
    }
    let mut instances = Vec::new();
    for i in p.instances() {
        let CoreType::Eff(a, b) = lw.ty(&Type::Effect(i.effect.clone(), i.args.clone()), i.span)?
        else {
            unreachable!("effect types lower to instance types")
        };
        instances.push((i.name.clone(), CoreComp::NewP(*a, *b)));
        lw.bound.push(i.name.clone());
    }
    let body = lw.comp(&p.body)?;
    let body = instances
        .into_iter()
        .rev()
        .fold(body, |body, (x, newp)| CoreComp::let_(x, newp, body));
    Ok(CoreEffProgram::new(body))
}

struct Lower<'p> {
    effects: HashMap<Name, &'p EffectDecl>,
    bound: Vec<Name>,
    next: usize,
}

type Binds = Vec<(Name, CoreComp)>;

fn wrap(binds: Binds, body: CoreComp) -> CoreComp {
    binds
        .into_iter()
        .rev()
        .fold(body, |body, (x, bound)| CoreComp::let_(x, bound, body))
}

fn false_value() -> CoreValue {
    CoreValue::Inr(Box::new(CoreValue::Unit), CoreType::bool())
}

fn true_value() -> CoreValue {
    CoreValue::Inl(Box::new(CoreValue::Unit), CoreType::bool())
}

impl Lower<'_> {
    fn fresh(&mut self) -> Name {
        self.next += 1;
        Name::from(format!("$a{}", self.next))
    }

    fn ty(&self, t: &Type, span: Span) -> Result<CoreType, SurfaceError> {
        Ok(match t {
            Type::Unit => CoreType::Unit,
            Type::Int => CoreType::Int,
            Type::Str => CoreType::Str,
            Type::Empty => CoreType::Empty,
            Type::Bool => CoreType::bool(),
            Type::Dyn => CoreType::Dyn,
            Type::Arrow(a, b) => CoreType::arrow(self.ty(a, span)?, self.ty(b, span)?),
            Type::Pair(a, b) => CoreType::pair(self.ty(a, span)?, self.ty(b, span)?),
            Type::Sum(a, b) => CoreType::sum(self.ty(a, span)?, self.ty(b, span)?),
            Type::Handler(a, b) => CoreType::effh(self.ty(a, span)?, self.ty(b, span)?),
            Type::Effect(e, args) => {
                let decl = self
                    .effects
                    .get(e)
                    .ok_or_else(|| SurfaceError::scope(span, format!("unknown effect `{e}`")))?;
                let op = &decl.ops[0];
                CoreType::eff(
                    self.ty(&op.arg.subst(&decl.params, args), span)?,
                    self.ty(&op.res.subst(&decl.params, args), span)?,
                )
            }
            Type::Param(v) => {
                return Err(SurfaceError::ty(
                    span,
                    format!("uninstantiated type parameter '{v}"),
                ))
            }
            Type::Ref(_) => {
                return Err(SurfaceError::expand(
                    span,
                    "reference type outside of a withnew block",
                ))
            }
        })
    }

    fn under<T>(&mut self, binders: &[&Name], f: impl FnOnce(&mut Self) -> T) -> T {
        let depth = self.bound.len();
        self.bound.extend(binders.iter().map(|b| (*b).clone()));
        let out = f(self);
        self.bound.truncate(depth);
        out
    }

    /// Lower `e` to a value, emitting the computations it needs into `binds`.
    fn atom(&mut self, e: &Expr, binds: &mut Binds) -> Result<CoreValue, SurfaceError> {
        Ok(match &e.kind {
            ExprKind::Var(x) => {
                if self.bound.contains(x) {
                    CoreValue::Var(x.clone())
                } else {
                    match x.as_str().parse::<Prim>() {
                        Ok(p) => CoreValue::Prim(p),
                        Err(()) => {
                            return Err(SurfaceError::scope(
                                e.span,
                                format!("unknown variable `{x}`"),
                            ))
                        }
                    }
                }
            }
            ExprKind::Unit => CoreValue::Unit,
            ExprKind::Int(n) => CoreValue::Int(*n),
            ExprKind::Str(s) => CoreValue::Str(s.clone()),
            ExprKind::Bool(true) => true_value(),
            ExprKind::Bool(false) => false_value(),
            ExprKind::Lam { param, ty, body } => {
                let body = self.under(&[param], |s| s.comp(body))?;
                CoreValue::lam(param.clone(), self.ty(ty, e.span)?, body)
            }
            ExprKind::Pair(a, b) => {
                let a = self.atom(a, binds)?;
                CoreValue::pair(a, self.atom(b, binds)?)
            }
            ExprKind::Inl(t, x) => {
                CoreValue::Inl(Box::new(self.atom(x, binds)?), self.ty(t, e.span)?)
            }
            ExprKind::Inr(t, x) => {
                CoreValue::Inr(Box::new(self.atom(x, binds)?), self.ty(t, e.span)?)
            }
            ExprKind::Handler(clauses) if !clauses.ops.is_empty() => {
                CoreValue::Handler(Box::new(self.handler(e, clauses, None)?))
            }
            ExprKind::Handler(clauses) => {
                // no operation clauses: the handler belongs to an instance nobody can reach
                let Some(Type::Handler(c, _)) = e.ty.get() else {
                    unreachable!("handlers are elaborated")
                };
                let inst = self.fresh();
                binds.push((inst.clone(), CoreComp::NewP(CoreType::Unit, CoreType::Unit)));
                let mut h = self.handler(e, clauses, Some(c))?;
                h.instance = CoreValue::Var(inst);
                let (x, k) = (self.fresh(), self.fresh());
                h.op_body = CoreComp::App(CoreValue::Var(k.clone()), CoreValue::Var(x.clone()));
                h.arg_binder = x;
                h.k_binder = k;
                CoreValue::Handler(Box::new(h))
            }
            _ => {
                let c = self.comp(e)?;
                if let CoreComp::Val(v) = c {
                    return Ok(v);
                }
                let x = self.fresh();
                binds.push((x.clone(), c));
                CoreValue::Var(x)
            }
        })
    }

    fn handler(
        &mut self,
        e: &Expr,
        clauses: &Clauses,
        handled: Option<&Type>,
    ) -> Result<Handler, SurfaceError> {
        let (val_binder, val_ty, val_body) = match &clauses.val {
            Some(v) => {
                let t = v.ty.as_ref().expect("value clause types are elaborated");
                let body = self.under(&[&v.binder], |s| s.comp(&v.body))?;
                (v.binder.clone(), self.ty(t, e.span)?, body)
            }
            None => {
                let x = self.fresh();
                let t = handled.expect("handled type is known without a value clause");
                (
                    x.clone(),
                    self.ty(t, e.span)?,
                    CoreComp::Val(CoreValue::Var(x)),
                )
            }
        };
        let (instance, arg_binder, k_binder, op_body) = match clauses.ops.first() {
            Some(op) => {
                let body = self.under(&[&op.arg, &op.k], |s| s.comp(&op.body))?;
                (
                    CoreValue::Var(op.instance.clone()),
                    op.arg.clone(),
                    op.k.clone(),
                    body,
                )
            }
            None => (
                CoreValue::Unit,
                Name::new("_"),
                Name::new("_"),
                CoreComp::Val(CoreValue::Unit),
            ),
        };
        Ok(Handler {
            instance,
            val_binder,
            val_ty,
            val_body,
            arg_binder,
            k_binder,
            op_body,
        })
    }

    fn comp(&mut self, e: &Expr) -> Result<CoreComp, SurfaceError> {
        let mut binds = Binds::new();
        let body = match &e.kind {
            ExprKind::Var(_)
            | ExprKind::Unit
            | ExprKind::Int(_)
            | ExprKind::Str(_)
            | ExprKind::Bool(_)
            | ExprKind::Lam { .. }
            | ExprKind::Pair(..)
            | ExprKind::Inl(..)
            | ExprKind::Inr(..)
            | ExprKind::Handler(_) => CoreComp::Val(self.atom(e, &mut binds)?),
            ExprKind::App(f, a) => {
                let f = self.atom(f, &mut binds)?;
                CoreComp::App(f, self.atom(a, &mut binds)?)
            }
            ExprKind::Let {
                binder,
                bound,
                body,
            } => {
                let bound = self.comp(bound)?;
                let body = self.under(&[binder], |s| s.comp(body))?;
                CoreComp::let_(binder.clone(), bound, body)
            }
            ExprKind::Seq(a, b) => {
                let a = self.comp(a)?;
                CoreComp::let_("_", a, self.comp(b)?)
            }
            ExprKind::Fst(x) => CoreComp::Proj1(self.atom(x, &mut binds)?),
            ExprKind::Snd(x) => CoreComp::Proj2(self.atom(x, &mut binds)?),
            ExprKind::Case {
                scrutinee,
                left,
                left_body,
                right,
                right_body,
            } => {
                let s = self.atom(scrutinee, &mut binds)?;
                let lb = self.under(&[left], |s| s.comp(left_body))?;
                let rb = self.under(&[right], |s| s.comp(right_body))?;
                CoreComp::case(s, left.clone(), lb, right.clone(), rb)
            }
            ExprKind::If(c, t, f) => {
                let c = self.atom(c, &mut binds)?;
                let (t, f) = (self.comp(t)?, self.comp(f)?);
                CoreComp::case(c, "_", t, "_", f)
            }
            ExprKind::Absurd(t, x) => {
                CoreComp::Absurd(self.atom(x, &mut binds)?, self.ty(t, e.span)?)
            }
            ExprKind::Print(x) => CoreComp::Print(self.atom(x, &mut binds)?),
            ExprKind::Cast(t, x) => CoreComp::Cast(self.atom(x, &mut binds)?, self.ty(t, e.span)?),
            ExprKind::Bin(op @ (BinOp::And | BinOp::Or), a, b) => {
                let a = self.atom(a, &mut binds)?;
                let b = self.comp(b)?;
                if *op == BinOp::And {
                    CoreComp::case(a, "_", b, "_", CoreComp::Val(false_value()))
                } else {
                    CoreComp::case(a, "_", CoreComp::Val(true_value()), "_", b)
                }
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
                let a = self.atom(a, &mut binds)?;
                let b = self.atom(b, &mut binds)?;
                let partial = self.fresh();
                binds.push((partial.clone(), CoreComp::App(CoreValue::Prim(prim), a)));
                CoreComp::App(CoreValue::Var(partial), b)
            }
            ExprKind::New(..) => {
                let t = self.ty(e.typed(), e.span)?;
                let CoreType::Eff(a, b) = t else {
                    unreachable!("new has an instance type")
                };
                CoreComp::NewP(*a, *b)
            }
            ExprKind::Op { instance, arg, .. } => {
                let inst = self.atom(instance, &mut binds)?;
                CoreComp::App(CoreValue::op(inst), self.atom(arg, &mut binds)?)
            }
            ExprKind::Handle { body, clauses } => {
                if clauses.ops.is_empty() {
                    let bound = self.comp(body)?;
                    return Ok(match &clauses.val {
                        Some(v) => {
                            let vb = self.under(&[&v.binder], |s| s.comp(&v.body))?;
                            CoreComp::let_(v.binder.clone(), bound, vb)
                        }
                        None => bound,
                    });
                }
                let h = self.handler(e, clauses, body.ty.get())?;
                CoreComp::with_handle(CoreValue::Handler(Box::new(h)), self.comp(body)?)
            }
            ExprKind::WithHandle { handler, body } => {
                let h = self.atom(handler, &mut binds)?;
                CoreComp::with_handle(h, self.comp(body)?)
            }
            ExprKind::WithNew(..)
            | ExprKind::NewRef(..)
            | ExprKind::Get(..)
            | ExprKind::Put(..) => {
                return Err(SurfaceError::expand(
                    e.span,
                    "dynamic effect syntax must be expanded before lowering",
                ));
            }
        };
        Ok(wrap(binds, body))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_eff::is_core_anf;
    use crate::pipeline::compile;

    /// Strip the leading `let` chain whose binders are in `names`.
    fn after<'e>(mut e: &'e CoreComp, names: &[&str]) -> &'e CoreComp {
        while let CoreComp::Let { binder, body, .. } = e {
            if !names.contains(&binder.as_str()) {
                break;
            }
            e = body;
        }
        e
    }

    #[test]
    fn nested_applications_are_named() {
        let src = "let f = fun (a : int) -> fun (b : int) -> b in
            let g = fun (a : int) -> a in
            (f 1) (g 2)";
        let c = compile(src).unwrap();
        let tail = after(&c.core.body, &["f", "g"]);
        let CoreComp::Let {
            binder: a,
            bound: fa,
            body,
        } = tail
        else {
            panic!("{tail}")
        };
        assert_eq!(**fa, CoreComp::App(CoreValue::var("f"), CoreValue::Int(1)));
        let CoreComp::Let {
            binder: b,
            bound: gb,
            body,
        } = &**body
        else {
            panic!("{body}")
        };
        assert_eq!(**gb, CoreComp::App(CoreValue::var("g"), CoreValue::Int(2)));
        assert_eq!(
            **body,
            CoreComp::App(CoreValue::Var(a.clone()), CoreValue::Var(b.clone()))
        );
        assert!(a.is_generated() && b.is_generated());
    }

    #[test]
    fn invocation_applies_the_operation() {
        let c = compile("effect e { op : int -> int }\nlet r = new e in r#op 4").unwrap();
        let tail = after(&c.core.body, &["r"]);
        assert_eq!(
            *tail,
            CoreComp::App(CoreValue::op(CoreValue::var("r")), CoreValue::Int(4))
        );
    }

    #[test]
    fn output_is_in_anf() {
        let c = compile(include_str!("../../../harness/tests/corpus/test2.effs")).unwrap();
        assert!(is_core_anf(&c.core.body));
    }

    #[test]
    fn reader_lowers_to_21() {
        let c = compile(include_str!("../../../harness/tests/corpus/reader.effs")).unwrap();
        let out = crate::eff_denot::run_eff(&c.core, crate::DEFAULT_FUEL);
        assert_eq!(out.golden_text(), "\n21\n");
    }
}
