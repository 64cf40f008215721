//! Rewrites every effect with several operations into an effect with a single
//! operation `$op` over nested sums of the original argument and result types.

use std::collections::HashMap;

use super::ast::*;
use super::SurfaceError;
use crate::Name;

pub const UNION_OP: &str = "$op";

/// Expects an elaborated program; the result needs elaborating again.
pub fn desugar_multi_op(p: &SurfaceProgram) -> Result<SurfaceProgram, SurfaceError> {
    let multi: HashMap<Name, EffectDecl> = p
        .effects()
        .filter(|e| e.ops.len() > 1)
        .map(|e| (e.name.clone(), e.clone()))
        .collect();
    if multi.is_empty() {
        return Ok(p.clone());
    }
    let mut d = Desugar { multi, next: 0 };
    let decls = p
        .decls
        .iter()
        .map(|decl| match decl {
            Decl::Effect(e) if e.ops.len() > 1 => {
                let (arg, res) = union_types(e, None);
                let op = OpDecl {
                    name: Name::new(UNION_OP),
                    arg,
                    res,
                };
                Decl::Effect(EffectDecl {
                    ops: vec![op],
                    ..e.clone()
                })
            }
            d => d.clone(),
        })
        .collect();
    let body = d.expr(&p.body)?;
    Ok(SurfaceProgram { decls, body })
}

/// Nested-sum argument and result types of the union operation, optionally instantiated.
fn union_types(e: &EffectDecl, args: Option<&[Type]>) -> (Type, Type) {
    let inst = |t: &Type| match args {
        Some(a) => t.subst(&e.params, a),
        None => t.clone(),
    };
    let ins: Vec<Type> = e.ops.iter().map(|o| inst(&o.arg)).collect();
    let outs: Vec<Type> = e.ops.iter().map(|o| inst(&o.res)).collect();
    (nest(&ins), nest(&outs))
}

fn nest(ts: &[Type]) -> Type {
    match ts {
        [t] => t.clone(),
        [t, rest @ ..] => Type::sum(t.clone(), nest(rest)),
        [] => unreachable!("effects declare at least one operation"),
    }
}

fn syn(kind: ExprKind) -> Expr {
    Expr::synth(kind)
}

/// The components of one instantiated multi-op effect.
struct Layout {
    ins: Vec<Type>,
    outs: Vec<Type>,
}

impl Layout {
    fn n(&self) -> usize {
        self.ins.len()
    }

    /// Inject `x` as the payload of operation `i` into the sum over `ts[j..]`.
    fn inject(ts: &[Type], j: usize, i: usize, x: Expr) -> Expr {
        if j == ts.len() - 1 {
            return x;
        }
        let tail = nest(&ts[j..]);
        if i == j {
            syn(ExprKind::Inl(tail, x.boxed()))
        } else {
            syn(ExprKind::Inr(tail, Layout::inject(ts, j + 1, i, x).boxed()))
        }
    }
}

struct Desugar {
    multi: HashMap<Name, EffectDecl>,
    next: usize,
}

impl Desugar {
    fn fresh(&mut self, hint: &str) -> Name {
        self.next += 1;
        Name::from(format!("${hint}{}", self.next))
    }

    fn layout(&self, inst_ty: Option<&Type>) -> Option<(&EffectDecl, Layout)> {
        let Some(Type::Effect(eff, args)) = inst_ty else {
            return None;
        };
        let decl = self.multi.get(eff)?;
        let ins = decl
            .ops
            .iter()
            .map(|o| o.arg.subst(&decl.params, args))
            .collect();
        let outs = decl
            .ops
            .iter()
            .map(|o| o.res.subst(&decl.params, args))
            .collect();
        Some((decl, Layout { ins, outs }))
    }

    fn mismatch(ty: &Type) -> Expr {
        let call = syn(ExprKind::App(
            Expr::var("tag_mismatch").boxed(),
            syn(ExprKind::Unit).boxed(),
        ));
        syn(ExprKind::Absurd(ty.clone(), call.boxed()))
    }

    /// Project the result of operation `i` out of `v : nest(outs[j..])`.
    fn project(&mut self, outs: &[Type], j: usize, i: usize, v: Expr) -> Expr {
        if j == outs.len() - 1 {
            return v;
        }
        let (l, r) = (self.fresh("v"), self.fresh("v"));
        let (left_body, right_body) = if i == j {
            (Expr::var(l.clone()), Desugar::mismatch(&outs[i]))
        } else {
            (
                Desugar::mismatch(&outs[i]),
                self.project(outs, j + 1, i, Expr::var(r.clone())),
            )
        };
        syn(ExprKind::Case {
            scrutinee: v.boxed(),
            left: l,
            left_body: left_body.boxed(),
            right: r,
            right_body: right_body.boxed(),
        })
    }

    fn expr(&mut self, e: &Expr) -> Result<Expr, SurfaceError> {
        let kind = match &e.kind {
            ExprKind::Op { instance, op, arg } => {
                let arg = self.expr(arg)?;
                match self.layout(instance.ty.get()) {
                    None => ExprKind::Op {
                        instance: instance.clone(),
                        op: op.clone(),
                        arg: arg.boxed(),
                    },
                    Some((decl, layout)) => {
                        let (i, _) = decl.op(op).ok_or_else(|| {
                            SurfaceError::desugar(
                                e.span,
                                format!("effect `{}` has no operation `{op}`", decl.name),
                            )
                        })?;
                        let payload = Layout::inject(&layout.ins, 0, i, arg);
                        let call = syn(ExprKind::Op {
                            instance: instance.clone(),
                            op: Name::new(UNION_OP),
                            arg: payload.boxed(),
                        });
                        return Ok(Expr {
                            span: e.span,
                            ..self.project(&layout.outs, 0, i, call)
                        });
                    }
                }
            }
            ExprKind::Handle { body, clauses } => ExprKind::Handle {
                body: self.expr(body)?.boxed(),
                clauses: self.clauses(clauses)?,
            },
            ExprKind::Handler(clauses) => ExprKind::Handler(self.clauses(clauses)?),
            _ => {
                let mut out = e.clone();
                self.children(&mut out)?;
                return Ok(out);
            }
        };
        Ok(Expr::new(kind, e.span))
    }

    fn children(&mut self, e: &mut Expr) -> Result<(), SurfaceError> {
        let rewrite = |d: &mut Self, x: &mut Box<Expr>| -> Result<(), SurfaceError> {
            **x = d.expr(x)?;
            Ok(())
        };
        match &mut e.kind {
            ExprKind::Lam { body, .. } => rewrite(self, body),
            ExprKind::Fst(x)
            | ExprKind::Snd(x)
            | ExprKind::Inl(_, x)
            | ExprKind::Inr(_, x)
            | ExprKind::Absurd(_, x)
            | ExprKind::Print(x)
            | ExprKind::Cast(_, x)
            | ExprKind::WithNew(_, x)
            | ExprKind::NewRef(_, x) => rewrite(self, x),
            ExprKind::App(a, b)
            | ExprKind::Seq(a, b)
            | ExprKind::Pair(a, b)
            | ExprKind::Bin(_, a, b)
            | ExprKind::Get(_, a, b)
            | ExprKind::Put(_, a, b)
            | ExprKind::Let {
                bound: a, body: b, ..
            }
            | ExprKind::WithHandle {
                handler: a,
                body: b,
            } => {
                rewrite(self, a)?;
                rewrite(self, b)
            }
            ExprKind::Case {
                scrutinee,
                left_body,
                right_body,
                ..
            } => {
                rewrite(self, scrutinee)?;
                rewrite(self, left_body)?;
                rewrite(self, right_body)
            }
            ExprKind::If(a, b, c) => {
                rewrite(self, a)?;
                rewrite(self, b)?;
                rewrite(self, c)
            }
            _ => Ok(()),
        }
    }

    fn clauses(&mut self, c: &Clauses) -> Result<Clauses, SurfaceError> {
        let val = match &c.val {
            Some(v) => Some(Box::new(ValClause {
                body: self.expr(&v.body)?,
                ..(**v).clone()
            })),
            None => None,
        };
        let Some(first) = c.ops.first() else {
            return Ok(Clauses { val, ops: vec![] });
        };
        let Some((decl, layout)) = self.layout(first.instance_ty.get()) else {
            let ops = c
                .ops
                .iter()
                .map(|o| {
                    Ok(OpClause {
                        body: self.expr(&o.body)?,
                        ..o.clone()
                    })
                })
                .collect::<Result<_, SurfaceError>>()?;
            return Ok(Clauses { val, ops });
        };
        let decl = decl.clone();
        let mut by_index: Vec<Option<&OpClause>> = vec![None; layout.n()];
        for clause in &c.ops {
            let (i, _) = decl.op(&clause.op).ok_or_else(|| {
                SurfaceError::desugar(
                    clause.span,
                    format!("effect `{}` has no operation `{}`", decl.name, clause.op),
                )
            })?;
            by_index[i] = Some(clause);
        }
        let instance = first.instance.clone();
        let (x, k) = (self.fresh("x"), self.fresh("k"));
        let body = self.dispatch(
            &instance,
            &layout,
            &by_index,
            0,
            Expr::var(x.clone()),
            &x,
            &k,
        )?;
        let clause = OpClause {
            instance,
            op: Name::new(UNION_OP),
            arg: x,
            k,
            body,
            instance_ty: Inferred::none(),
            span: first.span,
        };
        Ok(Clauses {
            val,
            ops: vec![clause],
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn dispatch(
        &mut self,
        instance: &Name,
        layout: &Layout,
        clauses: &[Option<&OpClause>],
        j: usize,
        payload: Expr,
        x: &Name,
        k: &Name,
    ) -> Result<Expr, SurfaceError> {
        if j == layout.n() - 1 {
            return self.branch(instance, layout, clauses[j], j, payload, x, k);
        }
        let (l, r) = (self.fresh("a"), self.fresh("a"));
        let left_body = self.branch(instance, layout, clauses[j], j, Expr::var(l.clone()), x, k)?;
        let right_body =
            self.dispatch(instance, layout, clauses, j + 1, Expr::var(r.clone()), x, k)?;
        Ok(syn(ExprKind::Case {
            scrutinee: payload.boxed(),
            left: l,
            left_body: left_body.boxed(),
            right: r,
            right_body: right_body.boxed(),
        }))
    }

    #[allow(clippy::too_many_arguments)]
    fn branch(
        &mut self,
        instance: &Name,
        layout: &Layout,
        clause: Option<&OpClause>,
        i: usize,
        payload: Expr,
        x: &Name,
        k: &Name,
    ) -> Result<Expr, SurfaceError> {
        let let_ = |binder: Name, bound: Expr, body: Expr| {
            syn(ExprKind::Let {
                binder,
                bound: bound.boxed(),
                body: body.boxed(),
            })
        };
        let Some(clause) = clause else {
            // re-raise to the next handler of the same instance
            let r = self.fresh("r");
            let reraise = syn(ExprKind::Op {
                instance: Expr::var(instance.clone()).boxed(),
                op: Name::new(UNION_OP),
                arg: Expr::var(x.clone()).boxed(),
            });
            let resume = syn(ExprKind::App(
                Expr::var(k.clone()).boxed(),
                Expr::var(r.clone()).boxed(),
            ));
            return Ok(let_(r, reraise, resume));
        };
        let y = self.fresh("y");
        let tagged = Layout::inject(&layout.outs, 0, i, Expr::var(y.clone()));
        let resume = syn(ExprKind::Lam {
            param: y,
            ty: layout.outs[i].clone(),
            body: syn(ExprKind::App(Expr::var(k.clone()).boxed(), tagged.boxed())).boxed(),
        });
        let body = self.expr(&clause.body)?;
        Ok(let_(
            clause.arg.clone(),
            payload,
            let_(clause.k.clone(), resume, body),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{front, run_core, Semantics};
    use crate::surface::eval::run_surface;
    use crate::surface::{elaborate, lower, Phase};
    use crate::DEFAULT_FUEL;

    const EXEFF: &str = include_str!("../../../harness/tests/corpus/exeff.effs");

    #[test]
    fn single_op_programs_are_unchanged() {
        let p = front("effect e { op : int -> int }\nlet r = new e in r#op 1").unwrap();
        assert_eq!(desugar_multi_op(&p).unwrap(), p);
    }

    #[test]
    fn every_effect_ends_with_one_operation() {
        let p = front(EXEFF).unwrap();
        assert!(p.effects().any(|e| e.ops.len() > 1));
        let q = desugar_multi_op(&p).unwrap();
        assert!(q
            .effects()
            .all(|e| e.ops.len() == 1 && e.ops[0].name.as_str() == UNION_OP));
    }

    #[test]
    fn outcome_is_preserved() {
        let p = front(EXEFF).unwrap();
        let before = run_surface(&p, DEFAULT_FUEL);
        let mut q = desugar_multi_op(&p).unwrap();
        elaborate(&mut q).unwrap();
        let core = lower(&q).unwrap();
        for sem in Semantics::ALL {
            assert_eq!(run_core(&core, sem, DEFAULT_FUEL).unwrap(), before, "{sem}");
        }
    }

    #[test]
    fn clause_for_a_foreign_operation() {
        let src = "effect e { a : int -> int, b : int -> int }
            effect f { c : int -> int }
            let r = new e in
            handle r#a 1 with { | val x -> x | r#c(x, k) -> k x }";
        let err = front(src).and_then(|p| desugar_multi_op(&p)).unwrap_err();
        assert!(matches!(err.phase, Phase::Desugar | Phase::Scope), "{err}");
    }
}
