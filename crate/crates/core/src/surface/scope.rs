use std::collections::HashMap;

use super::ast::*;
use super::SurfaceError;
use crate::prim::Prim;
use crate::Name;

/// Reject unknown variables, effects, type parameters and operations.
pub(super) fn check_scope(p: &SurfaceProgram) -> Result<(), SurfaceError> {
    let mut effects: HashMap<Name, &EffectDecl> = HashMap::new();
    for decl in &p.decls {
        match decl {
            Decl::Effect(e) => {
                if effects.contains_key(&e.name) {
                    return Err(SurfaceError::scope(
                        e.span,
                        format!("effect `{}` declared twice", e.name),
                    ));
                }
                effects.insert(e.name.clone(), e);
                for op in &e.ops {
                    for t in [&op.arg, &op.res] {
                        check_type(&effects, &e.params, t, e.span)?;
                    }
                }
            }
            Decl::Instance(i) => {
                check_type(
                    &effects,
                    &[],
                    &Type::Effect(i.effect.clone(), i.args.clone()),
                    i.span,
                )?;
            }
        }
    }
    let mut scope = Scope {
        effects,
        vars: Vec::new(),
        instances: Vec::new(),
    };
    for i in p.instances() {
        scope.vars.push(i.name.clone());
        scope.instances.push((i.name.clone(), i.effect.clone()));
    }
    scope.expr(&p.body)
}

fn check_type(
    effects: &HashMap<Name, &EffectDecl>,
    params: &[Name],
    t: &Type,
    span: Span,
) -> Result<(), SurfaceError> {
    match t {
        Type::Param(v) if !params.contains(v) => Err(SurfaceError::scope(
            span,
            format!("unknown type parameter '{v}"),
        )),
        Type::Effect(e, args) => {
            let Some(decl) = effects.get(e) else {
                return Err(SurfaceError::scope(span, format!("unknown effect `{e}`")));
            };
            if decl.params.len() != args.len() {
                return Err(SurfaceError::scope(
                    span,
                    format!(
                        "effect `{e}` takes {} type arguments, got {}",
                        decl.params.len(),
                        args.len()
                    ),
                ));
            }
            args.iter()
                .try_for_each(|a| check_type(effects, params, a, span))
        }
        Type::Arrow(a, b) | Type::Pair(a, b) | Type::Sum(a, b) | Type::Handler(a, b) => {
            check_type(effects, params, a, span)?;
            check_type(effects, params, b, span)
        }
        Type::Ref(a) => check_type(effects, params, a, span),
        _ => Ok(()),
    }
}

struct Scope<'p> {
    effects: HashMap<Name, &'p EffectDecl>,
    vars: Vec<Name>,
    /// Variables statically known to hold an instance of a declared effect.
    instances: Vec<(Name, Name)>,
}

impl Scope<'_> {
    fn bound(&self, x: &Name) -> bool {
        self.vars.iter().any(|v| v == x) || x.as_str().parse::<Prim>().is_ok()
    }

    fn under<T>(&mut self, binders: &[&Name], f: impl FnOnce(&mut Self) -> T) -> T {
        let depth = self.vars.len();
        let idepth = self.instances.len();
        self.vars.extend(binders.iter().map(|b| (*b).clone()));
        self.instances
            .extend(binders.iter().map(|b| ((*b).clone(), Name::new(""))));
        let out = f(self);
        self.vars.truncate(depth);
        self.instances.truncate(idepth);
        out
    }

    fn ty(&self, t: &Type, span: Span) -> Result<(), SurfaceError> {
        check_type(&self.effects, &[], t, span)
    }

    fn expr(&mut self, e: &Expr) -> Result<(), SurfaceError> {
        match &e.kind {
            ExprKind::Var(x) => {
                if !self.bound(x) {
                    return Err(SurfaceError::scope(
                        e.span,
                        format!("unknown variable `{x}`"),
                    ));
                }
                Ok(())
            }
            ExprKind::Lam { param, ty, body } => {
                self.ty(ty, e.span)?;
                self.under(&[param], |s| s.expr(body))
            }
            ExprKind::Let {
                binder,
                bound,
                body,
            } => {
                self.expr(bound)?;
                let known = match &bound.kind {
                    ExprKind::New(eff, _) => Some(eff.clone()),
                    _ => None,
                };
                self.under(&[binder], |s| {
                    if let Some(eff) = known {
                        s.instances.push((binder.clone(), eff));
                    }
                    s.expr(body)
                })
            }
            ExprKind::Case {
                scrutinee,
                left,
                left_body,
                right,
                right_body,
            } => {
                self.expr(scrutinee)?;
                self.under(&[left], |s| s.expr(left_body))?;
                self.under(&[right], |s| s.expr(right_body))
            }
            ExprKind::Inl(t, x)
            | ExprKind::Inr(t, x)
            | ExprKind::Absurd(t, x)
            | ExprKind::Cast(t, x) => {
                self.ty(t, e.span)?;
                self.expr(x)
            }
            ExprKind::WithNew(t, x) | ExprKind::NewRef(t, x) => {
                if let Some(t) = t {
                    self.ty(t, e.span)?;
                }
                self.expr(x)
            }
            ExprKind::Get(t, a, b) | ExprKind::Put(t, a, b) => {
                if let Some(t) = t {
                    self.ty(t, e.span)?;
                }
                self.expr(a)?;
                self.expr(b)
            }
            ExprKind::New(eff, args) => self.ty(&Type::Effect(eff.clone(), args.clone()), e.span),
            ExprKind::Op { instance, op, arg } => {
                self.expr(instance)?;
                self.known_op(instance, op, e.span)?;
                self.expr(arg)
            }
            ExprKind::Handle { body, clauses } => {
                self.expr(body)?;
                self.clauses(clauses)
            }
            ExprKind::Handler(clauses) => self.clauses(clauses),
            _ => e.children().into_iter().try_for_each(|c| self.expr(c)),
        }
    }

    /// When the instance is a variable bound to a known effect, the operation must belong to it.
    fn known_op(&self, instance: &Expr, op: &Name, span: Span) -> Result<(), SurfaceError> {
        let ExprKind::Var(x) = &instance.kind else {
            return Ok(());
        };
        let Some((_, eff)) = self.instances.iter().rev().find(|(v, _)| v == x) else {
            return Ok(());
        };
        let Some(decl) = self.effects.get(eff) else {
            return Ok(());
        };
        if decl.op(op).is_none() {
            return Err(SurfaceError::scope(
                span,
                format!("effect `{eff}` has no operation `{op}`"),
            ));
        }
        Ok(())
    }

    fn clauses(&mut self, c: &Clauses) -> Result<(), SurfaceError> {
        if let Some(v) = &c.val {
            if let Some(t) = &v.ty {
                self.ty(t, v.body.span)?;
            }
            self.under(&[&v.binder], |s| s.expr(&v.body))?;
        }
        for clause in &c.ops {
            if !self.bound(&clause.instance) {
                return Err(SurfaceError::scope(
                    clause.span,
                    format!("unknown instance `{}`", clause.instance),
                ));
            }
            self.under(&[&clause.arg, &clause.k], |s| s.expr(&clause.body))?;
        }
        Ok(())
    }
}
