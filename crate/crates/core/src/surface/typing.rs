//! Monomorphic elaboration: checks a surface program and fills every
//! [`Inferred`] slot, plus the optional annotations on `withnew`, `newref`,
//! `get`, `put` and handler value clauses.

use std::collections::HashMap;

use super::ast::*;
use super::SurfaceError;
use crate::prim::{Prim, Shape};
use crate::Name;

/// Surface type of a primitive.
pub fn prim_surface_type(p: Prim) -> Type {
    fn shape(s: Shape) -> Type {
        match s {
            Shape::Unit => Type::Unit,
            Shape::Int => Type::Int,
            Shape::Str => Type::Str,
            Shape::Bool => Type::Bool,
            Shape::Empty => Type::Empty,
        }
    }
    let (args, res) = p.signature();
    args.iter()
        .rev()
        .fold(shape(res), |acc, a| Type::arrow(shape(*a), acc))
}

/// Type-check `p` in place and return the type of its body.
pub fn elaborate(p: &mut SurfaceProgram) -> Result<Type, SurfaceError> {
    let effects: HashMap<Name, EffectDecl> =
        p.effects().map(|e| (e.name.clone(), e.clone())).collect();
    let mut env = Vec::new();
    for i in p.instances() {
        env.push((
            i.name.clone(),
            Type::Effect(i.effect.clone(), i.args.clone()),
        ));
    }
    let mut el = Elaborator { effects, env };
    el.expr(&mut p.body)
}

fn same(a: &Type, b: &Type) -> bool {
    a.normalize() == b.normalize()
}

fn show(t: &Type) -> String {
    super::pretty::pretty_type(t)
}

struct Elaborator {
    effects: HashMap<Name, EffectDecl>,
    env: Vec<(Name, Type)>,
}

impl Elaborator {
    fn lookup(&self, x: &Name, span: Span) -> Result<Type, SurfaceError> {
        if let Some((_, t)) = self.env.iter().rev().find(|(y, _)| y == x) {
            return Ok(t.clone());
        }
        match x.as_str().parse::<Prim>() {
            Ok(p) => Ok(prim_surface_type(p)),
            Err(()) => Err(SurfaceError::scope(span, format!("unknown variable `{x}`"))),
        }
    }

    fn with<T>(&mut self, binds: Vec<(Name, Type)>, f: impl FnOnce(&mut Self) -> T) -> T {
        let depth = self.env.len();
        self.env.extend(binds);
        let out = f(self);
        self.env.truncate(depth);
        out
    }

    fn expect(
        &self,
        span: Span,
        expected: &Type,
        found: &Type,
        what: &str,
    ) -> Result<(), SurfaceError> {
        if same(expected, found) {
            Ok(())
        } else {
            Err(SurfaceError::ty(
                span,
                format!("{what}: expected {}, found {}", show(expected), show(found)),
            ))
        }
    }

    fn sum_parts(&self, span: Span, t: &Type, what: &str) -> Result<(Type, Type), SurfaceError> {
        match t.normalize() {
            Type::Sum(a, b) => Ok((*a, *b)),
            other => Err(SurfaceError::ty(
                span,
                format!("{what}: expected a sum type, found {}", show(&other)),
            )),
        }
    }

    /// Operation signature for `op` on an instance of type `inst`.
    fn op_sig(&self, span: Span, inst: &Type, op: &Name) -> Result<(Type, Type), SurfaceError> {
        let Type::Effect(eff, args) = inst else {
            return Err(SurfaceError::ty(
                span,
                format!("expected an effect instance, found {}", show(inst)),
            ));
        };
        let decl = self
            .effects
            .get(eff)
            .ok_or_else(|| SurfaceError::scope(span, format!("unknown effect `{eff}`")))?;
        let (_, sig) = decl.op(op).ok_or_else(|| {
            SurfaceError::desugar(span, format!("effect `{eff}` has no operation `{op}`"))
        })?;
        Ok((
            sig.arg.subst(&decl.params, args),
            sig.res.subst(&decl.params, args),
        ))
    }

    fn expr(&mut self, e: &mut Expr) -> Result<Type, SurfaceError> {
        let ty = self.infer(e)?;
        e.ty = Inferred(Some(ty.clone()));
        Ok(ty)
    }

    fn infer(&mut self, e: &mut Expr) -> Result<Type, SurfaceError> {
        let span = e.span;
        Ok(match &mut e.kind {
            ExprKind::Var(x) => self.lookup(x, span)?,
            ExprKind::Unit => Type::Unit,
            ExprKind::Int(_) => Type::Int,
            ExprKind::Str(_) => Type::Str,
            ExprKind::Bool(_) => Type::Bool,
            ExprKind::Lam { param, ty, body } => {
                let res = self.with(vec![(param.clone(), ty.clone())], |s| s.expr(body))?;
                Type::arrow(ty.clone(), res)
            }
            ExprKind::App(f, a) => {
                let ft = self.expr(f)?;
                let at = self.expr(a)?;
                match ft.normalize() {
                    Type::Arrow(dom, cod) => {
                        self.expect(a.span, &dom, &at, "argument")?;
                        *cod
                    }
                    other => {
                        return Err(SurfaceError::ty(
                            span,
                            format!("applying a non-function of type {}", show(&other)),
                        ))
                    }
                }
            }
            ExprKind::Let {
                binder,
                bound,
                body,
            } => {
                let bt = self.expr(bound)?;
                self.with(vec![(binder.clone(), bt)], |s| s.expr(body))?
            }
            ExprKind::Seq(a, b) => {
                let at = self.expr(a)?;
                self.expect(a.span, &Type::Unit, &at, "left of `;`")?;
                self.expr(b)?
            }
            ExprKind::Pair(a, b) => Type::pair(self.expr(a)?, self.expr(b)?),
            ExprKind::Fst(x) => self.proj(span, x, true)?,
            ExprKind::Snd(x) => self.proj(span, x, false)?,
            ExprKind::Inl(t, x) => self.inject(span, t, x, true)?,
            ExprKind::Inr(t, x) => self.inject(span, t, x, false)?,
            ExprKind::Case {
                scrutinee,
                left,
                left_body,
                right,
                right_body,
            } => {
                let st = self.expr(scrutinee)?;
                let (a, b) = self.sum_parts(scrutinee.span, &st, "case scrutinee")?;
                let lt = self.with(vec![(left.clone(), a)], |s| s.expr(left_body))?;
                let rt = self.with(vec![(right.clone(), b)], |s| s.expr(right_body))?;
                self.expect(right_body.span, &lt, &rt, "case branches")?;
                lt
            }
            ExprKind::If(c, t, f) => {
                let ct = self.expr(c)?;
                self.expect(c.span, &Type::Bool, &ct, "condition")?;
                let tt = self.expr(t)?;
                let ft = self.expr(f)?;
                self.expect(f.span, &tt, &ft, "if branches")?;
                tt
            }
            ExprKind::Absurd(t, x) => {
                let xt = self.expr(x)?;
                self.expect(x.span, &Type::Empty, &xt, "absurd")?;
                t.clone()
            }
            ExprKind::Print(x) => {
                let xt = self.expr(x)?;
                self.expect(x.span, &Type::Str, &xt, "print")?;
                Type::Unit
            }
            ExprKind::Bin(op, a, b) => {
                let (operand, result) = match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul => (Type::Int, Type::Int),
                    BinOp::Concat => (Type::Str, Type::Str),
                    BinOp::Eq | BinOp::Lt => (Type::Int, Type::Bool),
                    BinOp::And | BinOp::Or => (Type::Bool, Type::Bool),
                };
                let what = format!("operand of `{}`", op.symbol());
                let at = self.expr(a)?;
                self.expect(a.span, &operand, &at, &what)?;
                let bt = self.expr(b)?;
                self.expect(b.span, &operand, &bt, &what)?;
                result
            }
            ExprKind::New(eff, args) => {
                let decl = self
                    .effects
                    .get(eff)
                    .ok_or_else(|| SurfaceError::scope(span, format!("unknown effect `{eff}`")))?;
                if decl.params.len() != args.len() {
                    return Err(SurfaceError::ty(
                        span,
                        format!("effect `{eff}` needs {} type arguments", decl.params.len()),
                    ));
                }
                Type::Effect(eff.clone(), args.clone())
            }
            ExprKind::Op { instance, op, arg } => {
                let it = self.expr(instance)?;
                let (a, r) = self.op_sig(span, &it, op)?;
                let at = self.expr(arg)?;
                self.expect(arg.span, &a, &at, &format!("argument of `{op}`"))?;
                r
            }
            ExprKind::Handle { body, clauses } => {
                let c = self.expr(body)?;
                self.clauses(span, clauses, Some(c))?.1
            }
            ExprKind::Handler(clauses) => {
                let (c, w) = self.clauses(span, clauses, None)?;
                Type::Handler(Box::new(c), Box::new(w))
            }
            ExprKind::WithHandle { handler, body } => {
                let ht = self.expr(handler)?;
                let bt = self.expr(body)?;
                match ht.normalize() {
                    Type::Handler(c, w) => {
                        self.expect(body.span, &c, &bt, "handled computation")?;
                        *w
                    }
                    other => {
                        return Err(SurfaceError::ty(
                            handler.span,
                            format!("expected a handler, found {}", show(&other)),
                        ))
                    }
                }
            }
            ExprKind::Cast(t, x) => {
                let xt = self.expr(x)?;
                let (tn, xn) = (t.normalize(), xt.normalize());
                if tn != xn && tn != Type::Dyn && xn != Type::Dyn {
                    return Err(SurfaceError::ty(
                        span,
                        format!("cannot cast {} to {}", show(&xt), show(t)),
                    ));
                }
                t.clone()
            }
            ExprKind::WithNew(t, x) => {
                let xt = self.expr(x)?;
                if let Some(t) = t {
                    self.expect(x.span, t, &xt, "withnew body")?;
                }
                *t = Some(xt.clone());
                xt
            }
            ExprKind::NewRef(t, x) => {
                let xt = self.expr(x)?;
                if let Some(t) = t {
                    self.expect(x.span, t, &xt, "initial value")?;
                }
                *t = Some(xt.clone());
                Type::Ref(Box::new(xt))
            }
            ExprKind::Get(t, r, a) => self.cell(t, r, a, true)?,
            ExprKind::Put(t, r, a) => self.cell(t, r, a, false)?,
        })
    }

    fn proj(&mut self, span: Span, x: &mut Expr, first: bool) -> Result<Type, SurfaceError> {
        let xt = self.expr(x)?;
        match xt.normalize() {
            Type::Pair(a, b) => Ok(if first { *a } else { *b }),
            other => Err(SurfaceError::ty(
                span,
                format!("projection: expected a pair, found {}", show(&other)),
            )),
        }
    }

    fn inject(
        &mut self,
        span: Span,
        t: &Type,
        x: &mut Expr,
        left: bool,
    ) -> Result<Type, SurfaceError> {
        let (a, b) = self.sum_parts(span, t, "injection annotation")?;
        let xt = self.expr(x)?;
        self.expect(x.span, if left { &a } else { &b }, &xt, "injected value")?;
        Ok(t.clone())
    }

    fn cell(
        &mut self,
        t: &mut Option<Type>,
        r: &mut Expr,
        a: &mut Expr,
        is_get: bool,
    ) -> Result<Type, SurfaceError> {
        let rt = self.expr(r)?;
        let Type::Ref(s) = rt else {
            return Err(SurfaceError::ty(
                r.span,
                format!("expected a reference, found {}", show(&rt)),
            ));
        };
        if let Some(t) = t {
            self.expect(r.span, t, &s, "reference contents")?;
        }
        *t = Some((*s).clone());
        let at = self.expr(a)?;
        if is_get {
            self.expect(a.span, &Type::Unit, &at, "get argument")?;
            Ok(*s)
        } else {
            self.expect(a.span, &s, &at, "stored value")?;
            Ok(Type::Unit)
        }
    }

    /// Check a clause set; returns the handled type `c` and the answer type `w`.
    fn clauses(
        &mut self,
        span: Span,
        clauses: &mut Clauses,
        handled: Option<Type>,
    ) -> Result<(Type, Type), SurfaceError> {
        let c = match (&clauses.val, handled) {
            (Some(v), Some(c)) => {
                if let Some(t) = &v.ty {
                    self.expect(span, t, &c, "value clause")?;
                }
                c
            }
            (Some(v), None) => v.ty.clone().ok_or_else(|| {
                SurfaceError::ty(
                    span,
                    "a handler value needs an annotated value clause `val (x : t) -> e`",
                )
            })?,
            (None, Some(c)) => c,
            (None, None) => {
                return Err(SurfaceError::ty(
                    span,
                    "a handler value needs an annotated value clause `val (x : t) -> e`",
                ));
            }
        };
        let w = match &mut clauses.val {
            Some(v) => {
                v.ty = Some(c.clone());
                self.with(vec![(v.binder.clone(), c.clone())], |s| s.expr(&mut v.body))?
            }
            None => c.clone(),
        };
        let mut instance: Option<Name> = None;
        let mut seen: Vec<Name> = Vec::new();
        for clause in &mut clauses.ops {
            match &instance {
                Some(i) if *i != clause.instance => {
                    return Err(SurfaceError::ty(
                        clause.span,
                        format!("a handler handles a single instance, but clauses mention `{i}` and `{}`", clause.instance),
                    ));
                }
                _ => instance = Some(clause.instance.clone()),
            }
            if seen.contains(&clause.op) {
                return Err(SurfaceError::ty(
                    clause.span,
                    format!("operation `{}` handled twice", clause.op),
                ));
            }
            seen.push(clause.op.clone());
            let it = self.lookup(&clause.instance, clause.span)?;
            let (a, r) = self.op_sig(clause.span, &it, &clause.op)?;
            clause.instance_ty = Inferred(Some(it));
            let binds = vec![
                (clause.arg.clone(), a),
                (clause.k.clone(), Type::arrow(r, w.clone())),
            ];
            let bt = self.with(binds, |s| s.expr(&mut clause.body))?;
            self.expect(clause.body.span, &w, &bt, "operation clause")?;
        }
        Ok((c, w))
    }
}
