//! Dynamic effects as an ordinary effect.
//!
//! `withnew { e }` installs a handler for a fresh instance of the reserved
//! `$New` effect. `newref s0` asks that handler for a new `$State` instance,
//! sending along a function that wraps the state-passing handler around the
//! rest of the computation. Payloads cross the `$New` and `$State` boundaries
//! as `dyn` and are recovered with checked casts.

use crate::surface::ast::*;
use crate::surface::SurfaceError;
use crate::Name;

pub const NEW_EFFECT: &str = "$New";
pub const NEW_OP: &str = "$new";
pub const STATE_EFFECT: &str = "$State";
pub const STATE_OP: &str = "$op";

/// Whether the program uses any dynamic-effect syntax.
pub fn uses_dynamic(p: &SurfaceProgram) -> bool {
    let mut found = false;
    p.body.walk(&mut |e| {
        found |= matches!(
            e.kind,
            ExprKind::WithNew(..) | ExprKind::NewRef(..) | ExprKind::Get(..) | ExprKind::Put(..)
        );
    });
    found
}

/// Expects an elaborated program; the result needs elaborating again.
pub fn expand_dynamic(p: &SurfaceProgram) -> Result<SurfaceProgram, SurfaceError> {
    if !uses_dynamic(p) {
        return Ok(p.clone());
    }
    let mut decls = vec![
        Decl::Effect(single_op_effect(NEW_EFFECT, NEW_OP)),
        Decl::Effect(single_op_effect(STATE_EFFECT, STATE_OP)),
    ];
    decls.extend(p.decls.iter().cloned());
    let body = Expander { depth: 0, next: 0 }.expr(&p.body)?;
    Ok(SurfaceProgram { decls, body })
}

fn single_op_effect(name: &str, op: &str) -> EffectDecl {
    EffectDecl {
        name: Name::new(name),
        params: vec![],
        ops: vec![OpDecl {
            name: Name::new(op),
            arg: Type::Dyn,
            res: Type::Dyn,
        }],
        span: Span::default(),
    }
}

fn state_ty() -> Type {
    Type::Effect(Name::new(STATE_EFFECT), vec![])
}

/// `ref[t]` becomes the type of a state instance.
fn erase_refs(t: &Type) -> Type {
    t.map(&|t| match t {
        Type::Ref(_) => Some(state_ty()),
        _ => None,
    })
}

// Small AST builders for the templates below.

fn syn(kind: ExprKind) -> Expr {
    Expr::synth(kind)
}

fn var(x: &str) -> Expr {
    Expr::var(x)
}

fn app(f: Expr, a: Expr) -> Expr {
    syn(ExprKind::App(f.boxed(), a.boxed()))
}

fn lam(x: &str, ty: Type, body: Expr) -> Expr {
    syn(ExprKind::Lam {
        param: Name::new(x),
        ty,
        body: body.boxed(),
    })
}

fn let_(x: &str, bound: Expr, body: Expr) -> Expr {
    syn(ExprKind::Let {
        binder: Name::new(x),
        bound: bound.boxed(),
        body: body.boxed(),
    })
}

fn cast(t: Type, e: Expr) -> Expr {
    syn(ExprKind::Cast(t, e.boxed()))
}

fn invoke(inst: &str, op: &str, arg: Expr) -> Expr {
    syn(ExprKind::Op {
        instance: var(inst).boxed(),
        op: Name::new(op),
        arg: arg.boxed(),
    })
}

#[allow(clippy::too_many_arguments)]
fn handler(
    val_binder: &str,
    val_ty: Type,
    val_body: Expr,
    inst: &str,
    op: &str,
    x: &str,
    k: &str,
    op_body: Expr,
) -> Expr {
    let clause = OpClause {
        instance: Name::new(inst),
        op: Name::new(op),
        arg: Name::new(x),
        k: Name::new(k),
        body: op_body,
        instance_ty: Inferred::none(),
        span: Span::default(),
    };
    let val = ValClause {
        binder: Name::new(val_binder),
        ty: Some(val_ty),
        body: val_body,
    };
    syn(ExprKind::Handler(Clauses {
        val: Some(Box::new(val)),
        ops: vec![clause],
    }))
}

fn with_handle(h: Expr, body: Expr) -> Expr {
    syn(ExprKind::WithHandle {
        handler: h.boxed(),
        body: body.boxed(),
    })
}

/// The state-passing handler for one cell, applied to the handled thunk `th`
/// and then to the initial state `s0`. Its type is `s -> dyn` before the
/// final application. `p` names the state instance.
pub fn state_handler_template(p: &str, th: &str, s0: Expr, s: &Type) -> Expr {
    let msg = Type::sum(Type::Unit, s.clone());
    let get = app(app(var("$k"), cast(Type::Dyn, var("$s"))), var("$s"));
    let put = app(
        app(var("$k"), cast(Type::Dyn, syn(ExprKind::Unit))),
        var("$s2"),
    );
    let dispatch = syn(ExprKind::Case {
        scrutinee: cast(msg, var("$x")).boxed(),
        left: Name::new("_"),
        left_body: get.boxed(),
        right: Name::new("$s2"),
        right_body: put.boxed(),
    });
    let h = handler(
        "$v",
        Type::Dyn,
        lam("$s", s.clone(), var("$v")),
        p,
        STATE_OP,
        "$x",
        "$k",
        lam("$s", s.clone(), dispatch),
    );
    app(with_handle(h, app(var(th), syn(ExprKind::Unit))), s0)
}

struct Expander {
    /// Number of enclosing `withnew` blocks.
    depth: usize,
    next: usize,
}

impl Expander {
    fn fresh(&mut self, hint: &str) -> String {
        self.next += 1;
        format!("${hint}{}", self.next)
    }

    fn annotation(t: &Option<Type>, span: Span) -> Result<Type, SurfaceError> {
        t.as_ref()
            .map(erase_refs)
            .ok_or_else(|| SurfaceError::expand(span, "missing type annotation; elaborate first"))
    }

    /// Bind `e` to a variable unless it already is one.
    fn named(&mut self, e: Expr, hint: &str, body: impl FnOnce(&str) -> Expr) -> Expr {
        if let ExprKind::Var(x) = &e.kind {
            let x = x.to_string();
            return body(&x);
        }
        let x = self.fresh(hint);
        let_(&x, e, body(&x))
    }

    fn expr(&mut self, e: &Expr) -> Result<Expr, SurfaceError> {
        let span = e.span;
        let out = match &e.kind {
            ExprKind::WithNew(t, body) => {
                let t = Expander::annotation(t, span)?;
                self.depth += 1;
                let body = self.expr(body);
                self.depth -= 1;
                let body = body?;
                let state_fn = Type::arrow(
                    state_ty(),
                    Type::arrow(Type::arrow(Type::Unit, Type::Dyn), Type::Dyn),
                );
                let resume = lam(
                    "$u",
                    Type::Unit,
                    app(var("$k"), cast(Type::Dyn, var("$np"))),
                );
                let install = app(app(cast(state_fn, var("$h")), var("$np")), resume);
                let h = handler(
                    "$v",
                    Type::Dyn,
                    var("$v"),
                    "$pnew",
                    NEW_OP,
                    "$h",
                    "$k",
                    let_(
                        "$np",
                        syn(ExprKind::New(Name::new(STATE_EFFECT), vec![])),
                        install,
                    ),
                );
                let inner = let_(
                    "$pnew",
                    syn(ExprKind::New(Name::new(NEW_EFFECT), vec![])),
                    with_handle(h, cast(Type::Dyn, body)),
                );
                cast(t, inner)
            }
            ExprKind::NewRef(t, s0) => {
                if self.depth == 0 {
                    return Err(SurfaceError::expand(
                        span,
                        "`newref` outside of a `withnew` block",
                    ));
                }
                let s = Expander::annotation(t, span)?;
                let s0 = self.expr(s0)?;
                let s0_name = self.fresh("s0");
                let cell = state_handler_template("$p", "$th", var(&s0_name), &s);
                let request = lam(
                    "$p",
                    state_ty(),
                    lam("$th", Type::arrow(Type::Unit, Type::Dyn), cell),
                );
                let_(
                    &s0_name,
                    s0,
                    cast(
                        state_ty(),
                        invoke("$pnew", NEW_OP, cast(Type::Dyn, request)),
                    ),
                )
            }
            ExprKind::Get(t, r, arg) => {
                let s = Expander::annotation(t, span)?;
                let r = self.expr(r)?;
                let arg = self.expr(arg)?;
                let msg = Type::sum(Type::Unit, s.clone());
                self.named(r, "r", |r| {
                    let request = cast(
                        Type::Dyn,
                        syn(ExprKind::Inl(msg, syn(ExprKind::Unit).boxed())),
                    );
                    let_("_", arg, cast(s, invoke(r, STATE_OP, request)))
                })
            }
            ExprKind::Put(t, r, v) => {
                let s = Expander::annotation(t, span)?;
                let r = self.expr(r)?;
                let v = self.expr(v)?;
                let msg = Type::sum(Type::Unit, s);
                let pv = self.fresh("pv");
                self.named(r, "r", |r| {
                    let request = cast(Type::Dyn, syn(ExprKind::Inr(msg, var(&pv).boxed())));
                    let_(
                        &pv,
                        v,
                        let_("_", invoke(r, STATE_OP, request), syn(ExprKind::Unit)),
                    )
                })
            }
            _ => {
                let mut out = e.clone();
                self.rebuild(&mut out)?;
                return Ok(out);
            }
        };
        Ok(Expr { span, ..out })
    }

    /// Expand inside the children of `e` and erase reference types in its annotations.
    fn rebuild(&mut self, e: &mut Expr) -> Result<(), SurfaceError> {
        let go = |d: &mut Self, x: &mut Box<Expr>| -> Result<(), SurfaceError> {
            **x = d.expr(x)?;
            Ok(())
        };
        match &mut e.kind {
            ExprKind::Lam { ty, body, .. } => {
                *ty = erase_refs(ty);
                go(self, body)
            }
            ExprKind::Inl(t, x)
            | ExprKind::Inr(t, x)
            | ExprKind::Absurd(t, x)
            | ExprKind::Cast(t, x) => {
                *t = erase_refs(t);
                go(self, x)
            }
            ExprKind::Fst(x) | ExprKind::Snd(x) | ExprKind::Print(x) => go(self, x),
            ExprKind::App(a, b)
            | ExprKind::Seq(a, b)
            | ExprKind::Pair(a, b)
            | ExprKind::Bin(_, a, b)
            | ExprKind::Let {
                bound: a, body: b, ..
            }
            | ExprKind::WithHandle {
                handler: a,
                body: b,
            } => {
                go(self, a)?;
                go(self, b)
            }
            ExprKind::Op { arg, .. } => go(self, arg),
            ExprKind::Case {
                scrutinee,
                left_body,
                right_body,
                ..
            } => {
                go(self, scrutinee)?;
                go(self, left_body)?;
                go(self, right_body)
            }
            ExprKind::If(a, b, c) => {
                go(self, a)?;
                go(self, b)?;
                go(self, c)
            }
            ExprKind::Handle { body, clauses } => {
                go(self, body)?;
                self.clauses(clauses)
            }
            ExprKind::Handler(clauses) => self.clauses(clauses),
            _ => Ok(()),
        }
    }

    fn clauses(&mut self, c: &mut Clauses) -> Result<(), SurfaceError> {
        if let Some(v) = &mut c.val {
            v.ty = v.ty.as_ref().map(erase_refs);
            v.body = self.expr(&v.body)?;
        }
        for op in &mut c.ops {
            op.body = self.expr(&op.body)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{front, run_source, Semantics};
    use crate::surface::Phase;
    use crate::{Observed, DEFAULT_FUEL};

    fn value_everywhere(src: &str) -> Observed {
        let mut seen = Vec::new();
        for sem in Semantics::ALL {
            let out = run_source(src, sem, DEFAULT_FUEL).unwrap();
            seen.push(
                out.value()
                    .cloned()
                    .unwrap_or_else(|| panic!("{sem}: {out:?}")),
            );
        }
        assert!(seen.windows(2).all(|w| w[0] == w[1]), "{seen:?}");
        seen.pop().unwrap()
    }

    #[test]
    fn get_reads_the_initial_state() {
        assert_eq!(
            value_everywhere("withnew { let a = newref 10 in let u = get a () in u }"),
            Observed::Int(10)
        );
    }

    #[test]
    fn put_then_get() {
        assert_eq!(
            value_everywhere("withnew { let a = newref 0 in put a 5; get a () }"),
            Observed::Int(5)
        );
    }

    #[test]
    fn cells_are_independent() {
        let one = "withnew { let a = newref 1 in let b = newref 2 in put a 10; put b 20; (get a (), get b ()) }";
        let two = "withnew { let a = newref 1 in let b = newref 2 in put b 20; put a 10; (get a (), get b ()) }";
        assert_eq!(value_everywhere(one), value_everywhere(two));
    }

    #[test]
    fn plain_programs_are_unchanged() {
        let p = front("let x = 1 in x + 2").unwrap();
        assert!(!uses_dynamic(&p));
        assert_eq!(expand_dynamic(&p).unwrap(), p);
    }

    #[test]
    fn newref_needs_withnew() {
        let p = front("let a = newref 1 in get a ()");
        let err = p.and_then(|p| expand_dynamic(&p)).unwrap_err();
        assert_eq!(err.phase, Phase::Expand);
    }

    #[test]
    fn each_newref_makes_one_instance() {
        let src = "withnew { let a = newref 1 in let b = newref 2 in get a () + get b () }";
        let c = crate::pipeline::compile(src).unwrap();
        let (out, s) = crate::eff_denot::run_eff_session(&c.core, DEFAULT_FUEL);
        assert_eq!(out.value(), Some(&Observed::Int(3)));
        // one instance for the withnew block, one per cell
        assert_eq!(s.stats.fresh_ids, vec![1, 2, 3]);
    }
}
