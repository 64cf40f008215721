//! First-order typechecker for Core Eff.

use std::fmt;

use super::ast::{CoreComp, CoreType, CoreValue, Handler};
use crate::prim::{Prim, Shape};
use crate::Name;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("type error at {location}: expected {expected}, found {found}")]
pub struct TypeError {
    /// Path from the root of the term to the offending node.
    pub location: String,
    pub expected: String,
    pub found: String,
}

/// Typing context. Later bindings shadow earlier ones.
#[derive(Debug, Clone, Default)]
pub struct TypeCtx {
    entries: Vec<(Name, CoreType)>,
}

impl TypeCtx {
    pub fn new() -> TypeCtx {
        TypeCtx::default()
    }

    pub fn push(&mut self, name: Name, ty: CoreType) {
        self.entries.push((name, ty));
    }

    pub fn pop(&mut self) {
        self.entries.pop();
    }

    pub fn lookup(&self, name: &str) -> Option<&CoreType> {
        self.entries
            .iter()
            .rev()
            .find(|(n, _)| n.as_str() == name)
            .map(|(_, t)| t)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn prim_type(p: Prim) -> CoreType {
    fn shape(s: Shape) -> CoreType {
        match s {
            Shape::Unit => CoreType::Unit,
            Shape::Int => CoreType::Int,
            Shape::Str => CoreType::Str,
            Shape::Bool => CoreType::bool(),
            Shape::Empty => CoreType::Empty,
        }
    }
    let (args, res) = p.signature();
    args.iter()
        .rev()
        .fold(shape(res), |acc, a| CoreType::arrow(shape(*a), acc))
}

struct Checker<'c> {
    ctx: &'c mut TypeCtx,
    path: Vec<String>,
}

impl Checker<'_> {
    fn err(&self, expected: impl fmt::Display, found: impl fmt::Display) -> TypeError {
        let location = if self.path.is_empty() {
            "top".to_owned()
        } else {
            self.path.join(" / ")
        };
        TypeError {
            location,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    fn err_at(
        &self,
        step: &str,
        expected: impl fmt::Display,
        found: impl fmt::Display,
    ) -> TypeError {
        let mut e = self.err(expected, found);
        e.location = if self.path.is_empty() {
            step.to_owned()
        } else {
            format!("{} / {step}", e.location)
        };
        e
    }

    fn expect(&self, expected: &CoreType, found: &CoreType) -> Result<(), TypeError> {
        if expected == found {
            Ok(())
        } else {
            Err(self.err(expected, found))
        }
    }

    fn under<T>(
        &mut self,
        step: impl Into<String>,
        f: impl FnOnce(&mut Self) -> Result<T, TypeError>,
    ) -> Result<T, TypeError> {
        self.path.push(step.into());
        let r = f(self)?;
        self.path.pop();
        Ok(r)
    }

    fn bind<T>(
        &mut self,
        name: &Name,
        ty: CoreType,
        f: impl FnOnce(&mut Self) -> Result<T, TypeError>,
    ) -> Result<T, TypeError> {
        self.ctx.push(name.clone(), ty);
        let r = f(self);
        self.ctx.pop();
        r
    }

    fn value(&mut self, v: &CoreValue) -> Result<CoreType, TypeError> {
        match v {
            CoreValue::Var(x) => match self.ctx.lookup(x) {
                Some(t) => Ok(t.clone()),
                None => Err(self.err("a bound variable", format!("unbound `{x}`"))),
            },
            CoreValue::Unit => Ok(CoreType::Unit),
            CoreValue::Int(_) => Ok(CoreType::Int),
            CoreValue::Str(_) => Ok(CoreType::Str),
            CoreValue::Prim(p) => Ok(prim_type(*p)),
            CoreValue::Lam {
                param,
                param_ty,
                body,
            } => {
                let res = self.under(format!("fun {param}"), |c| {
                    c.bind(param, param_ty.clone(), |c| c.comp(body))
                })?;
                Ok(CoreType::arrow(param_ty.clone(), res))
            }
            CoreValue::Op(inst) => match self.under("op", |c| c.value(inst))? {
                CoreType::Eff(a, b) => Ok(CoreType::Arrow(a, b)),
                other => Err(self.err_at("op", "an effect instance", &other)),
            },
            CoreValue::Handler(h) => self.under("handler", |c| c.handler(h)),
            CoreValue::Pair(a, b) => {
                let ta = self.under("fst", |c| c.value(a))?;
                let tb = self.under("snd", |c| c.value(b))?;
                Ok(CoreType::pair(ta, tb))
            }
            CoreValue::Inl(v, ann) => self.injection(v, ann, true),
            CoreValue::Inr(v, ann) => self.injection(v, ann, false),
        }
    }

    fn injection(
        &mut self,
        v: &CoreValue,
        ann: &CoreType,
        left: bool,
    ) -> Result<CoreType, TypeError> {
        let CoreType::Sum(l, r) = ann else {
            return Err(self.err("a sum type annotation", ann));
        };
        let t = self.under(if left { "inl" } else { "inr" }, |c| c.value(v))?;
        self.expect(if left { l } else { r }, &t)?;
        Ok(ann.clone())
    }

    fn handler(&mut self, h: &Handler) -> Result<CoreType, TypeError> {
        let (a, b) = match self.under("instance", |c| c.value(&h.instance))? {
            CoreType::Eff(a, b) => (*a, *b),
            other => return Err(self.err("an effect instance", other)),
        };
        let w = self.under(format!("val {}", h.val_binder), |c| {
            c.bind(&h.val_binder, h.val_ty.clone(), |c| c.comp(&h.val_body))
        })?;
        let k_ty = CoreType::arrow(b, w.clone());
        let w2 = self.under(format!("op({}, {})", h.arg_binder, h.k_binder), |c| {
            c.bind(&h.arg_binder, a, |c| {
                c.bind(&h.k_binder, k_ty, |c| c.comp(&h.op_body))
            })
        })?;
        self.under("op clause result", |c| c.expect(&w, &w2))?;
        Ok(CoreType::effh(h.val_ty.clone(), w))
    }

    fn comp(&mut self, e: &CoreComp) -> Result<CoreType, TypeError> {
        match e {
            CoreComp::Val(v) => self.value(v),
            CoreComp::Let {
                binder,
                bound,
                body,
            } => {
                let t = self.under(format!("let {binder}"), |c| c.comp(bound))?;
                self.under(format!("in({binder})"), |c| {
                    c.bind(binder, t, |c| c.comp(body))
                })
            }
            CoreComp::App(f, a) => {
                let tf = self.under("fun", |c| c.value(f))?;
                let ta = self.under("arg", |c| c.value(a))?;
                match tf {
                    CoreType::Arrow(p, r) => {
                        self.under("arg", |c| c.expect(&p, &ta))?;
                        Ok(*r)
                    }
                    other => Err(self.err_at("fun", "a function", &other)),
                }
            }
            CoreComp::NewP(a, b) => Ok(CoreType::eff(a.clone(), b.clone())),
            CoreComp::WithHandle(h, body) => {
                let th = self.under("with", |c| c.value(h))?;
                let CoreType::EffH(c_ty, w) = th else {
                    return Err(self.err_at("with", "a handler", &th));
                };
                let tb = self.under("handle", |c| c.comp(body))?;
                self.under("handle", |c| c.expect(&c_ty, &tb))?;
                Ok(*w)
            }
            CoreComp::Case {
                scrutinee,
                left,
                left_body,
                right,
                right_body,
            } => {
                let ts = self.under("case", |c| c.value(scrutinee))?;
                let CoreType::Sum(l, r) = ts else {
                    return Err(self.err_at("case", "a sum", &ts));
                };
                let tl = self.under(format!("inl {left}"), |c| {
                    c.bind(left, *l, |c| c.comp(left_body))
                })?;
                let tr = self.under(format!("inr {right}"), |c| {
                    c.bind(right, *r, |c| c.comp(right_body))
                })?;
                self.under(format!("inr {right}"), |c| c.expect(&tl, &tr))?;
                Ok(tl)
            }
            CoreComp::Proj1(v) | CoreComp::Proj2(v) => {
                let first = matches!(e, CoreComp::Proj1(_));
                let tv = self.under(if first { "fst" } else { "snd" }, |c| c.value(v))?;
                match tv {
                    CoreType::Pair(a, b) => Ok(if first { *a } else { *b }),
                    other => Err(self.err("a pair", other)),
                }
            }
            CoreComp::Absurd(v, t) => {
                let tv = self.under("absurd", |c| c.value(v))?;
                self.under("absurd", |c| c.expect(&CoreType::Empty, &tv))?;
                Ok(t.clone())
            }
            CoreComp::Print(v) => {
                let tv = self.under("print", |c| c.value(v))?;
                self.under("print", |c| c.expect(&CoreType::Str, &tv))?;
                Ok(CoreType::Unit)
            }
            CoreComp::Cast(v, t) => {
                let tv = self.under("cast", |c| c.value(v))?;
                if tv == *t || *t == CoreType::Dyn || tv == CoreType::Dyn {
                    Ok(t.clone())
                } else {
                    Err(self.err(format!("a value castable to {t}"), tv))
                }
            }
        }
    }
}

pub fn infer_value(ctx: &mut TypeCtx, v: &CoreValue) -> Result<CoreType, TypeError> {
    Checker {
        ctx,
        path: Vec::new(),
    }
    .value(v)
}

pub fn infer_comp(ctx: &mut TypeCtx, e: &CoreComp) -> Result<CoreType, TypeError> {
    Checker {
        ctx,
        path: Vec::new(),
    }
    .comp(e)
}

/// Applications of values to values only. The AST admits nothing else in
/// application position, so this holds for every term; it walks the term so
/// that the claim is checked rather than assumed.
pub fn is_core_anf(e: &CoreComp) -> bool {
    fn value(v: &CoreValue) -> bool {
        match v {
            CoreValue::Lam { body, .. } => is_core_anf(body),
            CoreValue::Handler(h) => {
                value(&h.instance) && is_core_anf(&h.val_body) && is_core_anf(&h.op_body)
            }
            CoreValue::Op(v) | CoreValue::Inl(v, _) | CoreValue::Inr(v, _) => value(v),
            CoreValue::Pair(a, b) => value(a) && value(b),
            _ => true,
        }
    }
    match e {
        CoreComp::Let { bound, body, .. } => is_core_anf(bound) && is_core_anf(body),
        CoreComp::App(f, a) => value(f) && value(a),
        CoreComp::WithHandle(h, b) => value(h) && is_core_anf(b),
        CoreComp::Case {
            scrutinee,
            left_body,
            right_body,
            ..
        } => value(scrutinee) && is_core_anf(left_body) && is_core_anf(right_body),
        CoreComp::Val(v)
        | CoreComp::Proj1(v)
        | CoreComp::Proj2(v)
        | CoreComp::Absurd(v, _)
        | CoreComp::Print(v)
        | CoreComp::Cast(v, _) => value(v),
        CoreComp::NewP(..) => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::compile;

    const READER: &str = "effect reader { op : int -> int }
        let p = new reader in
        let h = handler {
          | val (v : int) -> fun (s : int) -> v
          | p#op(x, k) -> fun (s : int) -> let z = s + x in k z s
        } in
        (with h handle let x = p#op 1 in let y = p#op x in y) 10";

    fn int_eff() -> CoreType {
        CoreType::eff(CoreType::Int, CoreType::Int)
    }

    fn find_let<'e>(e: &'e CoreComp, name: &str) -> Option<&'e CoreComp> {
        match e {
            CoreComp::Let {
                binder,
                bound,
                body,
            } => {
                if binder.as_str() == name {
                    Some(bound)
                } else {
                    find_let(bound, name).or_else(|| find_let(body, name))
                }
            }
            _ => None,
        }
    }

    #[test]
    fn literals() {
        let mut ctx = TypeCtx::new();
        assert_eq!(infer_value(&mut ctx, &CoreValue::Int(1)), Ok(CoreType::Int));
        assert_eq!(
            infer_comp(&mut ctx, &CoreComp::Val(CoreValue::Unit)),
            Ok(CoreType::Unit)
        );
    }

    #[test]
    fn operation_is_a_function() {
        let mut ctx = TypeCtx::new();
        ctx.push("x".into(), int_eff());
        let t = infer_value(&mut ctx, &CoreValue::op(CoreValue::var("x")));
        assert_eq!(t, Ok(CoreType::arrow(CoreType::Int, CoreType::Int)));
    }

    #[test]
    fn newp_has_its_annotation() {
        let t = infer_comp(
            &mut TypeCtx::new(),
            &CoreComp::NewP(CoreType::Str, CoreType::Unit),
        );
        assert_eq!(t, Ok(CoreType::eff(CoreType::Str, CoreType::Unit)));
    }

    #[test]
    fn reader_handler_and_answer() {
        let c = compile(READER).unwrap();
        assert_eq!(c.ty, CoreType::Int);
        let h = find_let(&c.core.body, "h").expect("handler binding");
        let mut ctx = TypeCtx::new();
        ctx.push("p".into(), int_eff());
        let t = infer_comp(&mut ctx, h).unwrap();
        assert_eq!(
            t,
            CoreType::effh(CoreType::Int, CoreType::arrow(CoreType::Int, CoreType::Int))
        );
    }

    #[test]
    fn handled_type_must_match() {
        let h = CoreValue::Handler(Box::new(Handler {
            instance: CoreValue::var("p"),
            val_binder: "x".into(),
            val_ty: CoreType::Unit,
            val_body: CoreComp::Val(CoreValue::Unit),
            arg_binder: "a".into(),
            k_binder: "k".into(),
            op_body: CoreComp::App(CoreValue::var("k"), CoreValue::var("a")),
        }));
        let mut ctx = TypeCtx::new();
        ctx.push("p".into(), CoreType::eff(CoreType::Unit, CoreType::Unit));
        assert_eq!(
            infer_value(&mut ctx, &h),
            Ok(CoreType::effh(CoreType::Unit, CoreType::Unit))
        );
        let bad = CoreComp::with_handle(h, CoreComp::Val(CoreValue::Int(3)));
        let err = infer_comp(&mut ctx, &bad).unwrap_err();
        assert_eq!(err.expected, "unit");
        assert_eq!(err.found, "int");
    }

    #[test]
    fn casts_through_dyn() {
        let mut ctx = TypeCtx::new();
        let up = CoreComp::Cast(CoreValue::Int(4), CoreType::Dyn);
        assert_eq!(infer_comp(&mut ctx, &up), Ok(CoreType::Dyn));
        ctx.push("d".into(), CoreType::Dyn);
        let down = CoreComp::Cast(CoreValue::var("d"), CoreType::Str);
        assert_eq!(infer_comp(&mut ctx, &down), Ok(CoreType::Str));
    }

    #[test]
    fn weakening() {
        let e = CoreComp::App(CoreValue::op(CoreValue::var("x")), CoreValue::Int(2));
        let mut ctx = TypeCtx::new();
        ctx.push("x".into(), int_eff());
        let before = infer_comp(&mut ctx, &e);
        ctx.push("unused".into(), CoreType::Str);
        assert_eq!(infer_comp(&mut ctx, &e), before);
    }

    #[test]
    fn unbound_variable_is_reported() {
        assert!(infer_value(&mut TypeCtx::new(), &CoreValue::var("nope")).is_err());
    }
}
