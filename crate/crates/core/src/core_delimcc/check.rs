//! First-order typechecker for Core delimcc.

use std::fmt;

use super::ast::{DComp, DType, DValue};
use crate::core_eff::TypeError;
use crate::prim::{Prim, Shape};
use crate::Name;

#[derive(Debug, Clone, Default)]
pub struct DTypeCtx {
    entries: Vec<(Name, DType)>,
}

impl DTypeCtx {
    pub fn new() -> DTypeCtx {
        DTypeCtx::default()
    }

    pub fn push(&mut self, name: Name, ty: DType) {
        self.entries.push((name, ty));
    }

    pub fn pop(&mut self) {
        self.entries.pop();
    }

    pub fn lookup(&self, name: &str) -> Option<&DType> {
        self.entries
            .iter()
            .rev()
            .find(|(n, _)| n.as_str() == name)
            .map(|(_, t)| t)
    }
}

pub fn prim_dtype(p: Prim) -> DType {
    fn shape(s: Shape) -> DType {
        match s {
            Shape::Unit => DType::Unit,
            Shape::Int => DType::Int,
            Shape::Str => DType::Str,
            Shape::Bool => DType::sum(DType::Unit, DType::Unit),
            Shape::Empty => DType::Empty,
        }
    }
    let (args, res) = p.signature();
    args.iter()
        .rev()
        .fold(shape(res), |acc, a| DType::arrow(shape(*a), acc))
}

struct Checker<'c> {
    ctx: &'c mut DTypeCtx,
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

    fn expect(&self, expected: &DType, found: &DType) -> Result<(), TypeError> {
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
        ty: DType,
        f: impl FnOnce(&mut Self) -> Result<T, TypeError>,
    ) -> Result<T, TypeError> {
        self.ctx.push(name.clone(), ty);
        let r = f(self);
        self.ctx.pop();
        r
    }

    fn value(&mut self, v: &DValue) -> Result<DType, TypeError> {
        match v {
            DValue::Var(x) => match self.ctx.lookup(x) {
                Some(t) => Ok(t.clone()),
                None => Err(self.err("a bound variable", format!("unbound `{x}`"))),
            },
            DValue::Unit => Ok(DType::Unit),
            DValue::Int(_) => Ok(DType::Int),
            DValue::Str(_) => Ok(DType::Str),
            DValue::Prim(p) => Ok(prim_dtype(*p)),
            DValue::Lam {
                param,
                param_ty,
                body,
            } => {
                let res = self.under(format!("fun {param}"), |c| {
                    c.bind(param, param_ty.clone(), |c| c.comp(body))
                })?;
                Ok(DType::arrow(param_ty.clone(), res))
            }
            DValue::RecLam {
                self_name,
                param,
                param_ty,
                ret_ty,
                body,
            } => {
                let fn_ty = DType::arrow(param_ty.clone(), ret_ty.clone());
                let res = self.under(format!("absrec {self_name}"), |c| {
                    c.bind(self_name, fn_ty.clone(), |c| {
                        c.bind(param, param_ty.clone(), |c| c.comp(body))
                    })
                })?;
                self.under(format!("absrec {self_name}"), |c| c.expect(ret_ty, &res))?;
                Ok(fn_ty)
            }
            DValue::IUniv(v) => {
                self.under("i_univ", |c| c.value(v))?;
                Ok(DType::Univ)
            }
            DValue::Ret(v, ann) => {
                let t = self.under("ret", |c| c.value(v))?;
                self.under("ret", |c| c.expect(&DType::Univ, &t))?;
                match ann {
                    DType::Free(..) => Ok(ann.clone()),
                    other => Err(self.err("a free type annotation", other)),
                }
            }
            DValue::Act(a, k) => {
                let ta = self.under("act", |c| c.value(a))?;
                let tk = self.under("act k", |c| c.value(k))?;
                let DType::Arrow(b, res) = &tk else {
                    return Err(self.err("a continuation", &tk));
                };
                let free = DType::free(ta, (**b).clone());
                self.under("act k", |c| c.expect(&free, res))?;
                Ok(free)
            }
            DValue::Pair(a, b) => {
                let ta = self.under("fst", |c| c.value(a))?;
                let tb = self.under("snd", |c| c.value(b))?;
                Ok(DType::pair(ta, tb))
            }
            DValue::Inl(v, ann) => self.injection(v, ann, true),
            DValue::Inr(v, ann) => self.injection(v, ann, false),
        }
    }

    fn injection(&mut self, v: &DValue, ann: &DType, left: bool) -> Result<DType, TypeError> {
        let DType::Sum(l, r) = ann else {
            return Err(self.err("a sum type annotation", ann));
        };
        let t = self.under(if left { "inl" } else { "inr" }, |c| c.value(v))?;
        self.expect(if left { l } else { r }, &t)?;
        Ok(ann.clone())
    }

    fn prompt(&mut self, p: &DValue) -> Result<DType, TypeError> {
        match self.under("prompt", |c| c.value(p))? {
            DType::Prompt(a) => Ok(*a),
            other => Err(self.err("a prompt", other)),
        }
    }

    fn comp(&mut self, e: &DComp) -> Result<DType, TypeError> {
        match e {
            DComp::Vl(v) => self.value(v),
            DComp::Let {
                binder,
                bound,
                body,
            } => {
                let t = self.under(format!("let {binder}"), |c| c.comp(bound))?;
                self.under(format!("in({binder})"), |c| {
                    c.bind(binder, t, |c| c.comp(body))
                })
            }
            DComp::App(f, a) => {
                let tf = self.under("fun", |c| c.value(f))?;
                let ta = self.under("arg", |c| c.value(a))?;
                match tf {
                    DType::Arrow(p, r) => {
                        self.under("arg", |c| c.expect(&p, &ta))?;
                        Ok(*r)
                    }
                    other => Err(self.err("a function", other)),
                }
            }
            DComp::NewPr(t) => Ok(DType::prompt(t.clone())),
            DComp::PushPr(p, body) => {
                let a = self.prompt(p)?;
                let tb = self.under("pushpr", |c| c.comp(body))?;
                self.under("pushpr", |c| c.expect(&a, &tb))?;
                Ok(a)
            }
            DComp::Sh0 {
                prompt,
                k,
                hole_ty,
                body,
            } => {
                let a = self.prompt(prompt)?;
                let k_ty = DType::arrow(hole_ty.clone(), a.clone());
                let tb = self.under(format!("sh0 {k}"), |c| c.bind(k, k_ty, |c| c.comp(body)))?;
                self.under(format!("sh0 {k}"), |c| c.expect(&a, &tb))?;
                Ok(hole_ty.clone())
            }
            DComp::WithFree {
                scrutinee,
                ret,
                ret_body,
                arg,
                k,
                act_body,
            } => {
                let tf = self.under("with_free", |c| c.value(scrutinee))?;
                let DType::Free(a, b) = &tf else {
                    return Err(self.err("a free structure", &tf));
                };
                let k_ty = DType::arrow((**b).clone(), tf.clone());
                let w = self.under(format!("ret {ret}"), |c| {
                    c.bind(ret, DType::Univ, |c| c.comp(ret_body))
                })?;
                let w2 = self.under(format!("act({arg}, {k})"), |c| {
                    c.bind(arg, (**a).clone(), |c| {
                        c.bind(k, k_ty, |c| c.comp(act_body))
                    })
                })?;
                self.under(format!("act({arg}, {k})"), |c| c.expect(&w, &w2))?;
                Ok(w)
            }
            DComp::PUniv(v, t) => {
                let tv = self.under("p_univ", |c| c.value(v))?;
                self.under("p_univ", |c| c.expect(&DType::Univ, &tv))?;
                Ok(t.clone())
            }
            DComp::Case {
                scrutinee,
                left,
                left_body,
                right,
                right_body,
            } => {
                let ts = self.under("case", |c| c.value(scrutinee))?;
                let DType::Sum(l, r) = ts else {
                    return Err(self.err("a sum", &ts));
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
            DComp::Proj1(v) | DComp::Proj2(v) => {
                let first = matches!(e, DComp::Proj1(_));
                match self.under(if first { "fst" } else { "snd" }, |c| c.value(v))? {
                    DType::Pair(a, b) => Ok(if first { *a } else { *b }),
                    other => Err(self.err("a pair", other)),
                }
            }
            DComp::Absurd(v, t) => {
                let tv = self.under("absurd", |c| c.value(v))?;
                self.under("absurd", |c| c.expect(&DType::Empty, &tv))?;
                Ok(t.clone())
            }
            DComp::Print(v) => {
                let tv = self.under("print", |c| c.value(v))?;
                self.under("print", |c| c.expect(&DType::Str, &tv))?;
                Ok(DType::Unit)
            }
            DComp::Cast(v, t) => {
                let tv = self.under("cast", |c| c.value(v))?;
                if tv == *t || *t == DType::Dyn || tv == DType::Dyn {
                    Ok(t.clone())
                } else {
                    Err(self.err(format!("a value castable to {t}"), tv))
                }
            }
        }
    }
}

pub fn check_delimcc(ctx: &mut DTypeCtx, e: &DComp) -> Result<DType, TypeError> {
    Checker {
        ctx,
        path: Vec::new(),
    }
    .comp(e)
}

pub fn check_value(ctx: &mut DTypeCtx, v: &DValue) -> Result<DType, TypeError> {
    Checker {
        ctx,
        path: Vec::new(),
    }
    .value(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_delimcc::fixtures::exd;

    #[test]
    fn values() {
        let mut ctx = DTypeCtx::new();
        assert_eq!(
            check_delimcc(&mut ctx, &DComp::Vl(DValue::Unit)),
            Ok(DType::Unit)
        );
        assert_eq!(
            check_value(&mut ctx, &DValue::IUniv(Box::new(DValue::Int(1)))),
            Ok(DType::Univ)
        );
    }

    #[test]
    fn pushpr_has_the_prompt_answer_type() {
        let mut ctx = DTypeCtx::new();
        ctx.push("p".into(), DType::prompt(DType::Int));
        let e = DComp::pushpr(DValue::var("p"), DComp::Vl(DValue::Int(3)));
        assert_eq!(check_delimcc(&mut ctx, &e), Ok(DType::Int));
        let bad = DComp::pushpr(DValue::var("p"), DComp::Vl(DValue::Unit));
        assert!(check_delimcc(&mut ctx, &bad).is_err());
    }

    #[test]
    fn sh0_has_its_hole_type() {
        let mut ctx = DTypeCtx::new();
        ctx.push("p".into(), DType::prompt(DType::Int));
        let e = DComp::sh0(DValue::var("p"), "k", DType::Str, DComp::Vl(DValue::Int(0)));
        assert_eq!(check_delimcc(&mut ctx, &e), Ok(DType::Str));
        let k_ty = DComp::sh0(
            DValue::var("p"),
            "k",
            DType::Str,
            DComp::App(DValue::var("k"), DValue::Str("s".into())),
        );
        assert_eq!(check_delimcc(&mut ctx, &k_ty), Ok(DType::Str));
    }

    #[test]
    fn puniv_is_a_checked_retraction() {
        let mut ctx = DTypeCtx::new();
        ctx.push("u".into(), DType::Univ);
        let e = DComp::PUniv(DValue::var("u"), DType::Int);
        assert_eq!(check_delimcc(&mut ctx, &e), Ok(DType::Int));
        let not_univ = DComp::PUniv(DValue::Int(1), DType::Int);
        assert!(check_delimcc(&mut ctx, &not_univ).is_err());
    }

    #[test]
    fn exd_is_an_int() {
        assert_eq!(
            check_delimcc(&mut DTypeCtx::new(), &exd().body),
            Ok(DType::Int)
        );
    }
}
