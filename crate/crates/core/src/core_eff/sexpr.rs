//! Text renderings: types in infix notation, terms as s-expressions.

use std::fmt;

use super::ast::{CoreComp, CoreType, CoreValue};
use crate::observe::write_quoted;

impl fmt::Display for CoreType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn inner(t: &CoreType, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                CoreType::Unit
                | CoreType::Int
                | CoreType::Str
                | CoreType::Empty
                | CoreType::Dyn => write!(f, "{t}"),
                _ => write!(f, "({t})"),
            }
        }
        let (a, op, b) = match self {
            CoreType::Unit => return f.write_str("unit"),
            CoreType::Int => return f.write_str("int"),
            CoreType::Str => return f.write_str("string"),
            CoreType::Empty => return f.write_str("empty"),
            CoreType::Dyn => return f.write_str("dyn"),
            CoreType::Arrow(a, b) => (a, "->", b),
            CoreType::Pair(a, b) => (a, "*", b),
            CoreType::Sum(a, b) => (a, "+", b),
            CoreType::Eff(a, b) => (a, "+->", b),
            CoreType::EffH(a, b) => (a, "=>", b),
        };
        inner(a, f)?;
        write!(f, " {op} ")?;
        inner(b, f)
    }
}

impl fmt::Display for CoreValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreValue::Var(x) => write!(f, "{x}"),
            CoreValue::Unit => f.write_str("()"),
            CoreValue::Int(n) => write!(f, "{n}"),
            CoreValue::Str(s) => write_quoted(f, s),
            CoreValue::Prim(p) => write!(f, "{p}"),
            CoreValue::Lam {
                param,
                param_ty,
                body,
            } => write!(f, "(fun ({param} {param_ty}) {body})"),
            CoreValue::Op(v) => write!(f, "(op {v})"),
            CoreValue::Handler(h) => write!(
                f,
                "(handler {} (val ({} {}) {}) (op ({} {}) {}))",
                h.instance, h.val_binder, h.val_ty, h.val_body, h.arg_binder, h.k_binder, h.op_body
            ),
            CoreValue::Pair(a, b) => write!(f, "(pair {a} {b})"),
            CoreValue::Inl(v, t) => write!(f, "(inl [{t}] {v})"),
            CoreValue::Inr(v, t) => write!(f, "(inr [{t}] {v})"),
        }
    }
}

impl fmt::Display for CoreComp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreComp::Val(v) => write!(f, "(val {v})"),
            CoreComp::Let {
                binder,
                bound,
                body,
            } => write!(f, "(let {binder} {bound} {body})"),
            CoreComp::App(a, b) => write!(f, "(app {a} {b})"),
            CoreComp::NewP(a, b) => write!(f, "(newp [{a}] [{b}])"),
            CoreComp::WithHandle(h, e) => write!(f, "(with {h} {e})"),
            CoreComp::Case {
                scrutinee,
                left,
                left_body,
                right,
                right_body,
            } => {
                write!(
                    f,
                    "(case {scrutinee} ({left} {left_body}) ({right} {right_body}))"
                )
            }
            CoreComp::Proj1(v) => write!(f, "(fst {v})"),
            CoreComp::Proj2(v) => write!(f, "(snd {v})"),
            CoreComp::Absurd(v, t) => write!(f, "(absurd [{t}] {v})"),
            CoreComp::Print(v) => write!(f, "(print {v})"),
            CoreComp::Cast(v, t) => write!(f, "(cast [{t}] {v})"),
        }
    }
}
