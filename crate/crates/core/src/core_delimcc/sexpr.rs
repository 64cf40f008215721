//! Text renderings: types in infix notation, terms as s-expressions.

use std::fmt;

use super::ast::{DComp, DType, DValue};
use crate::observe::write_quoted;

impl fmt::Display for DType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn inner(t: &DType, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                DType::Unit | DType::Int | DType::Str | DType::Empty | DType::Univ | DType::Dyn => {
                    write!(f, "{t}")
                }
                _ => write!(f, "({t})"),
            }
        }
        let (a, op, b) = match self {
            DType::Unit => return f.write_str("unit"),
            DType::Int => return f.write_str("int"),
            DType::Str => return f.write_str("string"),
            DType::Empty => return f.write_str("empty"),
            DType::Univ => return f.write_str("univ"),
            DType::Dyn => return f.write_str("dyn"),
            DType::Prompt(a) => {
                inner(a, f)?;
                return f.write_str(" prompt");
            }
            DType::Free(a, b) => {
                f.write_str("(")?;
                inner(a, f)?;
                f.write_str(", ")?;
                inner(b, f)?;
                return f.write_str(") free");
            }
            DType::Arrow(a, b) => (a, "->", b),
            DType::Pair(a, b) => (a, "*", b),
            DType::Sum(a, b) => (a, "+", b),
        };
        inner(a, f)?;
        write!(f, " {op} ")?;
        inner(b, f)
    }
}

impl fmt::Display for DValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DValue::Var(x) => write!(f, "{x}"),
            DValue::Unit => f.write_str("()"),
            DValue::Int(n) => write!(f, "{n}"),
            DValue::Str(s) => write_quoted(f, s),
            DValue::Prim(p) => write!(f, "{p}"),
            DValue::Lam {
                param,
                param_ty,
                body,
            } => write!(f, "(fun ({param} {param_ty}) {body})"),
            DValue::RecLam {
                self_name,
                param,
                param_ty,
                ret_ty,
                body,
            } => {
                write!(
                    f,
                    "(absrec {self_name} ({param} {param_ty}) [{ret_ty}] {body})"
                )
            }
            DValue::IUniv(v) => write!(f, "(i_univ {v})"),
            DValue::Ret(v, t) => write!(f, "(ret [{t}] {v})"),
            DValue::Act(a, k) => write!(f, "(act {a} {k})"),
            DValue::Pair(a, b) => write!(f, "(pair {a} {b})"),
            DValue::Inl(v, t) => write!(f, "(inl [{t}] {v})"),
            DValue::Inr(v, t) => write!(f, "(inr [{t}] {v})"),
        }
    }
}

impl fmt::Display for DComp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DComp::Vl(v) => write!(f, "(vl {v})"),
            DComp::Let {
                binder,
                bound,
                body,
            } => write!(f, "(let {binder} {bound} {body})"),
            DComp::App(a, b) => write!(f, "(app {a} {b})"),
            DComp::NewPr(t) => write!(f, "(newpr [{t}])"),
            DComp::PushPr(p, e) => write!(f, "(pushpr {p} {e})"),
            DComp::Sh0 {
                prompt,
                k,
                hole_ty,
                body,
            } => write!(f, "(sh0 {prompt} [{hole_ty}] ({k}) {body})"),
            DComp::WithFree {
                scrutinee,
                ret,
                ret_body,
                arg,
                k,
                act_body,
            } => {
                write!(
                    f,
                    "(with_free {scrutinee} ({ret} {ret_body}) ({arg} {k} {act_body}))"
                )
            }
            DComp::PUniv(v, t) => write!(f, "(p_univ [{t}] {v})"),
            DComp::Case {
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
            DComp::Proj1(v) => write!(f, "(fst {v})"),
            DComp::Proj2(v) => write!(f, "(snd {v})"),
            DComp::Absurd(v, t) => write!(f, "(absurd [{t}] {v})"),
            DComp::Print(v) => write!(f, "(print {v})"),
            DComp::Cast(v, t) => write!(f, "(cast [{t}] {v})"),
        }
    }
}
