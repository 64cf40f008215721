//! Pretty printer producing source that parses back to the same program.

use std::fmt::Write;

use super::ast::*;
use crate::observe::write_quoted;

// Expression precedence, loosest first.
const TOP: u8 = 0;
const OR: u8 = 1;
const AND: u8 = 2;
const CMP: u8 = 3;
const ADD: u8 = 4;
const MUL: u8 = 5;
const APP: u8 = 6;
const ATOM: u8 = 7;

pub fn pretty(p: &SurfaceProgram) -> String {
    let mut out = String::new();
    for decl in &p.decls {
        match decl {
            Decl::Effect(e) => {
                out.push_str("effect ");
                out.push_str(&e.name);
                if !e.params.is_empty() {
                    let params: Vec<String> = e.params.iter().map(|p| format!("'{p}")).collect();
                    write!(out, "[{}]", params.join(", ")).unwrap();
                }
                out.push_str(" {\n");
                for op in &e.ops {
                    writeln!(
                        out,
                        "  {} : {} -> {},",
                        op.name,
                        ty_at(&op.arg, 1),
                        ty_at(&op.res, 0)
                    )
                    .unwrap();
                }
                out.push_str("}\n");
            }
            Decl::Instance(i) => {
                writeln!(
                    out,
                    "instance {} : {}",
                    i.name,
                    pretty_type(&Type::Effect(i.effect.clone(), i.args.clone()))
                )
                .unwrap();
            }
        }
    }
    if !p.decls.is_empty() {
        out.push('\n');
    }
    if p.body.is_value() {
        out.push_str("val ");
        expr(&mut out, &p.body, APP, 0);
    } else {
        expr(&mut out, &p.body, TOP, 0);
    }
    out.push('\n');
    out
}

pub fn pretty_expr(e: &Expr) -> String {
    let mut out = String::new();
    expr(&mut out, e, TOP, 0);
    out
}

pub fn pretty_type(t: &Type) -> String {
    ty_at(t, 0)
}

fn ty_at(t: &Type, level: u8) -> String {
    let (own, text) = match t {
        Type::Unit => (3, "unit".to_string()),
        Type::Int => (3, "int".to_string()),
        Type::Str => (3, "string".to_string()),
        Type::Empty => (3, "empty".to_string()),
        Type::Bool => (3, "bool".to_string()),
        Type::Dyn => (3, "dyn".to_string()),
        Type::Param(v) => (3, format!("'{v}")),
        Type::Ref(a) => (3, format!("ref[{}]", ty_at(a, 0))),
        Type::Effect(e, args) if args.is_empty() => (3, e.to_string()),
        Type::Effect(e, args) => {
            let args: Vec<String> = args.iter().map(|a| ty_at(a, 0)).collect();
            (3, format!("{e}[{}]", args.join(", ")))
        }
        Type::Arrow(a, b) => (0, format!("{} -> {}", ty_at(a, 1), ty_at(b, 0))),
        Type::Handler(a, b) => (0, format!("{} => {}", ty_at(a, 1), ty_at(b, 0))),
        Type::Sum(a, b) => (1, format!("{} + {}", ty_at(a, 2), ty_at(b, 1))),
        Type::Pair(a, b) => (2, format!("{} * {}", ty_at(a, 2), ty_at(b, 3))),
    };
    if own < level {
        format!("({text})")
    } else {
        text
    }
}

fn precedence(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Lam { .. }
        | ExprKind::Let { .. }
        | ExprKind::WithHandle { .. }
        | ExprKind::If(..)
        | ExprKind::Seq(..) => TOP,
        ExprKind::Bin(op, ..) => match op {
            BinOp::Or => OR,
            BinOp::And => AND,
            BinOp::Eq | BinOp::Lt => CMP,
            BinOp::Add | BinOp::Sub | BinOp::Concat => ADD,
            BinOp::Mul => MUL,
        },
        ExprKind::App(..)
        | ExprKind::Fst(_)
        | ExprKind::Snd(_)
        | ExprKind::Inl(..)
        | ExprKind::Inr(..)
        | ExprKind::Absurd(..)
        | ExprKind::Cast(..)
        | ExprKind::Print(_)
        | ExprKind::NewRef(..)
        | ExprKind::Get(..)
        | ExprKind::Put(..)
        | ExprKind::New(..)
        | ExprKind::Handle { .. } => APP,
        _ => ATOM,
    }
}

fn newline(out: &mut String, indent: usize) {
    out.push('\n');
    out.extend(std::iter::repeat_n(' ', indent));
}

fn expr(out: &mut String, e: &Expr, level: u8, indent: usize) {
    // long forms extend to the right, so they only appear bare at the top level
    if precedence(e) < level || (precedence(e) == TOP && level > TOP) {
        out.push('(');
        expr(out, e, TOP, indent);
        out.push(')');
        return;
    }
    match &e.kind {
        ExprKind::Var(x) => out.push_str(x),
        ExprKind::Unit => out.push_str("()"),
        ExprKind::Int(n) if *n < 0 => write!(out, "(-{})", n.unsigned_abs()).unwrap(),
        ExprKind::Int(n) => write!(out, "{n}").unwrap(),
        ExprKind::Str(s) => write_quoted(out, s).unwrap(),
        ExprKind::Bool(b) => write!(out, "{b}").unwrap(),
        ExprKind::Lam { param, ty, body } => {
            write!(out, "fun ({param} : {}) -> ", pretty_type(ty)).unwrap();
            expr(out, body, TOP, indent);
        }
        ExprKind::App(f, a) => {
            let f_level = if matches!(f.kind, ExprKind::App(..)) {
                APP
            } else {
                ATOM
            };
            expr(out, f, f_level, indent);
            out.push(' ');
            expr(out, a, ATOM, indent);
        }
        ExprKind::Let {
            binder,
            bound,
            body,
        } => {
            write!(out, "let {binder} = ").unwrap();
            expr(out, bound, TOP, indent + 2);
            out.push_str(" in");
            newline(out, indent);
            expr(out, body, TOP, indent);
        }
        ExprKind::Seq(a, b) => {
            expr(out, a, OR, indent);
            out.push(';');
            newline(out, indent);
            expr(out, b, TOP, indent);
        }
        ExprKind::Pair(a, b) => {
            out.push('(');
            expr(out, a, TOP, indent);
            out.push_str(", ");
            expr(out, b, TOP, indent);
            out.push(')');
        }
        ExprKind::Fst(x) => prefix(out, "fst", None, x, indent),
        ExprKind::Snd(x) => prefix(out, "snd", None, x, indent),
        ExprKind::Print(x) => prefix(out, "print", None, x, indent),
        ExprKind::Inl(t, x) => prefix(out, "inl", Some(t), x, indent),
        ExprKind::Inr(t, x) => prefix(out, "inr", Some(t), x, indent),
        ExprKind::Absurd(t, x) => prefix(out, "absurd", Some(t), x, indent),
        ExprKind::Cast(t, x) => prefix(out, "cast", Some(t), x, indent),
        ExprKind::NewRef(t, x) => prefix(out, "newref", t.as_ref(), x, indent),
        ExprKind::Get(t, r, a) | ExprKind::Put(t, r, a) => {
            out.push_str(if matches!(e.kind, ExprKind::Get(..)) {
                "get"
            } else {
                "put"
            });
            if let Some(t) = t {
                write!(out, "[{}]", pretty_type(t)).unwrap();
            }
            out.push(' ');
            expr(out, r, ATOM, indent);
            out.push(' ');
            expr(out, a, ATOM, indent);
        }
        ExprKind::Case {
            scrutinee,
            left,
            left_body,
            right,
            right_body,
        } => {
            out.push_str("case ");
            expr(out, scrutinee, TOP, indent);
            out.push_str(" of {");
            newline(out, indent + 2);
            write!(out, "inl {left} -> ").unwrap();
            expr(out, left_body, TOP, indent + 4);
            newline(out, indent);
            write!(out, "| inr {right} -> ").unwrap();
            expr(out, right_body, TOP, indent + 4);
            newline(out, indent);
            out.push('}');
        }
        ExprKind::If(c, t, f) => {
            out.push_str("if ");
            expr(out, c, TOP, indent);
            out.push_str(" then ");
            expr(out, t, TOP, indent + 2);
            out.push_str(" else ");
            expr(out, f, TOP, indent);
        }
        ExprKind::Bin(op, a, b) => {
            let own = precedence(e);
            let (l, r) = match op {
                BinOp::Or | BinOp::And => (own + 1, own),
                BinOp::Eq | BinOp::Lt => (own + 1, own + 1),
                _ => (own, own + 1),
            };
            expr(out, a, l, indent);
            write!(out, " {} ", op.symbol()).unwrap();
            expr(out, b, r, indent);
        }
        ExprKind::New(eff, args) => {
            write!(
                out,
                "new {}",
                pretty_type(&Type::Effect(eff.clone(), args.clone()))
            )
            .unwrap();
        }
        ExprKind::Op { instance, op, arg } => {
            match &instance.kind {
                ExprKind::Var(x) => out.push_str(x),
                _ => panic!("operation invoked on a non-variable instance"),
            }
            write!(out, "#{op} ").unwrap();
            expr(out, arg, ATOM, indent);
        }
        ExprKind::Handle { body, clauses: c } => {
            out.push_str("handle ");
            expr(out, body, TOP, indent + 2);
            out.push_str(" with ");
            clauses(out, c, indent);
        }
        ExprKind::WithHandle { handler, body } => {
            out.push_str("with ");
            expr(out, handler, TOP, indent + 2);
            out.push_str(" handle ");
            expr(out, body, TOP, indent);
        }
        ExprKind::Handler(c) => {
            out.push_str("handler ");
            clauses(out, c, indent);
        }
        ExprKind::WithNew(t, x) => {
            out.push_str("withnew");
            if let Some(t) = t {
                write!(out, "[{}]", pretty_type(t)).unwrap();
            }
            out.push_str(" {");
            newline(out, indent + 2);
            expr(out, x, TOP, indent + 2);
            newline(out, indent);
            out.push('}');
        }
    }
}

fn prefix(out: &mut String, kw: &str, ty: Option<&Type>, operand: &Expr, indent: usize) {
    out.push_str(kw);
    if let Some(t) = ty {
        write!(out, "[{}]", pretty_type(t)).unwrap();
    }
    out.push(' ');
    expr(out, operand, APP, indent);
}

fn clauses(out: &mut String, c: &Clauses, indent: usize) {
    out.push('{');
    let mut first = true;
    let mut sep = |out: &mut String| {
        newline(out, indent + 2);
        if !first {
            out.push_str("| ");
        }
        first = false;
    };
    if let Some(v) = &c.val {
        sep(out);
        match &v.ty {
            Some(Type::Unit) if v.binder.as_str() == "_" => out.push_str("val () -> "),
            Some(t) => write!(out, "val ({} : {}) -> ", v.binder, pretty_type(t)).unwrap(),
            None => write!(out, "val {} -> ", v.binder).unwrap(),
        }
        expr(out, &v.body, TOP, indent + 4);
    }
    for op in &c.ops {
        sep(out);
        write!(out, "{}#{}({}, {}) -> ", op.instance, op.op, op.arg, op.k).unwrap();
        expr(out, &op.body, TOP, indent + 4);
    }
    newline(out, indent);
    out.push('}');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse;

    const TEST2: &str = include_str!("../../../harness/tests/corpus/test2.effs");

    fn op_names(c: &Clauses) -> Vec<String> {
        c.ops
            .iter()
            .map(|o| format!("{}#{}", o.instance, o.op))
            .collect()
    }

    fn handles(p: &SurfaceProgram) -> Vec<Vec<String>> {
        let mut out = Vec::new();
        p.body.walk(&mut |e| {
            if let ExprKind::Handle { clauses, .. } = &e.kind {
                out.push(op_names(clauses));
            }
        });
        out
    }

    #[test]
    fn literal_program() {
        assert_eq!(pretty(&parse("val 1").unwrap()), "val 1\n");
    }

    #[test]
    fn test2_reaches_a_fixpoint() {
        let p = parse(TEST2).unwrap();
        let once = pretty(&p);
        let q = parse(&once).unwrap();
        assert_eq!(q, p);
        assert_eq!(pretty(&q), once);
    }

    #[test]
    fn clause_order_is_kept() {
        let p = parse(TEST2).unwrap();
        let q = parse(&pretty(&p)).unwrap();
        assert!(!handles(&p).is_empty());
        assert_eq!(handles(&q), handles(&p));
    }

    #[test]
    fn negative_numbers_and_strings() {
        let p = parse("val ((-3), \"a\\\"b\")").unwrap();
        let text = pretty(&p);
        assert_eq!(parse(&text).unwrap(), p);
    }

    #[test]
    fn long_forms_are_parenthesized_in_operands() {
        let p = parse("1 + (let x = 2 in x)").unwrap();
        assert_eq!(parse(&pretty(&p)).unwrap(), p);
    }
}
