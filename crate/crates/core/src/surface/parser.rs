//! Recursive-descent parser for the surface language.
//!
//! ```text
//! program ::= decl* expr
//! decl    ::= "effect" ID ("[" 'a, ... "]")? "{" ID ":" ty (, ID ":" ty)* ","? "}"
//!           | "instance" ID ":" ID ("[" ty, ... "]")?
//! expr    ::= "let" x "=" expr "in" expr | "fun" "(" x ":" ty ")" "->" expr
//!           | "with" expr "handle" expr | "if" expr "then" expr "else" expr
//!           | binary (";" expr)?
//! binary  ::= || && (== <) (+ - ^) * over applications and prefix forms
//! ```
//!
//! Bodies of `let`, `fun`, `with`, `if` and handler clauses extend as far to
//! the right as possible.

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::SurfaceError;
use crate::Name;

pub const KEYWORDS: &[&str] = &[
    "effect", "instance", "let", "in", "fun", "handle", "with", "handler", "withnew", "newref",
    "get", "put", "if", "then", "else", "case", "of", "inl", "inr", "absurd", "print", "fst",
    "snd", "new", "val", "true", "false", "cast", "unit", "int", "string", "empty", "bool", "dyn",
    "ref",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, SurfaceError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let found = match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::TyVar(s) => format!("'{s}"),
            Tok::Int(n) => n.to_string(),
            Tok::Str(_) => "a string literal".into(),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        };
        Err(SurfaceError::parse(
            self.span(),
            format!("{}, found {found}", msg.into()),
        ))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`"))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`"))
        }
    }

    /// A variable name: an identifier that is not a keyword.
    fn ident(&mut self) -> PResult<Name> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) && s != "_" => {
                let n = Name::from(s.as_str());
                self.bump();
                Ok(n)
            }
            _ => self.error("expected an identifier"),
        }
    }

    /// A binder: an identifier or `_`.
    fn binder(&mut self) -> PResult<Name> {
        if matches!(self.peek(), Tok::Ident(s) if s == "_") {
            self.bump();
            return Ok(Name::new("_"));
        }
        self.ident()
    }

    /// An operation name; keywords are allowed here.
    fn op_name(&mut self) -> PResult<Name> {
        match self.peek() {
            Tok::Ident(s) if s != "_" => {
                let n = Name::from(s.as_str());
                self.bump();
                Ok(n)
            }
            _ => self.error("expected an operation name"),
        }
    }

    fn program(&mut self) -> PResult<SurfaceProgram> {
        let mut decls = Vec::new();
        loop {
            let span = self.span();
            if self.eat_kw("effect") {
                decls.push(Decl::Effect(self.effect_decl(span)?));
            } else if self.eat_kw("instance") {
                let name = self.ident()?;
                self.expect_sym(":")?;
                let effect = self.ident()?;
                let args = self.type_args()?;
                decls.push(Decl::Instance(InstanceDecl {
                    name,
                    effect,
                    args,
                    span,
                }));
            } else {
                break;
            }
        }
        let body = self.expr()?;
        if *self.peek() != Tok::Eof {
            return self.error("expected end of input");
        }
        Ok(SurfaceProgram { decls, body })
    }

    fn effect_decl(&mut self, span: Span) -> PResult<EffectDecl> {
        let name = self.ident()?;
        let mut params = Vec::new();
        if self.eat_sym("[") {
            loop {
                match self.bump() {
                    Tok::TyVar(v) => params.push(Name::from(v)),
                    _ => {
                        self.pos -= 1;
                        return self.error("expected a type parameter");
                    }
                }
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym("]")?;
        }
        self.expect_sym("{")?;
        let mut ops = Vec::new();
        while !self.is_sym("}") {
            let op_span = self.span();
            let op = self.op_name()?;
            self.expect_sym(":")?;
            let ty = self.ty()?;
            let Type::Arrow(arg, res) = ty else {
                return Err(SurfaceError::parse(
                    op_span,
                    format!("operation `{op}` needs a type of the form a -> b"),
                ));
            };
            if ops.iter().any(|o: &OpDecl| o.name == op) {
                return Err(SurfaceError::scope(
                    op_span,
                    format!("operation `{op}` declared twice in `{name}`"),
                ));
            }
            ops.push(OpDecl {
                name: op,
                arg: *arg,
                res: *res,
            });
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("}")?;
        if ops.is_empty() {
            return Err(SurfaceError::parse(
                span,
                format!("effect `{name}` declares no operations"),
            ));
        }
        Ok(EffectDecl {
            name,
            params,
            ops,
            span,
        })
    }

    fn type_args(&mut self) -> PResult<Vec<Type>> {
        let mut args = Vec::new();
        if self.eat_sym("[") {
            loop {
                args.push(self.ty()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym("]")?;
        }
        Ok(args)
    }

    fn ty(&mut self) -> PResult<Type> {
        let lhs = self.sum_ty()?;
        if self.eat_sym("->") {
            Ok(Type::Arrow(Box::new(lhs), Box::new(self.ty()?)))
        } else if self.eat_sym("=>") {
            Ok(Type::Handler(Box::new(lhs), Box::new(self.ty()?)))
        } else {
            Ok(lhs)
        }
    }

    fn sum_ty(&mut self) -> PResult<Type> {
        let lhs = self.prod_ty()?;
        if self.eat_sym("+") {
            Ok(Type::Sum(Box::new(lhs), Box::new(self.sum_ty()?)))
        } else {
            Ok(lhs)
        }
    }

    fn prod_ty(&mut self) -> PResult<Type> {
        let mut lhs = self.atom_ty()?;
        while self.eat_sym("*") {
            lhs = Type::Pair(Box::new(lhs), Box::new(self.atom_ty()?));
        }
        Ok(lhs)
    }

    fn bracket_ty(&mut self) -> PResult<Type> {
        self.expect_sym("[")?;
        let t = self.ty()?;
        self.expect_sym("]")?;
        Ok(t)
    }

    fn opt_bracket_ty(&mut self) -> PResult<Option<Type>> {
        if self.is_sym("[") {
            Ok(Some(self.bracket_ty()?))
        } else {
            Ok(None)
        }
    }

    fn atom_ty(&mut self) -> PResult<Type> {
        match self.peek().clone() {
            Tok::TyVar(v) => {
                self.bump();
                Ok(Type::Param(Name::from(v)))
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.ty()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(match s.as_str() {
                    "unit" => Type::Unit,
                    "int" => Type::Int,
                    "string" => Type::Str,
                    "empty" => Type::Empty,
                    "bool" => Type::Bool,
                    "dyn" => Type::Dyn,
                    "ref" => Type::Ref(Box::new(self.bracket_ty()?)),
                    _ if is_keyword(&s) || s == "_" => {
                        self.pos -= 1;
                        return self.error("expected a type");
                    }
                    _ => Type::Effect(Name::from(s), self.type_args()?),
                })
            }
            _ => self.error("expected a type"),
        }
    }

    fn starts_long(&self) -> bool {
        ["let", "fun", "with", "if"].iter().any(|k| self.is_kw(k))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let span = self.span();
        if self.starts_long() {
            return self.long(span);
        }
        let lhs = self.binary(0)?;
        if self.eat_sym(";") {
            let rhs = self.expr()?;
            return Ok(Expr::new(ExprKind::Seq(lhs.boxed(), rhs.boxed()), span));
        }
        Ok(lhs)
    }

    fn long(&mut self, span: Span) -> PResult<Expr> {
        let kind = if self.eat_kw("let") {
            let binder = self.binder()?;
            self.expect_sym("=")?;
            let bound = self.expr()?;
            self.expect_kw("in")?;
            let body = self.expr()?;
            ExprKind::Let {
                binder,
                bound: bound.boxed(),
                body: body.boxed(),
            }
        } else if self.eat_kw("fun") {
            self.expect_sym("(")?;
            let param = self.binder()?;
            self.expect_sym(":")?;
            let ty = self.ty()?;
            self.expect_sym(")")?;
            self.expect_sym("->")?;
            ExprKind::Lam {
                param,
                ty,
                body: self.expr()?.boxed(),
            }
        } else if self.eat_kw("with") {
            let handler = self.expr()?;
            self.expect_kw("handle")?;
            ExprKind::WithHandle {
                handler: handler.boxed(),
                body: self.expr()?.boxed(),
            }
        } else {
            self.expect_kw("if")?;
            let c = self.expr()?;
            self.expect_kw("then")?;
            let t = self.expr()?;
            self.expect_kw("else")?;
            ExprKind::If(c.boxed(), t.boxed(), self.expr()?.boxed())
        };
        Ok(Expr::new(kind, span))
    }

    fn binary(&mut self, level: usize) -> PResult<Expr> {
        const LEVELS: [&[(&str, BinOp)]; 5] = [
            &[("||", BinOp::Or)],
            &[("&&", BinOp::And)],
            &[("==", BinOp::Eq), ("<", BinOp::Lt)],
            &[("+", BinOp::Add), ("-", BinOp::Sub), ("^", BinOp::Concat)],
            &[("*", BinOp::Mul)],
        ];
        if level == LEVELS.len() {
            return self.app();
        }
        let span = self.span();
        let mut lhs = self.binary(level + 1)?;
        while let Some(&(_, op)) = LEVELS[level].iter().find(|(s, _)| self.is_sym(s)) {
            self.bump();
            let right_assoc = matches!(op, BinOp::Or | BinOp::And);
            let rhs = if right_assoc {
                self.binary(level)?
            } else {
                self.binary(level + 1)?
            };
            lhs = Expr::new(ExprKind::Bin(op, lhs.boxed(), rhs.boxed()), span);
            if right_assoc || matches!(op, BinOp::Eq | BinOp::Lt) {
                break;
            }
        }
        Ok(lhs)
    }

    fn prefix_operand(&mut self) -> PResult<Box<Expr>> {
        Ok(self.app()?.boxed())
    }

    fn app(&mut self) -> PResult<Expr> {
        let span = self.span();
        if self.starts_long() {
            return self.long(span);
        }
        let prefix = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => String::new(),
        };
        let kind = match prefix.as_str() {
            "val" => {
                self.bump();
                return self.app();
            }
            "print" => {
                self.bump();
                ExprKind::Print(self.prefix_operand()?)
            }
            "fst" => {
                self.bump();
                ExprKind::Fst(self.prefix_operand()?)
            }
            "snd" => {
                self.bump();
                ExprKind::Snd(self.prefix_operand()?)
            }
            "inl" | "inr" | "absurd" | "cast" => {
                self.bump();
                let t = self.bracket_ty()?;
                let e = self.prefix_operand()?;
                match prefix.as_str() {
                    "inl" => ExprKind::Inl(t, e),
                    "inr" => ExprKind::Inr(t, e),
                    "absurd" => ExprKind::Absurd(t, e),
                    _ => ExprKind::Cast(t, e),
                }
            }
            "newref" => {
                self.bump();
                let t = self.opt_bracket_ty()?;
                ExprKind::NewRef(t, self.prefix_operand()?)
            }
            "get" | "put" => {
                self.bump();
                let t = self.opt_bracket_ty()?;
                let r = self.atom()?.boxed();
                let a = self.atom()?.boxed();
                if prefix == "get" {
                    ExprKind::Get(t, r, a)
                } else {
                    ExprKind::Put(t, r, a)
                }
            }
            "new" => {
                self.bump();
                let e = self.ident()?;
                ExprKind::New(e, self.type_args()?)
            }
            _ => {
                let mut f = self.atom()?;
                while self.starts_atom() {
                    let a = self.atom()?;
                    f = Expr::new(ExprKind::App(f.boxed(), a.boxed()), span);
                }
                return Ok(f);
            }
        };
        Ok(Expr::new(kind, span))
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Int(_) | Tok::Str(_) => true,
            Tok::Sym(s) => *s == "(",
            // `handle e with` is left out: in `with h handle e` the keyword ends the handler
            Tok::Ident(s) => {
                !is_keyword(s)
                    || ["true", "false", "handler", "withnew", "case"].contains(&s.as_str())
            }
            _ => false,
        }
    }

    fn atom(&mut self) -> PResult<Expr> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                ExprKind::Int(n)
            }
            Tok::Str(s) => {
                self.bump();
                ExprKind::Str(s)
            }
            Tok::Sym("(") => {
                self.bump();
                if self.eat_sym(")") {
                    ExprKind::Unit
                } else if self.is_sym("-")
                    && matches!(self.peek_at(1), Tok::Int(_))
                    && matches!(self.peek_at(2), Tok::Sym(")"))
                {
                    self.bump();
                    let Tok::Int(n) = self.bump() else {
                        unreachable!()
                    };
                    self.bump();
                    ExprKind::Int(-n)
                } else {
                    let mut e = self.expr()?;
                    while self.eat_sym(",") {
                        let rhs = self.expr()?;
                        e = Expr::new(ExprKind::Pair(e.boxed(), rhs.boxed()), span);
                    }
                    self.expect_sym(")")?;
                    return Ok(e);
                }
            }
            Tok::Ident(s) => match s.as_str() {
                "true" | "false" => {
                    self.bump();
                    ExprKind::Bool(s == "true")
                }
                "handler" => {
                    self.bump();
                    ExprKind::Handler(self.clauses()?)
                }
                "withnew" => {
                    self.bump();
                    let t = self.opt_bracket_ty()?;
                    self.expect_sym("{")?;
                    let e = self.expr()?;
                    self.expect_sym("}")?;
                    ExprKind::WithNew(t, e.boxed())
                }
                "handle" => {
                    self.bump();
                    let body = self.expr()?;
                    self.expect_kw("with")?;
                    ExprKind::Handle {
                        body: body.boxed(),
                        clauses: self.clauses()?,
                    }
                }
                "case" => {
                    self.bump();
                    let scrutinee = self.expr()?;
                    self.expect_kw("of")?;
                    self.expect_sym("{")?;
                    self.eat_sym("|");
                    self.expect_kw("inl")?;
                    let left = self.binder()?;
                    self.expect_sym("->")?;
                    let left_body = self.expr()?;
                    self.expect_sym("|")?;
                    self.expect_kw("inr")?;
                    let right = self.binder()?;
                    self.expect_sym("->")?;
                    let right_body = self.expr()?;
                    self.expect_sym("}")?;
                    ExprKind::Case {
                        scrutinee: scrutinee.boxed(),
                        left,
                        left_body: left_body.boxed(),
                        right,
                        right_body: right_body.boxed(),
                    }
                }
                _ => {
                    let name = self.ident()?;
                    if self.eat_sym("#") {
                        let op = self.op_name()?;
                        let arg = self.atom()?;
                        let instance = Expr::new(ExprKind::Var(name), span);
                        ExprKind::Op {
                            instance: instance.boxed(),
                            op,
                            arg: arg.boxed(),
                        }
                    } else {
                        ExprKind::Var(name)
                    }
                }
            },
            _ => return self.error("expected an expression"),
        };
        Ok(Expr::new(kind, span))
    }

    fn clauses(&mut self) -> PResult<Clauses> {
        self.expect_sym("{")?;
        let mut clauses = Clauses {
            val: None,
            ops: Vec::new(),
        };
        self.eat_sym("|");
        loop {
            let span = self.span();
            if self.eat_kw("val") {
                if clauses.val.is_some() {
                    return Err(SurfaceError::parse(span, "duplicate value clause"));
                }
                let (binder, ty) = if self.eat_sym("(") {
                    if self.eat_sym(")") {
                        (Name::new("_"), Some(Type::Unit))
                    } else {
                        let b = self.binder()?;
                        self.expect_sym(":")?;
                        let t = self.ty()?;
                        self.expect_sym(")")?;
                        (b, Some(t))
                    }
                } else {
                    (self.binder()?, None)
                };
                self.expect_sym("->")?;
                let body = self.expr()?;
                clauses.val = Some(Box::new(ValClause { binder, ty, body }));
            } else {
                let instance = self.ident()?;
                self.expect_sym("#")?;
                let op = self.op_name()?;
                self.expect_sym("(")?;
                let arg = self.binder()?;
                self.expect_sym(",")?;
                let k = self.binder()?;
                self.expect_sym(")")?;
                self.expect_sym("->")?;
                let body = self.expr()?;
                clauses.ops.push(OpClause {
                    instance,
                    op,
                    arg,
                    k,
                    body,
                    instance_ty: Inferred::none(),
                    span,
                });
            }
            if !self.eat_sym("|") {
                break;
            }
        }
        self.expect_sym("}")?;
        Ok(clauses)
    }
}

/// Parse and scope-check a program.
pub fn parse(src: &str) -> Result<SurfaceProgram, SurfaceError> {
    let toks = lex(src)?;
    let program = Parser { toks, pos: 0 }.program()?;
    super::scope::check_scope(&program)?;
    Ok(program)
}

/// Parse a single type.
pub fn parse_type(src: &str) -> Result<Type, SurfaceError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let t = p.ty()?;
    if *p.peek() != Tok::Eof {
        return p.error("expected end of type");
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Phase;

    const TEST1: &str = include_str!("../../../harness/tests/corpus/test1.effs");

    #[test]
    fn val_literal() {
        let p = parse("val 1").unwrap();
        assert!(p.decls.is_empty());
        assert_eq!(p.body.kind, ExprKind::Int(1));
    }

    #[test]
    fn test1_shape() {
        let p = parse(TEST1).unwrap();
        let effects: Vec<_> = p.effects().collect();
        assert_eq!(effects.len(), 1);
        assert_eq!(effects[0].ops.len(), 2);
        assert_eq!(p.instances().count(), 1);
        let mut handles = Vec::new();
        p.body.walk(&mut |e| {
            if let ExprKind::Handle { clauses, .. } = &e.kind {
                handles.push(clauses.val.iter().count() + clauses.ops.len());
            }
        });
        assert_eq!(handles, vec![3]);
    }

    #[test]
    fn unbalanced_paren() {
        let err = parse("val (").unwrap_err();
        assert_eq!(err.phase, Phase::Parse);
        assert_eq!((err.line, err.col), (1, 6));
    }

    #[test]
    fn unknown_variable_is_a_scope_error() {
        let err = parse("let x = 1 in y").unwrap_err();
        assert_eq!(err.phase, Phase::Scope);
        assert_eq!((err.line, err.col), (1, 14));
    }

    #[test]
    fn unknown_operation_is_rejected() {
        let err = parse("effect e { a : int -> int }\nlet r = new e in r#b 1").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn operators_associate() {
        let p = parse("1 - 2 - 3").unwrap();
        let ExprKind::Bin(BinOp::Sub, l, r) = &p.body.kind else {
            panic!("expected subtraction")
        };
        assert!(matches!(l.kind, ExprKind::Bin(BinOp::Sub, ..)));
        assert_eq!(r.kind, ExprKind::Int(3));
        assert!(parse("1 < 2 < 3").is_err());
    }

    #[test]
    fn types_parse() {
        let t = parse_type("int * string -> unit + int").unwrap();
        assert_eq!(
            t,
            Type::arrow(
                Type::pair(Type::Int, Type::Str),
                Type::sum(Type::Unit, Type::Int)
            )
        );
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(
            parse("(* a (* nested *) comment *) val 2")
                .unwrap()
                .body
                .kind,
            ExprKind::Int(2)
        );
    }
}
