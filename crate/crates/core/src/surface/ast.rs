use std::fmt;

use crate::Name;

/// Source position, 1-based. Ignored by equality so that reparsed programs
/// compare equal to the originals.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A slot filled in by elaboration. Like [`Span`], it does not take part in equality.
#[derive(Clone, Debug, Default)]
pub struct Inferred<T>(pub Option<T>);

impl<T> PartialEq for Inferred<T> {
    fn eq(&self, _: &Inferred<T>) -> bool {
        true
    }
}

impl<T> Inferred<T> {
    pub fn none() -> Inferred<T> {
        Inferred(None)
    }

    pub fn get(&self) -> Option<&T> {
        self.0.as_ref()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Unit,
    Int,
    Str,
    Empty,
    /// `unit + unit`, with `inl ()` as true.
    Bool,
    Dyn,
    /// A type parameter of an effect declaration.
    Param(Name),
    Arrow(Box<Type>, Box<Type>),
    Pair(Box<Type>, Box<Type>),
    Sum(Box<Type>, Box<Type>),
    /// `c => w`: handlers of `c` computations producing `w`.
    Handler(Box<Type>, Box<Type>),
    /// An instance of a declared effect.
    Effect(Name, Vec<Type>),
    /// A reference cell; only meaningful before dynamic-effect expansion.
    Ref(Box<Type>),
}

impl Type {
    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }

    pub fn pair(a: Type, b: Type) -> Type {
        Type::Pair(Box::new(a), Box::new(b))
    }

    pub fn sum(a: Type, b: Type) -> Type {
        Type::Sum(Box::new(a), Box::new(b))
    }

    /// Replace `bool` by its sum form, recursively.
    pub fn normalize(&self) -> Type {
        self.map(&|t| match t {
            Type::Bool => Some(Type::sum(Type::Unit, Type::Unit)),
            _ => None,
        })
    }

    /// Rebuild the type bottom-up, replacing every node for which `f` answers `Some`.
    pub fn map(&self, f: &dyn Fn(&Type) -> Option<Type>) -> Type {
        if let Some(t) = f(self) {
            return t;
        }
        match self {
            Type::Arrow(a, b) => Type::Arrow(Box::new(a.map(f)), Box::new(b.map(f))),
            Type::Pair(a, b) => Type::Pair(Box::new(a.map(f)), Box::new(b.map(f))),
            Type::Sum(a, b) => Type::Sum(Box::new(a.map(f)), Box::new(b.map(f))),
            Type::Handler(a, b) => Type::Handler(Box::new(a.map(f)), Box::new(b.map(f))),
            Type::Effect(e, args) => {
                Type::Effect(e.clone(), args.iter().map(|a| a.map(f)).collect())
            }
            Type::Ref(a) => Type::Ref(Box::new(a.map(f))),
            t => t.clone(),
        }
    }

    pub fn subst(&self, params: &[Name], args: &[Type]) -> Type {
        self.map(&|t| match t {
            Type::Param(p) => params.iter().position(|q| q == p).map(|i| args[i].clone()),
            _ => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OpDecl {
    pub name: Name,
    pub arg: Type,
    pub res: Type,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EffectDecl {
    pub name: Name,
    pub params: Vec<Name>,
    pub ops: Vec<OpDecl>,
    pub span: Span,
}

impl EffectDecl {
    pub fn op(&self, name: &str) -> Option<(usize, &OpDecl)> {
        self.ops
            .iter()
            .enumerate()
            .find(|(_, o)| o.name.as_str() == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceDecl {
    pub name: Name,
    pub effect: Name,
    pub args: Vec<Type>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    Effect(EffectDecl),
    Instance(InstanceDecl),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceProgram {
    pub decls: Vec<Decl>,
    pub body: Expr,
}

impl SurfaceProgram {
    pub fn effects(&self) -> impl Iterator<Item = &EffectDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Effect(e) => Some(e),
            Decl::Instance(_) => None,
        })
    }

    pub fn instances(&self) -> impl Iterator<Item = &InstanceDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Instance(i) => Some(i),
            Decl::Effect(_) => None,
        })
    }

    pub fn effect(&self, name: &str) -> Option<&EffectDecl> {
        self.effects().find(|e| e.name.as_str() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Concat,
    Eq,
    Lt,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Concat => "^",
            BinOp::Eq => "==",
            BinOp::Lt => "<",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
    /// Type assigned by elaboration.
    pub ty: Inferred<Type>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValClause {
    pub binder: Name,
    pub ty: Option<Type>,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OpClause {
    pub instance: Name,
    pub op: Name,
    pub arg: Name,
    pub k: Name,
    pub body: Expr,
    /// Type of the handled instance, assigned by elaboration.
    pub instance_ty: Inferred<Type>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Clauses {
    pub val: Option<Box<ValClause>>,
    pub ops: Vec<OpClause>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Var(Name),
    Unit,
    Int(i64),
    Str(String),
    Bool(bool),
    Lam {
        param: Name,
        ty: Type,
        body: Box<Expr>,
    },
    App(Box<Expr>, Box<Expr>),
    Let {
        binder: Name,
        bound: Box<Expr>,
        body: Box<Expr>,
    },
    Seq(Box<Expr>, Box<Expr>),
    Pair(Box<Expr>, Box<Expr>),
    Fst(Box<Expr>),
    Snd(Box<Expr>),
    /// Injections carry the whole sum type.
    Inl(Type, Box<Expr>),
    Inr(Type, Box<Expr>),
    Case {
        scrutinee: Box<Expr>,
        left: Name,
        left_body: Box<Expr>,
        right: Name,
        right_body: Box<Expr>,
    },
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Absurd(Type, Box<Expr>),
    Print(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    New(Name, Vec<Type>),
    /// `inst#op arg`.
    Op {
        instance: Box<Expr>,
        op: Name,
        arg: Box<Expr>,
    },
    Handle {
        body: Box<Expr>,
        clauses: Clauses,
    },
    WithHandle {
        handler: Box<Expr>,
        body: Box<Expr>,
    },
    Handler(Clauses),
    Cast(Type, Box<Expr>),
    /// `withnew[t] { e }`; the annotation is the type of `e`.
    WithNew(Option<Type>, Box<Expr>),
    /// `newref[t] e`; the annotation is the cell type.
    NewRef(Option<Type>, Box<Expr>),
    Get(Option<Type>, Box<Expr>, Box<Expr>),
    Put(Option<Type>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr {
            kind,
            span,
            ty: Inferred::none(),
        }
    }

    /// An expression with no source position, for generated code.
    pub fn synth(kind: ExprKind) -> Expr {
        Expr::new(kind, Span::default())
    }

    pub fn var(name: impl Into<Name>) -> Expr {
        Expr::synth(ExprKind::Var(name.into()))
    }

    pub fn boxed(self) -> Box<Expr> {
        Box::new(self)
    }

    pub fn typed(&self) -> &Type {
        self.ty.get().expect("expression was not elaborated")
    }

    /// Whether the expression is syntactically a value: evaluating it performs no effect.
    pub fn is_value(&self) -> bool {
        match &self.kind {
            ExprKind::Var(_)
            | ExprKind::Unit
            | ExprKind::Int(_)
            | ExprKind::Str(_)
            | ExprKind::Bool(_)
            | ExprKind::Lam { .. }
            | ExprKind::Handler(_) => true,
            ExprKind::Pair(a, b) => a.is_value() && b.is_value(),
            ExprKind::Inl(_, e) | ExprKind::Inr(_, e) => e.is_value(),
            _ => false,
        }
    }

    /// Visit every sub-expression, pre-order.
    pub fn walk<'e>(&'e self, f: &mut dyn FnMut(&'e Expr)) {
        f(self);
        for child in self.children() {
            child.walk(f);
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        fn clause_bodies(c: &Clauses) -> Vec<&Expr> {
            let mut out: Vec<&Expr> = c.val.iter().map(|v| &v.body).collect();
            out.extend(c.ops.iter().map(|o| &o.body));
            out
        }
        match &self.kind {
            ExprKind::Var(_)
            | ExprKind::Unit
            | ExprKind::Int(_)
            | ExprKind::Str(_)
            | ExprKind::Bool(_)
            | ExprKind::New(..) => vec![],
            ExprKind::Lam { body, .. } => vec![body],
            ExprKind::Fst(e)
            | ExprKind::Snd(e)
            | ExprKind::Inl(_, e)
            | ExprKind::Inr(_, e)
            | ExprKind::Absurd(_, e)
            | ExprKind::Print(e)
            | ExprKind::Cast(_, e)
            | ExprKind::WithNew(_, e)
            | ExprKind::NewRef(_, e) => vec![e],
            ExprKind::App(a, b)
            | ExprKind::Seq(a, b)
            | ExprKind::Pair(a, b)
            | ExprKind::Bin(_, a, b)
            | ExprKind::Get(_, a, b)
            | ExprKind::Put(_, a, b) => vec![a, b],
            ExprKind::Let { bound, body, .. } => vec![bound, body],
            ExprKind::Case {
                scrutinee,
                left_body,
                right_body,
                ..
            } => vec![scrutinee, left_body, right_body],
            ExprKind::If(a, b, c) => vec![a, b, c],
            ExprKind::Op { instance, arg, .. } => vec![instance, arg],
            ExprKind::Handle { body, clauses } => {
                let mut out: Vec<&Expr> = vec![body];
                out.extend(clause_bodies(clauses));
                out
            }
            ExprKind::WithHandle { handler, body } => vec![handler, body],
            ExprKind::Handler(clauses) => clause_bodies(clauses),
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}
