use crate::prim::Prim;
use crate::Name;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CoreType {
    Unit,
    Int,
    Str,
    Empty,
    Arrow(Box<CoreType>, Box<CoreType>),
    Pair(Box<CoreType>, Box<CoreType>),
    Sum(Box<CoreType>, Box<CoreType>),
    /// An effect instance whose single operation maps the first type to the second.
    Eff(Box<CoreType>, Box<CoreType>),
    /// A handler turning computations of the first type into computations of the second.
    EffH(Box<CoreType>, Box<CoreType>),
    Dyn,
}

impl CoreType {
    pub fn arrow(a: CoreType, b: CoreType) -> CoreType {
        CoreType::Arrow(Box::new(a), Box::new(b))
    }

    pub fn pair(a: CoreType, b: CoreType) -> CoreType {
        CoreType::Pair(Box::new(a), Box::new(b))
    }

    pub fn sum(a: CoreType, b: CoreType) -> CoreType {
        CoreType::Sum(Box::new(a), Box::new(b))
    }

    pub fn eff(a: CoreType, b: CoreType) -> CoreType {
        CoreType::Eff(Box::new(a), Box::new(b))
    }

    pub fn effh(a: CoreType, b: CoreType) -> CoreType {
        CoreType::EffH(Box::new(a), Box::new(b))
    }

    pub fn bool() -> CoreType {
        CoreType::sum(CoreType::Unit, CoreType::Unit)
    }

    pub fn mentions_dyn(&self) -> bool {
        match self {
            CoreType::Dyn => true,
            CoreType::Unit | CoreType::Int | CoreType::Str | CoreType::Empty => false,
            CoreType::Arrow(a, b)
            | CoreType::Pair(a, b)
            | CoreType::Sum(a, b)
            | CoreType::Eff(a, b)
            | CoreType::EffH(a, b) => a.mentions_dyn() || b.mentions_dyn(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoreValue {
    Var(Name),
    Unit,
    Int(i64),
    Str(String),
    Lam {
        param: Name,
        param_ty: CoreType,
        body: Box<CoreComp>,
    },
    /// `op v`: the operation of instance `v`, as a function value.
    Op(Box<CoreValue>),
    Handler(Box<Handler>),
    Pair(Box<CoreValue>, Box<CoreValue>),
    /// Left injection annotated with the whole sum type.
    Inl(Box<CoreValue>, CoreType),
    Inr(Box<CoreValue>, CoreType),
    Prim(Prim),
}

/// `handler v (val x:t -> e) (arg, k -> e)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Handler {
    pub instance: CoreValue,
    pub val_binder: Name,
    /// Type of the handled computation; the value clause binder has this type.
    pub val_ty: CoreType,
    pub val_body: CoreComp,
    pub arg_binder: Name,
    pub k_binder: Name,
    pub op_body: CoreComp,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoreComp {
    Val(CoreValue),
    Let {
        binder: Name,
        bound: Box<CoreComp>,
        body: Box<CoreComp>,
    },
    App(CoreValue, CoreValue),
    NewP(CoreType, CoreType),
    WithHandle(CoreValue, Box<CoreComp>),
    Case {
        scrutinee: CoreValue,
        left: Name,
        left_body: Box<CoreComp>,
        right: Name,
        right_body: Box<CoreComp>,
    },
    Proj1(CoreValue),
    Proj2(CoreValue),
    Absurd(CoreValue, CoreType),
    Print(CoreValue),
    Cast(CoreValue, CoreType),
}

impl CoreValue {
    pub fn var(name: impl Into<Name>) -> CoreValue {
        CoreValue::Var(name.into())
    }

    pub fn lam(param: impl Into<Name>, param_ty: CoreType, body: CoreComp) -> CoreValue {
        CoreValue::Lam {
            param: param.into(),
            param_ty,
            body: Box::new(body),
        }
    }

    pub fn pair(a: CoreValue, b: CoreValue) -> CoreValue {
        CoreValue::Pair(Box::new(a), Box::new(b))
    }

    pub fn str(s: &str) -> CoreValue {
        CoreValue::Str(s.to_owned())
    }

    pub fn op(inst: CoreValue) -> CoreValue {
        CoreValue::Op(Box::new(inst))
    }
}

impl CoreComp {
    pub fn let_(binder: impl Into<Name>, bound: CoreComp, body: CoreComp) -> CoreComp {
        CoreComp::Let {
            binder: binder.into(),
            bound: Box::new(bound),
            body: Box::new(body),
        }
    }

    pub fn with_handle(h: CoreValue, body: CoreComp) -> CoreComp {
        CoreComp::WithHandle(h, Box::new(body))
    }

    pub fn case(
        scrutinee: CoreValue,
        left: impl Into<Name>,
        lb: CoreComp,
        right: impl Into<Name>,
        rb: CoreComp,
    ) -> CoreComp {
        CoreComp::Case {
            scrutinee,
            left: left.into(),
            left_body: Box::new(lb),
            right: right.into(),
            right_body: Box::new(rb),
        }
    }

    /// Number of syntax nodes, values included.
    pub fn size(&self) -> usize {
        match self {
            CoreComp::Val(v) | CoreComp::Proj1(v) | CoreComp::Proj2(v) | CoreComp::Print(v) => {
                1 + v.size()
            }
            CoreComp::Absurd(v, _) | CoreComp::Cast(v, _) => 1 + v.size(),
            CoreComp::Let { bound, body, .. } => 1 + bound.size() + body.size(),
            CoreComp::App(f, a) => 1 + f.size() + a.size(),
            CoreComp::NewP(..) => 1,
            CoreComp::WithHandle(h, e) => 1 + h.size() + e.size(),
            CoreComp::Case {
                scrutinee,
                left_body,
                right_body,
                ..
            } => 1 + scrutinee.size() + left_body.size() + right_body.size(),
        }
    }
}

impl CoreValue {
    pub fn size(&self) -> usize {
        match self {
            CoreValue::Var(_)
            | CoreValue::Unit
            | CoreValue::Int(_)
            | CoreValue::Str(_)
            | CoreValue::Prim(_) => 1,
            CoreValue::Lam { body, .. } => 1 + body.size(),
            CoreValue::Op(v) | CoreValue::Inl(v, _) | CoreValue::Inr(v, _) => 1 + v.size(),
            CoreValue::Handler(h) => 1 + h.instance.size() + h.val_body.size() + h.op_body.size(),
            CoreValue::Pair(a, b) => 1 + a.size() + b.size(),
        }
    }
}

/// A closed Core Eff program.
#[derive(Clone, Debug, PartialEq)]
pub struct CoreEffProgram {
    pub body: CoreComp,
}

impl CoreEffProgram {
    pub fn new(body: CoreComp) -> CoreEffProgram {
        CoreEffProgram { body }
    }
}
