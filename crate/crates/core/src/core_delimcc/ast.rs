use crate::prim::Prim;
use crate::Name;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DType {
    Unit,
    Int,
    Str,
    Empty,
    Arrow(Box<DType>, Box<DType>),
    Pair(Box<DType>, Box<DType>),
    Sum(Box<DType>, Box<DType>),
    Univ,
    /// A prompt delimiting computations of this answer type.
    Prompt(Box<DType>),
    /// `Ret of univ | Act of a * (b -> free a b)`.
    Free(Box<DType>, Box<DType>),
    Dyn,
}

impl DType {
    pub fn arrow(a: DType, b: DType) -> DType {
        DType::Arrow(Box::new(a), Box::new(b))
    }

    pub fn pair(a: DType, b: DType) -> DType {
        DType::Pair(Box::new(a), Box::new(b))
    }

    pub fn sum(a: DType, b: DType) -> DType {
        DType::Sum(Box::new(a), Box::new(b))
    }

    pub fn prompt(a: DType) -> DType {
        DType::Prompt(Box::new(a))
    }

    pub fn free(a: DType, b: DType) -> DType {
        DType::Free(Box::new(a), Box::new(b))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DValue {
    Var(Name),
    Unit,
    Int(i64),
    Str(String),
    Lam {
        param: Name,
        param_ty: DType,
        body: Box<DComp>,
    },
    /// A recursive function; `self_name` is bound to the function itself in `body`.
    RecLam {
        self_name: Name,
        param: Name,
        param_ty: DType,
        ret_ty: DType,
        body: Box<DComp>,
    },
    IUniv(Box<DValue>),
    /// `ret u`, annotated with its `Free` type.
    Ret(Box<DValue>, DType),
    Act(Box<DValue>, Box<DValue>),
    Pair(Box<DValue>, Box<DValue>),
    Inl(Box<DValue>, DType),
    Inr(Box<DValue>, DType),
    Prim(Prim),
}

#[derive(Clone, Debug, PartialEq)]
pub enum DComp {
    Vl(DValue),
    Let {
        binder: Name,
        bound: Box<DComp>,
        body: Box<DComp>,
    },
    App(DValue, DValue),
    /// A fresh prompt for the given answer type.
    NewPr(DType),
    PushPr(DValue, Box<DComp>),
    /// `sh0 p (fun k -> body)`; `hole_ty` is the type of the `sh0` expression itself.
    Sh0 {
        prompt: DValue,
        k: Name,
        hole_ty: DType,
        body: Box<DComp>,
    },
    WithFree {
        scrutinee: DValue,
        ret: Name,
        ret_body: Box<DComp>,
        arg: Name,
        k: Name,
        act_body: Box<DComp>,
    },
    PUniv(DValue, DType),
    Case {
        scrutinee: DValue,
        left: Name,
        left_body: Box<DComp>,
        right: Name,
        right_body: Box<DComp>,
    },
    Proj1(DValue),
    Proj2(DValue),
    Absurd(DValue, DType),
    Print(DValue),
    Cast(DValue, DType),
}

impl DValue {
    pub fn var(name: impl Into<Name>) -> DValue {
        DValue::Var(name.into())
    }

    pub fn lam(param: impl Into<Name>, param_ty: DType, body: DComp) -> DValue {
        DValue::Lam {
            param: param.into(),
            param_ty,
            body: Box::new(body),
        }
    }
}

impl DComp {
    pub fn let_(binder: impl Into<Name>, bound: DComp, body: DComp) -> DComp {
        DComp::Let {
            binder: binder.into(),
            bound: Box::new(bound),
            body: Box::new(body),
        }
    }

    pub fn pushpr(p: DValue, body: DComp) -> DComp {
        DComp::PushPr(p, Box::new(body))
    }

    pub fn sh0(p: DValue, k: impl Into<Name>, hole_ty: DType, body: DComp) -> DComp {
        DComp::Sh0 {
            prompt: p,
            k: k.into(),
            hole_ty,
            body: Box::new(body),
        }
    }

    /// Whether this is `vl (act x k)`: the only `sh0` body shape that the
    /// translation produces.
    pub fn is_act_form(&self) -> bool {
        matches!(self, DComp::Vl(DValue::Act(..)))
    }
}

/// A closed Core delimcc program.
#[derive(Clone, Debug, PartialEq)]
pub struct DProgram {
    pub body: DComp,
}

impl DProgram {
    pub fn new(body: DComp) -> DProgram {
        DProgram { body }
    }
}
