//! Hand-built Core delimcc programs.

use super::{DComp, DProgram, DType, DValue};
use crate::prim::Prim;

fn unit_to_int() -> DType {
    DType::arrow(DType::Unit, DType::Int)
}

fn thunk(body: DComp) -> DValue {
    DValue::lam("_", DType::Unit, body)
}

/// `e v` for a computation `e`.
fn app_comp(e: DComp, v: DValue, tmp: &str) -> DComp {
    DComp::let_(tmp, e, DComp::App(DValue::var(tmp), v))
}

/// `e + n` for a computation `e`.
fn plus(e: DComp, n: i64, tmp: &str) -> DComp {
    let partial = format!("{tmp}_add");
    DComp::let_(
        tmp,
        e,
        DComp::let_(
            partial.as_str(),
            DComp::App(DValue::Prim(Prim::Add), DValue::var(tmp)),
            DComp::App(DValue::var(partial.as_str()), DValue::Int(n)),
        ),
    )
}

/// Three prompts; a `sh0` to the outermost captures a continuation that is
/// resumed twice, and each resumption captures up to the middle prompt again.
/// Evaluates to 135.
pub fn exd() -> DProgram {
    let sk_ty = DType::arrow(unit_to_int(), DType::Int);
    let inner = DComp::sh0(
        DValue::var("p2"),
        "sk2",
        unit_to_int(),
        DComp::App(
            DValue::var("sk2"),
            thunk(DComp::App(
                DValue::var("sk2"),
                thunk(DComp::Vl(DValue::Int(3))),
            )),
        ),
    );
    let pushtwice = DValue::lam(
        "sk",
        sk_ty,
        DComp::App(
            DValue::var("sk"),
            thunk(DComp::App(
                DValue::var("sk"),
                thunk(app_comp(inner, DValue::Unit, "f2")),
            )),
        ),
    );
    let capture = DComp::sh0(
        DValue::var("p1"),
        "sk",
        unit_to_int(),
        DComp::App(DValue::var("pushtwice"), DValue::var("sk")),
    );
    let body = plus(
        DComp::pushpr(
            DValue::var("p1"),
            plus(
                DComp::pushpr(
                    DValue::var("p2"),
                    plus(
                        DComp::pushpr(DValue::var("p3"), app_comp(capture, DValue::Unit, "f1")),
                        10,
                        "x3",
                    ),
                ),
                1,
                "x2",
            ),
        ),
        100,
        "x1",
    );
    let program = DComp::let_(
        "p1",
        DComp::NewPr(DType::Int),
        DComp::let_(
            "p2",
            DComp::NewPr(DType::Int),
            DComp::let_(
                "p3",
                DComp::NewPr(DType::Int),
                DComp::let_("pushtwice", DComp::Vl(pushtwice), body),
            ),
        ),
    );
    DProgram::new(program)
}
