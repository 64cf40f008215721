//! The two rewriting rules of `sh0`/`pushpr` as syntactic transformations:
//!
//! ```text
//! pushpr p (vl v)            ~> vl v
//! pushpr p Cp[sh0 p (k. e)]  ~> let k = fun x -> pushpr p Cp[x] in e
//! ```
//!
//! `Cp` ranges over evaluation contexts built from `let x = [] in e` and
//! `pushpr q []` with `q` syntactically different from `p`.

use crate::core_delimcc::{DComp, DValue};
use crate::Name;

/// One layer of a syntactic evaluation context.
#[derive(Clone, Debug, PartialEq)]
pub enum CtxFrame {
    Let { binder: Name, body: DComp },
    PushPr(DValue),
}

/// Frames listed outermost first.
pub type EvalCtx = Vec<CtxFrame>;

pub fn plug(ctx: &[CtxFrame], hole: DComp) -> DComp {
    ctx.iter().rev().fold(hole, |inner, frame| match frame {
        CtxFrame::Let { binder, body } => DComp::let_(binder.clone(), inner, body.clone()),
        CtxFrame::PushPr(q) => DComp::pushpr(q.clone(), inner),
    })
}

/// Split `e` into a context and the `sh0 p` it surrounds, provided no frame of
/// the context is `pushpr p`.
pub fn find_sh0<'e>(p: &DValue, mut e: &'e DComp) -> Option<(EvalCtx, &'e DComp)> {
    let mut ctx = Vec::new();
    loop {
        match e {
            DComp::Sh0 { prompt, .. } if prompt == p => return Some((ctx, e)),
            DComp::Let {
                binder,
                bound,
                body,
            } => {
                ctx.push(CtxFrame::Let {
                    binder: binder.clone(),
                    body: (**body).clone(),
                });
                e = bound;
            }
            DComp::PushPr(q, body) if q != p => {
                ctx.push(CtxFrame::PushPr(q.clone()));
                e = body;
            }
            _ => return None,
        }
    }
}

/// Apply one rewriting rule at the root of `e`, if one applies.
pub fn rewrite_once(e: &DComp) -> Option<DComp> {
    let DComp::PushPr(p, body) = e else {
        return None;
    };
    if let DComp::Vl(v) = &**body {
        return Some(DComp::Vl(v.clone()));
    }
    let (ctx, redex) = find_sh0(p, body)?;
    let DComp::Sh0 {
        k,
        hole_ty,
        body: sh0_body,
        ..
    } = redex
    else {
        return None;
    };
    let x = Name::new("$hole");
    let resumed = DComp::pushpr(p.clone(), plug(&ctx, DComp::Vl(DValue::Var(x.clone()))));
    Some(DComp::let_(
        k.clone(),
        DComp::Vl(DValue::lam(x, hole_ty.clone(), resumed)),
        (**sh0_body).clone(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_delimcc::DType;

    fn p() -> DValue {
        DValue::var("p")
    }

    #[test]
    fn pushpr_over_a_value() {
        let e = DComp::pushpr(p(), DComp::Vl(DValue::Int(7)));
        assert_eq!(rewrite_once(&e), Some(DComp::Vl(DValue::Int(7))));
    }

    #[test]
    fn capture_up_to_the_matching_prompt() {
        let sh0 = DComp::sh0(p(), "k", DType::Int, DComp::Vl(DValue::Int(0)));
        let ctx = vec![
            CtxFrame::Let {
                binder: "a".into(),
                body: DComp::Vl(DValue::var("a")),
            },
            CtxFrame::PushPr(DValue::var("q")),
        ];
        let e = DComp::pushpr(p(), plug(&ctx, sh0));
        let (found, _) = find_sh0(
            &p(),
            match &e {
                DComp::PushPr(_, b) => b,
                _ => unreachable!(),
            },
        )
        .unwrap();
        assert_eq!(found, ctx);
        let resumed = DComp::pushpr(p(), plug(&ctx, DComp::Vl(DValue::var("$hole"))));
        let expected = DComp::let_(
            "k",
            DComp::Vl(DValue::lam("$hole", DType::Int, resumed)),
            DComp::Vl(DValue::Int(0)),
        );
        assert_eq!(rewrite_once(&e), Some(expected));
    }

    #[test]
    fn inner_matching_prompt_blocks_the_search() {
        let sh0 = DComp::sh0(p(), "k", DType::Int, DComp::Vl(DValue::Int(0)));
        let e = DComp::pushpr(p(), DComp::pushpr(p(), sh0));
        assert_eq!(
            find_sh0(
                &p(),
                match &e {
                    DComp::PushPr(_, b) => b,
                    _ => unreachable!(),
                }
            ),
            None
        );
    }
}
