//! Translation from Core Eff to Core delimcc.
//!
//! Homomorphic on the shared forms. An effect instance becomes a prompt whose
//! answer type is the free structure of its operation; an operation becomes a
//! `sh0` that returns `act v k`; a handler becomes a function of a thunk that
//! runs the thunk under the prompt and interprets the resulting free structure
//! with a recursive function.

use crate::core_delimcc::{DComp, DProgram, DType, DValue};
use crate::core_eff::{
    infer_comp, infer_value, CoreComp, CoreEffProgram, CoreType, CoreValue, Handler, TypeCtx,
    TypeError,
};
use crate::Name;

pub fn translate_type(t: &CoreType) -> DType {
    match t {
        CoreType::Unit => DType::Unit,
        CoreType::Int => DType::Int,
        CoreType::Str => DType::Str,
        CoreType::Empty => DType::Empty,
        CoreType::Dyn => DType::Dyn,
        CoreType::Arrow(a, b) => DType::arrow(translate_type(a), translate_type(b)),
        CoreType::Pair(a, b) => DType::pair(translate_type(a), translate_type(b)),
        CoreType::Sum(a, b) => DType::sum(translate_type(a), translate_type(b)),
        CoreType::Eff(a, b) => DType::prompt(DType::free(translate_type(a), translate_type(b))),
        CoreType::EffH(c, w) => DType::arrow(
            DType::arrow(DType::Unit, translate_type(c)),
            translate_type(w),
        ),
    }
}

/// Typing context of the source term plus the supply of fresh `$t` names.
#[derive(Debug, Default)]
pub struct TransEnv {
    pub ctx: TypeCtx,
    next: u64,
}

impl TransEnv {
    pub fn new() -> TransEnv {
        TransEnv::default()
    }

    pub fn with_ctx(ctx: TypeCtx) -> TransEnv {
        TransEnv { ctx, next: 0 }
    }

    fn fresh(&mut self, hint: &str) -> Name {
        self.next += 1;
        Name::from(format!("$t{hint}{}", self.next))
    }

    fn bind<T>(
        &mut self,
        x: &Name,
        t: CoreType,
        f: impl FnOnce(&mut Self) -> Result<T, TypeError>,
    ) -> Result<T, TypeError> {
        self.ctx.push(x.clone(), t);
        let r = f(self);
        self.ctx.pop();
        r
    }

    fn instance_types(&mut self, inst: &CoreValue) -> Result<(CoreType, CoreType), TypeError> {
        match infer_value(&mut self.ctx, inst)? {
            CoreType::Eff(a, b) => Ok((*a, *b)),
            other => Err(TypeError {
                location: "instance".into(),
                expected: "an effect instance".into(),
                found: other.to_string(),
            }),
        }
    }
}

pub fn translate_value(env: &mut TransEnv, v: &CoreValue) -> Result<DValue, TypeError> {
    Ok(match v {
        CoreValue::Var(x) => DValue::Var(x.clone()),
        CoreValue::Unit => DValue::Unit,
        CoreValue::Int(n) => DValue::Int(*n),
        CoreValue::Str(s) => DValue::Str(s.clone()),
        CoreValue::Prim(p) => DValue::Prim(*p),
        CoreValue::Lam {
            param,
            param_ty,
            body,
        } => {
            let body = env.bind(param, param_ty.clone(), |env| translate_comp(env, body))?;
            DValue::lam(param.clone(), translate_type(param_ty), body)
        }
        CoreValue::Op(inst) => {
            let (a, b) = env.instance_types(inst)?;
            let p = translate_value(env, inst)?;
            let v = env.fresh("v");
            let k = env.fresh("k");
            let act = DValue::Act(
                Box::new(DValue::Var(v.clone())),
                Box::new(DValue::Var(k.clone())),
            );
            DValue::lam(
                v,
                translate_type(&a),
                DComp::sh0(p, k, translate_type(&b), DComp::Vl(act)),
            )
        }
        CoreValue::Handler(h) => translate_handler(env, h)?,
        CoreValue::Pair(a, b) => DValue::Pair(
            Box::new(translate_value(env, a)?),
            Box::new(translate_value(env, b)?),
        ),
        CoreValue::Inl(v, t) => DValue::Inl(Box::new(translate_value(env, v)?), translate_type(t)),
        CoreValue::Inr(v, t) => DValue::Inr(Box::new(translate_value(env, v)?), translate_type(t)),
    })
}

fn translate_handler(env: &mut TransEnv, h: &Handler) -> Result<DValue, TypeError> {
    let (a, b) = env.instance_types(&h.instance)?;
    let w = env.bind(&h.val_binder, h.val_ty.clone(), |env| {
        infer_comp(&mut env.ctx, &h.val_body)
    })?;
    let (a_t, b_t, c_t, w_t) = (
        translate_type(&a),
        translate_type(&b),
        translate_type(&h.val_ty),
        translate_type(&w),
    );
    let free = DType::free(a_t.clone(), b_t.clone());
    let p = translate_value(env, &h.instance)?;

    let val_body = env.bind(&h.val_binder, h.val_ty.clone(), |env| {
        translate_comp(env, &h.val_body)
    })?;
    let k_ty = CoreType::arrow(b.clone(), w.clone());
    let op_body = env.bind(&h.arg_binder, a.clone(), |env| {
        env.bind(&h.k_binder, k_ty, |env| translate_comp(env, &h.op_body))
    })?;

    // absrec (fun self freer -> with_free freer (fun r -> valh (p_univ r)) (fun v k -> oph (v, compose self k)))
    let self_name = env.fresh("h");
    let freer = env.fresh("freer");
    let ru = env.fresh("r");
    let kraw = env.fresh("k");
    let x = env.fresh("a");
    let y = env.fresh("b");
    let compose = DValue::lam(
        x.clone(),
        b_t.clone(),
        DComp::let_(
            y.clone(),
            DComp::App(DValue::Var(kraw.clone()), DValue::Var(x)),
            DComp::App(DValue::Var(self_name.clone()), DValue::Var(y)),
        ),
    );
    let dispatcher = DValue::RecLam {
        self_name,
        param: freer.clone(),
        param_ty: free.clone(),
        ret_ty: w_t.clone(),
        body: Box::new(DComp::WithFree {
            scrutinee: DValue::Var(freer),
            ret: ru.clone(),
            ret_body: Box::new(DComp::let_(
                h.val_binder.clone(),
                DComp::PUniv(DValue::Var(ru), c_t.clone()),
                val_body,
            )),
            arg: h.arg_binder.clone(),
            k: kraw,
            act_body: Box::new(DComp::let_(h.k_binder.clone(), DComp::Vl(compose), op_body)),
        }),
    };

    // fun th -> let freer = pushpr p (let r = th () in vl (ret (i_univ r))) in dispatcher freer
    let th = env.fresh("th");
    let r = env.fresh("r");
    let run = env.fresh("freer");
    let under_prompt = DComp::pushpr(
        p,
        DComp::let_(
            r.clone(),
            DComp::App(DValue::Var(th.clone()), DValue::Unit),
            DComp::Vl(DValue::Ret(
                Box::new(DValue::IUniv(Box::new(DValue::Var(r)))),
                free,
            )),
        ),
    );
    Ok(DValue::lam(
        th,
        DType::arrow(DType::Unit, c_t),
        DComp::let_(
            run.clone(),
            under_prompt,
            DComp::App(dispatcher, DValue::Var(run)),
        ),
    ))
}

pub fn translate_comp(env: &mut TransEnv, e: &CoreComp) -> Result<DComp, TypeError> {
    Ok(match e {
        CoreComp::Val(v) => DComp::Vl(translate_value(env, v)?),
        CoreComp::Let {
            binder,
            bound,
            body,
        } => {
            let t = infer_comp(&mut env.ctx, bound)?;
            let bound = translate_comp(env, bound)?;
            let body = env.bind(binder, t, |env| translate_comp(env, body))?;
            DComp::let_(binder.clone(), bound, body)
        }
        CoreComp::App(f, a) => DComp::App(translate_value(env, f)?, translate_value(env, a)?),
        CoreComp::NewP(a, b) => DComp::NewPr(DType::free(translate_type(a), translate_type(b))),
        CoreComp::WithHandle(h, body) => {
            let h = translate_value(env, h)?;
            let u = env.fresh("u");
            let thunk = DValue::lam(u, DType::Unit, translate_comp(env, body)?);
            DComp::App(h, thunk)
        }
        CoreComp::Case {
            scrutinee,
            left,
            left_body,
            right,
            right_body,
        } => {
            let (l, r) = match infer_value(&mut env.ctx, scrutinee)? {
                CoreType::Sum(l, r) => (*l, *r),
                other => {
                    return Err(TypeError {
                        location: "case".into(),
                        expected: "a sum".into(),
                        found: other.to_string(),
                    })
                }
            };
            DComp::Case {
                scrutinee: translate_value(env, scrutinee)?,
                left: left.clone(),
                left_body: Box::new(env.bind(left, l, |env| translate_comp(env, left_body))?),
                right: right.clone(),
                right_body: Box::new(env.bind(right, r, |env| translate_comp(env, right_body))?),
            }
        }
        CoreComp::Proj1(v) => DComp::Proj1(translate_value(env, v)?),
        CoreComp::Proj2(v) => DComp::Proj2(translate_value(env, v)?),
        CoreComp::Absurd(v, t) => DComp::Absurd(translate_value(env, v)?, translate_type(t)),
        CoreComp::Print(v) => DComp::Print(translate_value(env, v)?),
        CoreComp::Cast(v, t) => DComp::Cast(translate_value(env, v)?, translate_type(t)),
    })
}

pub fn translate(p: &CoreEffProgram) -> Result<DProgram, TypeError> {
    Ok(DProgram::new(translate_comp(
        &mut TransEnv::new(),
        &p.body,
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_delimcc::{check_delimcc, DTypeCtx};
    use crate::core_eff::infer_comp;
    use crate::delimcc_denot::run_delimcc_session;
    use crate::pipeline::compile;
    use crate::{Observed, DEFAULT_FUEL};

    const READER: &str = "effect reader { op : int -> int }
        let p = new reader in
        (with handler {
          | val (v : int) -> fun (s : int) -> v
          | p#op(x, k) -> fun (s : int) -> let z = s + x in k z s
        } handle let x = p#op 1 in let y = p#op x in y) 10";

    const TESTN2: &str = "effect choice { choose : string * string -> string }
        effect failure { fail : unit -> empty }
        let c = new choice in
        let f = new failure in
        handle
          (handle
             let x = c#choose (\"a\", \"b\") in print x; absurd[unit] (f#fail ())
           with { | val () -> print \";\" | f#fail(u, k) -> print \"!\" })
        with { | val x -> x | c#choose(p, k) -> k (snd p); k (fst p) }";

    #[test]
    fn types() {
        assert_eq!(translate_type(&CoreType::Unit), DType::Unit);
        assert_eq!(
            translate_type(&CoreType::eff(CoreType::Int, CoreType::Int)),
            DType::prompt(DType::free(DType::Int, DType::Int))
        );
        assert_eq!(
            translate_type(&CoreType::effh(
                CoreType::Int,
                CoreType::arrow(CoreType::Int, CoreType::Int)
            )),
            DType::arrow(
                DType::arrow(DType::Unit, DType::Int),
                DType::arrow(DType::Int, DType::Int)
            )
        );
    }

    #[test]
    fn shared_forms_are_homomorphic() {
        let p = translate(&CoreEffProgram::new(CoreComp::Val(CoreValue::Int(1)))).unwrap();
        assert_eq!(p.body, DComp::Vl(DValue::Int(1)));
        let newp = translate(&CoreEffProgram::new(CoreComp::NewP(
            CoreType::Int,
            CoreType::Str,
        )))
        .unwrap();
        assert_eq!(newp.body, DComp::NewPr(DType::free(DType::Int, DType::Str)));
    }

    #[test]
    fn reader_preserves_type_and_meaning() {
        let c = compile(READER).unwrap();
        let d = translate(&c.core).unwrap();
        let t = infer_comp(&mut TypeCtx::new(), &c.core.body).unwrap();
        assert_eq!(
            check_delimcc(&mut DTypeCtx::new(), &d.body),
            Ok(translate_type(&t))
        );
        let (out, s) = run_delimcc_session(&d, DEFAULT_FUEL);
        assert_eq!(out.value(), Some(&Observed::Int(21)));
        assert_eq!(s.stats.bubbles, 2);
        assert_eq!(s.stats.foreign_bubbles, 0);
    }

    #[test]
    fn relayed_requests_keep_their_order() {
        let c = compile(TESTN2).unwrap();
        let d = translate(&c.core).unwrap();
        let (out, s) = run_delimcc_session(&d, DEFAULT_FUEL);
        assert_eq!(out.golden_text(), "b!a!\n()\n");
        assert_eq!(s.stats.foreign_bubbles, 0);
    }
}
