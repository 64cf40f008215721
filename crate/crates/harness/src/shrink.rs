//! Greedy, type-preserving shrinking of Core Eff programs.

use effws_core::core_eff::{infer_comp, CoreComp, CoreEffProgram, CoreValue, Handler, TypeCtx};

/// Upper bound on predicate evaluations during one shrink.
pub const MAX_SHRINK_ATTEMPTS: usize = 10_000;

/// Repeatedly replace `p` by the smallest well-typed one-step simplification that
/// still satisfies `failing`, until none does or the attempt budget runs out.
/// Returns the witness and the number of predicate evaluations.
pub fn shrink(
    p: &CoreEffProgram,
    failing: impl Fn(&CoreEffProgram) -> bool,
    max_attempts: usize,
) -> (CoreEffProgram, usize) {
    let mut current = p.clone();
    let mut attempts = 0;
    'outer: loop {
        let size = current.body.size();
        let mut cands = comp_candidates(&current.body);
        cands.retain(|c| c.size() < size);
        cands.sort_by_key(CoreComp::size);
        cands.dedup();
        for body in cands {
            if attempts >= max_attempts {
                break 'outer;
            }
            if infer_comp(&mut TypeCtx::new(), &body).is_err() {
                continue;
            }
            let cand = CoreEffProgram::new(body);
            attempts += 1;
            if failing(&cand) {
                current = cand;
                continue 'outer;
            }
        }
        break;
    }
    (current, attempts)
}

fn trivial_comps() -> [CoreComp; 3] {
    [
        CoreComp::Val(CoreValue::Unit),
        CoreComp::Val(CoreValue::Int(0)),
        CoreComp::Val(CoreValue::Str(String::new())),
    ]
}

/// One-step simplifications of `e`, not necessarily well typed.
pub fn comp_candidates(e: &CoreComp) -> Vec<CoreComp> {
    let mut out = Vec::new();
    match e {
        CoreComp::Let { bound, body, .. } => {
            out.push((**body).clone());
            out.push((**bound).clone());
        }
        CoreComp::WithHandle(_, body) => out.push((**body).clone()),
        CoreComp::Case {
            left_body,
            right_body,
            ..
        } => {
            out.push((**left_body).clone());
            out.push((**right_body).clone());
        }
        _ => {}
    }
    if !matches!(e, CoreComp::Val(_)) {
        out.extend(trivial_comps());
    }
    match e {
        CoreComp::Let {
            binder,
            bound,
            body,
        } => {
            for b in comp_candidates(bound) {
                out.push(CoreComp::let_(binder.clone(), b, (**body).clone()));
            }
            for b in comp_candidates(body) {
                out.push(CoreComp::let_(binder.clone(), (**bound).clone(), b));
            }
        }
        CoreComp::WithHandle(h, body) => {
            for h2 in value_candidates(h) {
                out.push(CoreComp::WithHandle(h2, body.clone()));
            }
            for b in comp_candidates(body) {
                out.push(CoreComp::with_handle(h.clone(), b));
            }
        }
        CoreComp::Case {
            scrutinee,
            left,
            left_body,
            right,
            right_body,
        } => {
            for b in comp_candidates(left_body) {
                out.push(CoreComp::case(
                    scrutinee.clone(),
                    left.clone(),
                    b,
                    right.clone(),
                    (**right_body).clone(),
                ));
            }
            for b in comp_candidates(right_body) {
                out.push(CoreComp::case(
                    scrutinee.clone(),
                    left.clone(),
                    (**left_body).clone(),
                    right.clone(),
                    b,
                ));
            }
        }
        CoreComp::App(f, a) => {
            for f2 in value_candidates(f) {
                out.push(CoreComp::App(f2, a.clone()));
            }
            for a2 in value_candidates(a) {
                out.push(CoreComp::App(f.clone(), a2));
            }
        }
        CoreComp::Val(v) => out.extend(value_candidates(v).into_iter().map(CoreComp::Val)),
        CoreComp::Print(v) => out.extend(value_candidates(v).into_iter().map(CoreComp::Print)),
        _ => {}
    }
    out
}

pub fn value_candidates(v: &CoreValue) -> Vec<CoreValue> {
    let mut out = Vec::new();
    match v {
        CoreValue::Int(n) if *n != 0 => out.push(CoreValue::Int(0)),
        CoreValue::Str(s) if !s.is_empty() => out.push(CoreValue::Str(String::new())),
        CoreValue::Lam {
            param,
            param_ty,
            body,
        } => {
            for b in comp_candidates(body) {
                out.push(CoreValue::lam(param.clone(), param_ty.clone(), b));
            }
        }
        CoreValue::Handler(h) => {
            for b in comp_candidates(&h.val_body) {
                out.push(CoreValue::Handler(Box::new(Handler {
                    val_body: b,
                    ..(**h).clone()
                })));
            }
            for b in comp_candidates(&h.op_body) {
                out.push(CoreValue::Handler(Box::new(Handler {
                    op_body: b,
                    ..(**h).clone()
                })));
            }
        }
        CoreValue::Pair(a, b) => {
            for a2 in value_candidates(a) {
                out.push(CoreValue::pair(a2, (**b).clone()));
            }
            for b2 in value_candidates(b) {
                out.push(CoreValue::pair((**a).clone(), b2));
            }
        }
        _ => {}
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{gen_program, GenConfig};

    fn prints(e: &CoreComp) -> bool {
        e.to_string().contains("(print ")
    }

    #[test]
    fn shrinks_to_a_minimal_witness() {
        let p = (0..200)
            .map(|s| gen_program(&GenConfig::new(s, 20)))
            .find(|p| prints(&p.body) && p.body.size() > 30)
            .expect("a printing program");
        let (w, attempts) = shrink(&p, |q| prints(&q.body), MAX_SHRINK_ATTEMPTS);
        assert!(prints(&w.body));
        assert!(w.body.size() < p.body.size());
        assert!(infer_comp(&mut TypeCtx::new(), &w.body).is_ok());
        assert!(attempts <= MAX_SHRINK_ATTEMPTS);
        // small enough to read
        assert!(w.body.size() <= 5, "{}", w.body);
    }

    #[test]
    fn attempts_are_bounded() {
        let p = gen_program(&GenConfig::new(3, 20));
        let (_, attempts) = shrink(&p, |_| false, 5);
        assert!(attempts <= 5);
    }
}
