//! Redex/context pairs for the two `sh0`/`pushpr` rewriting rules, and the
//! check that one rewrite leaves the denotation unchanged.

use effws_core::core_delimcc::{check_delimcc, DComp, DProgram, DType, DTypeCtx, DValue};
use effws_core::delimcc_denot::run_delimcc;
use effws_core::delimcc_step::rewrite::{plug, rewrite_once, CtxFrame};
use effws_core::delimcc_step::run_step;
use effws_core::prim::Prim;
use effws_core::{Name, Outcome};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct AdequacyCase {
    pub seed: u64,
    /// The whole program with the redex in place.
    pub before: DProgram,
    /// The same program after rewriting the redex once.
    pub after: DProgram,
    /// Whether the redex captures (`sh0`) rather than returns a value.
    pub captures: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdequacyResult {
    pub before: Outcome,
    pub after: Outcome,
}

struct Gen {
    rng: ChaCha8Rng,
    next: usize,
}

fn p() -> DValue {
    DValue::var("p")
}

fn q() -> DValue {
    DValue::var("q")
}

fn int(n: i64) -> DValue {
    DValue::Int(n)
}

impl Gen {
    fn fresh(&mut self, prefix: &str) -> Name {
        self.next += 1;
        Name::new(&format!("{prefix}{}", self.next))
    }

    fn small(&mut self) -> i64 {
        self.rng.random_range(0..10)
    }

    /// `let f = add x in f n`
    fn add(&mut self, x: DValue) -> DComp {
        let f = self.fresh("f");
        let n = self.small();
        DComp::let_(
            f.clone(),
            DComp::App(DValue::Prim(Prim::Add), x),
            DComp::App(DValue::Var(f), int(n)),
        )
    }

    fn print_then(&mut self, rest: DComp) -> DComp {
        let tag = ["a", "b", "c"][self.rng.random_range(0..3)];
        DComp::let_(self.fresh("u"), DComp::Print(DValue::Str(tag.into())), rest)
    }

    /// Body of a `let x = [] in body` frame.
    fn frame_body(&mut self, x: &Name) -> DComp {
        let xv = DValue::Var(x.clone());
        match self.rng.random_range(0..6) {
            0 => DComp::Vl(xv),
            1 | 2 => self.add(xv),
            3 => self.print_then(DComp::Vl(xv)),
            4 => {
                let k = self.fresh("k");
                DComp::sh0(p(), k.clone(), DType::Int, DComp::App(DValue::Var(k), xv))
            }
            _ => {
                let k = self.fresh("k");
                DComp::sh0(q(), k.clone(), DType::Int, DComp::App(DValue::Var(k), xv))
            }
        }
    }

    fn context(&mut self, depth: usize) -> Vec<CtxFrame> {
        (0..depth)
            .map(|_| {
                if self.rng.random_bool(0.25) {
                    CtxFrame::PushPr(q())
                } else {
                    let x = self.fresh("x");
                    let body = self.frame_body(&x);
                    CtxFrame::Let { binder: x, body }
                }
            })
            .collect()
    }

    /// Body of the captured `sh0 p (k. body)`.
    fn sh0_body(&mut self, k: &Name) -> DComp {
        let kv = DValue::Var(k.clone());
        let v = self.small();
        match self.rng.random_range(0..5) {
            0 => DComp::App(kv, int(v)),
            1 => {
                let a = self.fresh("a");
                DComp::let_(
                    a.clone(),
                    DComp::App(kv.clone(), int(v)),
                    DComp::App(kv, DValue::Var(a)),
                )
            }
            2 => DComp::Vl(int(v)),
            3 => self.print_then(DComp::App(kv, int(v))),
            _ => {
                let a = self.fresh("a");
                let rest = self.add(DValue::Var(a.clone()));
                DComp::let_(a, DComp::App(kv, int(v)), rest)
            }
        }
    }
}

/// Generate the case for one seed.
pub fn adequacy_case(seed: u64) -> AdequacyCase {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        next: 0,
    };
    let captures = g.rng.random_bool(0.8);
    let redex = if captures {
        let depth = g.rng.random_range(0..4);
        let cp = g.context(depth);
        let k = g.fresh("k");
        let body = g.sh0_body(&k);
        DComp::pushpr(p(), plug(&cp, DComp::sh0(p(), k, DType::Int, body)))
    } else {
        let v = g.small();
        DComp::pushpr(p(), DComp::Vl(int(v)))
    };
    let contractum = rewrite_once(&redex).expect("generated redexes rewrite");
    let depth = g.rng.random_range(0..3);
    let mut outer = g.context(depth);
    if g.rng.random_bool(0.7) {
        outer.insert(0, CtxFrame::PushPr(q()));
    }
    let close = |e: DComp| {
        DProgram::new(DComp::let_(
            "p",
            DComp::NewPr(DType::Int),
            DComp::let_("q", DComp::NewPr(DType::Int), plug(&outer, e)),
        ))
    };
    AdequacyCase {
        seed,
        before: close(redex),
        after: close(contractum),
        captures,
    }
}

/// Check one case: both sides have the same type and the same denotation,
/// and the small-step reducer agrees with the denotation of the redex side.
pub fn check_adequacy(case: &AdequacyCase, fuel: u64) -> Result<AdequacyResult, String> {
    let tb = check_delimcc(&mut DTypeCtx::new(), &case.before.body)
        .map_err(|e| format!("redex side: {e}"))?;
    let ta = check_delimcc(&mut DTypeCtx::new(), &case.after.body)
        .map_err(|e| format!("rewritten side: {e}"))?;
    if ta != tb {
        return Err(format!("rewrite changed the type from {tb} to {ta}"));
    }
    let before = run_delimcc(&case.before, fuel);
    let after = run_delimcc(&case.after, fuel);
    if before != after {
        return Err(format!(
            "seed {}: {} became {}",
            case.seed,
            before.golden_text(),
            after.golden_text()
        ));
    }
    let stepped = run_step(&case.before, fuel);
    if stepped != before {
        return Err(format!(
            "seed {}: small-step gives {}",
            case.seed,
            stepped.golden_text()
        ));
    }
    Ok(AdequacyResult { before, after })
}

#[cfg(test)]
mod tests {
    use super::*;
    use effws_core::DEFAULT_FUEL;

    #[test]
    fn cases_are_deterministic() {
        assert_eq!(adequacy_case(9), adequacy_case(9));
    }

    #[test]
    fn both_rules_occur() {
        let caps = (0..100).filter(|s| adequacy_case(*s).captures).count();
        assert!(caps > 50 && caps < 100, "{caps}");
    }

    #[test]
    fn first_hundred_hold() {
        for seed in 0..100 {
            let case = adequacy_case(seed);
            check_adequacy(&case, DEFAULT_FUEL).unwrap();
        }
    }

    #[test]
    fn outcomes_vary() {
        let mut seen = std::collections::HashSet::new();
        for seed in 0..100 {
            seen.insert(
                check_adequacy(&adequacy_case(seed), DEFAULT_FUEL)
                    .unwrap()
                    .before
                    .golden_text(),
            );
        }
        assert!(seen.len() > 20, "{}", seen.len());
    }

    #[test]
    fn a_wrong_contractum_is_caught() {
        let caught = (0..50)
            .filter(|s| {
                let mut case = adequacy_case(*s);
                case.after = adequacy_case(s + 1000).before;
                check_adequacy(&case, DEFAULT_FUEL).is_err()
            })
            .count();
        assert!(caught > 40, "{caught}");
    }
}
