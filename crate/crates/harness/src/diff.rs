//! Differential runs of one Core Eff program along the three routes, with the
//! type preservation check alongside.

use effws_core::core_delimcc::{check_delimcc, DTypeCtx};
use effws_core::core_eff::{infer_comp, CoreEffProgram, TypeCtx};
use effws_core::pipeline::{run_core, Semantics};
use effws_core::translate::{translate, translate_type};
use effws_core::Outcome;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gen::{gen_program, GenConfig};
use crate::shrink::{shrink, MAX_SHRINK_ATTEMPTS};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Agree,
    /// The first pair of routes, in `eff`, `trans`, `step` order, whose outcomes differ.
    Disagree(String, String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffReport {
    pub id: String,
    pub verdict: Verdict,
    /// Outcomes under `eff`, `trans` and `step`, in that order.
    pub outcomes: [Outcome; 3],
    /// Output of the `eff` route.
    pub trace: String,
    /// Final line of the `eff` route: the value or the error.
    pub value: String,
    /// Whether the translated program has the translated type.
    pub types_preserved: bool,
    /// What went wrong with the types, if anything.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type_error: Option<String>,
    /// Set when a mix of out-of-fuel and finished runs was retried with ten times the fuel.
    #[serde(default)]
    pub retried: bool,
    /// Shrunk program, in s-expression form, when the report is not clean.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl DiffReport {
    pub fn agrees(&self) -> bool {
        self.verdict == Verdict::Agree
    }

    /// Outcomes agree and types are preserved.
    pub fn is_clean(&self) -> bool {
        self.agrees() && self.types_preserved
    }
}

/// The type preservation check: the translation has the translated type.
pub fn check_types(p: &CoreEffProgram) -> Result<(), String> {
    let t = infer_comp(&mut TypeCtx::new(), &p.body).map_err(|e| format!("source: {e}"))?;
    let d = translate(p).map_err(|e| format!("translation: {e}"))?;
    let dt = check_delimcc(&mut DTypeCtx::new(), &d.body).map_err(|e| format!("target: {e}"))?;
    let want = translate_type(&t);
    if dt == want {
        Ok(())
    } else {
        Err(format!("translated program has type {dt}, expected {want}"))
    }
}

fn run_all(p: &CoreEffProgram, fuel: u64) -> [Outcome; 3] {
    Semantics::ALL.map(|sem| match run_core(p, sem, fuel) {
        Ok(o) => o,
        // Not reachable for typechecked programs; report it as a stuck run.
        Err(_) => Outcome::RuntimeError {
            error: effws_core::ErrorKind::Stuck,
            trace: vec![],
        },
    })
}

fn verdict(outcomes: &[Outcome; 3]) -> Verdict {
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if outcomes[i] != outcomes[j] {
            return Verdict::Disagree(Semantics::ALL[i].to_string(), Semantics::ALL[j].to_string());
        }
    }
    Verdict::Agree
}

fn mixed_fuel(outcomes: &[Outcome; 3]) -> bool {
    let starved = outcomes.iter().filter(|o| o.is_out_of_fuel()).count();
    starved > 0 && starved < 3
}

/// Outcomes with the single retry at ten times the fuel.
fn outcomes_with_retry(p: &CoreEffProgram, fuel: u64) -> ([Outcome; 3], bool) {
    let outcomes = run_all(p, fuel);
    if mixed_fuel(&outcomes) {
        (run_all(p, fuel.saturating_mul(10)), true)
    } else {
        (outcomes, false)
    }
}

fn clean(p: &CoreEffProgram, fuel: u64) -> bool {
    check_types(p).is_ok() && verdict(&outcomes_with_retry(p, fuel).0) == Verdict::Agree
}

/// Compare the three routes on `p`, shrinking on failure.
pub fn diff_run(id: &str, p: &CoreEffProgram, fuel: u64) -> DiffReport {
    let type_error = check_types(p).err();
    let (outcomes, retried) = outcomes_with_retry(p, fuel);
    let verdict = verdict(&outcomes);
    let witness = if verdict != Verdict::Agree || type_error.is_some() {
        let (w, _) = shrink(p, |q| !clean(q, fuel), MAX_SHRINK_ATTEMPTS);
        Some(w.body.to_string())
    } else {
        None
    };
    DiffReport {
        id: id.to_owned(),
        trace: outcomes[0].trace_text(),
        value: outcomes[0].headline(),
        verdict,
        outcomes,
        types_preserved: type_error.is_none(),
        type_error,
        retried,
        witness,
    }
}

/// Report id for a generated program.
pub fn gen_id(cfg: &GenConfig) -> String {
    format!("gen-{}-{}", cfg.label(), cfg.seed)
}

/// Generate and compare every configuration in parallel; reports come back in input order.
pub fn diff_generated(cfgs: &[GenConfig], fuel: u64) -> Vec<DiffReport> {
    cfgs.par_iter()
        .map(|cfg| diff_run(&gen_id(cfg), &gen_program(cfg), fuel))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use effws_core::pipeline::compile;
    use effws_core::{Observed, DEFAULT_FUEL};

    const READER: &str = include_str!("../tests/corpus/reader.effs");
    const TEST1: &str = include_str!("../tests/corpus/test1.effs");

    #[test]
    fn test1_agrees() {
        let r = diff_run("test1", &compile(TEST1).unwrap().core, DEFAULT_FUEL);
        assert!(r.is_clean());
        assert_eq!(r.trace, "acdbcd");
        assert_eq!(r.value, "()");
        assert_eq!(r.witness, None);
    }

    #[test]
    fn reader_agrees_on_21() {
        let r = diff_run("reader", &compile(READER).unwrap().core, DEFAULT_FUEL);
        assert!(r.is_clean());
        assert_eq!(r.outcomes[2].value(), Some(&Observed::Int(21)));
    }

    #[test]
    fn starved_runs_agree_on_running_out() {
        let r = diff_run("reader", &compile(READER).unwrap().core, 3);
        assert!(r.agrees());
        assert!(r.outcomes.iter().all(Outcome::is_out_of_fuel));
        assert!(!r.retried);
    }

    #[test]
    fn first_differing_pair_is_named() {
        let v = Outcome::Value {
            value: Observed::Int(1),
            trace: vec![],
        };
        let w = Outcome::Value {
            value: Observed::Int(2),
            trace: vec![],
        };
        assert_eq!(verdict(&[v.clone(), v.clone(), v.clone()]), Verdict::Agree);
        assert_eq!(
            verdict(&[v.clone(), v.clone(), w.clone()]),
            Verdict::Disagree("eff".into(), "step".into())
        );
        assert_eq!(
            verdict(&[v.clone(), w, v]),
            Verdict::Disagree("eff".into(), "trans".into())
        );
    }

    #[test]
    fn mixed_fuel_is_detected() {
        let v = Outcome::Value {
            value: Observed::Unit,
            trace: vec![],
        };
        assert!(mixed_fuel(&[v.clone(), Outcome::OutOfFuel, v.clone()]));
        assert!(!mixed_fuel(&[
            Outcome::OutOfFuel,
            Outcome::OutOfFuel,
            Outcome::OutOfFuel
        ]));
        assert!(!mixed_fuel(&[v.clone(), v.clone(), v]));
    }

    #[test]
    fn report_json_roundtrips() {
        let r = diff_run("test1", &compile(TEST1).unwrap().core, DEFAULT_FUEL);
        let text = serde_json::to_string(&r).unwrap();
        let back: DiffReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for field in ["id", "verdict", "outcomes", "trace", "value"] {
            assert!(v.get(field).is_some(), "{field}");
        }
        assert_eq!(v["outcomes"].as_array().unwrap().len(), 3);
        assert_eq!(v["verdict"], "agree");
    }

    #[test]
    fn batches_keep_input_order() {
        let cfgs: Vec<GenConfig> = (0..16).map(|s| GenConfig::new(s, 12)).collect();
        let reports = diff_generated(&cfgs, DEFAULT_FUEL);
        let ids: Vec<String> = reports.iter().map(|r| r.id.clone()).collect();
        let want: Vec<String> = cfgs.iter().map(gen_id).collect();
        assert_eq!(ids, want);
        assert!(reports.iter().all(DiffReport::is_clean));
    }
}
