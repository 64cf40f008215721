mod common;

use common::*;
use effws_core::core_eff::{infer_comp, is_core_anf, CoreType, TypeCtx};
use effws_core::delimcc_denot::run_delimcc_session;
use effws_core::delimcc_step::{run_step, Machine, Step};
use effws_core::translate::translate;
use effws_core::{Name, DEFAULT_FUEL};
use effws_harness::gen::{gen_program, Feature, GenConfig};
use proptest::prelude::*;

fn suite(f: Suite) {
    let n = f(CASES).unwrap_or_else(|e| panic!("{e}"));
    assert!(n >= MIN_CASES, "only {n} cases");
}

#[test]
fn lift_laws_hold() {
    suite(lift_laws);
}

#[test]
fn pushpr_is_the_identity_on_values() {
    suite(pushpr_identity);
}

#[test]
fn bubbles_for_other_prompts_are_relayed() {
    suite(prompt_disjoint_relay);
}

#[test]
fn instances_are_fresh() {
    suite(instance_freshness);
}

#[test]
fn runs_are_deterministic() {
    suite(determinism);
}

#[test]
fn pretty_then_parse_is_the_identity() {
    suite(parser_roundtrip);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: CASES, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn lowered_programs_are_in_anf(cfg in gen_config()) {
        let p = gen_program(&cfg);
        prop_assert!(is_core_anf(&p.body), "{}", p.body);
    }

    #[test]
    fn step_agrees_with_denotation(cfg in gen_config()) {
        let d = translate(&gen_program(&cfg)).unwrap();
        let (o, _) = run_delimcc_session(&d, DEFAULT_FUEL);
        prop_assert_eq!(run_step(&d, DEFAULT_FUEL), o);
    }

    #[test]
    fn translated_bubbles_come_from_operations(cfg in gen_config()) {
        let d = translate(&gen_program(&cfg)).unwrap();
        let (_, s) = run_delimcc_session(&d, DEFAULT_FUEL);
        prop_assert_eq!(s.stats.foreign_bubbles, 0);
    }

    #[test]
    fn weakening_keeps_the_type(cfg in gen_config()) {
        let p = gen_program(&cfg);
        let t = infer_comp(&mut TypeCtx::new(), &p.body).unwrap();
        let mut ctx = TypeCtx::new();
        ctx.push(Name::new("unused_binder"), CoreType::Str);
        prop_assert_eq!(infer_comp(&mut ctx, &p.body).unwrap(), t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    // Runtime values carry no `dyn` annotation, so the configuration type is
    // only recomputed for programs without dynamic effects.
    #[test]
    fn every_step_keeps_the_answer_type(seed in any::<u64>(), size in 0..=8usize) {
        let cfg = GenConfig::with_features(seed, size, &[Feature::Nondet, Feature::State]);
        let d = translate(&gen_program(&cfg)).unwrap();
        let mut m = Machine::new(&d.body, 20_000);
        let t0 = m.answer_type().unwrap();
        while let Ok(Step::Continue) = m.step() {
            prop_assert_eq!(m.answer_type().unwrap(), t0.clone(), "at {}", m.describe());
        }
    }
}
