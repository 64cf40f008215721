//! Property suites shared by `properties.rs` and `acceptance.rs`. Each suite
//! runs a deterministic proptest runner and returns the number of cases it
//! checked.
#![allow(dead_code)]

use std::cell::Cell;
use std::rc::Rc;

use effws_core::core_delimcc::{check_value, DComp, DProgram, DTypeCtx, DValue};
use effws_core::delimcc_denot::{self as dd, pushpr_denot, DDenot, DKont, DRes};
use effws_core::delimcc_step::run_step;
use effws_core::eff_denot::{self as ed, lift_eff, Denot, EffRes, Kont};
use effws_core::pipeline::{run_core, Semantics};
use effws_core::surface::parser::parse;
use effws_core::surface::pretty::pretty;
use effws_core::{Observed, RunError, Session, DEFAULT_FUEL};
use effws_harness::gen::{gen_program, gen_surface, Feature, GenConfig};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const MIN_CASES: u32 = 200;
pub const CASES: u32 = 256;

pub type Suite = fn(u32) -> Result<u32, String>;

/// The suites, by name.
pub const SUITES: [(&str, Suite); 6] = [
    ("lift laws", lift_laws),
    ("pushpr identity", pushpr_identity),
    ("prompt-disjoint relay", prompt_disjoint_relay),
    ("instance freshness", instance_freshness),
    ("determinism", determinism),
    ("parser roundtrip", parser_roundtrip),
];

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

/// Run `test` on `cases` inputs drawn from `strategy`; report how many passed.
pub fn check<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<u32, String> {
    let passed = Cell::new(0);
    runner(cases)
        .run(&strategy, |v| {
            test(v)?;
            passed.set(passed.get() + 1);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(passed.get())
}

pub fn gen_config() -> impl Strategy<Value = GenConfig> {
    (
        any::<u64>(),
        0..=20usize,
        proptest::sample::subsequence(Feature::ALL.to_vec(), 0..=3),
    )
        .prop_map(|(seed, size, fs)| GenConfig::with_features(seed, size, &fs))
}

fn run_err(e: RunError) -> TestCaseError {
    TestCaseError::fail(format!("{e:?}"))
}

// ---- lift laws ----

/// A semantic function from integers, described so that proptest can print it.
#[derive(Clone, Debug)]
pub enum FnDesc {
    Add(i64),
    /// Request `arg` from the instance, then add to the reply.
    Ask(u64, i64),
    Print(String, i64),
}

/// A result: a value or a pending request whose continuation is `FnDesc`.
#[derive(Clone, Debug)]
pub enum ResDesc {
    V(i64),
    E(u64, i64, FnDesc),
}

fn int_of(d: &Denot<'_>) -> i64 {
    match d {
        Denot::Int(n) => *n,
        other => panic!("expected an integer, found {other:?}"),
    }
}

fn add<'a>(c: i64) -> Kont<'a> {
    Rc::new(move |x, _| Ok(EffRes::V(Denot::Int(int_of(&x).wrapping_add(c)))))
}

pub fn kont<'a>(f: &FnDesc) -> Kont<'a> {
    match f.clone() {
        FnDesc::Add(c) => add(c),
        FnDesc::Ask(inst, c) => Rc::new(move |x, _| {
            Ok(EffRes::E {
                inst,
                arg: x,
                k: add(c),
            })
        }),
        FnDesc::Print(t, c) => Rc::new(move |x, s| {
            s.print(&t);
            Ok(EffRes::V(Denot::Int(int_of(&x).wrapping_add(c))))
        }),
    }
}

pub fn res<'a>(r: &ResDesc) -> EffRes<'a> {
    match r {
        ResDesc::V(n) => EffRes::V(Denot::Int(*n)),
        ResDesc::E(inst, a, f) => EffRes::E {
            inst: *inst,
            arg: Denot::Int(*a),
            k: kont(f),
        },
    }
}

/// Requests made, final value and trace.
pub type Observation = (Vec<(u64, i64)>, Observed, Vec<String>);

/// Everything observable about a result: the requests made, the replies fed
/// back (a fixed function of instance and argument), the final value and the trace.
pub fn drive(r: Result<EffRes<'_>, RunError>, s: &mut Session) -> Result<Observation, RunError> {
    let mut r = r?;
    let mut asked = Vec::new();
    loop {
        match r {
            EffRes::V(v) => return Ok((asked, ed::observe(&v), s.take_trace())),
            EffRes::E { inst, arg, k } => {
                let a = int_of(&arg);
                asked.push((inst, a));
                r = k(Denot::Int(a.wrapping_mul(3).wrapping_add(inst as i64)), s)?;
            }
        }
    }
}

fn fn_desc() -> impl Strategy<Value = FnDesc> {
    prop_oneof![
        (-50i64..50).prop_map(FnDesc::Add),
        (1u64..4, -50i64..50).prop_map(|(i, c)| FnDesc::Ask(i, c)),
        ("[a-c]", -50i64..50).prop_map(|(t, c)| FnDesc::Print(t, c)),
    ]
}

fn res_desc() -> impl Strategy<Value = ResDesc> {
    prop_oneof![
        (-100i64..100).prop_map(ResDesc::V),
        (1u64..4, -100i64..100, fn_desc()).prop_map(|(i, a, f)| ResDesc::E(i, a, f)),
    ]
}

pub fn lift_laws(cases: u32) -> Result<u32, String> {
    check(
        cases,
        (-100i64..100, res_desc(), fn_desc(), fn_desc()),
        |(x, r, f, g)| {
            let obs = |e: Result<EffRes<'static>, RunError>| {
                drive(e, &mut Session::new(DEFAULT_FUEL)).map_err(run_err)
            };
            // lift f (V x) = f x
            let left = obs(lift_eff(
                kont(&f),
                EffRes::V(Denot::Int(x)),
                &mut Session::new(DEFAULT_FUEL),
            ))?;
            prop_assert_eq!(
                left,
                obs(kont(&f)(Denot::Int(x), &mut Session::new(DEFAULT_FUEL)))?
            );
            // lift return r = r
            let ret: Kont<'static> = Rc::new(|v, _| Ok(EffRes::V(v)));
            prop_assert_eq!(
                obs(lift_eff(ret, res(&r), &mut Session::new(DEFAULT_FUEL)))?,
                obs(Ok(res(&r)))?
            );
            // lift g (lift f r) = lift (lift g . f) r
            let mut s = Session::new(DEFAULT_FUEL);
            let lhs =
                lift_eff(kont(&g), res(&r), &mut s).and_then(|r1| lift_eff(kont(&f), r1, &mut s));
            let lhs = drive(lhs, &mut s).map_err(run_err)?;
            let (f2, g2) = (f.clone(), g.clone());
            let composed: Kont<'static> = Rc::new(move |v, s| {
                let r1 = kont(&g2)(v, s)?;
                lift_eff(kont(&f2), r1, s)
            });
            let mut s = Session::new(DEFAULT_FUEL);
            let rhs = lift_eff(composed, res(&r), &mut s);
            prop_assert_eq!(lhs, drive(rhs, &mut s).map_err(run_err)?);
            Ok(())
        },
    )
}

// ---- pushpr identity ----

/// A closed value of Core delimcc built from base values, pairs and injections.
pub fn dvalue() -> impl Strategy<Value = DValue> {
    let leaf = prop_oneof![
        Just(DValue::Unit),
        any::<i64>().prop_map(DValue::Int),
        "[a-z\"\\\\ ]{0,6}".prop_map(DValue::Str),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        (inner.clone(), inner).prop_map(|(a, b)| DValue::Pair(Box::new(a), Box::new(b)))
    })
}

pub fn pushpr_identity(cases: u32) -> Result<u32, String> {
    check(cases, (dvalue(), 1u64..5), |(v, p)| {
        // Denotationally, on the value itself.
        let mut s = Session::new(DEFAULT_FUEL);
        let d = dd::eval_value(&dd::Env::new(), &v).map_err(run_err)?;
        let want = dd::observe(&d);
        match pushpr_denot(p, DRes::V(d), &mut s).map_err(run_err)? {
            DRes::V(out) => prop_assert_eq!(&dd::observe(&out), &want),
            DRes::Bubble { .. } => {
                return Err(TestCaseError::fail("pushpr of a value made a bubble"))
            }
        }
        prop_assert_eq!(s.stats.body_applications, 0);
        // Syntactically, under both interpreters.
        let t = check_value(&mut DTypeCtx::new(), &v)
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        let plain = DProgram::new(DComp::Vl(v.clone()));
        let pushed = DProgram::new(DComp::let_(
            "p",
            DComp::NewPr(t),
            DComp::pushpr(DValue::var("p"), DComp::Vl(v.clone())),
        ));
        let expected = dd::run_delimcc(&plain, DEFAULT_FUEL);
        prop_assert_eq!(expected.value(), Some(&want));
        prop_assert_eq!(dd::run_delimcc(&pushed, DEFAULT_FUEL), expected.clone());
        prop_assert_eq!(run_step(&pushed, DEFAULT_FUEL), expected);
        Ok(())
    })
}

// ---- prompt-disjoint relay ----

pub fn prompt_disjoint_relay(cases: u32) -> Result<u32, String> {
    let strategy = (1u64..6, 1u64..6, any::<bool>(), any::<i64>())
        .prop_filter("distinct prompts", |(p, q, ..)| p != q);
    check(cases, strategy, |(p, q, act, x)| {
        let body: DKont<'static> = Rc::new(|_, _| Ok(DRes::V(DDenot::Unit)));
        let k: DKont<'static> = Rc::new(|c, _| Ok(DRes::V(c)));
        let bubble = DRes::Bubble {
            prompt: q,
            body: body.clone(),
            k,
            act_origin: act,
        };
        let mut s = Session::new(DEFAULT_FUEL);
        match pushpr_denot(p, bubble, &mut s).map_err(run_err)? {
            DRes::Bubble {
                prompt,
                body: b2,
                k: k2,
                act_origin,
            } => {
                prop_assert_eq!(prompt, q);
                prop_assert!(Rc::ptr_eq(&b2, &body), "body replaced");
                prop_assert_eq!(act_origin, act);
                prop_assert_eq!(s.stats.body_applications, 0);
                // The grown context still returns what the old one did.
                match k2(DDenot::Int(x), &mut s).map_err(run_err)? {
                    DRes::V(v) => prop_assert_eq!(dd::observe(&v), Observed::Int(x)),
                    DRes::Bubble { .. } => {
                        return Err(TestCaseError::fail("context made a bubble"))
                    }
                }
            }
            DRes::V(_) => return Err(TestCaseError::fail("relayed bubble was handled")),
        }
        Ok(())
    })
}

// ---- instance freshness ----

pub fn instance_freshness(cases: u32) -> Result<u32, String> {
    check(cases, gen_config(), |cfg| {
        let p = gen_program(&cfg);
        let (_, eff) = ed::run_eff_session(&p, DEFAULT_FUEL);
        let d =
            effws_core::translate::translate(&p).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let (_, trans) = dd::run_delimcc_session(&d, DEFAULT_FUEL);
        for ids in [&eff.stats.fresh_ids, &trans.stats.fresh_ids] {
            let mut sorted = ids.clone();
            sorted.sort_unstable();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), ids.len(), "repeated id in {:?}", ids);
            prop_assert!(!ids.contains(&0));
        }
        // One prompt per instance.
        prop_assert_eq!(&eff.stats.fresh_ids, &trans.stats.fresh_ids);
        Ok(())
    })
}

// ---- determinism ----

pub fn determinism(cases: u32) -> Result<u32, String> {
    check(cases, gen_config(), |cfg| {
        let p = gen_program(&cfg);
        prop_assert_eq!(&gen_program(&cfg), &p);
        for sem in Semantics::ALL {
            let a =
                run_core(&p, sem, DEFAULT_FUEL).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let b =
                run_core(&p, sem, DEFAULT_FUEL).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(a.golden_text(), b.golden_text());
            prop_assert_eq!(a, b);
        }
        Ok(())
    })
}

// ---- parser roundtrip ----

pub fn parser_roundtrip(cases: u32) -> Result<u32, String> {
    check(cases, gen_config(), |cfg| {
        let p = gen_surface(&cfg);
        let text = pretty(&p);
        let q = parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&q, &p, "{}", text);
        prop_assert_eq!(pretty(&q), text);
        Ok(())
    })
}
