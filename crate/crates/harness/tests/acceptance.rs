//! Acceptance run: one PASS/FAIL line per criterion. Runs without the libtest
//! harness so the lines are always printed.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use effws_core::pipeline::Semantics;
use effws_core::DEFAULT_FUEL;
use effws_harness::adequacy::{adequacy_case, check_adequacy};
use effws_harness::corpus::{check_entry, check_exd, desugar_outcomes, load_default, MULTI_OP};
use effws_harness::diff::{diff_generated, DiffReport};
use effws_harness::gen::{Feature, GenConfig};
use effws_harness::queens::{
    bench_queens, count_queens, native_count, no_attack, Variant, BENCH_FUEL,
};

const GOLDEN: [(&str, &str); 9] = [
    ("test1", "acdbcd\n()\n"),
    ("test2", "bc;d;ac;d;\n()\n"),
    ("testn1", "b;a;\n()\n"),
    ("testn2", "b!a!\n()\n"),
    ("testn2'", "b!a!\n()\n"),
    ("reader", "\n21\n"),
    ("state", "\n((10, 10), 40)\n"),
    ("two-ref", "\n(((10, 10), 40), \"a\")\n"),
    ("exeff", "moo!1baa!122baa!12\n120\n"),
];

struct Verdict {
    ok: bool,
    detail: String,
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> (Verdict, Duration) {
    let start = Instant::now();
    let mut v = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took >= limit {
            v.ok = false;
            v.detail = format!("{}; over the {:.0?} budget", v.detail, limit);
        }
    }
    (v, took)
}

fn golden() -> Verdict {
    let corpus = match load_default() {
        Ok(c) => c,
        Err(e) => {
            return Verdict {
                ok: false,
                detail: format!("cannot load corpus: {e}"),
            }
        }
    };
    let mut bad = Vec::new();
    let mut checks = 0;
    for (name, want) in GOLDEN {
        let Some(e) = corpus.iter().find(|e| e.name == name) else {
            bad.push(format!("{name} missing"));
            continue;
        };
        if e.expected != want {
            bad.push(format!("{name}.expected differs from {want:?}"));
        }
        for c in check_entry(e, DEFAULT_FUEL) {
            checks += 1;
            if c.actual != want {
                bad.push(format!("{name} via {}: {:?}", c.route, c.actual));
            }
        }
    }
    for c in check_exd(DEFAULT_FUEL) {
        checks += 1;
        if !c.ok() {
            bad.push(format!("ExD via {}: {:?}", c.route, c.actual));
        }
    }
    Verdict {
        ok: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("{checks} byte-exact")
        } else {
            bad.join("; ")
        },
    }
}

fn generated_reports() -> Vec<(Feature, Vec<DiffReport>)> {
    Feature::ALL
        .into_iter()
        .map(|f| {
            let cfgs: Vec<GenConfig> = (0..1000).map(|seed| GenConfig::only(f, seed, 20)).collect();
            (f, diff_generated(&cfgs, DEFAULT_FUEL))
        })
        .collect()
}

fn meaning(reports: &[(Feature, Vec<DiffReport>)]) -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for (f, rs) in reports {
        let bad: Vec<&str> = rs
            .iter()
            .filter(|r| !r.agrees())
            .map(|r| r.id.as_str())
            .collect();
        ok &= bad.is_empty() && rs.len() == 1000;
        parts.push(if bad.is_empty() {
            format!("{f} {}/{}", rs.len(), rs.len())
        } else {
            format!("{f} disagree on {}", bad.join(","))
        });
    }
    Verdict {
        ok,
        detail: parts.join(", "),
    }
}

fn types(reports: &[(Feature, Vec<DiffReport>)]) -> Verdict {
    let bad: Vec<String> = reports
        .iter()
        .flat_map(|(_, rs)| rs.iter())
        .filter(|r| !r.types_preserved)
        .map(|r| format!("{}: {}", r.id, r.type_error.as_deref().unwrap_or("?")))
        .collect();
    let total: usize = reports.iter().map(|(_, rs)| rs.len()).sum();
    Verdict {
        ok: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("{total} programs, checked during the differential run")
        } else {
            bad.join("; ")
        },
    }
}

fn adequacy() -> Verdict {
    let mut bad = Vec::new();
    let mut captures = 0;
    for seed in 0..500 {
        let case = adequacy_case(seed);
        captures += usize::from(case.captures);
        if let Err(e) = check_adequacy(&case, DEFAULT_FUEL) {
            bad.push(e);
        }
    }
    Verdict {
        ok: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("500 pairs ({captures} capturing)")
        } else {
            bad.join("; ")
        },
    }
}

fn desugar() -> Verdict {
    let corpus = match load_default() {
        Ok(c) => c,
        Err(e) => {
            return Verdict {
                ok: false,
                detail: format!("cannot load corpus: {e}"),
            }
        }
    };
    let mut bad = Vec::new();
    for name in MULTI_OP {
        let Some(e) = corpus.iter().find(|e| e.name == name) else {
            bad.push(format!("{name} missing"));
            continue;
        };
        match desugar_outcomes(&e.source, DEFAULT_FUEL) {
            Ok(outs) => {
                let reference = outs[0].1.golden_text();
                for (label, o) in &outs[1..] {
                    if o.golden_text() != reference {
                        bad.push(format!(
                            "{name} {label}: {:?} vs {reference:?}",
                            o.golden_text()
                        ));
                    }
                }
            }
            Err(err) => bad.push(format!("{name}: {err}")),
        }
    }
    Verdict {
        ok: bad.is_empty(),
        detail: if bad.is_empty() {
            MULTI_OP.join(", ")
        } else {
            bad.join("; ")
        },
    }
}

fn queens() -> Verdict {
    let mut bad = Vec::new();
    let mut notes = Vec::new();
    for sem in Semantics::ALL {
        match bench_queens(8, Variant::EffectBacktrack, sem, BENCH_FUEL) {
            Ok(r) if r.solved && no_attack(8, &r.solution) => {
                notes.push(format!("n=8 {sem} {:?} {:.0}ms", r.solution, r.wall_ms));
            }
            Ok(r) => bad.push(format!("n=8 {sem}: solved={} {:?}", r.solved, r.solution)),
            Err(e) => bad.push(format!("n=8 {sem}: {e}")),
        }
    }
    for (n, want) in [(4, 2), (5, 10), (6, 4)] {
        match count_queens(n, Variant::EffectBacktrack, Semantics::Eff, BENCH_FUEL) {
            Ok(r) if r.solutions == Some(want) && native_count(n) == want => {
                notes.push(format!("n={n} {want}"))
            }
            Ok(r) => bad.push(format!(
                "n={n}: {:?} (host-native {})",
                r.solutions,
                native_count(n)
            )),
            Err(e) => bad.push(format!("n={n}: {e}")),
        }
    }
    Verdict {
        ok: bad.is_empty(),
        detail: if bad.is_empty() {
            notes.join(", ")
        } else {
            bad.join("; ")
        },
    }
}

fn properties() -> Verdict {
    let mut bad = Vec::new();
    let mut notes = Vec::new();
    for (name, suite) in common::SUITES {
        match suite(common::CASES) {
            Ok(n) if n >= common::MIN_CASES => notes.push(format!("{name} {n}")),
            Ok(n) => bad.push(format!("{name}: only {n} cases")),
            Err(e) => bad.push(format!("{name}: {e}")),
        }
    }
    Verdict {
        ok: bad.is_empty(),
        detail: if bad.is_empty() {
            notes.join(", ")
        } else {
            bad.join("; ")
        },
    }
}

fn report(n: u32, title: &str, (v, took): (Verdict, Duration)) -> bool {
    let mark = if v.ok { "PASS" } else { "FAIL" };
    println!(
        "{mark} {n} {title}: {} [{:.2}s]",
        v.detail,
        took.as_secs_f64()
    );
    v.ok
}

fn main() -> ExitCode {
    let mut all = true;
    all &= report(
        1,
        "golden corpus",
        timed(Some(Duration::from_secs(1)), golden),
    );
    let start = Instant::now();
    let reports = generated_reports();
    let gen_time = start.elapsed();
    let mut v = meaning(&reports);
    if gen_time >= Duration::from_secs(60) {
        v.ok = false;
        v.detail += "; over the 60s budget";
    }
    all &= report(2, "meaning preservation", (v, gen_time));
    all &= report(3, "type preservation", timed(None, || types(&reports)));
    all &= report(4, "adequacy", timed(None, adequacy));
    all &= report(5, "multi-op desugaring", timed(None, desugar));
    all &= report(6, "n-queens", timed(Some(Duration::from_secs(30)), queens));
    all &= report(7, "property suites", timed(None, properties));
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
