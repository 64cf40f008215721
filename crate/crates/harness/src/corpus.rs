//! The golden corpus: `NAME.effs` sources next to `NAME.expected` outputs
//! (the output trace on one line, the value or error on the next).

use std::fs;
use std::io;
use std::path::Path;

use effws_core::core_delimcc::fixtures::exd;
use effws_core::delimcc_denot::run_delimcc;
use effws_core::delimcc_step::run_step;
use effws_core::pipeline::{compile, front, run_core, Semantics};
use effws_core::surface::desugar::desugar_multi_op;
use effws_core::surface::eval::run_surface;
use effws_core::Outcome;

pub const CORPUS_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/corpus");

/// Corpus programs whose effects have several operations.
pub const MULTI_OP: [&str; 3] = ["exeff", "test1", "test2"];

pub const EXD_EXPECTED: &str = "\n135\n";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub name: String,
    pub source: String,
    pub expected: String,
}

/// Every `.effs` file in `dir` with its `.expected` file, sorted by name.
pub fn load_corpus(dir: &Path) -> io::Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "effs") {
            let name = path
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            let source = fs::read_to_string(&path)?;
            let expected = fs::read_to_string(path.with_extension("expected"))?;
            out.push(CorpusEntry {
                name,
                source,
                expected,
            });
        }
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

pub fn load_default() -> io::Result<Vec<CorpusEntry>> {
    load_corpus(Path::new(CORPUS_DIR))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenCheck {
    pub name: String,
    pub route: String,
    pub actual: String,
    pub expected: String,
}

impl GoldenCheck {
    pub fn ok(&self) -> bool {
        self.actual == self.expected
    }
}

/// Run one entry along every route and compare with the expected text.
pub fn check_entry(e: &CorpusEntry, fuel: u64) -> Vec<GoldenCheck> {
    let compiled = compile(&e.source);
    Semantics::ALL
        .into_iter()
        .map(|sem| {
            let actual = match &compiled {
                Ok(c) => match run_core(&c.core, sem, fuel) {
                    Ok(o) => o.golden_text(),
                    Err(err) => format!("error: {err}"),
                },
                Err(err) => format!("error: {err}"),
            };
            GoldenCheck {
                name: e.name.clone(),
                route: sem.to_string(),
                actual,
                expected: e.expected.clone(),
            }
        })
        .collect()
}

/// The ExD fixture under both Core delimcc interpreters.
pub fn check_exd(fuel: u64) -> Vec<GoldenCheck> {
    let p = exd();
    [
        ("trans", run_delimcc(&p, fuel)),
        ("step", run_step(&p, fuel)),
    ]
    .into_iter()
    .map(|(route, o)| GoldenCheck {
        name: "ExD".into(),
        route: route.into(),
        actual: o.golden_text(),
        expected: EXD_EXPECTED.into(),
    })
    .collect()
}

/// Outcomes of a multi-operation program before and after `desugar_multi_op`:
/// the direct evaluation of the source first, then the direct evaluation of
/// the desugared program and its three routes.
pub fn desugar_outcomes(src: &str, fuel: u64) -> Result<Vec<(String, Outcome)>, String> {
    let p = front(src).map_err(|e| e.to_string())?;
    let single = desugar_multi_op(&p).map_err(|e| e.to_string())?;
    let c = compile(src).map_err(|e| e.to_string())?;
    let mut out = vec![
        ("source".to_owned(), run_surface(&p, fuel)),
        ("desugared".to_owned(), run_surface(&single, fuel)),
    ];
    for sem in Semantics::ALL {
        out.push((
            format!("desugared/{sem}"),
            run_core(&c.core, sem, fuel).map_err(|e| e.to_string())?,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use effws_core::DEFAULT_FUEL;

    #[test]
    fn corpus_is_complete() {
        let names: Vec<String> = load_default()
            .unwrap()
            .into_iter()
            .map(|e| e.name)
            .collect();
        for want in [
            "test1", "test2", "testn1", "testn2", "testn2'", "reader", "state", "two-ref", "exeff",
        ] {
            assert!(names.iter().any(|n| n == want), "{want}");
        }
    }

    #[test]
    fn golden_outputs() {
        for e in load_default().unwrap() {
            for c in check_entry(&e, DEFAULT_FUEL) {
                assert!(
                    c.ok(),
                    "{} via {}: {:?} != {:?}",
                    c.name,
                    c.route,
                    c.actual,
                    c.expected
                );
            }
        }
        assert!(check_exd(DEFAULT_FUEL).iter().all(GoldenCheck::ok));
    }

    #[test]
    fn a_wrong_expectation_fails() {
        let mut e = load_default()
            .unwrap()
            .into_iter()
            .find(|e| e.name == "test1")
            .unwrap();
        e.expected = "acdbdc\n()\n".into();
        assert!(check_entry(&e, DEFAULT_FUEL).iter().all(|c| !c.ok()));
    }

    #[test]
    fn desugaring_keeps_outcomes() {
        let corpus = load_default().unwrap();
        for name in MULTI_OP {
            let e = corpus.iter().find(|e| e.name == name).unwrap();
            let outs = desugar_outcomes(&e.source, DEFAULT_FUEL).unwrap();
            assert_eq!(outs.len(), 5);
            for (label, o) in &outs {
                assert_eq!(o.golden_text(), e.expected, "{name} {label}");
            }
        }
    }
}
