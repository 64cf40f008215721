use std::path::PathBuf;
use std::process::{Command, Output};

use effws_harness::diff::DiffReport;
use effws_harness::queens::{no_attack, BenchResult};

fn effws(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_effws"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn corpus(name: &str) -> String {
    format!("{}/tests/corpus/{name}.effs", env!("CARGO_MANIFEST_DIR"))
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("effws-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_test1_on_every_route() {
    for sem in ["eff", "trans", "step"] {
        let o = effws(&["run", &corpus("test1"), "--semantics", sem]);
        assert_eq!(o.status.code(), Some(0), "{sem}");
        assert_eq!(stdout(&o), "acdbcd\n()\n", "{sem}");
    }
}

#[test]
fn check_prints_the_type() {
    let o = effws(&["check", &corpus("two-ref")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "((int * int) * int) * string\n");
}

#[test]
fn ill_typed_check_fails_with_a_location() {
    let path = scratch("bad.effs", "let x = 1 in\nx + \"a\"\n");
    let o = effws(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("type error at 2:"), "{err}");
}

#[test]
fn parse_errors_are_program_errors() {
    let path = scratch("parse.effs", "val (");
    let o = effws(&["run", path.to_str().unwrap(), "--semantics", "eff"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("1:6"));
}

#[test]
fn unhandled_operations_exit_1() {
    let path = scratch(
        "unhandled.effs",
        "effect e { op : int -> int }\ninstance r : e\nr#op 1\n",
    );
    let o = effws(&["run", path.to_str().unwrap(), "--semantics", "trans"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        &["run"][..],
        &["frobnicate"],
        &["run", "x.effs", "--semantics", "fast"],
        &["bench", "--n", "8", "--variant", "random"],
        &["run", "x.effs", "--trace-steps"],
    ] {
        let path = corpus("test1");
        let args: Vec<&str> = args
            .iter()
            .map(|a| if *a == "x.effs" { path.as_str() } else { a })
            .collect();
        assert_eq!(effws(&args).status.code(), Some(64), "{args:?}");
    }
}

#[test]
fn generated_diff_agrees() {
    let o = effws(&["diff", "--gen", "--seed", "7", "--count", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let reports: Vec<DiffReport> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(reports.len(), 100);
    assert!(reports.iter().all(DiffReport::agrees));
    assert_eq!(reports[0].id, "gen-nondet+state+dynamic-7");
}

#[test]
fn diff_of_a_file() {
    let o = effws(&["diff", &corpus("reader")]);
    assert_eq!(o.status.code(), Some(0));
    let r: DiffReport = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!(r.is_clean());
    assert_eq!(r.value, "21");
}

#[test]
fn bench_json() {
    let o = effws(&[
        "bench",
        "--n",
        "8",
        "--variant",
        "effect-backtrack",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r: BenchResult = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!(r.solved);
    assert!(no_attack(8, &r.solution));
}

#[test]
fn translate_emits_delimcc() {
    let o = effws(&["translate", &corpus("reader"), "--emit"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("pushpr"));
    let o = effws(&["translate", &corpus("reader")]);
    assert_eq!(stdout(&o), "int\n");
}

#[test]
fn trace_steps_goes_to_stderr() {
    let o = effws(&[
        "run",
        &corpus("reader"),
        "--semantics",
        "step",
        "--trace-steps",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "\n21\n");
    let lines = stderr(&o).lines().count();
    assert!(lines > 10 && lines <= 10_000, "{lines}");
}
