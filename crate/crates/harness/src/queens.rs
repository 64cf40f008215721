//! N-queens in three variants: a select effect whose handler resumes once per
//! free column, a fail effect with non-resuming handlers over explicit
//! candidates, and a plain Rust backtracker used as the oracle.
//!
//! The object language has no recursion, so the interpreted variants are
//! generated per board size with the rows unrolled.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use effws_core::pipeline::{compile, run_core_counted, PipelineError, Semantics};
use effws_core::{Observed, Outcome};
use serde::{Deserialize, Serialize};

pub const MAX_N: usize = 12;
pub const BENCH_FUEL: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    EffectBacktrack,
    FailOnly,
    HostNative,
}

impl Variant {
    pub const ALL: [Variant; 3] = [
        Variant::EffectBacktrack,
        Variant::FailOnly,
        Variant::HostNative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::EffectBacktrack => "effect-backtrack",
            Variant::FailOnly => "fail-only",
            Variant::HostNative => "host-native",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Variant, String> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown variant `{s}` (expected effect-backtrack, fail-only or host-native)"
                )
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub variant: Variant,
    pub n: usize,
    pub solved: bool,
    /// Column of the queen in each row, 1-based.
    pub solution: Vec<i64>,
    pub wall_ms: f64,
    /// Interpreter steps; 0 for host-native.
    pub steps: u64,
    /// Route used by the interpreted variants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semantics: Option<String>,
    /// Number of solutions, in counting mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solutions: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("board size {0} is outside 1..={MAX_N}")]
    Size(usize),
    #[error("the {0} variant has no counting mode")]
    NoCount(Variant),
    #[error("generated program is ill-formed: {0}")]
    Program(#[from] PipelineError),
    #[error("run did not produce a board: {0}")]
    Run(String),
}

/// Whether `sol` places one queen per row with no two attacking each other.
pub fn no_attack(n: usize, sol: &[i64]) -> bool {
    let ok_col = |c: i64| c >= 1 && c <= n as i64;
    sol.len() == n
        && sol.iter().all(|&c| ok_col(c))
        && (0..n).all(|i| {
            (i + 1..n).all(|j| {
                let d = (j - i) as i64;
                sol[i] != sol[j] && (sol[i] - sol[j]).abs() != d
            })
        })
}

fn safe(placed: &[i64], c: i64) -> bool {
    let row = placed.len() as i64;
    placed
        .iter()
        .enumerate()
        .all(|(j, &q)| q != c && (q - c).abs() != row - j as i64)
}

/// First solution in lexicographic order, by plain backtracking.
pub fn native_first(n: usize) -> Option<Vec<i64>> {
    fn go(n: usize, placed: &mut Vec<i64>) -> bool {
        if placed.len() == n {
            return true;
        }
        for c in 1..=n as i64 {
            if safe(placed, c) {
                placed.push(c);
                if go(n, placed) {
                    return true;
                }
                placed.pop();
            }
        }
        false
    }
    let mut placed = Vec::with_capacity(n);
    go(n, &mut placed).then_some(placed)
}

pub fn native_count(n: usize) -> u64 {
    fn go(n: usize, placed: &mut Vec<i64>) -> u64 {
        if placed.len() == n {
            return 1;
        }
        let mut total = 0;
        for c in 1..=n as i64 {
            if safe(placed, c) {
                placed.push(c);
                total += go(n, placed);
                placed.pop();
            }
        }
        total
    }
    go(n, &mut Vec::with_capacity(n))
}

fn board_ty(rows: usize) -> String {
    (2..=rows).fold("int".to_owned(), |t, _| format!("({t} * int)"))
}

fn board_val(rows: usize) -> String {
    (2..=rows).fold("q1".to_owned(), |t, i| format!("({t}, q{i})"))
}

/// Bitmask of the columns of row `i` (1-based) not attacked by `q1 .. q(i-1)`.
fn free_columns(n: usize, i: usize) -> String {
    let terms: Vec<String> = (1..=n)
        .map(|c| {
            let bit = 1u64 << (c - 1);
            let mut hits = Vec::new();
            for j in 1..i {
                let d = i - j;
                hits.push(format!("q{j} == {c}"));
                if c + d <= n {
                    hits.push(format!("q{j} == {}", c + d));
                }
                if c > d {
                    hits.push(format!("q{j} == {}", c - d));
                }
            }
            if hits.is_empty() {
                bit.to_string()
            } else {
                format!("(if {} then 0 else {bit})", hits.join(" || "))
            }
        })
        .collect();
    terms.join(" + ")
}

fn select_rows(n: usize) -> String {
    (1..=n)
        .map(|i| format!("  let q{i} = s#select ({}) in\n", free_columns(n, i)))
        .collect()
}

/// The select program: each row asks the handler for a column among the free
/// ones; the handler resumes with each candidate in turn until one succeeds.
pub fn effect_backtrack_source(n: usize) -> String {
    let t = format!("unit + {}", board_ty(n));
    let mut out =
        String::from("effect select { select : int -> int }\ninstance s : select\n\nhandle\n");
    out += &select_rows(n);
    out += &format!(
        "  inr[{t}] {}\nwith {{\n  | val x -> x\n  | s#select(m, k) ->\n",
        board_val(n)
    );
    out += &format!(
        "      let next = fun (c : int) -> fun (bit : int) -> fun (r : {t}) ->\n        \
         case r of {{ | inl u -> if band m bit == 0 then r else k c | inr b -> r }} in\n"
    );
    out += &format!("      let r0 = inl[{t}] () in\n");
    for c in 1..=n {
        out += &format!(
            "      let r{c} = next {c} {} r{} in\n",
            1u64 << (c - 1),
            c - 1
        );
    }
    out += &format!("      r{n}\n}}\n");
    out
}

/// Counting form of the select program: the handler sums over all resumptions.
pub fn effect_count_source(n: usize) -> String {
    let mut out =
        String::from("effect select { select : int -> int }\ninstance s : select\n\nhandle\n");
    out += &select_rows(n);
    out += "  ()\nwith {\n  | val u -> 1\n  | s#select(m, k) ->\n      ";
    let arms: Vec<String> = (1..=n)
        .map(|c| format!("(if band m {} == 0 then 0 else k {c})", 1u64 << (c - 1)))
        .collect();
    out += &arms.join("\n      + ");
    out += "\n}\n";
    out
}

/// Candidates for row `i`; `leaf` continues with `q1 .. qi` bound.
fn fail_candidates(n: usize, i: usize, leaf: &str, indent: usize) -> String {
    let pad = " ".repeat(indent);
    let t = board_ty(n);
    let hits: Vec<String> = (1..i)
        .map(|j| {
            format!(
                "q{j} == q{i} || q{j} - q{i} == {d} || q{i} - q{j} == {d}",
                d = i - j
            )
        })
        .collect();
    let cand = |c: usize| {
        if hits.is_empty() {
            format!("let q{i} = {c} in {leaf}")
        } else {
            format!(
                "let q{i} = {c} in if {} then absurd[{t}] (f#fail ()) else {leaf}",
                hits.join(" || ")
            )
        }
    };
    // Each candidate but the last runs under a handler that moves on to the
    // next one; a failing last candidate fails the whole row.
    let mut out = cand(n);
    for c in (1..n).rev() {
        out = format!("handle {} with {{\n{pad}  | val x -> x\n{pad}  | f#fail(u, k) ->\n{pad}    {out}\n{pad}}}", cand(c));
    }
    out
}

/// The fail-only program: one function per row, from the last row up.
pub fn fail_only_source(n: usize) -> String {
    let t = board_ty(n);
    let mut out = String::from("effect fail { fail : unit -> empty }\ninstance f : fail\n\n");
    for i in (2..=n).rev() {
        let params: String = (1..i).map(|j| format!("fun (q{j} : int) -> ")).collect();
        let leaf = if i == n {
            board_val(n)
        } else {
            let args: Vec<String> = (1..=i).map(|j| format!("q{j}")).collect();
            format!("row{} {}", i + 1, args.join(" "))
        };
        out += &format!(
            "let row{i} = {params}\n  {} in\n",
            fail_candidates(n, i, &leaf, 2)
        );
    }
    let leaf = if n == 1 {
        board_val(1)
    } else {
        "row2 q1".to_owned()
    };
    out += &format!(
        "handle\n  let b = {} in\n  inr[unit + {t}] b\nwith {{\n  | val x -> x\n  | f#fail(u, k) -> inl[unit + {t}] ()\n}}\n",
        fail_candidates(n, 1, &leaf, 2)
    );
    out
}

fn flatten(b: &Observed, out: &mut Vec<i64>) -> Option<()> {
    match b {
        Observed::Int(c) => out.push(*c),
        Observed::Pair(a, c) => {
            flatten(a, out)?;
            out.push(c.as_int()?);
        }
        _ => return None,
    }
    Some(())
}

fn board_of(outcome: &Outcome) -> Result<Option<Vec<i64>>, BenchError> {
    match outcome.value() {
        Some(Observed::Inl(_)) => Ok(None),
        Some(Observed::Inr(b)) => {
            let mut sol = Vec::new();
            flatten(b, &mut sol).ok_or_else(|| BenchError::Run(outcome.headline()))?;
            Ok(Some(sol))
        }
        _ => Err(BenchError::Run(outcome.headline())),
    }
}

fn run_source(src: &str, semantics: Semantics, fuel: u64) -> Result<(Outcome, u64), BenchError> {
    let prog = compile(src)?;
    Ok(run_core_counted(&prog.core, semantics, fuel).map_err(PipelineError::Type)?)
}

/// Solve the n-queens board with one variant and report the first solution.
pub fn bench_queens(
    n: usize,
    variant: Variant,
    semantics: Semantics,
    fuel: u64,
) -> Result<BenchResult, BenchError> {
    if !(1..=MAX_N).contains(&n) {
        return Err(BenchError::Size(n));
    }
    let start = Instant::now();
    let (sol, steps, route) = match variant {
        Variant::HostNative => (native_first(n), 0, None),
        Variant::EffectBacktrack | Variant::FailOnly => {
            let src = if variant == Variant::FailOnly {
                fail_only_source(n)
            } else {
                effect_backtrack_source(n)
            };
            let (outcome, steps) = run_source(&src, semantics, fuel)?;
            (board_of(&outcome)?, steps, Some(semantics.to_string()))
        }
    };
    Ok(BenchResult {
        variant,
        n,
        solved: sol.is_some(),
        solution: sol.unwrap_or_default(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        steps,
        semantics: route,
        solutions: None,
    })
}

/// Count all solutions. The fail-only variant has no counting form.
pub fn count_queens(
    n: usize,
    variant: Variant,
    semantics: Semantics,
    fuel: u64,
) -> Result<BenchResult, BenchError> {
    if !(1..=MAX_N).contains(&n) {
        return Err(BenchError::Size(n));
    }
    let start = Instant::now();
    let (count, steps, route) = match variant {
        Variant::HostNative => (native_count(n), 0, None),
        Variant::FailOnly => return Err(BenchError::NoCount(variant)),
        Variant::EffectBacktrack => {
            let (outcome, steps) = run_source(&effect_count_source(n), semantics, fuel)?;
            let count = outcome
                .value()
                .and_then(Observed::as_int)
                .and_then(|c| u64::try_from(c).ok())
                .ok_or_else(|| BenchError::Run(outcome.headline()))?;
            (count, steps, Some(semantics.to_string()))
        }
    };
    Ok(BenchResult {
        variant,
        n,
        solved: count > 0,
        solution: Vec::new(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        steps,
        semantics: route,
        solutions: Some(count),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use effws_core::DEFAULT_FUEL;

    #[test]
    fn no_attack_checks_rows_columns_and_diagonals() {
        assert!(no_attack(4, &[2, 4, 1, 3]));
        assert!(!no_attack(4, &[2, 4, 1, 1]));
        assert!(!no_attack(4, &[1, 2, 4, 3]));
        assert!(!no_attack(4, &[2, 4, 1]));
        assert!(!no_attack(4, &[2, 4, 1, 5]));
    }

    #[test]
    fn native_counts() {
        let counts: Vec<u64> = (1..=8).map(native_count).collect();
        assert_eq!(counts, [1, 0, 0, 2, 10, 4, 40, 92]);
        assert_eq!(native_first(4), Some(vec![2, 4, 1, 3]));
        assert_eq!(native_first(3), None);
    }

    #[test]
    fn small_boards_typecheck() {
        for n in 1..=5 {
            for src in [
                effect_backtrack_source(n),
                effect_count_source(n),
                fail_only_source(n),
            ] {
                compile(&src).unwrap_or_else(|e| panic!("n={n}: {e}\n{src}"));
            }
        }
    }

    #[test]
    fn one_and_three() {
        for v in Variant::ALL {
            let r = bench_queens(1, v, Semantics::Eff, DEFAULT_FUEL).unwrap();
            assert!(r.solved);
            assert_eq!(r.solution, [1]);
            let r = bench_queens(3, v, Semantics::Eff, DEFAULT_FUEL).unwrap();
            assert!(!r.solved, "{v}");
        }
    }

    #[test]
    fn interpreted_variants_find_the_first_solution() {
        for n in 4..=6 {
            for v in [Variant::EffectBacktrack, Variant::FailOnly] {
                for sem in Semantics::ALL {
                    let r = bench_queens(n, v, sem, DEFAULT_FUEL).unwrap();
                    assert_eq!(Some(r.solution.clone()), native_first(n), "{v} {sem} n={n}");
                    assert!(r.steps > 0);
                }
            }
        }
    }

    #[test]
    fn counts_match_native() {
        for n in 1..=6 {
            let r =
                count_queens(n, Variant::EffectBacktrack, Semantics::Eff, DEFAULT_FUEL).unwrap();
            assert_eq!(r.solutions, Some(native_count(n)), "n={n}");
        }
        assert!(count_queens(4, Variant::FailOnly, Semantics::Eff, DEFAULT_FUEL).is_err());
    }

    #[test]
    fn sizes_are_checked() {
        assert!(matches!(
            bench_queens(0, Variant::HostNative, Semantics::Eff, 1),
            Err(BenchError::Size(0))
        ));
        assert!(bench_queens(MAX_N + 1, Variant::HostNative, Semantics::Eff, 1).is_err());
    }

    #[test]
    fn starved_runs_report_an_error() {
        assert!(matches!(
            bench_queens(5, Variant::EffectBacktrack, Semantics::Eff, 10),
            Err(BenchError::Run(_))
        ));
    }

    #[test]
    fn variant_names_roundtrip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>(), Ok(v));
            assert_eq!(serde_json::to_value(v).unwrap(), v.name());
        }
        assert!("fast".parse::<Variant>().is_err());
    }
}
