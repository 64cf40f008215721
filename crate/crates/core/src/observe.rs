//! Observations shared by every evaluator: sessions, run errors and outcomes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const DEFAULT_FUEL: u64 = 10_000_000;

/// Nesting depth of interpreter recursion that is charged against the budget.
/// Exceeding it is reported as [`RunError::OutOfFuel`].
pub const MAX_DEPTH: u32 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error("out of fuel")]
    OutOfFuel,
    #[error("tag mismatch: {0}")]
    TagMismatch(String),
    #[error("absurd: a value of the empty type was eliminated")]
    Absurd,
    #[error("stuck: {0}")]
    Stuck(String),
}

impl RunError {
    pub fn kind(&self) -> Option<ErrorKind> {
        match self {
            RunError::OutOfFuel => None,
            RunError::TagMismatch(_) => Some(ErrorKind::TagMismatch),
            RunError::Absurd => Some(ErrorKind::Absurd),
            RunError::Stuck(_) => Some(ErrorKind::Stuck),
        }
    }
}

/// Counters collected while running. They are diagnostics, not part of an [`Outcome`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    /// Bubbles created by `sh0`.
    pub bubbles: u64,
    /// Bubbles whose `sh0` body was not of the `vl (act v k)` form.
    pub foreign_bubbles: u64,
    /// Times a bubble body was released by a matching `pushpr`.
    pub body_applications: u64,
    /// Every instance or prompt id handed out, in order.
    pub fresh_ids: Vec<u64>,
}

/// Per-run mutable state: fresh-id counter, output trace and step budget.
#[derive(Debug, Clone)]
pub struct Session {
    next_id: u64,
    trace: Vec<String>,
    fuel: u64,
    steps: u64,
    depth: u32,
    pub stats: Stats,
}

impl Session {
    pub fn new(fuel: u64) -> Session {
        Session {
            next_id: 0,
            trace: Vec::new(),
            fuel,
            steps: 0,
            depth: 0,
            stats: Stats::default(),
        }
    }

    pub fn fresh_id(&mut self) -> u64 {
        self.next_id += 1;
        self.stats.fresh_ids.push(self.next_id);
        self.next_id
    }

    pub fn tick(&mut self) -> Result<(), RunError> {
        if self.steps >= self.fuel {
            return Err(RunError::OutOfFuel);
        }
        self.steps += 1;
        Ok(())
    }

    pub fn print(&mut self, s: &str) {
        self.trace.push(s.to_owned());
    }

    pub fn trace(&self) -> &[String] {
        &self.trace
    }

    pub fn take_trace(&mut self) -> Vec<String> {
        std::mem::take(&mut self.trace)
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn fuel(&self) -> u64 {
        self.fuel
    }

    /// Run `f` one level deeper, growing the native stack on demand.
    pub fn nested<T>(
        &mut self,
        f: impl FnOnce(&mut Session) -> Result<T, RunError>,
    ) -> Result<T, RunError> {
        if self.depth >= MAX_DEPTH {
            return Err(RunError::OutOfFuel);
        }
        self.depth += 1;
        let r = stacker::maybe_grow(64 * 1024, 4 * 1024 * 1024, || f(self));
        self.depth -= 1;
        r
    }
}

/// A first-order picture of a final value, with the canonical rendering used in
/// every report: `()`, decimal ints, quoted strings, `(a, b)`, `inl v`, `inr v`,
/// `<fn>` and `<inst:N>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observed {
    Unit,
    Int(i64),
    Str(String),
    Pair(Box<Observed>, Box<Observed>),
    Inl(Box<Observed>),
    Inr(Box<Observed>),
    Fn,
    Inst(u64),
    /// Internal runtime objects that have no source-level counterpart (`<univ>`, `<free>`).
    Opaque(String),
}

impl Observed {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Observed::Int(n) => Some(*n),
            _ => None,
        }
    }
}

impl fmt::Display for Observed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observed::Unit => f.write_str("()"),
            Observed::Int(n) => write!(f, "{n}"),
            Observed::Str(s) => write_quoted(f, s),
            Observed::Pair(a, b) => write!(f, "({a}, {b})"),
            Observed::Inl(v) => write!(f, "inl {}", Paren(v)),
            Observed::Inr(v) => write!(f, "inr {}", Paren(v)),
            Observed::Fn => f.write_str("<fn>"),
            Observed::Inst(n) => write!(f, "<inst:{n}>"),
            Observed::Opaque(s) => write!(f, "<{s}>"),
        }
    }
}

/// Negative numbers under `inl`/`inr` are parenthesized so the rendering parses back.
struct Paren<'a>(&'a Observed);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Observed::Int(n) if *n < 0 => write!(f, "({n})"),
            v => write!(f, "{v}"),
        }
    }
}

pub fn write_quoted(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            '\r' => f.write_str("\\r")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed value rendering at byte {pos}")]
pub struct ObservedParseError {
    pub pos: usize,
}

impl FromStr for Observed {
    type Err = ObservedParseError;

    fn from_str(s: &str) -> Result<Observed, ObservedParseError> {
        let mut p = RenderParser {
            s: s.as_bytes(),
            pos: 0,
        };
        let v = p.value()?;
        p.ws();
        if p.pos != p.s.len() {
            return Err(p.err());
        }
        Ok(v)
    }
}

struct RenderParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl RenderParser<'_> {
    fn err(&self) -> ObservedParseError {
        ObservedParseError { pos: self.pos }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos] == b' ' {
            self.pos += 1;
        }
    }

    fn eat(&mut self, lit: &str) -> bool {
        self.ws();
        if self.s[self.pos..].starts_with(lit.as_bytes()) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn value(&mut self) -> Result<Observed, ObservedParseError> {
        self.ws();
        if self.eat("()") {
            return Ok(Observed::Unit);
        }
        if self.eat("<fn>") {
            return Ok(Observed::Fn);
        }
        if self.eat("<inst:") {
            let n = self.int()?;
            if !self.eat(">") {
                return Err(self.err());
            }
            return Ok(Observed::Inst(n as u64));
        }
        if self.eat("<") {
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos] != b'>' {
                self.pos += 1;
            }
            let body = String::from_utf8_lossy(&self.s[start..self.pos]).into_owned();
            if !self.eat(">") {
                return Err(self.err());
            }
            return Ok(Observed::Opaque(body));
        }
        if self.eat("inl ") {
            return Ok(Observed::Inl(Box::new(self.value()?)));
        }
        if self.eat("inr ") {
            return Ok(Observed::Inr(Box::new(self.value()?)));
        }
        if self.eat("\"") {
            return self.string();
        }
        if self.eat("(") {
            let a = self.value()?;
            if self.eat(")") {
                // parenthesized negative number
                return Ok(a);
            }
            if !self.eat(",") {
                return Err(self.err());
            }
            let b = self.value()?;
            if !self.eat(")") {
                return Err(self.err());
            }
            return Ok(Observed::Pair(Box::new(a), Box::new(b)));
        }
        Ok(Observed::Int(self.int()?))
    }

    fn int(&mut self) -> Result<i64, ObservedParseError> {
        self.ws();
        let start = self.pos;
        if self.pos < self.s.len() && self.s[self.pos] == b'-' {
            self.pos += 1;
        }
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or(ObservedParseError { pos: start })
    }

    fn string(&mut self) -> Result<Observed, ObservedParseError> {
        let mut out = Vec::new();
        loop {
            let Some(&c) = self.s.get(self.pos) else {
                return Err(self.err());
            };
            self.pos += 1;
            match c {
                b'"' => break,
                b'\\' => {
                    let Some(&e) = self.s.get(self.pos) else {
                        return Err(self.err());
                    };
                    self.pos += 1;
                    out.push(match e {
                        b'n' => b'\n',
                        b't' => b'\t',
                        b'r' => b'\r',
                        other => other,
                    });
                }
                c => out.push(c),
            }
        }
        String::from_utf8(out)
            .map(Observed::Str)
            .map_err(|_| self.err())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    TagMismatch,
    Absurd,
    Stuck,
}

/// The observable result of running a whole program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Value {
        #[serde(with = "rendered")]
        value: Observed,
        trace: Vec<String>,
    },
    UnhandledEffect {
        instance: u64,
        trace: Vec<String>,
    },
    RuntimeError {
        error: ErrorKind,
        trace: Vec<String>,
    },
    OutOfFuel,
}

impl Outcome {
    pub fn from_error(err: RunError, trace: Vec<String>) -> Outcome {
        match err.kind() {
            None => Outcome::OutOfFuel,
            Some(error) => Outcome::RuntimeError { error, trace },
        }
    }

    pub fn trace(&self) -> &[String] {
        match self {
            Outcome::Value { trace, .. }
            | Outcome::UnhandledEffect { trace, .. }
            | Outcome::RuntimeError { trace, .. } => trace,
            Outcome::OutOfFuel => &[],
        }
    }

    /// The trace concatenated, as used by golden files.
    pub fn trace_text(&self) -> String {
        self.trace().concat()
    }

    pub fn value(&self) -> Option<&Observed> {
        match self {
            Outcome::Value { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn is_out_of_fuel(&self) -> bool {
        matches!(self, Outcome::OutOfFuel)
    }

    /// One-line description of the non-trace part of the outcome.
    pub fn headline(&self) -> String {
        match self {
            Outcome::Value { value, .. } => value.to_string(),
            Outcome::UnhandledEffect { instance, .. } => {
                format!("unhandled effect <inst:{instance}>")
            }
            Outcome::RuntimeError { error, .. } => format!("runtime error: {}", error_name(*error)),
            Outcome::OutOfFuel => "out of fuel".to_owned(),
        }
    }

    /// Trace line followed by the headline, each newline-terminated. This is the
    /// format of `.expected` golden files and of `effws run`.
    pub fn golden_text(&self) -> String {
        format!("{}\n{}\n", self.trace_text(), self.headline())
    }
}

fn error_name(e: ErrorKind) -> &'static str {
    match e {
        ErrorKind::TagMismatch => "tag mismatch",
        ErrorKind::Absurd => "absurd",
        ErrorKind::Stuck => "stuck",
    }
}

mod rendered {
    use super::Observed;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Observed, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Observed, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering_is_canonical() {
        let v = Observed::Pair(
            Box::new(Observed::Pair(
                Box::new(Observed::Int(10)),
                Box::new(Observed::Int(10)),
            )),
            Box::new(Observed::Int(40)),
        );
        assert_eq!(v.to_string(), "((10, 10), 40)");
        assert_eq!(
            Observed::Inl(Box::new(Observed::Unit)).to_string(),
            "inl ()"
        );
        assert_eq!(Observed::Str("a\"b".into()).to_string(), "\"a\\\"b\"");
        assert_eq!(Observed::Inst(3).to_string(), "<inst:3>");
    }

    #[test]
    fn rendering_parses_back() {
        for text in [
            "()",
            "-4",
            "(1, \"x\\ny\")",
            "inl inr (-3)",
            "<fn>",
            "<inst:12>",
            "((10, 10), 40)",
            "<univ>",
        ] {
            let v: Observed = text.parse().unwrap();
            assert_eq!(v.to_string(), text);
        }
        assert!("(1, 2".parse::<Observed>().is_err());
    }

    #[test]
    fn fuel_is_exhausted_exactly() {
        let mut s = Session::new(2);
        assert!(s.tick().is_ok());
        assert!(s.tick().is_ok());
        assert_eq!(s.tick(), Err(RunError::OutOfFuel));
    }
}
