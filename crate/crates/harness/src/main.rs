use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use effws_core::delimcc_step::run_step_traced;
use effws_core::pipeline::{compile, run_core, Compiled, Semantics};
use effws_core::translate::{translate, translate_type};
use effws_core::{Outcome, DEFAULT_FUEL};
use effws_harness::diff::{diff_generated, diff_run, DiffReport};
use effws_harness::gen::{Feature, GenConfig};
use effws_harness::queens::{bench_queens, count_queens, BenchResult, Variant, BENCH_FUEL};

const EXIT_PROGRAM: u8 = 1;
const EXIT_DISAGREE: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "effws",
    version,
    about = "Effect handlers, delimited control and the translation between them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, desugar and typecheck a program; print its type.
    Check { file: PathBuf },
    /// Run a program along one route and print its output and value.
    Run(RunArgs),
    /// Translate a program to Core delimcc.
    Translate {
        file: PathBuf,
        /// Print the translated program instead of its type.
        #[arg(long)]
        emit: bool,
    },
    /// Compare the three routes on a file or on generated programs (JSON lines).
    Diff(DiffArgs),
    /// Solve n-queens with one variant.
    Bench(BenchArgs),
}

#[derive(Args)]
struct RunArgs {
    file: PathBuf,
    #[arg(long, default_value = "eff")]
    semantics: Semantics,
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    fuel: u64,
    /// Print the Core Eff program to stderr.
    #[arg(long)]
    dump_core: bool,
    /// Print the translated Core delimcc program to stderr.
    #[arg(long)]
    dump_delimcc: bool,
    /// Print each small-step configuration to stderr (first 10^4 only; `--semantics step`).
    #[arg(long)]
    trace_steps: bool,
}

#[derive(Args)]
struct DiffArgs {
    #[arg(required_unless_present = "gen", conflicts_with = "gen")]
    file: Option<PathBuf>,
    /// Use generated programs instead of a file.
    #[arg(long)]
    gen: bool,
    #[arg(long, default_value_t = 0, requires = "gen")]
    seed: u64,
    #[arg(long, default_value_t = 1, requires = "gen")]
    count: u64,
    #[arg(long, default_value_t = 20, requires = "gen")]
    size: usize,
    /// Restrict generation to these features (repeatable); all by default.
    #[arg(long = "feature", requires = "gen")]
    features: Vec<Feature>,
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    fuel: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "effect-backtrack")]
    variant: Variant,
    #[arg(long, default_value = "eff")]
    semantics: Semantics,
    #[arg(long, default_value_t = BENCH_FUEL)]
    fuel: u64,
    /// Count all solutions instead of finding the first.
    #[arg(long)]
    count: bool,
    #[arg(long)]
    json: bool,
}

/// A failure with its exit code; the message goes to stderr.
struct Fail(u8, String);

fn program_error(e: impl ToString) -> Fail {
    Fail(EXIT_PROGRAM, e.to_string())
}

fn load(file: &PathBuf) -> Result<Compiled, Fail> {
    let src = fs::read_to_string(file)
        .map_err(|e| Fail(EXIT_USAGE, format!("{}: {e}", file.display())))?;
    compile(&src).map_err(|e| program_error(format!("{}:{e}", file.display())))
}

fn outcome_code(o: &Outcome) -> u8 {
    match o {
        Outcome::Value { .. } => 0,
        _ => EXIT_PROGRAM,
    }
}

fn run(args: &RunArgs, out: &mut impl Write) -> Result<u8, Fail> {
    if args.trace_steps && args.semantics != Semantics::Step {
        return Err(Fail(
            EXIT_USAGE,
            "--trace-steps needs --semantics step".into(),
        ));
    }
    let c = load(&args.file)?;
    if args.dump_core {
        eprintln!("{}", c.core.body);
    }
    if args.dump_delimcc || args.trace_steps {
        let d = translate(&c.core).map_err(program_error)?;
        if args.dump_delimcc {
            eprintln!("{}", d.body);
        }
        if args.trace_steps {
            let (o, configs) = run_step_traced(&d, args.fuel);
            for (i, conf) in configs.iter().enumerate() {
                eprintln!("{i}: {conf}");
            }
            write!(out, "{}", o.golden_text()).map_err(program_error)?;
            return Ok(outcome_code(&o));
        }
    }
    let o = run_core(&c.core, args.semantics, args.fuel).map_err(program_error)?;
    write!(out, "{}", o.golden_text()).map_err(program_error)?;
    Ok(outcome_code(&o))
}

fn json_line(out: &mut impl Write, v: &impl serde::Serialize) -> Result<(), Fail> {
    let line = serde_json::to_string(v).map_err(program_error)?;
    writeln!(out, "{line}").map_err(program_error)
}

fn diff(args: &DiffArgs, out: &mut impl Write) -> Result<u8, Fail> {
    let reports: Vec<DiffReport> = match &args.file {
        Some(file) => {
            let c = load(file)?;
            vec![diff_run(&file.display().to_string(), &c.core, args.fuel)]
        }
        None => {
            let features = if args.features.is_empty() {
                Feature::ALL.to_vec()
            } else {
                args.features.clone()
            };
            let cfgs: Vec<GenConfig> = (0..args.count)
                .map(|i| GenConfig::with_features(args.seed.wrapping_add(i), args.size, &features))
                .collect();
            diff_generated(&cfgs, args.fuel)
        }
    };
    for r in &reports {
        json_line(out, r)?;
    }
    Ok(if reports.iter().all(DiffReport::is_clean) {
        0
    } else {
        EXIT_DISAGREE
    })
}

fn bench(args: &BenchArgs, out: &mut impl Write) -> Result<u8, Fail> {
    let r: BenchResult = if args.count {
        count_queens(args.n, args.variant, args.semantics, args.fuel)
    } else {
        bench_queens(args.n, args.variant, args.semantics, args.fuel)
    }
    .map_err(program_error)?;
    if args.json {
        json_line(out, &r)?;
    } else {
        let found = match (r.solutions, r.solved) {
            (Some(k), _) => format!("{k} solutions"),
            (None, true) => format!("solution {:?}", r.solution),
            (None, false) => "no solution".to_owned(),
        };
        writeln!(
            out,
            "{} n={}: {found} ({:.1} ms, {} steps)",
            r.variant, r.n, r.wall_ms, r.steps
        )
        .map_err(program_error)?;
    }
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<u8, Fail> {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Check { file } => {
            let c = load(&file)?;
            writeln!(out, "{}", c.ty).map_err(program_error)?;
            Ok(0)
        }
        Command::Run(args) => run(&args, &mut out),
        Command::Translate { file, emit } => {
            let c = load(&file)?;
            if emit {
                let d = translate(&c.core).map_err(program_error)?;
                writeln!(out, "{}", d.body).map_err(program_error)?;
            } else {
                writeln!(out, "{}", translate_type(&c.ty)).map_err(program_error)?;
            }
            Ok(0)
        }
        Command::Diff(args) => diff(&args, &mut out),
        Command::Bench(args) => bench(&args, &mut out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("effws: {msg}");
            ExitCode::from(code)
        }
    }
}
