//! The `ealinfer` command line.

use std::fmt::Write;
use std::path::Path;

use clap::{Args, Parser, Subcommand};

use crate::eal::parse_formula;
use crate::export::{export_dot, export_json, InferenceReport};
use crate::lambda::parse_term;
use crate::neal::{find_redex, neal_typecheck, normalize_nonbeta, parse_judgment, reduce_step, Rule};
use crate::oracle::{enumerate_judgments, DecorationBudget};
use crate::pipeline::{run as run_pipeline, PipelineError, Request};
use crate::simple::{parse_simple_type, SimpleTypeError};
use crate::solver::{SolveOutcome, DEFAULT_BOUND};
use crate::synthesis::Options;

pub const EXIT_SAT: i32 = 0;
pub const EXIT_UNSAT: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_NOT_TYPABLE: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "ealinfer", version, about = "Elementary affine type inference for lambda terms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Infer elementary affine types for a lambda term
    Infer(InferArgs),
    /// Typecheck an affine term, optionally with a basis `x : A, ... |- M`
    Check {
        /// judgment text, or a file holding it
        input: String,
    },
    /// Apply one reduction rule at the leftmost-outermost redex
    Reduce {
        input: String,
        /// beta, dup, !-!, @-c, !-c, c-c, lambda-c
        #[arg(long, conflicts_with = "normalize")]
        rule: Option<Rule>,
        /// apply every rule except beta until none applies
        #[arg(long)]
        normalize: bool,
    },
    /// List the judgments of all decorations within a box budget
    Oracle {
        term: String,
        #[arg(long, default_value_t = 1)]
        max_boxes: usize,
    },
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// lambda term, or a file holding it
    pub term: String,
    /// simple type to infer at (default: the principal type)
    #[arg(long = "type")]
    pub ty: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub solutions: usize,
    #[arg(long, env = "EALINFER_BOUND", default_value_t = DEFAULT_BOUND, value_parser = clap::value_parser!(u64).range(1..))]
    pub bound: u64,
    /// fix the affine type, e.g. "!(a -o a) -o !(a -o a)"
    #[arg(long)]
    pub pin_eal: Option<String>,
    #[arg(long)]
    pub json: bool,
    /// write the first solution's decorated tree here
    #[arg(long)]
    pub dot: Option<String>,
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn fail(code: i32, msg: impl std::fmt::Display) -> Output {
        Output { code, stdout: String::new(), stderr: format!("error: {msg}\n") }
    }
}

fn source(arg: &str) -> Result<String, String> {
    let p = Path::new(arg);
    if p.is_file() {
        std::fs::read_to_string(p).map(|s| s.trim().to_string()).map_err(|e| format!("{arg}: {e}"))
    } else {
        Ok(arg.to_string())
    }
}

pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Output { code, stdout: text, stderr: String::new() }
            } else {
                Output { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match cli.command {
        Command::Infer(a) => infer(&a),
        Command::Check { input } => check(&input),
        Command::Reduce { input, rule, normalize } => reduce(&input, rule, normalize),
        Command::Oracle { term, max_boxes } => oracle(&term, max_boxes),
    }
}

fn infer(a: &InferArgs) -> Output {
    let text = match source(&a.term) {
        Ok(t) => t,
        Err(e) => return Output::fail(EXIT_USAGE, e),
    };
    let term = match parse_term(&text) {
        Ok(t) => t,
        Err(e) => return Output::fail(EXIT_USAGE, format!("term: {e}")),
    };
    let sigma = match a.ty.as_deref().map(parse_simple_type).transpose() {
        Ok(s) => s,
        Err(e) => return Output::fail(EXIT_USAGE, format!("--type: {e}")),
    };
    let pin = match a.pin_eal.as_deref().map(parse_formula).transpose() {
        Ok(p) => p,
        Err(e) => return Output::fail(EXIT_USAGE, format!("--pin-eal: {e}")),
    };
    let req = Request {
        sigma: sigma.as_ref(),
        pin: pin.as_ref(),
        solutions: a.solutions.max(1),
        bound: a.bound,
        options: Options { trace: a.trace, ..Options::default() },
    };
    let run = match run_pipeline(&term, &req) {
        Ok(r) => r,
        Err(PipelineError::Simple(e @ SimpleTypeError::NotSimplyTypable(_))) => return Output::fail(EXIT_NOT_TYPABLE, e),
        Err(e) => return Output::fail(EXIT_USAGE, e),
    };
    let code = match run.outcome {
        SolveOutcome::Sat(_) => EXIT_SAT,
        SolveOutcome::Unsat(_) => EXIT_UNSAT,
        SolveOutcome::Unknown(_) => EXIT_UNKNOWN,
    };
    let mut out = Output { code, ..Output::default() };
    let s = &mut out.stdout;
    if a.trace {
        for l in &run.inference.trace {
            let _ = writeln!(s, "{l}");
        }
    }
    let report = InferenceReport::from_run(&run, a.bound);
    if a.json {
        s.push_str(&export_json(&report));
        s.push('\n');
    } else {
        let _ = writeln!(s, "term: {}", report.term);
        let _ = writeln!(s, "simple type: {}", report.simple_type);
        let _ = writeln!(s, "eal type: {}", run.inference.ty.short());
        for b in &run.inference.base {
            let _ = writeln!(s, "base: {} : {}", b.0, b.1.short());
        }
        let _ = writeln!(s, "constraints:");
        for c in &report.constraints {
            let _ = writeln!(s, "  {c}");
        }
        let _ = writeln!(s, "outcome: {}", report.outcome);
        if let Some(c) = &report.certificate {
            let _ = writeln!(s, "certificate: {} contradicts {}", c.equality, c.contradicts);
        }
        if let SolveOutcome::Unknown(b) = run.outcome {
            let _ = writeln!(s, "no solution with every variable at most {b}");
        }
        for (i, sol) in report.solutions.iter().enumerate() {
            let v: Vec<String> = sol.valuation.iter().filter(|(_, n)| **n > 0).map(|(k, n)| format!("{k}={n}")).collect();
            let _ = writeln!(s, "solution {}: {}", i + 1, if v.is_empty() { "all zero".to_string() } else { v.join(" ") });
            for (k, t) in &sol.basis {
                let _ = writeln!(s, "  {k} : {t}");
            }
            let _ = writeln!(s, "  type: {}", sol.concrete_type);
            if let Some(w) = &sol.witness {
                let _ = writeln!(s, "  witness: {w}");
            }
        }
    }
    for (i, sol) in run.solutions.iter().enumerate() {
        if let Err(e) = &sol.witness {
            let _ = writeln!(out.stderr, "warning: solution {}: {e}", i + 1);
        }
    }
    if let Some(path) = &a.dot {
        match run.solutions.first() {
            Some(sol) => {
                if let Err(e) = std::fs::write(path, export_dot(&run.inference, &sol.valuation)) {
                    let _ = writeln!(out.stderr, "error: {path}: {e}");
                }
            }
            None => {
                let _ = writeln!(out.stderr, "warning: no solution to draw");
            }
        }
    }
    out
}

fn check(input: &str) -> Output {
    let text = match source(input) {
        Ok(t) => t,
        Err(e) => return Output::fail(EXIT_USAGE, e),
    };
    let (basis, p) = match parse_judgment(&text) {
        Ok(j) => j,
        Err(e) => return Output::fail(EXIT_USAGE, e),
    };
    match neal_typecheck(&basis, &p) {
        Ok(ty) => Output { code: 0, stdout: format!("{}\n", ty.canonical()), stderr: String::new() },
        Err(e) => Output::fail(1, e),
    }
}

fn reduce(input: &str, rule: Option<Rule>, normalize: bool) -> Output {
    let text = match source(input) {
        Ok(t) => t,
        Err(e) => return Output::fail(EXIT_USAGE, e),
    };
    let (_, p) = match parse_judgment(&text) {
        Ok(j) => j,
        Err(e) => return Output::fail(EXIT_USAGE, e),
    };
    let result = match (rule, normalize) {
        (_, true) => normalize_nonbeta(&p),
        (Some(r), false) => match find_redex(&p, r) {
            Some(pos) => reduce_step(&p, r, &pos),
            None => Err(crate::neal::NealError::NoRedex),
        },
        (None, false) => return Output::fail(EXIT_USAGE, "give --rule or --normalize"),
    };
    match result {
        Ok(q) => Output { code: 0, stdout: format!("{q}\n"), stderr: String::new() },
        Err(e) => Output::fail(1, e),
    }
}

fn oracle(input: &str, max_boxes: usize) -> Output {
    let text = match source(input) {
        Ok(t) => t,
        Err(e) => return Output::fail(EXIT_USAGE, e),
    };
    let term = match parse_term(&text) {
        Ok(t) => t,
        Err(e) => return Output::fail(EXIT_USAGE, e),
    };
    if let Err(e) = crate::simple::principal_type(&term) {
        return Output::fail(EXIT_NOT_TYPABLE, e);
    }
    match enumerate_judgments(&term, DecorationBudget::uniform(max_boxes)) {
        Ok(js) => {
            let mut s = String::new();
            for j in js {
                let _ = writeln!(s, "{j}");
            }
            Output { code: 0, stdout: s, stderr: String::new() }
        }
        Err(e) => Output::fail(EXIT_UNKNOWN, e),
    }
}
