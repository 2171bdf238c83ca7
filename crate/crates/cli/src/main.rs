//! `cohere`: check, run, trace, infer and translate programs in the block
//! language.
//!
//! Exit codes: 0 ok, 1 diagnostics, 2 unreadable or unparsable input,
//! 3 a run got stuck, 4 a run ran out of fuel.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cohere::checker::{certify, check_localised, Certification, Diagnostic};
use cohere::decl::initial_store;
use cohere::dsl::{parse_source, print_program, print_statement, Program, SpanMap};
use cohere::modes::{run_program, translate_program, AnnotatedProgram, DeclBlock};
use cohere::semantics::{run, Outcome, Schedule, TraceStep};
use cohere::{OverlapRegistry, Statement, Store};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "cohere",
    version,
    about = "Validity checker and interpreter for coherence-annotated programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every block against its declared access modes.
    Check(Common),
    /// Run the program and print the final store.
    Run(Exec),
    /// Run the program, printing each reduction step.
    Trace(Exec),
    /// Print the program with overlap-inferred access modes added.
    Infer(Common),
    /// Print the effect-only translation of the program.
    Translate(Common),
}

#[derive(Args)]
struct Common {
    file: PathBuf,
    /// Input is a bare statement sequence without access modes.
    #[arg(long)]
    raw: bool,
    /// Newline-delimited JSON output.
    #[arg(long)]
    json: bool,
    /// Use the access modes as written, without the overlap rewrite.
    #[arg(long)]
    no_overlap: bool,
}

#[derive(Args)]
struct Exec {
    #[command(flatten)]
    common: Common,
    /// Step budget.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    fuel: u64,
    /// Answers for opaque conditions, e.g. `1101`; missing ones read as false.
    #[arg(long, value_parser = parse_schedule)]
    schedule: Option<Schedule>,
}

fn parse_schedule(bits: &str) -> Result<Schedule, String> {
    Schedule::parse(bits).ok_or_else(|| format!("`{bits}` is not a string of 0s and 1s"))
}

const EXIT_DIAGNOSTICS: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_STUCK: u8 = 3;
const EXIT_FUEL: u8 = 4;

struct Loaded {
    path: PathBuf,
    program: Program,
    spans: SpanMap,
}

fn load(c: &Common) -> Result<Loaded, ExitCode> {
    let text = fs::read_to_string(&c.file).map_err(|e| {
        eprintln!("cohere: cannot read {}: {e}", c.file.display());
        ExitCode::from(EXIT_INPUT)
    })?;
    let src = parse_source(&text, c.raw).map_err(|e| {
        if c.json {
            println!("{}", json!({"error": "parse", "line": e.pos.line, "col": e.pos.col, "message": e.message}));
        }
        eprintln!("{}:{e}", c.file.display());
        ExitCode::from(EXIT_INPUT)
    })?;
    Ok(Loaded {
        path: c.file.clone(),
        program: src.program,
        spans: src.spans,
    })
}

fn diagnostic_json(d: &Diagnostic, spans: &SpanMap) -> Value {
    let pos = spans.locate(d.location);
    json!({
        "rule": d.rule.code(),
        "severity": if d.rule.is_error() { "error" } else { "note" },
        "view": d.view.as_deref(),
        "line": pos.line,
        "col": pos.col,
        "message": d.message,
    })
}

fn print_diagnostic(d: &Diagnostic, path: &Path, spans: &SpanMap) {
    let pos = spans.locate(d.location);
    let severity = if d.rule.is_error() { "error" } else { "note" };
    println!("{}:{pos}: {severity}: {d}", path.display());
}

/// Certifies `p`, applying the overlap rewrite unless told not to.
fn certified(p: &AnnotatedProgram, c: &Common) -> Certification {
    let registry: OverlapRegistry = OverlapRegistry::from_layout(&p.layout);
    certify(p, &registry, !c.no_overlap)
}

fn report(cert: &Certification, c: &Common, l: &Loaded, quiet_ok: bool) {
    for d in cert.diagnostics.iter().chain(&cert.notes) {
        if c.json {
            println!("{}", diagnostic_json(d, &l.spans));
        } else {
            print_diagnostic(d, &l.path, &l.spans);
        }
    }
    if !quiet_ok && !c.json && cert.is_certified() {
        println!(
            "{}: {} block(s) certified",
            l.path.display(),
            cert.program.blocks.len()
        );
    }
}

fn check(c: &Common) -> Result<ExitCode, ExitCode> {
    let l = load(c)?;
    let diags = match &l.program {
        Program::Annotated(p) => {
            let cert = certified(p, c);
            report(&cert, c, &l, false);
            cert.diagnostics.len()
        }
        Program::Raw(r) => {
            let found = check_localised(&DeclBlock::new(Vec::new(), r.body.clone()), 0);
            for d in &found {
                if c.json {
                    println!("{}", diagnostic_json(d, &l.spans));
                } else {
                    print_diagnostic(d, &l.path, &l.spans);
                }
            }
            if found.is_empty() && !c.json {
                println!(
                    "{}: raw program, nothing declared to check",
                    l.path.display()
                );
            }
            found.len()
        }
    };
    Ok(if diags == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_DIAGNOSTICS)
    })
}

/// The program to execute or print: rewritten unless `--no-overlap`, or
/// `Err` with the conflict already reported.
fn prepared(p: &AnnotatedProgram, c: &Common, l: &Loaded) -> Result<AnnotatedProgram, ExitCode> {
    if c.no_overlap {
        return Ok(p.clone());
    }
    let cert = certified(p, c);
    if cert
        .diagnostics
        .iter()
        .any(|d| d.rule == cohere::RuleId::OverlapSiteConflict)
    {
        report(&cert, c, l, true);
        return Err(ExitCode::from(EXIT_DIAGNOSTICS));
    }
    Ok(cert.program)
}

fn store_lines(store: &Store) -> Vec<String> {
    store
        .iter()
        .map(|(k, p)| format!("{k} {} {}", p.local, p.remote))
        .collect()
}

fn store_json(store: &Store) -> Value {
    store
        .iter()
        .map(|(k, p)| {
            (
                k.to_string(),
                Value::String(format!("{}{}", p.local, p.remote)),
            )
        })
        .collect::<serde_json::Map<_, _>>()
        .into()
}

fn head_label(s: &Statement) -> String {
    match s {
        Statement::If(c, ..) => format!("if ({c})"),
        Statement::While(c, _) => format!("while ({c})"),
        other => other.to_string(),
    }
}

fn print_trace(trace: &[TraceStep], json: bool) {
    for (i, t) in trace.iter().enumerate() {
        if json {
            let delta: Vec<Value> = t
                .delta
                .iter()
                .map(|c| json!({"key": c.key.to_string(), "before": c.before.to_string(), "after": c.after.to_string()}))
                .collect();
            println!(
                "{}",
                json!({"step": i + 1, "rule": t.rule.to_string(), "stmt": head_label(&t.head), "delta": delta})
            );
        } else {
            let delta: Vec<String> = t
                .delta
                .iter()
                .map(|c| format!("{}: {} -> {}", c.key, c.before, c.after))
                .collect();
            let line = format!(
                "{:>4}  {:<13}  {:<24}  {}",
                i + 1,
                t.rule.to_string(),
                head_label(&t.head),
                delta.join(", ")
            );
            println!("{}", line.trim_end());
        }
    }
}

struct Finished {
    outcome: Outcome,
    store: Store,
    steps: usize,
    stopped_in: Option<usize>,
    abstraction_held: Option<bool>,
    trace: Vec<TraceStep>,
}

fn execute(e: &Exec, traced: bool) -> Result<ExitCode, ExitCode> {
    let c = &e.common;
    let l = load(c)?;
    let mut schedule = e.schedule.clone().unwrap_or_else(Schedule::empty);
    let fuel = e.fuel as usize;
    let fin = match &l.program {
        Program::Raw(r) => {
            let res = run(
                r.body.clone(),
                initial_store(&r.layout),
                fuel,
                &mut schedule,
            )
            .expect("fuel is at least 1");
            Finished {
                outcome: res.outcome,
                store: res.store,
                steps: res.steps,
                stopped_in: None,
                abstraction_held: None,
                trace: res.trace,
            }
        }
        Program::Annotated(p) => {
            let p = prepared(p, c, &l)?;
            let res = run_program(&p, fuel, &mut schedule, traced).expect("fuel is at least 1");
            Finished {
                abstraction_held: Some(res.abstraction_held()),
                outcome: res.outcome,
                store: res.store,
                steps: res.steps,
                stopped_in: res.stopped_in,
                trace: res.trace,
            }
        }
    };
    if traced {
        print_trace(&fin.trace, c.json);
    }
    if c.json {
        let stuck = match &fin.outcome {
            Outcome::Stuck(s) => json!({
                "key": s.key.to_string(),
                "effect": s.kind.to_string(),
                "site": format!("{:?}", s.site).to_lowercase(),
                "actual": s.actual.to_string(),
                "expected": s.expected.to_string(),
                "message": s.to_string(),
            }),
            _ => Value::Null,
        };
        println!(
            "{}",
            json!({
                "outcome": fin.outcome.label(),
                "steps": fin.steps,
                "block": fin.stopped_in,
                "stuck": stuck,
                "abstraction_held": fin.abstraction_held,
                "store": store_json(&fin.store),
            })
        );
    } else {
        match &fin.outcome {
            Outcome::Stuck(s) => match fin.stopped_in {
                Some(b) => println!("stuck in block {b} after {} step(s): {s}", fin.steps),
                None => println!("stuck after {} step(s): {s}", fin.steps),
            },
            other => println!("{} after {} step(s)", other.label(), fin.steps),
        }
        if let Some(held) = fin.abstraction_held {
            println!("abstraction {}", if held { "held" } else { "violated" });
        }
        for line in store_lines(&fin.store) {
            println!("{line}");
        }
    }
    Ok(match fin.outcome {
        Outcome::Done => ExitCode::SUCCESS,
        Outcome::Stuck(_) => ExitCode::from(EXIT_STUCK),
        Outcome::FuelExhausted => ExitCode::from(EXIT_FUEL),
    })
}

fn annotated<'a>(l: &'a Loaded, what: &str) -> Result<&'a AnnotatedProgram, ExitCode> {
    match &l.program {
        Program::Annotated(p) => Ok(p),
        Program::Raw(_) => {
            eprintln!("cohere: {what} needs a program with access modes, not --raw input");
            Err(ExitCode::from(EXIT_INPUT))
        }
    }
}

fn infer(c: &Common) -> Result<ExitCode, ExitCode> {
    let l = load(c)?;
    let p = prepared(annotated(&l, "infer")?, c, &l)?;
    let text = print_program(&p);
    if c.json {
        println!("{}", json!({ "program": text }));
    } else {
        print!("{text}");
    }
    Ok(ExitCode::SUCCESS)
}

fn translate(c: &Common) -> Result<ExitCode, ExitCode> {
    let l = load(c)?;
    let body = match &l.program {
        Program::Raw(r) => r.body.clone(),
        Program::Annotated(p) => {
            let p = prepared(p, c, &l)?;
            translate_program(&p).expect("parsed programs only name declared views")
        }
    };
    if c.json {
        println!("{}", json!({ "statement": body.to_string() }));
    } else {
        print!("{}", print_statement(&body));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check(c) => check(c),
        Command::Run(e) => execute(e, false),
        Command::Trace(e) => execute(e, true),
        Command::Infer(c) => infer(c),
        Command::Translate(c) => translate(c),
    };
    result.unwrap_or_else(|code| code)
}
