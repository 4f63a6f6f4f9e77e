//! `ratmodel`: run a problem file and report. Exit code 0 on success, 1 when
//! a mathematical check fails, 2 on input or library errors.

mod problem;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use problem::{input_error, InputError, Resolver};
use tasks::Options;

const REPORT_VERSION: &str = "ratmodel-report/1";

#[derive(Parser)]
#[command(name = "ratmodel", version, about = "Rational models from problem files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task named in the file.
    Run(Common),
    Cohomology(Common),
    MinimalModel(Common),
    LoopModel(Common),
    Suspend(Common),
    Glue(Common),
    Gamma(Common),
    Ss(Common),
    CheckAdmissible(Common),
}

#[derive(Args)]
struct Common {
    /// Problem file (JSON).
    file: PathBuf,
    /// Highest degree of interest; overrides params.upto.
    #[arg(long)]
    upto: Option<usize>,
    /// Cutoff for every algebra given by generators, overriding the file.
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Also run independent checks where available.
    #[arg(long)]
    verify: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Machine,
}

impl Command {
    fn split(&self) -> (Option<&'static str>, &Common) {
        match self {
            Command::Run(c) => (None, c),
            Command::Cohomology(c) => (Some("cohomology"), c),
            Command::MinimalModel(c) => (Some("minimal-model"), c),
            Command::LoopModel(c) => (Some("loop-model"), c),
            Command::Suspend(c) => (Some("suspend"), c),
            Command::Glue(c) => (Some("glue"), c),
            Command::Gamma(c) => (Some("gamma"), c),
            Command::Ss(c) => (Some("ss"), c),
            Command::CheckAdmissible(c) => (Some("check-admissible"), c),
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let (named, args) = cli.command.split();
    let text = std::fs::read_to_string(&args.file)
        .map_err(|e| input_error(format!("cannot read {}: {e}", args.file.display())))?;
    let problem = problem::parse(&text).with_context(|| format!("parsing {}", args.file.display()))?;
    let task = match (named, problem.task.as_deref()) {
        (Some(a), Some(b)) if a != b => bail!(input_error(format!("subcommand {a} does not match the file's task {b}"))),
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => bail!(input_error("the file names no task; pass it as a subcommand")),
    };
    let resolver = Resolver::new(&problem, args.cutoff);
    let opts = Options { upto: args.upto, verify: args.verify };
    let start = Instant::now();
    let out = tasks::run(task, &resolver, &opts)?;
    let elapsed = start.elapsed();
    let passed = out.verdicts.iter().all(|(_, ok)| *ok);
    match args.format {
        Format::Machine => {
            let verdicts: Map<String, Value> = out.verdicts.iter().map(|(k, v)| (k.clone(), Value::Bool(*v))).collect();
            let report = json!({
                "version": REPORT_VERSION,
                "task": task,
                "results": out.results,
                "verdicts": verdicts,
                "passed": passed,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Format::Human => {
            println!("task {task}");
            for line in &out.human {
                println!("{line}");
            }
            for (name, ok) in &out.verdicts {
                println!("{}: {name}", if *ok { "pass" } else { "FAIL" });
            }
            println!("time {:.3}s", elapsed.as_secs_f64());
        }
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let kind = if e.chain().any(|c| c.is::<InputError>()) { "input error" } else { "error" };
            eprintln!("{kind}: {e:#}");
            if let Some(ratmodel::Error::CutoffTooSmall { needed, .. }) = e.downcast_ref::<ratmodel::Error>() {
                eprintln!("rerun with --cutoff {needed} or raise the algebra's cutoff");
            }
            ExitCode::from(2)
        }
    }
}
