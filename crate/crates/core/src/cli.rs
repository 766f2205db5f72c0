//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::driver::{dump_graph, residualize, supercompile, Options, ScError};
use crate::encoding::encode_program;
use crate::selfint::run_via_interpreter;
use crate::semantics::{eval_call, EvalOutcome};
use crate::syntax::{analyze, parse_expr, parse_program, Item, Program};
use crate::verify::{lint_rule_tails, verify_model, Mode, ModelSpec, Verdict, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_SHOWN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "scverify", version, about = "Safety verification by supercompilation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a call on ground data.
    Run {
        file: PathBuf,
        #[arg(long)]
        entry: String,
        #[arg(long)]
        data: String,
        /// Rule applications allowed.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        via_interpreter: bool,
    },
    /// Print a program in its data encoding.
    Encode { file: PathBuf },
    /// Print the residual program of a call template.
    Supercompile {
        file: PathBuf,
        #[arg(long)]
        entry: String,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Check that no residual right-hand side contains False.
    Verify {
        file: PathBuf,
        #[arg(long, default_value = "Main")]
        entry: String,
        #[arg(long)]
        via_interpreter: bool,
        /// Without this, one round, and a second when False survives.
        #[arg(long)]
        rounds: Option<u32>,
        #[arg(long)]
        emit_residual: Option<PathBuf>,
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Print the machine-readable summary instead of the report.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Report variable multiplicities and clashing rule tails.
    Lint { file: PathBuf },
}

#[derive(Args, Debug, Clone, Copy)]
pub struct BudgetArgs {
    /// Maximum number of process graph nodes.
    #[arg(long)]
    pub budget: Option<usize>,
}

impl BudgetArgs {
    fn options(self) -> Options {
        let mut o = Options::default();
        if let Some(n) = self.budget {
            o.budget.max_nodes = n;
        }
        o
    }
}

struct Failure(i32, String);

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, msg.into())
}

fn load(path: &Path) -> Result<Program, Failure> {
    let src = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_program(&src).map_err(|e| usage(format!("{}:{e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Runs the command line `args` (program name first) and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    let io = |e: std::io::Error| usage(e.to_string());
    match cmd {
        Command::Run {
            file,
            entry,
            data,
            budget,
            via_interpreter,
        } => {
            let p = load(&file)?;
            let d = parse_expr(&data).map_err(|e| usage(format!("--data: {e}")))?;
            if !d.is_ground() || !d.is_passive() {
                return Err(usage("--data must be ground and passive"));
            }
            let outcome = if via_interpreter {
                run_via_interpreter(&p, &entry, &d, budget).map_err(|e| usage(e.to_string()))?
            } else {
                eval_call(&p, &entry, &[d], budget)
            };
            writeln!(out, "{outcome}").map_err(io)?;
            Ok(match outcome {
                EvalOutcome::Value(_) => EXIT_OK,
                EvalOutcome::Bottom { .. } => EXIT_NOT_SHOWN,
                EvalOutcome::Exhausted { .. } => EXIT_BUDGET,
            })
        }
        Command::Encode { file } => {
            let p = load(&file)?;
            let e = encode_program(&p).map_err(|e| usage(e.to_string()))?;
            writeln!(out, "{e}").map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Supercompile {
            file,
            entry,
            graph,
            budget,
        } => {
            let p = load(&file)?;
            let call = parse_expr(&entry).map_err(|e| usage(format!("--entry: {e}")))?;
            if !matches!(call.items(), [Item::Call(_)]) {
                return Err(usage("--entry must be a single call"));
            }
            let g = match supercompile(&p, &call, budget.options()) {
                Ok(g) => g,
                Err(ScError::Budget(b)) => {
                    if let Some(path) = graph {
                        write_file(&path, &pretty(&dump_graph(&b.graph)))?;
                    }
                    return Err(Failure(EXIT_BUDGET, format!("budget exhausted: {}", b.reason)));
                }
                Err(e) => return Err(usage(e.to_string())),
            };
            if let Some(path) = graph {
                write_file(&path, &pretty(&dump_graph(&g)))?;
            }
            let r = residualize(&g).map_err(|e| usage(e.to_string()))?;
            write!(out, "{r}").map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            file,
            entry,
            via_interpreter,
            rounds,
            emit_residual,
            graph,
            json,
            budget,
        } => {
            let p = load(&file)?;
            let name = file.file_stem().map_or("model".into(), |s| s.to_string_lossy().into_owned());
            let m = ModelSpec::from_first_rule(&name, p, &entry).map_err(|e| usage(e.to_string()))?;
            let opts = VerifyOptions {
                mode: if via_interpreter { Mode::ViaInterpreter } else { Mode::Direct },
                rounds: rounds.unwrap_or(0),
                sc: budget.options(),
            };
            let report = verify_model(&m, opts).map_err(|e| usage(e.to_string()))?;
            if let (Some(path), Some(g)) = (graph, &report.graph) {
                write_file(&path, &pretty(&dump_graph(g)))?;
            }
            if let (Some(path), Some(r)) = (emit_residual, report.verdict.residual()) {
                write_file(&path, &r.to_string())?;
            }
            if json {
                let s = serde_json::to_string_pretty(&report.summary()).expect("summary serializes");
                writeln!(out, "{s}").map_err(io)?;
            } else {
                let s = report.summary();
                writeln!(out, "model: {}", s.model).map_err(io)?;
                writeln!(out, "mode: {}", if via_interpreter { "via-interpreter" } else { "direct" }).map_err(io)?;
                writeln!(out, "verdict: {}", s.verdict).map_err(io)?;
                writeln!(out, "rounds: {}", s.rounds).map_err(io)?;
                writeln!(out, "nodes: {:?}", s.nodes).map_err(io)?;
                writeln!(out, "time: {} ms", s.wall_ms).map_err(io)?;
                for r in &s.offending {
                    writeln!(out, "offending: {r}").map_err(io)?;
                }
                if let Verdict::BudgetExhausted { reason, .. } = &report.verdict {
                    writeln!(out, "budget: {reason}").map_err(io)?;
                }
            }
            Ok(match report.verdict {
                Verdict::Safe { .. } => EXIT_OK,
                Verdict::NotShownSafe { .. } => EXIT_NOT_SHOWN,
                Verdict::BudgetExhausted { .. } => EXIT_BUDGET,
            })
        }
        Command::Lint { file } => {
            let p = load(&file)?;
            let a = analyze(&p);
            writeln!(out, "variables: {}", if a.all_linear() { "linear" } else { "repeated" }).map_err(io)?;
            let clashes = lint_rule_tails(&p);
            for c in &clashes {
                writeln!(
                    out,
                    "clash: {} rule {} and {} rule {} share right-hand side and remaining rules",
                    c.first.0,
                    c.first.1 + 1,
                    c.second.0,
                    c.second.1 + 1
                )
                .map_err(io)?;
            }
            writeln!(out, "rule tails: {}", if clashes.is_empty() { "distinct" } else { "clashing" }).map_err(io)?;
            Ok(if clashes.is_empty() { EXIT_OK } else { EXIT_NOT_SHOWN })
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("graph serializes")
}
