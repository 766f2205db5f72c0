//! Safety as syntax: supercompile a model and look for `False` in the
//! residual right-hand sides.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::driver::{residualize, supercompile, GraphStats, Options, ProcessGraph, ResidualError, ScError, BOTTOM_FUNCTION};
use crate::encoding::EncodingError;
use crate::selfint::{int_args, int_source, PROGRAM_NAME};
use crate::syntax::{render_rule, Expr, Item, Name, Program, Rule, Symbol};

/// The identifier whose absence from residual right-hand sides is the
/// safety certificate.
pub const FALSE: &str = "False";

#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub name: String,
    pub program: Program,
    pub entry: Name,
    /// Argument template; its variables are unknown input.
    pub entry_shape: Expr,
}

impl ModelSpec {
    pub fn new(name: &str, program: Program, entry: &str, entry_shape: Expr) -> Result<ModelSpec, VerifyError> {
        let def = program
            .get(entry)
            .ok_or_else(|| VerifyError::Model(format!("entry function {entry} is not defined")))?;
        if def.arity != 1 {
            return Err(VerifyError::Model(format!("entry function {entry} must be unary")));
        }
        if !entry_shape.is_passive() {
            return Err(VerifyError::Model("entry template must be passive".into()));
        }
        Ok(ModelSpec {
            name: name.to_string(),
            program,
            entry: entry.into(),
            entry_shape,
        })
    }

    /// The template of the entry's first rule with its variables kept,
    /// e.g. `(e.time) : (e.is)` for the Synapse model.
    pub fn from_first_rule(name: &str, program: Program, entry: &str) -> Result<ModelSpec, VerifyError> {
        let shape = program
            .get(entry)
            .and_then(|d| d.rules.first())
            .map(|r| r.patterns[0].expr().clone())
            .ok_or_else(|| VerifyError::Model(format!("entry function {entry} is not defined")))?;
        ModelSpec::new(name, program, entry, shape)
    }

    pub fn entry_call(&self) -> Expr {
        Expr::call(&self.entry, vec![self.entry_shape.clone()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Direct,
    ViaInterpreter,
}

#[derive(Debug, Clone)]
pub struct FalseCheck {
    pub rhs_clean: bool,
    pub offending: Vec<Rule>,
    /// `False` anywhere, patterns included.
    pub anywhere: bool,
}

fn mentions(e: &Expr, sym: &Symbol) -> bool {
    e.contains_symbol(sym)
}

pub fn check_no_false(p: &Program) -> FalseCheck {
    let sym = Symbol::ident(FALSE);
    let offending: Vec<Rule> = p.rules().filter(|r| mentions(&r.rhs, &sym)).cloned().collect();
    let anywhere = !offending.is_empty() || p.rules().any(|r| r.patterns.iter().any(|q| mentions(q.expr(), &sym)));
    FalseCheck {
        rhs_clean: offending.is_empty(),
        offending,
        anywhere,
    }
}

/// Rules `(f, i)` and `(g, j)` whose right-hand side and following rules
/// coincide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clash {
    pub first: (Name, usize),
    pub second: (Name, usize),
}

pub fn lint_rule_tails(p: &Program) -> Vec<Clash> {
    type Tail<'a> = (&'a Expr, Vec<(Vec<&'a Expr>, &'a Expr)>);
    let mut seen: Vec<((Name, usize), Tail)> = Vec::new();
    let mut clashes = Vec::new();
    for def in &p.defs {
        for (i, rule) in def.rules.iter().enumerate() {
            let rest = def.rules[i + 1..]
                .iter()
                .map(|r| (r.patterns.iter().map(|q| q.expr()).collect(), &r.rhs))
                .collect();
            let key: Tail = (&rule.rhs, rest);
            for (at, other) in &seen {
                if *other == key {
                    clashes.push(Clash {
                        first: at.clone(),
                        second: (def.name.clone(), i),
                    });
                }
            }
            seen.push(((def.name.clone(), i), key));
        }
    }
    clashes
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    pub mode: Mode,
    /// Supercompilation rounds; later rounds take the previous residual.
    /// 0 runs one round and escalates to a second when `False` survives.
    pub rounds: u32,
    pub sc: Options,
}

#[derive(Debug, Clone)]
pub enum Verdict {
    Safe { residual: Program, rounds: u32 },
    NotShownSafe { residual: Program, offending: Vec<Rule>, rounds: u32 },
    BudgetExhausted { reason: String, stats: GraphStats, round: u32 },
}

impl Verdict {
    pub fn is_safe(&self) -> bool {
        matches!(self, Verdict::Safe { .. })
    }

    pub fn residual(&self) -> Option<&Program> {
        match self {
            Verdict::Safe { residual, .. } | Verdict::NotShownSafe { residual, .. } => Some(residual),
            Verdict::BudgetExhausted { .. } => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Safe { .. } => "safe",
            Verdict::NotShownSafe { .. } => "not-shown-safe",
            Verdict::BudgetExhausted { .. } => "budget-exhausted",
        }
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("model: {0}")]
    Model(String),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Residual(#[from] ResidualError),
    #[error("{0}")]
    Supercompile(String),
}

#[derive(Debug, Clone)]
pub struct Report {
    pub model: String,
    pub mode: Mode,
    pub verdict: Verdict,
    pub rounds: Vec<GraphStats>,
    /// Graph of the last completed round.
    pub graph: Option<ProcessGraph>,
    pub wall_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub model: String,
    pub mode: Mode,
    pub verdict: &'static str,
    pub rounds: usize,
    pub nodes: Vec<usize>,
    pub generalizations: Vec<usize>,
    pub folds: Vec<usize>,
    pub offending: Vec<String>,
    pub wall_ms: u128,
}

impl Report {
    pub fn summary(&self) -> Summary {
        let offending = match &self.verdict {
            Verdict::NotShownSafe { offending, .. } => offending.iter().map(render_rule).collect(),
            _ => Vec::new(),
        };
        Summary {
            model: self.model.clone(),
            mode: self.mode,
            verdict: self.verdict.kind(),
            rounds: self.rounds.len(),
            nodes: self.rounds.iter().map(|s| s.nodes_created).collect(),
            generalizations: self.rounds.iter().map(|s| s.generalizations).collect(),
            folds: self.rounds.iter().map(|s| s.folds).collect(),
            offending,
            wall_ms: self.wall_ms,
        }
    }
}

/// Start call of a mode and the program it runs against.
pub fn verification_task(m: &ModelSpec, mode: Mode) -> Result<(Program, Expr), VerifyError> {
    match mode {
        Mode::Direct => Ok((m.program.clone(), m.entry_call())),
        Mode::ViaInterpreter => {
            let int = int_source(&[(PROGRAM_NAME, &m.program)])?;
            let data = Expr::var(crate::syntax::Var::e("d"));
            let mut args = int_args(&m.entry, data, PROGRAM_NAME);
            // `(Call f e.d)` keeps the datum fully unknown.
            let call = Expr::call("Int", std::mem::take(&mut args));
            Ok((int, call))
        }
    }
}

fn entry_is_bottom(p: &Program, entry: &Expr) -> bool {
    let [Item::Call(c)] = entry.items() else { return false };
    p.get(&c.name)
        .is_some_and(|d| d.rules.iter().all(|r| matches!(r.rhs.items(), [Item::Call(b)] if &*b.name == BOTTOM_FUNCTION)))
}

pub fn verify_model(m: &ModelSpec, opts: VerifyOptions) -> Result<Report, VerifyError> {
    let start = Instant::now();
    let (mut prog, mut entry) = verification_task(m, opts.mode)?;
    let rounds = if opts.rounds == 0 { 2 } else { opts.rounds };
    let mut stats = Vec::new();
    let mut last_graph = None;
    let mut round = 0;
    let verdict = loop {
        round += 1;
        let graph = match supercompile(&prog, &entry, opts.sc) {
            Ok(g) => g,
            Err(ScError::Budget(b)) => {
                stats.push(b.graph.stats);
                break Verdict::BudgetExhausted {
                    reason: b.reason,
                    stats: b.graph.stats,
                    round,
                };
            }
            Err(e) => return Err(VerifyError::Supercompile(e.to_string())),
        };
        stats.push(graph.stats);
        let residual = residualize(&graph)?;
        if entry_is_bottom(&residual, &graph.entry) {
            return Err(VerifyError::Model("every run of the model is undefined".into()));
        }
        let check = check_no_false(&residual);
        entry = graph.entry.clone();
        last_graph = Some(graph);
        if check.rhs_clean {
            break Verdict::Safe { residual, rounds: round };
        }
        if round >= rounds {
            break Verdict::NotShownSafe {
                residual,
                offending: check.offending,
                rounds: round,
            };
        }
        prog = residual;
    };
    Ok(Report {
        model: m.name.clone(),
        mode: opts.mode,
        verdict,
        rounds: stats,
        graph: last_graph,
        wall_ms: start.elapsed().as_millis(),
    })
}
