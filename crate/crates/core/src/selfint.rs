//! The self-interpreter and the harness that runs programs through it.

use crate::encoding::{decode_expression, encode_entries, encode_expression, EncodingError};
use crate::semantics::{eval_call, EvalOutcome};
use crate::syntax::{parse_program, Expr, Item, Pattern, Program, Rule, Symbol};

/// Source of the interpreter, without `Prog`.
pub const SELFINT_SOURCE: &str = include_str!("../../../corpus/selfint.l");

/// The interpreter with one `Prog(name) => entries` rule per registered
/// program.
pub fn int_source(registry: &[(&str, &Program)]) -> Result<Program, EncodingError> {
    let mut prog = parse_program(SELFINT_SOURCE).expect("bundled interpreter parses");
    for (name, p) in registry {
        prog.push_rule(Rule {
            fname: "Prog".into(),
            patterns: vec![Pattern::new(Expr::ident(name)).expect("symbol pattern")],
            rhs: encode_entries(p)?,
        });
    }
    Ok(prog)
}

/// The two arguments of `Int((Call fname d), (Prog name))`.
pub fn int_args(fname: &str, data: Expr, name: &str) -> Vec<Expr> {
    let mut call = vec![
        Item::Sym(Symbol::ident("Call")),
        Item::Sym(Symbol::ident(fname)),
    ];
    call.extend(data.0);
    vec![
        Expr(vec![Item::Paren(Expr(call))]),
        Expr::paren(Expr::ident("Prog").append(Expr::ident(name))),
    ]
}

/// Name under which the interpreted program is registered.
pub const PROGRAM_NAME: &str = "Target";

/// Evaluates `entry(d)` by interpreting the encoded program; values are
/// decoded back. A result outside the image of the encoding is reported
/// as `Bottom`.
pub fn run_via_interpreter(p: &Program, entry: &str, d: &Expr, budget: Option<u64>) -> Result<EvalOutcome, EncodingError> {
    let int = int_source(&[(PROGRAM_NAME, p)])?;
    let args = int_args(entry, encode_expression(d)?, PROGRAM_NAME);
    Ok(match eval_call(&int, "Int", &args, budget) {
        EvalOutcome::Value(v) => match decode_expression(&v) {
            Ok(v) => EvalOutcome::Value(v),
            Err(e) => EvalOutcome::Bottom {
                reason: format!("interpreter result not decodable: {e}"),
                fname: "Int".into(),
                args,
            },
        },
        other => other,
    })
}

/// Direct and interpreted outcomes of one run.
#[derive(Debug, Clone)]
pub struct FidelityReport {
    pub direct: EvalOutcome,
    pub via: EvalOutcome,
}

impl FidelityReport {
    pub fn agrees(&self) -> bool {
        self.direct.same_result(&self.via)
    }
}

pub fn fidelity(p: &Program, entry: &str, d: &Expr, budget: Option<u64>) -> Result<FidelityReport, EncodingError> {
    Ok(FidelityReport {
        direct: eval_call(p, entry, std::slice::from_ref(d), budget),
        via: run_via_interpreter(p, entry, d, budget.map(|b| b.saturating_mul(200)))?,
    })
}
