//! Driving, the unfold-fold loop and residual program extraction.

mod dump;
mod graph;
mod residual;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::config::{apply_unchecked, decompose_into, Configuration, Contraction, LetChain, Supply};
use crate::syntax::{Expr, Item, Pattern, Program, Sort, Symbol, Var};

pub use dump::{dump_graph, GRAPH_FORMAT};
pub use graph::{
    supercompile, Budget, BudgetExhausted, EventKind, GraphStats, Node, NodeId, NodeKind, NodeLabel, Options,
    ProcessGraph, ScError, TraceEvent,
};
pub use residual::{residualize, ResidualError, BOTTOM_FUNCTION};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DriveError {
    #[error("cannot drive: {0}")]
    Unsupported(String),
    #[error("configuration has no function application to drive")]
    Passive,
}

/// Where one branch of a driving step leads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Next(LetChain),
    Bottom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    /// Narrowing of the configuration's parameters, empty for a definite
    /// step.
    pub theta: Contraction,
    pub outcome: Outcome,
}

/// One step of the top application against its rules, as a decision
/// tree flattened into ordered branches. Branch order matters: a later
/// branch only receives values not covered by earlier ones.
pub fn drive_step(c: &Configuration, prog: &Program, supply: &mut Supply) -> Result<Vec<Branch>, DriveError> {
    let top = c.stack.first().ok_or(DriveError::Passive)?;
    let Some(def) = prog.get(&top.name).filter(|d| d.arity == top.args.len()) else {
        return Ok(vec![Branch {
            theta: Contraction::new(),
            outcome: Outcome::Bottom,
        }]);
    };
    let rules: Vec<&[Pattern]> = def.rules.iter().map(|r| r.patterns.as_slice()).collect();
    let mut d = Driver {
        supply,
        found: Vec::new(),
    };
    d.explore(&rules, top.args.clone(), 0, Contraction::new(), Neg::default())?;
    let mut out = Vec::with_capacity(d.found.len());
    for (theta, hit) in std::mem::take(&mut d.found) {
        let outcome = match hit {
            None => Outcome::Bottom,
            Some((rule_idx, env)) => {
                let rhs = env.apply(&def.rules[rule_idx].rhs);
                let narrowed = apply_unchecked(c, &theta);
                Outcome::Next(decompose_into(&rhs, &narrowed.stack[1..], &narrowed.tail, d.supply))
            }
        };
        out.push(Branch { theta, outcome });
    }
    Ok(out)
}

/// A step with one definite branch and no new `let`.
pub fn is_transitive_step(branches: &[Branch]) -> bool {
    matches!(branches, [Branch { theta, outcome: Outcome::Next(chain) }] if theta.is_empty() && chain.is_single())
}

/// Whether one step from `c` has at most one outgoing edge.
pub fn is_transitive(c: &Configuration, prog: &Program) -> bool {
    if c.is_passive() {
        return true;
    }
    let mut supply = supply_after(c);
    match drive_step(c, prog, &mut supply) {
        Ok(b) => is_transitive_step(&b),
        Err(_) => false,
    }
}

/// A supply whose parameters and times do not clash with `c`.
pub fn supply_after(c: &Configuration) -> Supply {
    let mut s = Supply::new();
    let max_param = c.params().iter().filter_map(|v| v.name.parse::<u64>().ok()).max().unwrap_or(0);
    let max_time = c.stack.iter().map(|f| f.time).max().unwrap_or(0);
    while s.fresh_param(Sort::E).name.parse::<u64>().unwrap() < max_param {}
    while s.fresh_time() < max_time {}
    s
}

/// Information learned about e-parameters on an `else` path.
#[derive(Debug, Clone, Default)]
struct ENeg {
    nonempty: bool,
    heads: BTreeSet<Symbol>,
    no_symbol: bool,
    no_paren: bool,
}

#[derive(Debug, Clone, Default)]
struct Neg {
    e: BTreeMap<Var, ENeg>,
    s: BTreeMap<Var, BTreeSet<Symbol>>,
}

impl Neg {
    fn forget(&mut self, v: &Var) {
        self.e.remove(v);
        self.s.remove(v);
    }
}

/// What a pattern position asks of an unknown e-parameter at the head of
/// the data.
#[derive(Debug, Clone)]
enum Demand {
    Empty,
    Symbol(Symbol),
    AnySymbol,
    Paren,
}

#[derive(Debug)]
struct Split {
    var: Var,
    cases: Vec<Expr>,
    otherwise: Option<Neg>,
}

#[derive(Debug)]
enum Probe {
    Fits,
    Fail,
    Infeasible,
    Split(Split),
}

type Bindings = Vec<(Var, Expr)>;

struct Env(Bindings);

impl Env {
    fn apply(&self, e: &Expr) -> Expr {
        e.substitute(&|v| self.0.iter().find(|(w, _)| w == v).map(|(_, x)| x.clone()))
    }
}

struct Driver<'s> {
    supply: &'s mut Supply,
    found: Vec<(Contraction, Option<(usize, Env)>)>,
}

impl Driver<'_> {
    fn explore(
        &mut self,
        rules: &[&[Pattern]],
        data: Vec<Expr>,
        from: usize,
        theta: Contraction,
        neg: Neg,
    ) -> Result<(), DriveError> {
        for (i, pats) in rules.iter().enumerate().skip(from) {
            let mut env = Vec::new();
            let mut probe = Probe::Fits;
            for (p, d) in pats.iter().zip(&data) {
                probe = self.mseq(p.expr().items(), d.items(), &mut env, &neg)?;
                if !matches!(probe, Probe::Fits) {
                    break;
                }
            }
            match probe {
                Probe::Fits => {
                    self.found.push((theta, Some((i, Env(env)))));
                    return Ok(());
                }
                Probe::Fail => continue,
                Probe::Infeasible => return Ok(()),
                Probe::Split(split) => {
                    for case in split.cases {
                        let step = Contraction::single(split.var.clone(), case);
                        let narrowed: Vec<Expr> = data.iter().map(|d| step.apply(d)).collect();
                        let mut neg2 = neg.clone();
                        neg2.forget(&split.var);
                        self.explore(rules, narrowed, i, theta.compose(&step), neg2)?;
                    }
                    if let Some(neg2) = split.otherwise {
                        self.explore(rules, data, i + 1, theta, neg2)?;
                    }
                    return Ok(());
                }
            }
        }
        self.found.push((theta, None));
        Ok(())
    }

    fn split_e(&mut self, v: &Var, demand: Demand, neg: &Neg) -> Probe {
        let info = neg.e.get(v).cloned().unwrap_or_default();
        let mut cases = Vec::new();
        if !info.nonempty {
            cases.push(Expr::nil());
        }
        let mut after = info.clone();
        after.nonempty = true;
        let otherwise_possible;
        match &demand {
            Demand::Empty => {
                otherwise_possible = !(info.no_symbol && info.no_paren);
            }
            Demand::Symbol(sym) => {
                if !info.no_symbol && !info.heads.contains(sym) {
                    let r = self.supply.fresh_param(Sort::E);
                    cases.push(Expr::cons(Item::Sym(sym.clone()), Expr::var(r)));
                }
                after.heads.insert(sym.clone());
                otherwise_possible = !info.no_symbol || !info.no_paren;
            }
            Demand::AnySymbol => {
                if !info.no_symbol {
                    let n = self.supply.fresh_param(Sort::S);
                    let r = self.supply.fresh_param(Sort::E);
                    cases.push(Expr::cons(Item::Var(n), Expr::var(r)));
                }
                after.no_symbol = true;
                otherwise_possible = !info.no_paren;
            }
            Demand::Paren => {
                if !info.no_paren {
                    let a = self.supply.fresh_param(Sort::E);
                    let r = self.supply.fresh_param(Sort::E);
                    cases.push(Expr::cons(Item::Paren(Expr::var(a)), Expr::var(r)));
                }
                after.no_paren = true;
                otherwise_possible = !info.no_symbol;
            }
        }
        if cases.is_empty() && !otherwise_possible {
            return Probe::Infeasible;
        }
        if cases.is_empty() {
            // Only the fall-through remains: the rule fails here.
            return Probe::Fail;
        }
        let otherwise = otherwise_possible.then(|| {
            let mut n = neg.clone();
            n.e.insert(v.clone(), after);
            n
        });
        Probe::Split(Split {
            var: v.clone(),
            cases,
            otherwise,
        })
    }

    fn split_s(&mut self, v: &Var, to: Item, neg: &Neg) -> Probe {
        if let Item::Sym(sym) = &to {
            if neg.s.get(v).is_some_and(|ex| ex.contains(sym)) {
                return Probe::Fail;
            }
        }
        let mut n = neg.clone();
        if let Item::Sym(sym) = &to {
            n.s.entry(v.clone()).or_default().insert(sym.clone());
        }
        Probe::Split(Split {
            var: v.clone(),
            cases: vec![Expr(vec![to])],
            otherwise: Some(n),
        })
    }

    /// Matches pattern items against parameterized data items.
    fn mseq(&mut self, p: &[Item], d: &[Item], env: &mut Bindings, neg: &Neg) -> Result<Probe, DriveError> {
        let mut p = p;
        let mut d = d;
        loop {
            let Some((ph, p_rest)) = p.split_first() else {
                return Ok(match d.first() {
                    None => Probe::Fits,
                    Some(Item::Var(v)) if v.sort == Sort::E => self.split_e(v, Demand::Empty, neg),
                    Some(_) => Probe::Fail,
                });
            };
            match ph {
                Item::Var(pv) if pv.sort == Sort::E => {
                    let value = Expr(d.to_vec());
                    if let Some((_, old)) = env.iter().find(|(w, _)| w == pv) {
                        if *old == value {
                            return Ok(Probe::Fits);
                        }
                        if old.is_ground() && value.is_ground() {
                            return Ok(Probe::Fail);
                        }
                        return Err(DriveError::Unsupported(format!(
                            "repeated {pv} compares unknown values {old} and {value}"
                        )));
                    }
                    env.push((pv.clone(), value));
                    return Ok(Probe::Fits);
                }
                _ => {}
            }
            let Some(dh) = d.first() else {
                return Ok(Probe::Fail);
            };
            if let Item::Var(dv) = dh {
                if dv.sort == Sort::E {
                    let demand = match ph {
                        Item::Sym(s) => Demand::Symbol(s.clone()),
                        Item::Paren(_) => Demand::Paren,
                        Item::Var(pv) => match env.iter().find(|(w, _)| w == pv) {
                            Some((_, bound)) => match bound.items() {
                                [Item::Sym(s)] => Demand::Symbol(s.clone()),
                                _ => Demand::AnySymbol,
                            },
                            None => Demand::AnySymbol,
                        },
                        Item::Call(_) => unreachable!("patterns hold no calls"),
                    };
                    return Ok(self.split_e(dv, demand, neg));
                }
            }
            match ph {
                Item::Sym(s) => match dh {
                    Item::Sym(t) if s == t => {}
                    Item::Var(dv) => return Ok(self.split_s(dv, Item::Sym(s.clone()), neg)),
                    _ => return Ok(Probe::Fail),
                },
                Item::Paren(pi) => match dh {
                    Item::Paren(di) => match self.mseq(pi.items(), di.items(), env, neg)? {
                        Probe::Fits => {}
                        other => return Ok(other),
                    },
                    _ => return Ok(Probe::Fail),
                },
                Item::Var(pv) => {
                    let symbolic = matches!(dh, Item::Sym(_)) || matches!(dh, Item::Var(w) if w.sort == Sort::S);
                    if !symbolic {
                        return Ok(Probe::Fail);
                    }
                    match env.iter().find(|(w, _)| w == pv).map(|(_, b)| b.0[0].clone()) {
                        None => env.push((pv.clone(), Expr(vec![dh.clone()]))),
                        Some(bound) if bound == *dh => {}
                        Some(bound) => match (&bound, dh) {
                            (Item::Sym(_), Item::Sym(_)) => return Ok(Probe::Fail),
                            (Item::Sym(_), Item::Var(dv)) => return Ok(self.split_s(dv, bound, neg)),
                            (Item::Var(bv), _) => return Ok(self.split_s(bv, dh.clone(), neg)),
                            _ => return Ok(Probe::Fail),
                        },
                    }
                }
                Item::Call(_) => unreachable!("patterns hold no calls"),
            }
            p = p_rest;
            d = &d[1..];
        }
    }
}
