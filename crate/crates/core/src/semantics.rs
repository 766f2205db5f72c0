//! Call-by-value reference interpreter.

use std::fmt;

use crate::syntax::{Expr, Item, Name, Pattern, Program, Sort, Var};

/// Variable bindings produced by matching, in binding order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Env(Vec<(Var, Expr)>);

impl Env {
    pub fn new() -> Env {
        Env(Vec::new())
    }

    pub fn get(&self, v: &Var) -> Option<&Expr> {
        self.0.iter().find(|(w, _)| w == v).map(|(_, e)| e)
    }

    pub fn bindings(&self) -> &[(Var, Expr)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Binds `v`, or checks equality with the existing binding.
    fn bind(&mut self, v: &Var, value: &[Item]) -> bool {
        match self.get(v) {
            Some(old) => old.0 == value,
            None => {
                self.0.push((v.clone(), Expr(value.to_vec())));
                true
            }
        }
    }

    pub fn apply(&self, e: &Expr) -> Expr {
        e.substitute(&|v| self.get(v).cloned())
    }
}

/// Matches a ground datum against a pattern, extending `env`.
///
/// Returns `None` on mismatch, including a repeated variable whose new
/// value differs from the one already bound.
pub fn match_pattern(p: &Pattern, d: &Expr, mut env: Env) -> Option<Env> {
    match_seq(p.expr().items(), d.items(), &mut env).then_some(env)
}

fn match_seq(mut p: &[Item], mut d: &[Item], env: &mut Env) -> bool {
    loop {
        let Some((head, rest)) = p.split_first() else {
            return d.is_empty();
        };
        match head {
            Item::Var(v) if v.sort == Sort::E => {
                debug_assert!(rest.is_empty(), "e-variable in non-tail pattern position");
                return env.bind(v, d);
            }
            Item::Var(v) => match d.first() {
                Some(sym @ Item::Sym(_)) => {
                    if !env.bind(v, std::slice::from_ref(sym)) {
                        return false;
                    }
                }
                _ => return false,
            },
            Item::Sym(s) => match d.first() {
                Some(Item::Sym(t)) if s == t => {}
                _ => return false,
            },
            Item::Paren(inner) => match d.first() {
                Some(Item::Paren(dinner)) => {
                    if !match_seq(inner.items(), dinner.items(), env) {
                        return false;
                    }
                }
                _ => return false,
            },
            Item::Call(_) => return false,
        }
        p = rest;
        d = &d[1..];
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalOutcome {
    Value(Expr),
    /// Abnormal termination: no rule matched, or the callee is undefined.
    Bottom {
        reason: String,
        fname: String,
        args: Vec<Expr>,
    },
    Exhausted {
        steps: u64,
    },
}

impl EvalOutcome {
    pub fn is_bottom(&self) -> bool {
        matches!(self, EvalOutcome::Bottom { .. })
    }

    pub fn value(&self) -> Option<&Expr> {
        match self {
            EvalOutcome::Value(v) => Some(v),
            _ => None,
        }
    }

    /// `Value`/`Bottom` agreement, ignoring the diagnostics carried by
    /// `Bottom`.
    pub fn same_result(&self, other: &EvalOutcome) -> bool {
        match (self, other) {
            (EvalOutcome::Value(a), EvalOutcome::Value(b)) => a == b,
            (EvalOutcome::Bottom { .. }, EvalOutcome::Bottom { .. }) => true,
            (EvalOutcome::Exhausted { .. }, EvalOutcome::Exhausted { .. }) => true,
            _ => false,
        }
    }
}

impl fmt::Display for EvalOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalOutcome::Value(v) => write!(f, "{v}"),
            EvalOutcome::Bottom { reason, fname, args } => {
                let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                write!(f, "bottom: {reason} in {fname}({})", args.join(", "))
            }
            EvalOutcome::Exhausted { steps } => write!(f, "step budget exhausted after {steps} steps"),
        }
    }
}

enum Stop {
    Bottom {
        reason: String,
        fname: String,
        args: Vec<Expr>,
    },
    Exhausted,
}

struct Machine<'p> {
    prog: &'p Program,
    steps: u64,
    budget: Option<u64>,
}

impl Machine<'_> {
    fn eval(&mut self, e: &Expr, env: &Env) -> Result<Expr, Stop> {
        let mut out = Vec::with_capacity(e.len());
        for item in e.items() {
            match item {
                Item::Sym(_) => out.push(item.clone()),
                Item::Var(v) => match env.get(v) {
                    Some(val) => out.extend(val.items().iter().cloned()),
                    None => out.push(item.clone()),
                },
                Item::Paren(inner) => out.push(Item::Paren(self.eval(inner, env)?)),
                Item::Call(c) => {
                    let mut args = Vec::with_capacity(c.args.len());
                    for a in &c.args {
                        args.push(self.eval(a, env)?);
                    }
                    out.extend(self.apply(c.name.clone(), args)?.0);
                }
            }
        }
        Ok(Expr(out))
    }

    fn apply(&mut self, mut fname: Name, mut args: Vec<Expr>) -> Result<Expr, Stop> {
        loop {
            let Some(def) = self.prog.get(&fname) else {
                return Err(Stop::Bottom {
                    reason: "undefined function".into(),
                    fname: fname.to_string(),
                    args,
                });
            };
            if def.arity != args.len() {
                return Err(Stop::Bottom {
                    reason: format!("arity mismatch: expected {}", def.arity),
                    fname: fname.to_string(),
                    args,
                });
            }
            self.steps += 1;
            if self.budget.is_some_and(|b| self.steps > b) {
                return Err(Stop::Exhausted);
            }
            let mut chosen = None;
            'rules: for rule in &def.rules {
                let mut env = Env::new();
                for (pat, arg) in rule.patterns.iter().zip(&args) {
                    if !match_seq(pat.expr().items(), arg.items(), &mut env) {
                        continue 'rules;
                    }
                }
                chosen = Some((rule, env));
                break;
            }
            let Some((rule, env)) = chosen else {
                return Err(Stop::Bottom {
                    reason: "no rule matches".into(),
                    fname: fname.to_string(),
                    args,
                });
            };
            // A right-hand side that is a single call is evaluated in place,
            // so tail-recursive loops do not grow the native stack.
            if let [Item::Call(c)] = rule.rhs.items() {
                let mut next_args = Vec::with_capacity(c.args.len());
                for a in &c.args {
                    next_args.push(self.eval(a, &env)?);
                }
                fname = c.name.clone();
                args = next_args;
                continue;
            }
            return self.eval(&rule.rhs, &env);
        }
    }
}

/// Evaluates `fname(args)` under strict leftmost-innermost semantics.
/// The budget counts rule applications.
pub fn eval_call(prog: &Program, fname: &str, args: &[Expr], budget: Option<u64>) -> EvalOutcome {
    debug_assert!(args.iter().all(Expr::is_ground), "arguments must be ground");
    let mut m = Machine {
        prog,
        steps: 0,
        budget,
    };
    match m.apply(Name::from(fname), args.to_vec()) {
        Ok(v) => EvalOutcome::Value(v),
        Err(Stop::Bottom { reason, fname, args }) => EvalOutcome::Bottom { reason, fname, args },
        Err(Stop::Exhausted) => EvalOutcome::Exhausted { steps: m.steps - 1 },
    }
}

/// Evaluates a ground expression that may contain calls.
pub fn eval_expr(prog: &Program, e: &Expr, budget: Option<u64>) -> EvalOutcome {
    let mut m = Machine {
        prog,
        steps: 0,
        budget,
    };
    match m.eval(e, &Env::new()) {
        Ok(v) => EvalOutcome::Value(v),
        Err(Stop::Bottom { reason, fname, args }) => EvalOutcome::Bottom { reason, fname, args },
        Err(Stop::Exhausted) => EvalOutcome::Exhausted { steps: m.steps - 1 },
    }
}

/// Expression syntax with explicit `++` nodes, as written by hand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tree {
    Nil,
    Var(Var),
    Cons(Box<Tree>, Box<Tree>),
    Append(Box<Tree>, Box<Tree>),
    Sym(crate::syntax::Symbol),
    Paren(Box<Tree>),
    Call(Name, Vec<Tree>),
}

impl Tree {
    pub fn cons(head: Tree, tail: Tree) -> Tree {
        Tree::Cons(Box::new(head), Box::new(tail))
    }

    pub fn append(a: Tree, b: Tree) -> Tree {
        Tree::Append(Box::new(a), Box::new(b))
    }

    /// Right-normal form as a tree: `Append` nodes only have a variable
    /// or a call on their left.
    pub fn from_expr(e: &Expr) -> Tree {
        let mut t = Tree::Nil;
        for item in e.items().iter().rev() {
            t = match item {
                Item::Sym(s) => Tree::cons(Tree::Sym(s.clone()), t),
                Item::Paren(inner) => Tree::cons(Tree::Paren(Box::new(Tree::from_expr(inner))), t),
                Item::Var(v) if v.sort == Sort::S => Tree::cons(Tree::Var(v.clone()), t),
                Item::Var(v) => match t {
                    Tree::Nil => Tree::Var(v.clone()),
                    rest => Tree::append(Tree::Var(v.clone()), rest),
                },
                Item::Call(c) => {
                    let call = Tree::Call(c.name.clone(), c.args.iter().map(Tree::from_expr).collect());
                    match t {
                        Tree::Nil => call,
                        rest => Tree::append(call, rest),
                    }
                }
            };
        }
        t
    }

    pub fn flatten(&self) -> Expr {
        match self {
            Tree::Nil => Expr::nil(),
            Tree::Var(v) => Expr::var(v.clone()),
            Tree::Sym(s) => Expr::sym(s.clone()),
            Tree::Paren(inner) => Expr::paren(inner.flatten()),
            Tree::Cons(h, t) | Tree::Append(h, t) => h.flatten().append(t.flatten()),
            Tree::Call(name, args) => Expr::call(name, args.iter().map(Tree::flatten).collect()),
        }
    }
}

/// Normalizes `++` modulo associativity and the unit and cons laws.
pub fn normalize_append(t: &Tree) -> Tree {
    Tree::from_expr(&t.flatten())
}
