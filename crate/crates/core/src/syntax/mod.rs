//! Abstract syntax of the object language.
//!
//! Expressions are kept in append-normal form: an [`Expr`] is a flat
//! sequence of [`Item`]s whose concatenation is the value. `Nil` is the
//! empty sequence, `t : e` prepends a term and `a ++ b` concatenates, so
//! associativity of `++` and the unit laws hold by construction.

mod analysis;
mod parse;
mod render;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub use analysis::{analyze, multiplicity, AnalysisReport, RuleReport};
pub use parse::{parse_expr, parse_pattern, parse_program, ParseError};
pub use render::{render_expr, render_program, render_rule};

/// Shared immutable name.
pub type Name = Arc<str>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Symbol {
    Ident(Name),
    Char(char),
}

impl Symbol {
    pub fn ident(text: &str) -> Symbol {
        assert!(!text.is_empty(), "identifier symbols are non-empty");
        Symbol::Ident(Arc::from(text))
    }

    pub fn is_ident(&self, text: &str) -> bool {
        matches!(self, Symbol::Ident(s) if &**s == text)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Sort {
    E,
    S,
}

impl Sort {
    pub fn prefix(self) -> char {
        match self {
            Sort::E => 'e',
            Sort::S => 's',
        }
    }
}

/// An s- or e-variable. Supercompilation parameters are variables too;
/// their names are decimal ids handed out by a per-run supply.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var {
    pub sort: Sort,
    pub name: Name,
}

const HOLE_NAME: &str = "\u{2022}";

impl Var {
    pub fn new(sort: Sort, name: &str) -> Var {
        assert!(!name.is_empty(), "variable names are non-empty");
        Var {
            sort,
            name: Arc::from(name),
        }
    }

    pub fn e(name: &str) -> Var {
        Var::new(Sort::E, name)
    }

    pub fn s(name: &str) -> Var {
        Var::new(Sort::S, name)
    }

    /// The `•` placeholder of a configuration stack frame.
    pub fn hole() -> Var {
        Var::new(Sort::E, HOLE_NAME)
    }

    pub fn is_hole(&self) -> bool {
        &*self.name == HOLE_NAME
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_hole() {
            f.write_str(HOLE_NAME)
        } else {
            write!(f, "{}.{}", self.sort.prefix(), self.name)
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Call {
    pub name: Name,
    pub args: Vec<Expr>,
}

/// One element of a flat expression.
///
/// `Sym`, `Paren` and s-variables are terms; e-variables and calls are
/// sub-expressions spliced in by `++`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Item {
    Sym(Symbol),
    Var(Var),
    Paren(Expr),
    Call(Call),
}

impl Item {
    pub fn is_term(&self) -> bool {
        match self {
            Item::Sym(_) | Item::Paren(_) => true,
            Item::Var(v) => v.sort == Sort::S,
            Item::Call(_) => false,
        }
    }
}

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Expr(pub Vec<Item>);

impl Expr {
    pub fn nil() -> Expr {
        Expr(Vec::new())
    }

    pub fn var(v: Var) -> Expr {
        Expr(vec![Item::Var(v)])
    }

    pub fn sym(s: Symbol) -> Expr {
        Expr(vec![Item::Sym(s)])
    }

    pub fn ident(text: &str) -> Expr {
        Expr::sym(Symbol::ident(text))
    }

    pub fn paren(inner: Expr) -> Expr {
        Expr(vec![Item::Paren(inner)])
    }

    pub fn call(name: &str, args: Vec<Expr>) -> Expr {
        Expr(vec![Item::Call(Call {
            name: Arc::from(name),
            args,
        })])
    }

    pub fn hole() -> Expr {
        Expr::var(Var::hole())
    }

    /// `head : self`. Panics if `head` is not a term.
    pub fn cons(head: Item, tail: Expr) -> Expr {
        assert!(head.is_term(), "cons head must be a term");
        let mut items = Vec::with_capacity(tail.0.len() + 1);
        items.push(head);
        items.extend(tail.0);
        Expr(items)
    }

    /// `self ++ other`, already in normal form.
    pub fn append(mut self, other: Expr) -> Expr {
        self.0.extend(other.0);
        self
    }

    pub fn is_nil(&self) -> bool {
        self.0.is_empty()
    }

    pub fn items(&self) -> &[Item] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// No calls anywhere.
    pub fn is_passive(&self) -> bool {
        self.0.iter().all(|item| match item {
            Item::Call(_) => false,
            Item::Paren(e) => e.is_passive(),
            _ => true,
        })
    }

    /// No calls and no variables.
    pub fn is_ground(&self) -> bool {
        self.0.iter().all(|item| match item {
            Item::Sym(_) => true,
            Item::Paren(e) => e.is_ground(),
            _ => false,
        })
    }

    pub fn contains_hole(&self) -> bool {
        self.0.iter().any(|item| match item {
            Item::Var(v) => v.is_hole(),
            Item::Paren(e) => e.contains_hole(),
            Item::Call(c) => c.args.iter().any(Expr::contains_hole),
            Item::Sym(_) => false,
        })
    }

    pub fn contains_symbol(&self, sym: &Symbol) -> bool {
        self.0.iter().any(|item| match item {
            Item::Sym(s) => s == sym,
            Item::Paren(e) => e.contains_symbol(sym),
            Item::Call(c) => c.args.iter().any(|a| a.contains_symbol(sym)),
            Item::Var(_) => false,
        })
    }

    /// Variables in order of first occurrence (the hole excluded).
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        self.collect_vars(&mut out, &mut seen);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut Vec<Var>, seen: &mut BTreeSet<Var>) {
        for item in &self.0 {
            match item {
                Item::Var(v) if !v.is_hole() => {
                    if seen.insert(v.clone()) {
                        out.push(v.clone());
                    }
                }
                Item::Var(_) | Item::Sym(_) => {}
                Item::Paren(e) => e.collect_vars(out, seen),
                Item::Call(c) => {
                    for a in &c.args {
                        a.collect_vars(out, seen);
                    }
                }
            }
        }
    }

    /// Replace variables according to `f`; unmapped variables stay.
    pub fn substitute(&self, f: &dyn Fn(&Var) -> Option<Expr>) -> Expr {
        let mut out = Vec::with_capacity(self.0.len());
        for item in &self.0 {
            match item {
                Item::Var(v) => match f(v) {
                    Some(e) => out.extend(e.0),
                    None => out.push(item.clone()),
                },
                Item::Sym(_) => out.push(item.clone()),
                Item::Paren(e) => out.push(Item::Paren(e.substitute(f))),
                Item::Call(c) => out.push(Item::Call(Call {
                    name: c.name.clone(),
                    args: c.args.iter().map(|a| a.substitute(f)).collect(),
                })),
            }
        }
        Expr(out)
    }

    /// Replace the hole by `value`.
    pub fn fill_hole(&self, value: &Expr) -> Expr {
        self.substitute(&|v| v.is_hole().then(|| value.clone()))
    }

    /// Number of items counted recursively; used as a size measure.
    pub fn size(&self) -> usize {
        self.0
            .iter()
            .map(|item| match item {
                Item::Paren(e) => 1 + e.size(),
                Item::Call(c) => 1 + c.args.iter().map(Expr::size).sum::<usize>(),
                _ => 1,
            })
            .sum()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_expr(self))
    }
}

/// A left-hand side argument: a passive expression in which an
/// e-variable may only be the last item of its enclosing sequence.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Pattern(Expr);

impl Pattern {
    pub fn new(expr: Expr) -> Result<Pattern, String> {
        check_pattern(&expr)?;
        Ok(Pattern(expr))
    }

    pub fn expr(&self) -> &Expr {
        &self.0
    }

    pub fn into_expr(self) -> Expr {
        self.0
    }
}

fn check_pattern(e: &Expr) -> Result<(), String> {
    let n = e.0.len();
    for (i, item) in e.0.iter().enumerate() {
        match item {
            Item::Call(c) => return Err(format!("call to {} inside a pattern", c.name)),
            Item::Var(v) if v.is_hole() => return Err("placeholder inside a pattern".into()),
            Item::Var(v) if v.sort == Sort::E && i + 1 != n => {
                return Err(format!("{v} must be the last item of its sequence"))
            }
            Item::Paren(inner) => check_pattern(inner)?,
            _ => {}
        }
    }
    Ok(())
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Rule {
    pub fname: Name,
    pub patterns: Vec<Pattern>,
    pub rhs: Expr,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Definition {
    pub name: Name,
    pub arity: usize,
    pub rules: Vec<Rule>,
}

#[derive(Clone, Default, PartialEq, Eq, Hash, Debug)]
pub struct Program {
    pub defs: Vec<Definition>,
}

impl Program {
    pub fn get(&self, name: &str) -> Option<&Definition> {
        self.defs.iter().find(|d| &*d.name == name)
    }

    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.defs.iter().flat_map(|d| d.rules.iter())
    }

    /// Append a rule, creating the definition when needed.
    pub fn push_rule(&mut self, rule: Rule) {
        match self.defs.iter_mut().find(|d| d.name == rule.fname) {
            Some(def) => def.rules.push(rule),
            None => self.defs.push(Definition {
                name: rule.fname.clone(),
                arity: rule.patterns.len(),
                rules: vec![rule],
            }),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_program(self))
    }
}
