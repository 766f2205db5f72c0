use std::collections::BTreeMap;

use serde::Serialize;

use super::{Expr, Item, Program, Var};

/// Number of occurrences of `v` in `e`.
pub fn multiplicity(v: &Var, e: &Expr) -> usize {
    e.0.iter()
        .map(|item| match item {
            Item::Var(w) => usize::from(w == v),
            Item::Paren(inner) => multiplicity(v, inner),
            Item::Call(c) => c.args.iter().map(|a| multiplicity(v, a)).sum(),
            Item::Sym(_) => 0,
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleReport {
    pub fname: String,
    pub index: usize,
    /// Every pattern variable occurs at most once on the left-hand side.
    pub linear: bool,
    pub max_multiplicity: usize,
    /// The right-hand side contains no call.
    pub passive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisReport {
    pub rules: Vec<RuleReport>,
    pub arities: BTreeMap<String, usize>,
}

pub fn analyze(p: &Program) -> AnalysisReport {
    let mut rules = Vec::new();
    let mut arities = BTreeMap::new();
    for def in &p.defs {
        arities.insert(def.name.to_string(), def.arity);
        for (index, rule) in def.rules.iter().enumerate() {
            let lhs = Expr(
                rule.patterns
                    .iter()
                    .map(|pat| Item::Paren(pat.expr().clone()))
                    .collect(),
            );
            let max_multiplicity = lhs
                .vars()
                .iter()
                .map(|v| multiplicity(v, &lhs))
                .max()
                .unwrap_or(0);
            rules.push(RuleReport {
                fname: def.name.to_string(),
                index,
                linear: max_multiplicity < 2,
                max_multiplicity,
                passive: rule.rhs.is_passive(),
            });
        }
    }
    AnalysisReport { rules, arities }
}

impl AnalysisReport {
    pub fn all_linear(&self) -> bool {
        self.rules.iter().all(|r| r.linear)
    }

    pub fn rule(&self, fname: &str, index: usize) -> Option<&RuleReport> {
        self.rules
            .iter()
            .find(|r| r.fname == fname && r.index == index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_expr, parse_program, Var};

    #[test]
    fn multiplicities() {
        let rhs = parse_expr("(Invalid Append((e.ds) : (e.is))) : (Dirty) : (Valid I e.vs)").unwrap();
        assert_eq!(multiplicity(&Var::e("is"), &rhs), 1);
        assert_eq!(multiplicity(&Var::e("x"), &Expr::nil()), 0);
        let rhs = parse_expr("s.x : Append((e.xs):(e.vs))").unwrap();
        assert_eq!(multiplicity(&Var::s("x"), &rhs), 1);
    }

    #[test]
    fn linearity_and_passivity() {
        let p = parse_program(
            "F(s.x s.x) => True;\nG((e.a) : e.b) => Loop((e.a) : e.b);\nH(e.x) => e.x;",
        )
        .unwrap();
        let r = analyze(&p);
        assert!(!r.rule("F", 0).unwrap().linear);
        assert!(r.rule("F", 0).unwrap().passive);
        assert!(r.rule("G", 0).unwrap().linear);
        assert!(!r.rule("G", 0).unwrap().passive);
        assert_eq!(r.arities["H"], 1);
    }
}
