use std::collections::HashMap;

use thiserror::Error;

use super::graph::{NodeId, NodeKind, NodeLabel, ProcessGraph};
use crate::config::{Configuration, Contraction};
use crate::syntax::{Expr, Item, Name, Pattern, Program, Rule, Var};

/// Called where the source program is undefined. The residual program
/// never defines it.
pub const BOTTOM_FUNCTION: &str = "Undefined";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResidualError {
    #[error("start expression must be a single call with pattern arguments: {0}")]
    BadEntry(String),
    #[error("node {0} was never processed")]
    Open(NodeId),
    #[error("invalid residual pattern: {0}")]
    Pattern(String),
}

struct Residualizer<'g> {
    g: &'g ProcessGraph,
    names: HashMap<NodeId, Name>,
    order: Vec<NodeId>,
    targets: Vec<bool>,
}

/// Reads a program off a completed process graph. The start call keeps
/// its name and becomes the first definition.
pub fn residualize(g: &ProcessGraph) -> Result<Program, ResidualError> {
    let [Item::Call(entry)] = g.entry.items() else {
        return Err(ResidualError::BadEntry(g.entry.to_string()));
    };
    let patterns = entry
        .args
        .iter()
        .map(|a| Pattern::new(a.clone()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(ResidualError::BadEntry)?;
    let mut targets = vec![false; g.nodes.len()];
    for n in g.live() {
        if let NodeKind::Fold { target, .. } = n.kind {
            targets[target] = true;
        }
    }
    let mut r = Residualizer {
        g,
        names: HashMap::new(),
        order: Vec::new(),
        targets,
    };
    let body = r.res(g.root)?;
    let mut prog = Program::default();
    prog.push_rule(Rule {
        fname: entry.name.clone(),
        patterns,
        rhs: body,
    });
    let mut i = 0;
    while i < r.order.len() {
        let id = r.order[i];
        i += 1;
        let fname = r.names[&id].clone();
        let params = config_of(g, id).params();
        let mut rules = Vec::new();
        for (theta, child) in &g.node(id).children {
            let patterns = params
                .iter()
                .map(|v| Pattern::new(theta.get(v).cloned().unwrap_or_else(|| Expr::var(v.clone()))))
                .collect::<Result<Vec<_>, _>>()
                .map_err(ResidualError::Pattern)?;
            rules.push(Rule {
                fname: fname.clone(),
                patterns,
                rhs: r.res(*child)?,
            });
        }
        while rules.last().is_some_and(|r| is_bottom_call(&r.rhs)) {
            rules.pop();
        }
        for rule in rules {
            prog.push_rule(rule);
        }
    }
    Ok(prog)
}

fn is_bottom_call(e: &Expr) -> bool {
    matches!(e.items(), [Item::Call(c)] if &*c.name == BOTTOM_FUNCTION && c.args.is_empty())
}

fn config_of(g: &ProcessGraph, id: NodeId) -> &Configuration {
    g.node(id).config().expect("configuration node")
}

fn call_with(name: &Name, params: &[Var], theta: &Contraction) -> Expr {
    let args = params.iter().map(|v| theta.apply(&Expr::var(v.clone()))).collect();
    Expr::call(name, args)
}

impl Residualizer<'_> {
    fn name(&mut self, id: NodeId) -> Name {
        if let Some(n) = self.names.get(&id) {
            return n.clone();
        }
        let n: Name = format!("F{}", self.order.len() + 1).into();
        self.names.insert(id, n.clone());
        self.order.push(id);
        n
    }

    fn inlinable(&self, id: NodeId) -> bool {
        let n = self.g.node(id);
        !self.targets[id] && matches!(n.children.as_slice(), [(theta, _)] if theta.is_empty())
    }

    fn res(&mut self, id: NodeId) -> Result<Expr, ResidualError> {
        let g = self.g;
        let n = g.node(id);
        match &n.kind {
            NodeKind::Open => Err(ResidualError::Open(id)),
            NodeKind::Passive => Ok(config_of(g, id).tail.clone()),
            NodeKind::Bottom => Ok(Expr::call(BOTTOM_FUNCTION, Vec::new())),
            NodeKind::Fold { target, theta } => {
                let name = self.name(*target);
                Ok(call_with(&name, &config_of(g, *target).params(), theta))
            }
            NodeKind::Generalized { theta } => {
                let (_, child) = n.children[0];
                Ok(theta.apply(&self.res(child)?))
            }
            NodeKind::Driven if self.inlinable(id) => self.res(n.children[0].1),
            NodeKind::Driven => {
                let name = self.name(id);
                Ok(call_with(&name, &config_of(g, id).params(), &Contraction::new()))
            }
            NodeKind::Let => {
                let NodeLabel::Let(chain) = &n.label else { unreachable!("let node without chain") };
                let body_id = n.children.last().expect("let body").1;
                let mut e = self.res(body_id)?;
                for ((_, v), (_, child)) in chain.bindings.iter().zip(&n.children).rev() {
                    let value = self.res(*child)?;
                    e = e.substitute(&|w| (w == v).then(|| value.clone()));
                }
                Ok(e)
            }
        }
    }
}
