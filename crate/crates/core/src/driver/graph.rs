use thiserror::Error;

use super::{drive_step, is_transitive_step, Branch, DriveError, Outcome};
use crate::config::{
    apply_unchecked, decompose_expression, generalize_msg, match_instance, Configuration, Contraction, Frame, LetChain, Supply,
};
use crate::syntax::{Expr, Program, Sort};
use crate::whistle::{strategy_decide, Decision, TurchinSplit, WhistleKind};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeLabel {
    Config(Configuration),
    /// Children are the bindings in order, then the body.
    Let(LetChain),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Open,
    /// Expanded by one step; children follow the rule order.
    Driven,
    Fold { target: NodeId, theta: Contraction },
    /// Replaced by its only child, a generalization with θ(child) = self.
    Generalized { theta: Contraction },
    Let,
    Passive,
    Bottom,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub label: NodeLabel,
    pub kind: NodeKind,
    pub children: Vec<(Contraction, NodeId)>,
    /// Deterministic steps folded into this node before it branched.
    pub transitive_steps: u64,
    pub depth: usize,
    pub alive: bool,
}

impl Node {
    pub fn config(&self) -> Option<&Configuration> {
        match &self.label {
            NodeLabel::Config(c) => Some(c),
            NodeLabel::Let(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: usize,
    pub max_depth: usize,
    pub max_steps: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_nodes: 200_000,
            max_depth: 10_000,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    pub whistle: WhistleKind,
    pub budget: Budget,
    /// Consecutive deterministic steps compressed into one node before the
    /// node is treated as an ordinary branching point.
    pub transitive_limit: u64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            whistle: WhistleKind::default(),
            budget: Budget::default(),
            transitive_limit: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Fold,
    Generalize,
    /// Ancestor split into prefix and context.
    Decompose,
    /// Current configuration split below its top frames.
    Split,
}

#[derive(Debug, Clone)]
pub struct TraceEvent {
    pub kind: EventKind,
    pub ancestor: Configuration,
    pub current: Configuration,
    /// Times of frames present in both configurations.
    pub shared_times: Vec<u64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GraphStats {
    pub nodes_created: usize,
    pub nodes_alive: usize,
    pub steps: u64,
    pub folds: usize,
    pub generalizations: usize,
    pub decompositions: usize,
    pub splits: usize,
    pub max_depth: usize,
}

#[derive(Debug, Clone)]
pub struct ProcessGraph {
    pub nodes: Vec<Node>,
    pub root: NodeId,
    /// The start expression with its variables renamed to parameters.
    pub entry: Expr,
    pub trace: Vec<TraceEvent>,
    pub stats: GraphStats,
}

impl ProcessGraph {
    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn live(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.alive)
    }

    pub fn is_fold_target(&self, id: NodeId) -> bool {
        self.live().any(|n| matches!(n.kind, NodeKind::Fold { target, .. } if target == id))
    }
}

#[derive(Debug, Clone)]
pub struct BudgetExhausted {
    pub reason: String,
    pub graph: Box<ProcessGraph>,
}

#[derive(Debug, Clone, Error)]
pub enum ScError {
    #[error("budget exhausted: {}", .0.reason)]
    Budget(BudgetExhausted),
    #[error(transparent)]
    Drive(#[from] DriveError),
}

struct Builder<'p> {
    prog: &'p Program,
    opts: Options,
    supply: Supply,
    g: ProcessGraph,
    todo: Vec<NodeId>,
}

/// Builds the process graph of `entry`, a call whose variables are
/// treated as unknown input.
pub fn supercompile(prog: &Program, entry: &Expr, opts: Options) -> Result<ProcessGraph, ScError> {
    let mut supply = Supply::new();
    let (entry, _) = supply.freshen(entry);
    let chain = decompose_expression(&entry, &mut supply);
    let mut b = Builder {
        prog,
        opts,
        supply,
        g: ProcessGraph {
            nodes: Vec::new(),
            root: 0,
            entry,
            trace: Vec::new(),
            stats: GraphStats::default(),
        },
        todo: Vec::new(),
    };
    let root = b.add_chain(None, chain)?;
    b.g.root = root;
    b.queue_open(root);
    b.run()?;
    b.g.stats.nodes_alive = b.g.live().count();
    Ok(b.g)
}

fn shared_times(a: &Configuration, b: &Configuration) -> Vec<u64> {
    a.stack
        .iter()
        .filter(|f| b.stack.iter().any(|g| g.time == f.time && g.name == f.name))
        .map(|f| f.time)
        .collect()
}

impl Builder<'_> {
    fn exhausted(&mut self, reason: String) -> ScError {
        self.g.stats.nodes_alive = self.g.live().count();
        ScError::Budget(BudgetExhausted {
            reason,
            graph: Box::new(self.g.clone()),
        })
    }

    fn add(&mut self, parent: Option<NodeId>, label: NodeLabel) -> Result<NodeId, ScError> {
        let id = self.g.nodes.len();
        if id >= self.opts.budget.max_nodes {
            return Err(self.exhausted(format!("more than {} nodes", self.opts.budget.max_nodes)));
        }
        let depth = parent.map_or(0, |p| self.g.nodes[p].depth + 1);
        if depth > self.opts.budget.max_depth {
            return Err(self.exhausted(format!("path deeper than {}", self.opts.budget.max_depth)));
        }
        self.g.stats.max_depth = self.g.stats.max_depth.max(depth);
        self.g.stats.nodes_created += 1;
        self.g.nodes.push(Node {
            id,
            parent,
            label,
            kind: NodeKind::Open,
            children: Vec::new(),
            transitive_steps: 0,
            depth,
            alive: true,
        });
        Ok(id)
    }

    /// Adds a configuration, or a `let` node with its parts.
    fn add_chain(&mut self, parent: Option<NodeId>, chain: LetChain) -> Result<NodeId, ScError> {
        if chain.is_single() {
            return self.add(parent, NodeLabel::Config(chain.body));
        }
        let id = self.add(parent, NodeLabel::Let(chain.clone()))?;
        self.g.nodes[id].kind = NodeKind::Let;
        let mut parts: Vec<Configuration> = chain.bindings.into_iter().map(|(c, _)| c).collect();
        parts.push(chain.body);
        for c in parts {
            let child = self.add(Some(id), NodeLabel::Config(c))?;
            self.g.nodes[id].children.push((Contraction::new(), child));
        }
        Ok(id)
    }

    fn kill_subtree(&mut self, id: NodeId) {
        let mut stack: Vec<NodeId> = self.g.nodes[id].children.drain(..).map(|(_, c)| c).collect();
        while let Some(n) = stack.pop() {
            self.g.nodes[n].alive = false;
            stack.extend(self.g.nodes[n].children.iter().map(|(_, c)| *c));
        }
    }

    /// Driven ancestors of `id`, root first.
    fn history(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut cur = self.g.nodes[id].parent;
        while let Some(p) = cur {
            if self.g.nodes[p].kind == NodeKind::Driven {
                out.push(p);
            }
            cur = self.g.nodes[p].parent;
        }
        out.reverse();
        out
    }

    fn config(&self, id: NodeId) -> &Configuration {
        self.g.nodes[id].config().expect("configuration node")
    }

    fn step(&mut self, c: &Configuration) -> Result<Vec<Branch>, ScError> {
        self.g.stats.steps += 1;
        if self.g.stats.steps > self.opts.budget.max_steps {
            return Err(self.exhausted(format!("more than {} driving steps", self.opts.budget.max_steps)));
        }
        Ok(drive_step(c, self.prog, &mut self.supply)?)
    }

    fn run(&mut self) -> Result<(), ScError> {
        while let Some(id) = self.todo.pop() {
            let n = &self.g.nodes[id];
            if !n.alive || n.kind != NodeKind::Open {
                continue;
            }
            self.process(id)?;
        }
        Ok(())
    }

    fn process(&mut self, id: NodeId) -> Result<(), ScError> {
        let mut c = self.config(id).clone();
        if c.is_passive() {
            self.g.nodes[id].kind = NodeKind::Passive;
            return Ok(());
        }
        // Deterministic steps are not whistle points.
        let mut branches = self.step(&c)?;
        let mut skipped = 0;
        while is_transitive_step(&branches) && skipped < self.opts.transitive_limit {
            let Outcome::Next(chain) = branches.pop().unwrap().outcome else { unreachable!() };
            c = chain.body;
            skipped += 1;
            if c.is_passive() {
                break;
            }
            branches = self.step(&c)?;
        }
        self.g.nodes[id].transitive_steps = skipped;
        self.g.nodes[id].label = NodeLabel::Config(c.clone());
        if c.is_passive() {
            self.g.nodes[id].kind = NodeKind::Passive;
            return Ok(());
        }
        if let [Branch { theta, outcome: Outcome::Bottom }] = branches.as_slice() {
            if theta.is_empty() {
                self.g.nodes[id].kind = NodeKind::Bottom;
                return Ok(());
            }
        }

        let history = self.history(id);
        for &a in history.iter().rev() {
            let ac = self.config(a);
            if ac.same_names(&c) && shared_times(ac, &c).is_empty() {
                if let Some(theta) = match_instance(ac, &c) {
                    self.fold(id, a, theta);
                    return Ok(());
                }
            }
        }

        let configs: Vec<Configuration> = history.iter().map(|&a| self.config(a).clone()).collect();
        if let Decision::Act { ancestor, split } = strategy_decide(&configs, &c, self.opts.whistle) {
            return self.act(history[ancestor], id, split);
        }

        self.expand(id, &c, branches)
    }

    fn expand(&mut self, id: NodeId, c: &Configuration, branches: Vec<Branch>) -> Result<(), ScError> {
        self.g.nodes[id].kind = NodeKind::Driven;
        for br in branches {
            let child = match br.outcome {
                Outcome::Bottom => {
                    let narrowed = apply_unchecked(c, &br.theta);
                    let child = self.add(Some(id), NodeLabel::Config(narrowed))?;
                    self.g.nodes[child].kind = NodeKind::Bottom;
                    child
                }
                Outcome::Next(chain) => self.add_chain(Some(id), chain)?,
            };
            self.g.nodes[id].children.push((br.theta, child));
        }
        self.queue_open(id);
        Ok(())
    }

    /// Puts the open nodes at or below `id` on the work stack so that the
    /// leftmost is popped first.
    fn queue_open(&mut self, id: NodeId) {
        let mut order = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            let node = &self.g.nodes[n];
            if node.kind == NodeKind::Open {
                order.push(n);
            }
            stack.extend(node.children.iter().rev().map(|(_, c)| *c));
        }
        self.todo.extend(order.into_iter().rev());
    }

    fn record(&mut self, kind: EventKind, ancestor: NodeId, current: &Configuration) {
        let a = self.config(ancestor).clone();
        let shared = shared_times(&a, current);
        match kind {
            EventKind::Fold => self.g.stats.folds += 1,
            EventKind::Generalize => self.g.stats.generalizations += 1,
            EventKind::Decompose => self.g.stats.decompositions += 1,
            EventKind::Split => self.g.stats.splits += 1,
        }
        self.g.trace.push(TraceEvent {
            kind,
            ancestor: a,
            current: current.clone(),
            shared_times: shared,
        });
    }

    fn fold(&mut self, id: NodeId, target: NodeId, theta: Contraction) {
        let c = self.config(id).clone();
        self.record(EventKind::Fold, target, &c);
        self.g.nodes[id].kind = NodeKind::Fold { target, theta };
    }

    fn act(&mut self, a: NodeId, id: NodeId, split: TurchinSplit) -> Result<(), ScError> {
        let c = self.config(id).clone();
        let ac = self.config(a).clone();
        let p = split.prefix_len;
        // The virtual root frame is always part of the context.
        if split.context_len > 1 {
            // The ancestor's prefix and context become separate tasks.
            self.record(EventKind::Decompose, a, &c);
            let chain = self.cut(&ac, p);
            self.replace_with_let(a, chain)?;
            return Ok(());
        }
        if split.middle_len > 0 {
            self.record(EventKind::Split, a, &c);
            let chain = self.cut(&c, p);
            self.replace_with_let(id, chain)?;
            return Ok(());
        }
        if let Some(theta) = match_instance(&ac, &c) {
            self.fold(id, a, theta);
            return Ok(());
        }
        match generalize_msg(&ac, &c, &mut self.supply) {
            Some(gen) => {
                self.record(EventKind::Generalize, a, &c);
                self.kill_subtree(a);
                self.g.nodes[a].kind = NodeKind::Generalized { theta: gen.theta_a };
                let child = self.add(Some(a), NodeLabel::Config(gen.config))?;
                self.g.nodes[a].children.push((Contraction::new(), child));
                self.todo.push(child);
            }
            None if c.ln() > 1 => {
                self.record(EventKind::Split, a, &c);
                let chain = self.cut(&c, 1);
                self.replace_with_let(id, chain)?;
            }
            None => {
                // Nothing left to split: drive on.
                self.g.nodes[id].kind = NodeKind::Open;
                return self.expand_plain(id);
            }
        }
        Ok(())
    }

    fn expand_plain(&mut self, id: NodeId) -> Result<(), ScError> {
        let c = self.config(id).clone();
        let branches = self.step(&c)?;
        self.expand(id, &c, branches)
    }

    /// `let v = [top p frames] in [rest with v]`.
    fn cut(&mut self, c: &Configuration, p: usize) -> LetChain {
        let v = self.supply.fresh_param(Sort::E);
        let top = Configuration {
            stack: c.stack[..p].to_vec(),
            tail: Expr::hole(),
        };
        let filled = Expr::var(v.clone());
        let body = match c.stack.get(p) {
            Some(next) => {
                let mut stack = vec![Frame {
                    name: next.name.clone(),
                    args: next.args.iter().map(|a| a.fill_hole(&filled)).collect(),
                    time: next.time,
                }];
                stack.extend(c.stack[p + 1..].iter().cloned());
                Configuration {
                    stack,
                    tail: c.tail.clone(),
                }
            }
            None => Configuration::passive(c.tail.fill_hole(&filled)),
        };
        LetChain {
            bindings: vec![(top, v)],
            body,
        }
    }

    /// Turns node `id` into a `let` over the parts of `chain`, dropping
    /// whatever was built below it.
    fn replace_with_let(&mut self, id: NodeId, chain: LetChain) -> Result<(), ScError> {
        self.kill_subtree(id);
        self.g.nodes[id].label = NodeLabel::Let(chain.clone());
        self.g.nodes[id].kind = NodeKind::Let;
        let mut parts: Vec<Configuration> = chain.bindings.into_iter().map(|(c, _)| c).collect();
        parts.push(chain.body);
        for c in parts {
            let child = self.add(Some(id), NodeLabel::Config(c))?;
            self.g.nodes[id].children.push((Contraction::new(), child));
        }
        self.queue_open(id);
        Ok(())
    }
}
