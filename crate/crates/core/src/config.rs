//! Parameterized configurations: timed call stacks over a passive tail.

use std::collections::BTreeMap;
use std::fmt;

use crate::syntax::{Call, Expr, Item, Name, Sort, Var};

/// Fresh parameters and time labels for one supercompilation run.
#[derive(Debug, Clone, Default)]
pub struct Supply {
    next_param: u64,
    next_time: u64,
}

impl Supply {
    pub fn new() -> Supply {
        Supply {
            next_param: 1,
            next_time: 1,
        }
    }

    pub fn fresh_param(&mut self, sort: Sort) -> Var {
        let v = Var::new(sort, &self.next_param.to_string());
        self.next_param += 1;
        v
    }

    pub fn fresh_time(&mut self) -> u64 {
        let t = self.next_time;
        self.next_time += 1;
        t
    }

    /// Renames every variable of `e` to a fresh parameter, consistently.
    pub fn freshen(&mut self, e: &Expr) -> (Expr, Contraction) {
        let mut ren = Contraction::new();
        for v in e.vars() {
            let p = self.fresh_param(v.sort);
            ren.insert(v, Expr::var(p));
        }
        (ren.apply(e), ren)
    }
}

/// One timed application `f(args)`. Only frames below the top carry
/// the hole.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    pub name: Name,
    pub args: Vec<Expr>,
    pub time: u64,
}

impl Frame {
    pub fn call(&self) -> Expr {
        Expr(vec![Item::Call(Call {
            name: self.name.clone(),
            args: self.args.clone(),
        })])
    }

    fn fill_hole(&self, value: &Expr) -> Frame {
        Frame {
            name: self.name.clone(),
            args: self.args.iter().map(|a| a.fill_hole(value)).collect(),
            time: self.time,
        }
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.call())
    }
}

/// `f_1(..), f_2(..•..), ..., tail`, top first. The top frame has
/// passive, hole-free arguments; each lower frame holds the hole once,
/// and so does the tail when the stack is non-empty. An empty stack is
/// a passive leaf.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub stack: Vec<Frame>,
    pub tail: Expr,
}

impl Configuration {
    pub fn passive(tail: Expr) -> Configuration {
        Configuration {
            stack: Vec::new(),
            tail,
        }
    }

    pub fn is_passive(&self) -> bool {
        self.stack.is_empty()
    }

    /// Number of upper applications.
    pub fn ln(&self) -> usize {
        self.stack.len()
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.stack.iter().map(|f| &f.name)
    }

    pub fn same_names(&self, other: &Configuration) -> bool {
        self.ln() == other.ln() && self.names().eq(other.names())
    }

    /// The expression this configuration stands for.
    pub fn to_expr(&self) -> Expr {
        let mut acc: Option<Expr> = None;
        for frame in &self.stack {
            acc = Some(match acc {
                None => frame.call(),
                Some(inner) => frame.fill_hole(&inner).call(),
            });
        }
        match acc {
            None => self.tail.clone(),
            Some(inner) => self.tail.fill_hole(&inner),
        }
    }

    /// Parameters in order of first occurrence.
    pub fn params(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut seen = Default::default();
        for frame in &self.stack {
            for a in &frame.args {
                a.collect_vars(&mut out, &mut seen);
            }
        }
        self.tail.collect_vars(&mut out, &mut seen);
        out
    }

    pub fn exprs(&self) -> impl Iterator<Item = &Expr> {
        self.stack.iter().flat_map(|f| f.args.iter()).chain(std::iter::once(&self.tail))
    }

    pub fn size(&self) -> usize {
        self.exprs().map(Expr::size).sum::<usize>() + self.ln()
    }

    /// Checks the hole discipline and passivity of all parts.
    pub fn well_formed(&self) -> Result<(), String> {
        for (i, frame) in self.stack.iter().enumerate() {
            let holes: usize = frame.args.iter().map(count_holes).sum();
            let want = usize::from(i > 0);
            if holes != want {
                return Err(format!("frame {i} ({}) holds {holes} holes, expected {want}", frame.name));
            }
            if !frame.args.iter().all(Expr::is_passive) {
                return Err(format!("frame {i} ({}) has an active argument", frame.name));
            }
        }
        let want = usize::from(!self.stack.is_empty());
        if count_holes(&self.tail) != want {
            return Err(format!("tail holds {} holes, expected {want}", count_holes(&self.tail)));
        }
        if !self.tail.is_passive() {
            return Err("tail is active".into());
        }
        Ok(())
    }
}

pub fn count_holes(e: &Expr) -> usize {
    e.items()
        .iter()
        .map(|item| match item {
            Item::Var(v) => usize::from(v.is_hole()),
            Item::Paren(inner) => count_holes(inner),
            Item::Call(c) => c.args.iter().map(count_holes).sum(),
            Item::Sym(_) => 0,
        })
        .sum()
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for frame in &self.stack {
            write!(f, "{frame}, ")?;
        }
        write!(f, "{}", self.tail)
    }
}

/// `let v_1 = C_1 in ... let v_n = C_n in body`; later parts may use
/// earlier binders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LetChain {
    pub bindings: Vec<(Configuration, Var)>,
    pub body: Configuration,
}

impl LetChain {
    pub fn single(c: Configuration) -> LetChain {
        LetChain {
            bindings: Vec::new(),
            body: c,
        }
    }

    pub fn is_single(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn to_expr(&self) -> Expr {
        let mut e = self.body.to_expr();
        for (c, v) in self.bindings.iter().rev() {
            let value = c.to_expr();
            e = e.substitute(&|w| (w == v).then(|| value.clone()));
        }
        e
    }
}

impl fmt::Display for LetChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (c, v) in &self.bindings {
            write!(f, "let {v} = {c} in ")?;
        }
        write!(f, "{}", self.body)
    }
}

/// Substitution on parameters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Contraction(pub BTreeMap<Var, Expr>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortViolation(pub Var, pub Expr);

impl Contraction {
    pub fn new() -> Contraction {
        Contraction(BTreeMap::new())
    }

    pub fn single(v: Var, e: Expr) -> Contraction {
        let mut c = Contraction::new();
        c.insert(v, e);
        c
    }

    pub fn insert(&mut self, v: Var, e: Expr) {
        self.0.insert(v, e);
    }

    pub fn get(&self, v: &Var) -> Option<&Expr> {
        self.0.get(v)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when every binding maps a parameter to itself.
    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|(v, e)| e.items() == [Item::Var(v.clone())])
    }

    pub fn check_sorts(&self) -> Result<(), SortViolation> {
        for (v, e) in &self.0 {
            let ok = match v.sort {
                Sort::E => !e.contains_hole(),
                Sort::S => matches!(e.items(), [Item::Sym(_)] | [Item::Var(Var { sort: Sort::S, .. })]),
            };
            if !ok {
                return Err(SortViolation(v.clone(), e.clone()));
            }
        }
        Ok(())
    }

    pub fn apply(&self, e: &Expr) -> Expr {
        if self.0.is_empty() {
            return e.clone();
        }
        e.substitute(&|v| self.0.get(v).cloned())
    }

    /// `self` followed by `then`: apply(then, apply(self, x)).
    pub fn compose(&self, then: &Contraction) -> Contraction {
        let mut out = Contraction::new();
        for (v, e) in &self.0 {
            out.insert(v.clone(), then.apply(e));
        }
        for (v, e) in &then.0 {
            out.0.entry(v.clone()).or_insert_with(|| e.clone());
        }
        out
    }
}

impl fmt::Display for Contraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} -> {e}")?;
        }
        f.write_str("}")
    }
}

pub fn apply_contraction(c: &Configuration, theta: &Contraction) -> Result<Configuration, SortViolation> {
    theta.check_sorts()?;
    Ok(apply_unchecked(c, theta))
}

pub(crate) fn apply_unchecked(c: &Configuration, theta: &Contraction) -> Configuration {
    Configuration {
        stack: c
            .stack
            .iter()
            .map(|f| Frame {
                name: f.name.clone(),
                args: f.args.iter().map(|a| theta.apply(a)).collect(),
                time: f.time,
            })
            .collect(),
        tail: theta.apply(&c.tail),
    }
}

// ---------------------------------------------------------------------
// Decomposition

/// Position of a call inside an expression: indices through items, then
/// into a call argument or a parenthesis.
#[derive(Debug, Clone)]
enum Step {
    Paren(usize),
    Arg(usize, usize),
}

/// Path to the leftmost-innermost call, listing each enclosing call.
fn leftmost_innermost(e: &Expr) -> Option<Vec<Step>> {
    for (i, item) in e.items().iter().enumerate() {
        match item {
            Item::Paren(inner) => {
                if let Some(mut p) = leftmost_innermost(inner) {
                    p.insert(0, Step::Paren(i));
                    return Some(p);
                }
            }
            Item::Call(c) => {
                for (j, a) in c.args.iter().enumerate() {
                    if let Some(mut p) = leftmost_innermost(a) {
                        p.insert(0, Step::Arg(i, j));
                        return Some(p);
                    }
                }
                return Some(vec![Step::Arg(i, usize::MAX)]);
            }
            _ => {}
        }
    }
    None
}

/// Splits `e` at `path`: the context with the hole and the call there.
fn cut(e: &Expr, path: &[Step]) -> (Expr, Call) {
    let mut items = e.0.clone();
    match path[0] {
        Step::Paren(i) => {
            let Item::Paren(inner) = &items[i] else { unreachable!() };
            let (ctx, c) = cut(inner, &path[1..]);
            items[i] = Item::Paren(ctx);
            (Expr(items), c)
        }
        Step::Arg(i, usize::MAX) => {
            let Item::Call(c) = std::mem::replace(&mut items[i], Item::Var(Var::hole())) else {
                unreachable!()
            };
            (Expr(items), c)
        }
        Step::Arg(i, j) => {
            let Item::Call(c) = &items[i] else { unreachable!() };
            let (ctx, inner) = cut(&c.args[j], &path[1..]);
            let mut c = c.clone();
            c.args[j] = ctx;
            items[i] = Item::Call(c);
            (Expr(items), inner)
        }
    }
}

/// Result of peeling the innermost call chain off an expression.
struct Peeled {
    /// Innermost first; all but the first hold the hole.
    frames: Vec<(Name, Vec<Expr>)>,
    /// The remaining context with the hole where the outermost peeled
    /// call was.
    context: Expr,
}

/// Peels the leftmost-innermost call and every enclosing call that is
/// passive apart from the hole. Returns `None` for passive input.
fn peel(e: &Expr) -> Option<Peeled> {
    let path = leftmost_innermost(e)?;
    let (mut context, call) = cut(e, &path);
    let mut frames = vec![(call.name, call.args)];
    // Climb through the calls immediately enclosing the hole.
    while let Some(p) = hole_call_path(&context) {
        let (outer_ctx, outer) = cut(&context, &p);
        if !outer.args.iter().all(Expr::is_passive) {
            break;
        }
        frames.push((outer.name, outer.args));
        context = outer_ctx;
    }
    Some(Peeled { frames, context })
}

/// Path to the innermost call whose argument holds the hole.
fn hole_call_path(e: &Expr) -> Option<Vec<Step>> {
    fn go(e: &Expr) -> Option<Vec<Step>> {
        for (i, item) in e.items().iter().enumerate() {
            match item {
                Item::Paren(inner) if inner.contains_hole() => {
                    let mut p = go(inner)?;
                    p.insert(0, Step::Paren(i));
                    return Some(p);
                }
                Item::Call(c) => {
                    for (j, a) in c.args.iter().enumerate() {
                        if a.contains_hole() {
                            return Some(match go(a) {
                                Some(mut p) => {
                                    p.insert(0, Step::Arg(i, j));
                                    p
                                }
                                None => vec![Step::Arg(i, usize::MAX)],
                            });
                        }
                    }
                }
                _ => {}
            }
        }
        None
    }
    go(e)
}

/// Decomposes `e` placed into the hole of `rest` (lower frames with
/// their times) over `tail`. New frames get fresh times.
pub fn decompose_into(e: &Expr, rest: &[Frame], tail: &Expr, supply: &mut Supply) -> LetChain {
    let mut bindings = Vec::new();
    let mut current = e.clone();
    loop {
        let Some(peeled) = peel(&current) else {
            // Passive: it fills the next frame, or the tail.
            let body = match rest.split_first() {
                Some((next, lower)) => {
                    let mut stack = vec![next.fill_hole(&current)];
                    stack.extend(lower.iter().cloned());
                    Configuration {
                        stack,
                        tail: tail.clone(),
                    }
                }
                None => Configuration::passive(tail.fill_hole(&current)),
            };
            return split_tail(bindings, body, supply);
        };
        let mut stack: Vec<Frame> = peeled
            .frames
            .into_iter()
            .map(|(name, args)| Frame {
                name,
                args,
                time: supply.fresh_time(),
            })
            .collect();
        if peeled.context.is_passive() {
            let body = match rest.split_first() {
                Some((next, lower)) => {
                    stack.push(next.fill_hole(&peeled.context));
                    stack.extend(lower.iter().cloned());
                    Configuration {
                        stack,
                        tail: tail.clone(),
                    }
                }
                None => Configuration {
                    stack,
                    tail: tail.fill_hole(&peeled.context),
                },
            };
            return split_tail(bindings, body, supply);
        }
        let v = supply.fresh_param(Sort::E);
        bindings.push((
            Configuration {
                stack,
                tail: Expr::hole(),
            },
            v.clone(),
        ));
        current = peeled.context.fill_hole(&Expr::var(v));
    }
}

/// A stacked configuration keeps a bare `•` tail; anything around the
/// hole moves into a passive body.
fn split_tail(mut bindings: Vec<(Configuration, Var)>, body: Configuration, supply: &mut Supply) -> LetChain {
    if body.stack.is_empty() || body.tail.items() == [Item::Var(Var::hole())] {
        return LetChain { bindings, body };
    }
    let v = supply.fresh_param(Sort::E);
    let tail = body.tail.fill_hole(&Expr::var(v.clone()));
    bindings.push((
        Configuration {
            stack: body.stack,
            tail: Expr::hole(),
        },
        v,
    ));
    LetChain {
        bindings,
        body: Configuration::passive(tail),
    }
}

pub fn decompose_expression(e: &Expr, supply: &mut Supply) -> LetChain {
    decompose_into(e, &[], &Expr::hole(), supply)
}

// ---------------------------------------------------------------------
// Instances

/// Finds θ with θ(general) = candidate, ignoring times. Parameters of
/// the candidate are constants here; e-parameters of `general` may sit
/// anywhere in a sequence.
pub fn match_instance(general: &Configuration, candidate: &Configuration) -> Option<Contraction> {
    if !general.same_names(candidate) {
        return None;
    }
    let mut todo = Vec::new();
    for (g, c) in general.stack.iter().zip(&candidate.stack) {
        if g.args.len() != c.args.len() {
            return None;
        }
        for (a, b) in g.args.iter().zip(&c.args) {
            todo.push((a.items(), b.items()));
        }
    }
    todo.push((general.tail.items(), candidate.tail.items()));
    let mut theta = BTreeMap::new();
    solve(todo, &mut theta).then_some(Contraction(theta))
}

/// Same as [`match_instance`] on bare expressions.
pub fn match_expr(general: &Expr, candidate: &Expr) -> Option<Contraction> {
    let mut theta = BTreeMap::new();
    solve(vec![(general.items(), candidate.items())], &mut theta).then_some(Contraction(theta))
}

type Todo<'a> = Vec<(&'a [Item], &'a [Item])>;

fn solve(mut todo: Todo<'_>, theta: &mut BTreeMap<Var, Expr>) -> bool {
    let Some((g, c)) = todo.pop() else {
        return true;
    };
    let Some((head, g_rest)) = g.split_first() else {
        return c.is_empty() && solve(todo, theta);
    };
    match head {
        Item::Var(v) if v.sort == Sort::E && !v.is_hole() => {
            if let Some(bound) = theta.get(v) {
                let n = bound.len();
                if c.len() < n || c[..n] != bound.0[..] {
                    return false;
                }
                todo.push((g_rest, &c[n..]));
                return solve(todo, theta);
            }
            // A closing e-parameter takes everything that is left.
            let splits: Vec<usize> = if g_rest.is_empty() {
                vec![c.len()]
            } else {
                (0..=c.len()).collect()
            };
            for k in splits {
                let value = &c[..k];
                if value.iter().any(|i| Expr(vec![i.clone()]).contains_hole()) {
                    break;
                }
                theta.insert(v.clone(), Expr(value.to_vec()));
                let mut next = todo.clone();
                next.push((g_rest, &c[k..]));
                if solve(next, theta) {
                    return true;
                }
                theta.remove(v);
            }
            false
        }
        Item::Var(v) if v.is_hole() => {
            if c.first() != Some(head) {
                return false;
            }
            todo.push((g_rest, &c[1..]));
            solve(todo, theta)
        }
        Item::Var(v) => {
            let Some(first) = c.first() else { return false };
            let single = match first {
                Item::Sym(_) => true,
                Item::Var(w) => w.sort == Sort::S,
                _ => false,
            };
            if !single {
                return false;
            }
            let fresh = match theta.get(v) {
                Some(bound) => {
                    if bound.items() != std::slice::from_ref(first) {
                        return false;
                    }
                    false
                }
                None => {
                    theta.insert(v.clone(), Expr(vec![first.clone()]));
                    true
                }
            };
            todo.push((g_rest, &c[1..]));
            if solve(todo, theta) {
                return true;
            }
            if fresh {
                theta.remove(v);
            }
            false
        }
        Item::Sym(s) => {
            if !matches!(c.first(), Some(Item::Sym(t)) if s == t) {
                return false;
            }
            todo.push((g_rest, &c[1..]));
            solve(todo, theta)
        }
        Item::Paren(gi) => {
            let Some(Item::Paren(ci)) = c.first() else { return false };
            todo.push((g_rest, &c[1..]));
            todo.push((gi.items(), ci.items()));
            solve(todo, theta)
        }
        Item::Call(gc) => {
            let Some(Item::Call(cc)) = c.first() else { return false };
            if gc.name != cc.name || gc.args.len() != cc.args.len() {
                return false;
            }
            todo.push((g_rest, &c[1..]));
            for (a, b) in gc.args.iter().zip(&cc.args).rev() {
                todo.push((a.items(), b.items()));
            }
            solve(todo, theta)
        }
    }
}

// ---------------------------------------------------------------------
// Generalization

/// A generalization `g` with θa(g) = a and θb(g) = b.
#[derive(Debug, Clone)]
pub struct Generalization {
    pub config: Configuration,
    pub theta_a: Contraction,
    pub theta_b: Contraction,
}

struct Msg<'s> {
    supply: &'s mut Supply,
    pairs: Vec<(Expr, Expr, Var)>,
    theta_a: Contraction,
    theta_b: Contraction,
}

impl Msg<'_> {
    fn param_for(&mut self, sort: Sort, a: &[Item], b: &[Item]) -> Var {
        if let Some((_, _, v)) = self.pairs.iter().find(|(x, y, v)| v.sort == sort && x.0 == a && y.0 == b) {
            return v.clone();
        }
        let v = self.supply.fresh_param(sort);
        let (a, b) = (Expr(a.to_vec()), Expr(b.to_vec()));
        self.theta_a.insert(v.clone(), a.clone());
        self.theta_b.insert(v.clone(), b.clone());
        self.pairs.push((a, b, v.clone()));
        v
    }

    fn item(&mut self, a: &Item, b: &Item) -> Option<Item> {
        if a == b && !Expr(vec![a.clone()]).contains_hole() {
            return Some(a.clone());
        }
        match (a, b) {
            (Item::Var(x), Item::Var(y)) if x.is_hole() && y.is_hole() => Some(a.clone()),
            (Item::Paren(x), Item::Paren(y)) => self.seq(x.items(), y.items()).map(Item::Paren),
            _ if symbolic(a) && symbolic(b) => {
                Some(Item::Var(self.param_for(Sort::S, std::slice::from_ref(a), std::slice::from_ref(b))))
            }
            _ => None,
        }
    }

    /// `None` when the holes cannot be aligned.
    fn seq(&mut self, a: &[Item], b: &[Item]) -> Option<Expr> {
        if a == b && !Expr(a.to_vec()).contains_hole() {
            return Some(Expr(a.to_vec()));
        }
        let mut pre = Vec::new();
        let mut i = 0;
        while i < a.len() && i < b.len() && fits(&a[i], &b[i]) {
            match self.item(&a[i], &b[i]) {
                Some(g) => pre.push(g),
                None => break,
            }
            i += 1;
        }
        let mut post = Vec::new();
        let (mut ja, mut jb) = (a.len(), b.len());
        while ja > i && jb > i && fits(&a[ja - 1], &b[jb - 1]) {
            match self.item(&a[ja - 1], &b[jb - 1]) {
                Some(g) => post.push(g),
                None => break,
            }
            ja -= 1;
            jb -= 1;
        }
        post.reverse();
        let (ma, mb) = (&a[i..ja], &b[i..jb]);
        let ha = ma.iter().position(is_hole_item);
        let hb = mb.iter().position(is_hole_item);
        let middle = match (ha, hb) {
            (None, None) => {
                if Expr(ma.to_vec()).contains_hole() || Expr(mb.to_vec()).contains_hole() {
                    return None;
                }
                if ma.is_empty() && mb.is_empty() {
                    Expr::nil()
                } else {
                    Expr::var(self.param_for(Sort::E, ma, mb))
                }
            }
            (Some(x), Some(y)) => {
                let left = self.seq(&ma[..x], &mb[..y])?;
                let right = self.seq(&ma[x + 1..], &mb[y + 1..])?;
                left.append(Expr::hole()).append(right)
            }
            _ => return None,
        };
        Some(Expr(pre).append(middle).append(Expr(post)))
    }
}

fn symbolic(i: &Item) -> bool {
    match i {
        Item::Sym(_) => true,
        Item::Var(v) => v.sort == Sort::S,
        _ => false,
    }
}

fn is_hole_item(i: &Item) -> bool {
    matches!(i, Item::Var(v) if v.is_hole())
}

/// Whether two items may be generalized term by term.
fn fits(a: &Item, b: &Item) -> bool {
    match (a, b) {
        (Item::Paren(x), Item::Paren(y)) => x.contains_hole() == y.contains_hole(),
        (Item::Var(x), Item::Var(y)) if x.is_hole() || y.is_hole() => x == y,
        _ => a == b || (symbolic(a) && symbolic(b)),
    }
}

/// Most specific generalization, frame by frame and then the tail.
/// Times are taken from `a`. `None` when the stacks differ or the holes
/// do not align.
pub fn generalize_msg(a: &Configuration, b: &Configuration, supply: &mut Supply) -> Option<Generalization> {
    if !a.same_names(b) {
        return None;
    }
    let mut m = Msg {
        supply,
        pairs: Vec::new(),
        theta_a: Contraction::new(),
        theta_b: Contraction::new(),
    };
    let mut stack = Vec::with_capacity(a.ln());
    for (fa, fb) in a.stack.iter().zip(&b.stack) {
        if fa.args.len() != fb.args.len() {
            return None;
        }
        let mut args = Vec::with_capacity(fa.args.len());
        for (x, y) in fa.args.iter().zip(&fb.args) {
            args.push(m.seq(x.items(), y.items())?);
        }
        stack.push(Frame {
            name: fa.name.clone(),
            args,
            time: fa.time,
        });
    }
    let tail = m.seq(a.tail.items(), b.tail.items())?;
    Some(Generalization {
        config: Configuration { stack, tail },
        theta_a: m.theta_a,
        theta_b: m.theta_b,
    })
}

/// Generalization of two bare expressions.
pub fn generalize_expr(a: &Expr, b: &Expr, supply: &mut Supply) -> Option<(Expr, Contraction, Contraction)> {
    let mut m = Msg {
        supply,
        pairs: Vec::new(),
        theta_a: Contraction::new(),
        theta_b: Contraction::new(),
    };
    let g = m.seq(a.items(), b.items())?;
    Some((g, m.theta_a, m.theta_b))
}

/// Structural equality ignoring times.
pub fn same_modulo_times(a: &Configuration, b: &Configuration) -> bool {
    a.tail == b.tail
        && a.ln() == b.ln()
        && a.stack.iter().zip(&b.stack).all(|(x, y)| x.name == y.name && x.args == y.args)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_expr;

    fn e(s: &str) -> Expr {
        let hole = Var::e("HOLE");
        parse_expr(&s.replace('•', "e.HOLE"))
            .unwrap()
            .substitute(&|v| (*v == hole).then(Expr::hole))
    }

    #[test]
    fn passive_is_a_leaf() {
        let mut s = Supply::new();
        let chain = decompose_expression(&e("A (e.x) B"), &mut s);
        assert!(chain.is_single());
        assert!(chain.body.is_passive());
    }

    #[test]
    fn nested_calls_stack_innermost_first() {
        let mut s = Supply::new();
        let chain = decompose_expression(&e("F(G(e.p))"), &mut s);
        assert!(chain.is_single());
        let names: Vec<&str> = chain.body.names().map(|n| &**n).collect();
        assert_eq!(names, ["G", "F"]);
        assert_eq!(chain.body.to_string(), "G(e.p), F(•), •");
        assert!(chain.body.stack[0].time < chain.body.stack[1].time);
        assert_eq!(chain.to_expr(), e("F(G(e.p))"));
    }

    #[test]
    fn sibling_calls_split_with_let() {
        let mut s = Supply::new();
        let src = e("F(e.x) ++ (A G(e.y))");
        let chain = decompose_expression(&src, &mut s);
        assert_eq!(chain.bindings.len(), 2);
        assert_eq!(chain.to_expr(), src);
        for (c, _) in &chain.bindings {
            c.well_formed().unwrap();
        }
        chain.body.well_formed().unwrap();
    }

    #[test]
    fn tail_around_hole_is_split() {
        let mut s = Supply::new();
        let src = e("s.x : Append((e.xs) : (e.vs))");
        let chain = decompose_expression(&src, &mut s);
        assert_eq!(chain.bindings.len(), 1);
        assert_eq!(chain.bindings[0].0.tail, Expr::hole());
        assert!(chain.body.is_passive());
        assert_eq!(chain.to_expr(), src);
    }

    #[test]
    fn active_sibling_argument_stops_the_climb() {
        let mut s = Supply::new();
        let src = e("F(G(e.x), H(e.y))");
        let chain = decompose_expression(&src, &mut s);
        assert_eq!(chain.bindings.len(), 1);
        assert_eq!(chain.bindings[0].0.to_string(), "G(e.x), •");
        assert_eq!(chain.to_expr(), src);
    }

    #[test]
    fn rest_frames_keep_their_times() {
        let mut s = Supply::new();
        let rest = vec![Frame {
            name: "Loop".into(),
            args: vec![e("(e.time) : •")],
            time: 7,
        }];
        let chain = decompose_into(&e("(Invalid e.is)"), &rest, &Expr::hole(), &mut s);
        assert_eq!(chain.body.stack[0].time, 7);
        assert_eq!(chain.body.to_string(), "Loop((e.time) : (Invalid e.is)), •");
    }

    fn conf(stack: &[(&str, &str)], tail: &str) -> Configuration {
        Configuration {
            stack: stack
                .iter()
                .enumerate()
                .map(|(i, (n, a))| Frame {
                    name: (*n).into(),
                    args: vec![e(a)],
                    time: i as u64,
                })
                .collect(),
            tail: e(tail),
        }
    }

    #[test]
    fn instance_of_itself_is_identity() {
        let c = conf(&[("F", "A e.1"), ("G", "(•) e.2")], "•");
        let theta = match_instance(&c, &c).unwrap();
        assert!(theta.is_identity());
    }

    #[test]
    fn instance_binds_parameter() {
        let g = conf(&[("Eval", "(e.1) : X")], "•");
        let c = conf(&[("Eval", "(I : e.7) : X")], "•");
        let theta = match_instance(&g, &c).unwrap();
        assert_eq!(theta.get(&Var::e("1")), Some(&e("I e.7")));
        assert!(same_modulo_times(&apply_contraction(&g, &theta).unwrap(), &c));
        let other = conf(&[("Eval", "(I : e.7) : Y")], "•");
        assert!(match_instance(&g, &other).is_none());
    }

    #[test]
    fn e_parameter_in_the_middle() {
        let g = e("A e.1 B e.2");
        let c = e("A X B Y B");
        let theta = match_expr(&g, &c).unwrap();
        assert_eq!(theta.apply(&g), c);
    }

    #[test]
    fn msg_of_unary_counters() {
        let mut s = Supply::new();
        s.fresh_param(Sort::E);
        s.fresh_param(Sort::E);
        let (g, ta, tb) = generalize_expr(&e("I e.1"), &e("I I e.2"), &mut s).unwrap();
        assert_eq!(g, e("I e.3"));
        assert_eq!(ta.apply(&g), e("I e.1"));
        assert_eq!(tb.apply(&g), e("I I e.2"));
    }

    #[test]
    fn msg_symbol_against_paren_is_an_e_parameter() {
        let mut s = Supply::new();
        let (g, _, _) = generalize_expr(&e("A"), &e("(A)"), &mut s).unwrap();
        assert_eq!(g.len(), 1);
        assert!(matches!(&g.items()[0], Item::Var(v) if v.sort == Sort::E));
    }

    #[test]
    fn msg_of_configurations_reapplies() {
        let mut s = Supply::new();
        let a = conf(&[("F", "(Dirty) (Valid I)"), ("G", "(•) A")], "•");
        let b = conf(&[("F", "(Dirty I) (Valid)"), ("G", "(•) B C")], "•");
        let g = generalize_msg(&a, &b, &mut s).unwrap();
        assert!(same_modulo_times(&apply_unchecked(&g.config, &g.theta_a), &a));
        assert!(same_modulo_times(&apply_unchecked(&g.config, &g.theta_b), &b));
        assert!(generalize_msg(&a, &a, &mut s).unwrap().theta_a.is_empty());
    }

    #[test]
    fn contraction_sorts() {
        let bad = Contraction::single(Var::s("1"), e("A B"));
        assert!(bad.check_sorts().is_err());
        let ok = Contraction::single(Var::s("1"), e("A"));
        let c = conf(&[("F", "s.1 e.2")], "•");
        let c2 = apply_contraction(&c, &ok).unwrap();
        assert_eq!(c2.stack[0].time, c.stack[0].time);
        assert_eq!(c2.to_string(), "F(A ++ e.2), •".replace(" ++ ", " "));
    }
}
