//! Restricted homeomorphic embedding and Turchin's relation.

use std::collections::HashMap;

use crate::config::{Configuration, Frame};
use crate::syntax::{Expr, Item, Sort, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbedVerdict {
    No,
    Embeds,
    EmbedsStrictly,
}

impl EmbedVerdict {
    pub fn holds(self) -> bool {
        self != EmbedVerdict::No
    }
}

/// `a ⪯ b` on append-normal expressions, with `a ≺ b` reported when the
/// two also differ after canonical renaming of parameters.
pub fn embeds(a: &Expr, b: &Expr) -> EmbedVerdict {
    if !embeds_bool(a, b) {
        EmbedVerdict::No
    } else if canonical(a) == canonical(b) {
        EmbedVerdict::Embeds
    } else {
        EmbedVerdict::EmbedsStrictly
    }
}

pub fn embeds_bool(a: &Expr, b: &Expr) -> bool {
    Embedder::default().seq(a.items(), b.items(), false)
}

type Key = (usize, usize, usize, usize, bool);

#[derive(Default)]
struct Embedder {
    memo: HashMap<Key, bool>,
}

impl Embedder {
    /// `closing` marks the rest of a parenthesized sequence coupled with
    /// another one: there an exhausted `a` does not embed into a single
    /// remaining symbol, which is `([]) ⋠ (σ)` read modulo
    /// `term : exp = term ++ exp`.
    fn seq(&mut self, a: &[Item], b: &[Item], closing: bool) -> bool {
        if a.is_empty() {
            return !(closing && is_single_symbolic(b));
        }
        if a.len() > size_of_seq(b) {
            return false;
        }
        if a == b {
            return true;
        }
        let key = (a.as_ptr() as usize, a.len(), b.as_ptr() as usize, b.len(), closing);
        if let Some(&r) = self.memo.get(&key) {
            return r;
        }
        let r = self.seq_uncached(a, b, closing);
        self.memo.insert(key, r);
        r
    }

    fn seq_uncached(&mut self, a: &[Item], b: &[Item], closing: bool) -> bool {
        let Some((y, b_rest)) = b.split_first() else {
            return false;
        };
        // Couple the heads.
        if self.couple(&a[0], y) && self.seq(&a[1..], b_rest, closing) {
            return true;
        }
        // Dive: a block of `a` goes inside `y`.
        let inner: Vec<&[Item]> = match y {
            Item::Paren(e) => vec![e.items()],
            Item::Call(c) => c.args.iter().map(|x| x.items()).collect(),
            _ => Vec::new(),
        };
        for part in inner {
            for k in 1..=a.len() {
                if self.seq(&a[..k], part, false) && self.seq(&a[k..], b_rest, closing) {
                    return true;
                }
            }
        }
        // Skip the head of `b`.
        self.seq(a, b_rest, closing)
    }

    fn couple(&mut self, x: &Item, y: &Item) -> bool {
        match (x, y) {
            (Item::Sym(s), Item::Sym(t)) => s == t,
            (Item::Var(v), Item::Var(w)) => {
                if v.is_hole() || w.is_hole() {
                    v == w
                } else {
                    v.sort == w.sort
                }
            }
            (Item::Paren(s), Item::Paren(t)) => self.seq(s.items(), t.items(), true),
            (Item::Call(f), Item::Call(g)) => {
                f.name == g.name
                    && f.args.len() == g.args.len()
                    && f.args.iter().zip(&g.args).all(|(s, t)| self.seq(s.items(), t.items(), false))
            }
            _ => false,
        }
    }
}

fn is_single_symbolic(items: &[Item]) -> bool {
    matches!(items, [Item::Sym(_)] | [Item::Var(Var { sort: Sort::S, .. })])
}

fn size_of_seq(b: &[Item]) -> usize {
    b.iter()
        .map(|i| match i {
            Item::Paren(e) => 1 + size_of_seq(e.items()),
            Item::Call(c) => 1 + c.args.iter().map(|a| size_of_seq(a.items())).sum::<usize>(),
            _ => 1,
        })
        .sum()
}

/// Renames parameters to `0, 1, ...` by first occurrence, per sort.
pub fn canonical(e: &Expr) -> Expr {
    let vars = e.vars();
    e.substitute(&|v| {
        let i = vars.iter().filter(|w| w.sort == v.sort).position(|w| w == v)?;
        Some(Expr::var(Var::new(v.sort, &format!("c{i}"))))
    })
}

/// `f(a_1..a_n) ⪯ g(b_1..b_n)`: same name, argument-wise embedding.
pub fn frame_embeds(f: &Frame, g: &Frame) -> bool {
    f.name == g.name && f.args.len() == g.args.len() && f.args.iter().zip(&g.args).all(|(a, b)| embeds_bool(a, b))
}

/// Shape of a Turchin pair: `prefix_len` top frames of each side are the
/// prefixes, the bottom `context_len` frames the shared context, and
/// `middle_len` extra frames of the later configuration sit in between.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TurchinSplit {
    pub prefix_len: usize,
    pub middle_len: usize,
    pub context_len: usize,
}

impl TurchinSplit {
    pub fn prefix_len_i(&self) -> usize {
        self.prefix_len
    }

    pub fn prefix_len_j(&self) -> usize {
        self.prefix_len
    }
}

/// Timed application identity.
fn key(f: &Frame) -> (&str, u64) {
    (&f.name, f.time)
}

fn turchin_keys(ci: &[(&str, u64)], cj: &[(&str, u64)]) -> Option<TurchinSplit> {
    let (k, m) = (ci.len(), cj.len());
    if k > m {
        return None;
    }
    let common = ci.iter().rev().zip(cj.iter().rev()).take_while(|(x, y)| x == y).count();
    // Context must be non-empty and leave at least one prefix frame.
    if common == 0 || common >= k {
        return None;
    }
    let prefix_len = k - common;
    if !ci[..prefix_len].iter().zip(&cj[..prefix_len]).all(|(x, y)| x.0 == y.0) {
        return None;
    }
    Some(TurchinSplit {
        prefix_len,
        middle_len: m - k,
        context_len: common,
    })
}

/// `ci ◁ cj` for `ci` created before `cj` on one path.
pub fn turchin(ci: &Configuration, cj: &Configuration) -> Option<TurchinSplit> {
    let a: Vec<_> = ci.stack.iter().map(key).collect();
    let b: Vec<_> = cj.stack.iter().map(key).collect();
    turchin_keys(&a, &b)
}

/// Name of the virtual frame placed under every stack by
/// [`turchin_rooted`].
pub const ROOT_FRAME: &str = "";

/// Turchin's relation with a shared virtual bottom frame (time 0) under
/// both stacks, so that configurations without a real common context can
/// still be related through their whole stacks. `context_len` counts the
/// virtual frame.
pub fn turchin_rooted(ci: &Configuration, cj: &Configuration) -> Option<TurchinSplit> {
    let root = (ROOT_FRAME, 0);
    let a: Vec<_> = ci.stack.iter().map(key).chain(std::iter::once(root)).collect();
    let b: Vec<_> = cj.stack.iter().map(key).chain(std::iter::once(root)).collect();
    turchin_keys(&a, &b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Continue,
    /// `ancestor` indexes the history slice.
    Act { ancestor: usize, split: TurchinSplit },
}

/// Which whistle drives the strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WhistleKind {
    /// Turchin's relation composed with prefix-wise embedding.
    #[default]
    TurchinEmbedding,
    /// Plain embedding of whole configurations with equal stacks.
    PureEmbedding,
}

/// Scans `history` from the most recent entry back and returns the first
/// ancestor that is both Turchin-related to `current` and embeds into it
/// prefix-wise.
pub fn strategy_decide(history: &[Configuration], current: &Configuration, kind: WhistleKind) -> Decision {
    if current.is_passive() {
        return Decision::Continue;
    }
    for (idx, anc) in history.iter().enumerate().rev() {
        if anc.is_passive() {
            continue;
        }
        match kind {
            WhistleKind::TurchinEmbedding => {
                let Some(split) = turchin_rooted(anc, current) else { continue };
                let prefix_ok = anc.stack[..split.prefix_len]
                    .iter()
                    .zip(&current.stack[..split.prefix_len])
                    .all(|(f, g)| frame_embeds(f, g));
                if prefix_ok {
                    return Decision::Act { ancestor: idx, split };
                }
            }
            WhistleKind::PureEmbedding => {
                if anc.same_names(current)
                    && anc.stack.iter().zip(&current.stack).all(|(f, g)| frame_embeds(f, g))
                    && embeds_bool(&anc.tail, &current.tail)
                {
                    let split = TurchinSplit {
                        prefix_len: anc.ln(),
                        middle_len: 0,
                        context_len: 1,
                    };
                    return Decision::Act { ancestor: idx, split };
                }
            }
        }
    }
    Decision::Continue
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_expr;

    fn e(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn variables_embed_by_sort() {
        assert_eq!(embeds(&e("e.1"), &e("e.2")), EmbedVerdict::Embeds);
        assert_eq!(embeds(&e("s.1"), &e("e.2")), EmbedVerdict::No);
        assert_eq!(embeds(&e("s.1"), &e("s.2")), EmbedVerdict::Embeds);
    }

    #[test]
    fn restriction() {
        assert_eq!(embeds(&e("([])"), &e("('a')")), EmbedVerdict::No);
        assert_eq!(embeds(&e("([])"), &e("(s.1)")), EmbedVerdict::No);
        assert_eq!(embeds(&e("([])"), &e("(A B)")), EmbedVerdict::EmbedsStrictly);
        assert_eq!(embeds(&e("[]"), &e("'a'")), EmbedVerdict::EmbedsStrictly);
    }

    #[test]
    fn clause_two() {
        let t = e("A (B e.1)");
        assert!(embeds(&t, &Expr::paren(t.clone())).holds());
        assert!(embeds(&t, &e("X A (B e.1)")).holds());
        assert!(embeds(&t, &e("A (B e.1) ++ e.7")).holds());
        assert!(embeds(&t, &e("F(Q, A (B e.1))")).holds());
        assert_eq!(embeds(&t, &t), EmbedVerdict::Embeds);
    }

    #[test]
    fn coupling() {
        assert!(embeds(&e("(Valid I)"), &e("(Valid I I)")).holds());
        assert!(!embeds(&e("(Dirty I)"), &e("(Dirty)")).holds());
        assert!(!embeds(&e("(Valid I)"), &e("(Dirty I)")).holds());
    }

    #[test]
    fn restriction_applies_to_the_rest_of_a_coupled_paren() {
        assert!(!embeds(&e("(Dirty)"), &e("(Dirty I)")).holds());
        assert!(!embeds(&e("(Dirty)"), &e("(Dirty s.1)")).holds());
        assert!(embeds(&e("(Dirty)"), &e("(Dirty I I)")).holds());
        assert!(embeds(&e("(Dirty)"), &e("(Dirty e.1)")).holds());
        // Outside a coupled paren the rest is free.
        assert!(embeds(&e("Dirty"), &e("Dirty I")).holds());
    }

    #[test]
    fn strictness_is_renaming_invariant() {
        assert_eq!(embeds(&e("A e.1 s.3"), &e("A e.9 s.4")), EmbedVerdict::Embeds);
    }

    fn timed(frames: &[(&str, u64)]) -> Configuration {
        Configuration {
            stack: frames
                .iter()
                .map(|(n, t)| Frame {
                    name: (*n).into(),
                    args: vec![],
                    time: *t,
                })
                .collect(),
            tail: Expr::hole(),
        }
    }

    #[test]
    fn turchin_worked_example() {
        let c1 = timed(&[("f", 4), ("f", 3), ("g", 2), ("t", 1)]);
        let c2 = timed(&[("f", 10), ("f", 7), ("g", 5), ("h", 6), ("t", 1)]);
        let split = turchin(&c1, &c2).unwrap();
        assert_eq!(
            split,
            TurchinSplit {
                prefix_len: 3,
                middle_len: 1,
                context_len: 1
            }
        );
    }

    #[test]
    fn turchin_negative_cases() {
        let c1 = timed(&[("f", 4), ("g", 2), ("t", 1)]);
        assert!(turchin(&c1, &c1).is_none());
        let shorter = timed(&[("g", 9)]);
        assert!(turchin(&c1, &shorter).is_none());
        let no_context = timed(&[("f", 8), ("g", 7), ("t", 6)]);
        assert!(turchin(&c1, &no_context).is_none());
        assert!(turchin_rooted(&c1, &no_context).is_some());
    }

    #[test]
    fn strategy_needs_prefix_embedding() {
        let mk = |arg: &str, t: u64| Configuration {
            stack: vec![Frame {
                name: "Loop".into(),
                args: vec![e(arg)],
                time: t,
            }],
            tail: Expr::hole(),
        };
        let a = mk("(Valid I)", 1);
        let b = mk("(Valid I I)", 2);
        let c = mk("(Valid)", 3);
        assert_eq!(strategy_decide(&[], &b, WhistleKind::default()), Decision::Continue);
        assert!(matches!(strategy_decide(std::slice::from_ref(&a), &b, WhistleKind::default()), Decision::Act { ancestor: 0, .. }));
        assert_eq!(strategy_decide(std::slice::from_ref(&a), &c, WhistleKind::default()), Decision::Continue);
    }
}
