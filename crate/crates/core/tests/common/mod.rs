#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use scverify::syntax::{parse_expr, parse_program, Call, Expr, Item, Pattern, Program, Rule, Symbol, Var};

pub const SYNAPSE: &str = include_str!("../../../../corpus/synapse.l");

pub const MUTANTS: [(&str, &str, Variant); 4] = [
    ("rm_keeps_dirty", include_str!("../../../../corpus/mutations/rm_keeps_dirty.l"), Variant::RmKeepsDirty),
    ("test_always_false", include_str!("../../../../corpus/mutations/test_always_false.l"), Variant::TestAlwaysFalse),
    ("wh2_keeps_valid", include_str!("../../../../corpus/mutations/wh2_keeps_valid.l"), Variant::Wh2KeepsValid),
    ("wm_adds_dirty", include_str!("../../../../corpus/mutations/wm_adds_dirty.l"), Variant::WmAddsDirty),
];

pub fn synapse() -> Program {
    parse_program(SYNAPSE).unwrap()
}

/// All corpus models with their oracle variant.
pub fn models() -> Vec<(&'static str, Program, Variant)> {
    let mut out = vec![("synapse", synapse(), Variant::Synapse)];
    out.extend(MUTANTS.iter().map(|(n, src, v)| (*n, parse_program(src).unwrap(), *v)));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    Rm,
    Wh2,
    Wm,
}

impl Event {
    pub const ALL: [Event; 3] = [Event::Rm, Event::Wh2, Event::Wm];

    pub fn name(self) -> &'static str {
        match self {
            Event::Rm => "rm",
            Event::Wh2 => "wh2",
            Event::Wm => "wm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Synapse,
    RmKeepsDirty,
    TestAlwaysFalse,
    Wh2KeepsValid,
    WmAddsDirty,
}

/// Counters of caches in each state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counters {
    pub invalid: u32,
    pub dirty: u32,
    pub valid: u32,
}

/// One guarded transition; `None` when the event is not enabled.
pub fn step(v: Variant, s: Counters, e: Event) -> Option<Counters> {
    let Counters { invalid: i, dirty: d, valid: w } = s;
    match e {
        Event::Rm => {
            if i < 1 {
                return None;
            }
            Some(match v {
                Variant::RmKeepsDirty => Counters { invalid: i - 1, dirty: d, valid: w + 1 },
                _ => Counters { invalid: i - 1 + d, dirty: 0, valid: w + 1 },
            })
        }
        Event::Wh2 => {
            if w < 1 {
                return None;
            }
            Some(match v {
                Variant::Wh2KeepsValid => Counters { invalid: i + d, dirty: 1, valid: w },
                _ => Counters { invalid: i + d + w - 1, dirty: 1, valid: 0 },
            })
        }
        Event::Wm => {
            if i < 1 {
                return None;
            }
            Some(match v {
                Variant::WmAddsDirty => Counters { invalid: i - 1 + w, dirty: d + 1, valid: 0 },
                _ => Counters { invalid: i - 1 + d + w, dirty: 1, valid: 0 },
            })
        }
    }
}

/// The property the final test checks.
pub fn safe_state(v: Variant, s: Counters) -> bool {
    if v == Variant::TestAlwaysFalse {
        return false;
    }
    !(s.dirty >= 1 && s.valid >= 1) && s.dirty < 2
}

/// `None` when some event is not enabled, otherwise the test's verdict
/// on the final state.
pub fn oracle(v: Variant, events: &[Event], extra_invalid: u32) -> Option<bool> {
    let mut s = Counters {
        invalid: 1 + extra_invalid,
        dirty: 0,
        valid: 0,
    };
    for &e in events {
        s = step(v, s, e)?;
    }
    Some(safe_state(v, s))
}

/// Every event string of length at most `n`.
pub fn event_strings(n: usize) -> Vec<Vec<Event>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for s in &layer {
            for e in Event::ALL {
                let mut t: Vec<Event> = s.clone();
                t.push(e);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// The argument of `Main` for an event string and seed.
pub fn main_data(events: &[Event], extra_invalid: u32) -> Expr {
    let ev: Vec<&str> = events.iter().map(|e| e.name()).collect();
    let is = vec!["I"; extra_invalid as usize];
    parse_expr(&format!("({}) : ({})", ev.join(" "), is.join(" "))).unwrap()
}

/// The counterexample search behind the mutants: the first event string
/// up to length `n` whose final test fails.
pub fn violation(v: Variant, n: usize) -> Option<(Vec<Event>, u32)> {
    for seed in 0..=3 {
        for s in event_strings(n) {
            if oracle(v, &s, seed) == Some(false) {
                return Some((s, seed));
            }
        }
    }
    None
}

/// Ground input for `Main` that may also be malformed: unknown events,
/// symbols other than `I`, nested parentheses.
pub fn random_main_data(rng: &mut impl Rng) -> Expr {
    let n = rng.gen_range(0..=6);
    let mut events: Vec<&str> = Vec::new();
    for _ in 0..n {
        events.push(if rng.gen_bool(0.93) {
            ["rm", "wh2", "wm"].choose(rng).unwrap()
        } else {
            "zz"
        });
    }
    let k = rng.gen_range(0..=3);
    let mut is: Vec<&str> = vec!["I"; k];
    if rng.gen_bool(0.05) {
        is.push("J");
    }
    let base = format!("({}) : ({})", events.join(" "), is.join(" "));
    let text = if rng.gen_bool(0.03) { format!("({base})") } else { base };
    parse_expr(&text).unwrap()
}

// ---------------------------------------------------------------------
// Random programs in the encodable fragment

const ALPHABET: [&str; 4] = ["A", "B", "C", "D"];

fn sym(rng: &mut impl Rng) -> Item {
    Item::Sym(Symbol::ident(ALPHABET.choose(rng).unwrap()))
}

/// A linear pattern; returns the variables it binds.
fn random_pattern(rng: &mut impl Rng, depth: u32, next: &mut u32, vars: &mut Vec<Var>) -> Expr {
    let mut items = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        match rng.gen_range(0..4) {
            0 | 1 => items.push(sym(rng)),
            2 => {
                let v = Var::s(&format!("s{next}"));
                *next += 1;
                vars.push(v.clone());
                items.push(Item::Var(v));
            }
            _ if depth > 0 => items.push(Item::Paren(random_pattern(rng, depth - 1, next, vars))),
            _ => items.push(sym(rng)),
        }
    }
    if rng.gen_bool(0.6) {
        let v = Var::e(&format!("e{next}"));
        *next += 1;
        vars.push(v.clone());
        items.push(Item::Var(v));
    }
    Expr(items)
}

/// A right-hand side over `vars`; calls go only to later functions, and
/// e-variables and calls only close a sequence.
fn random_rhs(rng: &mut impl Rng, depth: u32, vars: &[Var], callees: &[String]) -> Expr {
    let mut items = Vec::new();
    let svars: Vec<&Var> = vars.iter().filter(|v| v.sort == scverify::syntax::Sort::S).collect();
    for _ in 0..rng.gen_range(0..=2) {
        match rng.gen_range(0..4) {
            0 => items.push(sym(rng)),
            1 if !svars.is_empty() => items.push(Item::Var((*svars.choose(rng).unwrap()).clone())),
            2 if depth > 0 => items.push(Item::Paren(random_rhs(rng, depth - 1, vars, callees))),
            _ => items.push(sym(rng)),
        }
    }
    match rng.gen_range(0..3) {
        0 if !callees.is_empty() && depth > 0 => items.push(Item::Call(Call {
            name: callees.choose(rng).unwrap().as_str().into(),
            args: vec![random_rhs(rng, depth - 1, vars, callees)],
        })),
        1 if !vars.is_empty() => items.push(Item::Var(vars.choose(rng).unwrap().clone())),
        _ => {}
    }
    Expr(items)
}

/// A terminating unary program `F0 .. Fk` with linear patterns.
pub fn random_program(rng: &mut impl Rng) -> Program {
    let n = rng.gen_range(1..=3);
    let names: Vec<String> = (0..n).map(|i| format!("F{i}")).collect();
    let mut p = Program::default();
    for (i, name) in names.iter().enumerate() {
        let callees = &names[i + 1..];
        for _ in 0..rng.gen_range(1..=3) {
            let mut vars = Vec::new();
            let mut next = 0;
            let pat = random_pattern(rng, 2, &mut next, &mut vars);
            let rhs = random_rhs(rng, 2, &vars, callees);
            p.push_rule(Rule {
                fname: name.as_str().into(),
                patterns: vec![Pattern::new(pat).unwrap()],
                rhs,
            });
        }
    }
    p
}

/// Ground datum over the same alphabet.
pub fn random_datum(rng: &mut impl Rng, depth: u32) -> Expr {
    let mut items = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        if depth > 0 && rng.gen_bool(0.3) {
            items.push(Item::Paren(random_datum(rng, depth - 1)));
        } else {
            items.push(sym(rng));
        }
    }
    Expr(items)
}
