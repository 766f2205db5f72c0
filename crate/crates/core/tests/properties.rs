mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scverify::config::{decompose_expression, generalize_expr, match_expr, Contraction, Supply};
use scverify::encoding::{decode_expression, decode_program, encode_expression, encode_program};
use scverify::syntax::{parse_expr, parse_program, render_expr, Call, Expr, Item, Symbol, Var};
use scverify::whistle::{embeds, embeds_bool, EmbedVerdict};

fn leaf() -> impl Strategy<Value = Item> {
    prop_oneof![
        prop::sample::select(vec!["A", "B", "Loop", "wh2"]).prop_map(|s| Item::Sym(Symbol::ident(s))),
        prop::sample::select(vec!['x', '*', '=']).prop_map(|c| Item::Sym(Symbol::Char(c))),
        (0..3u8).prop_map(|i| Item::Var(Var::s(&format!("v{i}")))),
        (0..3u8).prop_map(|i| Item::Var(Var::e(&format!("v{i}")))),
    ]
}

fn item(calls: bool) -> impl Strategy<Value = Item> {
    leaf().prop_recursive(3, 24, 4, move |inner| {
        let seq = prop::collection::vec(inner, 0..4).prop_map(Expr);
        if calls {
            prop_oneof![
                seq.clone().prop_map(Item::Paren),
                (prop::sample::select(vec!["F", "G"]), prop::collection::vec(seq, 1..3))
                    .prop_map(|(n, args)| Item::Call(Call { name: n.into(), args })),
            ]
            .boxed()
        } else {
            seq.prop_map(Item::Paren).boxed()
        }
    })
}

fn expr() -> impl Strategy<Value = Expr> {
    prop::collection::vec(item(true), 0..5).prop_map(Expr)
}

fn passive() -> impl Strategy<Value = Expr> {
    prop::collection::vec(item(false), 0..5).prop_map(Expr)
}

/// Ground data: no variables, no calls.
fn datum() -> impl Strategy<Value = Expr> {
    passive().prop_map(|e| e.substitute(&|_| Some(Expr::ident("Z"))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn render_then_parse_is_identity(e in expr()) {
        prop_assert_eq!(parse_expr(&render_expr(&e)).unwrap(), e);
    }

    #[test]
    fn data_encoding_round_trips(d in datum()) {
        prop_assert_eq!(decode_expression(&encode_expression(&d).unwrap()).unwrap(), d);
    }

    #[test]
    fn programs_round_trip(seed in any::<u64>()) {
        let p = common::random_program(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(&parse_program(&p.to_string()).unwrap(), &p);
        prop_assert_eq!(&decode_program(&encode_program(&p).unwrap()).unwrap(), &p);
    }

    #[test]
    fn decomposition_reassembles(e in expr()) {
        let chain = decompose_expression(&e, &mut Supply::new());
        for (c, _) in &chain.bindings {
            prop_assert!(c.well_formed().is_ok(), "{}", c);
        }
        prop_assert!(chain.body.well_formed().is_ok(), "{}", chain.body);
        prop_assert_eq!(chain.to_expr(), e);
    }

    #[test]
    fn msg_reapplies(a in expr(), b in expr()) {
        let mut supply = Supply::new();
        if let Some((g, ta, tb)) = generalize_expr(&a, &b, &mut supply) {
            prop_assert!(ta.check_sorts().is_ok() && tb.check_sorts().is_ok());
            prop_assert_eq!(ta.apply(&g), a);
            prop_assert_eq!(tb.apply(&g), b);
        }
    }

    #[test]
    fn msg_of_passive_pairs_exists(a in passive(), b in passive()) {
        prop_assert!(generalize_expr(&a, &b, &mut Supply::new()).is_some());
    }

    #[test]
    fn instances_are_found(g in passive(), s in prop::collection::vec(passive(), 3)) {
        // Substitute e-variables by arbitrary passive expressions and
        // s-variables by symbols.
        let mut theta = Contraction::new();
        for (i, v) in g.vars().into_iter().enumerate() {
            let value = match v.sort {
                scverify::syntax::Sort::E => s[i % 3].clone(),
                scverify::syntax::Sort::S => Expr::ident("Q"),
            };
            theta.insert(v, value);
        }
        let candidate = theta.apply(&g);
        let found = match_expr(&g, &candidate);
        prop_assert!(found.is_some(), "{} against {}", g, candidate);
        prop_assert_eq!(found.unwrap().apply(&g), candidate);
    }

    #[test]
    fn embedding_is_reflexive_and_strict_part_irreflexive(e in expr()) {
        prop_assert_eq!(embeds(&e, &e), EmbedVerdict::Embeds);
    }

    #[test]
    fn a_term_embeds_into_its_wrapping(e in expr(), x in passive()) {
        let wrapped = Expr(vec![Item::Paren(e.clone())]);
        if !e.is_empty() {
            prop_assert!(embeds_bool(&e, &wrapped));
            prop_assert!(embeds_bool(&e, &x.clone().append(e.clone())));
        }
    }
}
