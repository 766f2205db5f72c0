//! Monitors over process-graph traces of the interpreted Synapse run,
//! plus the small graph-shape examples.

mod common;

use std::sync::OnceLock;

use scverify::config::Configuration;
use scverify::driver::{residualize, supercompile, EventKind, NodeKind, Options, ProcessGraph};
use scverify::selfint::int_source;
use scverify::semantics::eval_call;
use scverify::syntax::{parse_expr, parse_program, Expr};
use scverify::verify::{check_no_false, verification_task, Mode, ModelSpec};

fn indirect_graph() -> &'static ProcessGraph {
    static G: OnceLock<ProcessGraph> = OnceLock::new();
    G.get_or_init(|| {
        let m = ModelSpec::from_first_rule("synapse", common::synapse(), "Main").unwrap();
        let (prog, entry) = verification_task(&m, Mode::ViaInterpreter).unwrap();
        supercompile(&prog, &entry, Options::default()).unwrap()
    })
}

fn names(c: &Configuration) -> Vec<&str> {
    c.stack.iter().map(|f| &*f.name).collect()
}

#[test]
fn first_generalization_is_inside_a_big_step() {
    let g = indirect_graph();
    let ev = g
        .trace
        .iter()
        .find(|e| e.kind == EventKind::Generalize)
        .expect("the interpreted run generalizes");
    let prog = parse_expr("(Prog Target)").unwrap();
    for c in [&ev.ancestor, &ev.current] {
        let n = names(c);
        assert_eq!(n[0], "Match", "{c}");
        let matching = n.iter().position(|x| *x == "Matching").unwrap_or_else(|| panic!("no Matching in {c}"));
        let eval = c.stack[matching..]
            .iter()
            .position(|f| &*f.name == "Eval" && f.args.get(1) == Some(&prog) && f.args[0].contains_hole());
        assert!(eval.is_some(), "no Eval(•, (Prog Target)) below Matching in {c}");
    }
}

#[test]
fn configurations_sharing_a_timed_matching_frame_are_kept_apart() {
    let g = indirect_graph();
    let mut checked = 0;
    for ev in g.trace.iter().filter(|e| matches!(e.kind, EventKind::Fold | EventKind::Generalize)) {
        let matching_times: Vec<u64> = ev
            .ancestor
            .stack
            .iter()
            .filter(|f| &*f.name == "Matching")
            .map(|f| f.time)
            .collect();
        assert!(
            ev.shared_times.iter().all(|t| !matching_times.contains(t)),
            "{:?} shares a Matching frame:\n  {}\n  {}",
            ev.kind,
            ev.ancestor,
            ev.current
        );
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn indirect_run_stays_within_the_default_budget() {
    let g = indirect_graph();
    assert!(g.stats.nodes_created < Options::default().budget.max_nodes);
    assert!(g.live().all(|n| n.kind != NodeKind::Open));
}

#[test]
fn ground_entry_gives_a_constant() {
    let p = common::synapse();
    let entry = parse_expr("Main((rm wh2 rm) : (I I))").unwrap();
    let g = supercompile(&p, &entry, Options::default()).unwrap();
    let r = residualize(&g).unwrap();
    assert_eq!(r.rules().count(), 1, "{r}");
    let rule = r.rules().next().unwrap();
    let expected = eval_call(&p, "Main", &[parse_expr("(rm wh2 rm) : (I I)").unwrap()], None);
    assert_eq!(Some(&rule.rhs), expected.value());
}

#[test]
fn ground_match_is_transitive() {
    let int = int_source(&[]).unwrap();
    let c = parse_expr("Match(('*' Invalid (Var 'e' is)), ('*' Invalid I), ([]))").unwrap();
    let g = supercompile(&int, &c, Options::default()).unwrap();
    assert_eq!(g.stats.generalizations + g.stats.folds, 0);
    assert!(g.live().all(|n| n.children.len() <= 1));
}

#[test]
fn empty_pattern_against_unknown_data_branches() {
    let int = int_source(&[]).unwrap();
    let c = parse_expr("Match([], e.time, ([]))").unwrap();
    let g = supercompile(&int, &c, Options::default()).unwrap();
    assert!(g.node(g.root).children.len() >= 2);
}

#[test]
fn goldens_match() {
    let cases: [(&str, &str, Mode, u32); 2] = [
        ("synapse_direct", include_str!("../../../corpus/golden/synapse_direct.l"), Mode::Direct, 1),
        (
            "synapse_via_interpreter",
            include_str!("../../../corpus/golden/synapse_via_interpreter.l"),
            Mode::ViaInterpreter,
            2,
        ),
    ];
    for (name, golden, mode, rounds) in cases {
        let m = ModelSpec::from_first_rule("synapse", common::synapse(), "Main").unwrap();
        let opts = scverify::verify::VerifyOptions {
            mode,
            rounds,
            sc: Options::default(),
        };
        let report = scverify::verify::verify_model(&m, opts).unwrap();
        let residual = report.verdict.residual().unwrap();
        assert_eq!(residual.to_string(), golden, "{name}");
        let parsed = parse_program(golden).unwrap();
        assert!(!check_no_false(&parsed).anywhere, "{name}");
    }
}

#[test]
fn selfint_lint_reports_shared_failure_tails() {
    let p = parse_program(include_str!("../../../corpus/selfint.l")).unwrap();
    let clashes = scverify::verify::lint_rule_tails(&p);
    let fail = Expr::ident("F");
    assert!(!clashes.is_empty());
    for c in &clashes {
        for (f, i) in [&c.first, &c.second] {
            assert_eq!(p.get(f).unwrap().rules[*i].rhs, fail, "{f} rule {i}");
        }
    }
    assert!(scverify::verify::lint_rule_tails(&common::synapse()).is_empty());
}
