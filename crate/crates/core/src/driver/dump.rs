use serde_json::{json, Value};

use super::graph::{NodeKind, NodeLabel, ProcessGraph};

pub const GRAPH_FORMAT: &str = "scpgraph-v1";

/// The live part of a process graph as JSON.
pub fn dump_graph(g: &ProcessGraph) -> Value {
    let nodes: Vec<Value> = g
        .live()
        .map(|n| {
            let (kind, extra) = match &n.kind {
                NodeKind::Open => ("open", json!({})),
                NodeKind::Driven => ("driven", json!({})),
                NodeKind::Fold { target, theta } => ("fold", json!({ "target": target, "theta": theta.to_string() })),
                NodeKind::Generalized { theta } => ("generalized", json!({ "theta": theta.to_string() })),
                NodeKind::Let => ("let", json!({})),
                NodeKind::Passive => ("passive", json!({})),
                NodeKind::Bottom => ("bottom", json!({})),
            };
            let (label, times) = match &n.label {
                NodeLabel::Config(c) => (c.to_string(), c.stack.iter().map(|f| f.time).collect()),
                NodeLabel::Let(chain) => (chain.to_string(), Vec::new()),
            };
            let children: Vec<Value> = n
                .children
                .iter()
                .map(|(theta, c)| json!({ "node": c, "contraction": theta.to_string() }))
                .collect();
            json!({
                "id": n.id,
                "parent": n.parent,
                "kind": kind,
                "label": label,
                "times": times,
                "transitive_steps": n.transitive_steps,
                "children": children,
                "info": extra,
            })
        })
        .collect();
    json!({
        "format": GRAPH_FORMAT,
        "entry": g.entry.to_string(),
        "root": g.root,
        "stats": {
            "nodes_created": g.stats.nodes_created,
            "nodes_alive": g.stats.nodes_alive,
            "steps": g.stats.steps,
            "folds": g.stats.folds,
            "generalizations": g.stats.generalizations,
            "decompositions": g.stats.decompositions,
            "splits": g.stats.splits,
        },
        "nodes": nodes,
    })
}
