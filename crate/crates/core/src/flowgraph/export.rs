use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{Edge, FlowGraph, PartitionScheme, PositionedGraph, PriorityCounts, PriorityRatio};
use crate::model::TacticNodeKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeExport {
    pub kind: TacticNodeKind,
    pub layer: u8,
    pub visits: std::collections::BTreeMap<String, u64>,
    pub visit_count: u64,
    pub priority: PriorityCounts,
    pub priority_ratio: Option<PriorityRatio>,
}

/// Serialized form of a graph together with its layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphExport {
    pub scheme: PartitionScheme,
    pub partitions: Vec<String>,
    pub sequence_counts: Vec<u64>,
    pub nodes: Vec<NodeExport>,
    pub edges: Vec<Edge>,
    pub layout: PositionedGraph,
}

impl GraphExport {
    pub fn new(graph: &FlowGraph, layout: PositionedGraph) -> Self {
        GraphExport {
            scheme: graph.scheme,
            partitions: graph.partitions.clone(),
            sequence_counts: graph.sequence_counts.clone(),
            nodes: graph
                .nodes
                .values()
                .map(|n| NodeExport {
                    kind: n.kind,
                    layer: n.kind.layer(),
                    visits: n.visits.clone(),
                    visit_count: n.visit_count(),
                    priority: n.priority,
                    priority_ratio: n.priority_ratio(),
                })
                .collect(),
            edges: graph.edges.clone(),
            layout,
        }
    }
}

pub fn to_json_value(graph: &FlowGraph, layout: PositionedGraph) -> serde_json::Value {
    serde_json::to_value(GraphExport::new(graph, layout)).expect("graph export serializes")
}

/// Graphviz text with one edge statement per (edge, partition), weighted by
/// its count.
pub fn to_dot(graph: &FlowGraph) -> String {
    let mut out = String::from("digraph tactics {\n  rankdir=TB;\n");
    for n in graph.nodes.values() {
        let _ = writeln!(out, "  \"{}\" [layer={}, visits={}];", n.kind, n.kind.layer(), n.visit_count());
    }
    for e in &graph.edges {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [partition=\"{}\", weight={}, label=\"{}\"];",
            e.from, e.to, e.partition, e.count, e.count
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowgraph::{aggregate_whole, layered_layout, tests::seq, RibbonScale};
    use TacticNodeKind::*;

    #[test]
    fn dot_weights_sum_to_transitions() {
        let g = aggregate_whole(&[seq(1, &[S, FF, One]), seq(2, &[S, FF, FB, Two])]).unwrap();
        let dot = to_dot(&g);
        let sum: u64 = dot
            .lines()
            .filter_map(|l| l.split("weight=").nth(1))
            .map(|w| w.split(',').next().unwrap().parse::<u64>().unwrap())
            .sum();
        assert_eq!(sum, g.total_transitions());
        assert!(dot.contains("\"S\" -> \"FF\" [partition=\"all\", weight=2"));
    }

    #[test]
    fn json_lists_ratios() {
        let g = aggregate_whole(&[seq(1, &[S, FF, One])]).unwrap();
        let v = to_json_value(&g, layered_layout(&g, RibbonScale::default()));
        let s = &v["nodes"][0];
        assert_eq!(s["kind"], "S");
        assert_eq!(s["priority_ratio"]["none"], 1.0);
        assert_eq!(v["layout"]["layout"], "layered");
    }
}
