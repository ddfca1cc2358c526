//! Tactical flow graphs: aggregation of tactic sequences into weighted
//! edge counts, partitioned by half or by bout, plus layouts, hover
//! matrices and export formats.

mod export;
mod layout;
mod matrix;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::TacticSequence;
use crate::model::{Bout, Fencer, TacticNodeKind};

pub use export::{to_dot, to_json_value, GraphExport};
pub use layout::{
    layered_layout, orthogonal_layout, Cell, LayoutKind, NodeRef, Placement, PositionedGraph, Ribbon, RibbonScale,
    RoutedFlow, Slot,
};
pub use layout::{check_orthogonal, planned_instances, LayoutError};
pub use matrix::{attack_position_matrix, forward_steps_matrix, Matrix, ABSENT_POSITION};

pub const WHOLE_LABEL: &str = "all";
pub const FIRST_HALF: &str = "H1";
pub const SECOND_HALF: &str = "H2";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionScheme {
    Whole,
    Halves,
    ByBout,
}

impl std::str::FromStr for PartitionScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "whole" => Ok(PartitionScheme::Whole),
            "halves" => Ok(PartitionScheme::Halves),
            "by-bout" => Ok(PartitionScheme::ByBout),
            other => Err(format!("unknown partition mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorityCounts {
    pub fencer1: u64,
    pub fencer2: u64,
    pub none: u64,
}

impl PriorityCounts {
    pub fn total(&self) -> u64 {
        self.fencer1 + self.fencer2 + self.none
    }

    fn add(&mut self, owner: Option<Fencer>) {
        match owner {
            Some(Fencer::One) => self.fencer1 += 1,
            Some(Fencer::Two) => self.fencer2 += 1,
            None => self.none += 1,
        }
    }

    fn mirror(self) -> Self {
        PriorityCounts { fencer1: self.fencer2, fencer2: self.fencer1, none: self.none }
    }
}

/// Share of node entries by right-of-way holder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorityRatio {
    pub fencer1: f64,
    pub fencer2: f64,
    pub none: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeStats {
    pub kind: TacticNodeKind,
    /// Entries per partition label.
    pub visits: BTreeMap<String, u64>,
    pub priority: PriorityCounts,
}

impl NodeStats {
    fn new(kind: TacticNodeKind) -> Self {
        NodeStats { kind, visits: BTreeMap::new(), priority: PriorityCounts::default() }
    }

    pub fn visit_count(&self) -> u64 {
        self.visits.values().sum()
    }

    /// `None` for nodes never entered.
    pub fn priority_ratio(&self) -> Option<PriorityRatio> {
        let n = self.priority.total();
        (n > 0).then(|| PriorityRatio {
            fencer1: self.priority.fencer1 as f64 / n as f64,
            fencer2: self.priority.fencer2 as f64 / n as f64,
            none: self.priority.none as f64 / n as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: TacticNodeKind,
    pub to: TacticNodeKind,
    pub partition: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowGraph {
    pub scheme: PartitionScheme,
    /// Partition labels in order of first appearance.
    pub partitions: Vec<String>,
    /// Sequences aggregated per partition, in `partitions` order.
    pub sequence_counts: Vec<u64>,
    pub nodes: BTreeMap<TacticNodeKind, NodeStats>,
    /// Sorted by (from, to, partition order).
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowGraphError {
    #[error("phrase {phrase}: illegal transition {from} -> {to}")]
    IllegalTransition { phrase: String, from: TacticNodeKind, to: TacticNodeKind },
}

impl FlowGraph {
    pub fn empty(scheme: PartitionScheme) -> Self {
        FlowGraph {
            scheme,
            partitions: Vec::new(),
            sequence_counts: Vec::new(),
            nodes: TacticNodeKind::ALL.into_iter().map(|k| (k, NodeStats::new(k))).collect(),
            edges: Vec::new(),
        }
    }

    pub fn edge_count(&self, from: TacticNodeKind, to: TacticNodeKind) -> u64 {
        self.edges.iter().filter(|e| e.from == from && e.to == to).map(|e| e.count).sum()
    }

    pub fn edge_count_in(&self, from: TacticNodeKind, to: TacticNodeKind, partition: &str) -> u64 {
        self.edges
            .iter()
            .find(|e| e.from == from && e.to == to && e.partition == partition)
            .map_or(0, |e| e.count)
    }

    pub fn inflow(&self, kind: TacticNodeKind) -> u64 {
        self.edges.iter().filter(|e| e.to == kind).map(|e| e.count).sum()
    }

    pub fn outflow(&self, kind: TacticNodeKind) -> u64 {
        self.edges.iter().filter(|e| e.from == kind).map(|e| e.count).sum()
    }

    pub fn total_transitions(&self) -> u64 {
        self.edges.iter().map(|e| e.count).sum()
    }

    pub fn sequence_count(&self) -> u64 {
        self.sequence_counts.iter().sum()
    }

    /// Distinct (from, to) pairs with a nonzero count in any partition.
    pub fn distinct_edges(&self) -> Vec<(TacticNodeKind, TacticNodeKind)> {
        let mut out: Vec<_> = self.edges.iter().filter(|e| e.count > 0).map(|e| (e.from, e.to)).collect();
        out.dedup();
        out
    }

    fn partition_rank(&self, label: &str) -> usize {
        self.partitions.iter().position(|p| p == label).unwrap_or(usize::MAX)
    }

    fn sort_edges(&mut self) {
        let mut edges = std::mem::take(&mut self.edges);
        edges.sort_by_key(|e| (e.from, e.to, self.partition_rank(&e.partition)));
        self.edges = edges;
    }

    /// The graph with fencers exchanged: kinds mirrored and right-of-way
    /// counts swapped.
    pub fn mirror(&self) -> FlowGraph {
        let mut g = FlowGraph {
            scheme: self.scheme,
            partitions: self.partitions.clone(),
            sequence_counts: self.sequence_counts.clone(),
            nodes: self
                .nodes
                .values()
                .map(|s| {
                    let k = s.kind.mirror();
                    (k, NodeStats { kind: k, visits: s.visits.clone(), priority: s.priority.mirror() })
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| Edge { from: e.from.mirror(), to: e.to.mirror(), partition: e.partition.clone(), count: e.count })
                .collect(),
        };
        g.sort_edges();
        g
    }

    /// Sums every partition into a single `all` partition.
    pub fn collapse(&self) -> FlowGraph {
        let mut g = FlowGraph::empty(PartitionScheme::Whole);
        if self.partitions.is_empty() {
            return g;
        }
        g.partitions = vec![WHOLE_LABEL.to_string()];
        g.sequence_counts = vec![self.sequence_count()];
        for (k, s) in &self.nodes {
            let n = s.visit_count();
            let stats = g.nodes.get_mut(k).unwrap();
            if n > 0 {
                stats.visits.insert(WHOLE_LABEL.to_string(), n);
            }
            stats.priority = s.priority;
        }
        let mut sums: BTreeMap<(TacticNodeKind, TacticNodeKind), u64> = BTreeMap::new();
        for e in &self.edges {
            *sums.entry((e.from, e.to)).or_default() += e.count;
        }
        g.edges = sums
            .into_iter()
            .map(|((from, to), count)| Edge { from, to, partition: WHOLE_LABEL.to_string(), count })
            .collect();
        g
    }

    /// One graph per partition, each keeping its own label.
    pub fn split_partitions(&self) -> Vec<FlowGraph> {
        self.partitions
            .iter()
            .zip(&self.sequence_counts)
            .map(|(label, &n)| {
                let mut g = FlowGraph::empty(self.scheme);
                g.partitions = vec![label.clone()];
                g.sequence_counts = vec![n];
                g.edges = self.edges.iter().filter(|e| &e.partition == label).cloned().collect();
                for (k, s) in &self.nodes {
                    if let Some(&v) = s.visits.get(label) {
                        g.nodes.get_mut(k).unwrap().visits.insert(label.clone(), v);
                    }
                }
                g
            })
            .collect()
    }
}

/// Counts every consecutive node pair of every sequence under the label
/// `assign` gives the sequence. Node visits and right-of-way at entry are
/// accumulated alongside.
pub fn aggregate<F>(sequences: &[TacticSequence], scheme: PartitionScheme, assign: F) -> Result<FlowGraph, FlowGraphError>
where
    F: Fn(&TacticSequence) -> String,
{
    aggregate_labeled(sequences.iter().map(|s| (assign(s), s)), scheme)
}

/// Like [`aggregate`], for sequences that arrive already labeled (for
/// example one label per bout when phrase ids repeat across bouts).
pub fn aggregate_labeled<'a, I>(labeled: I, scheme: PartitionScheme) -> Result<FlowGraph, FlowGraphError>
where
    I: IntoIterator<Item = (String, &'a TacticSequence)>,
{
    let mut g = FlowGraph::empty(scheme);
    let mut counts: BTreeMap<(TacticNodeKind, TacticNodeKind, usize), u64> = BTreeMap::new();
    for (label, seq) in labeled {
        let rank = match g.partitions.iter().position(|p| *p == label) {
            Some(r) => r,
            None => {
                g.partitions.push(label.clone());
                g.sequence_counts.push(0);
                g.partitions.len() - 1
            }
        };
        g.sequence_counts[rank] += 1;
        for w in seq.nodes.windows(2) {
            if !w[0].kind.can_flow_to(w[1].kind) {
                return Err(FlowGraphError::IllegalTransition {
                    phrase: seq.phrase_id.clone(),
                    from: w[0].kind,
                    to: w[1].kind,
                });
            }
            *counts.entry((w[0].kind, w[1].kind, rank)).or_default() += 1;
        }
        for node in &seq.nodes {
            let stats = g.nodes.get_mut(&node.kind).unwrap();
            *stats.visits.entry(label.clone()).or_default() += 1;
            stats.priority.add(node.priority_at_entry);
        }
    }
    g.edges = counts
        .into_iter()
        .map(|((from, to, rank), count)| Edge { from, to, partition: g.partitions[rank].clone(), count })
        .collect();
    Ok(g)
}

pub fn aggregate_whole(sequences: &[TacticSequence]) -> Result<FlowGraph, FlowGraphError> {
    aggregate(sequences, PartitionScheme::Whole, |_| WHOLE_LABEL.to_string())
}

/// Aggregates one bout split at its break: phrases up to and including the
/// break phrase are `H1`, the rest `H2`.
pub fn aggregate_halves(bout: &Bout, sequences: &[TacticSequence]) -> Result<FlowGraph, FlowGraphError> {
    let cut = bout.break_index.unwrap_or(usize::MAX);
    aggregate(sequences, PartitionScheme::Halves, |s| {
        if s.phrase_index <= cut { FIRST_HALF } else { SECOND_HALF }.to_string()
    })
}

/// Phrase ids before and after the mid-bout break. Without a break the
/// second half is empty.
pub fn split_halves(bout: &Bout) -> (Vec<String>, Vec<String>) {
    let cut = bout.break_index.unwrap_or(usize::MAX);
    let (first, second): (Vec<_>, Vec<_>) = bout.phrases.iter().partition(|p| p.index <= cut);
    (
        first.into_iter().map(|p| p.id.clone()).collect(),
        second.into_iter().map(|p| p.id.clone()).collect(),
    )
}

/// Exchanges the fencers in a sequence (FB and BF, 1 and 2, annotations
/// and right of way).
pub fn swap_sides(sequence: &TacticSequence) -> TacticSequence {
    sequence.mirror()
}
