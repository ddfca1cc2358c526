//! Shared steps between the command line and the HTTP service: abstracting
//! whole bouts, building flow-graph exports from option sets, and the
//! statistics report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{abstract_bout, AbstractionConfig, AbstractionError, TacticSequence};
use crate::flowgraph::{
    aggregate_labeled, attack_position_matrix, forward_steps_matrix, layered_layout, orthogonal_layout, FlowGraph,
    FlowGraphError, GraphExport, LayoutError, LayoutKind, Matrix, PartitionScheme, PriorityRatio, RibbonScale,
    FIRST_HALF, SECOND_HALF, WHOLE_LABEL,
};
use crate::model::{Bout, TacticNodeKind};

/// By-bout comparisons with at least this many bouts must use the
/// orthogonal layout; overlaid ribbons become unreadable.
pub const MAX_OVERLAID_BOUTS: usize = 2;

/// The tactic sequences of one bout, with what graph partitioning needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoutSequences {
    pub bout_id: String,
    pub break_index: Option<usize>,
    pub sequences: Vec<TacticSequence>,
}

impl BoutSequences {
    pub fn from_bout(bout: &Bout, config: &AbstractionConfig) -> Result<Self, AbstractionError> {
        Ok(BoutSequences { bout_id: bout.id.clone(), break_index: bout.break_index, sequences: abstract_bout(bout, config)? })
    }
}

/// Output of the `abstract` command, readable again by `graph` and `stats`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceDocument {
    pub config: AbstractionConfig,
    pub bouts: Vec<BoutSequences>,
}

impl SequenceDocument {
    pub fn from_bouts(bouts: &[Bout], config: &AbstractionConfig) -> Result<Self, AbstractionError> {
        Ok(SequenceDocument {
            config: *config,
            bouts: bouts.iter().map(|b| BoutSequences::from_bout(b, config)).collect::<Result<_, _>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphOptions {
    pub mode: PartitionScheme,
    /// Per-bout side exchange. A single entry applies to every bout; an
    /// empty list swaps nothing.
    pub swap: Vec<bool>,
    pub layout: LayoutKind,
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions { mode: PartitionScheme::Whole, swap: Vec::new(), layout: LayoutKind::Layered }
    }
}

impl GraphOptions {
    fn swaps(&self, bout: usize) -> bool {
        match self.swap.as_slice() {
            [] => false,
            [all] => *all,
            each => each.get(bout).copied().unwrap_or(false),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("incompatible options: {0}")]
    IncompatibleOptions(String),
    #[error(transparent)]
    Flow(#[from] FlowGraphError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

/// Aggregates the selected bouts under `options` without laying them out.
pub fn flow_graph(bouts: &[&BoutSequences], options: &GraphOptions) -> Result<FlowGraph, GraphError> {
    if options.swap.len() > 1 && options.swap.len() != bouts.len() {
        return Err(GraphError::IncompatibleOptions(format!(
            "{} swap flags for {} bouts",
            options.swap.len(),
            bouts.len()
        )));
    }
    if options.mode == PartitionScheme::Halves && bouts.len() != 1 {
        return Err(GraphError::IncompatibleOptions("halves mode compares the two halves of a single bout".into()));
    }
    if options.mode == PartitionScheme::ByBout && bouts.len() > MAX_OVERLAID_BOUTS && options.layout == LayoutKind::Layered {
        return Err(GraphError::IncompatibleOptions(format!(
            "by-bout comparison of {} bouts needs the orthogonal layout",
            bouts.len()
        )));
    }
    let mirrored: Vec<Vec<TacticSequence>> = bouts
        .iter()
        .enumerate()
        .map(|(i, b)| if options.swaps(i) { b.sequences.iter().map(TacticSequence::mirror).collect() } else { Vec::new() })
        .collect();
    let labeled = bouts.iter().zip(&mirrored).flat_map(|(b, m)| {
        let seqs = if m.is_empty() { &b.sequences } else { m };
        let cut = b.break_index.unwrap_or(usize::MAX);
        seqs.iter().map(move |s| {
            let label = match options.mode {
                PartitionScheme::Whole => WHOLE_LABEL.to_string(),
                PartitionScheme::Halves => if s.phrase_index <= cut { FIRST_HALF } else { SECOND_HALF }.to_string(),
                PartitionScheme::ByBout => b.bout_id.clone(),
            };
            (label, s)
        })
    });
    Ok(aggregate_labeled(labeled, options.mode)?)
}

/// Aggregates and lays out the selected bouts. The orthogonal layout
/// routes every partition's edges through one shared placement.
pub fn graph_export(bouts: &[&BoutSequences], options: &GraphOptions, scale: RibbonScale) -> Result<GraphExport, GraphError> {
    let graph = flow_graph(bouts, options)?;
    let layout = match options.layout {
        LayoutKind::Layered => layered_layout(&graph, scale),
        LayoutKind::Orthogonal => orthogonal_layout(&graph.split_partitions(), scale)?,
    };
    Ok(GraphExport::new(&graph, layout))
}

/// Hover statistics of one bout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoutStats {
    pub bout_id: String,
    pub phrases: usize,
    pub attack_positions: Matrix,
    pub forward_steps: Matrix,
    /// Right-of-way share at entry, for kinds visited at least once.
    pub priority: BTreeMap<TacticNodeKind, PriorityRatio>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub bouts: Vec<BoutStats>,
}

pub fn bout_stats(bout: &BoutSequences) -> Result<BoutStats, GraphError> {
    let graph = flow_graph(&[bout], &GraphOptions::default())?;
    Ok(BoutStats {
        bout_id: bout.bout_id.clone(),
        phrases: bout.sequences.len(),
        attack_positions: attack_position_matrix(&bout.sequences),
        forward_steps: forward_steps_matrix(&bout.sequences),
        priority: graph.nodes.values().filter_map(|n| Some((n.kind, n.priority_ratio()?))).collect(),
    })
}

pub fn stats_report(bouts: &[BoutSequences]) -> Result<StatsReport, GraphError> {
    Ok(StatsReport { bouts: bouts.iter().map(bout_stats).collect::<Result<_, _>>()? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowgraph::tests::seq;
    use TacticNodeKind::*;

    fn bout(id: &str, break_index: Option<usize>, seqs: Vec<TacticSequence>) -> BoutSequences {
        BoutSequences { bout_id: id.into(), break_index, sequences: seqs }
    }

    fn sample(id: &str) -> BoutSequences {
        bout(id, Some(1), vec![seq(1, &[S, FF, One]), seq(2, &[S, FB, Two]), seq(3, &[S, BF, FF, Eq])])
    }

    #[test]
    fn halves_need_one_bout() {
        let (a, b) = (sample("a"), sample("b"));
        let opts = GraphOptions { mode: PartitionScheme::Halves, ..Default::default() };
        assert!(matches!(flow_graph(&[&a, &b], &opts), Err(GraphError::IncompatibleOptions(_))));
        let g = flow_graph(&[&a], &opts).unwrap();
        assert_eq!(g.partitions, [FIRST_HALF, SECOND_HALF]);
        assert_eq!(g.sequence_counts, [1, 2]);
    }

    #[test]
    fn three_bouts_overlaid_are_refused() {
        let (a, b, c) = (sample("a"), sample("b"), sample("c"));
        let mut opts = GraphOptions { mode: PartitionScheme::ByBout, ..Default::default() };
        assert!(matches!(flow_graph(&[&a, &b, &c], &opts), Err(GraphError::IncompatibleOptions(_))));
        assert!(flow_graph(&[&a, &b], &opts).is_ok());
        opts.layout = LayoutKind::Orthogonal;
        let export = graph_export(&[&a, &b, &c], &opts, RibbonScale::default()).unwrap();
        assert_eq!(export.partitions, ["a", "b", "c"]);
    }

    #[test]
    fn swap_flags_apply_per_bout() {
        let (a, b) = (sample("a"), sample("b"));
        let opts = GraphOptions { mode: PartitionScheme::ByBout, swap: vec![false, true], ..Default::default() };
        let g = flow_graph(&[&a, &b], &opts).unwrap();
        assert_eq!(g.edge_count_in(S, FB, "a"), 1);
        assert_eq!(g.edge_count_in(S, BF, "b"), 1);
        assert_eq!(g.edge_count_in(FB, FF, "b"), 1);
        let bad = GraphOptions { swap: vec![true, false, true], ..opts };
        assert!(flow_graph(&[&a, &b], &bad).is_err());
    }

    #[test]
    fn stats_cover_visited_kinds() {
        let s = bout_stats(&sample("a")).unwrap();
        assert_eq!(s.phrases, 3);
        assert!(s.priority.contains_key(&S) && !s.priority.contains_key(&BB));
        assert_eq!(s.forward_steps.total(), 3);
    }
}
