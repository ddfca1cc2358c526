//! Compares several synthetic bouts side by side on the orthogonal grid and
//! checks the routing constraints.
//!
//! cargo run --example orthogonal_layout [bouts]

use fencingvis::abstraction::AbstractionConfig;
use fencingvis::flowgraph::{check_orthogonal, LayoutKind, PartitionScheme, RibbonScale};
use fencingvis::pipeline::{flow_graph, graph_export, BoutSequences, GraphOptions};
use fencingvis::synth::{generate_bouts, TacticProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let count: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(3);
    let config = AbstractionConfig::default();
    let corpus = generate_bouts(&TacticProfile::uniform(7), 15, count, &config)?;
    let bouts: Vec<BoutSequences> = corpus
        .bouts
        .iter()
        .map(|b| BoutSequences { bout_id: b.bout_id.clone(), break_index: None, sequences: b.truth.clone() })
        .collect();
    let refs: Vec<&BoutSequences> = bouts.iter().collect();

    let options = GraphOptions { mode: PartitionScheme::ByBout, layout: LayoutKind::Orthogonal, ..Default::default() };
    let export = graph_export(&refs, &options, RibbonScale::default())?;
    let graph = flow_graph(&refs, &options)?;
    check_orthogonal(&export.layout, &graph.split_partitions())?;

    for p in &export.layout.placements {
        println!("{:>2}#{} at ({:>2},{:>2})", p.node.kind, p.node.instance, p.cell.row, p.cell.col);
    }
    let bends: usize = export.layout.flows.iter().map(|f| f.polyline.len().saturating_sub(2)).sum();
    println!("{} flows over {} partitions, {} routed cells between endpoints", export.layout.flows.len(), export.partitions.len(), bends);
    Ok(())
}
