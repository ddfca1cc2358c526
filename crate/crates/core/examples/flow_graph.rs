//! Aggregates a bout into a flow graph, split into halves, and prints it
//! as Graphviz DOT.
//!
//! cargo run --example flow_graph [path] | dot -Tsvg > bout.svg

use std::path::PathBuf;

use fencingvis::abstraction::{abstract_bout, AbstractionConfig};
use fencingvis::flowgraph::{aggregate_halves, to_dot};
use fencingvis::ingest::load_bouts;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/fx-beta.csv"));
    let bout = load_bouts(&path)?.remove(0);
    let seqs = abstract_bout(&bout, &AbstractionConfig::default())?;
    let graph = aggregate_halves(&bout, &seqs)?;
    for (from, to) in graph.distinct_edges() {
        eprintln!("{from:>2} -> {to:<2} {}", graph.edge_count(from, to));
    }
    print!("{}", to_dot(&graph));
    Ok(())
}
