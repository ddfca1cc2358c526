//! Reduces each phrase of a bout to its tactic sequence.
//!
//! cargo run --example abstract_phrases [path]

use std::path::PathBuf;

use fencingvis::abstraction::{abstract_bout, AbstractionConfig};
use fencingvis::ingest::load_bouts;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/fx-alpha.csv"));
    let config = AbstractionConfig::default();
    for bout in load_bouts(&path)? {
        println!("bout {} ({} phrases, break after #{:?})", bout.id, bout.phrases.len(), bout.break_index);
        for (phrase, seq) in bout.phrases.iter().zip(abstract_bout(&bout, &config)?) {
            let kinds: Vec<String> = seq.kinds().iter().map(ToString::to_string).collect();
            let steps = seq.nodes[0].start_steps.unwrap_or_default();
            println!(
                "  {:>4} {:>3}f  {:<16} steps {}-{}  score {}-{}",
                phrase.id,
                phrase.duration,
                kinds.join(" > "),
                steps[0],
                steps[1],
                phrase.score_after.0,
                phrase.score_after.1
            );
        }
    }
    Ok(())
}
