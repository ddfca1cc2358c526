//! Generates a bout from a random tactic profile and checks that the
//! abstraction recovers every planted sequence.
//!
//! cargo run --example synthesize [seed]

use fencingvis::abstraction::{abstract_bout, AbstractionConfig};
use fencingvis::ingest::{build_bout, validate_events};
use fencingvis::synth::{generate_bout_with, matches_truth, TacticProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(42);
    let config = AbstractionConfig::default();
    let synth = generate_bout_with(&TacticProfile::random(seed), 15, &config)?;
    let report = validate_events(&synth.events);
    println!("{}: {} rows, {} errors", synth.bout_id, synth.events.len(), report.errors.len());

    let bout = build_bout(&synth.events)?;
    let got = abstract_bout(&bout, &config)?;
    let hits = synth.truth.iter().zip(&got).filter(|(t, g)| matches_truth(t, g)).count();
    println!("final score {}-{}, recovered {hits}/{} phrases", bout.final_score().0, bout.final_score().1, got.len());
    Ok(())
}
