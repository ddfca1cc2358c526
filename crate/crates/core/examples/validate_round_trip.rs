//! Validates a frame-event file, then converts it CSV <-> JSON and checks
//! that nothing is lost.
//!
//! cargo run --example validate_round_trip [path]

use std::path::PathBuf;

use fencingvis::ingest::{parse_frame_events, read_events_file, validate_events, write_events, Format};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/fx-alpha.csv"));
    let events = read_events_file(&path)?;
    let report = validate_events(&events);
    println!("{}: {} rows, {} errors, {} warnings", path.display(), events.len(), report.errors.len(), report.warnings.len());
    for issue in report.errors.iter().chain(&report.warnings) {
        println!("  row {}: {:?} {}", issue.row, issue.code, issue.message);
    }

    for format in [Format::Csv, Format::Json] {
        let mut bytes = Vec::new();
        write_events(&events, &mut bytes, format)?;
        let back = parse_frame_events(bytes.as_slice(), format)?;
        println!("{format:?}: {} bytes, round trip {}", bytes.len(), if back == events { "exact" } else { "LOSSY" });
    }
    Ok(())
}
