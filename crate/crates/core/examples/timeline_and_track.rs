//! Bout timeline and per-phrase animation keyframes.
//!
//! cargo run --example timeline_and_track [path] [phrase-id]

use std::path::PathBuf;

use fencingvis::analytics::{animation_track, bout_timeline};
use fencingvis::ingest::load_bouts;
use fencingvis::model::Fencer;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/fx-gamma.json"));
    let bout = load_bouts(&path)?.remove(0);

    let timeline = bout_timeline(&bout);
    for s in &timeline.spans {
        println!("{:>4} {:6.2}s .. {:6.2}s  {}-{}", s.phrase_id, s.x_start, s.x_end, s.score_after.0, s.score_after.1);
    }
    println!("total {:.2}s, break at {:?}", timeline.total_span, timeline.break_x);

    let wanted = args.next();
    let phrase = match &wanted {
        Some(id) => bout.phrases.iter().find(|p| &p.id == id).ok_or("no such phrase")?,
        None => &bout.phrases[0],
    };
    let track = animation_track(phrase);
    for f in Fencer::BOTH {
        println!("fencer {f:?}:");
        for k in track.keyframes(f) {
            println!("  frame {:>3}  x {:+.2}  {:?}", k.frame, k.position, k.pose);
        }
    }
    Ok(())
}
