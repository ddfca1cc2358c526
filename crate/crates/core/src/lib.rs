//! Tactic abstraction and flow-graph analytics for annotated sabre bouts.
//!
//! The pipeline reads per-frame annotations ([`ingest`]), turns each phrase
//! into a sequence of tactic states ([`abstraction`]), aggregates sequences
//! into tactical flow graphs with layouts and hover statistics
//! ([`flowgraph`]), and answers the queries behind the bout, phrase list and
//! piste views ([`analytics`]). [`synth`] generates bouts with known ground
//! truth, [`service`] exposes everything over HTTP and [`cli`] drives it all
//! from the command line.

pub mod model;
pub mod ingest;
pub mod abstraction;
pub mod flowgraph;
pub mod analytics;
pub mod synth;
pub mod pipeline;
pub mod service;
pub mod cli;
