//! Command-line front end. [`run`] takes the argument list and two output
//! streams and returns the process exit code, so it can be driven from
//! tests without spawning a process.

use std::fs;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::abstraction::AbstractionConfig;
use crate::flowgraph::{to_dot, LayoutKind, PartitionScheme, RibbonScale};
use crate::ingest::{build_bouts, read_events_file, validate_events, write_events, Format, IngestError, ValidationReport};
use crate::pipeline::{flow_graph, graph_export, stats_report, BoutSequences, GraphError, GraphOptions, SequenceDocument};
use crate::service::{serve, Service};
use crate::synth::{generate_bout_with, generate_bouts, SynthCorpus, SynthError, TacticProfile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// File name of the ground truth written next to a synthetic corpus.
pub const TRUTH_FILE: &str = "truth.json";

#[derive(Debug, Parser)]
#[command(name = "fencingvis", version, about = "Tactic abstraction and flow graphs for annotated sabre bouts")]
struct Cli {
    /// JSON file with abstraction thresholds; flags below override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "FRAMES")]
    bb_joint_window_frames: Option<u32>,
    #[arg(long, global = true, value_name = "FRAMES")]
    pause_threshold_frames: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphFormat {
    Json,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EventFormat {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check an event file and print the validation report.
    Validate {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
    },
    /// Abstract every phrase into its tactic sequence (JSON).
    Abstract {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate and lay out the tactical flow graph.
    Graph {
        /// Event file, or the output of `abstract`.
        file: PathBuf,
        #[arg(long, default_value = "whole", value_parser = ["whole", "halves", "by-bout"])]
        mode: String,
        /// Exchange the fencers before aggregating.
        #[arg(long)]
        swap: bool,
        #[arg(long, default_value = "layered", value_parser = ["layered", "orthogonal"])]
        layout: String,
        #[arg(long, value_enum, default_value = "json")]
        format: GraphFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Attack-position and step matrices plus right-of-way ratios per bout.
    Stats {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate synthetic bouts with their ground-truth sequences.
    Synth {
        /// Profile JSON; every legal edge equally likely when omitted.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Overrides the profile's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 15)]
        target_score: u8,
        #[arg(long, default_value_t = 1)]
        bouts: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: EventFormat,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the HTTP API over a directory of event files.
    Serve {
        #[arg(long, env = "FENCINGVIS_DATA")]
        data: PathBuf,
        #[arg(long, env = "FENCINGVIS_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "FENCINGVIS_BIND", default_value = "127.0.0.1")]
        bind: IpAddr,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Invalid(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Invalid(_) => EXIT_INVALID,
            Failure::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Invalid(m) | Failure::Io(m) => m,
        }
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Io(_) | IngestError::UnsupportedFormat(_) => Failure::Io(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::IncompatibleOptions(_) => Failure::Usage(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Io(_) => Failure::Io(e.to_string()),
            SynthError::TargetScore(_) => Failure::Usage(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

/// Parses `args` (program name first) and runs the subcommand. Results go
/// to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn abstraction_config(cli: &Cli) -> Result<AbstractionConfig, Failure> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => AbstractionConfig::default(),
    };
    if let Some(w) = cli.bb_joint_window_frames {
        config.bb_joint_window_frames = w;
    }
    if let Some(p) = cli.pause_threshold_frames {
        config.pause_threshold_frames = p;
    }
    Ok(config)
}

fn emit(out: &mut dyn Write, path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| io_failure(p, e)),
        None => out.write_all(bytes).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("output serializes");
    bytes.push(b'\n');
    bytes
}

fn write_report(report: &ValidationReport, w: &mut dyn Write) -> std::io::Result<()> {
    let c = &report.counts;
    writeln!(w, "{} rows, {} phrases, {} bouts", c.rows, c.phrases, c.bouts)?;
    for (label, issues) in [("error", &report.errors), ("warning", &report.warnings)] {
        for i in issues {
            writeln!(w, "{label}: row {}: {:?}: {}", i.row, i.code, i.message)?;
        }
    }
    writeln!(w, "{} errors, {} warnings", report.errors.len(), report.warnings.len())
}

/// Reads events and abstracts them, refusing files that fail validation.
fn load_events_as_sequences(path: &Path, config: &AbstractionConfig, err: &mut dyn Write) -> Result<SequenceDocument, Failure> {
    let events = read_events_file(path)?;
    let report = validate_events(&events);
    if !report.is_ok() {
        let _ = write_report(&report, err);
        return Err(Failure::Invalid(format!("{} failed validation", path.display())));
    }
    let bouts = build_bouts(&events)?;
    SequenceDocument::from_bouts(&bouts, config).map_err(|e| Failure::Invalid(e.to_string()))
}

/// Sequences from either an event file or an `abstract` output document.
fn load_sequences(path: &Path, config: &AbstractionConfig, err: &mut dyn Write) -> Result<Vec<BoutSequences>, Failure> {
    if Format::from_path(path) == Some(Format::Json) {
        let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
        if let Ok(doc) = serde_json::from_str::<SequenceDocument>(&text) {
            return Ok(doc.bouts);
        }
    }
    Ok(load_events_as_sequences(path, config, err)?.bouts)
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let config = abstraction_config(&cli)?;
    match cli.command {
        Command::Validate { file, format } => {
            let events = match read_events_file(&file) {
                Ok(e) => e,
                Err(e @ (IngestError::Io(_) | IngestError::UnsupportedFormat(_))) => return Err(e.into()),
                Err(e) => {
                    let _ = writeln!(out, "error: {e}\n1 errors, 0 warnings");
                    return Ok(EXIT_INVALID);
                }
            };
            let report = validate_events(&events);
            match format {
                ReportFormat::Text => write_report(&report, out).map_err(|e| Failure::Io(e.to_string()))?,
                ReportFormat::Json => emit(out, None, &pretty(&report))?,
            }
            Ok(if report.is_ok() { EXIT_OK } else { EXIT_INVALID })
        }
        Command::Abstract { file, out: path } => {
            let doc = load_events_as_sequences(&file, &config, err)?;
            emit(out, path.as_deref(), &pretty(&doc))?;
            Ok(EXIT_OK)
        }
        Command::Graph { file, mode, swap, layout, format, out: path } => {
            let bouts = load_sequences(&file, &config, err)?;
            let options = GraphOptions {
                mode: mode.parse::<PartitionScheme>().map_err(Failure::Usage)?,
                swap: vec![swap],
                layout: layout.parse::<LayoutKind>().map_err(Failure::Usage)?,
            };
            let refs: Vec<&BoutSequences> = bouts.iter().collect();
            let bytes = match format {
                GraphFormat::Json => pretty(&graph_export(&refs, &options, RibbonScale::default())?),
                GraphFormat::Dot => to_dot(&flow_graph(&refs, &options)?).into_bytes(),
            };
            emit(out, path.as_deref(), &bytes)?;
            Ok(EXIT_OK)
        }
        Command::Stats { file, out: path } => {
            let bouts = load_sequences(&file, &config, err)?;
            emit(out, path.as_deref(), &pretty(&stats_report(&bouts)?))?;
            Ok(EXIT_OK)
        }
        Command::Synth { profile, seed, target_score, bouts, format, out: dir } => {
            let mut p = match &profile {
                Some(path) => TacticProfile::from_json_file(path)?,
                None => TacticProfile::uniform(0),
            };
            if let Some(s) = seed {
                p.seed = s;
            }
            let corpus = if bouts == 1 {
                SynthCorpus { bouts: vec![generate_bout_with(&p, target_score, &config)?] }
            } else {
                generate_bouts(&p, target_score, bouts, &config)?
            };
            write_synth(&corpus, &config, &dir, format)?;
            let _ = writeln!(out, "{} bouts, {} phrases written to {}", corpus.bouts.len(), corpus.phrase_count(), dir.display());
            Ok(EXIT_OK)
        }
        Command::Serve { data, port, bind } => {
            let _ = tracing_subscriber::fmt().with_writer(std::io::stderr).try_init();
            let service = Service::from_dir(&data, &config).map_err(|e| Failure::Invalid(e.to_string()))?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
            runtime
                .block_on(serve(SocketAddr::new(bind, port), service))
                .map_err(|e| Failure::Io(format!("{bind}:{port}: {e}")))?;
            Ok(EXIT_OK)
        }
    }
}

/// One event file per bout plus the ground truth in the same shape as
/// `abstract` output.
fn write_synth(corpus: &SynthCorpus, config: &AbstractionConfig, dir: &Path, format: EventFormat) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let (format, ext) = match format {
        EventFormat::Csv => (Format::Csv, "csv"),
        EventFormat::Json => (Format::Json, "json"),
    };
    for b in &corpus.bouts {
        let path = dir.join(format!("{}.{ext}", b.bout_id));
        let file = fs::File::create(&path).map_err(|e| io_failure(&path, e))?;
        write_events(&b.events, std::io::BufWriter::new(file), format)?;
    }
    let truth = SequenceDocument {
        config: *config,
        bouts: corpus
            .bouts
            .iter()
            .map(|b| {
                let built = build_bouts(&b.events).ok().and_then(|v| v.into_iter().next());
                BoutSequences {
                    bout_id: b.bout_id.clone(),
                    break_index: built.and_then(|x| x.break_index),
                    sequences: b.truth.clone(),
                }
            })
            .collect(),
    };
    let path = dir.join(TRUTH_FILE);
    fs::write(&path, pretty(&truth)).map_err(|e| io_failure(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("fencingvis").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(call(&["graph", "x.csv", "--mode", "thirds"]).0, EXIT_USAGE);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn missing_file_exits_three() {
        let (code, _, err) = call(&["validate", "/nonexistent/bout.csv"]);
        assert_eq!(code, EXIT_IO, "{err}");
    }

    #[test]
    fn synth_then_validate_and_graph() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().to_str().unwrap();
        let (code, out, err) = call(&["synth", "--seed", "5", "--target-score", "5", "--out", d]);
        assert_eq!(code, 0, "{err}");
        assert!(out.contains("1 bouts"));
        let csv = dir.path().join("synth-5.csv");
        let (code, out, _) = call(&["validate", csv.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert!(out.contains("0 errors"));
        let (code, dot, _) = call(&["graph", csv.to_str().unwrap(), "--format", "dot"]);
        assert_eq!(code, 0);
        assert!(dot.starts_with("digraph"));
        let truth = dir.path().join(TRUTH_FILE);
        let (code, from_truth, _) = call(&["graph", truth.to_str().unwrap(), "--format", "dot"]);
        assert_eq!(code, 0);
        assert_eq!(from_truth, dot);
    }

    #[test]
    fn invalid_file_exits_two() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(
            &path,
            "bout_id,phrase_id,frame,footwork1,footwork2,bladework1,bladework2,attack1,attack2,parry1,parry2,confrontation,result,score\n\
             b,p1,0,FWD_B,,,,,,,,9.5,,\nb,p1,5,FWD_E,,,,,,,,,A,0\n",
        )
        .unwrap();
        let (code, out, _) = call(&["validate", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_INVALID);
        assert!(out.contains("ConfrontationOutOfRange"));
        assert_eq!(call(&["abstract", path.to_str().unwrap()]).0, EXIT_INVALID);
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        fs::write(&path, r#"{"bb_joint_window_frames": 20, "pause_threshold_frames": 12}"#).unwrap();
        let cli = Cli::try_parse_from(["fencingvis", "--config", path.to_str().unwrap(), "--pause-threshold-frames", "7", "stats", "x.csv"]).unwrap();
        let c = abstraction_config(&cli).unwrap();
        assert_eq!((c.bb_joint_window_frames, c.pause_threshold_frames), (20, 7));
    }
}
