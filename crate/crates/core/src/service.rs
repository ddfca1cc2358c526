//! Read-only HTTP JSON API over a directory of bout files.
//!
//! [`Service`] holds the loaded corpus and answers every query as a plain
//! function; the axum router in [`router`] only decodes requests and
//! encodes replies. A reload builds a fresh [`Corpus`] off to the side and
//! swaps it in one step, so a request sees either the old corpus or the
//! new one.

use std::collections::HashMap;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::{json, Value};
use tokio::net::TcpListener;

use crate::abstraction::{AbstractionConfig, TacticNode};
use crate::analytics::{animation_track, bout_timeline, filter_phrases, sort_phrases, PhraseFilter, SortMode};
use crate::flowgraph::{attack_position_matrix, forward_steps_matrix, LayoutKind, PartitionScheme, RibbonScale};
use crate::ingest::{load_bouts, Format, LoadError};
use crate::model::{Action, Bout, Frame, Scorer, FRAMES_PER_SECOND};
use crate::pipeline::{graph_export, BoutSequences, GraphError, GraphOptions};

/// Error body shared by every endpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: &'static str,
    pub message: String,
    pub detail: Value,
}

impl ApiError {
    fn new(status: u16, code: &'static str, message: impl Into<String>, detail: Value) -> Self {
        ApiError { status, code, message: message.into(), detail }
    }

    pub fn unknown_bout(id: &str) -> Self {
        ApiError::new(404, "UnknownBout", format!("no bout with id {id:?}"), json!({ "bout": id }))
    }

    pub fn unknown_phrase(bout: &str, phrase: &str) -> Self {
        ApiError::new(404, "UnknownPhrase", format!("bout {bout:?} has no phrase {phrase:?}"), json!({ "bout": bout, "phrase": phrase }))
    }

    fn bad_parameter(name: &str, value: &str, why: impl std::fmt::Display) -> Self {
        ApiError::new(400, "BadParameter", format!("invalid {name}: {why}"), json!({ "parameter": name, "value": value }))
    }
}

impl From<GraphError> for ApiError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::IncompatibleOptions(m) => ApiError::new(400, "IncompatibleOptions", m, json!({ "hint": "use layout=orthogonal" })),
            GraphError::Layout(l) => ApiError::new(422, "LayoutInfeasible", l.to_string(), Value::Null),
            GraphError::Flow(f) => ApiError::new(500, "IllegalTransition", f.to_string(), Value::Null),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read data directory {path}: {source}")]
    Directory { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    File { path: PathBuf, source: LoadError },
    #[error("{path}: cannot abstract bout: {message}")]
    Abstraction { path: PathBuf, message: String },
    #[error("bout id {id:?} appears in both {first} and {second}")]
    DuplicateBout { id: String, first: PathBuf, second: PathBuf },
}

pub struct LoadedBout {
    pub bout: Bout,
    pub sequences: BoutSequences,
    pub source: PathBuf,
}

/// An immutable snapshot of the data directory, with a graph cache that
/// lives and dies with it.
pub struct Corpus {
    pub config: AbstractionConfig,
    pub bouts: Vec<LoadedBout>,
    graphs: Mutex<HashMap<String, Arc<Value>>>,
}

impl Corpus {
    pub fn new(config: AbstractionConfig, bouts: Vec<LoadedBout>) -> Self {
        Corpus { config, bouts, graphs: Mutex::new(HashMap::new()) }
    }

    /// Loads every `.csv` and `.json` file in `dir`, in file name order.
    /// Any invalid file fails the whole load.
    pub fn load_dir(dir: &Path, config: &AbstractionConfig) -> Result<Self, CorpusError> {
        let entries = fs::read_dir(dir).map_err(|source| CorpusError::Directory { path: dir.to_path_buf(), source })?;
        let mut files: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && Format::from_path(p).is_some())
            .collect();
        files.sort();
        let mut bouts: Vec<LoadedBout> = Vec::new();
        for path in files {
            let loaded = load_bouts(&path).map_err(|source| CorpusError::File { path: path.clone(), source })?;
            for bout in loaded {
                if let Some(other) = bouts.iter().find(|b| b.bout.id == bout.id) {
                    return Err(CorpusError::DuplicateBout { id: bout.id, first: other.source.clone(), second: path });
                }
                let sequences = BoutSequences::from_bout(&bout, config)
                    .map_err(|e| CorpusError::Abstraction { path: path.clone(), message: e.to_string() })?;
                bouts.push(LoadedBout { bout, sequences, source: path.clone() });
            }
        }
        Ok(Corpus::new(*config, bouts))
    }

    fn bout(&self, id: &str) -> Result<&LoadedBout, ApiError> {
        self.bouts.iter().find(|b| b.bout.id == id).ok_or_else(|| ApiError::unknown_bout(id))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoutSummary {
    pub id: String,
    pub fencer1: String,
    pub fencer2: String,
    pub final_score: (u8, u8),
    pub phrase_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoutDetail {
    #[serde(flatten)]
    pub summary: BoutSummary,
    pub break_index: Option<usize>,
    pub total_duration: Frame,
    pub phrase_ids: Vec<String>,
}

/// One row of the phrase list: the tactic nodes and the motion intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhraseRecord {
    pub id: String,
    pub index: usize,
    pub duration: Frame,
    pub duration_seconds: f64,
    pub result: &'static str,
    pub scorer: Scorer,
    pub score_after: (u8, u8),
    pub sequence: Vec<TacticNode>,
    pub motion: Vec<Action>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhraseList {
    pub bout: String,
    pub count: usize,
    pub sort: SortMode,
    pub phrases: Vec<PhraseRecord>,
}

fn summary(b: &Bout) -> BoutSummary {
    BoutSummary {
        id: b.id.clone(),
        fencer1: b.fencer1_name.clone(),
        fencer2: b.fencer2_name.clone(),
        final_score: b.final_score(),
        phrase_count: b.phrases.len(),
    }
}

fn csv_list<'a>(value: &'a str) -> impl Iterator<Item = &'a str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_bool(name: &str, v: &str) -> Result<bool, ApiError> {
    match v {
        "1" | "true" | "yes" => Ok(true),
        "0" | "false" | "no" => Ok(false),
        _ => Err(ApiError::bad_parameter(name, v, "expected true/false or 1/0")),
    }
}

type Params = HashMap<String, String>;

#[derive(Clone)]
pub struct Service {
    store: Arc<RwLock<Arc<Corpus>>>,
    data_dir: Option<PathBuf>,
    scale: RibbonScale,
}

impl Service {
    pub fn new(corpus: Corpus) -> Self {
        Service { store: Arc::new(RwLock::new(Arc::new(corpus))), data_dir: None, scale: RibbonScale::default() }
    }

    pub fn from_dir(dir: &Path, config: &AbstractionConfig) -> Result<Self, CorpusError> {
        let mut s = Service::new(Corpus::load_dir(dir, config)?);
        s.data_dir = Some(dir.to_path_buf());
        Ok(s)
    }

    pub fn snapshot(&self) -> Arc<Corpus> {
        self.store.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// Re-reads the data directory and swaps the new corpus in. On failure
    /// the current corpus stays.
    pub fn reload(&self) -> Result<Value, ApiError> {
        let Some(dir) = &self.data_dir else {
            return Err(ApiError::new(409, "NoDataDirectory", "service was not started from a data directory", Value::Null));
        };
        let config = self.snapshot().config;
        let corpus = Corpus::load_dir(dir, &config)
            .map_err(|e| ApiError::new(500, "LoadFailed", e.to_string(), json!({ "data": dir })))?;
        let n = corpus.bouts.len();
        *self.store.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(corpus);
        tracing::info!(bouts = n, "corpus reloaded");
        Ok(json!({ "bouts": n }))
    }

    pub fn list_bouts(&self) -> Vec<BoutSummary> {
        self.snapshot().bouts.iter().map(|b| summary(&b.bout)).collect()
    }

    pub fn bout(&self, id: &str) -> Result<BoutDetail, ApiError> {
        let corpus = self.snapshot();
        let b = &corpus.bout(id)?.bout;
        Ok(BoutDetail {
            summary: summary(b),
            break_index: b.break_index,
            total_duration: b.total_duration(),
            phrase_ids: b.phrases.iter().map(|p| p.id.clone()).collect(),
        })
    }

    pub fn phrases(&self, id: &str, params: &Params) -> Result<PhraseList, ApiError> {
        let corpus = self.snapshot();
        let loaded = corpus.bout(id)?;
        let mut filter = PhraseFilter::default();
        if let Some(v) = params.get("results") {
            filter.results = csv_list(v)
                .map(|t| {
                    t.parse::<u8>()
                        .ok()
                        .and_then(|n| Scorer::try_from(n).ok())
                        .ok_or_else(|| ApiError::bad_parameter("results", v, "expected a list of 0, 1, 2"))
                })
                .collect::<Result<_, _>>()?;
        }
        if let Some(v) = params.get("max_duration").filter(|v| !v.is_empty()) {
            filter.max_duration = Some(v.parse().map_err(|e| ApiError::bad_parameter("max_duration", v, e))?);
        }
        let sort = match params.get("sort").filter(|v| !v.is_empty()) {
            Some(v) => v.parse::<SortMode>().map_err(|e| ApiError::bad_parameter("sort", v, e))?,
            None => SortMode::Chronological,
        };
        let bout = &loaded.bout;
        let kept = filter_phrases(bout, &filter).ids;
        let order = sort_phrases(bout, &loaded.sequences.sequences, sort);
        let phrases: Vec<PhraseRecord> = order
            .iter()
            .filter(|id| kept.contains(id))
            .map(|pid| {
                let p = bout.phrase(pid).expect("sorted ids come from the bout");
                let seq = loaded.sequences.sequences.iter().find(|s| &s.phrase_id == pid);
                PhraseRecord {
                    id: p.id.clone(),
                    index: p.index,
                    duration: p.duration,
                    duration_seconds: p.duration as f64 / FRAMES_PER_SECOND,
                    result: p.result.letter(),
                    scorer: p.scorer,
                    score_after: p.score_after,
                    sequence: seq.map(|s| s.nodes.clone()).unwrap_or_default(),
                    motion: p.actions.clone(),
                }
            })
            .collect();
        Ok(PhraseList { bout: id.to_string(), count: phrases.len(), sort, phrases })
    }

    pub fn track(&self, id: &str, phrase: &str) -> Result<Value, ApiError> {
        let corpus = self.snapshot();
        let b = &corpus.bout(id)?.bout;
        let p = b.phrase(phrase).ok_or_else(|| ApiError::unknown_phrase(id, phrase))?;
        Ok(serde_json::to_value(animation_track(p)).expect("track serializes"))
    }

    pub fn timeline(&self, id: &str) -> Result<Value, ApiError> {
        let corpus = self.snapshot();
        Ok(serde_json::to_value(bout_timeline(&corpus.bout(id)?.bout)).expect("timeline serializes"))
    }

    pub fn matrices(&self, id: &str) -> Result<Value, ApiError> {
        let corpus = self.snapshot();
        let seqs = &corpus.bout(id)?.sequences.sequences;
        Ok(json!({
            "bout": id,
            "attack_positions": attack_position_matrix(seqs),
            "forward_steps": forward_steps_matrix(seqs),
        }))
    }

    /// Flow graph over the bouts named in `bouts` (all bouts when absent).
    /// Results are cached per corpus snapshot and option set.
    pub fn flowgraph(&self, params: &Params) -> Result<Arc<Value>, ApiError> {
        let corpus = self.snapshot();
        let ids: Vec<&str> = match params.get("bouts") {
            Some(v) => csv_list(v).collect(),
            None => corpus.bouts.iter().map(|b| b.bout.id.as_str()).collect(),
        };
        let selected: Vec<&BoutSequences> = ids.iter().map(|id| corpus.bout(id).map(|b| &b.sequences)).collect::<Result<_, _>>()?;
        let mode = match params.get("mode").filter(|v| !v.is_empty()) {
            Some(v) => v.parse::<PartitionScheme>().map_err(|e| ApiError::bad_parameter("mode", v, e))?,
            None => PartitionScheme::Whole,
        };
        let layout = match params.get("layout").filter(|v| !v.is_empty()) {
            Some(v) => v.parse::<LayoutKind>().map_err(|e| ApiError::bad_parameter("layout", v, e))?,
            None => LayoutKind::Layered,
        };
        let swap = match params.get("swap") {
            Some(v) => csv_list(v).map(|t| parse_bool("swap", t)).collect::<Result<_, _>>()?,
            None => Vec::new(),
        };
        let options = GraphOptions { mode, swap, layout };
        let key = format!("{ids:?}|{:?}|{:?}|{:?}", options.mode, options.swap, options.layout);
        if let Some(hit) = corpus.graphs.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return Ok(hit.clone());
        }
        let export = graph_export(&selected, &options, self.scale)?;
        let value = Arc::new(serde_json::to_value(export).expect("graph serializes"));
        corpus.graphs.lock().unwrap_or_else(|e| e.into_inner()).insert(key, value.clone());
        Ok(value)
    }
}

fn reply<T: Serialize>(result: Result<T, ApiError>) -> Response {
    match result {
        Ok(body) => Json(body).into_response(),
        Err(e) => {
            let status = StatusCode::from_u16(e.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
            (status, Json(e)).into_response()
        }
    }
}

/// Runs a query on the blocking pool; layouts can take a while.
async fn blocking<T, F>(f: F) -> Response
where
    T: Serialize + Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => reply(r),
        Err(e) => reply::<()>(Err(ApiError::new(500, "Internal", e.to_string(), Value::Null))),
    }
}

async fn list_bouts(State(s): State<Service>) -> Response {
    reply(Ok(s.list_bouts()))
}

async fn bout(State(s): State<Service>, UrlPath(id): UrlPath<String>) -> Response {
    reply(s.bout(&id))
}

async fn phrases(State(s): State<Service>, UrlPath(id): UrlPath<String>, Query(q): Query<Params>) -> Response {
    reply(s.phrases(&id, &q))
}

async fn track(State(s): State<Service>, UrlPath((id, pid)): UrlPath<(String, String)>) -> Response {
    reply(s.track(&id, &pid))
}

async fn timeline(State(s): State<Service>, UrlPath(id): UrlPath<String>) -> Response {
    reply(s.timeline(&id))
}

async fn matrices(State(s): State<Service>, UrlPath(id): UrlPath<String>) -> Response {
    reply(s.matrices(&id))
}

async fn flowgraph(State(s): State<Service>, Query(q): Query<Params>) -> Response {
    blocking(move || s.flowgraph(&q).map(|v| (*v).clone())).await
}

async fn reload(State(s): State<Service>) -> Response {
    blocking(move || s.reload()).await
}

async fn not_found() -> Response {
    reply::<()>(Err(ApiError::new(404, "NotFound", "no such endpoint", Value::Null)))
}

pub fn router(service: Service) -> Router {
    Router::new()
        .route("/bouts", get(list_bouts))
        .route("/bouts/{id}", get(bout))
        .route("/bouts/{id}/phrases", get(phrases))
        .route("/bouts/{id}/phrases/{pid}/track", get(track))
        .route("/bouts/{id}/timeline", get(timeline))
        .route("/bouts/{id}/matrices", get(matrices))
        .route("/flowgraph", get(flowgraph))
        .route("/reload", post(reload))
        .fallback(not_found)
        .with_state(service)
}

/// Serves on an already bound listener until the task is dropped.
pub async fn serve_on(listener: TcpListener, service: Service) -> std::io::Result<()> {
    axum::serve(listener, router(service)).await
}

pub async fn serve(addr: SocketAddr, service: Service) -> std::io::Result<()> {
    let listener = TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, bouts = service.snapshot().bouts.len(), "serving");
    serve_on(listener, service).await
}
