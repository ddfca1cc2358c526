//! Frame-event files: parsing, validation, begin/end pairing and bout
//! assembly.
//!
//! Files are UTF-8, either CSV with the header in [`CSV_HEADER`] or a JSON
//! array of objects using the same field names. Empty CSV cells and JSON
//! `null`s mean "absent".

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::model::{
    Action, ActionKind, Boundary, Bout, Discipline, EventCode, Fencer, Frame, FrameEvent, Phrase,
    Position, RefereeCall, Scorer, BREAK_SCORE, PISTE_HALF_LENGTH, WINNING_SCORE,
};

pub const CSV_HEADER: [&str; 14] = [
    "bout_id",
    "phrase_id",
    "frame",
    "footwork1",
    "footwork2",
    "bladework1",
    "bladework2",
    "attack1",
    "attack2",
    "parry1",
    "parry2",
    "confrontation",
    "result",
    "score",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("row {row}: malformed record: {message}")]
    MalformedRecord { row: usize, message: String },
    #[error("row {row}: unknown code {token:?} in field {field}")]
    UnknownCode { row: usize, field: &'static str, token: String },
    #[error("row {row}: frame decreases within phrase")]
    NonMonotonicFrame { row: usize },
    #[error("frame {frame}: {kind:?} end matches no open action")]
    EndWithoutBegin { frame: Frame, kind: ActionKind },
    #[error("phrase {phrase}: no terminal result row")]
    MissingResult { phrase: String },
    #[error("phrase {phrase}: score reaches {score}, above {WINNING_SCORE}")]
    ScoreOverflow { phrase: String, score: u8 },
    #[error("expected a single bout, found {0:?}")]
    MixedBouts(Vec<String>),
    #[error("no events")]
    Empty,
    #[error("unsupported file extension: {0}")]
    UnsupportedFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Cells of one input record before decoding, shared by both formats.
struct RawRecord {
    cells: [Option<String>; 14],
}

pub fn parse_frame_events<R: Read>(mut reader: R, format: Format) -> Result<Vec<FrameEvent>, IngestError> {
    let raws = match format {
        Format::Csv => read_csv_records(reader)?,
        Format::Json => {
            let mut text = String::new();
            reader.read_to_string(&mut text)?;
            read_json_records(&text)?
        }
    };
    let mut events = Vec::with_capacity(raws.len());
    let mut last_frame: HashMap<(String, String), Frame> = HashMap::new();
    for (i, raw) in raws.iter().enumerate() {
        let row = i + 1;
        let event = decode_record(raw, row)?;
        let key = (event.bout_id.clone(), event.phrase_id.clone());
        if let Some(&prev) = last_frame.get(&key) {
            if event.frame < prev {
                return Err(IngestError::NonMonotonicFrame { row });
            }
        }
        last_frame.insert(key, event.frame);
        events.push(event);
    }
    Ok(events)
}

pub fn read_events_file(path: &Path) -> Result<Vec<FrameEvent>, IngestError> {
    let format = Format::from_path(path)
        .ok_or_else(|| IngestError::UnsupportedFormat(path.display().to_string()))?;
    let file = fs::File::open(path)?;
    parse_frame_events(std::io::BufReader::new(file), format)
}

fn read_csv_records<R: Read>(reader: R) -> Result<Vec<RawRecord>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        None => return Ok(Vec::new()),
        Some(h) => h.map_err(|e| IngestError::MalformedRecord { row: 0, message: e.to_string() })?,
    };
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != CSV_HEADER {
        return Err(IngestError::MalformedRecord {
            row: 0,
            message: format!("unexpected header {names:?}"),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in records.enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| IngestError::MalformedRecord { row, message: e.to_string() })?;
        if rec.len() != CSV_HEADER.len() {
            return Err(IngestError::MalformedRecord {
                row,
                message: format!("expected {} fields, found {}", CSV_HEADER.len(), rec.len()),
            });
        }
        let cells = std::array::from_fn(|c| {
            let v = rec[c].trim();
            (!v.is_empty()).then(|| v.to_string())
        });
        out.push(RawRecord { cells });
    }
    Ok(out)
}

fn read_json_records(text: &str) -> Result<Vec<RawRecord>, IngestError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| IngestError::MalformedRecord { row: 0, message: e.to_string() })?;
    let items = value.as_array().ok_or_else(|| IngestError::MalformedRecord {
        row: 0,
        message: "top level must be an array".into(),
    })?;
    let mut out = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let row = i + 1;
        let obj = item.as_object().ok_or_else(|| IngestError::MalformedRecord {
            row,
            message: "record must be an object".into(),
        })?;
        if let Some(extra) = obj.keys().find(|k| !CSV_HEADER.contains(&k.as_str())) {
            return Err(IngestError::MalformedRecord { row, message: format!("unknown field {extra:?}") });
        }
        let mut cells: [Option<String>; 14] = Default::default();
        for (c, name) in CSV_HEADER.iter().enumerate() {
            cells[c] = match obj.get(*name) {
                None | Some(serde_json::Value::Null) => None,
                Some(serde_json::Value::String(s)) if s.is_empty() => None,
                Some(serde_json::Value::String(s)) => Some(s.clone()),
                Some(serde_json::Value::Number(n)) => Some(n.to_string()),
                Some(other) => {
                    return Err(IngestError::MalformedRecord {
                        row,
                        message: format!("field {name} has unsupported value {other}"),
                    })
                }
            };
        }
        out.push(RawRecord { cells });
    }
    Ok(out)
}

fn decode_record(raw: &RawRecord, row: usize) -> Result<FrameEvent, IngestError> {
    let cell = |i: usize| raw.cells[i].as_deref();
    let required = |i: usize| {
        cell(i).ok_or_else(|| IngestError::MalformedRecord { row, message: format!("missing {}", CSV_HEADER[i]) })
    };
    let bout_id = required(0)?.to_string();
    let phrase_id = required(1)?.to_string();
    let frame_text = required(2)?;
    let frame: Frame = frame_text
        .parse()
        .map_err(|_| IngestError::MalformedRecord { row, message: format!("bad frame {frame_text:?}") })?;

    let code = |i: usize, footwork: bool| -> Result<Option<EventCode>, IngestError> {
        let Some(token) = cell(i) else { return Ok(None) };
        match EventCode::parse(token) {
            Some(c) if c.kind.is_footwork() == footwork => Ok(Some(c)),
            _ => Err(IngestError::UnknownCode { row, field: CSV_HEADER[i], token: token.to_string() }),
        }
    };
    let position = |i: usize| -> Result<Option<Position>, IngestError> {
        let Some(token) = cell(i) else { return Ok(None) };
        Position::new(token)
            .map(Some)
            .ok_or_else(|| IngestError::UnknownCode { row, field: CSV_HEADER[i], token: token.to_string() })
    };
    let confrontation = match cell(11) {
        None => None,
        Some(t) => match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => return Err(IngestError::MalformedRecord { row, message: format!("bad confrontation {t:?}") }),
        },
    };
    let result = match cell(12) {
        None => None,
        Some(t) => Some(
            t.parse::<RefereeCall>()
                .map_err(|_| IngestError::UnknownCode { row, field: "result", token: t.to_string() })?,
        ),
    };
    let score = match cell(13) {
        None => None,
        Some(t) => Some(
            t.parse::<u8>()
                .ok()
                .and_then(|v| Scorer::try_from(v).ok())
                .ok_or_else(|| IngestError::UnknownCode { row, field: "score", token: t.to_string() })?,
        ),
    };
    Ok(FrameEvent {
        bout_id,
        phrase_id,
        frame,
        footwork1: code(3, true)?,
        footwork2: code(4, true)?,
        bladework1: code(5, false)?,
        bladework2: code(6, false)?,
        attack1: position(7)?,
        attack2: position(8)?,
        parry1: position(9)?,
        parry2: position(10)?,
        confrontation,
        result,
        score,
    })
}

pub fn write_csv<W: Write>(events: &[FrameEvent], writer: W) -> Result<(), IngestError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    let csv_err = |e: csv::Error| IngestError::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for e in events {
        let opt = |v: Option<String>| v.unwrap_or_default();
        let record = [
            e.bout_id.clone(),
            e.phrase_id.clone(),
            e.frame.to_string(),
            opt(e.footwork1.map(|c| c.token())),
            opt(e.footwork2.map(|c| c.token())),
            opt(e.bladework1.map(|c| c.token())),
            opt(e.bladework2.map(|c| c.token())),
            opt(e.attack1.as_ref().map(|p| p.to_string())),
            opt(e.attack2.as_ref().map(|p| p.to_string())),
            opt(e.parry1.as_ref().map(|p| p.to_string())),
            opt(e.parry2.as_ref().map(|p| p.to_string())),
            opt(e.confrontation.map(|c| c.to_string())),
            opt(e.result.map(|r| r.letter().to_string())),
            opt(e.score.map(|s| u8::from(s).to_string())),
        ];
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(events: &[FrameEvent], mut writer: W) -> Result<(), IngestError> {
    serde_json::to_writer_pretty(&mut writer, events).map_err(std::io::Error::other)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn write_events<W: Write>(events: &[FrameEvent], writer: W, format: Format) -> Result<(), IngestError> {
    match format {
        Format::Csv => write_csv(events, writer),
        Format::Json => write_json(events, writer),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IssueCode {
    NonMonotonicFrame,
    EndWithoutBegin,
    UnclosedFootwork,
    UnclosedBladework,
    OutcomeNotFinal,
    MissingResult,
    IncompleteOutcome,
    InconsistentOutcome,
    ConfrontationOutOfRange,
    AttackPositionWithoutAttack,
    ParryPositionWithoutParry,
    ScoreOverflow,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    /// 1-based record number in the input file.
    pub row: usize,
    pub code: IssueCode,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub rows: usize,
    pub phrases: usize,
    pub bouts: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
    pub counts: Counts,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    fn error(&mut self, row: usize, code: IssueCode, message: String) {
        self.errors.push(Issue { row, code, message });
    }

    fn warn(&mut self, row: usize, code: IssueCode, message: String) {
        self.warnings.push(Issue { row, code, message });
    }
}

/// Row indices grouped by bout then phrase, both in order of first appearance.
fn group_rows(events: &[FrameEvent]) -> Vec<(String, Vec<(String, Vec<usize>)>)> {
    let mut bouts: Vec<(String, Vec<(String, Vec<usize>)>)> = Vec::new();
    for (i, e) in events.iter().enumerate() {
        let bout_pos = match bouts.iter().position(|(b, _)| *b == e.bout_id) {
            Some(p) => p,
            None => {
                bouts.push((e.bout_id.clone(), Vec::new()));
                bouts.len() - 1
            }
        };
        let phrases = &mut bouts[bout_pos].1;
        match phrases.iter_mut().find(|(p, _)| *p == e.phrase_id) {
            Some((_, rows)) => rows.push(i),
            None => phrases.push((e.phrase_id.clone(), vec![i])),
        }
    }
    bouts
}

pub fn validate_events(events: &[FrameEvent]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let grouped = group_rows(events);
    report.counts = Counts {
        rows: events.len(),
        phrases: grouped.iter().map(|(_, p)| p.len()).sum(),
        bouts: grouped.len(),
    };

    for (bout_id, phrases) in &grouped {
        let mut totals = [0u32; 2];
        let mut overflowed = false;
        for (phrase_id, rows) in phrases {
            let rows_ev: Vec<&FrameEvent> = rows.iter().map(|&r| &events[r]).collect();
            let last = rows.len() - 1;
            for (k, (&r, e)) in rows.iter().zip(&rows_ev).enumerate() {
                let row = r + 1;
                if k > 0 && e.frame < rows_ev[k - 1].frame {
                    report.error(row, IssueCode::NonMonotonicFrame, format!("frame {} after {}", e.frame, rows_ev[k - 1].frame));
                }
                if k != last && (e.result.is_some() || e.score.is_some()) {
                    report.error(row, IssueCode::OutcomeNotFinal, format!("phrase {phrase_id}: result/score before the final row"));
                }
                if let Some(c) = e.confrontation {
                    if !(-PISTE_HALF_LENGTH..=PISTE_HALF_LENGTH).contains(&c) {
                        report.error(row, IssueCode::ConfrontationOutOfRange, format!("confrontation {c} outside [-7, 7]"));
                    }
                }
                for f in Fencer::BOTH {
                    let n = u8::from(f);
                    if e.attack(f).is_some() {
                        let on_attack = e.bladework(f) == Some(EventCode::begin(ActionKind::Attack));
                        let on_lunge = e.footwork(f) == Some(EventCode::begin(ActionKind::Lunge));
                        if !on_attack && !on_lunge {
                            report.error(row, IssueCode::AttackPositionWithoutAttack, format!("attack{n} without ATT_B or LUN_B"));
                        }
                    }
                    if e.parry(f).is_some() && e.bladework(f) != Some(EventCode::begin(ActionKind::Parry)) {
                        report.error(row, IssueCode::ParryPositionWithoutParry, format!("parry{n} without PAR_B"));
                    }
                }
            }

            let final_row = rows[last] + 1;
            let fin = rows_ev[last];
            match (fin.result, fin.score) {
                (None, None) => report.error(final_row, IssueCode::MissingResult, format!("phrase {phrase_id} has no result row")),
                (Some(_), None) | (None, Some(_)) => {
                    report.error(final_row, IssueCode::IncompleteOutcome, format!("phrase {phrase_id}: result and score must appear together"))
                }
                (Some(call), Some(score)) => {
                    let consistent = match call {
                        RefereeCall::N => score == Scorer::Nobody,
                        RefereeCall::A | RefereeCall::R => score != Scorer::Nobody,
                        RefereeCall::S => true,
                    };
                    if !consistent {
                        report.error(
                            final_row,
                            IssueCode::InconsistentOutcome,
                            format!("phrase {phrase_id}: call {} with score {}", call.letter(), u8::from(score)),
                        );
                    }
                    if let Some(f) = score.fencer() {
                        totals[f.index()] += 1;
                        let top = totals[f.index()];
                        if top > u32::from(WINNING_SCORE) && !overflowed {
                            overflowed = true;
                            report.error(final_row, IssueCode::ScoreOverflow, format!("bout {bout_id}: score reaches {top}"));
                        }
                    }
                }
            }

            let pairing = pair_actions(&rows_ev);
            for (k, frame, kind) in pairing.orphan_ends {
                report.error(rows[k] + 1, IssueCode::EndWithoutBegin, format!("frame {frame}: {kind:?} end without begin"));
            }
            for (k, fencer, kind) in pairing.unclosed {
                let code = if kind.is_footwork() { IssueCode::UnclosedFootwork } else { IssueCode::UnclosedBladework };
                report.warn(
                    rows[k] + 1,
                    code,
                    format!("phrase {phrase_id}: fencer {} {kind:?} never closed; auto-closed at phrase end", u8::from(fencer)),
                );
            }
        }
    }
    report
}

struct Pairing {
    actions: [Vec<Action>; 2],
    /// (index into the phrase rows, frame, kind)
    orphan_ends: Vec<(usize, Frame, ActionKind)>,
    /// (index of the opening row, fencer, kind)
    unclosed: Vec<(usize, Fencer, ActionKind)>,
}

struct OpenAction {
    action: Action,
    row: usize,
}

/// Pairs begin/end codes of one phrase into Actions.
///
/// Rows sharing a frame are handled together: ends close actions opened
/// earlier, then begins open new ones (a begin while the same kind is open
/// closes it at the new begin frame, and any open footwork of the fencer is
/// closed too), then ends left over close actions opened at this very frame
/// as zero-length intervals.
fn pair_actions(rows: &[&FrameEvent]) -> Pairing {
    let mut actions: [Vec<Action>; 2] = Default::default();
    let mut open: [BTreeMap<ActionKind, OpenAction>; 2] = Default::default();
    let mut pending_lunge_target: [Option<Position>; 2] = Default::default();
    let mut orphan_ends = Vec::new();
    let last_frame = rows.iter().map(|e| e.frame).max().unwrap_or(0);

    let mut start = 0;
    while start < rows.len() {
        let frame = rows[start].frame;
        let mut end = start;
        while end < rows.len() && rows[end].frame == frame {
            end += 1;
        }
        let group = start..end;

        let mut deferred = Vec::new();
        for k in group.clone() {
            for f in Fencer::BOTH {
                for code in [rows[k].footwork(f), rows[k].bladework(f)].into_iter().flatten() {
                    if code.boundary != Boundary::End {
                        continue;
                    }
                    let slot = &mut open[f.index()];
                    match slot.get(&code.kind) {
                        Some(o) if o.action.start_frame < frame => {
                            let mut o = slot.remove(&code.kind).unwrap();
                            o.action.end_frame = frame;
                            actions[f.index()].push(o.action);
                        }
                        _ => deferred.push((k, f, code.kind)),
                    }
                }
            }
        }

        for k in group.clone() {
            let e = rows[k];
            for f in Fencer::BOTH {
                let slot = &mut open[f.index()];
                if let Some(code) = e.footwork(f).filter(|c| c.boundary == Boundary::Begin) {
                    let open_footwork: Vec<ActionKind> = slot.keys().copied().filter(|k| k.is_footwork()).collect();
                    for kind in open_footwork {
                        let mut o = slot.remove(&kind).unwrap();
                        o.action.end_frame = frame;
                        actions[f.index()].push(o.action);
                    }
                    if code.kind == ActionKind::Lunge && e.bladework(f) != Some(EventCode::begin(ActionKind::Attack)) {
                        if let Some(p) = e.attack(f) {
                            pending_lunge_target[f.index()] = Some(p.clone());
                        }
                    }
                    slot.insert(code.kind, OpenAction { action: Action::new(f, code.kind, frame, frame), row: k });
                }
                if let Some(code) = e.bladework(f).filter(|c| c.boundary == Boundary::Begin) {
                    if let Some(mut o) = slot.remove(&code.kind) {
                        o.action.end_frame = frame;
                        actions[f.index()].push(o.action);
                    }
                    let mut action = Action::new(f, code.kind, frame, frame);
                    action.position = match code.kind {
                        ActionKind::Attack => e.attack(f).cloned().or_else(|| pending_lunge_target[f.index()].take()),
                        ActionKind::Parry => e.parry(f).cloned(),
                        _ => None,
                    };
                    slot.insert(code.kind, OpenAction { action, row: k });
                }
            }
        }

        for (k, f, kind) in deferred {
            let slot = &mut open[f.index()];
            match slot.get(&kind) {
                Some(o) if o.action.start_frame == frame => {
                    let o = slot.remove(&kind).unwrap();
                    actions[f.index()].push(o.action);
                }
                _ => orphan_ends.push((k, frame, kind)),
            }
        }
        start = end;
    }

    let mut unclosed = Vec::new();
    for f in Fencer::BOTH {
        for (kind, mut o) in std::mem::take(&mut open[f.index()]) {
            o.action.end_frame = last_frame;
            unclosed.push((o.row, f, kind));
            actions[f.index()].push(o.action);
        }
    }
    unclosed.sort_by_key(|&(row, f, kind)| (row, f, kind));
    for list in &mut actions {
        list.sort_by_key(|a| (a.start_frame, a.kind, a.end_frame));
    }
    Pairing { actions, orphan_ends, unclosed }
}

/// Pairs the begin/end events of a single phrase into per-fencer Actions.
/// Unclosed actions are closed at the phrase's last frame.
pub fn build_actions(events: &[FrameEvent]) -> Result<[Vec<Action>; 2], IngestError> {
    let rows: Vec<&FrameEvent> = events.iter().collect();
    let pairing = pair_actions(&rows);
    if let Some(&(_, frame, kind)) = pairing.orphan_ends.first() {
        return Err(IngestError::EndWithoutBegin { frame, kind });
    }
    Ok(pairing.actions)
}

/// Assembles every bout present in `events`, in order of first appearance.
pub fn build_bouts(events: &[FrameEvent]) -> Result<Vec<Bout>, IngestError> {
    group_rows(events)
        .into_iter()
        .map(|(bout_id, phrases)| assemble_bout(events, bout_id, phrases))
        .collect()
}

/// Assembles a single bout. All events must share one bout id.
pub fn build_bout(events: &[FrameEvent]) -> Result<Bout, IngestError> {
    let mut grouped = group_rows(events);
    match grouped.len() {
        0 => Err(IngestError::Empty),
        1 => {
            let (bout_id, phrases) = grouped.pop().unwrap();
            assemble_bout(events, bout_id, phrases)
        }
        _ => Err(IngestError::MixedBouts(grouped.into_iter().map(|(b, _)| b).collect())),
    }
}

fn assemble_bout(events: &[FrameEvent], bout_id: String, phrases: Vec<(String, Vec<usize>)>) -> Result<Bout, IngestError> {
    // Chronological order: first frame, then order of appearance.
    let mut ordered: Vec<(usize, (String, Vec<usize>))> = phrases.into_iter().enumerate().collect();
    ordered.sort_by_key(|(pos, (_, rows))| (events[rows[0]].frame, *pos));

    let mut score = (0u8, 0u8);
    let mut break_index = None;
    let mut out = Vec::with_capacity(ordered.len());
    for (i, (_, (phrase_id, rows))) in ordered.into_iter().enumerate() {
        let phrase_events: Vec<FrameEvent> = rows.iter().map(|&r| events[r].clone()).collect();
        let fin = phrase_events.last().unwrap();
        let result = fin.result.ok_or_else(|| IngestError::MissingResult { phrase: phrase_id.clone() })?;
        let scorer = fin.score.unwrap_or_default();
        let [a1, a2] = build_actions(&phrase_events)?;
        let mut actions = a1;
        actions.extend(a2);
        let duration = actions.iter().map(|a| a.end_frame).max().unwrap_or(0);

        match scorer.fencer() {
            Some(Fencer::One) => score.0 += 1,
            Some(Fencer::Two) => score.1 += 1,
            None => {}
        }
        let top = score.0.max(score.1);
        if top > WINNING_SCORE {
            return Err(IngestError::ScoreOverflow { phrase: phrase_id, score: top });
        }
        let index = i + 1;
        if break_index.is_none() && top >= BREAK_SCORE {
            break_index = Some(index);
        }
        let confrontation_track = phrase_events.iter().filter_map(|e| e.confrontation.map(|c| (e.frame, c))).collect();
        out.push(Phrase {
            id: phrase_id,
            index,
            actions,
            duration,
            result,
            scorer,
            confrontation_track,
            score_after: score,
        });
    }
    Ok(Bout {
        id: bout_id,
        fencer1_name: "Fencer 1".into(),
        fencer2_name: "Fencer 2".into(),
        discipline: Discipline::Sabre,
        phrases: out,
        break_index,
    })
}

/// Reads a file and assembles its bouts, rejecting files whose validation
/// report carries errors.
pub fn load_bouts(path: &Path) -> Result<Vec<Bout>, LoadError> {
    let events = read_events_file(path)?;
    let report = validate_events(&events);
    if !report.is_ok() {
        return Err(LoadError::Invalid(report));
    }
    Ok(build_bouts(&events)?)
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("validation failed with {} error(s)", .0.errors.len())]
    Invalid(ValidationReport),
}
