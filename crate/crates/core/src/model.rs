//! Domain types shared by every stage of the pipeline, plus the fixed
//! geometry of the tactic-node space.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Video frame tick (1/30 s), counted from the referee's start signal.
pub type Frame = u32;

pub const FRAMES_PER_SECOND: f64 = 30.0;
/// Score after which the mid-bout break is taken.
pub const BREAK_SCORE: u8 = 8;
/// First fencer to this score wins the bout.
pub const WINNING_SCORE: u8 = 15;
/// Half length of the piste in meters; coordinates live on `[-7, 7]`.
pub const PISTE_HALF_LENGTH: f64 = 7.0;
/// Distance of each on-guard line from the piste center, in meters.
pub const ON_GUARD_LINE: f64 = 2.0;

/// One of the two fencers. Fencer 1 starts on the left (negative) side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Fencer {
    One,
    Two,
}

impl Fencer {
    pub const BOTH: [Fencer; 2] = [Fencer::One, Fencer::Two];

    pub fn opponent(self) -> Fencer {
        match self {
            Fencer::One => Fencer::Two,
            Fencer::Two => Fencer::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Fencer::One => 0,
            Fencer::Two => 1,
        }
    }
}

impl From<Fencer> for u8 {
    fn from(f: Fencer) -> u8 {
        match f {
            Fencer::One => 1,
            Fencer::Two => 2,
        }
    }
}

impl TryFrom<u8> for Fencer {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Fencer::One),
            2 => Ok(Fencer::Two),
            other => Err(format!("fencer must be 1 or 2, got {other}")),
        }
    }
}

/// Who scored a phrase. Serialized as the `score` column value (0, 1, 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Scorer {
    #[default]
    Nobody,
    Fencer(Fencer),
}

impl Scorer {
    pub fn fencer(self) -> Option<Fencer> {
        match self {
            Scorer::Nobody => None,
            Scorer::Fencer(f) => Some(f),
        }
    }

    pub fn mirror(self) -> Scorer {
        match self {
            Scorer::Nobody => Scorer::Nobody,
            Scorer::Fencer(f) => Scorer::Fencer(f.opponent()),
        }
    }
}

impl From<Scorer> for u8 {
    fn from(s: Scorer) -> u8 {
        match s {
            Scorer::Nobody => 0,
            Scorer::Fencer(f) => f.into(),
        }
    }
}

impl TryFrom<u8> for Scorer {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            0 => Ok(Scorer::Nobody),
            1 => Ok(Scorer::Fencer(Fencer::One)),
            2 => Ok(Scorer::Fencer(Fencer::Two)),
            other => Err(format!("score must be 0, 1 or 2, got {other}")),
        }
    }
}

/// Referee call closing a phrase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RefereeCall {
    /// Attack.
    A,
    /// Riposte.
    R,
    /// Simultaneous.
    S,
    /// No call.
    N,
}

impl RefereeCall {
    pub fn letter(self) -> &'static str {
        match self {
            RefereeCall::A => "A",
            RefereeCall::R => "R",
            RefereeCall::S => "S",
            RefereeCall::N => "N",
        }
    }
}

impl FromStr for RefereeCall {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "A" => Ok(RefereeCall::A),
            "R" => Ok(RefereeCall::R),
            "S" => Ok(RefereeCall::S),
            "N" => Ok(RefereeCall::N),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Boundary {
    Begin,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Forward,
    Backward,
    Lunge,
    Attack,
    Parry,
    Riposte,
    Counter,
}

impl ActionKind {
    pub fn is_footwork(self) -> bool {
        matches!(self, ActionKind::Forward | ActionKind::Backward | ActionKind::Lunge)
    }

    pub fn is_offensive_blade(self) -> bool {
        matches!(self, ActionKind::Attack | ActionKind::Riposte | ActionKind::Counter)
    }

    /// Whether an Action of this kind carries a target position.
    pub fn takes_position(self) -> bool {
        matches!(self, ActionKind::Attack | ActionKind::Parry)
    }

    fn code_stem(self) -> &'static str {
        match self {
            ActionKind::Forward => "FWD",
            ActionKind::Backward => "BWD",
            ActionKind::Lunge => "LUN",
            ActionKind::Attack => "ATT",
            ActionKind::Parry => "PAR",
            ActionKind::Riposte => "RIP",
            ActionKind::Counter => "CTR",
        }
    }
}

/// A begin/end token from the footwork or bladework columns, e.g. `FWD_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventCode {
    pub kind: ActionKind,
    pub boundary: Boundary,
}

impl EventCode {
    pub fn begin(kind: ActionKind) -> Self {
        EventCode { kind, boundary: Boundary::Begin }
    }

    pub fn end(kind: ActionKind) -> Self {
        EventCode { kind, boundary: Boundary::End }
    }

    pub fn token(&self) -> String {
        let suffix = match self.boundary {
            Boundary::Begin => "B",
            Boundary::End => "E",
        };
        format!("{}_{}", self.kind.code_stem(), suffix)
    }

    pub fn parse(token: &str) -> Option<Self> {
        let (stem, suffix) = token.split_once('_')?;
        let kind = [
            ActionKind::Forward,
            ActionKind::Backward,
            ActionKind::Lunge,
            ActionKind::Attack,
            ActionKind::Parry,
            ActionKind::Riposte,
            ActionKind::Counter,
        ]
        .into_iter()
        .find(|k| k.code_stem() == stem)?;
        let boundary = match suffix {
            "B" => Boundary::Begin,
            "E" => Boundary::End,
            _ => return None,
        };
        Some(EventCode { kind, boundary })
    }
}

impl fmt::Display for EventCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

impl Serialize for EventCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.token())
    }
}

impl<'de> Deserialize<'de> for EventCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        EventCode::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown event code {s:?}")))
    }
}

/// Target token for attacks and parries. An open vocabulary of lowercase
/// tokens; [`Position::SABRE_DEFAULTS`] lists the usual sabre targets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Position(String);

impl Position {
    pub const SABRE_DEFAULTS: [&'static str; 4] = ["head", "chest", "flank", "arm"];

    pub fn new(token: &str) -> Option<Self> {
        let mut chars = token.chars();
        let first_ok = chars.next().is_some_and(|c| c.is_ascii_lowercase());
        let rest_ok = chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-' || c == '_');
        (first_ok && rest_ok).then(|| Position(token.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Position {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        Position::new(&s).ok_or_else(|| format!("invalid position token {s:?}"))
    }
}

impl From<Position> for String {
    fn from(p: Position) -> String {
        p.0
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One annotated frame row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEvent {
    pub bout_id: String,
    pub phrase_id: String,
    pub frame: Frame,
    pub footwork1: Option<EventCode>,
    pub footwork2: Option<EventCode>,
    pub bladework1: Option<EventCode>,
    pub bladework2: Option<EventCode>,
    pub attack1: Option<Position>,
    pub attack2: Option<Position>,
    pub parry1: Option<Position>,
    pub parry2: Option<Position>,
    pub confrontation: Option<f64>,
    pub result: Option<RefereeCall>,
    pub score: Option<Scorer>,
}

impl FrameEvent {
    pub fn new(bout_id: &str, phrase_id: &str, frame: Frame) -> Self {
        FrameEvent {
            bout_id: bout_id.to_string(),
            phrase_id: phrase_id.to_string(),
            frame,
            footwork1: None,
            footwork2: None,
            bladework1: None,
            bladework2: None,
            attack1: None,
            attack2: None,
            parry1: None,
            parry2: None,
            confrontation: None,
            result: None,
            score: None,
        }
    }

    pub fn footwork(&self, fencer: Fencer) -> Option<EventCode> {
        match fencer {
            Fencer::One => self.footwork1,
            Fencer::Two => self.footwork2,
        }
    }

    pub fn bladework(&self, fencer: Fencer) -> Option<EventCode> {
        match fencer {
            Fencer::One => self.bladework1,
            Fencer::Two => self.bladework2,
        }
    }

    pub fn attack(&self, fencer: Fencer) -> Option<&Position> {
        match fencer {
            Fencer::One => self.attack1.as_ref(),
            Fencer::Two => self.attack2.as_ref(),
        }
    }

    pub fn parry(&self, fencer: Fencer) -> Option<&Position> {
        match fencer {
            Fencer::One => self.parry1.as_ref(),
            Fencer::Two => self.parry2.as_ref(),
        }
    }

    /// True when the row carries nothing but its identifiers.
    pub fn is_blank(&self) -> bool {
        self.footwork1.is_none()
            && self.footwork2.is_none()
            && self.bladework1.is_none()
            && self.bladework2.is_none()
            && self.attack1.is_none()
            && self.attack2.is_none()
            && self.parry1.is_none()
            && self.parry2.is_none()
            && self.confrontation.is_none()
            && self.result.is_none()
            && self.score.is_none()
    }
}

/// A begin/end delimited interval of footwork or bladework for one fencer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub fencer: Fencer,
    pub kind: ActionKind,
    pub start_frame: Frame,
    pub end_frame: Frame,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Position>,
}

impl Action {
    pub fn new(fencer: Fencer, kind: ActionKind, start_frame: Frame, end_frame: Frame) -> Self {
        Action { fencer, kind, start_frame, end_frame, position: None }
    }

    pub fn with_position(mut self, position: &str) -> Self {
        self.position = Position::new(position);
        self
    }

    /// Closed-interval overlap.
    pub fn overlaps(&self, other: &Action) -> bool {
        self.start_frame <= other.end_frame && other.start_frame <= self.end_frame
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phrase {
    pub id: String,
    /// 1-based chronological position within the bout.
    pub index: usize,
    pub actions: Vec<Action>,
    pub duration: Frame,
    pub result: RefereeCall,
    pub scorer: Scorer,
    pub confrontation_track: Vec<(Frame, f64)>,
    pub score_after: (u8, u8),
}

impl Phrase {
    pub fn actions_of(&self, fencer: Fencer) -> impl Iterator<Item = &Action> {
        self.actions.iter().filter(move |a| a.fencer == fencer)
    }

    /// Same phrase seen with the fencers exchanged: fencer 1 becomes fencer 2,
    /// the scorer flips and the piste coordinate is negated.
    pub fn swap_fencers(&self) -> Phrase {
        let mut actions: Vec<Action> = self
            .actions
            .iter()
            .map(|a| Action { fencer: a.fencer.opponent(), ..a.clone() })
            .collect();
        actions.sort_by_key(|a| (a.fencer, a.start_frame, a.kind, a.end_frame));
        Phrase {
            id: self.id.clone(),
            index: self.index,
            actions,
            duration: self.duration,
            result: self.result,
            scorer: self.scorer.mirror(),
            confrontation_track: self.confrontation_track.iter().map(|&(f, x)| (f, -x)).collect(),
            score_after: (self.score_after.1, self.score_after.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Discipline {
    Sabre,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bout {
    pub id: String,
    pub fencer1_name: String,
    pub fencer2_name: String,
    pub discipline: Discipline,
    pub phrases: Vec<Phrase>,
    /// 1-based index of the phrase after which the break was taken.
    pub break_index: Option<usize>,
}

impl Bout {
    pub fn final_score(&self) -> (u8, u8) {
        self.phrases.last().map_or((0, 0), |p| p.score_after)
    }

    pub fn phrase(&self, id: &str) -> Option<&Phrase> {
        self.phrases.iter().find(|p| p.id == id)
    }

    pub fn total_duration(&self) -> Frame {
        self.phrases.iter().map(|p| p.duration).sum()
    }
}

/// Horizontal column of the tactical flow graph. The left column means
/// the right-hand fencer dominates, the right column the left-hand fencer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Column {
    Left,
    Center,
    Right,
}

impl Column {
    pub fn mirror(self) -> Column {
        match self {
            Column::Left => Column::Right,
            Column::Center => Column::Center,
            Column::Right => Column::Left,
        }
    }
}

/// The eight abstract tactic states. Declaration order is the collation
/// order used for sorting and deterministic tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TacticNodeKind {
    S,
    BB,
    FF,
    FB,
    BF,
    One,
    Two,
    Eq,
}

impl TacticNodeKind {
    pub const ALL: [TacticNodeKind; 8] = [
        TacticNodeKind::S,
        TacticNodeKind::BB,
        TacticNodeKind::FF,
        TacticNodeKind::FB,
        TacticNodeKind::BF,
        TacticNodeKind::One,
        TacticNodeKind::Two,
        TacticNodeKind::Eq,
    ];

    pub fn layer(self) -> u8 {
        use TacticNodeKind::*;
        match self {
            S | BB => 1,
            FF | FB | BF => 2,
            One | Two | Eq => 3,
        }
    }

    pub fn column(self) -> Column {
        use TacticNodeKind::*;
        match self {
            BF | Two => Column::Left,
            S | BB | FF | Eq => Column::Center,
            FB | One => Column::Right,
        }
    }

    pub fn is_terminal(self) -> bool {
        self.layer() == 3
    }

    /// The kind seen with the fencers exchanged.
    pub fn mirror(self) -> TacticNodeKind {
        use TacticNodeKind::*;
        match self {
            FB => BF,
            BF => FB,
            One => Two,
            Two => One,
            other => other,
        }
    }

    pub fn terminal_for(scorer: Scorer) -> TacticNodeKind {
        match scorer {
            Scorer::Nobody => TacticNodeKind::Eq,
            Scorer::Fencer(Fencer::One) => TacticNodeKind::One,
            Scorer::Fencer(Fencer::Two) => TacticNodeKind::Two,
        }
    }

    pub fn symbol(self) -> &'static str {
        use TacticNodeKind::*;
        match self {
            S => "S",
            BB => "BB",
            FF => "FF",
            FB => "FB",
            BF => "BF",
            One => "1",
            Two => "2",
            Eq => "=",
        }
    }

    /// Whether `self -> to` may appear as a flow-graph edge: layers never go
    /// back up, nothing enters S, nothing leaves a terminal, no self loops,
    /// and the only first-layer edge is S -> BB.
    pub fn can_flow_to(self, to: TacticNodeKind) -> bool {
        if self == to || to == TacticNodeKind::S || self.is_terminal() {
            return false;
        }
        if self.layer() > to.layer() {
            return false;
        }
        if self.layer() == 1 && to.layer() == 1 {
            return self == TacticNodeKind::S && to == TacticNodeKind::BB;
        }
        true
    }

    /// Every legal edge in collation order.
    pub fn legal_edges() -> Vec<(TacticNodeKind, TacticNodeKind)> {
        let mut out = Vec::new();
        for from in Self::ALL {
            for to in Self::ALL {
                if from.can_flow_to(to) {
                    out.push((from, to));
                }
            }
        }
        out
    }
}

impl fmt::Display for TacticNodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for TacticNodeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        TacticNodeKind::ALL
            .into_iter()
            .find(|k| k.symbol() == s)
            .ok_or_else(|| format!("unknown tactic node {s:?}"))
    }
}

impl Serialize for TacticNodeKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for TacticNodeKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn layer_of(kind: TacticNodeKind) -> u8 {
    kind.layer()
}

pub fn column_of(kind: TacticNodeKind) -> Column {
    kind.column()
}

#[cfg(test)]
mod tests {
    use super::*;
    use TacticNodeKind::*;

    #[test]
    fn layers_match_the_three_tier_arrangement() {
        assert_eq!(layer_of(S), 1);
        assert_eq!(layer_of(BB), 1);
        assert_eq!(layer_of(FF), 2);
        assert_eq!(layer_of(FB), 2);
        assert_eq!(layer_of(BF), 2);
        assert_eq!(layer_of(One), 3);
        assert_eq!(layer_of(Two), 3);
        assert_eq!(layer_of(Eq), 3);
        let per_layer: Vec<usize> = (1..=3)
            .map(|l| TacticNodeKind::ALL.iter().filter(|k| k.layer() == l).count())
            .collect();
        assert_eq!(per_layer, vec![2, 3, 3]);
    }

    #[test]
    fn columns() {
        assert_eq!(column_of(Two), Column::Left);
        assert_eq!(column_of(BF), Column::Left);
        assert_eq!(column_of(FF), Column::Center);
        assert_eq!(column_of(S), Column::Center);
        assert_eq!(column_of(BB), Column::Center);
        assert_eq!(column_of(Eq), Column::Center);
        assert_eq!(column_of(FB), Column::Right);
        assert_eq!(column_of(One), Column::Right);
    }

    #[test]
    fn mirror_is_an_involution_that_flips_columns() {
        for k in TacticNodeKind::ALL {
            assert_eq!(k.mirror().mirror(), k);
            assert_eq!(k.mirror().column(), k.column().mirror());
            assert_eq!(k.mirror().layer(), k.layer());
        }
        for fixed in [S, BB, FF, Eq] {
            assert_eq!(fixed.mirror(), fixed);
        }
    }

    #[test]
    fn legal_edge_set() {
        let edges = TacticNodeKind::legal_edges();
        // S: 7 targets, BB: 6, each layer-2 node: 2 siblings + 3 terminals.
        assert_eq!(edges.len(), 7 + 6 + 3 * 5);
        assert!(edges.contains(&(S, BB)));
        assert!(!edges.contains(&(BB, S)));
        assert!(!edges.contains(&(FF, BB)));
        assert!(!edges.contains(&(One, Eq)));
        assert!(edges.iter().all(|(a, b)| a.layer() <= b.layer()));
    }

    #[test]
    fn symbols_round_trip() {
        for k in TacticNodeKind::ALL {
            assert_eq!(k.symbol().parse::<TacticNodeKind>().unwrap(), k);
        }
        assert_eq!(serde_json::to_string(&Eq).unwrap(), "\"=\"");
    }

    #[test]
    fn event_codes_parse() {
        let code = EventCode::parse("ATT_B").unwrap();
        assert_eq!(code, EventCode::begin(ActionKind::Attack));
        assert_eq!(code.token(), "ATT_B");
        assert!(EventCode::parse("XYZ").is_none());
        assert!(EventCode::parse("FWD_X").is_none());
    }

    #[test]
    fn position_tokens_are_lowercase() {
        assert!(Position::new("head").is_some());
        assert!(Position::new("Head").is_none());
        assert!(Position::new("").is_none());
    }
}
