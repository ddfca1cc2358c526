//! Phrase abstraction: per-fencer direction timelines, the eight-state
//! tactic sequence, and right-of-way tracking.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Action, ActionKind, Fencer, Frame, Phrase, Position, RefereeCall, TacticNodeKind};

/// Tunable thresholds of the abstraction. Both are in frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbstractionConfig {
    /// Largest distance between the two fencers' retreat onsets for the
    /// opening to count as a planned joint retreat (BB).
    pub bb_joint_window_frames: Frame,
    /// Footwork gaps strictly longer than this become `hold` segments.
    pub pause_threshold_frames: Frame,
}

impl Default for AbstractionConfig {
    fn default() -> Self {
        AbstractionConfig { bb_joint_window_frames: 15, pause_threshold_frames: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
    Hold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionSegment {
    pub start_frame: Frame,
    pub end_frame: Frame,
    pub direction: Direction,
}

/// Movement direction of one fencer over `[0, phrase_end]`.
///
/// Forward and lunge footwork count as forward. Gaps between footwork
/// longer than the pause threshold are `hold`; shorter gaps are absorbed by
/// the preceding segment (or the following one at the start of the phrase).
/// Adjacent segments with equal direction are merged.
pub fn direction_timeline(actions: &[Action], phrase_end: Frame, pause_threshold: Frame) -> Vec<DirectionSegment> {
    let mut footwork: Vec<&Action> = actions.iter().filter(|a| a.kind.is_footwork()).collect();
    footwork.sort_by_key(|a| (a.start_frame, a.end_frame));
    let end_total = footwork.iter().map(|a| a.end_frame).max().unwrap_or(0).max(phrase_end);

    let mut segs: Vec<DirectionSegment> = Vec::new();
    let mut cursor: Frame = 0;
    for a in footwork {
        let direction = match a.kind {
            ActionKind::Backward => Direction::Backward,
            _ => Direction::Forward,
        };
        let mut start = a.start_frame.max(cursor);
        let end = a.end_frame.max(start);
        if start > cursor {
            if start - cursor > pause_threshold {
                segs.push(DirectionSegment { start_frame: cursor, end_frame: start, direction: Direction::Hold });
            } else if let Some(last) = segs.last_mut() {
                last.end_frame = start;
            } else {
                start = cursor;
            }
        }
        segs.push(DirectionSegment { start_frame: start, end_frame: end, direction });
        cursor = end;
    }
    if end_total > cursor || segs.is_empty() {
        if end_total - cursor > pause_threshold || segs.is_empty() {
            segs.push(DirectionSegment { start_frame: cursor, end_frame: end_total, direction: Direction::Hold });
        } else if let Some(last) = segs.last_mut() {
            last.end_frame = end_total;
        }
    }

    let mut merged: Vec<DirectionSegment> = Vec::with_capacity(segs.len());
    let only_one = segs.len() == 1;
    for s in segs {
        if s.start_frame == s.end_frame && !only_one {
            continue;
        }
        match merged.last_mut() {
            Some(last) if last.direction == s.direction => last.end_frame = s.end_frame,
            _ => merged.push(s),
        }
    }
    if merged.is_empty() {
        merged.push(DirectionSegment { start_frame: 0, end_frame: end_total, direction: Direction::Hold });
    }
    merged
}

fn direction_at(timeline: &[DirectionSegment], frame: Frame) -> Direction {
    timeline
        .iter()
        .rev()
        .find(|s| s.start_frame <= frame)
        .or(timeline.first())
        .map_or(Direction::Hold, |s| s.direction)
}

/// Joint direction pairs sampled at every direction change of either
/// fencer, with consecutive duplicates removed.
fn joint_samples(t1: &[DirectionSegment], t2: &[DirectionSegment]) -> Vec<(Frame, (Direction, Direction))> {
    let mut frames: Vec<Frame> = t1.iter().chain(t2).map(|s| s.start_frame).collect();
    frames.sort_unstable();
    frames.dedup();
    let mut out: Vec<(Frame, (Direction, Direction))> = Vec::new();
    for f in frames {
        let pair = (direction_at(t1, f), direction_at(t2, f));
        if out.last().map(|(_, p)| *p) != Some(pair) {
            out.push((f, pair));
        }
    }
    out
}

/// One right-of-way interval. `owner` is `None` before anyone has attacked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrioritySegment {
    pub start_frame: Frame,
    pub end_frame: Frame,
    pub owner: Option<Fencer>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorityTimeline {
    pub segments: Vec<PrioritySegment>,
}

impl PriorityTimeline {
    pub fn owner_at(&self, frame: Frame) -> Option<Fencer> {
        self.segments
            .iter()
            .rev()
            .find(|s| s.start_frame <= frame)
            .and_then(|s| s.owner)
    }
}

/// Tracks who holds right of way through a phrase.
///
/// Nobody owns it until the first attack; the attacker takes it (a tie on
/// the same frame leaves it unowned). It passes to the opponent when the
/// opponent begins a parry while the owner's current action is still
/// running, or begins an attack, riposte or counter-attack once that action
/// has ended. The owner's own offensive actions renew the current action.
pub fn compute_priority(phrase: &Phrase) -> PriorityTimeline {
    let mut blade: Vec<&Action> = phrase.actions.iter().filter(|a| !a.kind.is_footwork()).collect();
    blade.sort_by_key(|a| (a.start_frame, a.fencer, a.kind));

    let mut owner: Option<Fencer> = None;
    let mut current_end: Frame = 0;
    let mut changes: Vec<(Frame, Option<Fencer>)> = Vec::new();

    let mut i = 0;
    while i < blade.len() {
        let t = blade[i].start_frame;
        let mut j = i;
        while j < blade.len() && blade[j].start_frame == t {
            j += 1;
        }
        let group = &blade[i..j];
        match owner {
            None => {
                let attackers: Vec<&&Action> = group.iter().filter(|a| a.kind == ActionKind::Attack).collect();
                let first = attackers.first().map(|a| a.fencer);
                if let Some(f) = first {
                    if attackers.iter().all(|a| a.fencer == f) {
                        owner = Some(f);
                        current_end = attackers.iter().map(|a| a.end_frame).max().unwrap_or(t);
                        changes.push((t, owner));
                    }
                }
            }
            Some(o) => {
                for a in group.iter().filter(|a| a.fencer == o && a.kind.is_offensive_blade()) {
                    current_end = current_end.max(a.end_frame);
                }
                let opp = o.opponent();
                let trigger = group.iter().filter(|a| a.fencer == opp).find(|a| match a.kind {
                    ActionKind::Parry => t <= current_end,
                    k if k.is_offensive_blade() => t >= current_end,
                    _ => false,
                });
                if let Some(a) = trigger {
                    owner = Some(opp);
                    current_end = a.end_frame;
                    changes.push((t, owner));
                }
            }
        }
        i = j;
    }

    let end = phrase.duration;
    let mut segments: Vec<PrioritySegment> = Vec::new();
    let mut start: Frame = 0;
    let mut cur: Option<Fencer> = None;
    for (t, o) in changes {
        let t = t.min(end);
        if t > start {
            segments.push(PrioritySegment { start_frame: start, end_frame: t, owner: cur });
            start = t;
        }
        cur = o;
    }
    if end > start || segments.is_empty() {
        segments.push(PrioritySegment { start_frame: start, end_frame: end.max(start), owner: cur });
    }
    let mut merged: Vec<PrioritySegment> = Vec::with_capacity(segments.len());
    for s in segments {
        match merged.last_mut() {
            Some(last) if last.owner == s.owner => last.end_frame = s.end_frame,
            _ => merged.push(s),
        }
    }
    PriorityTimeline { segments: merged }
}

/// Attack targets observed together while in FF. A side is `None` when
/// that fencer did not attack (or attacked without a recorded target).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AttackPair {
    pub frame: Frame,
    pub fencer1: Option<Position>,
    pub fencer2: Option<Position>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TacticNode {
    pub kind: TacticNodeKind,
    pub enter_frame: Frame,
    /// Opening forward steps (fencer 1, fencer 2), S nodes only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_steps: Option<[u8; 2]>,
    /// Attack targets seen during the stay, FF nodes only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ff_attacks: Option<Vec<AttackPair>>,
    pub priority_at_entry: Option<Fencer>,
}

impl TacticNode {
    pub fn new(kind: TacticNodeKind, enter_frame: Frame) -> Self {
        TacticNode {
            kind,
            enter_frame,
            start_steps: (kind == TacticNodeKind::S).then_some([0, 0]),
            ff_attacks: (kind == TacticNodeKind::FF).then(Vec::new),
            priority_at_entry: None,
        }
    }

    pub fn mirror(&self) -> TacticNode {
        TacticNode {
            kind: self.kind.mirror(),
            enter_frame: self.enter_frame,
            start_steps: self.start_steps.map(|[a, b]| [b, a]),
            ff_attacks: self.ff_attacks.as_ref().map(|pairs| {
                let mut swapped: Vec<AttackPair> = pairs
                    .iter()
                    .map(|p| AttackPair { frame: p.frame, fencer1: p.fencer2.clone(), fencer2: p.fencer1.clone() })
                    .collect();
                swapped.sort();
                swapped
            }),
            priority_at_entry: self.priority_at_entry.map(Fencer::opponent),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TacticSequence {
    pub phrase_id: String,
    pub phrase_index: usize,
    pub nodes: Vec<TacticNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceViolation {
    #[error("sequence is empty")]
    Empty,
    #[error("first node is {0}, not S")]
    FirstNotStart(TacticNodeKind),
    #[error("last node {0} is not a terminal")]
    LastNotTerminal(TacticNodeKind),
    #[error("node {0} repeats")]
    Repeat(TacticNodeKind),
    #[error("layer goes back up from {0} to {1}")]
    LayerRegression(TacticNodeKind, TacticNodeKind),
    #[error("BB at position {0}; it may only follow S directly")]
    MisplacedBB(usize),
    #[error("terminal {0} before the end")]
    EarlyTerminal(TacticNodeKind),
    #[error("enter frames decrease at position {0}")]
    FrameRegression(usize),
    #[error("annotation on {0} does not belong to that kind")]
    StrayAnnotation(TacticNodeKind),
}

impl TacticSequence {
    pub fn kinds(&self) -> Vec<TacticNodeKind> {
        self.nodes.iter().map(|n| n.kind).collect()
    }

    pub fn terminal(&self) -> Option<TacticNodeKind> {
        self.nodes.last().map(|n| n.kind).filter(|k| k.is_terminal())
    }

    /// The sequence as seen with the fencers exchanged.
    pub fn mirror(&self) -> TacticSequence {
        TacticSequence {
            phrase_id: self.phrase_id.clone(),
            phrase_index: self.phrase_index,
            nodes: self.nodes.iter().map(TacticNode::mirror).collect(),
        }
    }

    /// Checks every structural rule a well-formed sequence obeys.
    pub fn check_invariants(&self) -> Result<(), SequenceViolation> {
        let first = self.nodes.first().ok_or(SequenceViolation::Empty)?;
        if first.kind != TacticNodeKind::S {
            return Err(SequenceViolation::FirstNotStart(first.kind));
        }
        let last = self.nodes.last().unwrap();
        if !last.kind.is_terminal() {
            return Err(SequenceViolation::LastNotTerminal(last.kind));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.start_steps.is_some() != (n.kind == TacticNodeKind::S)
                || n.ff_attacks.is_some() != (n.kind == TacticNodeKind::FF)
            {
                return Err(SequenceViolation::StrayAnnotation(n.kind));
            }
            if n.kind == TacticNodeKind::BB && i != 1 {
                return Err(SequenceViolation::MisplacedBB(i));
            }
            if n.kind == TacticNodeKind::S && i != 0 {
                return Err(SequenceViolation::Repeat(TacticNodeKind::S));
            }
            if n.kind.is_terminal() && i + 1 != self.nodes.len() {
                return Err(SequenceViolation::EarlyTerminal(n.kind));
            }
        }
        for (i, w) in self.nodes.windows(2).enumerate() {
            if w[0].kind == w[1].kind {
                return Err(SequenceViolation::Repeat(w[0].kind));
            }
            if w[0].kind.layer() > w[1].kind.layer() {
                return Err(SequenceViolation::LayerRegression(w[0].kind, w[1].kind));
            }
            if w[0].enter_frame > w[1].enter_frame {
                return Err(SequenceViolation::FrameRegression(i + 1));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbstractionError {
    #[error("phrase {0} has neither actions nor a referee call")]
    EmptyPhrase(String),
}

/// Frame at which a fencer abandons the opening advance, if the opening
/// looks like a planned retreat: either the fencer starts by retreating, or
/// after at most two forward steps switches to backward or pauses before
/// moving again.
fn retreat_onset(timeline: &[DirectionSegment], actions: &[&Action]) -> Option<Frame> {
    let mut segs = timeline.iter().skip_while(|s| s.direction == Direction::Hold);
    let first = segs.next()?;
    match first.direction {
        Direction::Backward => Some(first.start_frame),
        Direction::Hold => None,
        Direction::Forward => {
            let steps = actions
                .iter()
                .filter(|a| matches!(a.kind, ActionKind::Forward | ActionKind::Lunge))
                .filter(|a| a.start_frame >= first.start_frame && a.start_frame < first.end_frame)
                .count();
            if steps > 2 {
                return None;
            }
            let next = segs.next()?;
            match next.direction {
                Direction::Backward => Some(next.start_frame),
                Direction::Hold => segs.next().map(|_| next.start_frame),
                Direction::Forward => None,
            }
        }
    }
}

/// Abstracts one phrase into its tactic sequence.
///
/// The sequence opens with S, annotated with each fencer's forward steps
/// before the first change of the joint movement state (at most 2). BB
/// follows when both fencers' retreat onsets fall within the joint window.
/// After that, each change of the joint state emits FF, FB or BF for
/// forward/forward, forward/backward and backward/forward; pairs involving
/// a hold, and mutual retreat, emit nothing. The terminal node follows the
/// scorer.
pub fn abstract_phrase(phrase: &Phrase, config: &AbstractionConfig) -> Result<TacticSequence, AbstractionError> {
    if phrase.actions.is_empty() && phrase.result == RefereeCall::N {
        return Err(AbstractionError::EmptyPhrase(phrase.id.clone()));
    }
    let per_fencer: [Vec<&Action>; 2] = [
        phrase.actions_of(Fencer::One).collect(),
        phrase.actions_of(Fencer::Two).collect(),
    ];
    let timelines: [Vec<DirectionSegment>; 2] = std::array::from_fn(|i| {
        let owned: Vec<Action> = per_fencer[i].iter().map(|a| (*a).clone()).collect();
        direction_timeline(&owned, phrase.duration, config.pause_threshold_frames)
    });
    let samples = joint_samples(&timelines[0], &timelines[1]);
    let priority = compute_priority(phrase);

    let opening = samples
        .iter()
        .position(|(_, (a, b))| *a != Direction::Hold && *b != Direction::Hold);
    let change_frame =
        opening.and_then(|i| samples[i + 1..].iter().find(|(_, p)| *p != samples[i].1).map(|(f, _)| *f));
    let steps: [u8; 2] = std::array::from_fn(|i| {
        let n = per_fencer[i]
            .iter()
            .filter(|a| a.kind == ActionKind::Forward)
            .filter(|a| change_frame.is_none_or(|c| a.start_frame < c))
            .count();
        n.min(2) as u8
    });

    let mut nodes = vec![TacticNode { start_steps: Some(steps), ..TacticNode::new(TacticNodeKind::S, 0) }];

    let onsets = [
        retreat_onset(&timelines[0], &per_fencer[0]),
        retreat_onset(&timelines[1], &per_fencer[1]),
    ];
    let bb_frame = match onsets {
        [Some(a), Some(b)] if a.abs_diff(b) <= config.bb_joint_window_frames => Some(a.max(b)),
        _ => None,
    };
    if let Some(t) = bb_frame {
        nodes.push(TacticNode::new(TacticNodeKind::BB, t));
    }

    for &(frame, pair) in &samples {
        if bb_frame.is_some_and(|t| frame <= t) {
            continue;
        }
        let kind = match pair {
            (Direction::Forward, Direction::Forward) => TacticNodeKind::FF,
            (Direction::Forward, Direction::Backward) => TacticNodeKind::FB,
            (Direction::Backward, Direction::Forward) => TacticNodeKind::BF,
            _ => continue,
        };
        if nodes.last().map(|n| n.kind) != Some(kind) {
            nodes.push(TacticNode::new(kind, frame));
        }
    }

    let last_enter = nodes.last().map_or(0, |n| n.enter_frame);
    nodes.push(TacticNode::new(TacticNodeKind::terminal_for(phrase.scorer), phrase.duration.max(last_enter)));

    let n = nodes.len();
    for i in 0..n {
        nodes[i].priority_at_entry = priority.owner_at(nodes[i].enter_frame);
        if nodes[i].kind != TacticNodeKind::FF {
            continue;
        }
        let enter = nodes[i].enter_frame;
        let exit = if nodes[i + 1].kind.is_terminal() { nodes[i + 1].enter_frame + 1 } else { nodes[i + 1].enter_frame };
        let attacks_in = |f: usize| -> Vec<&Action> {
            per_fencer[f]
                .iter()
                .copied()
                .filter(|a| a.kind == ActionKind::Attack && a.start_frame < exit && a.end_frame >= enter)
                .collect()
        };
        let (a1, a2) = (attacks_in(0), attacks_in(1));
        let mut pairs = Vec::new();
        for x in &a1 {
            let mut paired = false;
            for y in a2.iter().filter(|y| x.overlaps(y)) {
                paired = true;
                pairs.push(AttackPair {
                    frame: x.start_frame.min(y.start_frame),
                    fencer1: x.position.clone(),
                    fencer2: y.position.clone(),
                });
            }
            if !paired {
                pairs.push(AttackPair { frame: x.start_frame, fencer1: x.position.clone(), fencer2: None });
            }
        }
        for y in a2.iter().filter(|y| !a1.iter().any(|x| x.overlaps(y))) {
            pairs.push(AttackPair { frame: y.start_frame, fencer1: None, fencer2: y.position.clone() });
        }
        pairs.sort();
        nodes[i].ff_attacks = Some(pairs);
    }

    Ok(TacticSequence { phrase_id: phrase.id.clone(), phrase_index: phrase.index, nodes })
}

pub fn abstract_bout(bout: &crate::model::Bout, config: &AbstractionConfig) -> Result<Vec<TacticSequence>, AbstractionError> {
    bout.phrases.iter().map(|p| abstract_phrase(p, config)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ActionKind::*, Scorer};
    use TacticNodeKind as K;

    fn act(f: Fencer, kind: ActionKind, s: Frame, e: Frame) -> Action {
        Action::new(f, kind, s, e)
    }

    fn phrase(actions: Vec<Action>, scorer: Scorer, result: RefereeCall) -> Phrase {
        let duration = actions.iter().map(|a| a.end_frame).max().unwrap_or(0);
        Phrase {
            id: "P1".into(),
            index: 1,
            actions,
            duration,
            result,
            scorer,
            confrontation_track: vec![],
            score_after: (0, 0),
        }
    }

    fn seg(s: Frame, e: Frame, d: Direction) -> DirectionSegment {
        DirectionSegment { start_frame: s, end_frame: e, direction: d }
    }

    const F1: Fencer = Fencer::One;
    const F2: Fencer = Fencer::Two;

    #[test]
    fn timeline_maps_footwork_directly() {
        let acts = vec![act(F1, Forward, 0, 20), act(F1, Backward, 20, 40)];
        assert_eq!(
            direction_timeline(&acts, 40, 10),
            vec![seg(0, 20, Direction::Forward), seg(20, 40, Direction::Backward)]
        );
    }

    #[test]
    fn long_gaps_become_holds() {
        let acts = vec![act(F1, Forward, 0, 10), act(F1, Forward, 30, 40)];
        assert_eq!(
            direction_timeline(&acts, 40, 10),
            vec![seg(0, 10, Direction::Forward), seg(10, 30, Direction::Hold), seg(30, 40, Direction::Forward)]
        );
        // A gap of exactly the threshold is not a pause.
        let acts = vec![act(F1, Forward, 0, 10), act(F1, Forward, 20, 40)];
        assert_eq!(direction_timeline(&acts, 40, 10), vec![seg(0, 40, Direction::Forward)]);
    }

    #[test]
    fn no_footwork_is_one_hold() {
        assert_eq!(direction_timeline(&[], 55, 10), vec![seg(0, 55, Direction::Hold)]);
        let blade_only = vec![act(F1, Attack, 10, 20)];
        assert_eq!(direction_timeline(&blade_only, 20, 10), vec![seg(0, 20, Direction::Hold)]);
    }

    #[test]
    fn lunges_count_as_forward() {
        let acts = vec![act(F1, Forward, 0, 10), act(F1, Lunge, 10, 25)];
        assert_eq!(direction_timeline(&acts, 25, 10), vec![seg(0, 25, Direction::Forward)]);
    }

    #[test]
    fn attack_then_retreat_is_s_ff_fb_one() {
        let p = phrase(
            vec![
                act(F1, Forward, 0, 10),
                act(F1, Forward, 10, 20),
                act(F1, Lunge, 20, 32),
                act(F1, Attack, 22, 30).with_position("head"),
                act(F2, Forward, 0, 18),
                act(F2, Backward, 18, 40),
            ],
            Scorer::Fencer(F1),
            RefereeCall::A,
        );
        let seq = abstract_phrase(&p, &AbstractionConfig::default()).unwrap();
        assert_eq!(seq.kinds(), vec![K::S, K::FF, K::FB, K::One]);
        assert_eq!(seq.nodes[0].start_steps, Some([2, 1]));
        assert_eq!(seq.nodes[2].enter_frame, 18);
        assert_eq!(seq.nodes[3].enter_frame, 40);
        seq.check_invariants().unwrap();
    }

    #[test]
    fn simultaneous_attack_is_s_ff_eq() {
        let p = phrase(
            vec![
                act(F1, Forward, 0, 10),
                act(F1, Forward, 10, 20),
                act(F1, Lunge, 20, 30),
                act(F1, Attack, 21, 30).with_position("head"),
                act(F2, Forward, 0, 9),
                act(F2, Forward, 9, 20),
                act(F2, Lunge, 20, 30),
                act(F2, Attack, 21, 30).with_position("chest"),
            ],
            Scorer::Nobody,
            RefereeCall::S,
        );
        let seq = abstract_phrase(&p, &AbstractionConfig::default()).unwrap();
        assert_eq!(seq.kinds(), vec![K::S, K::FF, K::Eq]);
        assert_eq!(seq.nodes[0].start_steps, Some([2, 2]));
        assert_eq!(
            seq.nodes[1].ff_attacks,
            Some(vec![AttackPair { frame: 21, fencer1: Position::new("head"), fencer2: Position::new("chest") }])
        );
        // Simultaneous start: nobody holds right of way at the end.
        assert_eq!(seq.nodes[2].priority_at_entry, None);
    }

    #[test]
    fn joint_retreat_after_one_step_is_bb() {
        let p = phrase(
            vec![
                act(F1, Forward, 0, 12),
                act(F1, Backward, 12, 40),
                act(F1, Backward, 40, 70),
                act(F2, Forward, 0, 14),
                act(F2, Backward, 14, 40),
                act(F2, Forward, 40, 55),
                act(F2, Lunge, 55, 70),
                act(F2, Attack, 57, 70).with_position("arm"),
            ],
            Scorer::Fencer(F2),
            RefereeCall::A,
        );
        let seq = abstract_phrase(&p, &AbstractionConfig::default()).unwrap();
        assert_eq!(seq.kinds(), vec![K::S, K::BB, K::BF, K::Two]);
        assert_eq!(seq.nodes[0].start_steps, Some([1, 1]));
        assert_eq!(seq.nodes[1].enter_frame, 14);
        assert_eq!(seq.nodes[2].enter_frame, 40);
    }

    #[test]
    fn pause_then_advance_is_bb() {
        let p = phrase(
            vec![
                act(F1, Forward, 0, 10),
                act(F1, Forward, 10, 20),
                act(F1, Forward, 38, 50),
                act(F1, Lunge, 50, 60),
                act(F1, Attack, 52, 60),
                act(F2, Forward, 0, 18),
                act(F2, Forward, 40, 60),
            ],
            Scorer::Fencer(F1),
            RefereeCall::A,
        );
        let seq = abstract_phrase(&p, &AbstractionConfig::default()).unwrap();
        assert_eq!(seq.kinds(), vec![K::S, K::BB, K::FF, K::One]);
        assert_eq!(seq.nodes[2].enter_frame, 40);
        assert_eq!(seq.nodes[2].ff_attacks, Some(vec![AttackPair { frame: 52, fencer1: None, fencer2: None }]));
    }

    #[test]
    fn retreat_outside_the_window_is_not_bb() {
        let p = phrase(
            vec![
                act(F1, Forward, 0, 10),
                act(F1, Backward, 10, 60),
                act(F2, Forward, 0, 10),
                act(F2, Forward, 10, 30),
                act(F2, Backward, 30, 60),
            ],
            Scorer::Nobody,
            RefereeCall::N,
        );
        let seq = abstract_phrase(&p, &AbstractionConfig::default()).unwrap();
        // Mutual retreat after entering layer 2 emits nothing.
        assert_eq!(seq.kinds(), vec![K::S, K::FF, K::BF, K::Eq]);
        let wide = AbstractionConfig { bb_joint_window_frames: 20, ..Default::default() };
        assert_eq!(abstract_phrase(&p, &wide).unwrap().kinds(), vec![K::S, K::BB, K::Eq]);
    }

    #[test]
    fn terminal_follows_scorer() {
        for (scorer, kind) in [(Scorer::Nobody, K::Eq), (Scorer::Fencer(F1), K::One), (Scorer::Fencer(F2), K::Two)] {
            let p = phrase(vec![act(F1, Attack, 0, 5)], scorer, RefereeCall::A);
            let seq = abstract_phrase(&p, &AbstractionConfig::default()).unwrap();
            assert_eq!(seq.kinds(), vec![K::S, kind]);
        }
    }

    #[test]
    fn empty_phrase_is_an_error() {
        let p = phrase(vec![], Scorer::Nobody, RefereeCall::N);
        assert_eq!(
            abstract_phrase(&p, &AbstractionConfig::default()),
            Err(AbstractionError::EmptyPhrase("P1".into()))
        );
    }

    #[test]
    fn priority_without_attacks_is_unowned() {
        let p = phrase(vec![act(F1, Forward, 0, 30)], Scorer::Nobody, RefereeCall::N);
        assert_eq!(
            compute_priority(&p).segments,
            vec![PrioritySegment { start_frame: 0, end_frame: 30, owner: None }]
        );
    }

    #[test]
    fn first_attacker_takes_priority() {
        let p = phrase(vec![act(F1, Forward, 0, 40), act(F1, Attack, 22, 30)], Scorer::Fencer(F1), RefereeCall::A);
        assert_eq!(
            compute_priority(&p).segments,
            vec![
                PrioritySegment { start_frame: 0, end_frame: 22, owner: None },
                PrioritySegment { start_frame: 22, end_frame: 40, owner: Some(F1) },
            ]
        );
    }

    #[test]
    fn parry_takes_priority_and_riposte_keeps_it() {
        let p = phrase(
            vec![act(F1, Attack, 22, 30), act(F2, Parry, 26, 30), act(F2, Riposte, 30, 36)],
            Scorer::Fencer(F2),
            RefereeCall::R,
        );
        assert_eq!(
            compute_priority(&p).segments,
            vec![
                PrioritySegment { start_frame: 0, end_frame: 22, owner: None },
                PrioritySegment { start_frame: 22, end_frame: 26, owner: Some(F1) },
                PrioritySegment { start_frame: 26, end_frame: 36, owner: Some(F2) },
            ]
        );
    }

    #[test]
    fn counter_during_attack_does_not_transfer() {
        let p = phrase(
            vec![act(F1, Attack, 10, 30), act(F2, Counter, 15, 25), act(F2, Attack, 31, 40)],
            Scorer::Fencer(F2),
            RefereeCall::A,
        );
        let owners: Vec<_> = compute_priority(&p).segments.iter().map(|s| (s.start_frame, s.owner)).collect();
        assert_eq!(owners, vec![(0, None), (10, Some(F1)), (31, Some(F2))]);
    }

    #[test]
    fn mirror_swaps_annotations() {
        let p = phrase(
            vec![
                act(F1, Forward, 0, 10),
                act(F1, Forward, 10, 20),
                act(F1, Lunge, 20, 32),
                act(F1, Attack, 22, 30).with_position("head"),
                act(F2, Forward, 0, 18),
                act(F2, Backward, 18, 40),
            ],
            Scorer::Fencer(F1),
            RefereeCall::A,
        );
        let cfg = AbstractionConfig::default();
        let direct = abstract_phrase(&p, &cfg).unwrap();
        let swapped = abstract_phrase(&p.swap_fencers(), &cfg).unwrap();
        assert_eq!(swapped, direct.mirror());
        assert_eq!(swapped.kinds(), vec![K::S, K::FF, K::BF, K::Two]);
        assert_eq!(swapped.nodes[0].start_steps, Some([1, 2]));
    }

    #[test]
    fn invariant_checker_catches_bad_sequences() {
        let mk = |kinds: &[K]| TacticSequence {
            phrase_id: "x".into(),
            phrase_index: 1,
            nodes: kinds.iter().enumerate().map(|(i, &k)| TacticNode::new(k, i as Frame)).collect(),
        };
        assert!(mk(&[K::S, K::FF, K::One]).check_invariants().is_ok());
        assert_eq!(mk(&[K::FF, K::One]).check_invariants(), Err(SequenceViolation::FirstNotStart(K::FF)));
        assert_eq!(mk(&[K::S, K::FF]).check_invariants(), Err(SequenceViolation::LastNotTerminal(K::FF)));
        assert_eq!(mk(&[K::S, K::FF, K::FF, K::Eq]).check_invariants(), Err(SequenceViolation::Repeat(K::FF)));
        assert_eq!(mk(&[K::S, K::FF, K::BB, K::Eq]).check_invariants(), Err(SequenceViolation::MisplacedBB(2)));
    }
}
