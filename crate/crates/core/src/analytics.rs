//! Queries behind the bout, phrase list and piste views: result and time
//! filters, sort orders, the compressed bout timeline and per-phrase
//! animation tracks.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::abstraction::TacticSequence;
use crate::model::{ActionKind, Bout, Fencer, Frame, Phrase, Scorer, FRAMES_PER_SECOND, ON_GUARD_LINE};

/// Seconds inserted between consecutive phrases on the bout timeline.
pub const PHRASE_GAP_SECONDS: f64 = 1.0;
/// Nominal distance between the fencers when only the confrontation point
/// is recorded.
pub const ENGAGEMENT_DISTANCE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhraseFilter {
    pub results: Vec<Scorer>,
    pub max_duration: Option<Frame>,
}

impl Default for PhraseFilter {
    fn default() -> Self {
        PhraseFilter { results: vec![Scorer::Fencer(Fencer::One), Scorer::Fencer(Fencer::Two), Scorer::Nobody], max_duration: None }
    }
}

impl PhraseFilter {
    pub fn accepts(&self, phrase: &Phrase) -> bool {
        self.results.contains(&phrase.scorer) && self.max_duration.is_none_or(|m| phrase.duration <= m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub ids: Vec<String>,
    pub count: usize,
}

pub fn filter_phrases(bout: &Bout, filter: &PhraseFilter) -> FilterOutcome {
    let ids: Vec<String> = bout.phrases.iter().filter(|p| filter.accepts(p)).map(|p| p.id.clone()).collect();
    FilterOutcome { count: ids.len(), ids }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SortMode {
    Chronological,
    Duration,
    TacticSequence,
    Outcome,
}

impl std::str::FromStr for SortMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "chronological" => Ok(SortMode::Chronological),
            "duration" => Ok(SortMode::Duration),
            "tactic-sequence" => Ok(SortMode::TacticSequence),
            "outcome" => Ok(SortMode::Outcome),
            other => Err(format!("unknown sort mode {other:?}")),
        }
    }
}

fn outcome_rank(s: Scorer) -> u8 {
    match s {
        Scorer::Fencer(Fencer::One) => 0,
        Scorer::Fencer(Fencer::Two) => 1,
        Scorer::Nobody => 2,
    }
}

/// Phrase ids in the requested order. Every mode falls back to the phrase
/// index, so the result is a deterministic permutation.
pub fn sort_phrases(bout: &Bout, sequences: &[TacticSequence], mode: SortMode) -> Vec<String> {
    let by_id: HashMap<&str, &TacticSequence> = sequences.iter().map(|s| (s.phrase_id.as_str(), s)).collect();
    let mut phrases: Vec<&Phrase> = bout.phrases.iter().collect();
    match mode {
        SortMode::Chronological => phrases.sort_by_key(|p| p.index),
        SortMode::Duration => phrases.sort_by_key(|p| (std::cmp::Reverse(p.duration), p.index)),
        SortMode::TacticSequence => {
            phrases.sort_by_key(|p| (by_id.get(p.id.as_str()).map(|s| s.kinds()).unwrap_or_default(), p.index))
        }
        SortMode::Outcome => phrases.sort_by_key(|p| (outcome_rank(p.scorer), p.index)),
    }
    phrases.into_iter().map(|p| p.id.clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineSpan {
    pub phrase_id: String,
    pub index: usize,
    pub x_start: f64,
    pub x_end: f64,
    pub scorer: Scorer,
    pub score_after: (u8, u8),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoutTimeline {
    pub spans: Vec<TimelineSpan>,
    pub break_x: Option<f64>,
    pub total_span: f64,
}

/// Lays phrases end to end in seconds with a fixed gap between them, so
/// the idle time between phrases does not stretch the chart.
pub fn bout_timeline(bout: &Bout) -> BoutTimeline {
    let mut cursor = 0.0;
    let mut spans = Vec::with_capacity(bout.phrases.len());
    for (i, p) in bout.phrases.iter().enumerate() {
        if i > 0 {
            cursor += PHRASE_GAP_SECONDS;
        }
        let x_end = cursor + p.duration as f64 / FRAMES_PER_SECOND;
        spans.push(TimelineSpan {
            phrase_id: p.id.clone(),
            index: p.index,
            x_start: cursor,
            x_end,
            scorer: p.scorer,
            score_after: p.score_after,
        });
        cursor = x_end;
    }
    let break_x = bout
        .break_index
        .and_then(|b| spans.iter().find(|s| s.index == b))
        .map(|s| s.x_end + PHRASE_GAP_SECONDS / 2.0);
    BoutTimeline { spans, break_x, total_span: cursor }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pose {
    EnGarde,
    Lunge,
    Parry,
    Riposte,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    pub frame: Frame,
    /// Piste coordinate in meters.
    pub position: f64,
    pub pose: Pose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnimationTrack {
    pub phrase_id: String,
    pub duration: Frame,
    pub fencer1: Vec<Keyframe>,
    pub fencer2: Vec<Keyframe>,
    /// No confrontation samples were recorded; positions sit on the
    /// on-guard lines.
    pub missing_track: bool,
}

impl AnimationTrack {
    pub fn keyframes(&self, fencer: Fencer) -> &[Keyframe] {
        match fencer {
            Fencer::One => &self.fencer1,
            Fencer::Two => &self.fencer2,
        }
    }
}

/// Pose of a fencer at `frame`. Actions cover `[start, end)`; where they
/// overlap, riposte beats parry beats lunge.
pub fn pose_at(phrase: &Phrase, fencer: Fencer, frame: Frame) -> Pose {
    phrase
        .actions_of(fencer)
        .filter(|a| a.start_frame <= frame && frame < a.end_frame)
        .filter_map(|a| match a.kind {
            ActionKind::Riposte | ActionKind::Counter => Some(Pose::Riposte),
            ActionKind::Parry => Some(Pose::Parry),
            ActionKind::Lunge => Some(Pose::Lunge),
            _ => None,
        })
        .max()
        .unwrap_or(Pose::EnGarde)
}

/// Linear interpolation over the confrontation samples, held constant
/// outside the sampled range.
fn confrontation_at(track: &[(Frame, f64)], frame: Frame) -> f64 {
    let after = track.partition_point(|&(f, _)| f <= frame);
    match (after.checked_sub(1).map(|i| track[i]), track.get(after)) {
        (Some((f0, x0)), Some(&(f1, x1))) => x0 + (x1 - x0) * (frame - f0) as f64 / (f1 - f0) as f64,
        (Some((_, x)), None) | (None, Some(&(_, x))) => x,
        (None, None) => 0.0,
    }
}

pub fn animation_track(phrase: &Phrase) -> AnimationTrack {
    let mut track = phrase.confrontation_track.clone();
    track.sort_by_key(|s| s.0);
    track.dedup_by_key(|s| s.0);
    let missing_track = track.is_empty();

    let mut frames: Vec<Frame> = vec![0, phrase.duration];
    frames.extend(track.iter().map(|s| s.0).filter(|&f| f <= phrase.duration));
    for a in &phrase.actions {
        frames.extend([a.start_frame, a.end_frame].into_iter().filter(|&f| f <= phrase.duration));
    }
    frames.sort_unstable();
    frames.dedup();

    let keyframes = |fencer: Fencer| -> Vec<Keyframe> {
        let side = match fencer {
            Fencer::One => -1.0,
            Fencer::Two => 1.0,
        };
        let mut out: Vec<Keyframe> = Vec::new();
        for &frame in &frames {
            let position = if missing_track {
                side * ON_GUARD_LINE
            } else {
                confrontation_at(&track, frame) + side * ENGAGEMENT_DISTANCE / 2.0
            };
            let pose = pose_at(phrase, fencer, frame);
            let redundant = out.last().is_some_and(|k: &Keyframe| k.pose == pose && k.position == position);
            let sampled = track.iter().any(|s| s.0 == frame);
            if !redundant || sampled || frame == phrase.duration {
                out.push(Keyframe { frame, position, pose });
            }
        }
        out
    };
    AnimationTrack {
        phrase_id: phrase.id.clone(),
        duration: phrase.duration,
        fencer1: keyframes(Fencer::One),
        fencer2: keyframes(Fencer::Two),
        missing_track,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::TacticNode;
    use crate::model::{Action, Discipline, RefereeCall, TacticNodeKind};
    use proptest::prelude::*;

    fn phrase(index: usize, duration: Frame, scorer: Scorer) -> Phrase {
        Phrase {
            id: format!("P{index}"),
            index,
            actions: vec![],
            duration,
            result: if scorer == Scorer::Nobody { RefereeCall::N } else { RefereeCall::A },
            scorer,
            confrontation_track: vec![],
            score_after: (0, 0),
        }
    }

    fn bout(phrases: Vec<Phrase>, break_index: Option<usize>) -> Bout {
        Bout { id: "B".into(), fencer1_name: "a".into(), fencer2_name: "b".into(), discipline: Discipline::Sabre, phrases, break_index }
    }

    const ONE: Scorer = Scorer::Fencer(Fencer::One);
    const TWO: Scorer = Scorer::Fencer(Fencer::Two);

    #[test]
    fn filters_by_result_and_duration() {
        let b = bout(vec![phrase(1, 40, ONE), phrase(2, 50, ONE), phrase(3, 30, TWO), phrase(4, 45, ONE), phrase(5, 10, Scorer::Nobody)], None);
        assert_eq!(filter_phrases(&b, &PhraseFilter::default()).count, 5);
        let f = PhraseFilter { results: vec![ONE], max_duration: Some(45) };
        assert_eq!(filter_phrases(&b, &f), FilterOutcome { ids: vec!["P1".into(), "P4".into()], count: 2 });
        let none = PhraseFilter { results: vec![], max_duration: None };
        assert_eq!(filter_phrases(&b, &none).count, 0);
    }

    #[test]
    fn sort_orders() {
        let b = bout(vec![phrase(1, 90, TWO), phrase(2, 30, Scorer::Nobody), phrase(3, 60, ONE)], None);
        assert_eq!(sort_phrases(&b, &[], SortMode::Chronological), ["P1", "P2", "P3"]);
        assert_eq!(sort_phrases(&b, &[], SortMode::Duration), ["P1", "P3", "P2"]);
        assert_eq!(sort_phrases(&b, &[], SortMode::Outcome), ["P3", "P1", "P2"]);
    }

    #[test]
    fn tactic_sort_uses_kind_collation() {
        use TacticNodeKind::*;
        let b = bout(vec![phrase(1, 10, ONE), phrase(2, 10, TWO)], None);
        let mk = |i: usize, kinds: &[TacticNodeKind]| TacticSequence {
            phrase_id: format!("P{i}"),
            phrase_index: i,
            nodes: kinds.iter().map(|&k| TacticNode::new(k, 0)).collect(),
        };
        let seqs = [mk(1, &[S, FF, One]), mk(2, &[S, BB, BF, Two])];
        assert_eq!(sort_phrases(&b, &seqs, SortMode::TacticSequence), ["P2", "P1"]);
    }

    #[test]
    fn timeline_compresses_gaps() {
        let b = bout(vec![phrase(1, 90, ONE), phrase(2, 60, TWO)], Some(1));
        let t = bout_timeline(&b);
        assert_eq!((t.spans[0].x_start, t.spans[0].x_end), (0.0, 3.0));
        assert_eq!((t.spans[1].x_start, t.spans[1].x_end), (4.0, 6.0));
        assert_eq!(t.break_x, Some(3.5));
        assert_eq!(t.total_span, 6.0);
        let single = bout_timeline(&bout(vec![phrase(1, 30, ONE)], None));
        assert_eq!((single.spans[0].x_end, single.total_span, single.break_x), (1.0, 1.0, None));
    }

    fn poses(track: &[Keyframe]) -> Vec<Pose> {
        let mut out: Vec<Pose> = track.iter().map(|k| k.pose).collect();
        out.dedup();
        out
    }

    #[test]
    fn idle_fencer_stays_en_garde() {
        let mut p = phrase(1, 40, Scorer::Nobody);
        p.actions.push(Action::new(Fencer::One, ActionKind::Forward, 0, 20));
        let t = animation_track(&p);
        assert_eq!(poses(&t.fencer1), [Pose::EnGarde]);
        assert!(t.missing_track);
        assert!(t.fencer1.iter().all(|k| k.position == -2.0));
        assert!(t.fencer2.iter().all(|k| k.position == 2.0));
    }

    #[test]
    fn lunge_outranks_attack() {
        let mut p = phrase(1, 40, ONE);
        p.actions.push(Action::new(Fencer::One, ActionKind::Lunge, 20, 30));
        p.actions.push(Action::new(Fencer::One, ActionKind::Attack, 22, 28));
        for f in 20..30 {
            assert_eq!(pose_at(&p, Fencer::One, f), Pose::Lunge);
        }
        assert_eq!(pose_at(&p, Fencer::One, 30), Pose::EnGarde);
    }

    #[test]
    fn parry_then_riposte() {
        let mut p = phrase(1, 40, TWO);
        p.actions.push(Action::new(Fencer::Two, ActionKind::Parry, 26, 30));
        p.actions.push(Action::new(Fencer::Two, ActionKind::Riposte, 30, 36));
        let t = animation_track(&p);
        assert_eq!(poses(&t.fencer2), [Pose::EnGarde, Pose::Parry, Pose::Riposte, Pose::EnGarde]);
    }

    #[test]
    fn positions_follow_confrontation() {
        let mut p = phrase(1, 20, ONE);
        p.confrontation_track = vec![(0, 0.0), (10, 1.0), (20, -1.0)];
        p.actions.push(Action::new(Fencer::One, ActionKind::Lunge, 5, 15));
        let t = animation_track(&p);
        assert!(!t.missing_track);
        let at = |f| t.fencer1.iter().find(|k| k.frame == f).unwrap().position;
        assert_eq!(at(5), 0.0);
        assert_eq!(at(10), 0.5);
        assert_eq!(at(15), -0.5);
        assert_eq!(t.fencer2.iter().find(|k| k.frame == 10).unwrap().position, 1.5);
    }

    proptest! {
        #[test]
        fn timeline_gaps_are_exact(durations in proptest::collection::vec(0u32..400, 1..30)) {
            let b = bout(durations.iter().enumerate().map(|(i, &d)| phrase(i + 1, d, ONE)).collect(), None);
            let t = bout_timeline(&b);
            for w in t.spans.windows(2) {
                prop_assert!((w[1].x_start - w[0].x_end - PHRASE_GAP_SECONDS).abs() < 1e-9);
                prop_assert!(w[1].x_start > w[0].x_start);
            }
        }

        #[test]
        fn filter_is_monotone_in_threshold(
            durations in proptest::collection::vec((0u32..200, 0u8..3), 0..30),
            a in 0u32..200,
            b in 0u32..200,
        ) {
            let phrases = durations.iter().enumerate().map(|(i, &(d, s))| phrase(i + 1, d, Scorer::try_from(s).unwrap())).collect();
            let bt = bout(phrases, None);
            let (lo, hi) = (a.min(b), a.max(b));
            let tight = filter_phrases(&bt, &PhraseFilter { max_duration: Some(lo), ..Default::default() });
            let loose = filter_phrases(&bt, &PhraseFilter { max_duration: Some(hi), ..Default::default() });
            prop_assert!(tight.ids.iter().all(|id| loose.ids.contains(id)));
            let mut idx: Vec<usize> = tight.ids.iter().map(|id| id[1..].parse().unwrap()).collect();
            let sorted = { let mut s = idx.clone(); s.sort(); s };
            prop_assert_eq!(std::mem::take(&mut idx), sorted);
        }

        #[test]
        fn sorts_are_permutations(durations in proptest::collection::vec((0u32..200, 0u8..3), 0..30)) {
            let phrases = durations.iter().enumerate().map(|(i, &(d, s))| phrase(i + 1, d, Scorer::try_from(s).unwrap())).collect();
            let bt = bout(phrases, None);
            let mut all: Vec<String> = bt.phrases.iter().map(|p| p.id.clone()).collect();
            all.sort();
            for mode in [SortMode::Chronological, SortMode::Duration, SortMode::TacticSequence, SortMode::Outcome] {
                let mut got = sort_phrases(&bt, &[], mode);
                got.sort();
                prop_assert_eq!(&got, &all);
            }
        }

        #[test]
        fn keyframes_strictly_increase(
            spans in proptest::collection::vec((0u32..60, 0u32..30, 0usize..7, any::<bool>()), 0..12),
        ) {
            let mut p = phrase(1, 80, ONE);
            let kinds = [ActionKind::Forward, ActionKind::Backward, ActionKind::Lunge, ActionKind::Attack, ActionKind::Parry, ActionKind::Riposte, ActionKind::Counter];
            for (s, len, k, who) in spans {
                let f = if who { Fencer::One } else { Fencer::Two };
                p.actions.push(Action::new(f, kinds[k], s, s + len));
            }
            let t = animation_track(&p);
            for k in [&t.fencer1, &t.fencer2] {
                prop_assert!(k.windows(2).all(|w| w[0].frame < w[1].frame));
                for kf in k.iter() {
                    prop_assert_eq!(kf.pose, pose_at(&p, if std::ptr::eq(k, &t.fencer1) { Fencer::One } else { Fencer::Two }, kf.frame));
                }
            }
        }
    }
}
