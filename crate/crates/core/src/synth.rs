//! Seeded synthetic bouts with known tactic sequences.
//!
//! A [`TacticProfile`] gives transition probabilities over the tactic graph
//! plus step, target and timing distributions. Each phrase is a random walk
//! from S to a terminal, realized as footwork and bladework whose timings
//! keep clear of the abstraction thresholds, so abstracting the generated
//! frames gives back the walk.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{AbstractionConfig, AttackPair, TacticNode, TacticSequence};
use crate::model::{
    Action, ActionKind, EventCode, Fencer, Frame, FrameEvent, Position, RefereeCall, Scorer, TacticNodeKind,
    ON_GUARD_LINE, PISTE_HALF_LENGTH, WINNING_SCORE,
};

/// Shortest step, in frames from begin to end.
pub const MIN_STEP_FRAMES: Frame = 8;
/// Shortest stay in a tactic state.
pub const MIN_DWELL_FRAMES: Frame = 20;
/// Margin kept between a generated timing and the threshold it must clear.
pub const THRESHOLD_MARGIN: Frame = 5;
const MAX_PHRASES_PER_BOUT: usize = 2_000;
const STEP_METERS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    pub mean: Frame,
    #[serde(default)]
    pub jitter: Frame,
}

impl Timing {
    pub const fn new(mean: Frame, jitter: Frame) -> Self {
        Timing { mean, jitter }
    }

    fn sample(&self, rng: &mut impl Rng, floor: Frame) -> Frame {
        let lo = self.mean.saturating_sub(self.jitter);
        rng.gen_range(lo..=self.mean + self.jitter).max(floor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Durations {
    pub step: Timing,
    /// Time spent in each intermediate tactic state.
    pub dwell: Timing,
    pub lunge: Timing,
    /// Length of attacks, parries and ripostes.
    pub blade: Timing,
    /// Standstill used for the paused variant of a joint retreat.
    pub pause: Timing,
}

impl Default for Durations {
    fn default() -> Self {
        Durations {
            step: Timing::new(12, 3),
            dwell: Timing::new(30, 8),
            lunge: Timing::new(12, 2),
            blade: Timing::new(8, 2),
            pause: Timing::new(20, 3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TacticProfile {
    pub seed: u64,
    /// Outgoing probabilities per node.
    pub transitions: BTreeMap<TacticNodeKind, BTreeMap<TacticNodeKind, f64>>,
    /// Opening forward steps, keyed 1 or 2.
    pub steps: BTreeMap<u8, f64>,
    pub attack_positions: BTreeMap<String, f64>,
    #[serde(default)]
    pub durations: Durations,
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("target score must be between 1 and {WINNING_SCORE}, got {0}")]
    TargetScore(u8),
    #[error("no fencer reached the target score within {MAX_PHRASES_PER_BOUT} phrases")]
    Stalled,
    #[error("cannot read profile: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse profile: {0}")]
    Json(#[from] serde_json::Error),
}

impl TacticProfile {
    /// Every legal edge equally likely, steps and targets uniform.
    pub fn uniform(seed: u64) -> Self {
        let mut transitions: BTreeMap<TacticNodeKind, BTreeMap<TacticNodeKind, f64>> = BTreeMap::new();
        for (from, to) in TacticNodeKind::legal_edges() {
            transitions.entry(from).or_default().insert(to, 1.0);
        }
        for out in transitions.values_mut() {
            let n = out.len() as f64;
            out.values_mut().for_each(|p| *p /= n);
        }
        TacticProfile {
            seed,
            transitions,
            steps: BTreeMap::from([(1, 0.5), (2, 0.5)]),
            attack_positions: Position::SABRE_DEFAULTS.iter().map(|p| (p.to_string(), 0.25)).collect(),
            durations: Durations::default(),
        }
    }

    /// Every legal edge carries mass, with weights drawn from `seed`.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d);
        let mut p = TacticProfile::uniform(seed);
        for out in p.transitions.values_mut() {
            out.values_mut().for_each(|w| *w = rng.gen_range(0.05..1.0));
            let total: f64 = out.values().sum();
            out.values_mut().for_each(|w| *w /= total);
        }
        let one = rng.gen_range(0.1..0.9);
        p.steps = BTreeMap::from([(1, one), (2, 1.0 - one)]);
        let weights: Vec<f64> = (0..p.attack_positions.len()).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        p.attack_positions.values_mut().zip(weights).for_each(|(v, w)| *v = w / total);
        p
    }

    /// Profile whose walks are all `path` (which must start at S and end at
    /// a terminal).
    pub fn single_path(seed: u64, path: &[TacticNodeKind]) -> Self {
        let mut p = TacticProfile::uniform(seed);
        p.transitions = path.windows(2).map(|w| (w[0], BTreeMap::from([(w[1], 1.0)]))).collect();
        p
    }

    pub fn from_json_file(path: &Path) -> Result<Self, SynthError> {
        let profile: TacticProfile = serde_json::from_str(&fs::read_to_string(path)?)?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidProfile(m));
        for (from, out) in &self.transitions {
            for (to, &p) in out {
                if !p.is_finite() || p < 0.0 {
                    return bad(format!("{from} -> {to}: probability {p}"));
                }
                if p > 0.0 && !from.can_flow_to(*to) {
                    return bad(format!("mass on illegal edge {from} -> {to}"));
                }
            }
        }
        let mut reachable = vec![TacticNodeKind::S];
        let mut i = 0;
        while i < reachable.len() {
            let k = reachable[i];
            i += 1;
            if k.is_terminal() {
                continue;
            }
            let out = self.transitions.get(&k);
            let total: f64 = out.map_or(0.0, |o| o.values().sum());
            if (total - 1.0).abs() > 1e-6 {
                return bad(format!("outgoing probabilities of {k} sum to {total}"));
            }
            for (to, _) in out.into_iter().flatten().filter(|(_, p)| **p > 0.0) {
                if !reachable.contains(to) {
                    reachable.push(*to);
                }
            }
        }
        if !reachable.iter().any(|k| matches!(k, TacticNodeKind::One | TacticNodeKind::Two)) {
            return bad("no scoring terminal is reachable from S".into());
        }
        let steps: f64 = self.steps.values().sum();
        if self.steps.keys().any(|k| !(1..=2).contains(k)) || self.steps.values().any(|p| !p.is_finite() || *p < 0.0) {
            return bad("step counts must be 1 or 2 with non-negative probabilities".into());
        }
        if (steps - 1.0).abs() > 1e-6 {
            return bad(format!("step probabilities sum to {steps}"));
        }
        if let Some(t) = self.attack_positions.keys().find(|t| Position::new(t).is_none()) {
            return bad(format!("invalid attack position {t:?}"));
        }
        let targets: f64 = self.attack_positions.values().sum();
        if self.attack_positions.values().any(|p| !p.is_finite() || *p < 0.0) || (targets - 1.0).abs() > 1e-6 {
            return bad(format!("attack position probabilities sum to {targets}"));
        }
        let d = &self.durations;
        if [d.step, d.dwell, d.lunge, d.blade, d.pause].iter().any(|t| t.mean == 0) {
            return bad("durations must have a positive mean".into());
        }
        Ok(())
    }
}

/// One generated bout: its frame rows and the walk behind every phrase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthBout {
    pub bout_id: String,
    pub events: Vec<FrameEvent>,
    pub truth: Vec<TacticSequence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthCorpus {
    pub bouts: Vec<SynthBout>,
}

impl SynthCorpus {
    pub fn events(&self) -> Vec<FrameEvent> {
        self.bouts.iter().flat_map(|b| b.events.iter().cloned()).collect()
    }

    pub fn truth(&self) -> Vec<TacticSequence> {
        self.bouts.iter().flat_map(|b| b.truth.iter().cloned()).collect()
    }

    pub fn phrase_count(&self) -> usize {
        self.bouts.iter().map(|b| b.truth.len()).sum()
    }
}

/// Whether an abstracted sequence matches the generating walk: node kinds,
/// entry frames, opening steps and FF attack pairs. Right of way is not
/// part of the walk and is ignored.
pub fn matches_truth(truth: &TacticSequence, got: &TacticSequence) -> bool {
    truth.nodes.len() == got.nodes.len()
        && truth.nodes.iter().zip(&got.nodes).all(|(a, b)| {
            a.kind == b.kind && a.enter_frame == b.enter_frame && a.start_steps == b.start_steps && a.ff_attacks == b.ff_attacks
        })
}

pub fn generate_bout(profile: &TacticProfile, target_score: u8) -> Result<SynthBout, SynthError> {
    generate_bout_with(profile, target_score, &AbstractionConfig::default())
}

/// Generates phrases until one fencer reaches `target_score`. Timings are
/// chosen to stay clear of the thresholds in `config`.
pub fn generate_bout_with(profile: &TacticProfile, target_score: u8, config: &AbstractionConfig) -> Result<SynthBout, SynthError> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    bout_from_rng(profile, target_score, config, &mut rng, format!("synth-{}", profile.seed))
}

/// Bouts from one random stream until at least `min_phrases` phrases exist.
pub fn generate_corpus(
    profile: &TacticProfile,
    target_score: u8,
    min_phrases: usize,
    config: &AbstractionConfig,
) -> Result<SynthCorpus, SynthError> {
    corpus_until(profile, target_score, config, |bouts, phrases| phrases >= min_phrases && bouts > 0)
}

/// `count` bouts from one random stream.
pub fn generate_bouts(
    profile: &TacticProfile,
    target_score: u8,
    count: usize,
    config: &AbstractionConfig,
) -> Result<SynthCorpus, SynthError> {
    corpus_until(profile, target_score, config, |bouts, _| bouts >= count)
}

fn corpus_until(
    profile: &TacticProfile,
    target_score: u8,
    config: &AbstractionConfig,
    done: impl Fn(usize, usize) -> bool,
) -> Result<SynthCorpus, SynthError> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let mut bouts = Vec::new();
    let mut phrases = 0;
    while !done(bouts.len(), phrases) {
        let id = format!("synth-{}-{}", profile.seed, bouts.len() + 1);
        let bout = bout_from_rng(profile, target_score, config, &mut rng, id)?;
        phrases += bout.truth.len();
        bouts.push(bout);
    }
    Ok(SynthCorpus { bouts })
}

fn bout_from_rng(
    profile: &TacticProfile,
    target_score: u8,
    config: &AbstractionConfig,
    rng: &mut ChaCha8Rng,
    bout_id: String,
) -> Result<SynthBout, SynthError> {
    if target_score == 0 || target_score > WINNING_SCORE {
        return Err(SynthError::TargetScore(target_score));
    }
    let generator = Generator::new(profile, config);
    let mut events = Vec::new();
    let mut truth = Vec::new();
    let mut score = [0u8; 2];
    for index in 1..=MAX_PHRASES_PER_BOUT {
        let phrase_id = format!("p{index:03}");
        let walk = generator.walk(rng);
        let plan = generator.realize(&walk, rng);
        if let Some(f) = plan.scorer.fencer() {
            score[f.index()] += 1;
        }
        events.extend(phrase_events(&bout_id, &phrase_id, &plan.actions, plan.call, plan.scorer, &plan.track));
        truth.push(TacticSequence { phrase_id, phrase_index: index, nodes: plan.truth });
        if score.iter().any(|&s| s >= target_score) {
            return Ok(SynthBout { bout_id, events, truth });
        }
    }
    Err(SynthError::Stalled)
}

struct Generator<'a> {
    profile: &'a TacticProfile,
    min_dwell: Frame,
    min_pause: Frame,
    steps: (Vec<u8>, WeightedIndex<f64>),
    targets: (Vec<String>, WeightedIndex<f64>),
}

struct PhrasePlan {
    actions: Vec<Action>,
    call: RefereeCall,
    scorer: Scorer,
    /// Piste positions of (fencer 1, fencer 2) at chunk boundaries.
    track: Vec<(Frame, f64)>,
    truth: Vec<TacticNode>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Move {
    Forward,
    Backward,
    Still,
}

fn pair_of(kind: TacticNodeKind) -> [Move; 2] {
    match kind {
        TacticNodeKind::FF => [Move::Forward, Move::Forward],
        TacticNodeKind::FB => [Move::Forward, Move::Backward],
        TacticNodeKind::BF => [Move::Backward, Move::Forward],
        TacticNodeKind::BB => [Move::Backward, Move::Backward],
        _ => [Move::Still, Move::Still],
    }
}

/// What each fencer does during one stretch of the phrase.
struct Segment {
    start: Frame,
    moves: [Move; 2],
    /// Steps per fencer, before any lunge.
    steps: [u8; 2],
}

enum Strike {
    /// Scorer lunges and attacks; the opponent may attack at the same time.
    Lunge { scorer: Fencer, opponent_attacks: bool },
    /// Opponent attacks, scorer parries and ripostes.
    ParryRiposte { scorer: Fencer },
    Simultaneous,
    Nothing,
}

impl<'a> Generator<'a> {
    fn new(profile: &'a TacticProfile, config: &AbstractionConfig) -> Self {
        let weighted = |m: Vec<(String, f64)>| {
            let (keys, w): (Vec<String>, Vec<f64>) = m.into_iter().unzip();
            (keys, WeightedIndex::new(w).expect("validated weights"))
        };
        let (step_keys, step_w): (Vec<u8>, Vec<f64>) = profile.steps.iter().map(|(k, p)| (*k, *p)).unzip();
        Generator {
            profile,
            min_dwell: MIN_DWELL_FRAMES.max(config.bb_joint_window_frames + THRESHOLD_MARGIN),
            min_pause: config.pause_threshold_frames + 1 + THRESHOLD_MARGIN,
            steps: (step_keys, WeightedIndex::new(step_w).expect("validated weights")),
            targets: weighted(profile.attack_positions.iter().map(|(k, p)| (k.clone(), *p)).collect()),
        }
    }

    /// Random walk from S without revisiting a kind. If every remaining
    /// option was already visited the walk ends on a uniformly chosen
    /// terminal.
    fn walk(&self, rng: &mut ChaCha8Rng) -> Vec<TacticNodeKind> {
        let mut walk = vec![TacticNodeKind::S];
        loop {
            let here = *walk.last().unwrap();
            let options: Vec<(TacticNodeKind, f64)> = self
                .profile
                .transitions
                .get(&here)
                .into_iter()
                .flatten()
                .filter(|(k, p)| **p > 0.0 && !walk.contains(k))
                .map(|(k, p)| (*k, *p))
                .collect();
            let next = if options.is_empty() {
                [TacticNodeKind::One, TacticNodeKind::Two, TacticNodeKind::Eq][rng.gen_range(0..3)]
            } else {
                let idx = WeightedIndex::new(options.iter().map(|o| o.1)).expect("positive weights");
                options[idx.sample(rng)].0
            };
            walk.push(next);
            if next.is_terminal() {
                return walk;
            }
        }
    }

    fn step_count(&self, rng: &mut ChaCha8Rng) -> u8 {
        self.steps.0[self.steps.1.sample(rng)]
    }

    fn target(&self, rng: &mut ChaCha8Rng) -> Position {
        Position::new(&self.targets.0[self.targets.1.sample(rng)]).expect("validated target")
    }

    fn realize(&self, walk: &[TacticNodeKind], rng: &mut ChaCha8Rng) -> PhrasePlan {
        let d = &self.profile.durations;
        let terminal = *walk.last().unwrap();
        let middle = &walk[1..walk.len() - 1];
        let opening = [self.step_count(rng), self.step_count(rng)];

        let mut truth = vec![TacticNode::new(TacticNodeKind::S, 0)];
        let mut segments: Vec<Segment> = Vec::new();
        let mut start_steps = [0u8; 2];
        let mut cursor: Frame = 0;

        let rest = if middle.first() == Some(&TacticNodeKind::BB) {
            start_steps = opening;
            cursor += self.segment_len(rng, &opening);
            segments.push(Segment { start: 0, moves: [Move::Forward; 2], steps: opening });
            if middle.get(1) == Some(&TacticNodeKind::FF) && rng.gen_bool(0.5) {
                // Both stop after the last step, which ends one frame before
                // `cursor`, and stand still longer than the pause threshold.
                truth.push(TacticNode::new(TacticNodeKind::BB, cursor - 1));
                segments.push(Segment { start: cursor, moves: [Move::Still; 2], steps: [0, 0] });
                cursor += d.pause.sample(rng, self.min_pause) - 1;
            } else {
                truth.push(TacticNode::new(TacticNodeKind::BB, cursor));
                let steps = [rng.gen_range(1..=2), rng.gen_range(1..=2)];
                segments.push(Segment { start: cursor, moves: [Move::Backward; 2], steps });
                if middle.len() > 1 {
                    cursor += self.segment_len(rng, &steps);
                }
            }
            &middle[1..]
        } else {
            middle
        };

        for (i, &kind) in rest.iter().enumerate() {
            let moves = pair_of(kind);
            let first = segments.is_empty();
            let steps: [u8; 2] =
                std::array::from_fn(|f| if first && moves[f] == Move::Forward { opening[f] } else { rng.gen_range(1..=2) });
            if first {
                start_steps = std::array::from_fn(|f| if moves[f] == Move::Forward { steps[f] } else { 0 });
            }
            truth.push(TacticNode::new(kind, cursor));
            segments.push(Segment { start: cursor, moves, steps });
            if i + 1 < rest.len() {
                cursor += self.segment_len(rng, &steps);
            }
        }

        let scorer_of = |k: TacticNodeKind| match k {
            TacticNodeKind::One => Some(Fencer::One),
            TacticNodeKind::Two => Some(Fencer::Two),
            _ => None,
        };
        if segments.is_empty() {
            // Straight to the hit: one fencer steps in alone.
            let stepper = scorer_of(terminal).unwrap_or(if rng.gen_bool(0.5) { Fencer::One } else { Fencer::Two });
            let mut moves = [Move::Still; 2];
            moves[stepper.index()] = Move::Forward;
            let mut steps = [0u8; 2];
            steps[stepper.index()] = opening[stepper.index()];
            start_steps = steps;
            segments.push(Segment { start: 0, moves, steps });
        }
        let last = segments.last_mut().unwrap();
        let strike = match scorer_of(terminal) {
            Some(f) if last.moves[f.index()] == Move::Forward => Strike::Lunge {
                scorer: f,
                opponent_attacks: last.moves[f.opponent().index()] != Move::Still && rng.gen_bool(0.3),
            },
            Some(f) => Strike::ParryRiposte { scorer: f },
            None if rng.gen_bool(0.5) => Strike::Simultaneous,
            None => Strike::Nothing,
        };

        let blade = d.blade.sample(rng, 6);
        let lunge = d.lunge.sample(rng, MIN_STEP_FRAMES);
        let (mut need, lunger) = match strike {
            Strike::Lunge { scorer, .. } => (0, Some(scorer)),
            Strike::ParryRiposte { .. } => (3 * blade + 1, None),
            Strike::Simultaneous => (blade + 1, None),
            Strike::Nothing => (0, None),
        };
        for f in Fencer::BOTH {
            if last.moves[f.index()] != Move::Still {
                let extra = if lunger == Some(f) { lunge + 1 } else { 0 };
                need = need.max(u32::from(last.steps[f.index()]) * (MIN_STEP_FRAMES + 1) + extra);
            }
        }
        let end = last.start + d.dwell.sample(rng, self.min_dwell).max(need) - 1;

        let mut actions = Vec::new();
        for (si, seg) in segments.iter().enumerate() {
            let is_last = si + 1 == segments.len();
            let seg_end = if is_last { end } else { segments[si + 1].start - 1 };
            for f in Fencer::BOTH {
                let kind = match seg.moves[f.index()] {
                    Move::Forward => ActionKind::Forward,
                    Move::Backward => ActionKind::Backward,
                    Move::Still => continue,
                };
                let lunging = is_last && lunger == Some(f);
                let step_end = if lunging { seg_end - lunge - 1 } else { seg_end };
                let mut at = seg.start;
                for size in split(step_end + 1 - seg.start, seg.steps[f.index()] as usize, rng) {
                    actions.push(Action::new(f, kind, at, at + size - 1));
                    at += size;
                }
                if lunging {
                    actions.push(Action::new(f, ActionKind::Lunge, end - lunge, end));
                }
            }
        }

        let mut ff_pairs = Vec::new();
        let (call, scorer) = match strike {
            Strike::Lunge { scorer, opponent_attacks } => {
                let s = end - lunge;
                let p = self.target(rng);
                actions.push(Action { position: Some(p.clone()), ..Action::new(scorer, ActionKind::Attack, s, end) });
                let mut pair = [Some(p), None];
                if opponent_attacks {
                    let q = self.target(rng);
                    actions.push(Action { position: Some(q.clone()), ..Action::new(scorer.opponent(), ActionKind::Attack, s + 1, end - 1) });
                    pair[1] = Some(q);
                }
                if scorer == Fencer::Two {
                    pair.swap(0, 1);
                }
                let [fencer1, fencer2] = pair;
                ff_pairs.push(AttackPair { frame: s, fencer1, fencer2 });
                (RefereeCall::A, Scorer::Fencer(scorer))
            }
            Strike::ParryRiposte { scorer } => {
                let o = scorer.opponent();
                let target = self.target(rng);
                actions.push(Action { position: Some(target), ..Action::new(o, ActionKind::Attack, end - 3 * blade, end - 2 * blade + 2) });
                let guard = self.target(rng);
                actions.push(Action { position: Some(guard), ..Action::new(scorer, ActionKind::Parry, end - 2 * blade, end - blade) });
                actions.push(Action::new(scorer, ActionKind::Riposte, end - blade + 1, end));
                (RefereeCall::R, Scorer::Fencer(scorer))
            }
            Strike::Simultaneous => {
                let (p, q) = (self.target(rng), self.target(rng));
                actions.push(Action { position: Some(p.clone()), ..Action::new(Fencer::One, ActionKind::Attack, end - blade, end) });
                actions.push(Action { position: Some(q.clone()), ..Action::new(Fencer::Two, ActionKind::Attack, end - blade, end) });
                ff_pairs.push(AttackPair { frame: end - blade, fencer1: Some(p), fencer2: Some(q) });
                (RefereeCall::S, Scorer::Nobody)
            }
            Strike::Nothing => (RefereeCall::N, Scorer::Nobody),
        };

        if rest.last() == Some(&TacticNodeKind::FF) {
            truth.last_mut().unwrap().ff_attacks = Some(ff_pairs);
        }
        truth[0].start_steps = Some(start_steps);
        truth.push(TacticNode::new(terminal, end));

        actions.sort_by_key(|a| (a.fencer, a.start_frame, a.kind, a.end_frame));
        let track = confrontation_track(&actions);
        PhrasePlan { actions, call, scorer, track, truth }
    }

    /// Length of a non-final segment: the sampled dwell, stretched to fit
    /// every fencer's steps.
    fn segment_len(&self, rng: &mut ChaCha8Rng, steps: &[u8; 2]) -> Frame {
        let need = steps.iter().map(|&s| u32::from(s) * (MIN_STEP_FRAMES + 1)).max().unwrap_or(0);
        self.profile.durations.dwell.sample(rng, self.min_dwell).max(need)
    }
}

/// Splits `total` frames into `n` consecutive chunks of at least
/// `MIN_STEP_FRAMES + 1` frames each.
fn split(total: Frame, n: usize, rng: &mut ChaCha8Rng) -> Vec<Frame> {
    if n == 0 {
        return vec![];
    }
    let min = MIN_STEP_FRAMES + 1;
    let mut sizes = vec![min; n];
    let mut spare = total - min * n as Frame;
    for i in 0..n - 1 {
        let share = rng.gen_range(0..=spare);
        sizes[i] += share;
        spare -= share;
    }
    sizes[n - 1] += spare;
    sizes
}

/// Midpoint between the fencers, each starting on their on-guard line and
/// moving half a meter per step (a meter per lunge), sampled at every
/// footwork boundary.
fn confrontation_track(actions: &[Action]) -> Vec<(Frame, f64)> {
    let mut frames: Vec<Frame> = actions.iter().filter(|a| a.kind.is_footwork()).flat_map(|a| [a.start_frame, a.end_frame]).collect();
    frames.push(0);
    frames.sort_unstable();
    frames.dedup();
    let position = |f: Fencer, t: Frame| {
        let toward = if f == Fencer::One { 1.0 } else { -1.0 };
        let mut x = -toward * ON_GUARD_LINE;
        for a in actions.iter().filter(|a| a.fencer == f && a.kind.is_footwork() && a.start_frame < t) {
            let dist = match a.kind {
                ActionKind::Forward => STEP_METERS,
                ActionKind::Backward => -STEP_METERS,
                _ => 2.0 * STEP_METERS,
            };
            let span = (a.end_frame - a.start_frame).max(1) as f64;
            let done = ((t - a.start_frame) as f64 / span).min(1.0);
            x += toward * dist * done;
        }
        x
    };
    let limit = PISTE_HALF_LENGTH - 0.5;
    frames
        .into_iter()
        .map(|t| {
            let mid = (position(Fencer::One, t) + position(Fencer::Two, t)) / 2.0;
            (t, (mid.clamp(-limit, limit) * 100.0).round() / 100.0)
        })
        .collect()
}

/// Encodes one phrase's actions as frame rows: begin and end codes, attack
/// and parry targets on the begin rows, confrontation samples on the first
/// row of their frame, and the outcome on the final row.
pub fn phrase_events(
    bout_id: &str,
    phrase_id: &str,
    actions: &[Action],
    call: RefereeCall,
    scorer: Scorer,
    track: &[(Frame, f64)],
) -> Vec<FrameEvent> {
    #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    enum Col {
        Foot,
        Blade,
    }
    struct Mark<'a> {
        frame: Frame,
        fencer: Fencer,
        col: Col,
        code: EventCode,
        action: &'a Action,
        begin: bool,
    }
    let mut marks: Vec<Mark> = Vec::new();
    for a in actions {
        let col = if a.kind.is_footwork() { Col::Foot } else { Col::Blade };
        marks.push(Mark { frame: a.start_frame, fencer: a.fencer, col, code: EventCode::begin(a.kind), action: a, begin: true });
        marks.push(Mark { frame: a.end_frame, fencer: a.fencer, col, code: EventCode::end(a.kind), action: a, begin: false });
    }
    marks.sort_by_key(|m| (m.frame, !m.begin, m.fencer, m.col));

    let mut rows: Vec<FrameEvent> = Vec::new();
    let mut frame_start = 0;
    for m in marks {
        if rows.last().is_none_or(|r| r.frame != m.frame) {
            frame_start = rows.len();
            rows.push(FrameEvent::new(bout_id, phrase_id, m.frame));
        }
        let free = |r: &FrameEvent| match m.col {
            Col::Foot => r.footwork(m.fencer).is_none(),
            Col::Blade => r.bladework(m.fencer).is_none(),
        };
        let idx = match rows[frame_start..].iter().position(free) {
            Some(i) => frame_start + i,
            None => {
                rows.push(FrameEvent::new(bout_id, phrase_id, m.frame));
                rows.len() - 1
            }
        };
        let row = &mut rows[idx];
        let one = m.fencer == Fencer::One;
        match (m.col, one) {
            (Col::Foot, true) => row.footwork1 = Some(m.code),
            (Col::Foot, false) => row.footwork2 = Some(m.code),
            (Col::Blade, true) => row.bladework1 = Some(m.code),
            (Col::Blade, false) => row.bladework2 = Some(m.code),
        }
        if m.begin {
            let pos = m.action.position.clone();
            match (m.action.kind, one) {
                (ActionKind::Attack, true) => row.attack1 = pos,
                (ActionKind::Attack, false) => row.attack2 = pos,
                (ActionKind::Parry, true) => row.parry1 = pos,
                (ActionKind::Parry, false) => row.parry2 = pos,
                _ => {}
            }
        }
    }
    for &(frame, x) in track {
        if let Some(r) = rows.iter_mut().find(|r| r.frame == frame) {
            r.confrontation = Some(x);
        }
    }
    if rows.is_empty() {
        rows.push(FrameEvent::new(bout_id, phrase_id, 0));
    }
    let last = rows.last_mut().unwrap();
    last.result = Some(call);
    last.score = Some(scorer);
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::abstract_bout;
    use crate::ingest::{build_bout, validate_events, write_csv};
    use TacticNodeKind::*;

    fn recover(bout: &SynthBout) -> Vec<TacticSequence> {
        let b = build_bout(&bout.events).unwrap();
        abstract_bout(&b, &AbstractionConfig::default()).unwrap()
    }

    #[test]
    fn same_seed_same_bytes() {
        let p = TacticProfile::uniform(1);
        let csv = |b: &SynthBout| {
            let mut out = Vec::new();
            write_csv(&b.events, &mut out).unwrap();
            out
        };
        let a = generate_bout(&p, 15).unwrap();
        let b = generate_bout(&p, 15).unwrap();
        assert_eq!(csv(&a), csv(&b));
        let c = generate_bout(&TacticProfile::uniform(2), 15).unwrap();
        assert_ne!(csv(&a), csv(&c));
    }

    #[test]
    fn degenerate_profile_gives_one_path() {
        let p = TacticProfile::single_path(7, &[S, FF, One]);
        let bout = generate_bout(&p, 15).unwrap();
        assert_eq!(bout.truth.len(), 15);
        assert!(bout.truth.iter().all(|s| s.kinds() == [S, FF, One]));
        let got = recover(&bout);
        for (t, g) in bout.truth.iter().zip(&got) {
            assert!(matches_truth(t, g), "{t:#?}\n{g:#?}");
        }
    }

    #[test]
    fn uniform_profile_is_recovered() {
        for seed in 0..20 {
            let bout = generate_bout(&TacticProfile::uniform(seed), 15).unwrap();
            let report = validate_events(&bout.events);
            assert!(report.errors.is_empty() && report.warnings.is_empty(), "{report:?}");
            let got = recover(&bout);
            for (t, g) in bout.truth.iter().zip(&got) {
                assert!(matches_truth(t, g), "seed {seed}\ntruth {t:#?}\ngot {g:#?}");
            }
        }
    }

    #[test]
    fn rejects_mass_on_illegal_edges() {
        let mut p = TacticProfile::uniform(1);
        p.transitions.get_mut(&FF).unwrap().insert(BB, 0.1);
        assert!(matches!(p.validate(), Err(SynthError::InvalidProfile(_))));
        let mut p = TacticProfile::uniform(1);
        p.transitions.get_mut(&S).unwrap().insert(FF, 0.9);
        assert!(matches!(p.validate(), Err(SynthError::InvalidProfile(_))));
        let p = TacticProfile::single_path(1, &[S, FF, Eq]);
        assert!(matches!(p.validate(), Err(SynthError::InvalidProfile(_))));
    }

    #[test]
    fn profile_json_round_trip() {
        let p = TacticProfile::uniform(9);
        let text = serde_json::to_string_pretty(&p).unwrap();
        assert!(text.contains("\"=\""));
        let back: TacticProfile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn corpus_reaches_phrase_count() {
        let c = generate_corpus(&TacticProfile::uniform(3), 15, 100, &AbstractionConfig::default()).unwrap();
        assert!(c.phrase_count() >= 100);
        for b in &c.bouts {
            let bout = build_bout(&b.events).unwrap();
            let (a, z) = bout.final_score();
            assert_eq!(a.max(z), 15);
        }
    }

    #[test]
    fn timings_follow_the_thresholds() {
        let config = AbstractionConfig { bb_joint_window_frames: 40, pause_threshold_frames: 25 };
        let c = generate_corpus(&TacticProfile::uniform(11), 15, 150, &config).unwrap();
        for b in &c.bouts {
            let got = abstract_bout(&build_bout(&b.events).unwrap(), &config).unwrap();
            for (t, g) in b.truth.iter().zip(&got) {
                assert!(matches_truth(t, g), "truth {t:#?}\ngot {g:#?}");
            }
        }
    }
}
