//! Property tests over random event streams and synthetic corpora.

use std::collections::HashMap;

use fencingvis::abstraction::{abstract_bout, abstract_phrase, compute_priority, AbstractionConfig};
use fencingvis::analytics::{animation_track, bout_timeline, filter_phrases, sort_phrases, PhraseFilter, SortMode};
use fencingvis::flowgraph::{aggregate_halves, aggregate_whole};
use fencingvis::ingest::{build_bout, parse_frame_events, validate_events, write_csv, write_json, Format};
use fencingvis::model::{Action, ActionKind, Column, EventCode, Fencer, Frame, FrameEvent, RefereeCall, Scorer, TacticNodeKind};
use fencingvis::synth::{generate_bout_with, matches_truth, phrase_events, TacticProfile};
use proptest::prelude::*;

const TARGETS: [&str; 5] = ["head", "chest", "flank", "arm", "wrist"];

/// Consecutive, non-overlapping actions of one column for one fencer.
fn column(kinds: Vec<ActionKind>) -> impl Strategy<Value = Vec<(ActionKind, Frame, Frame, usize)>> {
    let n = kinds.len();
    (
        Just(kinds),
        proptest::collection::vec(0u32..18, n..=n),
        proptest::collection::vec(1u32..16, n..=n),
        proptest::collection::vec(0usize..6, n..=n),
    )
        .prop_map(|(kinds, gaps, lens, targets)| {
            let mut at = 0;
            let mut out = Vec::new();
            for (((k, g), l), t) in kinds.into_iter().zip(gaps).zip(lens).zip(targets) {
                let start = at + g;
                out.push((k, start, start + l, t));
                at = start + l + 1;
            }
            out
        })
}

fn footwork_kinds() -> impl Strategy<Value = Vec<ActionKind>> {
    proptest::collection::vec(prop_oneof![Just(ActionKind::Forward), Just(ActionKind::Backward), Just(ActionKind::Lunge)], 0..7)
}

fn blade_kinds() -> impl Strategy<Value = Vec<ActionKind>> {
    proptest::collection::vec(
        prop_oneof![Just(ActionKind::Attack), Just(ActionKind::Parry), Just(ActionKind::Riposte), Just(ActionKind::Counter)],
        0..4,
    )
}

fn fencer_actions(f: Fencer) -> impl Strategy<Value = Vec<Action>> {
    (footwork_kinds().prop_flat_map(column), blade_kinds().prop_flat_map(column)).prop_map(move |(foot, blade)| {
        foot.into_iter()
            .chain(blade)
            .map(|(k, s, e, t)| {
                let a = Action::new(f, k, s, e);
                match (k, TARGETS.get(t)) {
                    (ActionKind::Attack | ActionKind::Parry, Some(p)) => a.with_position(p),
                    _ => a,
                }
            })
            .collect()
    })
}

/// One phrase as frame rows, with a consistent outcome.
fn phrase_rows(pid: String) -> impl Strategy<Value = Vec<FrameEvent>> {
    (fencer_actions(Fencer::One), fencer_actions(Fencer::Two), 0u8..3, any::<bool>()).prop_filter_map(
        "phrase needs an action",
        move |(a, b, score, flag)| {
            let mut actions = a;
            actions.extend(b);
            if actions.is_empty() {
                return None;
            }
            let scorer = Scorer::try_from(score).unwrap();
            let call = match (score, flag) {
                (0, true) => RefereeCall::S,
                (0, false) => RefereeCall::N,
                (_, true) => RefereeCall::A,
                (_, false) => RefereeCall::R,
            };
            Some(phrase_events("rand", &pid, &actions, call, scorer, &[(0, 0.0)]))
        },
    )
}

fn bout_rows() -> impl Strategy<Value = Vec<FrameEvent>> {
    (1usize..10).prop_flat_map(|n| (0..n).map(|i| phrase_rows(format!("p{i}"))).collect::<Vec<_>>()).prop_map(|v| v.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn random_streams_parse_and_round_trip(rows in bout_rows()) {
        let report = validate_events(&rows);
        prop_assert!(report.is_ok(), "{:?}", report.errors);
        for format in [Format::Csv, Format::Json] {
            let mut bytes = Vec::new();
            match format {
                Format::Csv => write_csv(&rows, &mut bytes).unwrap(),
                Format::Json => write_json(&rows, &mut bytes).unwrap(),
            }
            prop_assert_eq!(&parse_frame_events(bytes.as_slice(), format).unwrap(), &rows);
        }
    }

    #[test]
    fn assembly_keeps_every_step(rows in bout_rows()) {
        let bout = build_bout(&rows).unwrap();
        prop_assert_eq!(&build_bout(&rows).unwrap(), &bout);
        let begins = rows.iter().flat_map(|r| [r.footwork1, r.footwork2]).filter(|c| *c == Some(EventCode::begin(ActionKind::Forward))).count();
        let forwards = bout.phrases.iter().flat_map(|p| &p.actions).filter(|a| a.kind == ActionKind::Forward).count();
        prop_assert_eq!(begins, forwards);
        for p in &bout.phrases {
            for f in Fencer::BOTH {
                let foot: Vec<&Action> = p.actions_of(f).filter(|a| a.kind.is_footwork()).collect();
                for w in foot.windows(2) {
                    prop_assert!(w[0].start_frame <= w[1].start_frame && w[0].end_frame < w[1].start_frame);
                }
            }
        }
    }

    #[test]
    fn abstraction_invariants_hold(rows in bout_rows()) {
        let bout = build_bout(&rows).unwrap();
        let config = AbstractionConfig::default();
        for p in &bout.phrases {
            let seq = abstract_phrase(p, &config).unwrap();
            prop_assert!(seq.check_invariants().is_ok(), "{:?}", seq.check_invariants());
            prop_assert_eq!(seq.terminal(), Some(TacticNodeKind::terminal_for(p.scorer)));
            prop_assert_eq!(&abstract_phrase(p, &config).unwrap(), &seq);
            prop_assert_eq!(abstract_phrase(&p.swap_fencers(), &config).unwrap(), seq.mirror());
        }
    }

    #[test]
    fn priority_segments_partition_the_phrase(rows in bout_rows()) {
        for p in &build_bout(&rows).unwrap().phrases {
            let segs = compute_priority(p).segments;
            prop_assert_eq!(segs.first().unwrap().start_frame, 0);
            prop_assert_eq!(segs.last().unwrap().end_frame, p.duration);
            for w in segs.windows(2) {
                prop_assert_eq!(w[0].end_frame, w[1].start_frame);
                prop_assert!(w[0].start_frame < w[0].end_frame);
                prop_assert!(w[0].owner != w[1].owner);
            }
        }
    }

    #[test]
    fn phrase_queries_are_consistent(rows in bout_rows(), cap in 0u32..150, extra in 0u32..100) {
        let bout = build_bout(&rows).unwrap();
        let seqs = abstract_bout(&bout, &AbstractionConfig::default()).unwrap();
        let chronological: Vec<String> = bout.phrases.iter().map(|p| p.id.clone()).collect();
        let tight = filter_phrases(&bout, &PhraseFilter { max_duration: Some(cap), ..Default::default() });
        let loose = filter_phrases(&bout, &PhraseFilter { max_duration: Some(cap + extra), ..Default::default() });
        let mut it = chronological.iter();
        prop_assert!(tight.ids.iter().all(|id| it.any(|c| c == id)));
        prop_assert!(tight.ids.iter().all(|id| loose.ids.contains(id)));
        for mode in [SortMode::Chronological, SortMode::Duration, SortMode::TacticSequence, SortMode::Outcome] {
            let mut sorted = sort_phrases(&bout, &seqs, mode);
            sorted.sort();
            let mut all = chronological.clone();
            all.sort();
            prop_assert_eq!(sorted, all);
        }
        let t = bout_timeline(&bout);
        for w in t.spans.windows(2) {
            prop_assert!(w[0].x_end < w[1].x_start && w[0].index < w[1].index);
        }
        for p in &bout.phrases {
            prop_assert_eq!(animation_track(p), animation_track(&p.clone()));
        }
    }

    #[test]
    fn graphs_conserve_flow(rows in bout_rows()) {
        let bout = build_bout(&rows).unwrap();
        let seqs = abstract_bout(&bout, &AbstractionConfig::default()).unwrap();
        let g = aggregate_whole(&seqs).unwrap();
        let n = seqs.len() as u64;
        prop_assert_eq!(g.outflow(TacticNodeKind::S), n);
        prop_assert_eq!(g.inflow(TacticNodeKind::One) + g.inflow(TacticNodeKind::Two) + g.inflow(TacticNodeKind::Eq), n);
        for k in [TacticNodeKind::BB, TacticNodeKind::FF, TacticNodeKind::FB, TacticNodeKind::BF] {
            prop_assert_eq!(g.inflow(k), g.outflow(k));
        }
        prop_assert_eq!(aggregate_halves(&bout, &seqs).unwrap().collapse(), g);
    }

    #[test]
    fn synthetic_bouts_are_recovered(seed in 0u64..10_000, window in 4u32..40, pause in 4u32..30) {
        let config = AbstractionConfig { bb_joint_window_frames: window, pause_threshold_frames: pause };
        let synth = generate_bout_with(&TacticProfile::random(seed), 6, &config).unwrap();
        let report = validate_events(&synth.events);
        prop_assert!(report.errors.is_empty() && report.warnings.is_empty());
        let got = abstract_bout(&build_bout(&synth.events).unwrap(), &config).unwrap();
        for (t, g) in synth.truth.iter().zip(&got) {
            prop_assert!(matches_truth(t, g), "truth {:?}\ngot {:?}", t.kinds(), g.kinds());
        }
    }
}

#[test]
fn kind_geometry() {
    let mut per_layer: HashMap<u8, usize> = HashMap::new();
    for k in TacticNodeKind::ALL {
        *per_layer.entry(k.layer()).or_default() += 1;
        assert_eq!(k.layer(), k.layer());
        assert_eq!(k.mirror().mirror(), k);
        assert_eq!(k.mirror().column(), k.column().mirror());
    }
    assert_eq!(per_layer, HashMap::from([(1, 2), (2, 3), (3, 3)]));
    use TacticNodeKind::*;
    let pairs = [(BF, FB), (One, Two), (S, S), (BB, BB), (FF, FF), (Eq, Eq)];
    for (a, b) in pairs {
        assert_eq!(a.mirror(), b);
    }
    assert_eq!(Column::Left.mirror(), Column::Right);
    assert_eq!(Column::Center.mirror(), Column::Center);
}

fn fixtures() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn cli(args: &[&str]) -> String {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = fencingvis::cli::run(std::iter::once("fencingvis").chain(args.iter().copied()), &mut out, &mut err);
    assert_eq!(code, 0, "{args:?}: {}", String::from_utf8_lossy(&err));
    String::from_utf8(out).unwrap()
}

#[test]
fn graph_from_abstract_output_matches_graph_from_events() {
    let dir = tempfile::tempdir().unwrap();
    for fixture in ["fx-alpha.csv", "fx-beta.csv", "fx-gamma.json"] {
        let events = fixtures().join(fixture);
        let doc = dir.path().join(format!("{fixture}.abstract.json"));
        std::fs::write(&doc, cli(&["abstract", events.to_str().unwrap()])).unwrap();
        for mode in ["whole", "halves"] {
            let direct = cli(&["graph", events.to_str().unwrap(), "--mode", mode]);
            assert_eq!(direct, cli(&["graph", doc.to_str().unwrap(), "--mode", mode]), "{fixture} {mode}");
            assert_eq!(direct, cli(&["graph", events.to_str().unwrap(), "--mode", mode]));
        }
    }
}

#[test]
fn service_reads_are_idempotent() {
    let service = fencingvis::service::Service::from_dir(&fixtures(), &AbstractionConfig::default()).unwrap();
    let params = HashMap::from([("mode".to_string(), "by-bout".to_string()), ("layout".to_string(), "orthogonal".to_string())]);
    let first = service.flowgraph(&params).unwrap();
    assert_eq!(first, service.flowgraph(&params).unwrap());
    let bouts = service.list_bouts();
    assert_eq!(bouts, service.list_bouts());
    service.reload().unwrap();
    assert_eq!(bouts, service.list_bouts());
    assert_eq!(first, service.flowgraph(&params).unwrap());
    for b in &bouts {
        assert_eq!(service.timeline(&b.id).unwrap(), service.timeline(&b.id).unwrap());
        assert_eq!(service.phrases(&b.id, &HashMap::new()).unwrap(), service.phrases(&b.id, &HashMap::new()).unwrap());
    }
}
