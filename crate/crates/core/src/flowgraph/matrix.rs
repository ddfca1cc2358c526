use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::abstraction::TacticSequence;
use crate::model::{Position, TacticNodeKind};

/// Label for a side with no recorded attack target.
pub const ABSENT_POSITION: &str = "\u{2013}";

/// Pair counts with fencer 1 values on the rows and fencer 2 values on the
/// columns.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl Matrix {
    fn from_pairs(labels: Vec<String>, pairs: &BTreeMap<(String, String), u64>) -> Matrix {
        let index = |l: &str| labels.iter().position(|x| x == l).expect("label listed");
        let mut counts = vec![vec![0; labels.len()]; labels.len()];
        for ((r, c), n) in pairs {
            counts[index(r)][index(c)] += n;
        }
        Matrix { rows: labels.clone(), columns: labels, counts }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn get(&self, row: &str, column: &str) -> u64 {
        let r = self.rows.iter().position(|x| x == row);
        let c = self.columns.iter().position(|x| x == column);
        match (r, c) {
            (Some(r), Some(c)) => self.counts[r][c],
            _ => 0,
        }
    }
}

/// Target pairs over every FF stay. Known sabre targets come first, then
/// other tokens alphabetically, then the absent marker.
pub fn attack_position_matrix(sequences: &[TacticSequence]) -> Matrix {
    let mut pairs: BTreeMap<(String, String), u64> = BTreeMap::new();
    let label = |p: &Option<Position>| p.as_ref().map_or(ABSENT_POSITION.to_string(), |p| p.as_str().to_string());
    for node in sequences.iter().flat_map(|s| &s.nodes).filter(|n| n.kind == TacticNodeKind::FF) {
        for pair in node.ff_attacks.iter().flatten() {
            *pairs.entry((label(&pair.fencer1), label(&pair.fencer2))).or_default() += 1;
        }
    }
    if pairs.is_empty() {
        return Matrix::default();
    }
    let seen: BTreeSet<&str> = pairs.keys().flat_map(|(a, b)| [a.as_str(), b.as_str()]).collect();
    let mut labels: Vec<String> = Position::SABRE_DEFAULTS.iter().map(|s| s.to_string()).collect();
    labels.extend(
        seen.iter()
            .filter(|l| **l != ABSENT_POSITION && !Position::SABRE_DEFAULTS.contains(l))
            .map(|s| s.to_string()),
    );
    if seen.contains(ABSENT_POSITION) {
        labels.push(ABSENT_POSITION.to_string());
    }
    Matrix::from_pairs(labels, &pairs)
}

/// Opening forward steps, one observation per sequence.
pub fn forward_steps_matrix(sequences: &[TacticSequence]) -> Matrix {
    let mut pairs: BTreeMap<(String, String), u64> = BTreeMap::new();
    for steps in sequences.iter().filter_map(|s| s.nodes.first()).filter_map(|n| n.start_steps) {
        *pairs.entry((steps[0].to_string(), steps[1].to_string())).or_default() += 1;
    }
    if sequences.is_empty() {
        return Matrix::default();
    }
    Matrix::from_pairs(vec!["0".into(), "1".into(), "2".into()], &pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::{AttackPair, TacticNode};
    use crate::model::TacticNodeKind::*;

    fn ff_seq(pairs: &[(Option<&str>, Option<&str>)]) -> TacticSequence {
        let mut ff = TacticNode::new(FF, 5);
        ff.ff_attacks = Some(
            pairs
                .iter()
                .enumerate()
                .map(|(i, (a, b))| AttackPair {
                    frame: i as u32,
                    fencer1: a.and_then(Position::new),
                    fencer2: b.and_then(Position::new),
                })
                .collect(),
        );
        TacticSequence { phrase_id: "p".into(), phrase_index: 1, nodes: vec![TacticNode::new(S, 0), ff, TacticNode::new(Eq, 9)] }
    }

    #[test]
    fn counts_attack_pairs() {
        let s = ff_seq(&[(Some("head"), Some("head")), (Some("head"), Some("flank")), (Some("head"), Some("head"))]);
        let m = attack_position_matrix(&[s]);
        assert_eq!(m.get("head", "head"), 2);
        assert_eq!(m.get("head", "flank"), 1);
        assert_eq!(m.total(), 3);
        assert_eq!(m.rows, ["head", "chest", "flank", "arm"]);
    }

    #[test]
    fn one_sided_attacks_use_absent_label() {
        let m = attack_position_matrix(&[ff_seq(&[(Some("chest"), None), (None, Some("guard"))])]);
        assert_eq!(m.get("chest", ABSENT_POSITION), 1);
        assert_eq!(m.get(ABSENT_POSITION, "guard"), 1);
        assert_eq!(m.columns.last().unwrap(), ABSENT_POSITION);
        assert_eq!(m.columns[4], "guard");
    }

    #[test]
    fn no_ff_gives_empty_matrix() {
        assert!(attack_position_matrix(&[]).is_empty());
        assert!(attack_position_matrix(&[ff_seq(&[])]).is_empty());
    }

    #[test]
    fn counts_opening_steps() {
        let mk = |a, b| {
            let mut s = ff_seq(&[]);
            s.nodes[0].start_steps = Some([a, b]);
            s
        };
        let m = forward_steps_matrix(&[mk(2, 1), mk(2, 2), mk(2, 1)]);
        assert_eq!(m.get("2", "1"), 2);
        assert_eq!(m.get("2", "2"), 1);
        assert_eq!(m.total(), 3);
        assert!(forward_steps_matrix(&[]).is_empty());
    }
}
