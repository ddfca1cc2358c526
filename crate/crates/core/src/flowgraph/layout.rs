use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::FlowGraph;
use crate::model::{Column, TacticNodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutKind {
    Layered,
    Orthogonal,
}

impl std::str::FromStr for LayoutKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "layered" => Ok(LayoutKind::Layered),
            "orthogonal" => Ok(LayoutKind::Orthogonal),
            other => Err(format!("unknown layout {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: i32,
    pub col: i32,
}

impl Cell {
    pub const fn new(row: i32, col: i32) -> Self {
        Cell { row, col }
    }

    /// Chebyshev distance from the origin.
    pub fn ring(self) -> i32 {
        self.row.abs().max(self.col.abs())
    }

    fn step(self, dir: usize) -> Cell {
        let (dr, dc) = DIRS[dir];
        Cell::new(self.row + dr, self.col + dc)
    }

    fn is_adjacent(self, other: Cell) -> bool {
        (self.row - other.row).abs() + (self.col - other.col).abs() == 1
    }
}

/// Which part of a cell a node occupies. Only S and BB share a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Slot {
    Full,
    LeftHalf,
    RightHalf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeRef {
    pub kind: TacticNodeKind,
    pub instance: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub node: NodeRef,
    pub cell: Cell,
    pub slot: Slot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ribbon {
    /// Index of the input graph the count comes from.
    pub series: usize,
    pub partition: String,
    pub count: u64,
    pub width: f64,
    /// Center of this ribbon relative to the center of the route.
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutedFlow {
    pub from: NodeRef,
    pub to: NodeRef,
    /// Every cell visited, endpoints included.
    pub polyline: Vec<Cell>,
    pub ribbons: Vec<Ribbon>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionedGraph {
    pub layout: LayoutKind,
    pub placements: Vec<Placement>,
    pub flows: Vec<RoutedFlow>,
    pub redundant_instances: BTreeMap<TacticNodeKind, u32>,
}

impl PositionedGraph {
    pub fn placement(&self, node: NodeRef) -> Option<&Placement> {
        self.placements.iter().find(|p| p.node == node)
    }

    pub fn flow(&self, from: TacticNodeKind, to: TacticNodeKind) -> impl Iterator<Item = &RoutedFlow> {
        self.flows.iter().filter(move |f| f.from.kind == from && f.to.kind == to)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RibbonScale {
    /// Width given to the largest count.
    pub max_width: f64,
}

impl Default for RibbonScale {
    fn default() -> Self {
        RibbonScale { max_width: 12.0 }
    }
}

impl RibbonScale {
    pub fn width(&self, count: u64, max_count: u64) -> f64 {
        if max_count == 0 {
            return 0.0;
        }
        (count as f64 * self.max_width / max_count as f64).max(1.0)
    }
}

type SeriesCounts = Vec<(usize, String, u64)>;

/// Nonzero counts per distinct edge, in (series, partition) order.
fn edge_series(graphs: &[FlowGraph]) -> BTreeMap<(TacticNodeKind, TacticNodeKind), SeriesCounts> {
    let mut out: BTreeMap<_, SeriesCounts> = BTreeMap::new();
    for (series, g) in graphs.iter().enumerate() {
        for e in g.edges.iter().filter(|e| e.count > 0) {
            out.entry((e.from, e.to)).or_default().push((series, e.partition.clone(), e.count));
        }
    }
    out
}

fn ribbons(counts: &SeriesCounts, max_count: u64, scale: RibbonScale) -> Vec<Ribbon> {
    let widths: Vec<f64> = counts.iter().map(|c| scale.width(c.2, max_count)).collect();
    let total: f64 = widths.iter().sum();
    let mut cursor = -total / 2.0;
    counts
        .iter()
        .zip(widths)
        .map(|((series, partition, count), width)| {
            let offset = cursor + width / 2.0;
            cursor += width;
            Ribbon { series: *series, partition: partition.clone(), count: *count, width, offset }
        })
        .collect()
}

fn max_count(series: &BTreeMap<(TacticNodeKind, TacticNodeKind), SeriesCounts>) -> u64 {
    series.values().flatten().map(|c| c.2).max().unwrap_or(0)
}

/// The fixed top-to-bottom layout: rows are layers 1 to 3, columns 1 to 3
/// are left, center and right. S and BB split the top center cell.
pub fn layered_layout(graph: &FlowGraph, scale: RibbonScale) -> PositionedGraph {
    let cell_of = |k: TacticNodeKind| {
        let col = match k.column() {
            Column::Left => 1,
            Column::Center => 2,
            Column::Right => 3,
        };
        Cell::new(k.layer() as i32, col)
    };
    let placements = TacticNodeKind::ALL
        .into_iter()
        .map(|kind| Placement {
            node: NodeRef { kind, instance: 0 },
            cell: cell_of(kind),
            slot: match kind {
                TacticNodeKind::S => Slot::LeftHalf,
                TacticNodeKind::BB => Slot::RightHalf,
                _ => Slot::Full,
            },
        })
        .collect();
    let series = edge_series(std::slice::from_ref(graph));
    let max = max_count(&series);
    let flows = series
        .iter()
        .map(|(&(from, to), counts)| RoutedFlow {
            from: NodeRef { kind: from, instance: 0 },
            to: NodeRef { kind: to, instance: 0 },
            polyline: vec![cell_of(from), cell_of(to)],
            ribbons: ribbons(counts, max, scale),
        })
        .collect();
    PositionedGraph {
        layout: LayoutKind::Layered,
        placements,
        flows,
        redundant_instances: TacticNodeKind::ALL.into_iter().map(|k| (k, 1)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LayoutError {
    #[error("no outward route for {from} -> {to}")]
    LayoutInfeasible { from: TacticNodeKind, to: TacticNodeKind },
}

// Down, right, up, left in (row, col) terms.
const DIRS: [(i32, i32); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
const MAX_RING: i32 = 10;
const AXIS_ROW: u8 = 1;
const AXIS_COL: u8 = 2;

fn opposite(dir: usize) -> usize {
    (dir + 2) % 4
}

fn axis(dir: usize) -> u8 {
    if dir % 2 == 0 {
        AXIS_ROW
    } else {
        AXIS_COL
    }
}

/// Instances each kind needs. A cell has four sides, and away from the
/// origin one of them faces inward (usable only for arrivals) and one faces
/// outward (usable only for departures), so an instance takes at most four
/// routes, three of them incoming and three outgoing. S keeps the origin,
/// where all four sides point outward.
pub fn planned_instances(edges: &[(TacticNodeKind, TacticNodeKind)]) -> BTreeMap<TacticNodeKind, u32> {
    let mut ins: BTreeMap<TacticNodeKind, u32> = BTreeMap::new();
    let mut outs: BTreeMap<TacticNodeKind, u32> = BTreeMap::new();
    ins.insert(TacticNodeKind::S, 0);
    outs.insert(TacticNodeKind::S, 0);
    for &(a, b) in edges {
        *outs.entry(a).or_default() += 1;
        ins.entry(a).or_default();
        *ins.entry(b).or_default() += 1;
        outs.entry(b).or_default();
    }
    ins.keys()
        .map(|&k| {
            let (i, o) = (ins[&k], outs[&k]);
            let n = if k == TacticNodeKind::S {
                1 + o.saturating_sub(4).div_ceil(3)
            } else {
                (i + o).div_ceil(4).max(i.div_ceil(3)).max(o.div_ceil(3)).max(1)
            };
            (k, n)
        })
        .collect()
}

#[derive(Clone)]
struct Instance {
    kind: TacticNodeKind,
    cell: Cell,
    used: [bool; 4],
}

impl Instance {
    fn free_sides(&self) -> usize {
        self.used.iter().filter(|u| !**u).count()
    }
}

#[derive(Clone, Copy)]
struct Strategy {
    dirs: [usize; 4],
    reuse_first: bool,
    min_free_neighbors: usize,
}

const SIDE: i32 = 2 * MAX_RING + 1;
const NO_NODE: u16 = u16::MAX;

fn slot(c: Cell) -> usize {
    ((c.row + MAX_RING) * SIDE + c.col + MAX_RING) as usize
}

fn in_bounds(c: Cell) -> bool {
    c.ring() <= MAX_RING
}

#[derive(Clone)]
struct Router {
    strategy: Strategy,
    instances: Vec<Instance>,
    nodes: Vec<u16>,
    masks: Vec<u8>,
    routes: Vec<(usize, usize, Vec<Cell>)>,
}

enum Goal {
    Instance(usize),
    NewCell { min_free: usize, min_ring: i32 },
}

impl Router {
    fn new(strategy: Strategy) -> Self {
        let cells = (SIDE * SIDE) as usize;
        let mut r =
            Router { strategy, instances: vec![], nodes: vec![NO_NODE; cells], masks: vec![0; cells], routes: vec![] };
        r.add_instance(TacticNodeKind::S, Cell::new(0, 0));
        r
    }

    fn add_instance(&mut self, kind: TacticNodeKind, cell: Cell) -> usize {
        self.instances.push(Instance { kind, cell, used: [false; 4] });
        self.nodes[slot(cell)] = (self.instances.len() - 1) as u16;
        self.instances.len() - 1
    }

    fn has_node(&self, c: Cell) -> bool {
        self.nodes[slot(c)] != NO_NODE
    }

    fn is_vacant(&self, c: Cell) -> bool {
        in_bounds(c) && !self.has_node(c) && self.masks[slot(c)] == 0
    }

    fn free_neighbors(&self, c: Cell) -> usize {
        (0..4).filter(|&d| self.is_vacant(c.step(d))).count()
    }

    fn count_of(&self, kind: TacticNodeKind) -> u32 {
        self.instances.iter().filter(|i| i.kind == kind).count() as u32
    }

    /// Breadth-first search over (cell, heading) for a path from `src` that
    /// never moves inward, may cross earlier routes at right angles but not
    /// run along them, and enters the goal through a free side.
    fn search(&self, src: usize, goal: &Goal) -> Option<Vec<Cell>> {
        let start = &self.instances[src];
        const UNSEEN: u32 = u32::MAX;
        const ROOT: u32 = u32::MAX - 1;
        let mut prev = vec![UNSEEN; (SIDE * SIDE * 4) as usize];
        let key = |c: Cell, d: usize| slot(c) * 4 + d;
        let unkey = |k: usize| {
            let s = (k / 4) as i32;
            (Cell::new(s / SIDE - MAX_RING, s % SIDE - MAX_RING), k % 4)
        };
        let reaches = |c: Cell, d: usize| match *goal {
            Goal::Instance(t) => {
                let t = &self.instances[t];
                t.cell == c && !t.used[opposite(d)]
            }
            Goal::NewCell { min_free, min_ring } => {
                c.ring() >= min_ring && self.is_vacant(c) && self.free_neighbors(c) >= min_free
            }
        };
        let trace = |end: Cell, mut k: u32, prev: &[u32]| {
            let mut path = vec![end];
            while k != ROOT {
                let (c, _) = unkey(k as usize);
                path.push(c);
                k = prev[k as usize];
            }
            path.push(start.cell);
            path.reverse();
            path
        };
        let mut queue = VecDeque::new();
        for &d in &self.strategy.dirs {
            let n = start.cell.step(d);
            if start.used[d] || !in_bounds(n) || n.ring() < start.cell.ring() {
                continue;
            }
            if reaches(n, d) {
                return Some(vec![start.cell, n]);
            }
            if !self.has_node(n) && prev[key(n, d)] == UNSEEN {
                prev[key(n, d)] = ROOT;
                queue.push_back((n, d));
            }
        }
        while let Some((c, din)) = queue.pop_front() {
            let mask = self.masks[slot(c)];
            let here = key(c, din) as u32;
            for &dout in &self.strategy.dirs {
                if dout == opposite(din) {
                    continue;
                }
                let need = if dout == din { axis(din) } else { AXIS_ROW | AXIS_COL };
                let n = c.step(dout);
                if mask & need != 0 || !in_bounds(n) || n.ring() < c.ring() {
                    continue;
                }
                if reaches(n, dout) {
                    return Some(trace(n, here, &prev));
                }
                if !self.has_node(n) && prev[key(n, dout)] == UNSEEN {
                    prev[key(n, dout)] = here;
                    queue.push_back((n, dout));
                }
            }
        }
        None
    }

    fn commit(&mut self, src: usize, dst: usize, path: Vec<Cell>) {
        let dir_between = |a: Cell, b: Cell| (0..4).find(|&d| a.step(d) == b).expect("adjacent cells");
        let n = path.len();
        let first = dir_between(path[0], path[1]);
        let last = dir_between(path[n - 2], path[n - 1]);
        self.instances[src].used[first] = true;
        self.instances[dst].used[opposite(last)] = true;
        for i in 1..n - 1 {
            let din = dir_between(path[i - 1], path[i]);
            let dout = dir_between(path[i], path[i + 1]);
            let need = if din == dout { axis(din) } else { AXIS_ROW | AXIS_COL };
            self.masks[slot(path[i])] |= need;
        }
        self.routes.push((src, dst, path));
    }

    fn instances_of(&self, kind: TacticNodeKind) -> Vec<usize> {
        (0..self.instances.len()).filter(|&i| self.instances[i].kind == kind).collect()
    }

    fn try_existing(&mut self, from: TacticNodeKind, to: TacticNodeKind) -> bool {
        for s in self.instances_of(from) {
            if self.instances[s].free_sides() == 0 {
                continue;
            }
            for t in self.instances_of(to) {
                if self.instances[t].free_sides() == 0 || self.instances[t].cell.ring() < self.instances[s].cell.ring() {
                    continue;
                }
                if let Some(path) = self.search(s, &Goal::Instance(t)) {
                    self.commit(s, t, path);
                    return true;
                }
            }
        }
        false
    }

    /// Places a new instance of `to` at the end of a route from `from`.
    /// `min_ring` keeps sinks outside every source still to reach them.
    fn try_new(&mut self, from: TacticNodeKind, to: TacticNodeKind, remaining_degree: usize, min_ring: i32) -> bool {
        let wanted = self.strategy.min_free_neighbors.min(remaining_degree.saturating_sub(1));
        for ring in [min_ring, 0] {
            for min_free in (0..=wanted).rev() {
                for s in self.instances_of(from) {
                    if self.instances[s].free_sides() == 0 {
                        continue;
                    }
                    if let Some(path) = self.search(s, &Goal::NewCell { min_free, min_ring: ring }) {
                        let t = self.add_instance(to, *path.last().unwrap());
                        self.commit(s, t, path);
                        return true;
                    }
                }
            }
        }
        false
    }

    /// A fresh source instance with no incoming routes, on the nearest
    /// cell whose four neighbours are vacant.
    fn add_floating(&mut self, kind: TacticNodeKind) -> bool {
        for ring in 1..MAX_RING {
            let mut cells: Vec<Cell> = (-ring..=ring)
                .flat_map(|r| (-ring..=ring).map(move |c| Cell::new(r, c)))
                .filter(|c| c.ring() == ring)
                .collect();
            cells.sort();
            if let Some(c) = cells.into_iter().find(|&c| self.is_vacant(c) && self.free_neighbors(c) == 4) {
                self.add_instance(kind, c);
                return true;
            }
        }
        false
    }

    fn route(&mut self, edges: &[(TacticNodeKind, TacticNodeKind)], plan: &BTreeMap<TacticNodeKind, u32>) -> Result<(), LayoutError> {
        let mut remaining: BTreeMap<TacticNodeKind, usize> = BTreeMap::new();
        for &(a, b) in edges {
            *remaining.entry(a).or_default() += 1;
            *remaining.entry(b).or_default() += 1;
        }
        for (i, &(from, to)) in edges.iter().enumerate() {
            let under_plan = self.count_of(to) < plan[&to];
            let spare: usize = self.instances_of(to).iter().map(|&t| self.instances[t].free_sides()).sum();
            let rem_to = remaining[&to];
            let min_ring = if to.is_terminal() {
                edges[i..]
                    .iter()
                    .filter(|e| e.1 == to)
                    .flat_map(|e| self.instances_of(e.0))
                    .map(|s| self.instances[s].cell.ring() + 1)
                    .max()
                    .unwrap_or(0)
            } else {
                0
            };
            let mut done = false;
            for attempt in 0..3 {
                done = if self.strategy.reuse_first || !under_plan || rem_to <= spare {
                    self.try_existing(from, to) || self.try_new(from, to, rem_to, min_ring)
                } else {
                    self.try_new(from, to, rem_to, min_ring) || self.try_existing(from, to)
                };
                if done || attempt == 2 || !self.add_floating(from) {
                    break;
                }
            }
            if !done {
                return Err(LayoutError::LayoutInfeasible { from, to });
            }
            *remaining.get_mut(&from).unwrap() -= 1;
            *remaining.get_mut(&to).unwrap() -= 1;
        }
        Ok(())
    }
}

/// Edges ordered by breadth-first discovery from S, ties by kind order.
fn bfs_edge_order(edges: &BTreeSet<(TacticNodeKind, TacticNodeKind)>) -> Vec<(TacticNodeKind, TacticNodeKind)> {
    let mut order = Vec::new();
    let mut seen = BTreeSet::from([TacticNodeKind::S]);
    let mut queue = VecDeque::from([TacticNodeKind::S]);
    let mut emitted = BTreeSet::new();
    while let Some(k) = queue.pop_front() {
        for &(a, b) in edges.iter().filter(|e| e.0 == k) {
            order.push((a, b));
            emitted.insert((a, b));
            if seen.insert(b) {
                queue.push_back(b);
            }
        }
    }
    order.extend(edges.iter().filter(|e| !emitted.contains(e)).copied());
    order
}

type EdgeList = Vec<(TacticNodeKind, TacticNodeKind)>;

/// Edges into terminals moved to the end, grouped by target in
/// `sink_order`, sources within a group in the given order.
fn grouped_order(order: &[(TacticNodeKind, TacticNodeKind)], sink_order: &[TacticNodeKind]) -> EdgeList {
    let (mut out, mut sinks): (EdgeList, EdgeList) = order.iter().partition(|e| !e.1.is_terminal());
    sinks.sort_by_key(|e| sink_order.iter().position(|k| *k == e.1));
    out.extend(sinks);
    out
}

const FIXED_DIRS: [[usize; 4]; 8] =
    [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0], [0, 3, 2, 1], [1, 2, 3, 0], [2, 1, 0, 3], [3, 0, 1, 2]];
const RANDOM_ATTEMPTS: u64 = 256;

/// Candidate (strategy, edge order) pairs: a fixed sweep followed by
/// seeded perturbations, so the outcome is the same on every run.
fn attempts(order: &[(TacticNodeKind, TacticNodeKind)]) -> impl Iterator<Item = (Strategy, EdgeList)> + '_ {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use TacticNodeKind::{Eq, One, Two};

    let fixed = [false, true].into_iter().flat_map(move |grouped| {
        [false, true].into_iter().flat_map(move |reuse_first| {
            [3, 2].into_iter().flat_map(move |min_free_neighbors| {
                FIXED_DIRS.into_iter().map(move |dirs| {
                    let edges = if grouped { grouped_order(order, &[One, Two, Eq]) } else { order.to_vec() };
                    (Strategy { dirs, reuse_first, min_free_neighbors }, edges)
                })
            })
        })
    });
    let random = (0..RANDOM_ATTEMPTS).map(move |seed| {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut dirs = [0, 1, 2, 3];
        dirs.shuffle(&mut rng);
        let mut sinks = [One, Two, Eq];
        sinks.shuffle(&mut rng);
        let mut edges = grouped_order(order, &sinks);
        let first_sink = edges.iter().position(|e| e.1.is_terminal()).unwrap_or(edges.len());
        for group in edges[first_sink..].chunk_by_mut(|a, b| a.1 == b.1) {
            group.shuffle(&mut rng);
        }
        let strategy = Strategy { dirs, reuse_first: rng.gen(), min_free_neighbors: rng.gen_range(2..=3) };
        (strategy, edges)
    });
    fixed.chain(random)
}

/// Lays out the union of the graphs' edges on an integer grid around S.
/// Routes only move away from the origin; a kind is repeated when it needs
/// more than four incident routes. Routing attempts run in a fixed order
/// and the first one meeting the planned instance counts wins; otherwise
/// the one with the fewest instances is returned.
pub fn orthogonal_layout(graphs: &[FlowGraph], scale: RibbonScale) -> Result<PositionedGraph, LayoutError> {
    let series = edge_series(graphs);
    let edge_set: BTreeSet<_> = series.keys().copied().collect();
    let order = bfs_edge_order(&edge_set);
    let plan = planned_instances(&order);

    let mut best: Option<Router> = None;
    let mut last_err = None;
    for (strategy, edges) in attempts(&order) {
        let mut router = Router::new(strategy);
        match router.route(&edges, &plan) {
            Ok(()) => {
                let meets = plan.iter().all(|(k, &n)| router.count_of(*k) == n);
                if meets {
                    best = Some(router);
                    break;
                }
                if best.as_ref().is_none_or(|b| router.instances.len() < b.instances.len()) {
                    best = Some(router);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let router = match best {
        Some(r) => r,
        None => return Err(last_err.expect("at least one attempt ran")),
    };

    let mut ordinal: BTreeMap<TacticNodeKind, u32> = BTreeMap::new();
    let refs: Vec<NodeRef> = router
        .instances
        .iter()
        .map(|i| {
            let n = ordinal.entry(i.kind).or_default();
            *n += 1;
            NodeRef { kind: i.kind, instance: *n - 1 }
        })
        .collect();
    let placements = router
        .instances
        .iter()
        .zip(&refs)
        .map(|(i, &node)| Placement { node, cell: i.cell, slot: Slot::Full })
        .collect();
    let max = max_count(&series);
    let flows = router
        .routes
        .iter()
        .map(|(s, t, path)| {
            let counts = &series[&(refs[*s].kind, refs[*t].kind)];
            RoutedFlow { from: refs[*s], to: refs[*t], polyline: path.clone(), ribbons: ribbons(counts, max, scale) }
        })
        .collect();
    Ok(PositionedGraph { layout: LayoutKind::Orthogonal, placements, flows, redundant_instances: ordinal })
}

/// Checks the structural guarantees of an orthogonal layout; returns a
/// description of the first violation.
pub fn check_orthogonal(layout: &PositionedGraph, graphs: &[FlowGraph]) -> Result<(), String> {
    let mut cells = BTreeSet::new();
    for p in &layout.placements {
        if !cells.insert(p.cell) {
            return Err(format!("two nodes on {:?}", p.cell));
        }
    }
    let s0 = layout.placement(NodeRef { kind: TacticNodeKind::S, instance: 0 }).ok_or("no S instance")?;
    if s0.cell != Cell::new(0, 0) {
        return Err("S is not at the origin".into());
    }
    let mut routed = BTreeMap::new();
    for f in &layout.flows {
        *routed.entry((f.from.kind, f.to.kind)).or_insert(0) += 1;
        let from = layout.placement(f.from).ok_or("unplaced source")?;
        let to = layout.placement(f.to).ok_or("unplaced target")?;
        if f.polyline.first() != Some(&from.cell) || f.polyline.last() != Some(&to.cell) {
            return Err(format!("{}->{} does not join its endpoints", f.from.kind, f.to.kind));
        }
        for w in f.polyline.windows(2) {
            if !w[0].is_adjacent(w[1]) {
                return Err(format!("{}->{} is not axis-aligned", f.from.kind, f.to.kind));
            }
            if w[1].ring() < w[0].ring() {
                return Err(format!("{}->{} moves inward", f.from.kind, f.to.kind));
            }
        }
        if f.polyline[1..f.polyline.len() - 1].iter().any(|c| cells.contains(c)) {
            return Err(format!("{}->{} passes through a node", f.from.kind, f.to.kind));
        }
    }
    let expected: BTreeSet<_> = edge_series(graphs).into_keys().collect();
    for e in &expected {
        match routed.get(e) {
            Some(1) => {}
            Some(n) => return Err(format!("{}->{} routed {n} times", e.0, e.1)),
            None => return Err(format!("{}->{} not routed", e.0, e.1)),
        }
    }
    if routed.len() != expected.len() {
        return Err("route for an absent edge".into());
    }
    let mut degree: HashMap<NodeRef, u32> = HashMap::new();
    for f in &layout.flows {
        *degree.entry(f.from).or_default() += 1;
        *degree.entry(f.to).or_default() += 1;
    }
    if let Some((n, d)) = degree.iter().find(|(_, d)| **d > 4) {
        return Err(format!("{}#{} has {d} incident routes", n.kind, n.instance));
    }
    Ok(())
}
