//! Pre-stable zone graphs.
//!
//! Construction runs in two phases. The forward phase explores reachable
//! zones per location (subtracting what is already covered, so zones of one
//! location stay disjoint) and decomposes each zone against the guards
//! leaving its location. The second phase splits zones until every node is
//! pre-stable with respect to its discrete successors, its delay successors
//! and its delay predecessors.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::dbm::Dbm;
use crate::ta::{ClockId, Guard, TimedAutomaton};

/// An automaton edge in the index-based form the construction works on.
#[derive(Clone, Debug)]
pub(crate) struct SysEdge {
    pub from: usize,
    pub to: usize,
    pub action: usize,
    pub guard: Guard,
    pub resets: Vec<ClockId>,
}

/// Index-based automaton, optionally with extra guards per location that
/// every zone there must evaluate uniformly.
#[derive(Clone, Debug)]
pub(crate) struct System {
    pub clocks: Vec<String>,
    pub locations: Vec<String>,
    pub actions: Vec<String>,
    pub initial: usize,
    pub edges: Vec<SysEdge>,
    pub probes: Vec<Vec<Guard>>,
}

impl System {
    pub fn from_ta(ta: &TimedAutomaton) -> System {
        let loc = |name: &str| ta.location_index(name).expect("validated automaton");
        let act = |name: &str| {
            ta.alphabet
                .iter()
                .position(|a| a == name)
                .expect("validated automaton")
        };
        System {
            clocks: ta.clocks.clone(),
            locations: ta.locations.clone(),
            actions: ta.alphabet.clone(),
            initial: ta.initial_index(),
            edges: ta
                .edges
                .iter()
                .map(|e| SysEdge {
                    from: loc(&e.from),
                    to: loc(&e.to),
                    action: act(&e.action),
                    guard: e.guard.clone(),
                    resets: e.resets.iter().copied().collect(),
                })
                .collect(),
            probes: vec![Vec::new(); ta.locations.len()],
        }
    }

    pub fn num_clocks(&self) -> usize {
        self.clocks.len()
    }

    /// Least fixpoint of the per-location maximal constants, `-1` for clocks
    /// that no reachable guard inspects before a reset.
    pub fn max_constants(&self) -> Vec<Vec<i64>> {
        let n = self.num_clocks();
        let mut max = vec![vec![-1i64; n + 1]; self.locations.len()];
        for row in &mut max {
            row[0] = 0;
        }
        let local = |l: usize, g: &Guard, max: &mut Vec<Vec<i64>>| {
            for a in g.atoms() {
                let slot = &mut max[l][a.clock.index()];
                *slot = (*slot).max(a.k);
            }
        };
        for e in &self.edges {
            local(e.from, &e.guard, &mut max);
        }
        for (l, gs) in self.probes.iter().enumerate() {
            for g in gs {
                local(l, g, &mut max);
            }
        }
        loop {
            let mut changed = false;
            for e in &self.edges {
                for x in 1..=n {
                    if e.resets.contains(&ClockId(x)) {
                        continue;
                    }
                    let up = max[e.to][x];
                    if up > max[e.from][x] {
                        max[e.from][x] = up;
                        changed = true;
                    }
                }
            }
            if !changed {
                return max;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZoneNode {
    pub id: usize,
    pub location: usize,
    pub zone: Dbm,
    pub is_base: bool,
}

/// A discrete step between nodes, induced by automaton edge `edge`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ActionEdge {
    pub src: usize,
    pub edge: usize,
    pub action: usize,
    pub dst: usize,
}

#[derive(Clone, Debug)]
pub struct ZoneGraph {
    pub nodes: Vec<ZoneNode>,
    pub initial: usize,
    pub action_edges: Vec<ActionEdge>,
    /// Immediate delay successors only; self-loops and transitivity are implicit.
    pub delay_edges: Vec<(usize, usize)>,
    sys: System,
}

#[derive(Clone, Copy)]
struct Passes {
    discrete: bool,
    delay: bool,
}

impl Passes {
    const ALL: Passes = Passes {
        discrete: true,
        delay: true,
    };
}

/// Per-location maximal constants of an automaton, indexed by location and
/// clock index (index 0 is the zero clock and always holds 0).
pub fn max_constants(ta: &TimedAutomaton) -> Vec<Vec<i64>> {
    System::from_ta(ta).max_constants()
}

pub fn build_zone_graph(ta: &TimedAutomaton) -> ZoneGraph {
    build_system(System::from_ta(ta))
}

/// Forward exploration and guard decomposition only, before any pre-stability splitting.
pub fn explore(ta: &TimedAutomaton) -> ZoneGraph {
    let sys = System::from_ta(ta);
    let zones = forward(&sys);
    finish(sys, zones)
}

pub(crate) fn build_system(sys: System) -> ZoneGraph {
    let zones = forward(&sys);
    let zones = stabilize(&sys, zones, Passes::ALL);
    finish(sys, zones)
}

/// Merges pieces whose union is itself a zone; a merged piece takes the
/// position of its first part.
fn coalesce(mut pieces: Vec<Dbm>) -> Vec<Dbm> {
    let mut i = 0;
    while i < pieces.len() {
        let mut j = i + 1;
        let mut merged = false;
        while j < pieces.len() {
            if let Some(u) = pieces[i].convex_union(&pieces[j]) {
                pieces[i] = u;
                pieces.remove(j);
                merged = true;
            } else {
                j += 1;
            }
        }
        if !merged {
            i += 1;
        }
    }
    pieces
}

/// Whether the union of `cover` contains `z`.
pub(crate) fn covered_by(z: &Dbm, cover: &[Dbm]) -> bool {
    let mut rest = vec![z.clone()];
    for c in cover {
        rest = rest.into_iter().flat_map(|p| p.split_difference(c).1).collect();
        if rest.is_empty() {
            return true;
        }
    }
    rest.is_empty()
}

fn is_cut(z: &Dbm, splitter: &Dbm) -> bool {
    z.intersects(splitter) && !z.is_subset_of(splitter)
}

/// Phase one: reachable zones per location, pairwise disjoint, each uniform
/// on the guards and probes of its location.
fn forward(sys: &System) -> Vec<(usize, Dbm)> {
    let n = sys.num_clocks();
    let max = sys.max_constants();
    let mut zones: Vec<(usize, Dbm)> = Vec::new();
    let mut by_loc: Vec<Vec<usize>> = vec![Vec::new(); sys.locations.len()];
    let mut queue = VecDeque::new();

    let mut add =
        |loc: usize, z: Dbm, zones: &mut Vec<(usize, Dbm)>, queue: &mut VecDeque<usize>| {
            let mut fresh = vec![z];
            for &k in &by_loc[loc] {
                let covered: &Dbm = &zones[k].1;
                fresh = fresh
                    .into_iter()
                    .flat_map(|p| p.split_difference(covered).1)
                    .collect();
                if fresh.is_empty() {
                    return;
                }
            }
            for p in coalesce(fresh) {
                by_loc[loc].push(zones.len());
                queue.push_back(zones.len());
                zones.push((loc, p));
            }
        };

    for start in Dbm::zero(n).future().saturate(&max[sys.initial]) {
        add(sys.initial, start, &mut zones, &mut queue);
    }
    while let Some(k) = queue.pop_front() {
        let (loc, z) = zones[k].clone();
        for e in sys.edges.iter().filter(|e| e.from == loc) {
            let Some(enabled) = z.constrain_guard(&e.guard) else {
                continue;
            };
            let succ = enabled.reset(e.resets.iter().copied()).future();
            for piece in succ.saturate(&max[e.to]) {
                add(e.to, piece, &mut zones, &mut queue);
            }
        }
    }

    let mut out = Vec::new();
    for (loc, z) in zones {
        let mut g = Guard::tt();
        for e in sys.edges.iter().filter(|e| e.from == loc) {
            g = g.conjoin(&e.guard);
        }
        for p in &sys.probes[loc] {
            g = g.conjoin(p);
        }
        out.extend(z.canonical_decompose(&g).into_iter().map(|p| (loc, p)));
    }
    out
}

/// Phase two: split zones until no splitter cuts any zone.
fn stabilize(sys: &System, mut zones: Vec<(usize, Dbm)>, passes: Passes) -> Vec<(usize, Dbm)> {
    let nloc = sys.locations.len();
    let mut by_loc: Vec<Vec<usize>> = vec![Vec::new(); nloc];
    for (k, (l, _)) in zones.iter().enumerate() {
        by_loc[*l].push(k);
    }
    let mut preds_of: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nloc];
    for e in &sys.edges {
        preds_of[e.to].insert(e.from);
    }
    let max = sys.max_constants();
    let mut queued = vec![true; zones.len()];
    let mut work: VecDeque<usize> = (0..zones.len()).collect();

    while let Some(k) = work.pop_front() {
        queued[k] = false;
        let (loc, z) = zones[k].clone();
        let Some(splitter) = find_splitter(sys, &zones, &by_loc, loc, k, &z, &max, passes) else {
            continue;
        };
        let (inter, pieces) = z.split_difference(&splitter);
        zones[k].1 = inter.expect("a cutting splitter meets the zone");
        for p in coalesce(pieces) {
            by_loc[loc].push(zones.len());
            zones.push((loc, p));
            queued.push(false);
        }
        let mut touched: Vec<usize> = by_loc[loc].clone();
        for &pl in &preds_of[loc] {
            touched.extend(by_loc[pl].iter().copied());
        }
        for t in touched {
            if !queued[t] {
                queued[t] = true;
                work.push_back(t);
            }
        }
    }
    zones
}

fn find_splitter(
    sys: &System,
    zones: &[(usize, Dbm)],
    by_loc: &[Vec<usize>],
    loc: usize,
    k: usize,
    z: &Dbm,
    max: &[Vec<i64>],
    passes: Passes,
) -> Option<Dbm> {
    if passes.discrete {
        for e in sys.edges.iter().filter(|e| e.from == loc) {
            let Some(enabled) = z.constrain_guard(&e.guard) else {
                continue;
            };
            if enabled != *z {
                return Dbm::from_guard(sys.num_clocks(), &e.guard);
            }
            let image = z.reset(e.resets.iter().copied());
            for &t in &by_loc[e.to] {
                if !image.intersects(&zones[t].1) {
                    continue;
                }
                if let Some(pre) = zones[t].1.inverse_reset(e.resets.iter().copied()) {
                    if is_cut(z, &pre) {
                        return Some(pre);
                    }
                }
            }
        }
    }
    if passes.delay {
        let up = z.future();
        for &t in &by_loc[loc] {
            if t == k {
                continue;
            }
            let other = &zones[t].1;
            if up.intersects(other) {
                let past = other.past();
                if is_cut(z, &past) {
                    return Some(past);
                }
            }
            let other_up = other.future();
            if other_up.intersects(z) {
                let reach = other_up.saturate(&max[loc]);
                if !covered_by(z, &reach) {
                    return reach.into_iter().find(|s| is_cut(z, s));
                }
            }
        }
    }
    None
}

/// Orders nodes by location, computes edges and base flags.
fn finish(sys: System, mut zones: Vec<(usize, Dbm)>) -> ZoneGraph {
    let n = sys.num_clocks();
    // stable sort keeps creation order within a location
    zones.sort_by_key(|(l, _)| *l);
    let mut by_loc: Vec<Vec<usize>> = vec![Vec::new(); sys.locations.len()];
    for (k, (l, _)) in zones.iter().enumerate() {
        by_loc[*l].push(k);
    }

    let mut action_edges = Vec::new();
    for (k, (loc, z)) in zones.iter().enumerate() {
        for (ei, e) in sys.edges.iter().enumerate() {
            if e.from != *loc {
                continue;
            }
            let Some(enabled) = z.constrain_guard(&e.guard) else {
                continue;
            };
            let image = enabled.reset(e.resets.iter().copied());
            for &t in &by_loc[e.to] {
                if image.intersects(&zones[t].1) {
                    action_edges.push(ActionEdge {
                        src: k,
                        edge: ei,
                        action: e.action,
                        dst: t,
                    });
                }
            }
        }
    }

    // delay successors other than the node itself
    let succ: Vec<Vec<usize>> = zones
        .iter()
        .enumerate()
        .map(|(k, (loc, z))| {
            let up = z.future();
            by_loc[*loc]
                .iter()
                .copied()
                .filter(|&t| t != k && up.intersects(&zones[t].1))
                .collect()
        })
        .collect();
    let mut delay_edges = Vec::new();
    let mut has_pred = vec![false; zones.len()];
    for (k, ds) in succ.iter().enumerate() {
        for &w in ds {
            has_pred[w] = true;
            let later: BTreeSet<usize> = succ[w].iter().copied().collect();
            if ds.iter().all(|&o| o == w || later.contains(&o)) {
                delay_edges.push((k, w));
            }
        }
    }

    let origin = vec![0i64; n];
    let initial = by_loc[sys.initial]
        .iter()
        .copied()
        .find(|&k| zones[k].1.contains_scaled(&origin, 1))
        .expect("the initial valuation is reachable");

    let nodes = zones
        .into_iter()
        .enumerate()
        .map(|(id, (location, zone))| ZoneNode {
            id,
            location,
            zone,
            is_base: !has_pred[id],
        })
        .collect();
    ZoneGraph {
        nodes,
        initial,
        action_edges,
        delay_edges,
        sys,
    }
}

impl ZoneGraph {
    pub fn clocks(&self) -> &[String] {
        &self.sys.clocks
    }

    pub fn location_name(&self, loc: usize) -> &str {
        &self.sys.locations[loc]
    }

    pub fn num_locations(&self) -> usize {
        self.sys.locations.len()
    }

    pub fn action_name(&self, action: usize) -> &str {
        &self.sys.actions[action]
    }

    pub(crate) fn system(&self) -> &System {
        &self.sys
    }

    /// Node ids of a location, in node order.
    pub fn nodes_at(&self, loc: usize) -> Vec<usize> {
        self.nodes
            .iter()
            .filter(|n| n.location == loc)
            .map(|n| n.id)
            .collect()
    }

    pub fn delay_successor(&self, node: usize) -> Option<usize> {
        self.delay_edges
            .iter()
            .find(|&&(s, _)| s == node)
            .map(|&(_, t)| t)
    }

    pub fn delay_predecessor(&self, node: usize) -> Option<usize> {
        self.delay_edges
            .iter()
            .find(|&&(_, t)| t == node)
            .map(|&(s, _)| s)
    }

    /// The action step taken from `node` along automaton edge `edge`, if enabled.
    pub fn action_target(&self, node: usize, edge: usize) -> Option<usize> {
        self.action_edges
            .iter()
            .find(|a| a.src == node && a.edge == edge)
            .map(|a| a.dst)
    }

    /// Re-runs only the delay splits (predecessor and successor sides) to a fixpoint.
    pub fn prestabilize_delay(&self) -> ZoneGraph {
        self.restabilize(Passes {
            discrete: false,
            delay: true,
        })
    }

    /// Re-runs only the discrete splits to a fixpoint.
    pub fn prestabilize_discrete(&self) -> ZoneGraph {
        self.restabilize(Passes {
            discrete: true,
            delay: false,
        })
    }

    fn restabilize(&self, passes: Passes) -> ZoneGraph {
        let zones = self
            .nodes
            .iter()
            .map(|n| (n.location, n.zone.clone()))
            .collect();
        finish(self.sys.clone(), stabilize(&self.sys, zones, passes))
    }

    /// Structural problems found by DBM reasoning: overlapping zones of one
    /// location and non-pre-stable pairs. Empty for a finished graph.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let by_loc: Vec<Vec<usize>> = (0..self.num_locations())
            .map(|l| self.nodes_at(l))
            .collect();
        let zones: Vec<(usize, Dbm)> = self
            .nodes
            .iter()
            .map(|n| (n.location, n.zone.clone()))
            .collect();
        let max = self.sys.max_constants();
        for node in &self.nodes {
            let loc = node.location;
            for &t in &by_loc[loc] {
                if t > node.id && node.zone.intersects(&self.nodes[t].zone) {
                    out.push(format!("nodes {} and {} overlap", node.id, t));
                }
            }
            if let Some(s) = find_splitter(
                &self.sys,
                &zones,
                &by_loc,
                loc,
                node.id,
                &node.zone,
                &max,
                Passes::ALL,
            ) {
                out.push(format!("node {} is cut by {:?}", node.id, s));
            }
        }
        let mut seen = BTreeSet::new();
        for &(s, _) in &self.delay_edges {
            if !seen.insert(s) {
                out.push(format!("node {s} has two immediate delay successors"));
            }
        }
        out
    }

    /// Graphviz rendering: one line per node, one per edge.
    pub fn export_dot(&self) -> Vec<u8> {
        let esc = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
        let mut out = String::from("digraph zonegraph {\n");
        for n in &self.nodes {
            let loc = esc(self.location_name(n.location));
            let zone = esc(&n.zone.render(self.clocks()));
            let _ = writeln!(
                out,
                "  n{} [label=\"{}: {}\", location=\"{}\", zone=\"{}\", base={}{}];",
                n.id,
                loc,
                zone,
                loc,
                zone,
                n.is_base,
                if n.id == self.initial {
                    ", initial=true"
                } else {
                    ""
                }
            );
        }
        for a in &self.action_edges {
            let _ = writeln!(
                out,
                "  n{} -> n{} [label=\"{}\"];",
                a.src,
                a.dst,
                esc(self.action_name(a.action))
            );
        }
        for &(s, t) in &self.delay_edges {
            let _ = writeln!(out, "  n{s} -> n{t} [label=\"ε\", style=dashed];");
        }
        out.push_str("}\n");
        out.into_bytes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ta::parse_ta;

    fn ta(doc: &str) -> TimedAutomaton {
        parse_ta(doc.as_bytes()).unwrap()
    }

    #[test]
    fn max_constants_single_edge() {
        let a = ta(
            r#"{"clocks": ["x"], "alphabet": ["a"], "locations": ["l0", "l1"], "initial": "l0",
            "edges": [{"from": "l0", "to": "l1", "action": "a", "guard": [{"clock": "x", "rel": "<=", "k": 3}]}]}"#,
        );
        let m = max_constants(&a);
        assert_eq!(m[0][1], 3);
        assert_eq!(m[1][1], -1);
    }

    #[test]
    fn max_constants_cycle_and_reset() {
        let cyc = ta(
            r#"{"clocks": ["x"], "alphabet": ["a"], "locations": ["l0", "l1"], "initial": "l0",
            "edges": [{"from": "l0", "to": "l1", "action": "a", "guard": "true"},
                      {"from": "l1", "to": "l0", "action": "a", "guard": [{"clock": "x", "rel": "<=", "k": 3}]}]}"#,
        );
        let m = max_constants(&cyc);
        assert_eq!((m[0][1], m[1][1]), (3, 3));
        let cut = ta(
            r#"{"clocks": ["x"], "alphabet": ["a"], "locations": ["l0", "l1"], "initial": "l0",
            "edges": [{"from": "l0", "to": "l1", "action": "a", "guard": "true", "resets": ["x"]},
                      {"from": "l1", "to": "l1", "action": "a", "guard": [{"clock": "x", "rel": "<=", "k": 3}]}]}"#,
        );
        let m = max_constants(&cut);
        assert_eq!((m[0][1], m[1][1]), (-1, 3));
    }

    #[test]
    fn single_location_graph() {
        let a = ta(
            r#"{"clocks": ["x"], "alphabet": [], "locations": ["l0"], "initial": "l0", "edges": []}"#,
        );
        let g = build_zone_graph(&a);
        assert_eq!(g.nodes.len(), 1);
        assert!(g.nodes[0].zone.is_universe());
        assert!(g.nodes[0].is_base);
        assert!(g.action_edges.is_empty() && g.delay_edges.is_empty());
        let dot = String::from_utf8(g.export_dot()).unwrap();
        assert_eq!(dot.lines().filter(|l| l.contains("[label")).count(), 1);
    }

    #[test]
    fn discrete_split_on_guard() {
        let a = ta(
            r#"{"clocks": ["x"], "alphabet": ["a"], "locations": ["l0", "l1"], "initial": "l0",
            "edges": [{"from": "l0", "to": "l1", "action": "a", "guard": [{"clock": "x", "rel": "<=", "k": 1}]}]}"#,
        );
        let g = build_zone_graph(&a);
        let names = g.clocks().to_vec();
        let l0: Vec<String> = g
            .nodes_at(0)
            .iter()
            .map(|&k| g.nodes[k].zone.render(&names))
            .collect();
        assert_eq!(l0, ["x<=1", "x>1"]);
        assert!(g.violations().is_empty());
    }

    #[test]
    fn stabilized_graph_is_fixpoint() {
        let a = ta(
            r#"{"clocks": ["x", "y"], "alphabet": ["a", "b"], "locations": ["l0", "l1", "l2"], "initial": "l0",
            "edges": [{"from": "l0", "to": "l1", "action": "a", "guard": [{"clock": "x", "rel": "<=", "k": 4}], "resets": ["x"]},
                      {"from": "l1", "to": "l2", "action": "b", "guard": [{"clock": "x", "rel": ">", "k": 5}, {"clock": "y", "rel": ">", "k": 7}]}]}"#,
        );
        let g = build_zone_graph(&a);
        assert!(g.violations().is_empty(), "{:?}", g.violations());
        assert_eq!(g.prestabilize_delay().nodes.len(), g.nodes.len());
        assert_eq!(g.prestabilize_discrete().nodes.len(), g.nodes.len());
        let raw = explore(&a);
        assert!(raw.nodes.len() < g.nodes.len());
    }
}
