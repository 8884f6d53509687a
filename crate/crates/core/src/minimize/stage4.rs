use std::collections::BTreeSet;

use serde::Serialize;

use super::coloring::{color, Graph};
use crate::ta::{Atom, ClockId, Edge, Guard, TimedAutomaton};
use crate::zone_graph::{build_zone_graph, ZoneGraph};

/// Active clocks per location index.
pub type ActiveClocks = Vec<BTreeSet<ClockId>>;

/// Least fixpoint of the active-clock recurrence, with the number of rounds
/// that changed something.
pub fn active_clocks(ta: &TimedAutomaton) -> (ActiveClocks, usize) {
    let loc = |name: &str| ta.location_index(name).unwrap();
    let mut act: ActiveClocks = vec![BTreeSet::new(); ta.locations.len()];
    for e in &ta.edges {
        act[loc(&e.from)].extend(e.guard.clocks());
    }
    let mut rounds = 0;
    loop {
        let prev = act.clone();
        for e in &ta.edges {
            let carried: Vec<ClockId> = prev[loc(&e.to)].difference(&e.resets).copied().collect();
            act[loc(&e.from)].extend(carried);
        }
        if act == prev {
            return (act, rounds);
        }
        rounds += 1;
    }
}

/// Drops resets of clocks that are not active at the edge's target.
pub fn remove_redundant_resets(ta: &TimedAutomaton, act: &ActiveClocks) -> TimedAutomaton {
    let mut out = ta.clone();
    for e in &mut out.edges {
        let live = &act[ta.location_index(&e.to).unwrap()];
        e.resets.retain(|c| live.contains(c));
    }
    out
}

/// Per location, `x - y` for every pair of clocks when it is the same in all
/// reachable states (`None` where it varies). Unreached locations get `None`.
type Differences = Vec<Option<Vec<Vec<Option<i64>>>>>;

fn differences(ta: &TimedAutomaton, zg: &ZoneGraph) -> Differences {
    let n = ta.num_clocks();
    let mut diff: Differences = vec![None; ta.locations.len()];
    diff[ta.initial_index()] = Some(vec![vec![Some(0); n + 1]; n + 1]);
    loop {
        let mut changed = false;
        for ae in &zg.action_edges {
            let src = zg.nodes[ae.src].location;
            let Some(before) = diff[src].clone() else { continue };
            let e = &ta.edges[ae.edge];
            let z = zg.nodes[ae.src].zone.constrain_guard(&e.guard).expect("enabled edge");
            let reset = |c: usize| e.resets.contains(&ClockId(c));
            let value = |c: usize| z.fixed_difference(c, 0);
            let mut entry = vec![vec![None; n + 1]; n + 1];
            for x in 1..=n {
                for y in 1..=n {
                    entry[x][y] = match (reset(x), reset(y)) {
                        (true, true) => Some(0),
                        (true, false) => value(y).map(|v| -v),
                        (false, true) => value(x),
                        (false, false) => before[x][y].or(z.fixed_difference(x, y)),
                    };
                }
            }
            let dst = zg.nodes[ae.dst].location;
            let joined = match &diff[dst] {
                None => entry,
                Some(old) => (0..=n)
                    .map(|x| (0..=n).map(|y| if old[x][y] == entry[x][y] { old[x][y] } else { None }).collect())
                    .collect(),
            };
            if diff[dst].as_ref() != Some(&joined) {
                diff[dst] = Some(joined);
                changed = true;
            }
        }
        if !changed {
            return diff;
        }
    }
}

/// How aggressively active clocks are grouped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    /// `x - y = k` for any fixed integer `k`.
    Offsets,
    /// Only clocks that are always equal.
    Equal,
    Singletons,
}

/// A class of active clocks at one location: members with their offset to
/// the first member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClockClass {
    pub location: usize,
    pub members: Vec<(ClockId, i64)>,
}

impl ClockClass {
    fn offset(&self, c: ClockId) -> Option<i64> {
        self.members.iter().find(|m| m.0 == c).map(|m| m.1)
    }
}

pub fn partition_active_clocks(
    ta: &TimedAutomaton,
    zg: &ZoneGraph,
    act: &ActiveClocks,
    grouping: Grouping,
) -> Vec<Vec<ClockClass>> {
    let diff = differences(ta, zg);
    act.iter()
        .enumerate()
        .map(|(l, clocks)| {
            let mut classes: Vec<ClockClass> = Vec::new();
            'clocks: for &x in clocks {
                if let (Some(d), true) = (&diff[l], grouping != Grouping::Singletons) {
                    for class in classes.iter_mut() {
                        let (r, _) = class.members[0];
                        let Some(k) = d[x.index()][r.index()] else { continue };
                        if grouping == Grouping::Equal && k != 0 {
                            continue;
                        }
                        let consistent = class
                            .members
                            .iter()
                            .all(|&(y, off)| d[x.index()][y.index()] == Some(k - off));
                        if consistent {
                            class.members.push((x, k));
                            continue 'clocks;
                        }
                    }
                }
                classes.push(ClockClass {
                    location: l,
                    members: vec![(x, 0)],
                });
            }
            classes
        })
        .collect()
}

/// Classes merged across locations, and which merged vertices share a location.
#[derive(Clone, Debug)]
pub struct ClockGraph {
    /// Each vertex as (location, class index) pairs.
    pub vertices: Vec<Vec<(usize, usize)>>,
    pub graph: Graph,
}

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

/// `None` when two classes of one location end up in the same vertex.
pub fn build_clock_graph(ta: &TimedAutomaton, classes: &[Vec<ClockClass>]) -> Option<ClockGraph> {
    let ids: Vec<(usize, usize)> = classes
        .iter()
        .enumerate()
        .flat_map(|(l, cs)| (0..cs.len()).map(move |i| (l, i)))
        .collect();
    let id = |l: usize, i: usize| ids.iter().position(|&p| p == (l, i)).unwrap();
    let class_of = |l: usize, c: ClockId| classes[l].iter().position(|t| t.offset(c).is_some());
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    for e in &ta.edges {
        let (l, l2) = (ta.location_index(&e.from).unwrap(), ta.location_index(&e.to).unwrap());
        for (j, t) in classes[l2].iter().enumerate() {
            for &(c, _) in &t.members {
                if e.resets.contains(&c) {
                    continue;
                }
                let i = class_of(l, c).expect("carried clocks are active at the source");
                let (a, b) = (find(&mut parent, id(l, i)), find(&mut parent, id(l2, j)));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut vertices: Vec<Vec<(usize, usize)>> = Vec::new();
    for (k, &p) in ids.iter().enumerate() {
        let r = find(&mut parent, k);
        match roots.iter().position(|&x| x == r) {
            Some(v) => vertices[v].push(p),
            None => {
                roots.push(r);
                vertices.push(vec![p]);
            }
        }
    }
    let mut graph = Graph::new(vertices.len());
    for l in 0..classes.len() {
        let here: Vec<usize> = (0..vertices.len())
            .filter(|&v| vertices[v].iter().any(|p| p.0 == l))
            .collect();
        for (a, &u) in here.iter().enumerate() {
            if vertices[u].iter().filter(|p| p.0 == l).count() > 1 {
                return None;
            }
            for &w in &here[a + 1..] {
                graph.add_edge(u, w);
            }
        }
    }
    Some(ClockGraph { vertices, graph })
}

/// Solves for the shift of every class so that `x = clock + shift + offset`
/// holds wherever the class is active. Resets of a whole class and the
/// initial location pin the shift to zero; carried clocks propagate it.
fn shifts(ta: &TimedAutomaton, classes: &[Vec<ClockClass>]) -> Option<Vec<Vec<i64>>> {
    let class_of = |l: usize, c: ClockId| classes[l].iter().position(|t| t.offset(c).is_some()).unwrap();
    // (p, q, w): shift(p) = shift(q) + w
    let mut links: Vec<((usize, usize), (usize, usize), i64)> = Vec::new();
    let mut anchors: Vec<(usize, usize, i64)> = Vec::new();
    let l0 = ta.initial_index();
    for (i, t) in classes[l0].iter().enumerate() {
        anchors.extend(t.members.iter().map(|m| (l0, i, -m.1)));
    }
    for e in &ta.edges {
        let (l, l2) = (ta.location_index(&e.from).unwrap(), ta.location_index(&e.to).unwrap());
        for (j, t) in classes[l2].iter().enumerate() {
            let kept: Vec<&(ClockId, i64)> = t.members.iter().filter(|m| !e.resets.contains(&m.0)).collect();
            if kept.is_empty() {
                for &(_, off) in &t.members {
                    anchors.push((l2, j, -off));
                }
            }
            for &&(c, off2) in &kept {
                let i = class_of(l, c);
                let off = classes[l][i].offset(c).unwrap();
                links.push(((l2, j), (l, i), off - off2));
            }
        }
    }
    let mut s: Vec<Vec<Option<i64>>> = classes.iter().map(|cs| vec![None; cs.len()]).collect();
    let starts: Vec<(usize, usize, i64)> = anchors
        .iter()
        .copied()
        .chain(
            classes
                .iter()
                .enumerate()
                .flat_map(|(l, cs)| (0..cs.len()).map(move |i| (l, i, 0))),
        )
        .collect();
    for (l, i, v) in starts {
        if s[l][i].is_some() {
            continue;
        }
        s[l][i] = Some(v);
        let mut stack = vec![(l, i)];
        while let Some(a) = stack.pop() {
            let sa = s[a.0][a.1].unwrap();
            for &(p, q, w) in &links {
                let (other, val) = if p == a {
                    (q, sa - w)
                } else if q == a {
                    (p, sa + w)
                } else {
                    continue;
                };
                match s[other.0][other.1] {
                    Some(x) if x != val => return None,
                    Some(_) => {}
                    None => {
                        s[other.0][other.1] = Some(val);
                        stack.push(other);
                    }
                }
            }
        }
    }
    for &(l, i, v) in &anchors {
        if s[l][i] != Some(v) {
            return None;
        }
    }
    Some(s.into_iter().map(|cs| cs.into_iter().map(Option::unwrap).collect()).collect())
}

#[derive(Clone, Debug)]
pub struct Rename {
    pub automaton: TimedAutomaton,
    pub grouping: Grouping,
    /// Original clocks represented by each new clock.
    pub names: Vec<(String, Vec<String>)>,
    pub active_rounds: usize,
}

fn rename_with(ta: &TimedAutomaton, act: &ActiveClocks, grouping: Grouping) -> Option<Rename> {
    let zg = build_zone_graph(ta);
    let classes = partition_active_clocks(ta, &zg, act, grouping);
    let cg = build_clock_graph(ta, &classes)?;
    let shift = shifts(ta, &classes)?;
    let (colors, count) = color(&cg.graph);
    if count > ta.num_clocks() {
        return None;
    }
    let mut color_of: Vec<Vec<usize>> = classes.iter().map(|cs| vec![0; cs.len()]).collect();
    for (v, members) in cg.vertices.iter().enumerate() {
        for &(l, i) in members {
            color_of[l][i] = colors[v];
        }
    }
    let class_of = |l: usize, c: ClockId| classes[l].iter().position(|t| t.offset(c).is_some());
    let clocks: Vec<String> = (0..count).map(|k| format!("c{k}")).collect();
    let mut edges = Vec::new();
    'edges: for e in &ta.edges {
        let (l, l2) = (ta.location_index(&e.from).unwrap(), ta.location_index(&e.to).unwrap());
        let mut guard = Guard::tt();
        for a in e.guard.atoms() {
            let i = class_of(l, a.clock).expect("guard clocks are active");
            let off = shift[l][i] + classes[l][i].offset(a.clock).unwrap();
            let k = a.k - off;
            let clock = ClockId(color_of[l][i] + 1);
            if k < 0 {
                if a.rel.is_upper() {
                    continue 'edges;
                }
                continue;
            }
            guard.insert(Atom::new(clock, a.rel, k));
        }
        let resets = classes[l2]
            .iter()
            .enumerate()
            .filter(|(_, t)| t.members.iter().all(|m| e.resets.contains(&m.0)))
            .map(|(j, _)| ClockId(color_of[l2][j] + 1))
            .collect();
        edges.push(Edge {
            from: e.from.clone(),
            to: e.to.clone(),
            action: e.action.clone(),
            guard,
            resets,
        });
    }
    let names = clocks
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let orig: BTreeSet<&String> = cg
                .vertices
                .iter()
                .enumerate()
                .filter(|(v, _)| colors[*v] == k)
                .flat_map(|(_, ms)| ms.iter().flat_map(|&(l, i)| classes[l][i].members.iter()))
                .map(|m| &ta.clocks[m.0.index() - 1])
                .collect();
            (name.clone(), orig.into_iter().cloned().collect())
        })
        .collect();
    Some(Rename {
        automaton: TimedAutomaton {
            clocks,
            alphabet: ta.alphabet.clone(),
            locations: ta.locations.clone(),
            initial: ta.initial.clone(),
            edges,
        },
        grouping,
        names,
        active_rounds: 0,
    })
}

/// Renames clocks to one clock per color of the clock graph.
pub fn stage4_rename(ta: &TimedAutomaton) -> Rename {
    let (act, rounds) = active_clocks(ta);
    if ta.num_clocks() == 0 {
        return Rename {
            automaton: ta.clone(),
            grouping: Grouping::Singletons,
            names: Vec::new(),
            active_rounds: rounds,
        };
    }
    let cleaned = remove_redundant_resets(ta, &act);
    [Grouping::Offsets, Grouping::Equal, Grouping::Singletons]
        .into_iter()
        .find_map(|g| rename_with(&cleaned, &act, g))
        .map(|r| Rename {
            active_rounds: rounds,
            ..r
        })
        .expect("singleton classes always admit a renaming")
}
