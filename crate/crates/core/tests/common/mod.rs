#![allow(dead_code)]
pub mod checks;


use std::collections::BTreeSet;

use clockmin::dbm::Dbm;
use clockmin::ta::TimedAutomaton;
use clockmin::zone_graph::ZoneGraph;

pub fn data(name: &str) -> Vec<u8> {
    let path = format!("{}/examples/data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn load(name: &str) -> TimedAutomaton {
    clockmin::ta::parse_ta(&data(name)).unwrap()
}

/// All points of `[0, top]^n` on the grid of step `1 / den`, as numerators.
pub fn grid(n: usize, top: i64, den: i64) -> Vec<Vec<i64>> {
    let mut pts = vec![vec![]];
    for _ in 0..n {
        pts = pts
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                (0..=top * den).map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    pts
}

fn node_of(g: &ZoneGraph, loc: usize, p: &[i64], den: i64) -> Option<usize> {
    g.nodes
        .iter()
        .find(|n| n.location == loc && n.zone.contains_scaled(p, den))
        .map(|n| n.id)
}

/// Checks pre-stability by direct evaluation of sample valuations.
///
/// Every sampled point of a node must agree with the node's other samples on
/// which node each automaton edge leads to, and on the set of nodes visited
/// while time passes.
pub fn sampling_violations(ta: &TimedAutomaton, g: &ZoneGraph, per_node: usize) -> Vec<String> {
    let n = ta.num_clocks();
    let top = ta.max_constant() + 1;
    let horizon = 4 * (top + 2);
    let pts = grid(n, top, 2);
    let mut out = Vec::new();
    for node in &g.nodes {
        let inside: Vec<&Vec<i64>> = pts
            .iter()
            .filter(|p| node.zone.contains_scaled(p, 2))
            .collect();
        let step = (inside.len() / per_node).max(1);
        let mut signature: Option<(Vec<Option<usize>>, BTreeSet<usize>)> = None;
        for p in inside.iter().step_by(step) {
            let vals: Vec<f64> = p.iter().map(|&c| c as f64 / 2.0).collect();
            let mut moves = Vec::new();
            for e in &ta.edges {
                if ta.location_index(&e.from) != Some(node.location) {
                    continue;
                }
                if !e.guard.holds(&vals) {
                    moves.push(None);
                    continue;
                }
                let img: Vec<i64> = p
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| {
                        if e.resets.iter().any(|r| r.index() == i + 1) {
                            0
                        } else {
                            c
                        }
                    })
                    .collect();
                let to = ta.location_index(&e.to).unwrap();
                match node_of(g, to, &img, 2) {
                    Some(t) => moves.push(Some(t)),
                    None => out.push(format!("successor of {p:?} along {e:?} is not covered")),
                }
            }
            let mut visited = BTreeSet::new();
            for d in 0..=horizon {
                let q: Vec<i64> = p.iter().map(|&c| 2 * c + d).collect();
                match node_of(g, node.location, &q, 4) {
                    Some(t) => {
                        visited.insert(t);
                    }
                    None => out.push(format!("delay of {p:?} by {d}/4 is not covered")),
                }
            }
            let sig = (moves, visited);
            match &signature {
                None => signature = Some(sig),
                Some(s) if *s != sig => {
                    out.push(format!(
                        "node {} is not pre-stable at {p:?}: {:?} vs {:?}",
                        node.id, s, sig
                    ));
                    break;
                }
                _ => {}
            }
        }
    }
    out
}

/// Bounded zones must have a fully bounding upper facet; several bounding
/// clocks are allowed only when their differences are fixed in the zone.
pub fn facet_violations(g: &ZoneGraph) -> Vec<String> {
    let mut out = Vec::new();
    for node in &g.nodes {
        if !node.zone.is_bounded_above() {
            continue;
        }
        let fb = node.zone.fully_bounding_clocks();
        if fb.is_empty() {
            out.push(format!(
                "node {} {:?} has no fully bounding facet",
                node.id, node.zone
            ));
        }
        for a in &fb {
            for b in &fb {
                if node.zone.fixed_difference(a.index(), b.index()).is_none() {
                    out.push(format!("node {} has distinct bounding facets", node.id));
                }
            }
        }
    }
    out
}

pub fn same_location_overlaps(g: &ZoneGraph) -> usize {
    let mut c = 0;
    for a in &g.nodes {
        for b in &g.nodes {
            if a.id < b.id && a.location == b.location && a.zone.intersects(&b.zone) {
                c += 1;
            }
        }
    }
    c
}

pub fn zone_of(g: &ZoneGraph, node: usize) -> &Dbm {
    &g.nodes[node].zone
}

/// Small automata for the region oracle: at most 2 clocks, 4 locations and constant 4.
pub fn oracle_shape() -> clockmin::random::Shape {
    clockmin::random::Shape {
        clocks: 2,
        locations: 4,
        actions: 2,
        max_edges: 5,
        max_const: 4,
        max_atoms: 2,
    }
}

/// A seeded pair of automata. Most pairs are derived from one another so
/// that both verdicts occur often.
pub fn random_pair(seed: u64) -> (TimedAutomaton, TimedAutomaton) {
    use clockmin::ta::{Atom, ClockId, Guard, Rel};
    use rand::seq::SliceRandom;
    use rand::Rng;

    let mut rng = clockmin::random::rng(seed);
    let shape = oracle_shape();
    let a = clockmin::random::random_automaton(&mut rng, &shape);
    let mut b = a.clone();
    let e = rng.gen_range(0..a.edges.len());
    match seed % 5 {
        0 => b = clockmin::random::random_automaton(&mut rng, &shape),
        1 => {
            let atoms: Vec<Atom> = b.edges[e].guard.atoms().copied().collect();
            if let Some(at) = atoms.choose(&mut rng) {
                let k = (at.k + if rng.gen_bool(0.5) { 1 } else { -1 }).clamp(0, shape.max_const);
                b.edges[e].guard.remove(at);
                b.edges[e].guard.insert(Atom::new(at.clock, at.rel, k));
            } else {
                b.edges[e].guard.insert(Atom::new(ClockId(1), Rel::Le, 2));
            }
        }
        2 => {
            let c = ClockId(rng.gen_range(1..=shape.clocks));
            let k = rng.gen_range(0..=shape.max_const);
            let mut lo = b.edges[e].clone();
            lo.guard = lo.guard.conjoin(&Guard::from_atoms([Atom::new(c, Rel::Le, k)]));
            b.edges[e].guard = b.edges[e].guard.conjoin(&Guard::from_atoms([Atom::new(c, Rel::Gt, k)]));
            b.edges.push(lo);
        }
        3 => {
            b.edges.reverse();
            b.edges.shuffle(&mut rng);
        }
        _ => {
            let c = ClockId(rng.gen_range(1..=shape.clocks));
            if !b.edges[e].resets.remove(&c) {
                b.edges[e].resets.insert(c);
            }
        }
    }
    (a, b)
}

/// Calls `f` on every point of `grid(n, top, den)` without materializing it.
pub fn for_each_point(n: usize, top: i64, den: i64, mut f: impl FnMut(&[i64])) {
    let mut p = vec![0i64; n];
    loop {
        f(&p);
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            if p[i] < top * den {
                p[i] += 1;
                break;
            }
            p[i] = 0;
            i += 1;
        }
    }
}
