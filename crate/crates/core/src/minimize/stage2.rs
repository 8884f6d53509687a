use std::collections::BTreeSet;

use crate::dbm::Dbm;
use crate::ta::{Atom, ClockId, Edge, Guard, Rel, TimedAutomaton};
use crate::zone_graph::{build_zone_graph, covered_by, ZoneGraph};

/// Result of splitting: the new automaton and, per original location, the
/// names of its copies.
#[derive(Clone, Debug)]
pub struct Split {
    pub automaton: TimedAutomaton,
    pub copies: Vec<(String, Vec<String>)>,
    /// Locations with several base zones that had to stay whole because
    /// no guard could route their incoming edges exactly.
    pub kept_whole: Vec<String>,
}

/// Single-clock bounds of `z` on `clocks`, skipping the trivial `x >= 0`.
pub(crate) fn bounding_box(z: &Dbm, clocks: impl IntoIterator<Item = ClockId>) -> Guard {
    let mut g = Guard::tt();
    for c in clocks {
        let i = c.index();
        let up = z.get(i, 0);
        if let Some(m) = up.value() {
            g.insert(Atom::new(c, if up.is_strict() { Rel::Lt } else { Rel::Le }, m));
        }
        let lo = z.get(0, i);
        if let Some(m) = lo.value() {
            if m < 0 || lo.is_strict() {
                g.insert(Atom::new(c, if lo.is_strict() { Rel::Gt } else { Rel::Ge }, -m));
            }
        }
    }
    g
}

fn hull_of(pieces: &[Dbm]) -> Dbm {
    pieces[1..].iter().fold(pieces[0].clone(), |h, p| h.hull(p))
}

/// Whether `g` selects exactly `target` inside `context`.
fn exact(g: &Guard, context: &[Dbm], target: &[Dbm]) -> bool {
    target.iter().all(|p| p.satisfies_guard(g))
        && context
            .iter()
            .filter_map(|c| c.constrain_guard(g))
            .all(|c| covered_by(&c, target))
}

/// Drops atoms in canonical order while the guard stays exact.
fn simplify(mut g: Guard, context: &[Dbm], target: &[Dbm]) -> Guard {
    let atoms: Vec<Atom> = g.atoms().copied().collect();
    for a in atoms {
        g.remove(&a);
        if !exact(&g, context, target) {
            g.insert(a);
        }
    }
    g
}

fn separator(orig: &Guard, n: usize, context: &[Dbm], target: &[Dbm]) -> Option<Guard> {
    let hull = hull_of(target);
    let all = (1..=n).map(ClockId);
    [orig.clone(), bounding_box(&hull, orig.clocks()), bounding_box(&hull, all)]
        .into_iter()
        .find(|g| exact(g, context, target))
        .map(|g| simplify(g, context, target))
}

struct Plan {
    /// Per location, per copy, the region-closed context of that copy.
    contexts: Vec<Vec<Vec<Dbm>>>,
    /// Copy index of every zone-graph node.
    copy_of: Vec<usize>,
}

fn plan(g: &ZoneGraph, split: &[bool]) -> Plan {
    let max = g.system().max_constants();
    let mut contexts = Vec::new();
    let mut copy_of = vec![0; g.nodes.len()];
    for loc in 0..g.num_locations() {
        let nodes = g.nodes_at(loc);
        if !split[loc] {
            contexts.push(vec![nodes.iter().map(|&k| g.nodes[k].zone.clone()).collect()]);
            continue;
        }
        let ctx: Vec<Vec<Dbm>> = nodes
            .iter()
            .filter(|&&k| g.nodes[k].is_base)
            .map(|&k| g.nodes[k].zone.future().saturate(&max[loc]))
            .collect();
        for &k in &nodes {
            copy_of[k] = ctx
                .iter()
                .position(|c| covered_by(&g.nodes[k].zone, c))
                .expect("checked by the caller");
        }
        contexts.push(ctx);
    }
    Plan { contexts, copy_of }
}

/// Whether every node of `loc` lies in the closure of some base zone's future.
fn splittable(g: &ZoneGraph, loc: usize) -> bool {
    let max = g.system().max_constants();
    let nodes = g.nodes_at(loc);
    let ctx: Vec<Vec<Dbm>> = nodes
        .iter()
        .filter(|&&k| g.nodes[k].is_base)
        .map(|&k| g.nodes[k].zone.future().saturate(&max[loc]))
        .collect();
    ctx.len() > 1 && nodes.iter().all(|&k| ctx.iter().any(|c| covered_by(&g.nodes[k].zone, c)))
}

/// Splits every location into one copy per base zone.
pub fn stage2_split(ta: &TimedAutomaton) -> Split {
    let g = build_zone_graph(ta);
    let nl = ta.locations.len();
    let n = ta.num_clocks();
    let mut split: Vec<bool> = (0..nl).map(|l| splittable(&g, l)).collect();
    let edge_loc: Vec<(usize, usize)> = ta
        .edges
        .iter()
        .map(|e| (ta.location_index(&e.from).unwrap(), ta.location_index(&e.to).unwrap()))
        .collect();

    'retry: loop {
        let p = plan(&g, &split);
        // (source loc, source copy, edge, target copy, guard)
        let mut new_edges = Vec::new();
        for (l, ctxs) in p.contexts.iter().enumerate() {
            for (k, ctx) in ctxs.iter().enumerate() {
                for (ei, e) in ta.edges.iter().enumerate().filter(|(i, _)| edge_loc[*i].0 == l) {
                    let mut by_copy: Vec<Vec<Dbm>> = vec![Vec::new(); p.contexts[edge_loc[ei].1].len()];
                    for ae in g.action_edges.iter().filter(|a| a.edge == ei) {
                        for c in ctx {
                            if let Some(z) = c.intersect(&g.nodes[ae.src].zone) {
                                by_copy[p.copy_of[ae.dst]].push(z);
                            }
                        }
                    }
                    let targets = by_copy.iter().filter(|t| !t.is_empty()).count();
                    for (j, target) in by_copy.iter().enumerate() {
                        if target.is_empty() {
                            continue;
                        }
                        let guard = if targets == 1 {
                            Some(simplify(e.guard.clone(), ctx, target))
                        } else {
                            separator(&e.guard, n, ctx, target)
                        };
                        match guard {
                            Some(guard) => new_edges.push((l, k, ei, j, guard)),
                            None => {
                                split[edge_loc[ei].1] = false;
                                continue 'retry;
                            }
                        }
                    }
                }
            }
        }
        return assemble(ta, &g, &split, &p, new_edges);
    }
}

fn assemble(
    ta: &TimedAutomaton,
    g: &ZoneGraph,
    split: &[bool],
    p: &Plan,
    new_edges: Vec<(usize, usize, usize, usize, Guard)>,
) -> Split {
    let taken: BTreeSet<&str> = ta.locations.iter().map(|s| s.as_str()).collect();
    let mut used = BTreeSet::new();
    let names: Vec<Vec<String>> = ta
        .locations
        .iter()
        .enumerate()
        .map(|(l, name)| {
            let m = p.contexts[l].len();
            if m == 1 {
                return vec![name.clone()];
            }
            (1..=m)
                .map(|k| {
                    let mut s = format!("{name}_{k}");
                    while taken.contains(s.as_str()) || used.contains(&s) {
                        s.push('\'');
                    }
                    used.insert(s.clone());
                    s
                })
                .collect()
        })
        .collect();
    let l0 = ta.initial_index();
    let initial = names[l0][if split[l0] { p.copy_of[g.initial] } else { 0 }].clone();
    let edges = new_edges
        .into_iter()
        .map(|(l, k, ei, j, guard)| {
            let e = &ta.edges[ei];
            let to = ta.location_index(&e.to).unwrap();
            Edge {
                from: names[l][k].clone(),
                to: names[to][j].clone(),
                action: e.action.clone(),
                guard,
                resets: e.resets.clone(),
            }
        })
        .collect();
    Split {
        automaton: TimedAutomaton {
            clocks: ta.clocks.clone(),
            alphabet: ta.alphabet.clone(),
            locations: names.iter().flatten().cloned().collect(),
            initial,
            edges,
        },
        copies: ta.locations.iter().cloned().zip(names.iter().cloned()).collect(),
        kept_whole: (0..ta.locations.len())
            .filter(|&l| !split[l] && g.nodes_at(l).iter().filter(|&&k| g.nodes[k].is_base).count() > 1)
            .map(|l| ta.locations[l].clone())
            .collect(),
    }
}
