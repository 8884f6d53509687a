use crate::bisim::check_timed_bisim;
use crate::dbm::{Bound, Dbm};
use crate::ta::{Atom, ClockId, Guard, Rel, TimedAutomaton};
use crate::zone_graph::{build_zone_graph, ZoneGraph};

#[derive(Clone, Debug)]
pub struct Merge {
    pub automaton: TimedAutomaton,
    pub checks: usize,
    pub accepted: usize,
}

/// The constraint of a clock whose lower facet bounds the whole zone from below.
fn lower_bound(z: &Dbm) -> Option<Atom> {
    let n = z.num_clocks();
    (1..=n).find_map(|x| {
        let lo = z.get(0, x);
        if lo == Bound::LE_ZERO {
            return None;
        }
        let full = (1..=n).filter(|&i| i != x).all(|i| z.get(0, i) == lo.add(z.get(x, i)));
        full.then(|| {
            let rel = if lo.is_strict() { Rel::Gt } else { Rel::Ge };
            Atom::new(ClockId(x), rel, -lo.value().unwrap())
        })
    })
}

fn upper_bound(z: &Dbm) -> Option<Atom> {
    z.fully_bounding_clocks().first().map(|&x| {
        let up = z.get(x.index(), 0);
        let rel = if up.is_strict() { Rel::Lt } else { Rel::Le };
        Atom::new(x, rel, up.value().unwrap())
    })
}

fn interval(lo: Option<Atom>, hi: Option<Atom>) -> Guard {
    Guard::from_atoms(lo.into_iter().chain(hi))
}

/// Nodes of `loc` in delay order, if they form a single chain.
fn chain(g: &ZoneGraph, loc: usize) -> Option<Vec<usize>> {
    let nodes = g.nodes_at(loc);
    let bases: Vec<usize> = nodes.iter().copied().filter(|&k| g.nodes[k].is_base).collect();
    let [mut k] = bases[..] else { return None };
    let mut out = vec![k];
    while let Some(s) = g.delay_successor(k) {
        out.push(s);
        k = s;
    }
    (out.len() == nodes.len()).then_some(out)
}

struct Slot {
    guard: Guard,
    range: (usize, usize),
}

fn range_of(g: &Guard, zones: &[&Dbm]) -> Option<(usize, usize)> {
    let hits: Vec<usize> = (0..zones.len()).filter(|&i| zones[i].constrain_guard(g).is_some()).collect();
    Some((*hits.first()?, *hits.last()?))
}

fn replace(ta: &TimedAutomaton, from: &str, action: &str, swaps: &[(&Guard, &Guard)]) -> TimedAutomaton {
    let mut out = ta.clone();
    for e in out.edges.iter_mut().filter(|e| e.from == from && e.action == action) {
        if let Some((_, new)) = swaps.iter().find(|(old, _)| **old == e.guard) {
            e.guard = (*new).clone();
        }
    }
    out
}

/// Merges adjacent guards of same-action edges when bisimilarity allows it.
pub fn stage3_merge(ta: &TimedAutomaton) -> Merge {
    let mut cur = ta.clone();
    let mut checks = 0;
    let mut accepted = 0;
    for loc in 0..ta.locations.len() {
        let name = ta.locations[loc].clone();
        for action in ta.alphabet.clone() {
            let mut guards: Vec<Guard> = Vec::new();
            for e in cur.edges.iter().filter(|e| e.from == name && e.action == action) {
                if !guards.contains(&e.guard) {
                    guards.push(e.guard.clone());
                }
            }
            if guards.len() < 2 {
                continue;
            }
            let g = build_zone_graph(&cur);
            let Some(nodes) = chain(&g, loc) else { continue };
            let zones: Vec<&Dbm> = nodes
                .iter()
                .map(|&k| &g.nodes[k].zone)
                .filter(|z| guards.iter().any(|gd| z.constrain_guard(gd).is_some()))
                .collect();
            let mut slots: Vec<Slot> = guards
                .into_iter()
                .filter_map(|guard| range_of(&guard, &zones).map(|range| Slot { guard, range }))
                .collect();
            slots.sort_by_key(|s| s.range);
            if slots.len() < 2 {
                continue;
            }

            let mut curr = 0;
            for next in 1..slots.len() {
                let (c, x) = (&slots[curr], &slots[next]);
                let (lo, hi) = (c.range.0.min(x.range.0), c.range.1.max(x.range.1));
                let gap = x.range.0 > c.range.1 + 1;
                let convex = !gap
                    && zones[lo + 1..=hi]
                        .iter()
                        .try_fold(zones[lo].clone(), |u, z| u.convex_union(z))
                        .is_some();
                if !convex {
                    curr = next;
                    continue;
                }
                let strt_lb = lower_bound(zones[c.range.0]);
                let send_ub = |r: (usize, usize)| upper_bound(zones[r.1]);
                let merged = interval(strt_lb, send_ub(x.range));
                let mut candidates = vec![(merged.clone(), merged)];
                if x.range.0 <= c.range.1 {
                    let next_lb = lower_bound(zones[x.range.0]);
                    candidates.push((
                        interval(strt_lb, next_lb.map(|a| a.negate())),
                        interval(next_lb, send_ub(x.range)),
                    ));
                    let curr_ub = send_ub(c.range);
                    candidates.push((
                        interval(strt_lb, curr_ub),
                        interval(curr_ub.map(|a| a.negate()), send_ub(x.range)),
                    ));
                }
                candidates.dedup();
                let mut taken = None;
                for (gc, gn) in candidates {
                    let trial = replace(&cur, &name, &action, &[(&c.guard, &gc), (&x.guard, &gn)]);
                    if trial == cur {
                        continue;
                    }
                    checks += 1;
                    if check_timed_bisim(&trial, &cur).is_bisimilar() {
                        taken = Some((trial, gc, gn));
                        break;
                    }
                }
                match taken {
                    Some((trial, gc, gn)) => {
                        cur = trial;
                        accepted += 1;
                        let (rc, rn) = (range_of(&gc, &zones), range_of(&gn, &zones));
                        slots[curr].guard = gc;
                        if let Some(r) = rc {
                            slots[curr].range = r;
                        }
                        slots[next].guard = gn;
                        if let Some(r) = rn {
                            slots[next].range = r;
                        }
                        curr = next;
                    }
                    None => curr = next,
                }
            }
        }
    }
    Merge {
        automaton: cur,
        checks,
        accepted,
    }
}
