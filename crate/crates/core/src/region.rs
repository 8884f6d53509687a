//! Region graphs: an exact but exponential reference for reachability and
//! timed bisimilarity at small scale. Nothing here uses zones.

use std::collections::{HashMap, VecDeque};

use num_rational::Ratio;
use thiserror::Error;

use crate::ta::{Atom, Edge, Guard, Rel, TimedAutomaton};

pub const MAX_CLOCKS: usize = 4;
pub const MAX_CONSTANT: i64 = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("SCALE_EXCEEDED: {clocks} clocks with max constant {max_constant} (limit {MAX_CLOCKS} clocks, constant {MAX_CONSTANT})")]
    ScaleExceeded { clocks: usize, max_constant: i64 },
}

/// A clock region for a global bound `M`. Integer parts above `M` are
/// clipped to `M + 1`; `frac[i]` is 0 for an integral value and otherwise
/// the rank of the clock's fractional part among the non-integral ones.
/// Clipped clocks always carry rank 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    pub int: Vec<i64>,
    pub frac: Vec<u8>,
}

impl Region {
    pub fn origin(n: usize) -> Region {
        Region {
            int: vec![0; n],
            frac: vec![0; n],
        }
    }

    fn clipped(&self, i: usize, max: i64) -> bool {
        self.int[i] > max
    }

    fn normalize(&mut self) {
        let mut ranks: Vec<u8> = self.frac.iter().copied().filter(|&r| r > 0).collect();
        ranks.sort_unstable();
        ranks.dedup();
        for r in self.frac.iter_mut() {
            if *r > 0 {
                *r = ranks.iter().position(|x| x == r).unwrap() as u8 + 1;
            }
        }
    }

    fn atom_holds(&self, a: &Atom, max: i64) -> bool {
        let i = a.clock.index() - 1;
        let (n, k) = (self.int[i], a.k);
        if self.clipped(i, max) {
            return matches!(a.rel, Rel::Gt | Rel::Ge);
        }
        if self.frac[i] == 0 {
            return a.holds(n as f64);
        }
        match a.rel {
            Rel::Lt | Rel::Le => n < k,
            Rel::Gt | Rel::Ge => n >= k,
        }
    }

    pub fn satisfies(&self, g: &Guard, max: i64) -> bool {
        g.atoms().all(|a| self.atom_holds(a, max))
    }

    /// The next region reached by letting time pass, if any.
    pub fn time_successor(&self, max: i64) -> Option<Region> {
        let n = self.int.len();
        let bounded: Vec<usize> = (0..n).filter(|&i| !self.clipped(i, max)).collect();
        let mut r = self.clone();
        if bounded.iter().any(|&i| self.frac[i] == 0) {
            for &i in &bounded {
                if self.frac[i] == 0 {
                    if self.int[i] == max {
                        r.int[i] = max + 1;
                    } else {
                        r.frac[i] = 1;
                    }
                } else {
                    r.frac[i] += 1;
                }
            }
        } else {
            let top = bounded.iter().map(|&i| self.frac[i]).max()?;
            for &i in &bounded {
                if self.frac[i] == top {
                    r.int[i] += 1;
                    r.frac[i] = 0;
                }
            }
        }
        r.normalize();
        Some(r)
    }

    pub fn reset(&self, clocks: impl IntoIterator<Item = usize>) -> Region {
        let mut r = self.clone();
        for c in clocks {
            r.int[c - 1] = 0;
            r.frac[c - 1] = 0;
        }
        r.normalize();
        r
    }

    /// A valuation inside the region.
    pub fn sample(&self) -> Vec<Ratio<i64>> {
        let top = *self.frac.iter().max().unwrap_or(&0) as i64;
        self.int
            .iter()
            .zip(&self.frac)
            .map(|(&n, &f)| Ratio::from_integer(n) + Ratio::new(f as i64, top + 1))
            .collect()
    }
}

fn edge_resets(e: &Edge, shift: usize) -> impl Iterator<Item = usize> + '_ {
    e.resets.iter().map(move |c| c.index() + shift)
}

fn shifted(g: &Guard, by: usize) -> Guard {
    g.map_clocks(|c| crate::ta::ClockId(c.index() + by))
}

/// All (location, region) pairs reachable in `ta`, with `max` as the region
/// bound (at least the automaton's largest constant).
pub fn reachable_regions(ta: &TimedAutomaton, max: i64) -> Vec<(usize, Region)> {
    let n = ta.num_clocks();
    let start = (ta.initial_index(), Region::origin(n));
    let mut seen = vec![start.clone()];
    let mut index: HashMap<(usize, Region), ()> = HashMap::from([(start.clone(), ())]);
    let mut queue = VecDeque::from([start]);
    while let Some((l, r)) = queue.pop_front() {
        let mut next = Vec::new();
        if let Some(s) = r.time_successor(max) {
            next.push((l, s));
        }
        for e in ta.edges.iter().filter(|e| ta.location_index(&e.from) == Some(l)) {
            if r.satisfies(&e.guard, max) {
                next.push((ta.location_index(&e.to).unwrap(), r.reset(edge_resets(e, 0))));
            }
        }
        for s in next {
            if index.insert(s.clone(), ()).is_none() {
                seen.push(s.clone());
                queue.push_back(s);
            }
        }
    }
    seen
}

/// Decides timed bisimilarity by a greatest fixpoint on the reachable part
/// of the region product over the disjoint union of both clock sets.
pub fn region_bisim_oracle(a: &TimedAutomaton, b: &TimedAutomaton) -> Result<bool, OracleError> {
    let n1 = a.num_clocks();
    let n = n1 + b.num_clocks();
    let max = a.max_constant().max(b.max_constant()).max(0);
    if n > MAX_CLOCKS || max > MAX_CONSTANT {
        return Err(OracleError::ScaleExceeded {
            clocks: n,
            max_constant: max,
        });
    }
    type State = (usize, usize, Region);
    let out = |t: &TimedAutomaton, l: usize| -> Vec<usize> {
        (0..t.edges.len())
            .filter(|&i| t.location_index(&t.edges[i].from) == Some(l))
            .collect()
    };
    let right_guards: Vec<Guard> = b.edges.iter().map(|e| shifted(&e.guard, n1)).collect();

    let start: State = (a.initial_index(), b.initial_index(), Region::origin(n));
    let mut states = vec![start.clone()];
    let mut ids: HashMap<State, usize> = HashMap::from([(start, 0)]);
    // per state: delay successor, and for each enabled left / right edge the
    // targets of all joint moves answering it
    let mut delay: Vec<Option<usize>> = Vec::new();
    let mut obligations: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut k = 0;
    while k < states.len() {
        let (l1, l2, r) = states[k].clone();
        let mut intern = |s: State, states: &mut Vec<State>| -> usize {
            *ids.entry(s.clone()).or_insert_with(|| {
                states.push(s);
                states.len() - 1
            })
        };
        let d = r
            .time_successor(max)
            .filter(|s| *s != r)
            .map(|s| intern((l1, l2, s), &mut states));
        let left: Vec<usize> = out(a, l1).into_iter().filter(|&i| r.satisfies(&a.edges[i].guard, max)).collect();
        let right: Vec<usize> = out(b, l2).into_iter().filter(|&j| r.satisfies(&right_guards[j], max)).collect();
        let mut joint = HashMap::new();
        for &i in &left {
            for &j in &right {
                if a.edges[i].action == b.edges[j].action {
                    let (e1, e2) = (&a.edges[i], &b.edges[j]);
                    let s = (
                        a.location_index(&e1.to).unwrap(),
                        b.location_index(&e2.to).unwrap(),
                        r.reset(edge_resets(e1, 0).chain(edge_resets(e2, n1))),
                    );
                    joint.insert((i, j), intern(s, &mut states));
                }
            }
        }
        let mut obs = Vec::new();
        for &i in &left {
            obs.push(right.iter().filter_map(|&j| joint.get(&(i, j)).copied()).collect());
        }
        for &j in &right {
            obs.push(left.iter().filter_map(|&i| joint.get(&(i, j)).copied()).collect());
        }
        delay.push(d);
        obligations.push(obs);
        k += 1;
    }

    let mut good = vec![true; states.len()];
    loop {
        let mut changed = false;
        for s in 0..states.len() {
            if !good[s] {
                continue;
            }
            let delay_bad = delay[s].is_some_and(|d| !good[d]);
            let unmatched = obligations[s].iter().any(|o| !o.iter().any(|&t| good[t]));
            if delay_bad || unmatched {
                good[s] = false;
                changed = true;
            }
        }
        if !changed {
            return Ok(good[0]);
        }
    }
}
