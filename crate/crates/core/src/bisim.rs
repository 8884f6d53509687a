//! Timed bisimilarity on the pre-stable zone graph of the synchronized product.
//!
//! The product runs both automata over the disjoint union of their clocks.
//! Every pair of edges with the same action becomes a joint edge, and the
//! guards of each side are added as probes so that the individual
//! enabledness of every edge is uniform inside a product zone. A greatest
//! fixpoint then removes nodes where one side can make a move the other side
//! cannot match into a surviving node.

use std::collections::HashMap;
use std::fmt;

use num_rational::Ratio;

use crate::dbm::Dbm;
use crate::ta::{ClockId, TimedAutomaton};
use crate::zone_graph::{build_system, SysEdge, System, ZoneGraph};

/// Which automaton of the pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Delay(Ratio<i64>),
    /// A joint action, matched by both sides.
    Action(String),
}

/// A distinguishing run: after `steps`, `side` can perform `action` and the
/// other side has no matching move into a bisimilar state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub steps: Vec<Step>,
    pub side: Side,
    pub action: String,
    /// Whether the other side can take `action` at all at that point.
    pub answerable: bool,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            match s {
                Step::Delay(d) => write!(f, "delay {d}; ")?,
                Step::Action(a) => write!(f, "{a}; ")?,
            }
        }
        if self.answerable {
            write!(
                f,
                "{} {} (every answer by the {} side leads to a distinguishable state)",
                self.side,
                self.action,
                self.side.other()
            )
        } else {
            write!(f, "{} {} (the {} side cannot do it)", self.side, self.action, self.side.other())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Bisimilar,
    NotBisimilar(Witness),
}

impl Verdict {
    pub fn is_bisimilar(&self) -> bool {
        matches!(self, Verdict::Bisimilar)
    }
}

/// Why a product node was removed.
#[derive(Clone, Debug)]
enum Reason {
    Delay(usize),
    Unmatched {
        side: Side,
        edge: usize,
        answers: Vec<(usize, usize)>,
    },
}

/// The synchronized product with its zone graph and the fixpoint result.
pub struct Product {
    pub graph: ZoneGraph,
    left_clocks: usize,
    left: Vec<(usize, usize, usize, Vec<ClockId>)>,
    right: Vec<(usize, usize, usize, Vec<ClockId>)>,
    /// Joint edge index of each (left edge, right edge) pair with a common action.
    joint: HashMap<(usize, usize), usize>,
    right_locs: usize,
    pub good: Vec<bool>,
    reasons: Vec<Option<Reason>>,
}

fn shift(c: ClockId, by: usize) -> ClockId {
    ClockId(c.index() + by)
}

impl Product {
    pub fn new(a: &TimedAutomaton, b: &TimedAutomaton) -> Product {
        let n1 = a.num_clocks();
        let nl2 = b.locations.len();
        let pair = |l1: usize, l2: usize| l1 * nl2 + l2;
        let mut actions: Vec<String> = a.alphabet.clone();
        for act in &b.alphabet {
            if !actions.contains(act) {
                actions.push(act.clone());
            }
        }
        let act_id = |name: &str| actions.iter().position(|x| x == name).unwrap();
        let side_edges = |t: &TimedAutomaton, by: usize| -> Vec<(usize, usize, usize, Vec<ClockId>)> {
            t.edges
                .iter()
                .map(|e| {
                    (
                        t.location_index(&e.from).unwrap(),
                        t.location_index(&e.to).unwrap(),
                        act_id(&e.action),
                        e.resets.iter().map(|&c| shift(c, by)).collect(),
                    )
                })
                .collect()
        };
        let left = side_edges(a, 0);
        let right = side_edges(b, n1);

        let mut edges = Vec::new();
        let mut joint = HashMap::new();
        for (i, e1) in a.edges.iter().enumerate() {
            for (j, e2) in b.edges.iter().enumerate() {
                if e1.action != e2.action {
                    continue;
                }
                let g = e1.guard.conjoin(&e2.guard.map_clocks(|c| shift(c, n1)));
                let mut resets = left[i].3.clone();
                resets.extend(right[j].3.iter().copied());
                joint.insert((i, j), edges.len());
                edges.push(SysEdge {
                    from: pair(left[i].0, right[j].0),
                    to: pair(left[i].1, right[j].1),
                    action: left[i].2,
                    guard: g,
                    resets,
                });
            }
        }

        let mut locations = Vec::new();
        let mut probes = Vec::new();
        for l1 in &a.locations {
            for l2 in &b.locations {
                locations.push(format!("({l1},{l2})"));
                let mut p: Vec<_> = a
                    .edges
                    .iter()
                    .filter(|e| &e.from == l1)
                    .map(|e| e.guard.clone())
                    .collect();
                p.extend(
                    b.edges
                        .iter()
                        .filter(|e| &e.from == l2)
                        .map(|e| e.guard.map_clocks(|c| shift(c, n1))),
                );
                probes.push(p);
            }
        }
        let mut clocks: Vec<String> = a.clocks.iter().map(|c| format!("L.{c}")).collect();
        clocks.extend(b.clocks.iter().map(|c| format!("R.{c}")));
        let sys = System {
            clocks,
            locations,
            actions,
            initial: pair(a.initial_index(), b.initial_index()),
            edges,
            probes,
        };
        let graph = build_system(sys);
        let mut product = Product {
            good: vec![true; graph.nodes.len()],
            reasons: vec![None; graph.nodes.len()],
            graph,
            left_clocks: n1,
            left,
            right,
            joint,
            right_locs: nl2,
        };
        product.remove_unmatched(a, b);
        product
    }

    fn remove_unmatched(&mut self, a: &TimedAutomaton, b: &TimedAutomaton) {
        let n1 = self.left_clocks;
        let g = &self.graph;
        // enabledness of each side's edges per node, uniform by the probes
        let enabled_left: Vec<Vec<usize>> = g
            .nodes
            .iter()
            .map(|n| {
                let l1 = n.location / self.right_locs;
                a.edges
                    .iter()
                    .enumerate()
                    .filter(|(i, e)| self.left[*i].0 == l1 && n.zone.intersects_guard(&e.guard))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        let enabled_right: Vec<Vec<usize>> = g
            .nodes
            .iter()
            .map(|n| {
                let l2 = n.location % self.right_locs;
                b.edges
                    .iter()
                    .enumerate()
                    .filter(|(j, e)| {
                        self.right[*j].0 == l2 && n.zone.intersects_guard(&e.guard.map_clocks(|c| shift(c, n1)))
                    })
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        let mut target: HashMap<(usize, usize), usize> = HashMap::new();
        for ae in &g.action_edges {
            target.insert((ae.src, ae.edge), ae.dst);
        }
        let succ: Vec<Option<usize>> = (0..g.nodes.len()).map(|k| g.delay_successor(k)).collect();

        loop {
            let mut removed = Vec::new();
            for k in 0..g.nodes.len() {
                if !self.good[k] {
                    continue;
                }
                if let Some(s) = succ[k] {
                    if !self.good[s] {
                        removed.push((k, Reason::Delay(s)));
                        continue;
                    }
                }
                let mut verdict = None;
                'sides: for side in [Side::Left, Side::Right] {
                    let (mine, theirs) = match side {
                        Side::Left => (&enabled_left[k], &enabled_right[k]),
                        Side::Right => (&enabled_right[k], &enabled_left[k]),
                    };
                    for &e in mine {
                        let mut answers = Vec::new();
                        let mut matched = false;
                        for &f in theirs {
                            let key = match side {
                                Side::Left => (e, f),
                                Side::Right => (f, e),
                            };
                            let Some(&je) = self.joint.get(&key) else {
                                continue;
                            };
                            let dst = target[&(k, je)];
                            if self.good[dst] {
                                matched = true;
                                break;
                            }
                            answers.push((je, dst));
                        }
                        if !matched {
                            verdict = Some(Reason::Unmatched {
                                side,
                                edge: e,
                                answers,
                            });
                            break 'sides;
                        }
                    }
                }
                if let Some(r) = verdict {
                    removed.push((k, r));
                }
            }
            if removed.is_empty() {
                break;
            }
            for (k, r) in removed {
                self.good[k] = false;
                self.reasons[k] = Some(r);
            }
        }
    }

    pub fn initial_is_good(&self) -> bool {
        self.good[self.graph.initial]
    }

    /// Builds a concrete distinguishing run from the initial node.
    fn witness(&self, a: &TimedAutomaton, b: &TimedAutomaton) -> Witness {
        let g = &self.graph;
        let n = g.clocks().len();
        let mut v = vec![Ratio::from_integer(0i64); n];
        let mut node = g.initial;
        let mut steps = Vec::new();
        loop {
            match self.reasons[node].as_ref().expect("removed nodes have a reason") {
                Reason::Delay(next) => {
                    let d = representative_delay(&v, &g.nodes[*next].zone);
                    for x in v.iter_mut() {
                        *x += d;
                    }
                    steps.push(Step::Delay(d));
                    node = *next;
                }
                Reason::Unmatched { side, edge, answers } => {
                    let action = match side {
                        Side::Left => a.edges[*edge].action.clone(),
                        Side::Right => b.edges[*edge].action.clone(),
                    };
                    let Some(&(je, dst)) = answers.first() else {
                        return Witness {
                            steps,
                            side: *side,
                            action,
                            answerable: false,
                        };
                    };
                    if answers.len() > 1 || self.reasons[dst].is_none() {
                        // several answers: report the branching point itself
                        return Witness {
                            steps,
                            side: *side,
                            action,
                            answerable: true,
                        };
                    }
                    for c in &g.system().edges[je].resets {
                        v[c.index() - 1] = Ratio::from_integer(0);
                    }
                    steps.push(Step::Action(action));
                    node = dst;
                }
            }
        }
    }
}

impl Dbm {
    fn intersects_guard(&self, g: &crate::ta::Guard) -> bool {
        self.constrain_guard(g).is_some()
    }
}

/// A delay `d ≥ 0` with `v + d` in `zone`: the midpoint of the admissible
/// interval, its lower end plus one when unbounded, or the point itself.
fn representative_delay(v: &[Ratio<i64>], zone: &Dbm) -> Ratio<i64> {
    let mut lo = Ratio::from_integer(0i64);
    let mut lo_strict = false;
    let mut hi: Option<(Ratio<i64>, bool)> = None;
    for (i, x) in v.iter().enumerate() {
        let c = i + 1;
        if let Some(m) = zone.get(0, c).value() {
            // -(x + d) ≺ m
            let bound = Ratio::from_integer(-m) - x;
            let strict = zone.get(0, c).is_strict();
            if bound > lo || (bound == lo && strict) {
                lo = bound;
                lo_strict = strict;
            }
        }
        if let Some(m) = zone.get(c, 0).value() {
            let bound = Ratio::from_integer(m) - x;
            let strict = zone.get(c, 0).is_strict();
            hi = match hi {
                Some((h, s)) if h < bound || (h == bound && s) => Some((h, s)),
                _ => Some((bound, strict)),
            };
        }
    }
    match hi {
        Some((h, _)) if h == lo => lo,
        Some((h, _)) => (lo + h) / 2,
        None if lo_strict => lo + 1,
        None => lo,
    }
}

pub fn check_timed_bisim(a: &TimedAutomaton, b: &TimedAutomaton) -> Verdict {
    let p = Product::new(a, b);
    if p.initial_is_good() {
        Verdict::Bisimilar
    } else {
        Verdict::NotBisimilar(p.witness(a, b))
    }
}
