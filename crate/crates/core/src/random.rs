//! Seeded generators for property tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dbm::{Bound, Dbm};
use crate::ta::{Atom, ClockId, Edge, Guard, Rel, TimedAutomaton};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape limits of a random automaton.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub clocks: usize,
    pub locations: usize,
    pub actions: usize,
    pub max_edges: usize,
    pub max_const: i64,
    pub max_atoms: usize,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            clocks: 2,
            locations: 3,
            actions: 2,
            max_edges: 5,
            max_const: 3,
            max_atoms: 2,
        }
    }
}

const CLOCK_NAMES: [&str; 6] = ["x", "y", "z", "w", "u", "v"];

fn random_guard(rng: &mut impl Rng, shape: &Shape) -> Guard {
    let mut g = Guard::tt();
    if shape.clocks == 0 {
        return g;
    }
    for _ in 0..rng.gen_range(0..=shape.max_atoms) {
        let clock = ClockId(rng.gen_range(1..=shape.clocks));
        let k = rng.gen_range(0..=shape.max_const);
        match rng.gen_range(0..9) {
            0 | 1 => g.insert(Atom::new(clock, Rel::Lt, k)),
            2 | 3 => g.insert(Atom::new(clock, Rel::Le, k)),
            4 | 5 => g.insert(Atom::new(clock, Rel::Gt, k)),
            6 | 7 => g.insert(Atom::new(clock, Rel::Ge, k)),
            _ => {
                g.insert(Atom::new(clock, Rel::Le, k));
                g.insert(Atom::new(clock, Rel::Ge, k));
            }
        }
    }
    g
}

pub fn random_automaton(rng: &mut impl Rng, shape: &Shape) -> TimedAutomaton {
    assert!(shape.clocks <= CLOCK_NAMES.len());
    let locations: Vec<String> = (0..shape.locations.max(1))
        .map(|i| format!("l{i}"))
        .collect();
    let alphabet: Vec<String> = (0..shape.actions.max(1))
        .map(|i| ((b'a' + i as u8) as char).to_string())
        .collect();
    let n_edges = rng.gen_range(1..=shape.max_edges.max(1));
    let edges = (0..n_edges)
        .map(|_| Edge {
            from: locations.choose(rng).unwrap().clone(),
            to: locations.choose(rng).unwrap().clone(),
            action: alphabet.choose(rng).unwrap().clone(),
            guard: random_guard(rng, shape),
            resets: (1..=shape.clocks)
                .filter(|_| rng.gen_bool(0.35))
                .map(ClockId)
                .collect(),
        })
        .collect();
    TimedAutomaton {
        clocks: CLOCK_NAMES[..shape.clocks]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        alphabet,
        initial: locations[0].clone(),
        locations,
        edges,
    }
}

/// A random non-empty zone over `n` clocks with constants in `0..=max`.
pub fn random_zone(rng: &mut impl Rng, n: usize, max: i64) -> Dbm {
    loop {
        let mut cs = Vec::new();
        for _ in 0..rng.gen_range(1..=2 * n + 1) {
            let k = rng.gen_range(0..=max);
            let strict = rng.gen_bool(0.4);
            let i = rng.gen_range(0..=n);
            let mut j = rng.gen_range(0..=n);
            if i == j {
                j = (j + 1) % (n + 1);
            }
            let b = if i == 0 {
                Bound::new(-k, strict)
            } else if j == 0 {
                Bound::new(k, strict)
            } else {
                Bound::new(rng.gen_range(-max..=max), strict)
            };
            cs.push((i, j, b));
        }
        if let Some(z) = Dbm::from_constraints(n, &cs) {
            return z;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ta::{parse_ta, serialize_ta, validate};

    #[test]
    fn generated_automata_are_valid_and_reproducible() {
        for seed in 0..20 {
            let a = random_automaton(&mut rng(seed), &Shape::default());
            assert!(validate(&a).is_empty());
            assert_eq!(a, random_automaton(&mut rng(seed), &Shape::default()));
            assert_eq!(parse_ta(&serialize_ta(&a)).unwrap(), a);
        }
    }

    #[test]
    fn shuffled_constraints_serialize_identically() {
        let mut r = rng(7);
        for _ in 0..20 {
            let a = random_automaton(
                &mut r,
                &Shape {
                    max_atoms: 4,
                    ..Shape::default()
                },
            );
            let canonical = serialize_ta(&a);
            let mut doc: serde_json::Value = serde_json::from_slice(&canonical).unwrap();
            for e in doc["edges"].as_array_mut().unwrap() {
                if let Some(cs) = e["guard"].as_array_mut() {
                    cs.shuffle(&mut r);
                }
            }
            let shuffled = serde_json::to_vec(&doc).unwrap();
            assert_eq!(serialize_ta(&parse_ta(&shuffled).unwrap()), canonical);
        }
    }
}
