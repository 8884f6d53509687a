//! Per-seed checks shared by the property suites and the acceptance target.

use clockmin::dbm::Dbm;
use clockmin::minimize::minimize_pipeline;
use clockmin::random::{random_automaton, random_zone, rng, Shape};
use clockmin::region::region_bisim_oracle;
use clockmin::zone_graph::build_zone_graph;
use rand::Rng;

use super::{for_each_point, facet_violations, oracle_shape, random_pair, same_location_overlaps, sampling_violations};

/// Quarter-integer grid: it contains the half-integer grid and also meets
/// every region of up to three clocks.
pub const DEN: i64 = 4;

pub fn zone_graph_shape() -> Shape {
    Shape {
        clocks: 3,
        locations: 5,
        actions: 2,
        max_edges: 7,
        max_const: 6,
        max_atoms: 2,
    }
}

pub fn zone_graph(seed: u64) -> Result<(), String> {
    let ta = random_automaton(&mut rng(seed), &zone_graph_shape());
    let g = build_zone_graph(&ta);
    if same_location_overlaps(&g) > 0 {
        return Err(format!("seed {seed}: overlapping zones"));
    }
    let v = g.violations();
    if !v.is_empty() {
        return Err(format!("seed {seed}: {v:?}"));
    }
    let facets = facet_violations(&g);
    if !facets.is_empty() {
        return Err(format!("seed {seed}: {facets:?}"));
    }
    let s = sampling_violations(&ta, &g, 12);
    if !s.is_empty() {
        return Err(format!("seed {seed}: {:?}", &s[..s.len().min(3)]));
    }
    Ok(())
}

fn zone_pair(seed: u64) -> (usize, Dbm, Dbm) {
    let mut r = rng(seed);
    let n = r.gen_range(1..=3);
    let max = r.gen_range(1..=8);
    let a = random_zone(&mut r, n, max);
    let b = random_zone(&mut r, n, max);
    (n, a, b)
}

/// A non-empty zone built from constants up to `m` has a point with all
/// coordinates at most `n * m + 1`, so the grid goes that far.
fn extent(n: usize, zones: &[&Dbm]) -> i64 {
    let m = zones
        .iter()
        .flat_map(|z| z.entries().iter().filter_map(|b| b.value()))
        .map(i64::abs)
        .max()
        .unwrap_or(0);
    n as i64 * m + 1
}

pub fn split_difference(seed: u64) -> Result<(), String> {
    let (n, a, b) = zone_pair(seed);
    let (inter, pieces) = a.split_difference(&b);
    if pieces.len() + 1 > (n + 1) * (n + 1) + 1 {
        return Err(format!("seed {seed}: {} pieces", pieces.len()));
    }
    for (i, p) in pieces.iter().enumerate() {
        if !p.is_subset_of(&a) || p.intersects(&b) || pieces[i + 1..].iter().any(|q| p.intersects(q)) {
            return Err(format!("seed {seed}: piece {i} breaks the partition"));
        }
    }
    if inter != a.intersect(&b) {
        return Err(format!("seed {seed}: wrong intersection"));
    }
    let mut bad = None;
    for_each_point(n, extent(n, &[&a, &b]), DEN, |pt| {
        // pieces lie inside `a`, so only its points can be hit
        if bad.is_some() || !a.contains_scaled(pt, DEN) {
            return;
        }
        let inside = |z: &Dbm| z.contains_scaled(pt, DEN);
        let hits = pieces.iter().filter(|p| inside(p)).count() + inter.iter().filter(|z| inside(z)).count();
        if hits != 1 || inter.as_ref().is_some_and(inside) != inside(&b) {
            bad = Some(pt.to_vec());
        }
    });
    match bad {
        Some(pt) => Err(format!("seed {seed}: membership differs at {pt:?}/{DEN}")),
        None => Ok(()),
    }
}

/// Whether the union was convex.
pub fn convex_union(seed: u64) -> Result<bool, String> {
    let (n, a, b) = zone_pair(10_000 + seed);
    // half the pairs are made to touch so that convex unions are common
    let b = if seed.is_multiple_of(2) {
        a.hull(&b).split_difference(&a).1.into_iter().next().unwrap_or(b)
    } else {
        b
    };
    let hull = a.hull(&b);
    let mut gap = false;
    for_each_point(n, extent(n, &[&a, &b]), DEN, |pt| {
        gap = gap || (hull.contains_scaled(pt, DEN) && !a.contains_scaled(pt, DEN) && !b.contains_scaled(pt, DEN));
    });
    match a.convex_union(&b) {
        Some(u) if gap => Err(format!("seed {seed}: claimed convex, hull {u:?} has a gap")),
        Some(u) if u != hull => Err(format!("seed {seed}: union is not the hull")),
        Some(_) => Ok(true),
        None if !gap => Err(format!("seed {seed}: claimed non-convex, no grid point separates")),
        None => Ok(false),
    }
}

/// The shared verdict.
pub fn bisim_agreement(seed: u64) -> Result<bool, String> {
    let (a, b) = random_pair(seed);
    let zone = clockmin::bisim::check_timed_bisim(&a, &b).is_bisimilar();
    let region = region_bisim_oracle(&a, &b).map_err(|e| format!("seed {seed}: {e}"))?;
    if zone != region {
        return Err(format!("seed {seed}: zones say {zone}, regions say {region}"));
    }
    Ok(zone)
}

/// Whether the pipeline removed a clock.
pub fn stagewise(seed: u64) -> Result<bool, String> {
    let ta = random_automaton(&mut rng(1000 + seed), &oracle_shape());
    let m = minimize_pipeline(&ta);
    let mut prev = &ta;
    for (i, s) in m.stages.iter().enumerate() {
        match region_bisim_oracle(prev, s) {
            Ok(true) => {}
            other => return Err(format!("seed {seed}: stage {} gives {other:?}", i + 1)),
        }
        prev = s;
    }
    let (before, after) = (ta.num_clocks(), m.automaton.num_clocks());
    if after > before {
        return Err(format!("seed {seed}: {before} clocks became {after}"));
    }
    let again = minimize_pipeline(&m.automaton).automaton.num_clocks();
    if again != after {
        return Err(format!("seed {seed}: rerun gives {again} clocks instead of {after}"));
    }
    Ok(after < before)
}
