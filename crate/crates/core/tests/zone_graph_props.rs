mod common;

use clockmin::random::{random_automaton, rng};
use clockmin::region::reachable_regions;
use clockmin::zone_graph::build_zone_graph;

#[test]
fn random_graphs_are_prestable() {
    for seed in 0..200 {
        common::checks::zone_graph(seed).unwrap();
    }
}

#[test]
fn zones_cover_every_reachable_region() {
    for seed in 0..100 {
        let ta = random_automaton(&mut rng(500 + seed), &common::oracle_shape());
        let g = build_zone_graph(&ta);
        for (loc, r) in reachable_regions(&ta, ta.max_constant().max(0)) {
            let den = *r.frac.iter().max().unwrap() as i64 + 1;
            let num: Vec<i64> = r.int.iter().zip(&r.frac).map(|(&i, &f)| i * den + f as i64).collect();
            assert!(
                g.nodes_at(loc).iter().any(|&k| g.nodes[k].zone.contains_scaled(&num, den)),
                "seed {seed}: {r:?} at {}",
                ta.locations[loc]
            );
        }
    }
}
