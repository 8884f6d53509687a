//! Shows active clocks, the clock graph and its coloring for an automaton
//! whose three clocks cannot be reduced.

use std::env;
use std::fs;

use clockmin::minimize::coloring::color;
use clockmin::minimize::{active_clocks, build_clock_graph, partition_active_clocks, stage4_rename, Grouping};
use clockmin::ta::{parse_ta, serialize_ta};
use clockmin::zone_graph::build_zone_graph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/triangle.json").to_string()
    });
    let ta = parse_ta(&fs::read(&path)?)?;
    let (act, rounds) = active_clocks(&ta);
    for (l, clocks) in act.iter().enumerate() {
        let names: Vec<&str> = clocks.iter().map(|&c| ta.clock_name(c)).collect();
        println!("act({}) = {names:?}", ta.locations[l]);
    }
    println!("fixpoint after {rounds} rounds");

    let classes = partition_active_clocks(&ta, &build_zone_graph(&ta), &act, Grouping::Offsets);
    let Some(cg) = build_clock_graph(&ta, &classes) else {
        println!("classes of one location collapse; no clock graph");
        return Ok(());
    };
    let (colors, chi) = color(&cg.graph);
    for (v, members) in cg.vertices.iter().enumerate() {
        let label: Vec<String> = members
            .iter()
            .map(|&(l, i)| {
                let cs: Vec<&str> = classes[l][i].members.iter().map(|&(c, _)| ta.clock_name(c)).collect();
                format!("{}:{}", ta.locations[l], cs.join("="))
            })
            .collect();
        println!("vertex {v} [{}] -> c{}", label.join(", "), colors[v]);
    }
    println!("edges {:?}, {chi} colors", cg.graph.edges());
    println!("{}", String::from_utf8(serialize_ta(&stage4_rename(&ta).automaton))?);
    Ok(())
}
