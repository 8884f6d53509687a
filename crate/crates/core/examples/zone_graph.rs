//! Builds the pre-stable zone graph of an automaton file and prints it as DOT.
//!
//! ```text
//! cargo run --example zone_graph -- crates/core/examples/data/running.json
//! ```

use std::env;
use std::fs;

use clockmin::ta::parse_ta;
use clockmin::zone_graph::build_zone_graph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/running.json").to_string()
    });
    let ta = parse_ta(&fs::read(&path)?)?;
    let g = build_zone_graph(&ta);
    let names = g.clocks().to_vec();
    for loc in 0..g.num_locations() {
        let base: Vec<String> = g
            .nodes_at(loc)
            .into_iter()
            .filter(|&k| g.nodes[k].is_base)
            .map(|k| g.nodes[k].zone.render(&names))
            .collect();
        eprintln!(
            "{}: {} base zone(s) {:?}",
            g.location_name(loc),
            base.len(),
            base
        );
    }
    print!("{}", String::from_utf8(g.export_dot())?);
    Ok(())
}
