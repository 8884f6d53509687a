//! Runs the four-stage clock minimization and prints the result with its report.

use std::env;
use std::fs;

use clockmin::bisim::check_timed_bisim;
use clockmin::minimize::minimize_pipeline;
use clockmin::ta::{parse_ta, serialize_ta};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/running.json").to_string()
    });
    let ta = parse_ta(&fs::read(&path)?)?;
    let m = minimize_pipeline(&ta);
    println!("{}", String::from_utf8(serialize_ta(&m.automaton))?);
    eprintln!("{}", m.report.to_json());
    eprintln!(
        "{} -> {} clocks, bisimilar: {}",
        ta.num_clocks(),
        m.automaton.num_clocks(),
        check_timed_bisim(&ta, &m.automaton).is_bisimilar()
    );
    Ok(())
}
