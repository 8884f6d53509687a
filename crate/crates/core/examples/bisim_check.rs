//! Decides timed bisimilarity of two automaton files and prints a
//! distinguishing run when they differ.
//!
//! ```text
//! cargo run --example bisim_check -- left.json right.json
//! ```

use std::env;
use std::fs;

use clockmin::bisim::{check_timed_bisim, Verdict};
use clockmin::ta::parse_ta;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/");
    let mut args = env::args().skip(1);
    let a = args.next().unwrap_or_else(|| format!("{data}merge_left.json"));
    let b = args.next().unwrap_or_else(|| format!("{data}merge_right.json"));
    let (a, b) = (parse_ta(&fs::read(a)?)?, parse_ta(&fs::read(b)?)?);
    match check_timed_bisim(&a, &b) {
        Verdict::Bisimilar => println!("bisimilar"),
        Verdict::NotBisimilar(w) => println!("not bisimilar: {w}"),
    }
    Ok(())
}
