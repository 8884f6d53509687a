//! The `clockmin` command line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::bisim::{check_timed_bisim, Verdict};
use crate::minimize::minimize_pipeline;
use crate::ta::{parse_ta, serialize_ta, ParseError, TimedAutomaton};
use crate::zone_graph::build_zone_graph;

#[derive(Parser, Debug)]
#[command(name = "clockmin", version, about = "Clock reduction for timed automata")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Minimize the number of clocks, preserving timed bisimilarity.
    Minimize {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Write the per-stage report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Export the pre-stable zone graph in DOT format.
    Zonegraph {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Exit 0 if the automata are timed bisimilar, 1 with a witness if not.
    Bisim { a: PathBuf, b: PathBuf },
    /// Check that a file is a well-formed automaton.
    Validate { input: PathBuf },
    /// Print sizes of the automaton and its zone graph.
    Stats { input: PathBuf },
}

pub const OK: u8 = 0;
pub const NOT_BISIMILAR: u8 = 1;
pub const ERROR: u8 = 2;

#[derive(Debug)]
struct Failure(String);

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(e.to_string())
    }
}

fn load(path: &Path) -> Result<TimedAutomaton, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    parse_ta(&bytes).map_err(|e| match e {
        ParseError::Semantic(ds) => Failure(format!(
            "{}: invalid automaton\n{}",
            path.display(),
            ds.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
        )),
        e => Failure(format!("{}: {e}", path.display())),
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<u8, Failure> {
    match cmd {
        Command::Minimize { input, output, report } => {
            let m = minimize_pipeline(&load(&input)?);
            write(&output, &serialize_ta(&m.automaton))?;
            if let Some(r) = report {
                write(&r, format!("{}\n", m.report.to_json()).as_bytes())?;
            }
        }
        Command::Zonegraph { input, output } => {
            write(&output, &build_zone_graph(&load(&input)?).export_dot())?;
        }
        Command::Bisim { a, b } => {
            let (a, b) = (load(&a)?, load(&b)?);
            match check_timed_bisim(&a, &b) {
                Verdict::Bisimilar => writeln!(out, "BISIMILAR")?,
                Verdict::NotBisimilar(w) => {
                    writeln!(out, "NOT_BISIMILAR")?;
                    writeln!(out, "{w}")?;
                    return Ok(NOT_BISIMILAR);
                }
            }
        }
        Command::Validate { input } => {
            load(&input)?;
            writeln!(out, "ok")?;
        }
        Command::Stats { input } => {
            let ta = load(&input)?;
            let g = build_zone_graph(&ta);
            writeln!(out, "locations: {}", ta.locations.len())?;
            writeln!(out, "clocks: {}", ta.num_clocks())?;
            writeln!(out, "edges: {}", ta.edges.len())?;
            writeln!(out, "max_constant: {}", ta.max_constant())?;
            writeln!(out, "zone_nodes: {}", g.nodes.len())?;
            writeln!(out, "zone_action_edges: {}", g.action_edges.len())?;
            writeln!(out, "zone_delay_edges: {}", g.delay_edges.len())?;
        }
    }
    Ok(OK)
}

/// Parses `args` (program name first) and runs the command. Errors go to
/// standard error; the return value is the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ERROR } else { OK };
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ERROR
        }
    }
}
