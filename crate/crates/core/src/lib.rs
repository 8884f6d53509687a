//! Zone graphs, timed bisimulation and clock minimization for timed automata.

pub mod bisim;
pub mod cli;
pub mod dbm;
pub mod minimize;
pub mod random;
pub mod region;
pub mod ta;
pub mod zone_graph;
