//! Clock reduction in four stages, each preserving timed bisimilarity.

mod stage1;
mod stage2;

pub use stage1::stage1_prune;
pub use stage2::{stage2_split, Split};
mod stage3;

pub use stage3::{stage3_merge, Merge};
pub mod coloring;
mod stage4;

pub use stage4::{
    active_clocks, build_clock_graph, partition_active_clocks, remove_redundant_resets, stage4_rename, ActiveClocks,
    ClockClass, ClockGraph, Grouping, Rename,
};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::ta::TimedAutomaton;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageStats {
    pub stage: &'static str,
    pub locations: usize,
    pub edges: usize,
    pub clocks: usize,
}

impl StageStats {
    fn of(stage: &'static str, ta: &TimedAutomaton) -> StageStats {
        StageStats {
            stage,
            locations: ta.locations.len(),
            edges: ta.edges.len(),
            clocks: ta.num_clocks(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub stages: Vec<StageStats>,
    pub bisim_checks: usize,
    pub merges_accepted: usize,
    pub kept_whole: Vec<String>,
    pub grouping: Grouping,
    pub active_rounds: usize,
    pub clock_map: BTreeMap<String, Vec<String>>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

#[derive(Clone, Debug)]
pub struct Minimized {
    pub automaton: TimedAutomaton,
    pub stages: [TimedAutomaton; 4],
    pub report: Report,
}

/// Runs all four stages in order.
pub fn minimize_pipeline(ta: &TimedAutomaton) -> Minimized {
    let a1 = stage1_prune(ta);
    let split = stage2_split(&a1);
    let merge = stage3_merge(&split.automaton);
    let rename = stage4_rename(&merge.automaton);
    let a2 = split.automaton;
    let a3 = merge.automaton;
    let a4 = rename.automaton;
    let report = Report {
        stages: vec![
            StageStats::of("input", ta),
            StageStats::of("prune", &a1),
            StageStats::of("split", &a2),
            StageStats::of("merge", &a3),
            StageStats::of("rename", &a4),
        ],
        bisim_checks: merge.checks,
        merges_accepted: merge.accepted,
        kept_whole: split.kept_whole,
        grouping: rename.grouping,
        active_rounds: rename.active_rounds,
        clock_map: rename.names.into_iter().collect(),
    };
    Minimized {
        automaton: a4.clone(),
        stages: [a1, a2, a3, a4],
        report,
    }
}
