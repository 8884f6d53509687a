use std::collections::BTreeSet;

use crate::ta::TimedAutomaton;
use crate::zone_graph::build_zone_graph;

/// Removes edges that are never enabled and locations without reachable zones.
pub fn stage1_prune(ta: &TimedAutomaton) -> TimedAutomaton {
    let g = build_zone_graph(ta);
    let used: BTreeSet<usize> = g.action_edges.iter().map(|e| e.edge).collect();
    let mut live: BTreeSet<usize> = g.nodes.iter().map(|n| n.location).collect();
    live.insert(ta.initial_index());
    TimedAutomaton {
        clocks: ta.clocks.clone(),
        alphabet: ta.alphabet.clone(),
        locations: ta
            .locations
            .iter()
            .enumerate()
            .filter(|(i, _)| live.contains(i))
            .map(|(_, l)| l.clone())
            .collect(),
        initial: ta.initial.clone(),
        edges: ta
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| used.contains(i))
            .map(|(_, e)| e.clone())
            .collect(),
    }
}
