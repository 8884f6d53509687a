//! Timed-automaton data model, guard algebra and the on-disk document format.
//!
//! Documents are JSON objects with exactly the keys `clocks`, `alphabet`,
//! `locations`, `initial` and `edges`. Unknown keys are rejected.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Deserialize;
use thiserror::Error;

/// A clock, identified by its 1-based position in the automaton's clock list.
///
/// Index 0 is reserved for the zero reference clock of a DBM, so a `ClockId`
/// can be used directly as a DBM row/column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClockId(pub usize);

impl ClockId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Comparison operator of an elementary constraint.
///
/// `=` is not a variant: it is stored as a `Le`/`Ge` pair with equal constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
        }
    }

    pub fn is_upper(self) -> bool {
        matches!(self, Rel::Lt | Rel::Le)
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Rel::Lt | Rel::Gt)
    }

    /// The relation satisfied exactly by the values that violate `self`.
    pub fn negate(self) -> Rel {
        match self {
            Rel::Lt => Rel::Ge,
            Rel::Le => Rel::Gt,
            Rel::Gt => Rel::Le,
            Rel::Ge => Rel::Lt,
        }
    }
}

/// `clock ⋈ k` with `k ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub clock: ClockId,
    pub rel: Rel,
    pub k: i64,
}

impl Atom {
    pub fn new(clock: ClockId, rel: Rel, k: i64) -> Self {
        Atom { clock, rel, k }
    }

    pub fn negate(self) -> Atom {
        Atom {
            rel: self.rel.negate(),
            ..self
        }
    }

    pub fn holds(&self, value: f64) -> bool {
        let k = self.k as f64;
        match self.rel {
            Rel::Lt => value < k,
            Rel::Le => value <= k,
            Rel::Gt => value > k,
            Rel::Ge => value >= k,
        }
    }
}

/// A conjunction of elementary constraints; the empty conjunction is `true`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Guard {
    atoms: BTreeSet<Atom>,
}

impl Guard {
    pub fn tt() -> Self {
        Guard::default()
    }

    pub fn from_atoms<I: IntoIterator<Item = Atom>>(atoms: I) -> Self {
        Guard {
            atoms: atoms.into_iter().collect(),
        }
    }

    pub fn is_true(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Atoms in canonical order: clock index, then relation, then constant.
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> + '_ {
        self.atoms.iter()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn insert(&mut self, atom: Atom) {
        self.atoms.insert(atom);
    }

    pub fn remove(&mut self, atom: &Atom) -> bool {
        self.atoms.remove(atom)
    }

    pub fn clocks(&self) -> BTreeSet<ClockId> {
        self.atoms.iter().map(|a| a.clock).collect()
    }

    pub fn max_constant(&self) -> Option<i64> {
        self.atoms.iter().map(|a| a.k).max()
    }

    /// Direct evaluation on a valuation indexed by `ClockId::index() - 1`.
    pub fn holds(&self, valuation: &[f64]) -> bool {
        self.atoms
            .iter()
            .all(|a| a.holds(valuation[a.clock.index() - 1]))
    }

    pub fn conjoin(&self, other: &Guard) -> Guard {
        Guard {
            atoms: self.atoms.union(&other.atoms).copied().collect(),
        }
    }

    pub fn map_clocks(&self, f: impl Fn(ClockId) -> ClockId) -> Guard {
        Guard::from_atoms(self.atoms.iter().map(|a| Atom {
            clock: f(a.clock),
            ..*a
        }))
    }

    /// Canonical rendering units: `<=`/`>=` pairs on the same constant fold into `=`.
    fn rendered(&self) -> Vec<(ClockId, &'static str, i64)> {
        let mut out = Vec::new();
        for a in &self.atoms {
            match a.rel {
                Rel::Le if self.atoms.contains(&Atom::new(a.clock, Rel::Ge, a.k)) => {
                    out.push((a.clock, "=", a.k))
                }
                Rel::Ge if self.atoms.contains(&Atom::new(a.clock, Rel::Le, a.k)) => {}
                r => out.push((a.clock, r.symbol(), a.k)),
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub action: String,
    pub guard: Guard,
    pub resets: BTreeSet<ClockId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedAutomaton {
    pub clocks: Vec<String>,
    pub alphabet: Vec<String>,
    pub locations: Vec<String>,
    pub initial: String,
    pub edges: Vec<Edge>,
}

impl TimedAutomaton {
    pub fn num_clocks(&self) -> usize {
        self.clocks.len()
    }

    pub fn clock_ids(&self) -> impl Iterator<Item = ClockId> {
        (1..=self.clocks.len()).map(ClockId)
    }

    pub fn clock_name(&self, c: ClockId) -> &str {
        &self.clocks[c.index() - 1]
    }

    pub fn clock_by_name(&self, name: &str) -> Option<ClockId> {
        self.clocks
            .iter()
            .position(|c| c == name)
            .map(|i| ClockId(i + 1))
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l == name)
    }

    pub fn initial_index(&self) -> usize {
        self.location_index(&self.initial)
            .expect("initial location is declared")
    }

    /// Largest constant in any guard, 0 when there is none.
    pub fn max_constant(&self) -> i64 {
        self.edges
            .iter()
            .filter_map(|e| e.guard.max_constant())
            .max()
            .unwrap_or(0)
    }

    pub fn render_guard(&self, g: &Guard) -> String {
        if g.is_true() {
            return "true".to_string();
        }
        g.rendered()
            .into_iter()
            .map(|(c, r, k)| format!("{}{}{}", self.clock_name(c), r, k))
            .collect::<Vec<_>>()
            .join(" && ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub invariant: &'static str,
    pub element: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: `{}`", self.invariant, self.element)
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid automaton: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Semantic(Vec<Diagnostic>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAutomaton {
    clocks: Vec<String>,
    alphabet: Vec<String>,
    locations: Vec<String>,
    initial: String,
    edges: Vec<RawEdge>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    from: String,
    to: String,
    action: String,
    guard: RawGuard,
    #[serde(default)]
    resets: Vec<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawGuard {
    Marker(String),
    Conjunction(Vec<RawConstraint>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraint {
    clock: String,
    rel: String,
    k: i64,
}

fn push_duplicates(names: &[String], invariant: &'static str, out: &mut Vec<Diagnostic>) {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            out.push(Diagnostic {
                invariant,
                element: n.clone(),
            });
        }
    }
}

fn push_empty(names: &[String], invariant: &'static str, out: &mut Vec<Diagnostic>) {
    for n in names.iter().filter(|n| n.is_empty()) {
        out.push(Diagnostic {
            invariant,
            element: n.clone(),
        });
    }
}

fn read_raw(text: &[u8]) -> Result<RawAutomaton, ParseError> {
    serde_json::from_slice(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Converts the raw document, collecting every semantic problem.
fn lower(raw: RawAutomaton) -> Result<TimedAutomaton, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    push_empty(&raw.clocks, "clock names must be non-empty", &mut diags);
    push_empty(&raw.locations, "location ids must be non-empty", &mut diags);
    push_duplicates(&raw.clocks, "duplicate clock", &mut diags);
    push_duplicates(&raw.locations, "duplicate location", &mut diags);
    push_duplicates(&raw.alphabet, "duplicate action", &mut diags);

    let clock_index: HashMap<&str, ClockId> = raw
        .clocks
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), ClockId(i + 1)))
        .collect();
    let locs: HashSet<&str> = raw.locations.iter().map(String::as_str).collect();
    let acts: HashSet<&str> = raw.alphabet.iter().map(String::as_str).collect();

    if !locs.contains(raw.initial.as_str()) {
        diags.push(Diagnostic {
            invariant: "initial location is not declared",
            element: raw.initial.clone(),
        });
    }

    let mut edges = Vec::with_capacity(raw.edges.len());
    for e in &raw.edges {
        for l in [&e.from, &e.to] {
            if !locs.contains(l.as_str()) {
                diags.push(Diagnostic {
                    invariant: "edge endpoint is not a declared location",
                    element: l.clone(),
                });
            }
        }
        if !acts.contains(e.action.as_str()) {
            diags.push(Diagnostic {
                invariant: "edge action is not in the alphabet",
                element: e.action.clone(),
            });
        }
        let mut guard = Guard::tt();
        match &e.guard {
            RawGuard::Marker(m) if m == "true" => {}
            RawGuard::Marker(m) => diags.push(Diagnostic {
                invariant: "guard must be a constraint list or \"true\"",
                element: m.clone(),
            }),
            RawGuard::Conjunction(cs) => {
                for c in cs {
                    let Some(&clock) = clock_index.get(c.clock.as_str()) else {
                        diags.push(Diagnostic {
                            invariant: "guard uses an undeclared clock",
                            element: c.clock.clone(),
                        });
                        continue;
                    };
                    if c.k < 0 {
                        diags.push(Diagnostic {
                            invariant: "guard constant must be a non-negative integer",
                            element: format!("{} {} {}", c.clock, c.rel, c.k),
                        });
                        continue;
                    }
                    match c.rel.as_str() {
                        "<" => guard.insert(Atom::new(clock, Rel::Lt, c.k)),
                        "<=" => guard.insert(Atom::new(clock, Rel::Le, c.k)),
                        ">" => guard.insert(Atom::new(clock, Rel::Gt, c.k)),
                        ">=" => guard.insert(Atom::new(clock, Rel::Ge, c.k)),
                        "=" => {
                            guard.insert(Atom::new(clock, Rel::Le, c.k));
                            guard.insert(Atom::new(clock, Rel::Ge, c.k));
                        }
                        other => diags.push(Diagnostic {
                            invariant: "unknown relation",
                            element: other.to_string(),
                        }),
                    }
                }
            }
        }
        let mut resets = BTreeSet::new();
        for r in &e.resets {
            match clock_index.get(r.as_str()) {
                Some(&c) => {
                    resets.insert(c);
                }
                None => diags.push(Diagnostic {
                    invariant: "reset of an undeclared clock",
                    element: r.clone(),
                }),
            }
        }
        edges.push(Edge {
            from: e.from.clone(),
            to: e.to.clone(),
            action: e.action.clone(),
            guard,
            resets,
        });
    }

    if !diags.is_empty() {
        return Err(diags);
    }
    Ok(TimedAutomaton {
        clocks: raw.clocks,
        alphabet: raw.alphabet,
        locations: raw.locations,
        initial: raw.initial,
        edges,
    })
}

pub fn parse_ta(text: &[u8]) -> Result<TimedAutomaton, ParseError> {
    lower(read_raw(text)?).map_err(ParseError::Semantic)
}

/// Semantic diagnostics of a document; syntax errors are returned as `Err`.
pub fn validate_document(text: &[u8]) -> Result<Vec<Diagnostic>, ParseError> {
    match lower(read_raw(text)?) {
        Ok(ta) => Ok(validate(&ta)),
        Err(d) => Ok(d),
    }
}

/// Checks the structural invariants of an in-memory automaton.
pub fn validate(ta: &TimedAutomaton) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    push_empty(&ta.clocks, "clock names must be non-empty", &mut diags);
    push_empty(&ta.locations, "location ids must be non-empty", &mut diags);
    push_duplicates(&ta.clocks, "duplicate clock", &mut diags);
    push_duplicates(&ta.locations, "duplicate location", &mut diags);
    push_duplicates(&ta.alphabet, "duplicate action", &mut diags);
    let locs: HashSet<&str> = ta.locations.iter().map(String::as_str).collect();
    if !locs.contains(ta.initial.as_str()) {
        diags.push(Diagnostic {
            invariant: "initial location is not declared",
            element: ta.initial.clone(),
        });
    }
    let n = ta.clocks.len();
    let bad_clock = |c: ClockId| c.index() == 0 || c.index() > n;
    for e in &ta.edges {
        for l in [&e.from, &e.to] {
            if !locs.contains(l.as_str()) {
                diags.push(Diagnostic {
                    invariant: "edge endpoint is not a declared location",
                    element: l.clone(),
                });
            }
        }
        if !ta.alphabet.contains(&e.action) {
            diags.push(Diagnostic {
                invariant: "edge action is not in the alphabet",
                element: e.action.clone(),
            });
        }
        for a in e.guard.atoms() {
            if bad_clock(a.clock) {
                diags.push(Diagnostic {
                    invariant: "guard uses an undeclared clock",
                    element: format!("#{}", a.clock.index()),
                });
            } else if a.k < 0 {
                diags.push(Diagnostic {
                    invariant: "guard constant must be a non-negative integer",
                    element: format!("{} {} {}", ta.clock_name(a.clock), a.rel.symbol(), a.k),
                });
            }
        }
        for &r in &e.resets {
            if bad_clock(r) {
                diags.push(Diagnostic {
                    invariant: "reset of an undeclared clock",
                    element: format!("#{}", r.index()),
                });
            }
        }
    }
    diags
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn json_list<'a>(items: impl IntoIterator<Item = &'a str>) -> String {
    let parts: Vec<String> = items.into_iter().map(json_str).collect();
    format!("[{}]", parts.join(", "))
}

/// Canonical document text: declaration order everywhere, sorted guard
/// constraints and resets, one edge per line.
pub fn serialize_ta(ta: &TimedAutomaton) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!(
        "  \"clocks\": {},\n",
        json_list(ta.clocks.iter().map(String::as_str))
    ));
    out.push_str(&format!(
        "  \"alphabet\": {},\n",
        json_list(ta.alphabet.iter().map(String::as_str))
    ));
    out.push_str(&format!(
        "  \"locations\": {},\n",
        json_list(ta.locations.iter().map(String::as_str))
    ));
    out.push_str(&format!("  \"initial\": {},\n", json_str(&ta.initial)));
    if ta.edges.is_empty() {
        out.push_str("  \"edges\": []\n");
    } else {
        out.push_str("  \"edges\": [\n");
        for (i, e) in ta.edges.iter().enumerate() {
            let guard = if e.guard.is_true() {
                json_str("true")
            } else {
                let parts: Vec<String> = e
                    .guard
                    .rendered()
                    .into_iter()
                    .map(|(c, r, k)| {
                        format!(
                            "{{\"clock\": {}, \"rel\": {}, \"k\": {}}}",
                            json_str(ta.clock_name(c)),
                            json_str(r),
                            k
                        )
                    })
                    .collect();
                format!("[{}]", parts.join(", "))
            };
            let resets = json_list(e.resets.iter().map(|&c| ta.clock_name(c)));
            out.push_str(&format!(
                "    {{\"from\": {}, \"to\": {}, \"action\": {}, \"guard\": {}, \"resets\": {}}}",
                json_str(&e.from),
                json_str(&e.to),
                json_str(&e.action),
                guard,
                resets
            ));
            out.push_str(if i + 1 < ta.edges.len() { ",\n" } else { "\n" });
        }
        out.push_str("  ]\n");
    }
    out.push_str("}\n");
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    const RUNNING: &str = r#"{
      "clocks": ["x", "y"], "alphabet": ["a", "b"],
      "locations": ["l0", "l1", "l2"], "initial": "l0",
      "edges": [
        {"from": "l0", "to": "l1", "action": "a", "guard": [{"clock": "x", "rel": "<=", "k": 4}], "resets": ["x"]},
        {"from": "l1", "to": "l2", "action": "b", "guard": [{"clock": "x", "rel": ">", "k": 5}, {"clock": "y", "rel": ">", "k": 7}], "resets": []}
      ]}"#;

    #[test]
    fn minimal_document() {
        let ta = parse_ta(
            br#"{"clocks": [], "alphabet": [], "locations": ["l0"], "initial": "l0", "edges": []}"#,
        )
        .unwrap();
        assert_eq!(ta.locations.len(), 1);
        assert_eq!(ta.num_clocks(), 0);
    }

    #[test]
    fn running_example_parses() {
        let ta = parse_ta(RUNNING.as_bytes()).unwrap();
        assert_eq!(ta.num_clocks(), 2);
        assert_eq!(ta.edges.len(), 2);
        assert_eq!(ta.render_guard(&ta.edges[1].guard), "x>5 && y>7");
    }

    #[test]
    fn negative_constant_is_semantic_error() {
        let doc = RUNNING.replace("\"k\": 4", "\"k\": -1");
        match parse_ta(doc.as_bytes()) {
            Err(ParseError::Semantic(d)) => {
                assert_eq!(d.len(), 1);
                assert!(d[0].invariant.contains("non-negative"));
            }
            other => panic!("expected semantic error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_position() {
        match parse_ta(b"{\n  \"clocks\": [,]\n}") {
            Err(ParseError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let doc = RUNNING.replacen("\"initial\"", "\"extra\": 1, \"initial\"", 1);
        assert!(matches!(
            parse_ta(doc.as_bytes()),
            Err(ParseError::Syntax { .. })
        ));
    }

    #[test]
    fn equality_round_trips_as_pair() {
        let doc = RUNNING.replace("\"rel\": \"<=\", \"k\": 4", "\"rel\": \"=\", \"k\": 4");
        let ta = parse_ta(doc.as_bytes()).unwrap();
        assert_eq!(ta.edges[0].guard.len(), 2);
        let text = String::from_utf8(serialize_ta(&ta)).unwrap();
        assert!(text.contains("\"rel\": \"=\""));
        assert_eq!(parse_ta(text.as_bytes()).unwrap(), ta);
    }

    #[test]
    fn empty_guard_serializes_as_true() {
        let ta = parse_ta(
            br#"{"clocks": ["x"], "alphabet": ["a"], "locations": ["l0"], "initial": "l0",
                 "edges": [{"from": "l0", "to": "l0", "action": "a", "guard": [], "resets": []}]}"#,
        )
        .unwrap();
        let text = String::from_utf8(serialize_ta(&ta)).unwrap();
        assert!(text.contains("\"guard\": \"true\""));
    }

    #[test]
    fn serialization_is_canonical() {
        let ta = parse_ta(RUNNING.as_bytes()).unwrap();
        let once = serialize_ta(&ta);
        let twice = serialize_ta(&parse_ta(&once).unwrap());
        assert_eq!(once, twice);
    }

    #[test]
    fn validate_reports_undeclared_location() {
        let doc = RUNNING.replace("\"to\": \"l2\"", "\"to\": \"l9\"");
        let d = validate_document(doc.as_bytes()).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].element, "l9");
    }

    #[test]
    fn validate_reports_undeclared_reset() {
        let doc = RUNNING.replace("\"resets\": [\"x\"]", "\"resets\": [\"z\"]");
        let d = validate_document(doc.as_bytes()).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].element, "z");
    }

    #[test]
    fn validate_well_formed() {
        let ta = parse_ta(RUNNING.as_bytes()).unwrap();
        assert!(validate(&ta).is_empty());
    }

    #[test]
    fn in_memory_validation_catches_bad_edges() {
        let mut ta = parse_ta(RUNNING.as_bytes()).unwrap();
        ta.edges[0].to = "l9".into();
        ta.edges[1].resets.insert(ClockId(3));
        let d = validate(&ta);
        assert_eq!(d.len(), 2);
        assert_eq!(d[0].element, "l9");
    }
}
