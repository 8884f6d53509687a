//! Difference bound matrices over clocks `x1..xn` plus the zero clock `x0`.
//!
//! Entry `(i, j)` bounds `xi - xj`. Every [`Dbm`] value is canonical and
//! non-empty; operations that can produce the empty zone return `Option`.

use std::cmp::Ordering;
use std::fmt;

use crate::ta::{Atom, ClockId, Guard, Rel};

/// A bound `(m, <)` or `(m, ≤)` or `+∞`.
///
/// Encoded as `2m` for strict and `2m + 1` for non-strict bounds, so the
/// integer order is the bound order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bound(i64);

impl Bound {
    pub const INF: Bound = Bound(i64::MAX);
    pub const LE_ZERO: Bound = Bound(1);
    pub const LT_ZERO: Bound = Bound(0);

    pub fn le(m: i64) -> Bound {
        Bound(2 * m + 1)
    }

    pub fn lt(m: i64) -> Bound {
        Bound(2 * m)
    }

    pub fn new(m: i64, strict: bool) -> Bound {
        if strict {
            Bound::lt(m)
        } else {
            Bound::le(m)
        }
    }

    pub fn is_inf(self) -> bool {
        self == Bound::INF
    }

    /// The constant `m`, or `None` for `+∞`.
    pub fn value(self) -> Option<i64> {
        (!self.is_inf()).then_some(self.0 >> 1)
    }

    pub fn is_strict(self) -> bool {
        !self.is_inf() && self.0 & 1 == 0
    }

    pub fn add(self, other: Bound) -> Bound {
        if self.is_inf() || other.is_inf() {
            Bound::INF
        } else {
            Bound((((self.0 >> 1) + (other.0 >> 1)) << 1) | (self.0 & other.0 & 1))
        }
    }

    /// Bound of the reversed difference that holds exactly where `self` fails:
    /// `¬(xi - xj ≺ m)` is `xj - xi ≺' -m`. Undefined for `+∞`.
    pub fn complement(self) -> Bound {
        debug_assert!(!self.is_inf());
        Bound(1 - self.0)
    }

    /// Whether `diff` (a scaled difference `num / den`) satisfies the bound.
    pub fn admits(self, diff: i64, den: i64) -> bool {
        match self.value() {
            None => true,
            Some(m) if self.is_strict() => diff < m * den,
            Some(m) => diff <= m * den,
        }
    }
}

impl fmt::Debug for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            None => write!(f, "<inf"),
            Some(m) if self.is_strict() => write!(f, "<{m}"),
            Some(m) => write!(f, "<={m}"),
        }
    }
}

/// Set-theoretic relation between two zones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Equal,
    Subset,
    Superset,
    Disjoint,
    Overlap,
}

/// A canonical, non-empty zone.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dbm {
    dim: usize,
    m: Vec<Bound>,
}

/// `(i, j, b)` meaning `xi - xj ≺ b`, with index 0 the zero clock.
pub type Constraint = (usize, usize, Bound);

/// The DBM constraint equivalent to an elementary guard atom.
pub fn atom_constraint(a: &Atom) -> Constraint {
    let x = a.clock.index();
    match a.rel {
        Rel::Lt => (x, 0, Bound::lt(a.k)),
        Rel::Le => (x, 0, Bound::le(a.k)),
        Rel::Gt => (0, x, Bound::lt(-a.k)),
        Rel::Ge => (0, x, Bound::le(-a.k)),
    }
}

impl Dbm {
    /// All non-negative valuations of `n` clocks.
    pub fn universe(n: usize) -> Dbm {
        let dim = n + 1;
        let mut m = vec![Bound::INF; dim * dim];
        for j in 0..dim {
            m[j] = Bound::LE_ZERO;
            m[j * dim + j] = Bound::LE_ZERO;
        }
        Dbm { dim, m }
    }

    /// The single valuation with every clock at 0.
    pub fn zero(n: usize) -> Dbm {
        let dim = n + 1;
        Dbm {
            dim,
            m: vec![Bound::LE_ZERO; dim * dim],
        }
    }

    /// Closes an arbitrary matrix; `None` if it has a negative cycle.
    pub fn from_matrix(dim: usize, m: Vec<Bound>) -> Option<Dbm> {
        assert_eq!(m.len(), dim * dim, "matrix shape");
        let mut d = Dbm { dim, m };
        for i in 0..dim {
            d.m[i * dim + i] = d.get(i, i).min(Bound::LE_ZERO);
            d.m[i] = d.get(0, i).min(Bound::LE_ZERO);
        }
        d.close().then_some(d)
    }

    pub fn from_constraints(n: usize, cs: &[Constraint]) -> Option<Dbm> {
        let mut d = Dbm::universe(n);
        for &(i, j, b) in cs {
            if !d.tighten(i, j, b) {
                return None;
            }
        }
        Some(d)
    }

    pub fn from_guard(n: usize, g: &Guard) -> Option<Dbm> {
        let cs: Vec<Constraint> = g.atoms().map(atom_constraint).collect();
        Dbm::from_constraints(n, &cs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_clocks(&self) -> usize {
        self.dim - 1
    }

    pub fn get(&self, i: usize, j: usize) -> Bound {
        self.m[i * self.dim + j]
    }

    fn set(&mut self, i: usize, j: usize, b: Bound) {
        self.m[i * self.dim + j] = b;
    }

    /// Floyd–Warshall closure; false on a negative cycle.
    fn close(&mut self) -> bool {
        let n = self.dim;
        for k in 0..n {
            for i in 0..n {
                let ik = self.get(i, k);
                if ik.is_inf() {
                    continue;
                }
                for j in 0..n {
                    let via = ik.add(self.get(k, j));
                    if via < self.get(i, j) {
                        self.set(i, j, via);
                    }
                }
            }
        }
        (0..n).all(|i| self.get(i, i) >= Bound::LE_ZERO)
    }

    /// Adds `xi - xj ≺ b` and restores canonical form in O(n²).
    /// Returns false (leaving `self` unspecified) if the result is empty.
    fn tighten(&mut self, i: usize, j: usize, b: Bound) -> bool {
        if b >= self.get(i, j) {
            return true;
        }
        if b.add(self.get(j, i)) < Bound::LE_ZERO {
            return false;
        }
        self.set(i, j, b);
        let n = self.dim;
        for k in 0..n {
            let ki = self.get(k, i);
            if ki.is_inf() {
                continue;
            }
            let kij = ki.add(b);
            for l in 0..n {
                let via = kij.add(self.get(j, l));
                if via < self.get(k, l) {
                    self.set(k, l, via);
                }
            }
        }
        true
    }

    /// `self ∩ {xi - xj ≺ b}`.
    pub fn constrain(&self, c: Constraint) -> Option<Dbm> {
        let mut d = self.clone();
        d.tighten(c.0, c.1, c.2).then_some(d)
    }

    pub fn constrain_atom(&self, a: &Atom) -> Option<Dbm> {
        self.constrain(atom_constraint(a))
    }

    pub fn constrain_guard(&self, g: &Guard) -> Option<Dbm> {
        let mut d = self.clone();
        for a in g.atoms() {
            let (i, j, b) = atom_constraint(a);
            if !d.tighten(i, j, b) {
                return None;
            }
        }
        Some(d)
    }

    pub fn intersect(&self, other: &Dbm) -> Option<Dbm> {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut d = self.clone();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j && !d.tighten(i, j, other.get(i, j)) {
                    return None;
                }
            }
        }
        Some(d)
    }

    pub fn intersects(&self, other: &Dbm) -> bool {
        self.intersect(other).is_some()
    }

    /// Inclusion test; exact because both operands are canonical.
    pub fn is_subset_of(&self, other: &Dbm) -> bool {
        self.m.iter().zip(&other.m).all(|(a, b)| a <= b)
    }

    pub fn relation(&self, other: &Dbm) -> Relation {
        match (self.is_subset_of(other), other.is_subset_of(self)) {
            (true, true) => Relation::Equal,
            (true, false) => Relation::Subset,
            (false, true) => Relation::Superset,
            _ if self.intersects(other) => Relation::Overlap,
            _ => Relation::Disjoint,
        }
    }

    pub fn is_universe(&self) -> bool {
        *self == Dbm::universe(self.num_clocks())
    }

    pub fn satisfies_guard(&self, g: &Guard) -> bool {
        g.atoms().all(|a| {
            let (i, j, b) = atom_constraint(a);
            self.get(i, j) <= b
        })
    }

    pub fn future(&self) -> Dbm {
        let mut d = self.clone();
        for i in 1..self.dim {
            d.set(i, 0, Bound::INF);
        }
        d
    }

    /// Down-closure under delay, within the non-negative orthant.
    pub fn past(&self) -> Dbm {
        let mut d = self.clone();
        for j in 1..self.dim {
            d.set(0, j, Bound::LE_ZERO);
        }
        let closed = d.close();
        debug_assert!(closed);
        d
    }

    pub fn reset(&self, clocks: impl IntoIterator<Item = ClockId>) -> Dbm {
        let mut d = self.clone();
        for c in clocks {
            let x = c.index();
            for j in 0..self.dim {
                if j != x {
                    d.set(x, j, d.get(0, j));
                    d.set(j, x, d.get(j, 0));
                }
            }
        }
        d
    }

    pub fn free(&self, clocks: impl IntoIterator<Item = ClockId>) -> Dbm {
        let mut d = self.clone();
        for c in clocks {
            let x = c.index();
            for j in 0..self.dim {
                if j != x {
                    d.set(x, j, Bound::INF);
                    d.set(j, x, d.get(j, 0));
                }
            }
            d.set(0, x, Bound::LE_ZERO);
        }
        d
    }

    /// Valuations whose image under resetting `clocks` lies in `self`.
    pub fn inverse_reset(&self, clocks: impl IntoIterator<Item = ClockId> + Clone) -> Option<Dbm> {
        let mut d = self.clone();
        for c in clocks.clone() {
            if !d.tighten(c.index(), 0, Bound::LE_ZERO) {
                return None;
            }
        }
        Some(d.free(clocks))
    }

    /// Split of `self` by `other`: returns `self ∩ other` and a
    /// list of pairwise-disjoint zones covering `self \ other`.
    ///
    /// The finite constraints of `other` are visited clock bounds first
    /// (row 0, then column 0), then clock differences, each row-major. With
    /// this order, splitting unions of regions yields unions of regions.
    pub fn split_difference(&self, other: &Dbm) -> (Option<Dbm>, Vec<Dbm>) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let bounds = (1..n).map(|j| (0, j)).chain((1..n).map(|i| (i, 0)));
        let diffs = (1..n).flat_map(|i| (1..n).filter(move |&j| j != i).map(move |j| (i, j)));
        let mut pieces = Vec::new();
        let mut rest = self.clone();
        for (i, j) in bounds.chain(diffs) {
            {
                let b = other.get(i, j);
                if b.is_inf() || rest.get(i, j) <= b {
                    continue;
                }
                if let Some(outside) = rest.constrain((j, i, b.complement())) {
                    pieces.push(outside);
                }
                if !rest.tighten(i, j, b) {
                    return (None, pieces);
                }
            }
        }
        (Some(rest), pieces)
    }

    /// Pieces of `self` that each lie entirely on one side of every atom of `g`.
    ///
    /// For each atom the list is rebuilt as all lower halves followed by all
    /// upper halves.
    pub fn canonical_decompose(&self, g: &Guard) -> Vec<Dbm> {
        let mut pieces = vec![self.clone()];
        for a in g.atoms() {
            let (lower, upper) = if a.rel.is_upper() {
                (*a, a.negate())
            } else {
                (a.negate(), *a)
            };
            let mut below = Vec::new();
            let mut above = Vec::new();
            for p in &pieces {
                below.extend(p.constrain_atom(&lower));
                above.extend(p.constrain_atom(&upper));
            }
            below.extend(above);
            pieces = below;
        }
        pieces
    }

    /// Smallest zone containing both operands (pointwise maximum).
    pub fn hull(&self, other: &Dbm) -> Dbm {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Dbm {
            dim: self.dim,
            m: self
                .m
                .iter()
                .zip(&other.m)
                .map(|(a, b)| *a.max(b))
                .collect(),
        }
    }

    /// The union as a zone, or `None` when the union is not convex.
    pub fn convex_union(&self, other: &Dbm) -> Option<Dbm> {
        let env = self.hull(other);
        let (_, pieces) = env.split_difference(self);
        pieces.iter().all(|p| p.is_subset_of(other)).then_some(env)
    }

    /// Max-constant extrapolation. `max[i]` is the constant of clock `i`
    /// (`max[0]` is ignored); a negative constant frees the clock.
    pub fn extrapolate(&self, max: &[i64]) -> Dbm {
        assert_eq!(max.len(), self.dim, "one constant per clock plus x0");
        let k = |i: usize| if i == 0 { 0 } else { max[i].max(0) };
        let mut d = self.clone();
        let mut changed = false;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i == j {
                    continue;
                }
                let b = d.get(i, j);
                if b.is_inf() {
                    continue;
                }
                if i != 0 && b > Bound::le(k(i)) {
                    d.set(i, j, Bound::INF);
                    changed = true;
                } else if j != 0 && b < Bound::lt(-k(j)) {
                    d.set(i, j, Bound::lt(-k(j)));
                    changed = true;
                }
            }
        }
        if changed {
            let closed = d.close();
            debug_assert!(closed);
        }
        let unused: Vec<ClockId> = (1..self.dim).filter(|&i| max[i] < 0).map(ClockId).collect();
        d.free(unused)
    }

    /// Splits the zone into pieces that are unions of regions for the
    /// per-clock constants `max` (`max[0]` ignored, negative = irrelevant clock).
    ///
    /// The zone is cut at `x = max[x]` for every clock; in a piece where `x`
    /// exceeds its constant, every constraint on `x` except `x > max[x]` is
    /// dropped. Clocks with a negative constant are freed. Each piece contains
    /// the part of `self` it was cut from and stays inside its region closure.
    pub fn saturate(&self, max: &[i64]) -> Vec<Dbm> {
        assert_eq!(max.len(), self.dim, "one constant per clock plus x0");
        let irrelevant: Vec<ClockId> = (1..self.dim).filter(|&i| max[i] < 0).map(ClockId).collect();
        let base = self.free(irrelevant);
        let cuts = Guard::from_atoms(
            (1..self.dim)
                .filter(|&i| max[i] >= 0)
                .map(|i| Atom::new(ClockId(i), Rel::Le, max[i])),
        );
        base.canonical_decompose(&cuts)
            .into_iter()
            .map(|p| {
                let mut q = p.clone();
                for i in 1..self.dim {
                    if max[i] >= 0 && p.get(0, i) <= Bound::lt(-max[i]) {
                        q = q
                            .free([ClockId(i)])
                            .constrain((0, i, Bound::lt(-max[i])))
                            .expect("freed clock admits large values");
                    }
                }
                q
            })
            .collect()
    }

    pub fn is_bounded_above(&self) -> bool {
        (1..self.dim).any(|i| !self.get(i, 0).is_inf())
    }

    /// Clocks `x` whose upper bound implies every other finite upper bound,
    /// i.e. whose facet `x = h` contains the maximal-delay limit of every point.
    pub fn fully_bounding_clocks(&self) -> Vec<ClockId> {
        (1..self.dim)
            .filter(|&x| {
                let h = self.get(x, 0);
                !h.is_inf()
                    && (1..self.dim)
                        .filter(|&i| i != x)
                        .all(|i| self.get(i, 0) == self.get(i, x).add(h))
            })
            .map(ClockId)
            .collect()
    }

    /// Whether `xi - xj` is fixed to a single value throughout the zone.
    pub fn fixed_difference(&self, i: usize, j: usize) -> Option<i64> {
        let up = self.get(i, j);
        let down = self.get(j, i);
        match (up.value(), down.value()) {
            (Some(a), Some(b)) if !up.is_strict() && !down.is_strict() && a == -b => Some(a),
            _ => None,
        }
    }

    /// Membership of the valuation `num[k] / den` for clock `k + 1`.
    pub fn contains_scaled(&self, num: &[i64], den: i64) -> bool {
        assert_eq!(num.len(), self.num_clocks(), "one coordinate per clock");
        let v = |i: usize| if i == 0 { 0 } else { num[i - 1] };
        if num.iter().any(|&c| c < 0) {
            return false;
        }
        (0..self.dim)
            .all(|i| (0..self.dim).all(|j| i == j || self.get(i, j).admits(v(i) - v(j), den)))
    }

    /// Human-readable conjunction, e.g. `x<=5 && 0<=y-x<2`.
    pub fn render(&self, names: &[String]) -> String {
        let name = |i: usize| names[i - 1].as_str();
        let mut parts = Vec::new();
        for i in 1..self.dim {
            let lo = self.get(0, i);
            let hi = self.get(i, 0);
            parts.extend(interval(name(i), lo, hi, true));
        }
        for i in 1..self.dim {
            for j in i + 1..self.dim {
                // differences already implied by the clock bounds are omitted
                let shown = |a: usize, b: usize| {
                    let d = self.get(a, b);
                    if self.get(a, 0).add(self.get(0, b)) <= d {
                        Bound::INF
                    } else {
                        d
                    }
                };
                let term = format!("{}-{}", name(j), name(i));
                parts.extend(interval(&term, shown(i, j), shown(j, i), false));
            }
        }
        if parts.is_empty() {
            "true".to_string()
        } else {
            parts.join(" && ")
        }
    }

    /// Sort key that orders zones deterministically.
    pub fn entries(&self) -> &[Bound] {
        &self.m
    }
}

/// Renders `lo_bound` (bound on `-term`) and `hi` (bound on `term`).
fn interval(term: &str, lo: Bound, hi: Bound, nonneg: bool) -> Option<String> {
    let op = |b: Bound| if b.is_strict() { "<" } else { "<=" };
    let lower = lo.value().map(|m| -m);
    let trivial_lower = nonneg && lo == Bound::LE_ZERO;
    match (lower, hi.value()) {
        (Some(l), Some(h)) if l == h && !lo.is_strict() && !hi.is_strict() => {
            Some(format!("{term}={h}"))
        }
        (Some(l), Some(h)) if !trivial_lower => Some(format!("{l}{}{term}{}{h}", op(lo), op(hi))),
        (_, Some(h)) => Some(format!("{term}{}{h}", op(hi))),
        (Some(l), None) if !trivial_lower => {
            let rel = if lo.is_strict() { ">" } else { ">=" };
            Some(format!("{term}{rel}{l}"))
        }
        _ => None,
    }
}

impl fmt::Debug for Dbm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..self.dim).map(|i| format!("x{i}")).collect();
        write!(f, "Dbm[{}]", self.render(&names))
    }
}

impl PartialOrd for Dbm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dbm {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.dim, &self.m).cmp(&(other.dim, &other.m))
    }
}
