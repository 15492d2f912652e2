//! Exact finite groupoids.
//!
//! A [`FiniteGroupoid`] stores its units and arrows by dense index together
//! with the five structural maps: domain, range, unit, inverse and the partial
//! composition. Topology is discrete, so every unit subset is open and every
//! hypothesis about invariance, orbits and isotropy can be checked exactly.
//!
//! Composition follows the categorical convention: `compose(g, h)` is
//! defined exactly when `dom(g) == rng(h)`, and then
//! `dom(gh) = dom(h)`, `rng(gh) = rng(g)`.

mod build;
mod group;
mod iso;
mod orbits;

pub use build::{
    action, disjoint_union, fibered_pullback, group_bundle, one_object_group, pair, product, ActionSpec,
    BuildError, BuildSpec, GroupSpec,
};
pub use group::{FiniteGroup, GroupError};
pub use iso::{find_isomorphism, verify_map, GroupoidIsomorphism, IsoError, ISOMORPHISM_ARROW_LIMIT};
pub use orbits::{isotropy_at, isotropy_consistent, orbits_and_isotropy, IsotropyGroup, Orbit, OrbitPartition};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type UnitId = usize;
pub type ArrowId = usize;

/// Composition tables with at most this many composable pairs use a dense
/// table; larger ones fall back to a hash map.
pub const DENSE_PAIR_LIMIT: usize = 10_000;
const DENSE_CELL_LIMIT: usize = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupoidError {
    #[error("unknown unit id {0}")]
    UnknownUnit(String),
    #[error("unknown arrow id {0}")]
    UnknownArrow(String),
    #[error("groupoid axioms violated: {0}")]
    Invalid(ValidationReport),
}

/// Partial composition `(g, h) ↦ gh`.
#[derive(Debug, Clone)]
pub enum CompositionTable {
    Dense { arrows: usize, cells: Vec<u32> },
    Sparse(HashMap<(ArrowId, ArrowId), ArrowId>),
}

const EMPTY: u32 = u32::MAX;

impl CompositionTable {
    fn from_entries(arrows: usize, entries: &[(ArrowId, ArrowId, ArrowId)]) -> Self {
        if entries.len() <= DENSE_PAIR_LIMIT && arrows * arrows <= DENSE_CELL_LIMIT {
            let mut cells = vec![EMPTY; arrows * arrows];
            for &(g, h, gh) in entries {
                if g < arrows && h < arrows {
                    cells[g * arrows + h] = gh as u32;
                }
            }
            CompositionTable::Dense { arrows, cells }
        } else {
            CompositionTable::Sparse(entries.iter().map(|&(g, h, gh)| ((g, h), gh)).collect())
        }
    }

    pub fn get(&self, g: ArrowId, h: ArrowId) -> Option<ArrowId> {
        match self {
            CompositionTable::Dense { arrows, cells } => {
                if g >= *arrows || h >= *arrows {
                    return None;
                }
                let v = cells[g * arrows + h];
                (v != EMPTY).then_some(v as usize)
            }
            CompositionTable::Sparse(map) => map.get(&(g, h)).copied(),
        }
    }

    fn set(&mut self, g: ArrowId, h: ArrowId, value: Option<ArrowId>) {
        match self {
            CompositionTable::Dense { arrows, cells } => {
                cells[g * *arrows + h] = value.map_or(EMPTY, |v| v as u32);
            }
            CompositionTable::Sparse(map) => match value {
                Some(v) => {
                    map.insert((g, h), v);
                }
                None => {
                    map.remove(&(g, h));
                }
            },
        }
    }

    /// All defined triples `(g, h, gh)`, sorted.
    pub fn entries(&self) -> Vec<(ArrowId, ArrowId, ArrowId)> {
        let mut out: Vec<_> = match self {
            CompositionTable::Dense { arrows, cells } => cells
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != EMPTY)
                .map(|(i, &v)| (i / arrows, i % arrows, v as usize))
                .collect(),
            CompositionTable::Sparse(map) => map.iter().map(|(&(g, h), &gh)| (g, h, gh)).collect(),
        };
        out.sort_unstable();
        out
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, CompositionTable::Dense { .. })
    }
}

impl PartialEq for CompositionTable {
    fn eq(&self, other: &Self) -> bool {
        self.entries() == other.entries()
    }
}

/// Exact combinatorial groupoid.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroupoid {
    units: Vec<String>,
    arrows: Vec<String>,
    dom: Vec<UnitId>,
    rng: Vec<UnitId>,
    unit_arrow: Vec<ArrowId>,
    inverse: Vec<ArrowId>,
    compose: CompositionTable,
}

/// Unvalidated structural data; the loader and mutation tests go through it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawGroupoid {
    pub units: Vec<String>,
    pub arrows: Vec<String>,
    pub dom: Vec<UnitId>,
    pub rng: Vec<UnitId>,
    pub unit_arrow: Vec<ArrowId>,
    pub inverse: Vec<ArrowId>,
    pub compose: Vec<(ArrowId, ArrowId, ArrowId)>,
}

impl FiniteGroupoid {
    /// Builds without checking the axioms. Use [`validate`] afterwards.
    pub fn from_raw(raw: RawGroupoid) -> Self {
        let compose = CompositionTable::from_entries(raw.arrows.len(), &raw.compose);
        Self {
            units: raw.units,
            arrows: raw.arrows,
            dom: raw.dom,
            rng: raw.rng,
            unit_arrow: raw.unit_arrow,
            inverse: raw.inverse,
            compose,
        }
    }

    /// Builds and validates.
    pub fn new(raw: RawGroupoid) -> Result<Self, GroupoidError> {
        let g = Self::from_raw(raw);
        let report = validate(&g);
        if report.is_empty() {
            Ok(g)
        } else {
            Err(GroupoidError::Invalid(report))
        }
    }

    pub fn to_raw(&self) -> RawGroupoid {
        RawGroupoid {
            units: self.units.clone(),
            arrows: self.arrows.clone(),
            dom: self.dom.clone(),
            rng: self.rng.clone(),
            unit_arrow: self.unit_arrow.clone(),
            inverse: self.inverse.clone(),
            compose: self.compose.entries(),
        }
    }

    /// Groupoid with only identity arrows.
    pub fn units_only(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self::from_raw(RawGroupoid {
            arrows: labels.iter().map(|l| format!("1_{l}")).collect(),
            units: labels,
            dom: (0..n).collect(),
            rng: (0..n).collect(),
            unit_arrow: (0..n).collect(),
            inverse: (0..n).collect(),
            compose: (0..n).map(|i| (i, i, i)).collect(),
        })
    }

    pub fn empty() -> Self {
        Self::units_only(Vec::new())
    }

    pub fn unit_count(&self) -> usize {
        self.units.len()
    }
    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }
    pub fn unit_label(&self, x: UnitId) -> &str {
        &self.units[x]
    }
    pub fn arrow_label(&self, g: ArrowId) -> &str {
        &self.arrows[g]
    }
    pub fn unit_labels(&self) -> &[String] {
        &self.units
    }
    pub fn arrow_labels(&self) -> &[String] {
        &self.arrows
    }
    pub fn dom(&self, g: ArrowId) -> UnitId {
        self.dom[g]
    }
    pub fn rng(&self, g: ArrowId) -> UnitId {
        self.rng[g]
    }
    pub fn unit_arrow(&self, x: UnitId) -> ArrowId {
        self.unit_arrow[x]
    }
    pub fn inverse(&self, g: ArrowId) -> ArrowId {
        self.inverse[g]
    }
    pub fn compose(&self, g: ArrowId, h: ArrowId) -> Option<ArrowId> {
        self.compose.get(g, h)
    }
    pub fn composition_table(&self) -> &CompositionTable {
        &self.compose
    }

    pub fn unit_index(&self, label: &str) -> Option<UnitId> {
        self.units.iter().position(|u| u == label)
    }
    pub fn arrow_index(&self, label: &str) -> Option<ArrowId> {
        self.arrows.iter().position(|a| a == label)
    }

    /// The source fiber `G_x = d⁻¹(x)`, in arrow order.
    pub fn source_fiber(&self, x: UnitId) -> Vec<ArrowId> {
        (0..self.arrow_count()).filter(|&g| self.dom[g] == x).collect()
    }

    /// The range fiber `Gˣ = r⁻¹(x)`, in arrow order.
    pub fn range_fiber(&self, x: UnitId) -> Vec<ArrowId> {
        (0..self.arrow_count()).filter(|&g| self.rng[g] == x).collect()
    }

    /// Source fibers for all units at once.
    pub fn source_fibers(&self) -> Vec<Vec<ArrowId>> {
        let mut fibers = vec![Vec::new(); self.unit_count()];
        for g in 0..self.arrow_count() {
            fibers[self.dom[g]].push(g);
        }
        fibers
    }

    pub fn range_fibers(&self) -> Vec<Vec<ArrowId>> {
        let mut fibers = vec![Vec::new(); self.unit_count()];
        for g in 0..self.arrow_count() {
            fibers[self.rng[g]].push(g);
        }
        fibers
    }

    /// Every composable pair `(g, h)` (i.e. `dom g = rng h`).
    pub fn composable_pairs(&self) -> Vec<(ArrowId, ArrowId)> {
        let by_rng = self.range_fibers();
        let mut pairs = Vec::new();
        for g in 0..self.arrow_count() {
            for &h in &by_rng[self.dom[g]] {
                pairs.push((g, h));
            }
        }
        pairs
    }

    /// Overwrites one composition cell. Only meant for mutation testing.
    pub fn set_composition(&mut self, g: ArrowId, h: ArrowId, value: Option<ArrowId>) {
        self.compose.set(g, h, value);
    }
}

/// Axiom checked by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    IndexRange,
    UnitEndpoints,
    Composability,
    MissingComposite,
    CompositeEndpoints,
    Associativity,
    LeftIdentity,
    RightIdentity,
    Inverse,
}

/// One failed axiom instance with the arrows (or units) witnessing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub witness: Vec<String>,
}

/// Result of [`validate`]; empty iff every axiom holds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Up to [`ValidationReport::WITNESS_CAP`] witnesses per axiom.
    pub violations: Vec<Violation>,
    /// Total number of failures per axiom, including unlisted ones.
    pub counts: BTreeMap<Axiom, usize>,
}

impl ValidationReport {
    pub const WITNESS_CAP: usize = 16;

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn violated(&self, axiom: Axiom) -> bool {
        self.counts.contains_key(&axiom)
    }

    fn push(&mut self, axiom: Axiom, witness: Vec<String>) {
        let count = self.counts.entry(axiom).or_insert(0);
        *count += 1;
        if *count <= Self::WITNESS_CAP {
            self.violations.push(Violation { axiom, witness });
        }
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for v in &self.violations {
            if !first {
                write!(f, "; ")?;
            }
            first = false;
            write!(f, "{:?} at ({})", v.axiom, v.witness.join(","))?;
        }
        Ok(())
    }
}

/// Checks every groupoid axiom and lists each violation with a witness.
pub fn validate(g: &FiniteGroupoid) -> ValidationReport {
    let mut report = ValidationReport::default();
    let nu = g.units.len();
    let na = g.arrows.len();

    // Index ranges first; nothing else is meaningful without them.
    if g.dom.len() != na || g.rng.len() != na || g.inverse.len() != na || g.unit_arrow.len() != nu {
        report.push(Axiom::IndexRange, vec!["table lengths".into()]);
        return report;
    }
    for a in 0..na {
        if g.dom[a] >= nu || g.rng[a] >= nu || g.inverse[a] >= na {
            report.push(Axiom::IndexRange, vec![g.arrows[a].clone()]);
        }
    }
    for x in 0..nu {
        if g.unit_arrow[x] >= na {
            report.push(Axiom::IndexRange, vec![g.units[x].clone()]);
        }
    }
    let entries = g.compose.entries();
    for &(a, b, ab) in &entries {
        if a >= na || b >= na || ab >= na {
            report.push(Axiom::IndexRange, vec![format!("{a}"), format!("{b}"), format!("{ab}")]);
        }
    }
    if !report.is_empty() {
        return report;
    }

    let lbl = |a: ArrowId| g.arrows[a].clone();

    for x in 0..nu {
        let e = g.unit_arrow[x];
        if g.dom[e] != x || g.rng[e] != x {
            report.push(Axiom::UnitEndpoints, vec![g.units[x].clone(), lbl(e)]);
        }
    }

    // Table defined exactly on composable pairs, with correct endpoints.
    for &(a, b, ab) in &entries {
        if g.dom[a] != g.rng[b] {
            report.push(Axiom::Composability, vec![lbl(a), lbl(b)]);
        } else if g.dom[ab] != g.dom[b] || g.rng[ab] != g.rng[a] {
            report.push(Axiom::CompositeEndpoints, vec![lbl(a), lbl(b), lbl(ab)]);
        }
    }
    let by_rng = g.range_fibers();
    for a in 0..na {
        for &b in &by_rng[g.dom[a]] {
            if g.compose(a, b).is_none() {
                report.push(Axiom::MissingComposite, vec![lbl(a), lbl(b)]);
            }
        }
    }

    // Associativity on composable triples (a, b, c): (ab)c = a(bc).
    for a in 0..na {
        for &b in &by_rng[g.dom[a]] {
            let Some(ab) = g.compose(a, b) else { continue };
            for &c in &by_rng[g.dom[b]] {
                let left = g.compose(ab, c);
                let right = g.compose(b, c).and_then(|bc| g.compose(a, bc));
                if left.is_none() || left != right {
                    report.push(Axiom::Associativity, vec![lbl(a), lbl(b), lbl(c)]);
                }
            }
        }
    }

    for a in 0..na {
        if g.compose(g.unit_arrow[g.rng[a]], a) != Some(a) {
            report.push(Axiom::LeftIdentity, vec![lbl(a)]);
        }
        if g.compose(a, g.unit_arrow[g.dom[a]]) != Some(a) {
            report.push(Axiom::RightIdentity, vec![lbl(a)]);
        }
        let inv = g.inverse[a];
        let ok = g.compose(a, inv) == Some(g.unit_arrow[g.rng[a]])
            && g.compose(inv, a) == Some(g.unit_arrow[g.dom[a]]);
        if !ok {
            report.push(Axiom::Inverse, vec![lbl(a), lbl(inv)]);
        }
    }
    report
}

/// A set of units of a particular groupoid, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct UnitSubset(Vec<UnitId>);

impl UnitSubset {
    pub fn new(g: &FiniteGroupoid, ids: impl IntoIterator<Item = UnitId>) -> Result<Self, GroupoidError> {
        let set: BTreeSet<UnitId> = ids.into_iter().collect();
        if let Some(&bad) = set.iter().find(|&&x| x >= g.unit_count()) {
            return Err(GroupoidError::UnknownUnit(bad.to_string()));
        }
        Ok(Self(set.into_iter().collect()))
    }

    pub fn from_labels<S: AsRef<str>>(g: &FiniteGroupoid, labels: &[S]) -> Result<Self, GroupoidError> {
        let ids = labels
            .iter()
            .map(|l| {
                g.unit_index(l.as_ref())
                    .ok_or_else(|| GroupoidError::UnknownUnit(l.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(g, ids)
    }

    pub fn all(g: &FiniteGroupoid) -> Self {
        Self((0..g.unit_count()).collect())
    }

    pub fn members(&self) -> &[UnitId] {
        &self.0
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn contains(&self, x: UnitId) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn complement(&self, g: &FiniteGroupoid) -> Self {
        Self((0..g.unit_count()).filter(|&x| !self.contains(x)).collect())
    }

    fn check(&self, g: &FiniteGroupoid) -> Result<(), GroupoidError> {
        match self.0.last() {
            Some(&x) if x >= g.unit_count() => Err(GroupoidError::UnknownUnit(x.to_string())),
            _ => Ok(()),
        }
    }
}

/// `G|_A` together with the index maps back into `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub groupoid: FiniteGroupoid,
    /// New unit index → unit of the parent.
    pub unit_map: Vec<UnitId>,
    /// New arrow index → arrow of the parent.
    pub arrow_map: Vec<ArrowId>,
}

/// Restricts `G` to the arrows with both endpoints in `A`.
pub fn reduction(g: &FiniteGroupoid, a: &UnitSubset) -> Result<Reduction, GroupoidError> {
    a.check(g)?;
    let mut unit_new = vec![usize::MAX; g.unit_count()];
    for (i, &x) in a.members().iter().enumerate() {
        unit_new[x] = i;
    }
    let arrow_map: Vec<ArrowId> = (0..g.arrow_count())
        .filter(|&h| a.contains(g.dom(h)) && a.contains(g.rng(h)))
        .collect();
    let mut arrow_new = vec![usize::MAX; g.arrow_count()];
    for (i, &h) in arrow_map.iter().enumerate() {
        arrow_new[h] = i;
    }
    let compose = g
        .compose
        .entries()
        .into_iter()
        .filter(|&(p, q, _)| arrow_new[p] != usize::MAX && arrow_new[q] != usize::MAX)
        .map(|(p, q, pq)| (arrow_new[p], arrow_new[q], arrow_new[pq]))
        .collect();
    let raw = RawGroupoid {
        units: a.members().iter().map(|&x| g.units[x].clone()).collect(),
        arrows: arrow_map.iter().map(|&h| g.arrows[h].clone()).collect(),
        dom: arrow_map.iter().map(|&h| unit_new[g.dom(h)]).collect(),
        rng: arrow_map.iter().map(|&h| unit_new[g.rng(h)]).collect(),
        unit_arrow: a.members().iter().map(|&x| arrow_new[g.unit_arrow(x)]).collect(),
        inverse: arrow_map.iter().map(|&h| arrow_new[g.inverse(h)]).collect(),
        compose,
    };
    Ok(Reduction {
        groupoid: FiniteGroupoid::from_raw(raw),
        unit_map: a.members().to_vec(),
        arrow_map,
    })
}

/// `r(d⁻¹(A))`: the union of all orbits meeting `A`.
pub fn saturation(g: &FiniteGroupoid, a: &UnitSubset) -> Result<UnitSubset, GroupoidError> {
    a.check(g)?;
    let reached: BTreeSet<UnitId> = (0..g.arrow_count())
        .filter(|&h| a.contains(g.dom(h)))
        .map(|h| g.rng(h))
        .collect();
    Ok(UnitSubset(reached.into_iter().collect()))
}

/// `A` is invariant iff no arrow leaves it.
pub fn is_invariant(g: &FiniteGroupoid, a: &UnitSubset) -> bool {
    (0..g.arrow_count()).all(|h| a.contains(g.dom(h)) == a.contains(g.rng(h)))
}

/// Whether `G` is the pair groupoid of its units: exactly one arrow per
/// ordered pair of units.
pub fn is_pair_groupoid(g: &FiniteGroupoid) -> bool {
    let n = g.unit_count();
    if g.arrow_count() != n * n {
        return false;
    }
    let mut seen = vec![false; n * n];
    (0..g.arrow_count()).all(|h| !std::mem::replace(&mut seen[g.rng(h) * n + g.dom(h)], true))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(n: usize) -> FiniteGroupoid {
        BuildSpec::Pair { units: (1..=n).map(|i| i.to_string()).collect() }
            .build()
            .unwrap()
    }

    #[test]
    fn pair_groupoid_on_three_units_validates() {
        let g = pair(3);
        assert_eq!(g.arrow_count(), 9);
        assert!(validate(&g).is_empty());
        assert!(is_pair_groupoid(&g));
    }

    #[test]
    fn broken_composability_is_reported_with_witness() {
        let g = pair(3);
        let mut raw = g.to_raw();
        // (1,2)·(1,2) is not composable: dom(1,2) = 2 ≠ rng(1,2) = 1.
        let a = g.arrow_index("(1,2)").unwrap();
        raw.compose.push((a, a, a));
        let report = validate(&FiniteGroupoid::from_raw(raw));
        assert!(report.violated(Axiom::Composability));
        let v = report.violations.iter().find(|v| v.axiom == Axiom::Composability).unwrap();
        assert_eq!(v.witness, vec!["(1,2)".to_string(), "(1,2)".to_string()]);
    }

    #[test]
    fn z2_as_one_object_groupoid_validates() {
        let g = BuildSpec::GroupBundle { units: vec!["*".into()], group: GroupSpec::cyclic(2) }
            .build()
            .unwrap();
        assert_eq!(g.arrow_count(), 2);
        assert!(validate(&g).is_empty());
    }

    #[test]
    fn reductions() {
        let g = pair(4);
        let all = reduction(&g, &UnitSubset::all(&g)).unwrap();
        assert_eq!(all.groupoid, g);

        let two = reduction(&g, &UnitSubset::from_labels(&g, &["1", "2"]).unwrap()).unwrap();
        assert!(is_pair_groupoid(&two.groupoid));
        assert_eq!(two.groupoid.unit_labels(), &["1".to_string(), "2".to_string()]);
        assert!(validate(&two.groupoid).is_empty());

        let none = reduction(&g, &UnitSubset::default()).unwrap();
        assert_eq!(none.groupoid.arrow_count(), 0);
        assert_eq!(none.groupoid.unit_count(), 0);
    }

    #[test]
    fn unknown_units_are_errors() {
        let g = pair(2);
        assert!(matches!(UnitSubset::from_labels(&g, &["9"]), Err(GroupoidError::UnknownUnit(_))));
        assert!(UnitSubset::new(&g, [5]).is_err());
        let foreign = UnitSubset::all(&pair(5));
        assert!(reduction(&g, &foreign).is_err());
        assert!(saturation(&g, &foreign).is_err());
    }

    #[test]
    fn saturation_examples() {
        let g = pair(4);
        let s = saturation(&g, &UnitSubset::from_labels(&g, &["3"]).unwrap()).unwrap();
        assert_eq!(s, UnitSubset::all(&g));

        let bundle = BuildSpec::GroupBundle {
            units: vec!["a".into(), "b".into(), "c".into()],
            group: GroupSpec::cyclic(3),
        }
        .build()
        .unwrap();
        let a = UnitSubset::from_labels(&bundle, &["a", "c"]).unwrap();
        assert_eq!(saturation(&bundle, &a).unwrap(), a);
    }

    #[test]
    fn large_tables_go_sparse() {
        let g = BuildSpec::GroupBundle {
            units: (0..40).map(|i| format!("u{i}")).collect(),
            group: GroupSpec::cyclic(20),
        }
        .build()
        .unwrap();
        // 40 * 20 * 20 = 16000 composable pairs
        assert!(!g.composition_table().is_dense());
        assert!(validate(&g).is_empty());
        assert!(pair(5).composition_table().is_dense());
    }
}
