//! Standard constructions: pair groupoids, bundles of groups, action
//! groupoids, products, fibered pull-backs and disjoint unions.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ArrowId, FiniteGroup, FiniteGroupoid, GroupError, RawGroupoid, UnitId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("group: {0}")]
    Group(#[from] GroupError),
    #[error("group tables must list the identity as element 0")]
    IdentityNotFirst,
    #[error("not a right action: {0}")]
    NotAnAction(String),
    #[error("pull-back map: {0}")]
    BadMap(String),
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
}

/// A group given by name or by table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GroupSpec {
    Trivial,
    Cyclic { order: usize },
    Symmetric3,
    Product { left: Box<GroupSpec>, right: Box<GroupSpec> },
    /// Cayley table with the identity as element 0.
    Table { table: Vec<Vec<usize>> },
}

impl GroupSpec {
    pub fn cyclic(order: usize) -> Self {
        GroupSpec::Cyclic { order }
    }

    pub fn group(&self) -> Result<FiniteGroup, BuildError> {
        Ok(match self {
            GroupSpec::Trivial => FiniteGroup::trivial(),
            GroupSpec::Cyclic { order } => {
                if *order == 0 {
                    return Err(GroupError::Empty.into());
                }
                FiniteGroup::cyclic(*order)
            }
            GroupSpec::Symmetric3 => FiniteGroup::symmetric3(),
            GroupSpec::Product { left, right } => left.group()?.direct_product(&right.group()?),
            GroupSpec::Table { table } => {
                let g = FiniteGroup::from_table(table.clone())?;
                if g.table() != table.as_slice() {
                    return Err(BuildError::IdentityNotFirst);
                }
                g
            }
        })
    }
}

/// How the group acts (on the right) in an action groupoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ActionSpec {
    /// `table[g][x]` is the index of `x·g`.
    Table { points: Vec<String>, table: Vec<Vec<usize>> },
    /// The group acting on itself by right translation.
    Translation,
    Trivial { points: Vec<String> },
}

/// Declarative description of a groupoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BuildSpec {
    Pair { units: Vec<String> },
    GroupBundle { units: Vec<String>, group: GroupSpec },
    Action { group: GroupSpec, action: ActionSpec },
    Product { left: Box<BuildSpec>, right: Box<BuildSpec> },
    FiberedPullback { units: Vec<String>, map: Vec<String>, base: Box<BuildSpec> },
    DisjointUnion { parts: Vec<BuildSpec> },
    UnitsOnly { units: Vec<String> },
}

impl BuildSpec {
    pub fn build(&self) -> Result<FiniteGroupoid, BuildError> {
        match self {
            BuildSpec::Pair { units } => pair(units),
            BuildSpec::GroupBundle { units, group } => group_bundle(units, &group.group()?),
            BuildSpec::Action { group, action: spec } => {
                let grp = group.group()?;
                let (points, table) = match spec {
                    ActionSpec::Table { points, table } => (points.clone(), table.clone()),
                    ActionSpec::Translation => (
                        (0..grp.order()).map(|k| k.to_string()).collect(),
                        (0..grp.order()).map(|g| (0..grp.order()).map(|x| grp.mul(x, g)).collect()).collect(),
                    ),
                    ActionSpec::Trivial { points } => {
                        (points.clone(), vec![(0..points.len()).collect(); grp.order()])
                    }
                };
                action(&points, &grp, &table)
            }
            BuildSpec::Product { left, right } => Ok(product(&left.build()?, &right.build()?)),
            BuildSpec::FiberedPullback { units, map, base } => {
                let h = base.build()?;
                let f = map
                    .iter()
                    .map(|l| h.unit_index(l).ok_or_else(|| BuildError::BadMap(format!("unknown base unit {l:?}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                fibered_pullback(units, &f, &h)
            }
            BuildSpec::DisjointUnion { parts } => {
                let built = parts.iter().map(|p| p.build()).collect::<Result<Vec<_>, _>>()?;
                disjoint_union(&built)
            }
            BuildSpec::UnitsOnly { units } => {
                check_distinct(units)?;
                Ok(FiniteGroupoid::units_only(units.clone()))
            }
        }
    }
}

fn check_distinct(labels: &[String]) -> Result<(), BuildError> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(BuildError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

/// Builds the tables from structural maps and a multiplication rule that is
/// only ever called on composable pairs.
#[allow(clippy::too_many_arguments)]
fn assemble(
    units: Vec<String>,
    arrows: Vec<String>,
    dom: Vec<UnitId>,
    rng: Vec<UnitId>,
    unit_arrow: Vec<ArrowId>,
    inverse: Vec<ArrowId>,
    mul: impl Fn(ArrowId, ArrowId) -> ArrowId,
) -> FiniteGroupoid {
    let mut by_rng = vec![Vec::new(); units.len()];
    for (a, &r) in rng.iter().enumerate() {
        by_rng[r].push(a);
    }
    let mut compose = Vec::new();
    for g in 0..arrows.len() {
        for &h in &by_rng[dom[g]] {
            compose.push((g, h, mul(g, h)));
        }
    }
    FiniteGroupoid::from_raw(RawGroupoid { units, arrows, dom, rng, unit_arrow, inverse, compose })
}

/// The pair groupoid `X × X`; arrow `(x,y)` goes from `y` to `x`.
pub fn pair(units: &[String]) -> Result<FiniteGroupoid, BuildError> {
    check_distinct(units)?;
    let n = units.len();
    let idx = |x: usize, y: usize| x * n + y;
    Ok(assemble(
        units.to_vec(),
        (0..n * n).map(|a| format!("({},{})", units[a / n], units[a % n])).collect(),
        (0..n * n).map(|a| a % n).collect(),
        (0..n * n).map(|a| a / n).collect(),
        (0..n).map(|x| idx(x, x)).collect(),
        (0..n * n).map(|a| idx(a % n, a / n)).collect(),
        |g, h| idx(g / n, h % n),
    ))
}

/// The trivial bundle `X × Γ` with `d = r`.
pub fn group_bundle(units: &[String], group: &FiniteGroup) -> Result<FiniteGroupoid, BuildError> {
    check_distinct(units)?;
    let m = group.order();
    let n = units.len();
    Ok(assemble(
        units.to_vec(),
        (0..n * m).map(|a| format!("({},{})", units[a / m], a % m)).collect(),
        (0..n * m).map(|a| a / m).collect(),
        (0..n * m).map(|a| a / m).collect(),
        (0..n).map(|x| x * m).collect(),
        (0..n * m).map(|a| (a / m) * m + group.inv(a % m)).collect(),
        |g, h| (g / m) * m + group.mul(g % m, h % m),
    ))
}

/// The one-object groupoid of a group.
pub fn one_object_group(group: &FiniteGroup) -> FiniteGroupoid {
    group_bundle(&["*".to_string()], group).expect("single label")
}

/// Action groupoid of a right action, `table[g][x] = x·g`.
///
/// Arrow `(x,g)` has range `x` and domain `x·g⁻¹`; the product is
/// `(x,h)(x·h⁻¹,g) = (x,gh)`.
pub fn action(points: &[String], group: &FiniteGroup, table: &[Vec<usize>]) -> Result<FiniteGroupoid, BuildError> {
    check_distinct(points)?;
    let n = points.len();
    let m = group.order();
    if table.len() != m || table.iter().any(|row| row.len() != n || row.iter().any(|&y| y >= n)) {
        return Err(BuildError::NotAnAction("table shape".into()));
    }
    let act = |x: usize, g: usize| table[g][x];
    for x in 0..n {
        if act(x, 0) != x {
            return Err(BuildError::NotAnAction(format!("identity moves {}", points[x])));
        }
        for g in 0..m {
            for h in 0..m {
                if act(act(x, g), h) != act(x, group.mul(g, h)) {
                    return Err(BuildError::NotAnAction(format!(
                        "({}·{g})·{h} ≠ {}·({g}{h})",
                        points[x], points[x]
                    )));
                }
            }
        }
    }
    let id = |x: usize, g: usize| x * m + g;
    Ok(assemble(
        points.to_vec(),
        (0..n * m).map(|a| format!("({},{})", points[a / m], a % m)).collect(),
        (0..n * m).map(|a| act(a / m, group.inv(a % m))).collect(),
        (0..n * m).map(|a| a / m).collect(),
        (0..n).map(|x| id(x, 0)).collect(),
        // (x,h)⁻¹ = (x·h⁻¹, h⁻¹)
        (0..n * m)
            .map(|a| {
                let hinv = group.inv(a % m);
                id(act(a / m, hinv), hinv)
            })
            .collect(),
        |a, b| id(a / m, group.mul(b % m, a % m)),
    ))
}

/// Cartesian product; unit `(x;u)` has index `x·|H⁰| + u`.
pub fn product(g: &FiniteGroupoid, h: &FiniteGroupoid) -> FiniteGroupoid {
    let (nu, na) = (h.unit_count(), h.arrow_count());
    let units = (0..g.unit_count() * nu)
        .map(|x| format!("({};{})", g.unit_label(x / nu), h.unit_label(x % nu)))
        .collect();
    let arrows = (0..g.arrow_count() * na)
        .map(|a| format!("({};{})", g.arrow_label(a / na), h.arrow_label(a % na)))
        .collect();
    let total = g.arrow_count() * na;
    assemble(
        units,
        arrows,
        (0..total).map(|a| g.dom(a / na) * nu + h.dom(a % na)).collect(),
        (0..total).map(|a| g.rng(a / na) * nu + h.rng(a % na)).collect(),
        (0..g.unit_count() * nu).map(|x| g.unit_arrow(x / nu) * na + h.unit_arrow(x % nu)).collect(),
        (0..total).map(|a| g.inverse(a / na) * na + h.inverse(a % na)).collect(),
        |a, b| {
            let l = g.compose(a / na, b / na).expect("composable");
            let r = h.compose(a % na, b % na).expect("composable");
            l * na + r
        },
    )
}

/// `f^⇈(H)`: arrows `(x,γ,y)` with `f(x) = r(γ)`, `f(y) = d(γ)`.
///
/// `f` must be surjective onto the units of `H`.
pub fn fibered_pullback(units: &[String], f: &[UnitId], h: &FiniteGroupoid) -> Result<FiniteGroupoid, BuildError> {
    check_distinct(units)?;
    if f.len() != units.len() {
        return Err(BuildError::BadMap(format!("{} images for {} units", f.len(), units.len())));
    }
    if let Some(&bad) = f.iter().find(|&&b| b >= h.unit_count()) {
        return Err(BuildError::BadMap(format!("image {bad} out of range")));
    }
    let hit: HashSet<UnitId> = f.iter().copied().collect();
    if let Some(missed) = (0..h.unit_count()).find(|b| !hit.contains(b)) {
        return Err(BuildError::BadMap(format!("base unit {:?} not covered", h.unit_label(missed))));
    }
    let mut preimage = vec![Vec::new(); h.unit_count()];
    for (x, &b) in f.iter().enumerate() {
        preimage[b].push(x);
    }
    let mut triples = Vec::new();
    for gamma in 0..h.arrow_count() {
        for &x in &preimage[h.rng(gamma)] {
            for &y in &preimage[h.dom(gamma)] {
                triples.push((x, gamma, y));
            }
        }
    }
    triples.sort_unstable();
    let index: std::collections::HashMap<(UnitId, ArrowId, UnitId), ArrowId> =
        triples.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let look = |t: (UnitId, ArrowId, UnitId)| index[&t];
    Ok(assemble(
        units.to_vec(),
        triples
            .iter()
            .map(|&(x, g, y)| format!("({},{},{})", units[x], h.arrow_label(g), units[y]))
            .collect(),
        triples.iter().map(|t| t.2).collect(),
        triples.iter().map(|t| t.0).collect(),
        (0..units.len()).map(|x| look((x, h.unit_arrow(f[x]), x))).collect(),
        triples.iter().map(|&(x, g, y)| look((y, h.inverse(g), x))).collect(),
        |a, b| {
            let (x, g, _) = triples[a];
            let (_, k, z) = triples[b];
            look((x, h.compose(g, k).expect("composable"), z))
        },
    ))
}

/// Disjoint union; unit and arrow labels must not collide.
pub fn disjoint_union(parts: &[FiniteGroupoid]) -> Result<FiniteGroupoid, BuildError> {
    let mut raw = RawGroupoid::default();
    for p in parts {
        let (u0, a0) = (raw.units.len(), raw.arrows.len());
        let r = p.to_raw();
        raw.units.extend(r.units);
        raw.arrows.extend(r.arrows);
        raw.dom.extend(r.dom.iter().map(|x| x + u0));
        raw.rng.extend(r.rng.iter().map(|x| x + u0));
        raw.unit_arrow.extend(r.unit_arrow.iter().map(|a| a + a0));
        raw.inverse.extend(r.inverse.iter().map(|a| a + a0));
        raw.compose.extend(r.compose.iter().map(|&(g, h, gh)| (g + a0, h + a0, gh + a0)));
    }
    check_distinct(&raw.units)?;
    check_distinct(&raw.arrows)?;
    Ok(FiniteGroupoid::from_raw(raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{find_isomorphism, orbits_and_isotropy, validate};

    fn labels(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn pair_of_three() {
        let g = pair(&labels(&["1", "2", "3"])).unwrap();
        assert_eq!(g.arrow_count(), 9);
        assert!(validate(&g).is_empty());
        let a = g.arrow_index("(1,2)").unwrap();
        let b = g.arrow_index("(2,3)").unwrap();
        assert_eq!(g.arrow_label(g.compose(a, b).unwrap()), "(1,3)");
        assert_eq!(g.compose(b, a), None);
    }

    #[test]
    fn translation_action_is_pair_groupoid() {
        let g = BuildSpec::Action { group: GroupSpec::cyclic(4), action: ActionSpec::Translation }
            .build()
            .unwrap();
        assert!(validate(&g).is_empty());
        let p = pair(&labels(&["0", "1", "2", "3"])).unwrap();
        assert!(find_isomorphism(&g, &p).unwrap().is_some());
    }

    #[test]
    fn nonabelian_translation_action_validates() {
        let g = BuildSpec::Action { group: GroupSpec::Symmetric3, action: ActionSpec::Translation }
            .build()
            .unwrap();
        assert!(validate(&g).is_empty());
        assert_eq!(orbits_and_isotropy(&g).orbits.len(), 1);
    }

    #[test]
    fn left_action_is_rejected_for_nonabelian_groups() {
        let s3 = FiniteGroup::symmetric3();
        let points: Vec<String> = (0..6).map(|k| k.to_string()).collect();
        // x ↦ g·x is a left action, which fails the right-action law
        let table: Vec<Vec<usize>> = (0..6).map(|g| (0..6).map(|x| s3.mul(g, x)).collect()).collect();
        assert!(matches!(action(&points, &s3, &table), Err(BuildError::NotAnAction(_))));
    }

    #[test]
    fn trivial_group_action_is_units_only() {
        let g = BuildSpec::Action {
            group: GroupSpec::Trivial,
            action: ActionSpec::Trivial { points: labels(&["p", "q", "r"]) },
        }
        .build()
        .unwrap();
        assert_eq!(g.arrow_count(), 3);
        assert!(find_isomorphism(&g, &FiniteGroupoid::units_only(labels(&["p", "q", "r"]))).unwrap().is_some());
    }

    #[test]
    fn pullback_of_z2_over_a_point() {
        let g = BuildSpec::FiberedPullback {
            units: labels(&["a", "b", "c"]),
            map: labels(&["•", "•", "•"]),
            base: Box::new(BuildSpec::GroupBundle { units: labels(&["•"]), group: GroupSpec::cyclic(2) }),
        }
        .build()
        .unwrap();
        assert_eq!(g.arrow_count(), 18);
        assert!(validate(&g).is_empty());
        let expected = product(
            &pair(&labels(&["a", "b", "c"])).unwrap(),
            &one_object_group(&FiniteGroup::cyclic(2)),
        );
        assert!(find_isomorphism(&g, &expected).unwrap().is_some());
    }

    #[test]
    fn pullback_requires_covering_map() {
        let h = group_bundle(&labels(&["p", "q"]), &FiniteGroup::cyclic(2)).unwrap();
        assert!(matches!(
            fibered_pullback(&labels(&["a", "b"]), &[0, 0], &h),
            Err(BuildError::BadMap(_))
        ));
    }

    #[test]
    fn group_table_validation() {
        assert!(GroupSpec::Table { table: vec![vec![1, 0], vec![0, 1]] }.group().is_err());
        assert!(GroupSpec::Table { table: vec![vec![0, 1], vec![1, 0]] }.group().is_ok());
    }

    #[test]
    fn disjoint_union_rejects_collisions() {
        let a = pair(&labels(&["x"])).unwrap();
        assert!(disjoint_union(&[a.clone(), a]).is_err());
    }
}
