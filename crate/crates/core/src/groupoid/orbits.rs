//! Orbits, isotropy groups and spanning trees of arrows.

use super::{ArrowId, FiniteGroup, FiniteGroupoid, UnitId};

/// The isotropy group `G_x^x` at one unit, with its arrows listed so that
/// element `k` of [`IsotropyGroup::group`] is arrow `arrows[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropyGroup {
    pub base: UnitId,
    pub arrows: Vec<ArrowId>,
    pub group: FiniteGroup,
}

impl IsotropyGroup {
    pub fn order(&self) -> usize {
        self.arrows.len()
    }

    /// Group element index of an arrow in `G_x^x`.
    pub fn element_of(&self, arrow: ArrowId) -> Option<usize> {
        self.arrows.iter().position(|&a| a == arrow)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    /// Sorted units of the orbit; the first one is the representative.
    pub units: Vec<UnitId>,
    pub isotropy: IsotropyGroup,
    /// For each unit `y` (aligned with `units`), an arrow `t_y : rep → y`,
    /// with `t_rep` the unit arrow.
    pub spanning: Vec<ArrowId>,
}

impl Orbit {
    pub fn representative(&self) -> UnitId {
        self.units[0]
    }

    pub fn position(&self, x: UnitId) -> Option<usize> {
        self.units.binary_search(&x).ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitPartition {
    pub orbits: Vec<Orbit>,
    /// `orbit_of[x]` is the index of the orbit containing unit `x`.
    pub orbit_of: Vec<usize>,
}

impl OrbitPartition {
    pub fn orbit_containing(&self, x: UnitId) -> &Orbit {
        &self.orbits[self.orbit_of[x]]
    }

    /// Decomposes an arrow `g : y → z` as `t_z · γ · t_y⁻¹` and returns
    /// `(orbit, pos(z), pos(y), γ)` with `γ` a group element index.
    pub fn coordinates(&self, g: &FiniteGroupoid, arrow: ArrowId) -> (usize, usize, usize, usize) {
        let o = self.orbit_of[g.dom(arrow)];
        let orbit = &self.orbits[o];
        let i = orbit.position(g.rng(arrow)).expect("range in orbit");
        let j = orbit.position(g.dom(arrow)).expect("domain in orbit");
        let t_inv_z = g.inverse(orbit.spanning[i]);
        let gamma = g
            .compose(t_inv_z, arrow)
            .and_then(|x| g.compose(x, orbit.spanning[j]))
            .expect("valid groupoid");
        let k = orbit.isotropy.element_of(gamma).expect("isotropy arrow");
        (o, i, j, k)
    }
}

/// Isotropy group at `x` as a Cayley table, identity first.
pub fn isotropy_at(g: &FiniteGroupoid, x: UnitId) -> IsotropyGroup {
    let e = g.unit_arrow(x);
    let mut arrows = vec![e];
    arrows.extend((0..g.arrow_count()).filter(|&a| a != e && g.dom(a) == x && g.rng(a) == x));
    let index = |a: ArrowId| arrows.iter().position(|&b| b == a).expect("closed under composition");
    let table = arrows
        .iter()
        .map(|&a| arrows.iter().map(|&b| index(g.compose(a, b).expect("loops compose"))).collect())
        .collect();
    let group = FiniteGroup::from_table(table).expect("isotropy of a valid groupoid is a group");
    IsotropyGroup { base: x, arrows, group }
}

/// Partitions the units into orbits and extracts one isotropy group per orbit.
///
/// The groupoid must be valid. Isotropy groups at the other units of each
/// orbit are checked to be isomorphic to the representative's; for groups of
/// order at most 24 by explicit search, otherwise by conjugation along the
/// spanning arrows.
pub fn orbits_and_isotropy(g: &FiniteGroupoid) -> OrbitPartition {
    let n = g.unit_count();
    let out_arrows = g.source_fibers();
    let mut orbit_of = vec![usize::MAX; n];
    let mut orbits = Vec::new();
    for start in 0..n {
        if orbit_of[start] != usize::MAX {
            continue;
        }
        let idx = orbits.len();
        // BFS from the representative along arrows leaving it.
        let mut reach: Vec<(UnitId, ArrowId)> = vec![(start, g.unit_arrow(start))];
        orbit_of[start] = idx;
        for &a in &out_arrows[start] {
            let y = g.rng(a);
            if orbit_of[y] == usize::MAX {
                orbit_of[y] = idx;
                reach.push((y, a));
            }
        }
        reach.sort_unstable();
        let isotropy = isotropy_at(g, start);
        let orbit = Orbit {
            units: reach.iter().map(|&(y, _)| y).collect(),
            spanning: reach.iter().map(|&(_, a)| a).collect(),
            isotropy,
        };
        debug_assert!(isotropy_consistent(g, &orbit));
        orbits.push(orbit);
    }
    OrbitPartition { orbits, orbit_of }
}

/// Checks that the isotropy at every unit of the orbit is isomorphic to the
/// representative's.
pub fn isotropy_consistent(g: &FiniteGroupoid, orbit: &Orbit) -> bool {
    let base = &orbit.isotropy;
    orbit.units.iter().zip(&orbit.spanning).all(|(&y, &t)| {
        let other = isotropy_at(g, y);
        if other.order() != base.order() {
            return false;
        }
        if base.order() <= 24 {
            base.group.isomorphism_to(&other.group).is_some()
        } else {
            // γ ↦ t γ t⁻¹ is a homomorphism onto G_y^y
            let inv = g.inverse(t);
            base.arrows.iter().all(|&a| {
                g.compose(t, a)
                    .and_then(|ta| g.compose(ta, inv))
                    .is_some_and(|c| other.element_of(c).is_some())
            })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{ActionSpec, BuildSpec, GroupSpec};

    #[test]
    fn pair_groupoid_single_trivial_orbit() {
        let g = BuildSpec::Pair { units: vec!["a".into(), "b".into(), "c".into(), "d".into()] }
            .build()
            .unwrap();
        let p = orbits_and_isotropy(&g);
        assert_eq!(p.orbits.len(), 1);
        assert_eq!(p.orbits[0].units.len(), 4);
        assert_eq!(p.orbits[0].isotropy.order(), 1);
    }

    #[test]
    fn bundle_of_z2_has_three_orbits() {
        let g = BuildSpec::GroupBundle {
            units: vec!["1".into(), "2".into(), "3".into()],
            group: GroupSpec::cyclic(2),
        }
        .build()
        .unwrap();
        let p = orbits_and_isotropy(&g);
        assert_eq!(p.orbits.len(), 3);
        for o in &p.orbits {
            assert_eq!(o.units.len(), 1);
            assert!(o.isotropy.group.isomorphism_to(&FiniteGroup::cyclic(2)).is_some());
        }
    }

    #[test]
    fn swap_action_is_transitive_and_free() {
        let g = BuildSpec::Action {
            group: GroupSpec::cyclic(2),
            action: ActionSpec::Table {
                points: vec!["1".into(), "2".into()],
                table: vec![vec![0, 1], vec![1, 0]],
            },
        }
        .build()
        .unwrap();
        let p = orbits_and_isotropy(&g);
        assert_eq!(p.orbits.len(), 1);
        assert_eq!(p.orbits[0].isotropy.order(), 1);
    }

    #[test]
    fn coordinates_reconstruct_arrows() {
        let g = BuildSpec::Product {
            left: Box::new(BuildSpec::Pair { units: vec!["a".into(), "b".into()] }),
            right: Box::new(BuildSpec::GroupBundle { units: vec!["*".into()], group: GroupSpec::cyclic(3) }),
        }
        .build()
        .unwrap();
        let p = orbits_and_isotropy(&g);
        let mut seen = std::collections::HashSet::new();
        for a in 0..g.arrow_count() {
            assert!(seen.insert(p.coordinates(&g, a)));
        }
        assert_eq!(seen.len(), 12);
    }
}
