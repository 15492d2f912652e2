//! Isomorphism search between finite groupoids.
//!
//! A groupoid is determined up to isomorphism by its orbits and isotropy
//! groups: choosing arrows `t_y : rep → y` writes every arrow uniquely as
//! `t_z γ t_y⁻¹`. Two groupoids are therefore isomorphic iff their orbits can
//! be matched by size and isotropy isomorphism class. The search builds the
//! induced arrow map and verifies it on the full composition table.

use thiserror::Error;

use super::{orbits_and_isotropy, validate, ArrowId, FiniteGroupoid, UnitId};

/// Larger groupoids are refused by [`find_isomorphism`].
pub const ISOMORPHISM_ARROW_LIMIT: usize = 200;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsoError {
    #[error("isomorphism search is bounded to {limit} arrows, got {got}")]
    TooLarge { limit: usize, got: usize },
    #[error("input is not a valid groupoid")]
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupoidIsomorphism {
    pub unit_map: Vec<UnitId>,
    pub arrow_map: Vec<ArrowId>,
}

impl GroupoidIsomorphism {
    /// Checks the map is a bijective functor `g → h`.
    pub fn verify(&self, g: &FiniteGroupoid, h: &FiniteGroupoid) -> bool {
        verify_map(g, h, &self.unit_map, &self.arrow_map)
    }
}

/// Whether the given unit and arrow maps form an isomorphism `g → h`.
pub fn verify_map(g: &FiniteGroupoid, h: &FiniteGroupoid, units: &[UnitId], arrows: &[ArrowId]) -> bool {
    if g.unit_count() != h.unit_count()
        || g.arrow_count() != h.arrow_count()
        || units.len() != g.unit_count()
        || arrows.len() != g.arrow_count()
    {
        return false;
    }
    let injective = |m: &[usize], n: usize| {
        let mut seen = vec![false; n];
        m.iter().all(|&x| x < n && !std::mem::replace(&mut seen[x], true))
    };
    if !injective(units, h.unit_count()) || !injective(arrows, h.arrow_count()) {
        return false;
    }
    let structural = (0..g.arrow_count()).all(|a| {
        let b = arrows[a];
        h.dom(b) == units[g.dom(a)] && h.rng(b) == units[g.rng(a)] && h.inverse(b) == arrows[g.inverse(a)]
    }) && (0..g.unit_count()).all(|x| h.unit_arrow(units[x]) == arrows[g.unit_arrow(x)]);
    structural
        && g.composition_table()
            .entries()
            .iter()
            .all(|&(p, q, pq)| h.compose(arrows[p], arrows[q]) == Some(arrows[pq]))
}

/// Finds an isomorphism `g → h` if one exists.
pub fn find_isomorphism(g: &FiniteGroupoid, h: &FiniteGroupoid) -> Result<Option<GroupoidIsomorphism>, IsoError> {
    for x in [g, h] {
        if x.arrow_count() > ISOMORPHISM_ARROW_LIMIT {
            return Err(IsoError::TooLarge { limit: ISOMORPHISM_ARROW_LIMIT, got: x.arrow_count() });
        }
        if !validate(x).is_empty() {
            return Err(IsoError::Invalid);
        }
    }
    if g.unit_count() != h.unit_count() || g.arrow_count() != h.arrow_count() {
        return Ok(None);
    }
    let pg = orbits_and_isotropy(g);
    let ph = orbits_and_isotropy(h);
    if pg.orbits.len() != ph.orbits.len() {
        return Ok(None);
    }

    // Isomorphism of groups is an equivalence relation, so greedy matching
    // of orbits within each (size, order) class is complete.
    let mut used = vec![false; ph.orbits.len()];
    let mut matches = Vec::with_capacity(pg.orbits.len());
    for og in &pg.orbits {
        let found = ph.orbits.iter().enumerate().find_map(|(j, oh)| {
            if used[j] || oh.units.len() != og.units.len() || oh.isotropy.order() != og.isotropy.order() {
                return None;
            }
            og.isotropy.group.isomorphism_to(&oh.isotropy.group).map(|phi| (j, phi))
        });
        match found {
            Some((j, phi)) => {
                used[j] = true;
                matches.push((j, phi));
            }
            None => return Ok(None),
        }
    }

    let mut unit_map = vec![0; g.unit_count()];
    for (og, (j, _)) in pg.orbits.iter().zip(&matches) {
        for (k, &y) in og.units.iter().enumerate() {
            unit_map[y] = ph.orbits[*j].units[k];
        }
    }
    let mut arrow_map = vec![0; g.arrow_count()];
    for (a, slot) in arrow_map.iter_mut().enumerate() {
        let (o, i, jpos, gamma) = pg.coordinates(g, a);
        let (target, phi) = &matches[o];
        let oh = &ph.orbits[*target];
        let mid = oh.isotropy.arrows[phi[gamma]];
        let t_z = oh.spanning[i];
        let t_y_inv = h.inverse(oh.spanning[jpos]);
        *slot = h
            .compose(t_z, mid)
            .and_then(|x| h.compose(x, t_y_inv))
            .expect("valid groupoid");
    }
    let iso = GroupoidIsomorphism { unit_map, arrow_map };
    Ok(iso.verify(g, h).then_some(iso))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{group_bundle, pair, product, BuildSpec, FiniteGroup, GroupSpec};

    fn labels(n: usize, p: &str) -> Vec<String> {
        (0..n).map(|i| format!("{p}{i}")).collect()
    }

    #[test]
    fn relabelled_pair_groupoids_are_isomorphic() {
        let a = pair(&labels(5, "a")).unwrap();
        let b = pair(&labels(5, "b")).unwrap();
        let iso = find_isomorphism(&a, &b).unwrap().unwrap();
        assert!(iso.verify(&a, &b));
    }

    #[test]
    fn distinct_isotropy_is_detected() {
        let z4 = group_bundle(&labels(1, "x"), &FiniteGroup::cyclic(4)).unwrap();
        let v4 = group_bundle(&labels(1, "x"), &FiniteGroup::cyclic(2).direct_product(&FiniteGroup::cyclic(2)))
            .unwrap();
        assert_eq!(find_isomorphism(&z4, &v4).unwrap(), None);
    }

    #[test]
    fn orbit_structure_matters() {
        // 2 units: pair groupoid (4 arrows, one orbit) vs bundle of Z/2 (4 arrows, two orbits)
        let p = pair(&labels(2, "u")).unwrap();
        let b = group_bundle(&labels(2, "u"), &FiniteGroup::cyclic(2)).unwrap();
        assert_eq!(find_isomorphism(&p, &b).unwrap(), None);
    }

    #[test]
    fn product_order_does_not_matter() {
        let p = pair(&labels(2, "u")).unwrap();
        let z3 = BuildSpec::GroupBundle { units: labels(1, "*"), group: GroupSpec::cyclic(3) }.build().unwrap();
        let a = product(&p, &z3);
        let b = product(&z3, &p);
        assert!(find_isomorphism(&a, &b).unwrap().is_some());
    }

    #[test]
    fn size_limit() {
        let big = pair(&labels(15, "u")).unwrap();
        assert!(matches!(find_isomorphism(&big, &big), Err(IsoError::TooLarge { .. })));
    }
}
