mod common;

use std::collections::BTreeSet;

use common::{labels, pair_cover_is_weak, random_cover, random_groupoid, rng, weak_pair_cover, KINDS};
use gpdlab::gluing::{attach_ends, check_strong_gluing, check_weak_gluing, glue, GlueError, GluingAtlas};
use gpdlab::groupoid::{find_isomorphism, is_pair_groupoid, orbits_and_isotropy, pair, validate, UnitSubset};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weak_pair_atlases_glue_to_the_pair_groupoid(seed in any::<u64>(), n in 1usize..=12) {
        let (ambient, pieces) = weak_pair_cover(&mut rng(seed), n);
        let atlas = GluingAtlas::from_labeled_pieces(ambient.clone(), pieces).unwrap();
        prop_assert!(check_weak_gluing(&atlas).holds);
        let glued = glue(&atlas).unwrap();
        prop_assert!(glued.projections_are_isomorphisms(&atlas));
        prop_assert!(is_pair_groupoid(&glued.groupoid));
        prop_assert_eq!(glued.groupoid.arrow_count(), n * n);
        let target = pair(&ambient).unwrap();
        if n <= 8 {
            prop_assert!(find_isomorphism(&glued.groupoid, &target).unwrap().is_some());
        }
    }

    #[test]
    fn weak_check_matches_the_triple_oracle(seed in any::<u64>(), n in 1usize..=7) {
        let mut r = rng(seed);
        let cover = random_cover(&mut r, n);
        let sets: Vec<BTreeSet<usize>> = cover.iter().map(|c| c.iter().copied().collect()).collect();
        let ambient = labels("x", n);
        let pieces = cover.iter().map(|c| pair(&c.iter().map(|&x| ambient[x].clone()).collect::<Vec<_>>()).unwrap()).collect();
        let atlas = GluingAtlas::from_labeled_pieces(ambient, pieces).unwrap();
        let weak = check_weak_gluing(&atlas).holds;
        prop_assert_eq!(weak, pair_cover_is_weak(n, &sets));
        match glue(&atlas) {
            Ok(g) => prop_assert!(weak && validate(&g.groupoid).is_empty()),
            Err(e) => prop_assert!(!weak && matches!(e, GlueError::WeakFails(..))),
        }
    }

    #[test]
    fn reduction_atlases_strong_implies_weak(seed in any::<u64>(), k in 0usize..KINDS.len()) {
        let mut r = rng(seed);
        let g = random_groupoid(&mut r, KINDS[k]);
        let cover: Vec<UnitSubset> =
            random_cover(&mut r, g.unit_count()).into_iter().map(|c| UnitSubset::new(&g, c).unwrap()).collect();
        let atlas = GluingAtlas::from_reductions(&g, &cover).unwrap();
        let strong = check_strong_gluing(&atlas);
        let weak = check_weak_gluing(&atlas);
        if strong.holds {
            prop_assert!(weak.holds);
            prop_assert_eq!(strong.weak_implied, Some(true));
        }
        if weak.holds {
            let glued = glue(&atlas).unwrap();
            prop_assert!(glued.projections_are_isomorphisms(&atlas));
        }
        // a cover containing all units glues back to g
        let mut full = cover.clone();
        full.push(UnitSubset::all(&g));
        let atlas = GluingAtlas::from_reductions(&g, &full).unwrap();
        prop_assert!(check_strong_gluing(&atlas).holds);
        let glued = glue(&atlas).unwrap();
        prop_assert_eq!(glued.groupoid.arrow_count(), g.arrow_count());
    }

    #[test]
    fn attach_ends_keeps_u_as_an_orbit(seed in any::<u64>()) {
        let (u, v) = common::attach_ends_pieces(&mut rng(seed));
        let glued = attach_ends(&u, &v).unwrap();
        let g = &glued.groupoid;
        prop_assert!(validate(g).is_empty());
        let part = orbits_and_isotropy(g);
        let first = part.orbit_containing(g.unit_index("u0").unwrap());
        // shared units join U's orbit; the ends stay outside it
        prop_assert!(first.units.iter().all(|&x| g.unit_label(x).starts_with('u')));
        prop_assert_eq!(first.units.len(), u.unit_count());
        prop_assert_eq!(first.isotropy.order(), 1);
    }
}

#[test]
fn chain_family() {
    let x = labels("", 3);
    let p = |s: &[usize]| pair(&s.iter().map(|&i| x[i].clone()).collect::<Vec<_>>()).unwrap();
    let family = GluingAtlas::from_labeled_pieces(x.clone(), vec![p(&[0, 1, 2]), p(&[0, 1]), p(&[1, 2])]).unwrap();
    assert!(check_weak_gluing(&family).holds);
    assert_eq!(glue(&family).unwrap().groupoid, pair(&x).unwrap());
    let pieces = vec![p(&[0, 1]), p(&[1, 2])];
    let two = GluingAtlas::from_labeled_pieces(x.clone(), pieces).unwrap();
    let weak = check_weak_gluing(&two);
    assert!(!weak.holds && weak.witness.is_some());
    assert!(!check_strong_gluing(&two).holds);
}
