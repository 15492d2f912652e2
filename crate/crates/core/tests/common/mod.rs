//! Seeded generators and test-side oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use gpdlab::conical::{assemble_layer_groupoid, desingularize, finite_toy_model, LayerDomain, ToyModel};
use gpdlab::gluing::{attach_ends, glue, GluingAtlas};
use gpdlab::groupoid::{
    disjoint_union, fibered_pullback, pair, ActionSpec, BuildSpec, FiniteGroupoid, GroupSpec, RawGroupoid, UnitSubset,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_ARROWS: usize = 200;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn random_group(r: &mut impl Rng) -> GroupSpec {
    match r.random_range(0..5) {
        0 => GroupSpec::Trivial,
        1 | 2 => GroupSpec::cyclic(r.random_range(1..=6)),
        3 => GroupSpec::Symmetric3,
        _ => GroupSpec::Product {
            left: Box::new(GroupSpec::cyclic(2)),
            right: Box::new(GroupSpec::cyclic(r.random_range(2..=3))),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Pair,
    Bundle,
    Action,
    Product,
    Pullback,
    Glued,
}

pub const KINDS: [Kind; 6] = [Kind::Pair, Kind::Bundle, Kind::Action, Kind::Product, Kind::Pullback, Kind::Glued];

/// `Z/n` acting on points through a permutation whose cycle lengths divide `n`.
fn cyclic_action(r: &mut impl Rng) -> BuildSpec {
    let n = r.random_range(1..=6usize);
    let divisors: Vec<usize> = (1..=n).filter(|d| n % d == 0).collect();
    let mut perm = Vec::new();
    for _ in 0..r.random_range(1..=3) {
        let len = divisors[r.random_range(0..divisors.len())];
        let start = perm.len();
        perm.extend((0..len).map(|k| start + (k + 1) % len));
    }
    let points = labels("q", perm.len());
    let table = (0..n)
        .map(|g| {
            (0..perm.len())
                .map(|x| (0..g).fold(x, |y, _| perm[y]))
                .collect::<Vec<_>>()
        })
        .collect();
    BuildSpec::Action { group: GroupSpec::cyclic(n), action: ActionSpec::Table { points, table } }
}

fn bundle_spec(r: &mut impl Rng, prefix: &str) -> BuildSpec {
    BuildSpec::GroupBundle { units: labels(prefix, r.random_range(1..=4)), group: random_group(r) }
}

/// A groupoid of the given kind with at most [`MAX_ARROWS`] arrows.
pub fn random_groupoid(r: &mut impl Rng, kind: Kind) -> FiniteGroupoid {
    loop {
        let g = match kind {
            Kind::Pair => BuildSpec::Pair { units: labels("x", r.random_range(1..=8)) }.build().unwrap(),
            Kind::Bundle => bundle_spec(r, "x").build().unwrap(),
            Kind::Action => {
                if r.random_bool(0.3) {
                    BuildSpec::Action { group: random_group(r), action: ActionSpec::Translation }.build().unwrap()
                } else {
                    cyclic_action(r).build().unwrap()
                }
            }
            Kind::Product => {
                let left = if r.random_bool(0.5) {
                    BuildSpec::Pair { units: labels("a", r.random_range(1..=3)) }
                } else {
                    bundle_spec(r, "a")
                };
                let right = if r.random_bool(0.5) { cyclic_action(r) } else { bundle_spec(r, "b") };
                BuildSpec::Product { left: Box::new(left), right: Box::new(right) }.build().unwrap()
            }
            Kind::Pullback => {
                let base = bundle_spec(r, "h").build().unwrap();
                let k = base.unit_count();
                let n = r.random_range(k..=k + 4);
                let mut f: Vec<usize> = (0..k).chain((k..n).map(|_| r.random_range(0..k))).collect();
                f.shuffle(r);
                fibered_pullback(&labels("y", n), &f, &base).unwrap()
            }
            Kind::Glued => match r.random_range(0..3) {
                0 => {
                    let n = r.random_range(2..=8);
                    let (ambient, pieces) = weak_pair_cover(r, n);
                    glue(&GluingAtlas::from_labeled_pieces(ambient, pieces).unwrap()).unwrap().groupoid
                }
                1 => {
                    let (u, v) = attach_ends_pieces(r);
                    attach_ends(&u, &v).unwrap().groupoid
                }
                _ => {
                    let g = random_groupoid(r, Kind::Product);
                    let cover = random_cover(r, g.unit_count());
                    let cover: Vec<UnitSubset> = cover.into_iter().map(|c| UnitSubset::new(&g, c).unwrap()).collect();
                    let atlas = GluingAtlas::from_reductions(&g, &cover).unwrap();
                    match glue(&atlas) {
                        Ok(gl) => gl.groupoid,
                        Err(_) => continue,
                    }
                }
            },
        };
        if g.arrow_count() <= MAX_ARROWS {
            return g;
        }
    }
}

/// Random subsets of `0..n` whose union is everything.
pub fn random_cover(r: &mut impl Rng, n: usize) -> Vec<Vec<usize>> {
    let pieces = r.random_range(1..=4.min(n.max(1)));
    let mut cover: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); pieces];
    for x in 0..n {
        cover[r.random_range(0..pieces)].insert(x);
        for c in cover.iter_mut() {
            if r.random_bool(0.3) {
                c.insert(x);
            }
        }
    }
    cover.into_iter().filter(|c| !c.is_empty()).map(|c| c.into_iter().collect()).collect()
}

/// Whether the pair groupoids on `cover` satisfy the weak gluing condition,
/// decided directly: any `{x,y}` and `{y,z}` covered must have `{x,y,z}`
/// inside one set.
pub fn pair_cover_is_weak(n: usize, cover: &[BTreeSet<usize>]) -> bool {
    let covered = |s: &[usize]| cover.iter().any(|c| s.iter().all(|x| c.contains(x)));
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if covered(&[x, y]) && covered(&[y, z]) && !covered(&[x, y, z]) {
                    return false;
                }
            }
        }
    }
    true
}

/// A connected cover of `n` points by random sets, repaired until every
/// composable pair lies in one set. The glued groupoid is then `X²`.
pub fn weak_pair_cover(r: &mut impl Rng, n: usize) -> (Vec<String>, Vec<FiniteGroupoid>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(r);
    let mut cover: Vec<BTreeSet<usize>> = Vec::new();
    // a chain of overlapping windows keeps the cover connected
    let mut i = 0;
    while i + 1 < n || cover.is_empty() {
        let len = r.random_range(2..=4).min(n - i).max(1);
        cover.push(order[i..i + len].iter().copied().collect());
        i += len.max(2) - 1;
    }
    loop {
        let covered = |c: &[BTreeSet<usize>], s: &[usize]| c.iter().any(|t| s.iter().all(|x| t.contains(x)));
        let mut missing = None;
        'search: for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if covered(&cover, &[x, y]) && covered(&cover, &[y, z]) && !covered(&cover, &[x, y, z]) {
                        missing = Some([x, y, z]);
                        break 'search;
                    }
                }
            }
        }
        let Some(t) = missing else { break };
        let mut s: BTreeSet<usize> = t.into_iter().collect();
        for x in 0..n {
            if r.random_bool(0.2) {
                s.insert(x);
            }
        }
        cover.push(s);
    }
    let ambient = labels("x", n);
    let pieces = cover
        .iter()
        .map(|c| pair(&c.iter().map(|&x| ambient[x].clone()).collect::<Vec<_>>()).unwrap())
        .collect();
    (ambient, pieces)
}

/// `U²` and a boundary piece `(U∩V)² ⊔ f^⇈(bundle)`.
pub fn attach_ends_pieces(r: &mut impl Rng) -> (FiniteGroupoid, FiniteGroupoid) {
    let nu = r.random_range(1..=5);
    let u = labels("u", nu);
    let shared: Vec<String> = u[..r.random_range(0..=nu.min(2))].to_vec();
    let base = bundle_spec(r, "h").build().unwrap();
    let k = base.unit_count();
    let nf = r.random_range(k..=k + 2);
    let f: Vec<usize> = (0..k).chain((k..nf).map(|_| r.random_range(0..k))).collect();
    let ends = fibered_pullback(&labels("e", nf), &f, &base).unwrap();
    let mut parts = vec![ends];
    if !shared.is_empty() {
        parts.insert(0, pair(&shared).unwrap());
    }
    (pair(&u).unwrap(), disjoint_union(&parts).unwrap())
}

pub fn toy_model(r: &mut impl Rng) -> ToyModel {
    let d = match r.random_range(0..3) {
        0 => LayerDomain::unit_square(),
        1 => LayerDomain::regular_polygon(r.random_range(3..=5)).unwrap(),
        _ => LayerDomain::l_shape(),
    };
    let l = assemble_layer_groupoid(&desingularize(&d).unwrap());
    finite_toy_model(&l, r.random_range(1..=3), r.random_range(1..=3)).unwrap()
}

/// Changes exactly one entry of the structure tables.
pub fn mutate(raw: &RawGroupoid, r: &mut impl Rng) -> RawGroupoid {
    let mut m = raw.clone();
    let (na, nu) = (raw.arrows.len(), raw.units.len());
    let other = |r: &mut ChaCha8Rng, n: usize, old: usize| (old + r.random_range(1..n)) % n;
    let mut r2 = ChaCha8Rng::seed_from_u64(r.random());
    loop {
        match r2.random_range(0..5) {
            0 if na > 1 => {
                let i = r2.random_range(0..m.compose.len());
                m.compose[i].2 = other(&mut r2, na, m.compose[i].2);
            }
            1 if nu > 1 => {
                let i = r2.random_range(0..na);
                m.dom[i] = other(&mut r2, nu, m.dom[i]);
            }
            2 if nu > 1 => {
                let i = r2.random_range(0..na);
                m.rng[i] = other(&mut r2, nu, m.rng[i]);
            }
            3 if na > 1 => {
                let i = r2.random_range(0..na);
                m.inverse[i] = other(&mut r2, na, m.inverse[i]);
            }
            4 if na > 1 => {
                let i = r2.random_range(0..nu);
                m.unit_arrow[i] = other(&mut r2, na, m.unit_arrow[i]);
            }
            _ if na <= 1 && nu <= 1 => {
                // a single identity: drop its only product
                m.compose.clear();
            }
            _ => continue,
        }
        return m;
    }
}

pub fn gaussian_coeffs(r: &mut impl Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(r.random::<f64>() * 2.0 - 1.0, r.random::<f64>() * 2.0 - 1.0)).collect()
}

/// `π_x(a)` computed from the table by summing over factorizations
/// `γ = k·η`, with `η, γ` in the source fiber of `x` (ascending ids).
pub fn oracle_regular_rep(g: &FiniteGroupoid, a: &[Complex64], x: usize) -> DMatrix<Complex64> {
    let fiber: Vec<usize> = (0..g.arrow_count()).filter(|&h| g.dom(h) == x).collect();
    let pos = |h: usize| fiber.iter().position(|&f| f == h);
    let mut m = DMatrix::zeros(fiber.len(), fiber.len());
    for (j, &eta) in fiber.iter().enumerate() {
        for k in 0..g.arrow_count() {
            if let Some(gamma) = g.compose(k, eta) {
                let i = pos(gamma).expect("kη has source x");
                m[(i, j)] += a[k];
            }
        }
    }
    m
}

/// Operator norm from the eigenvalues of the Hermitian `M†M`, independent
/// of the library's SVD path.
pub fn oracle_op_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let eig = (m.adjoint() * m).symmetric_eigenvalues();
    eig.iter().fold(0.0f64, |acc, v| acc.max(*v)).max(0.0).sqrt()
}

pub fn arc(g: FiniteGroupoid) -> Arc<FiniteGroupoid> {
    Arc::new(g)
}
