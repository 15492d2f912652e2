//! Finite groups given by multiplication tables.
//!
//! Elements are `0..order`; the identity is always element `0` after
//! normalization. Isotropy groups of a groupoid are extracted into this form
//! so that they can be compared and searched for isomorphisms.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("multiplication table is empty")]
    Empty,
    #[error("multiplication table row {row} has length {len}, expected {order}")]
    Ragged { row: usize, len: usize, order: usize },
    #[error("table entry ({a},{b}) = {value} is out of range")]
    OutOfRange { a: usize, b: usize, value: usize },
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("element {0} has no inverse")]
    NoInverse(usize),
    #[error("associativity fails on ({0},{1},{2})")]
    NotAssociative(usize, usize, usize),
}

/// A finite group stored as a dense Cayley table with identity `0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    /// The cyclic group ℤ/n with element `k` standing for `k mod n`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0, "cyclic group of order 0");
        let table = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        let inverse = (0..n).map(|a| (n - a) % n).collect();
        Self { table, inverse }
    }

    /// The symmetric group S₃, the smallest non-abelian group.
    pub fn symmetric3() -> Self {
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [1, 0, 2],
            [0, 2, 1],
            [2, 1, 0],
            [1, 2, 0],
            [2, 0, 1],
        ];
        let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
        let table = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| index([a[b[0]], a[b[1]], a[b[2]]]))
                    .collect()
            })
            .collect();
        Self::from_table(table).expect("S3 table is a group")
    }

    pub fn direct_product(&self, other: &FiniteGroup) -> FiniteGroup {
        let m = other.order();
        let n = self.order() * m;
        let table = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| self.mul(a / m, b / m) * m + other.mul(a % m, b % m))
                    .collect()
            })
            .collect();
        Self::from_table(table).expect("product of groups is a group")
    }

    /// Validates a Cayley table and relabels so that the identity is `0`.
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let n = table.len();
        if n == 0 {
            return Err(GroupError::Empty);
        }
        for (row, r) in table.iter().enumerate() {
            if r.len() != n {
                return Err(GroupError::Ragged { row, len: r.len(), order: n });
            }
            for (b, &value) in r.iter().enumerate() {
                if value >= n {
                    return Err(GroupError::OutOfRange { a: row, b, value });
                }
            }
        }
        let e = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or(GroupError::NoIdentity)?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(GroupError::NotAssociative(a, b, c));
                    }
                }
            }
        }
        // swap e <-> 0
        let relabel = |x: usize| {
            if x == e {
                0
            } else if x == 0 {
                e
            } else {
                x
            }
        };
        let mut t = vec![vec![0; n]; n];
        for a in 0..n {
            for b in 0..n {
                t[relabel(a)][relabel(b)] = relabel(table[a][b]);
            }
        }
        let mut inverse = vec![0; n];
        for (a, inv) in inverse.iter_mut().enumerate() {
            *inv = (0..n)
                .find(|&b| t[a][b] == 0 && t[b][a] == 0)
                .ok_or(GroupError::NoInverse(a))?;
        }
        Ok(Self { table: t, inverse })
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut k = 1;
        let mut x = a;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn is_cyclic(&self) -> bool {
        let n = self.order();
        (0..n).any(|a| self.element_order(a) == n)
    }

    fn order_profile(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.order()).map(|a| self.element_order(a)).collect();
        v.sort_unstable();
        v
    }

    /// Subgroup generated by `gens`, as a membership mask.
    fn closure(&self, gens: &[usize]) -> Vec<bool> {
        let mut inside = vec![false; self.order()];
        inside[0] = true;
        let mut stack = vec![0];
        while let Some(a) = stack.pop() {
            for &g in gens {
                let b = self.mul(a, g);
                if !inside[b] {
                    inside[b] = true;
                    stack.push(b);
                }
            }
        }
        inside
    }

    /// A small generating set, chosen greedily by decreasing element order.
    pub fn generators(&self) -> Vec<usize> {
        let mut candidates: Vec<usize> = (1..self.order()).collect();
        candidates.sort_by_key(|&a| std::cmp::Reverse(self.element_order(a)));
        let mut gens = Vec::new();
        let mut inside = self.closure(&gens);
        for a in candidates {
            if !inside[a] {
                gens.push(a);
                inside = self.closure(&gens);
            }
        }
        gens
    }

    /// Searches for an isomorphism `self → other`; returns the element map.
    ///
    /// Generators of `self` are sent to elements of matching order and the
    /// assignment is extended along words; every complete candidate is
    /// verified on the full table.
    pub fn isomorphism_to(&self, other: &FiniteGroup) -> Option<Vec<usize>> {
        if self.order() != other.order()
            || self.is_abelian() != other.is_abelian()
            || self.order_profile() != other.order_profile()
        {
            return None;
        }
        let gens = self.generators();
        let mut images = Vec::with_capacity(gens.len());
        self.extend_search(other, &gens, &mut images)
    }

    fn extend_search(
        &self,
        other: &FiniteGroup,
        gens: &[usize],
        images: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        let partial = self.extend_map(other, &gens[..images.len()], images)?;
        if images.len() == gens.len() {
            let n = self.order();
            let bijective = {
                let mut seen = vec![false; n];
                partial.iter().all(|&x| x != usize::MAX && !std::mem::replace(&mut seen[x], true))
            };
            let hom = (0..n).all(|a| {
                (0..n).all(|b| partial[self.mul(a, b)] == other.mul(partial[a], partial[b]))
            });
            return (bijective && hom).then_some(partial);
        }
        let g = gens[images.len()];
        let ord = self.element_order(g);
        for cand in 0..other.order() {
            if other.element_order(cand) != ord {
                continue;
            }
            images.push(cand);
            if let Some(found) = self.extend_search(other, gens, images) {
                return Some(found);
            }
            images.pop();
        }
        None
    }

    /// Extends generator images to the generated subgroup; `None` on conflict.
    fn extend_map(&self, other: &FiniteGroup, gens: &[usize], images: &[usize]) -> Option<Vec<usize>> {
        let n = self.order();
        let mut map = vec![usize::MAX; n];
        map[0] = 0;
        let mut stack = vec![0];
        while let Some(a) = stack.pop() {
            for (&g, &img) in gens.iter().zip(images) {
                let b = self.mul(a, g);
                let target = other.mul(map[a], img);
                if map[b] == usize::MAX {
                    map[b] = target;
                    stack.push(b);
                } else if map[b] != target {
                    return None;
                }
            }
        }
        Some(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_tables() {
        let z4 = FiniteGroup::cyclic(4);
        assert_eq!(z4.mul(3, 2), 1);
        assert_eq!(z4.inv(1), 3);
        assert!(z4.is_cyclic() && z4.is_abelian());
        assert_eq!(z4.element_order(2), 2);
    }

    #[test]
    fn from_table_moves_identity_to_zero() {
        // Z/2 with identity written as element 1
        let g = FiniteGroup::from_table(vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(g.mul(0, 1), 1);
        assert_eq!(g.mul(1, 1), 0);
    }

    #[test]
    fn rejects_non_groups() {
        assert_eq!(
            FiniteGroup::from_table(vec![vec![0, 0], vec![0, 0]]),
            Err(GroupError::NoIdentity)
        );
        assert!(matches!(
            FiniteGroup::from_table(vec![vec![0, 1], vec![1, 1]]),
            Err(GroupError::NoInverse(1)) | Err(GroupError::NotAssociative(..))
        ));
    }

    #[test]
    fn klein_is_not_cyclic_four() {
        let v4 = FiniteGroup::cyclic(2).direct_product(&FiniteGroup::cyclic(2));
        assert!(v4.isomorphism_to(&FiniteGroup::cyclic(4)).is_none());
        assert!(!v4.is_cyclic());
    }

    #[test]
    fn z2_times_z3_is_z6() {
        let a = FiniteGroup::cyclic(2).direct_product(&FiniteGroup::cyclic(3));
        let map = a.isomorphism_to(&FiniteGroup::cyclic(6)).expect("Z2xZ3 ~ Z6");
        let z6 = FiniteGroup::cyclic(6);
        for x in 0..6 {
            for y in 0..6 {
                assert_eq!(map[a.mul(x, y)], z6.mul(map[x], map[y]));
            }
        }
    }

    #[test]
    fn s3_not_z6_but_self_isomorphic() {
        let s3 = FiniteGroup::symmetric3();
        assert!(!s3.is_abelian());
        assert!(s3.isomorphism_to(&FiniteGroup::cyclic(6)).is_none());
        assert!(s3.isomorphism_to(&s3).is_some());
    }
}
