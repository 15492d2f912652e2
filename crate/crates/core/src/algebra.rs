//! The convolution *-algebra `C_c(G)` of a finite groupoid.
//!
//! The Haar system is the counting measure on each source fiber, so
//! `(a * b)(g) = Σ_{h ∈ G_{d(g)}} a(g h⁻¹) b(h)`. Finite groupoids are
//! amenable and the full and reduced norms coincide; only the reduced norm is
//! computed and reports say so.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groupoid::{
    is_invariant, orbits_and_isotropy, reduction, ArrowId, FiniteGroupoid, OrbitPartition, UnitId, UnitSubset,
};
use crate::par;

/// Relative tolerance for singular-value based decisions in this module.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Stated by every report that quotes a C*-norm.
pub const AMENABILITY_NOTE: &str =
    "finite groupoids are amenable: the full C*-norm equals the reduced norm, which is what is computed";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("elements belong to different groupoids")]
    Mismatch,
    #[error("unknown unit {0}")]
    UnknownUnit(UnitId),
    #[error("unit subset is not invariant")]
    NotInvariant,
    #[error("coefficient vector has length {got}, expected {expected}")]
    Length { got: usize, expected: usize },
}

/// A complex function on the arrows of a groupoid.
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    groupoid: Arc<FiniteGroupoid>,
    coeffs: Vec<Complex64>,
}

impl PartialEq for AlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        self.same_groupoid(other) && self.coeffs == other.coeffs
    }
}

impl AlgebraElement {
    pub fn zero(g: &Arc<FiniteGroupoid>) -> Self {
        Self { groupoid: g.clone(), coeffs: vec![Complex64::new(0.0, 0.0); g.arrow_count()] }
    }

    pub fn from_coeffs(g: &Arc<FiniteGroupoid>, coeffs: Vec<Complex64>) -> Result<Self, AlgebraError> {
        if coeffs.len() != g.arrow_count() {
            return Err(AlgebraError::Length { got: coeffs.len(), expected: g.arrow_count() });
        }
        Ok(Self { groupoid: g.clone(), coeffs })
    }

    /// Point mass at an arrow.
    pub fn delta(g: &Arc<FiniteGroupoid>, arrow: ArrowId) -> Self {
        let mut a = Self::zero(g);
        a.coeffs[arrow] = Complex64::new(1.0, 0.0);
        a
    }

    /// The unit `Σ_x δ_{u(x)}`.
    pub fn unit(g: &Arc<FiniteGroupoid>) -> Self {
        let mut a = Self::zero(g);
        for x in 0..g.unit_count() {
            a.coeffs[g.unit_arrow(x)] = Complex64::new(1.0, 0.0);
        }
        a
    }

    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        &self.groupoid
    }
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
    pub fn coeff(&self, arrow: ArrowId) -> Complex64 {
        self.coeffs[arrow]
    }
    pub fn set(&mut self, arrow: ArrowId, value: Complex64) {
        self.coeffs[arrow] = value;
    }

    fn same_groupoid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.groupoid, &other.groupoid) || self.groupoid == other.groupoid
    }

    fn check(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.same_groupoid(other) {
            Ok(())
        } else {
            Err(AlgebraError::Mismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self { groupoid: self.groupoid.clone(), coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { groupoid: self.groupoid.clone(), coeffs: self.coeffs.iter().map(|a| a * s).collect() }
    }

    /// `1 + self`.
    pub fn plus_unit(&self) -> Self {
        self.add(&Self::unit(&self.groupoid)).expect("same groupoid")
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Restricts coefficients to the arrows of a reduction of the groupoid.
    pub fn pull_back(&self, target: &Arc<FiniteGroupoid>, arrow_map: &[ArrowId]) -> Self {
        Self { groupoid: target.clone(), coeffs: arrow_map.iter().map(|&a| self.coeffs[a]).collect() }
    }
}

/// `(a * b)(g) = Σ_{h ∈ G_{d(g)}} a(g h⁻¹) b(h)`, evaluated as a sum over
/// composable pairs.
pub fn convolve(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
    a.check(b)?;
    let g = &a.groupoid;
    let mut out = AlgebraElement::zero(g);
    let by_rng = g.range_fibers();
    for p in 0..g.arrow_count() {
        let ap = a.coeffs[p];
        if ap == Complex64::new(0.0, 0.0) {
            continue;
        }
        for &q in &by_rng[g.dom(p)] {
            let pq = g.compose(p, q).expect("valid groupoid");
            out.coeffs[pq] += ap * b.coeffs[q];
        }
    }
    Ok(out)
}

/// `a*(g) = conj(a(g⁻¹))`.
pub fn star(a: &AlgebraElement) -> AlgebraElement {
    let g = &a.groupoid;
    let coeffs = (0..g.arrow_count()).map(|h| a.coeffs[g.inverse(h)].conj()).collect();
    AlgebraElement { groupoid: g.clone(), coeffs }
}

/// `‖a‖₁ = max(sup_x Σ_{G_x}|a|, sup_x Σ_{G_x}|a*|)`.
pub fn l1_norm(a: &AlgebraElement) -> f64 {
    let g = &a.groupoid;
    let mut src = vec![0.0; g.unit_count()];
    let mut rng = vec![0.0; g.unit_count()];
    for h in 0..g.arrow_count() {
        let v = a.coeffs[h].norm();
        src[g.dom(h)] += v;
        // |a*| summed over G_x is |a| summed over Gˣ
        rng[g.rng(h)] += v;
    }
    src.into_iter().chain(rng).fold(0.0, f64::max)
}

/// `π_x(a)` on `ℓ²(G_x)`, rows and columns indexed by `arrows`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularRepMatrix {
    pub base: UnitId,
    pub arrows: Vec<ArrowId>,
    pub matrix: DMatrix<Complex64>,
}

impl RegularRepMatrix {
    pub fn op_norm(&self) -> f64 {
        sigma_max(&self.matrix)
    }
}

pub fn regular_rep(a: &AlgebraElement, x: UnitId) -> Result<RegularRepMatrix, AlgebraError> {
    let g = &a.groupoid;
    if x >= g.unit_count() {
        return Err(AlgebraError::UnknownUnit(x));
    }
    let arrows = g.source_fiber(x);
    let n = arrows.len();
    let matrix = DMatrix::from_fn(n, n, |i, j| {
        let gh = g.compose(arrows[i], g.inverse(arrows[j])).expect("same source");
        a.coeffs[gh]
    });
    Ok(RegularRepMatrix { base: x, arrows, matrix })
}

pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

pub fn sigma_max(m: &DMatrix<Complex64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn sigma_min(m: &DMatrix<Complex64>) -> f64 {
    singular_values(m).last().copied().unwrap_or(f64::INFINITY)
}

/// `sup_x ‖π_x(a)‖`, taken over one representative unit per orbit.
pub fn reduced_norm(a: &AlgebraElement) -> f64 {
    reduced_norm_with(a, &orbits_and_isotropy(&a.groupoid))
}

pub fn reduced_norm_with(a: &AlgebraElement, orbits: &OrbitPartition) -> f64 {
    par::map(&orbits.orbits, |o| regular_rep(a, o.representative()).expect("unit").op_norm())
        .into_iter()
        .fold(0.0, f64::max)
}

/// What [`restrict_boundary`] verified about `0 → C(G_U) → C(G) → C(G_F) → 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactnessReport {
    pub arrows_total: usize,
    pub arrows_u: usize,
    pub arrows_f: usize,
    /// `dim C(G) − rank ρ_F`.
    pub kernel_dim: usize,
    /// Every `δ_g`, `g ∈ G_U`, restricts to zero.
    pub kernel_is_u_span: bool,
    pub surjective: bool,
    /// `ρ(a*a') = ρ(a)*ρ(a')` for `a' ∈ {a, a*}`.
    pub multiplicative: bool,
}

impl ExactnessReport {
    pub fn exact(&self) -> bool {
        self.kernel_dim == self.arrows_u && self.kernel_is_u_span && self.surjective && self.multiplicative
    }
}

/// Restriction `ρ_F : C(G) → C(G_F)` to an invariant subset.
pub fn restrict_boundary(
    a: &AlgebraElement,
    f: &UnitSubset,
) -> Result<(AlgebraElement, Arc<FiniteGroupoid>, ExactnessReport), AlgebraError> {
    let g = &a.groupoid;
    if f.members().last().is_some_and(|&x| x >= g.unit_count()) {
        return Err(AlgebraError::UnknownUnit(*f.members().last().unwrap()));
    }
    if !is_invariant(g, f) {
        return Err(AlgebraError::NotInvariant);
    }
    let red = reduction(g, f).expect("checked subset");
    let gf = Arc::new(red.groupoid);
    let restricted = a.pull_back(&gf, &red.arrow_map);

    // ρ_F as a 0/1 matrix; its rank decides kernel and surjectivity
    let (n, m) = (g.arrow_count(), gf.arrow_count());
    let rho = DMatrix::<f64>::from_fn(m, n, |i, j| if red.arrow_map[i] == j { 1.0 } else { 0.0 });
    let rank = if m == 0 || n == 0 { 0 } else { rho.rank(1e-9) };
    let u_arrows: Vec<ArrowId> =
        (0..n).filter(|&h| !f.contains(g.dom(h)) && !f.contains(g.rng(h))).collect();
    let kernel_is_u_span = u_arrows.iter().all(|&h| {
        let d = AlgebraElement::delta(g, h);
        d.pull_back(&gf, &red.arrow_map).max_abs() == 0.0
    });
    let tol = 1e-12 * (1.0 + a.max_abs()).powi(2) * (n.max(1) as f64);
    let multiplicative = [a.clone(), star(a)].iter().all(|b| {
        let lhs = convolve(a, b).unwrap().pull_back(&gf, &red.arrow_map);
        let rhs = convolve(&restricted, &b.pull_back(&gf, &red.arrow_map)).unwrap();
        lhs.sub(&rhs).unwrap().max_abs() <= tol
    });
    let report = ExactnessReport {
        arrows_total: n,
        arrows_u: u_arrows.len(),
        arrows_f: m,
        kernel_dim: n - rank,
        kernel_is_u_span,
        surjective: rank == m,
        multiplicative,
    };
    Ok((restricted, gf, report))
}

/// Per-orbit blocks `M_{|O|}(ℂ[Γ_O])`, realized through the right regular
/// representation of `Γ_O`.
#[derive(Debug, Clone)]
pub struct OrbitBlockDecomposition {
    pub groupoid: Arc<FiniteGroupoid>,
    pub orbits: OrbitPartition,
}

/// Size data of one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockShape {
    pub orbit_size: usize,
    pub isotropy_order: usize,
}

impl BlockShape {
    pub fn dim(&self) -> usize {
        self.orbit_size * self.isotropy_order
    }
}

pub fn block_decompose(g: &Arc<FiniteGroupoid>) -> OrbitBlockDecomposition {
    OrbitBlockDecomposition { groupoid: g.clone(), orbits: orbits_and_isotropy(g) }
}

impl OrbitBlockDecomposition {
    pub fn shapes(&self) -> Vec<BlockShape> {
        self.orbits
            .orbits
            .iter()
            .map(|o| BlockShape { orbit_size: o.units.len(), isotropy_order: o.isotropy.order() })
            .collect()
    }

    /// Basis index of the block for orbit `o`: `(unit position, group element)`
    /// ↦ `pos · |Γ| + σ`.
    pub fn block_of_arrow(&self, arrow: ArrowId) -> (usize, usize, usize, usize) {
        self.orbits.coordinates(&self.groupoid, arrow)
    }

    /// `B_O(a) = Σ_g a(g) E_{r(g),d(g)} ⊗ R(γ_g)` for every orbit `O`, where
    /// `R(γ) e_σ = e_{σγ⁻¹}`.
    pub fn blocks(&self, a: &AlgebraElement) -> Vec<DMatrix<Complex64>> {
        let g = &self.groupoid;
        let mut blocks: Vec<DMatrix<Complex64>> = self
            .shapes()
            .iter()
            .map(|s| DMatrix::zeros(s.dim(), s.dim()))
            .collect();
        for arrow in 0..g.arrow_count() {
            let c = a.coeff(arrow);
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (o, i, j, gamma) = self.block_of_arrow(arrow);
            let iso = &self.orbits.orbits[o].isotropy.group;
            let m = iso.order();
            let ginv = iso.inv(gamma);
            for sigma in 0..m {
                let row = i * m + iso.mul(sigma, ginv);
                blocks[o][(row, j * m + sigma)] += c;
            }
        }
        blocks
    }

    pub fn norm(&self, a: &AlgebraElement) -> f64 {
        par::map(&self.blocks(a), sigma_max).into_iter().fold(0.0, f64::max)
    }
}

/// Blockwise invertibility verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertibilityReport {
    pub invertible: bool,
    /// `(σ_min, σ_max)` per orbit block.
    pub blocks: Vec<(f64, f64)>,
}

/// Decides invertibility of `a` in `C*(G)`: every orbit block must have
/// `σ_min > tol · σ_max`.
pub fn invertible(a: &AlgebraElement, tol: f64) -> InvertibilityReport {
    invertible_in(&block_decompose(&a.groupoid), a, tol)
}

pub fn invertible_in(dec: &OrbitBlockDecomposition, a: &AlgebraElement, tol: f64) -> InvertibilityReport {
    let blocks: Vec<(f64, f64)> = par::map(&dec.blocks(a), |b| {
        let s = singular_values(b);
        (s.last().copied().unwrap_or(f64::INFINITY), s.first().copied().unwrap_or(0.0))
    });
    let invertible = blocks.iter().all(|&(lo, hi)| singular_ok(lo, hi, tol));
    InvertibilityReport { invertible, blocks }
}

/// `σ_min > tol · σ_max` with `σ_max > 0`; empty matrices are invertible.
pub fn singular_ok(lo: f64, hi: f64, tol: f64) -> bool {
    lo.is_infinite() || (hi > 0.0 && lo > tol * hi)
}

/// Left multiplication `b ↦ a * b` as a matrix on `C(G)`.
pub fn left_multiplication_matrix(a: &AlgebraElement) -> DMatrix<Complex64> {
    let g = &a.groupoid;
    let n = g.arrow_count();
    let mut m = DMatrix::zeros(n, n);
    let by_rng = g.range_fibers();
    for p in 0..n {
        for &q in &by_rng[g.dom(p)] {
            m[(g.compose(p, q).unwrap(), q)] += a.coeffs[p];
        }
    }
    m
}

/// Solves `a * b = 1` by a truncated SVD solve of the left-multiplication
/// system and returns `b` only if both `a*b` and `b*a` equal the unit to
/// within `residual_tol`.
pub fn inverse_by_linear_solve(a: &AlgebraElement, tol: f64, residual_tol: f64) -> Option<AlgebraElement> {
    let g = &a.groupoid;
    let n = g.arrow_count();
    if n == 0 {
        return Some(AlgebraElement::zero(g));
    }
    let lhs = left_multiplication_matrix(a);
    let one = AlgebraElement::unit(g);
    let rhs = nalgebra::DVector::from_column_slice(one.coeffs());
    let svd = lhs.svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return None;
    }
    let b = svd.solve(&rhs, tol * smax).ok()?;
    let b = AlgebraElement::from_coeffs(g, b.iter().copied().collect()).ok()?;
    let right = convolve(a, &b).ok()?.sub(&one).ok()?.max_abs();
    let left = convolve(&b, a).ok()?.sub(&one).ok()?.max_abs();
    (right <= residual_tol && left <= residual_tol).then_some(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{group_bundle, one_object_group, pair, FiniteGroup};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn point_masses_compose() {
        let g = Arc::new(pair(&labels(3)).unwrap());
        for p in 0..9 {
            for q in 0..9 {
                let prod = convolve(&AlgebraElement::delta(&g, p), &AlgebraElement::delta(&g, q)).unwrap();
                match g.compose(p, q) {
                    Some(pq) => assert_eq!(prod, AlgebraElement::delta(&g, pq)),
                    None => assert_eq!(prod.max_abs(), 0.0),
                }
            }
        }
    }

    #[test]
    fn z2_group_algebra() {
        let g = Arc::new(one_object_group(&FiniteGroup::cyclic(2)));
        let a = AlgebraElement::from_coeffs(&g, vec![c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        let b = AlgebraElement::from_coeffs(&g, vec![c(5.0, 0.0), c(7.0, 0.0)]).unwrap();
        let ab = convolve(&a, &b).unwrap();
        assert_eq!(ab.coeffs(), &[c(2.0 * 5.0 + 3.0 * 7.0, 0.0), c(2.0 * 7.0 + 3.0 * 5.0, 0.0)]);
        let ones = AlgebraElement::from_coeffs(&g, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((reduced_norm(&ones) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn l1_examples() {
        let g = Arc::new(pair(&labels(2)).unwrap());
        assert_eq!(l1_norm(&AlgebraElement::delta(&g, 1)), 1.0);
        let ones = AlgebraElement::from_coeffs(&g, vec![c(1.0, 0.0); 4]).unwrap();
        assert_eq!(l1_norm(&ones), 2.0);
        assert_eq!(star(&AlgebraElement::delta(&g, 1)), AlgebraElement::delta(&g, g.inverse(1)));
    }

    #[test]
    fn regular_rep_of_unit_is_identity() {
        let g = Arc::new(group_bundle(&labels(2), &FiniteGroup::cyclic(3)).unwrap());
        let m = regular_rep(&AlgebraElement::unit(&g), 1).unwrap();
        assert_eq!(m.matrix, DMatrix::identity(3, 3));
        assert!((reduced_norm(&AlgebraElement::unit(&g)) - 1.0).abs() < 1e-12);
        assert!(regular_rep(&AlgebraElement::unit(&g), 7).is_err());
    }

    #[test]
    fn mismatched_groupoids() {
        let g = Arc::new(pair(&labels(2)).unwrap());
        let h = Arc::new(pair(&labels(3)).unwrap());
        assert_eq!(
            convolve(&AlgebraElement::unit(&g), &AlgebraElement::unit(&h)),
            Err(AlgebraError::Mismatch)
        );
    }

    #[test]
    fn bundle_blocks_are_circulant() {
        let g = Arc::new(group_bundle(&labels(2), &FiniteGroup::cyclic(2)).unwrap());
        let dec = block_decompose(&g);
        assert_eq!(dec.shapes().len(), 2);
        let mut a = AlgebraElement::zero(&g);
        a.set(0, c(1.0, 0.0));
        a.set(1, c(2.0, 0.0));
        let b = &dec.blocks(&a)[0];
        assert_eq!(b[(0, 0)], b[(1, 1)]);
        assert_eq!(b[(0, 1)], b[(1, 0)]);
        assert_eq!(b[(0, 1)], c(2.0, 0.0));
    }

    #[test]
    fn nilpotent_is_not_invertible() {
        let g = Arc::new(pair(&labels(3)).unwrap());
        let mut a = AlgebraElement::zero(&g);
        for (x, y) in [("1", "2"), ("1", "3"), ("2", "3")] {
            a.set(g.arrow_index(&format!("({x},{y})")).unwrap(), c(1.0, 0.0));
        }
        assert!(!invertible(&a, DEFAULT_TOLERANCE).invertible);
        assert!(inverse_by_linear_solve(&a, DEFAULT_TOLERANCE, 1e-8).is_none());
        let one = AlgebraElement::unit(&g);
        assert!(invertible(&one, DEFAULT_TOLERANCE).invertible);
        let u = one.add(&a).unwrap();
        let inv = inverse_by_linear_solve(&u, DEFAULT_TOLERANCE, 1e-8).unwrap();
        assert!(convolve(&u, &inv).unwrap().sub(&one).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn restriction_to_invariant_boundary() {
        let g = Arc::new(
            crate::groupoid::disjoint_union(&[
                pair(&labels(2)).unwrap(),
                group_bundle(&["b".to_string()], &FiniteGroup::cyclic(2)).unwrap(),
            ])
            .unwrap(),
        );
        let f = UnitSubset::from_labels(&g, &["b"]).unwrap();
        let a = AlgebraElement::delta(&g, 1);
        let (r, gf, rep) = restrict_boundary(&a, &f).unwrap();
        assert_eq!(gf.arrow_count(), 2);
        assert_eq!(r.max_abs(), 0.0);
        assert!(rep.exact());
        assert_eq!(rep.kernel_dim, 4);
        let not_inv = UnitSubset::from_labels(&g, &["1"]).unwrap();
        assert_eq!(restrict_boundary(&a, &not_inv).err(), Some(AlgebraError::NotInvariant));
    }
}
