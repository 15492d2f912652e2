//! Finite-scale Fredholm criterion for groupoids with a pair-groupoid orbit.
//!
//! On a finite set every operator is a compact perturbation of anything
//! else, so "Fredholm on L²(U)" is rendered as invertibility of `1 + a`
//! modulo the ideal `C*(G_U)`. The quotient is `C*(G_F)` and its
//! invertibility is compared with that of the limit operators `π_x(1 + a)`,
//! `x ∈ F`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    block_decompose, invertible_in, regular_rep, restrict_boundary, singular_ok, singular_values, AlgebraElement,
    AlgebraError, OrbitBlockDecomposition, RegularRepMatrix,
};
use crate::groupoid::{
    disjoint_union, fibered_pullback, group_bundle, is_invariant, is_pair_groupoid, orbits_and_isotropy, reduction,
    verify_map, FiniteGroupoid, OrbitPartition, UnitId, UnitSubset,
};
use crate::par;
use crate::random::{random_element, trial_rng, ElementMode};

/// Invertibility: `σ_min > 1e-8 · σ_max`.
pub const INVERTIBILITY_TOLERANCE: f64 = 1e-8;

/// Tolerance for comparing singular values within one orbit.
pub const SPECTRUM_TOLERANCE: f64 = 1e-10;

pub const FINITE_SCALE_NOTE: &str = "finite scale: Fredholm on L2(U) is rendered as invertibility modulo the \
     C*(G_U) ideal; density of U is vacuous for discrete units";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FredholmError {
    #[error("U is not invariant")]
    NotInvariant,
    #[error("reduction to U is not a pair groupoid")]
    NotPair,
    #[error("U is empty")]
    EmptyU,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A groupoid with a designated invariant pair-groupoid orbit `U`.
#[derive(Debug, Clone)]
pub struct FredholmStructure {
    pub groupoid: Arc<FiniteGroupoid>,
    pub u: UnitSubset,
    pub f: UnitSubset,
    /// Representative of `U` used for `π₀`.
    pub u_rep: UnitId,
    /// One unit per orbit in `F`, in orbit order.
    pub f_reps: Vec<UnitId>,
    pub orbits: OrbitPartition,
    /// `G_F` and its block decomposition, precomputed.
    pub boundary: Arc<FiniteGroupoid>,
    pub boundary_arrow_map: Vec<usize>,
    pub boundary_blocks: OrbitBlockDecomposition,
}

pub fn make_structure(g: &Arc<FiniteGroupoid>, u: &UnitSubset) -> Result<FredholmStructure, FredholmError> {
    if u.is_empty() {
        return Err(FredholmError::EmptyU);
    }
    if u.members().last().is_some_and(|&x| x >= g.unit_count()) {
        return Err(AlgebraError::UnknownUnit(*u.members().last().unwrap()).into());
    }
    if !is_invariant(g, u) {
        return Err(FredholmError::NotInvariant);
    }
    if !is_pair_groupoid(&reduction(g, u).expect("checked").groupoid) {
        return Err(FredholmError::NotPair);
    }
    let f = u.complement(g);
    let orbits = orbits_and_isotropy(g);
    let f_reps = orbits.orbits.iter().map(|o| o.representative()).filter(|&x| f.contains(x)).collect();
    let red = reduction(g, &f).expect("complement");
    let boundary = Arc::new(red.groupoid);
    let boundary_blocks = block_decompose(&boundary);
    Ok(FredholmStructure {
        groupoid: g.clone(),
        u: u.clone(),
        u_rep: u.members()[0],
        f,
        f_reps,
        orbits,
        boundary,
        boundary_arrow_map: red.arrow_map,
        boundary_blocks,
    })
}

impl FredholmStructure {
    /// Orbit indices of `G_F` (all of them: `F` is a union of orbits).
    fn boundary_orbits(&self) -> Vec<usize> {
        (0..self.boundary_blocks.orbits.orbits.len()).collect()
    }

    /// Orbit indices of `G` lying in `F`.
    fn f_orbit_indices(&self) -> Vec<usize> {
        self.f_reps.iter().map(|&x| self.orbits.orbit_of[x]).collect()
    }
}

/// `π_x(a)` at each representative of `F`.
#[derive(Debug, Clone)]
pub struct LimitOperatorFamily {
    pub operators: Vec<RegularRepMatrix>,
    /// Sorted singular values at every unit of each orbit agree with the
    /// representative's.
    pub orbit_spectra_agree: bool,
}

pub fn limit_operators(s: &FredholmStructure, a: &AlgebraElement) -> Result<LimitOperatorFamily, FredholmError> {
    let operators = s.f_reps.iter().map(|&x| regular_rep(a, x)).collect::<Result<Vec<_>, _>>()?;
    let mut agree = true;
    for (rep_op, &x) in operators.iter().zip(&s.f_reps) {
        let base = singular_values(&rep_op.matrix);
        let scale = base.first().copied().unwrap_or(0.0).max(1.0);
        for &y in &s.orbits.orbit_containing(x).units[1..] {
            let other = singular_values(&regular_rep(a, y)?.matrix);
            agree &= other.len() == base.len()
                && other.iter().zip(&base).all(|(p, q)| (p - q).abs() <= SPECTRUM_TOLERANCE * scale);
        }
    }
    Ok(LimitOperatorFamily { operators, orbit_spectra_agree: agree })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub u_invertible: bool,
    /// Keyed by unit label.
    pub boundary_invertible: BTreeMap<String, bool>,
    pub quotient_invertible: bool,
    pub equivalence_holds: bool,
    pub note: String,
}

fn matrix_invertible(m: &nalgebra::DMatrix<num_complex::Complex64>) -> bool {
    let s = singular_values(m);
    singular_ok(s.last().copied().unwrap_or(f64::INFINITY), s.first().copied().unwrap_or(0.0), INVERTIBILITY_TOLERANCE)
}

/// Evaluates the criterion for `1 + a`.
pub fn fredholm_criterion(s: &FredholmStructure, a: &AlgebraElement) -> Result<Verdict, FredholmError> {
    let one_plus = a.plus_unit();
    let u_invertible = matrix_invertible(&regular_rep(&one_plus, s.u_rep)?.matrix);
    let mut boundary_invertible = BTreeMap::new();
    for &x in &s.f_reps {
        let ok = matrix_invertible(&regular_rep(&one_plus, x)?.matrix);
        boundary_invertible.insert(s.groupoid.unit_label(x).to_string(), ok);
    }
    let (restricted, _, _) = restrict_boundary(&one_plus, &s.f)?;
    // restrict_boundary builds its own copy of G_F; re-home onto the cached one
    let restricted = AlgebraElement::from_coeffs(&s.boundary, restricted.coeffs().to_vec())?;
    let quotient_invertible = invertible_in(&s.boundary_blocks, &restricted, INVERTIBILITY_TOLERANCE).invertible;
    let all_boundary = boundary_invertible.values().all(|&b| b);
    Ok(Verdict {
        u_invertible,
        boundary_invertible,
        quotient_invertible,
        equivalence_holds: quotient_invertible == all_boundary,
        note: FINITE_SCALE_NOTE.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: u64,
    pub mode: ElementMode,
    pub detail: String,
}

/// Aggregate of a seeded randomized run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub trials: u64,
    pub seed: u64,
    /// Trials where the tested element was invertible / not.
    pub invertible: u64,
    pub non_invertible: u64,
    pub per_mode: BTreeMap<String, u64>,
    pub counterexamples: Vec<Counterexample>,
    pub vacuous: bool,
}

impl StatReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }

    fn collect(seed: u64, trials: u64, results: Vec<(ElementMode, bool, Option<String>)>, vacuous: bool) -> Self {
        let mut per_mode = BTreeMap::new();
        let (mut inv, mut non) = (0, 0);
        let mut counterexamples = Vec::new();
        for (t, (mode, ok, bad)) in results.into_iter().enumerate() {
            *per_mode.entry(format!("{mode:?}").to_lowercase()).or_insert(0) += 1;
            if ok {
                inv += 1;
            } else {
                non += 1;
            }
            if let Some(detail) = bad {
                counterexamples.push(Counterexample { trial: t as u64, mode, detail });
            }
        }
        StatReport { trials, seed, invertible: inv, non_invertible: non, per_mode, counterexamples, vacuous }
    }
}

/// For random `b` over `G_F`: `1 + b` blockwise invertible in `C*(G_F)` ⟺
/// `1 + π_x(b)` invertible at every representative `x ∈ F`.
pub fn strictly_spectral_check(s: &FredholmStructure, trials: u64, seed: u64) -> StatReport {
    let gf = &s.boundary;
    if gf.unit_count() == 0 {
        return StatReport::collect(seed, 0, Vec::new(), true);
    }
    let dec = &s.boundary_blocks;
    let eligible = s.boundary_orbits();
    let reps: Vec<UnitId> = dec.orbits.orbits.iter().map(|o| o.representative()).collect();
    let results = par::map_range(trials as usize, |t| {
        let mut rng = trial_rng(seed, t as u64);
        let mode = ElementMode::for_trial(t as u64);
        let b = random_element(dec, mode, &eligible, &mut rng);
        let one_plus = b.plus_unit();
        let blockwise = invertible_in(dec, &one_plus, INVERTIBILITY_TOLERANCE).invertible;
        let pointwise = reps.iter().all(|&x| matrix_invertible(&regular_rep(&one_plus, x).unwrap().matrix));
        let bad = (blockwise != pointwise).then(|| format!("blockwise {blockwise}, representations {pointwise}"));
        (mode, blockwise, bad)
    });
    StatReport::collect(seed, trials, results, false)
}

/// Runs [`fredholm_criterion`] on seeded random elements of `C(G)` and
/// counts violations of the asserted equivalence.
pub fn criterion_trials(s: &FredholmStructure, trials: u64, seed: u64) -> StatReport {
    let dec = block_decompose(&s.groupoid);
    let eligible = s.f_orbit_indices();
    let results = par::map_range(trials as usize, |t| {
        let mut rng = trial_rng(seed, t as u64);
        let mode = ElementMode::for_trial(t as u64);
        let b = random_element(&dec, mode, &eligible, &mut rng);
        let v = fredholm_criterion(s, &b).expect("valid structure");
        let bad = (!v.equivalence_holds).then(|| format!("{v:?}"));
        (mode, v.quotient_invertible, bad)
    });
    StatReport::collect(seed, trials, results, s.f_reps.is_empty())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundlePart {
    pub units: Vec<String>,
    pub fiber_order: usize,
    pub fiber_abelian: bool,
    pub fiber_cyclic: bool,
    pub fiber_table: Vec<Vec<usize>>,
}

/// Outcome of [`recognize_boundary_bundle`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognitionReport {
    pub recognized: bool,
    /// One part per `G_F`-orbit with its fiber group.
    pub parts: Vec<BundlePart>,
    pub witness: Option<String>,
}

/// Exhibits `G_F ≅ f^⇈(H)` with `H` a bundle of groups over one point per
/// orbit and `f` collapsing each orbit, via `g ↦ (r(g), γ_g, d(g))`.
pub fn recognize_boundary_bundle(s: &FredholmStructure) -> RecognitionReport {
    let gf = &s.boundary;
    let part = &s.boundary_blocks.orbits;
    let parts: Vec<BundlePart> = part
        .orbits
        .iter()
        .map(|o| BundlePart {
            units: o.units.iter().map(|&x| gf.unit_label(x).to_string()).collect(),
            fiber_order: o.isotropy.order(),
            fiber_abelian: o.isotropy.group.is_abelian(),
            fiber_cyclic: o.isotropy.group.is_cyclic(),
            fiber_table: o.isotropy.group.table().to_vec(),
        })
        .collect();
    if gf.unit_count() == 0 {
        return RecognitionReport { recognized: true, parts, witness: None };
    }
    let bases: Vec<FiniteGroupoid> = part
        .orbits
        .iter()
        .enumerate()
        .map(|(k, o)| group_bundle(&[format!("b{k}")], &o.isotropy.group).expect("one label"))
        .collect();
    let h = disjoint_union(&bases).expect("distinct labels");
    let f: Vec<UnitId> = part.orbit_of.clone();
    let pulled = match fibered_pullback(gf.unit_labels(), &f, &h) {
        Ok(p) => p,
        Err(e) => return RecognitionReport { recognized: false, parts, witness: Some(e.to_string()) },
    };
    let index: std::collections::HashMap<&str, usize> =
        pulled.arrow_labels().iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut arrow_map = Vec::with_capacity(gf.arrow_count());
    for a in 0..gf.arrow_count() {
        let (o, _, _, gamma) = part.coordinates(gf, a);
        let base_arrow = h.arrow_index(&format!("(b{o},{gamma})")).expect("bundle arrow");
        let label = format!(
            "({},{},{})",
            gf.unit_label(gf.rng(a)),
            h.arrow_label(base_arrow),
            gf.unit_label(gf.dom(a))
        );
        match index.get(label.as_str()) {
            Some(&b) => arrow_map.push(b),
            None => {
                return RecognitionReport { recognized: false, parts, witness: Some(format!("no image for {label}")) }
            }
        }
    }
    let units: Vec<UnitId> = (0..gf.unit_count()).collect();
    let ok = verify_map(gf, &pulled, &units, &arrow_map);
    RecognitionReport {
        recognized: ok,
        parts,
        witness: (!ok).then(|| "explicit map is not a groupoid isomorphism".to_string()),
    }
}
