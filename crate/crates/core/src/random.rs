//! Seeded random algebra elements for the randomized checks.
//!
//! Each trial gets its own ChaCha stream derived from `(seed, trial)`, so a
//! report is identical regardless of thread count or evaluation order.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{star, AlgebraElement, OrbitBlockDecomposition};
use crate::groupoid::FiniteGroupoid;

/// RNG for one trial of a seeded run.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Independent standard complex Gaussian coefficients.
pub fn gaussian_element(g: &Arc<FiniteGroupoid>, rng: &mut impl Rng) -> AlgebraElement {
    let coeffs = (0..g.arrow_count()).map(|_| gaussian(rng)).collect();
    AlgebraElement::from_coeffs(g, coeffs).expect("length")
}

/// Gaussian element symmetrized to `(a + a*)/2`.
pub fn hermitian_element(g: &Arc<FiniteGroupoid>, rng: &mut impl Rng) -> AlgebraElement {
    let a = gaussian_element(g, rng);
    a.add(&star(&a)).unwrap().scale(Complex64::new(0.5, 0.0))
}

/// How a random `b` is drawn; `1 + b` is what the checks invert.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementMode {
    Gaussian,
    Hermitian,
    /// `b = −r/μ` with `μ` an eigenvalue of one orbit block of `r`, so that
    /// `1 + b` is singular on that block.
    SpectralHit,
    /// `b = −p` with `p` the averaging projection of one isotropy group.
    Projection,
}

impl ElementMode {
    pub const ALL: [ElementMode; 4] =
        [ElementMode::Gaussian, ElementMode::Hermitian, ElementMode::SpectralHit, ElementMode::Projection];

    /// Modes cycle with the trial index.
    pub fn for_trial(trial: u64) -> Self {
        Self::ALL[(trial % 4) as usize]
    }
}

/// Draws `b` according to `mode`. Orbits for the singular modes are picked
/// among `eligible_orbits` (indices into `dec`); with none eligible the
/// Gaussian mode is used.
pub fn random_element(
    dec: &OrbitBlockDecomposition,
    mode: ElementMode,
    eligible_orbits: &[usize],
    rng: &mut impl Rng,
) -> AlgebraElement {
    let g = &dec.groupoid;
    if g.arrow_count() == 0 {
        return AlgebraElement::zero(g);
    }
    let mode = if eligible_orbits.is_empty() && matches!(mode, ElementMode::SpectralHit | ElementMode::Projection) {
        ElementMode::Gaussian
    } else {
        mode
    };
    match mode {
        ElementMode::Gaussian => gaussian_element(g, rng),
        ElementMode::Hermitian => hermitian_element(g, rng),
        ElementMode::SpectralHit => {
            let o = eligible_orbits[rng.random_range(0..eligible_orbits.len())];
            loop {
                let r = gaussian_element(g, rng);
                let block = dec.blocks(&r).swap_remove(o);
                let eig = eigenvalues(&block);
                let mu = eig[rng.random_range(0..eig.len())];
                if mu.norm() > 1e-3 {
                    return r.scale(-1.0 / mu);
                }
            }
        }
        ElementMode::Projection => {
            let o = eligible_orbits[rng.random_range(0..eligible_orbits.len())];
            let orbit = &dec.orbits.orbits[o];
            // conjugate the isotropy to a random unit of the orbit
            let k = rng.random_range(0..orbit.units.len());
            let t = orbit.spanning[k];
            let m = orbit.isotropy.order() as f64;
            let mut p = AlgebraElement::zero(g);
            for &gamma in &orbit.isotropy.arrows {
                let conj = g.compose(g.compose(t, gamma).unwrap(), g.inverse(t)).unwrap();
                p.set(conj, Complex64::new(-1.0 / m, 0.0));
            }
            p
        }
    }
}

/// Eigenvalues of a complex square matrix from its Schur form.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let (_, t) = m.clone().schur().unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}
