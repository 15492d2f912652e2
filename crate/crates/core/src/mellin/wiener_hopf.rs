//! Limit operators of a cone operator at the two fixed points `0` and `∞`
//! of `[0,∞] ⋊ (0,∞)`.
//!
//! For `P u(r) = ∫ K(r,s) u(s) ds` the Mellin kernel at `0` is
//! `k₀(t) = lim_{δ→0} δ K(δt, δ)`; in the chart `ρ = 1/r` the one at `∞` is
//! `k_∞(t) = lim_{δ→0} K(1/(δt), 1/δ)/δ`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::scan::{scan_kernel, ScanOptions, VertexScan};
use super::transform::{mellin_transform, uniform_grid};
use super::{Decay, MellinError, MellinKernel};
use crate::conical::{ConeModel, LayerGroupoidDescriptor};

type ConeFn = dyn Fn(f64, f64, &mut [Complex64]) + Send + Sync;

/// An operator on `ℝ⁺ × ∂ω` given by its kernel against `ds`.
#[derive(Clone)]
pub struct ConeOperator {
    pub dim: usize,
    /// Decay of the limit kernels at `0` and `∞` respectively.
    pub decay: [Decay; 2],
    kernel: Arc<ConeFn>,
}

impl ConeOperator {
    pub fn new(dim: usize, decay: [Decay; 2], kernel: impl Fn(f64, f64, &mut [Complex64]) + Send + Sync + 'static) -> Self {
        ConeOperator { dim, decay, kernel: Arc::new(kernel) }
    }

    /// `K(r, s) = k(r/s)/s`.
    pub fn dilation_invariant(k: &MellinKernel) -> Self {
        let inner = k.clone();
        let inf = Decay { near_zero: k.decay.near_infinity, near_infinity: k.decay.near_zero };
        Self::new(k.dim, [k.decay, inf], move |r, s, out| {
            inner.eval_into(r / s, out);
            out.iter_mut().for_each(|z| *z /= s);
        })
    }

    /// Mellin kernels at `0` and `∞`, evaluated at scale `δ`.
    pub fn limit_kernels(&self, delta: f64) -> [MellinKernel; 2] {
        let (k0, kinf) = (self.kernel.clone(), self.kernel.clone());
        [
            MellinKernel::new("0", self.dim, self.decay[0], move |t, out| {
                k0(delta * t, delta, out);
                out.iter_mut().for_each(|z| *z *= delta);
            }),
            MellinKernel::new("∞", self.dim, self.decay[1], move |t, out| {
                kinf(1.0 / (delta * t), 1.0 / delta, out);
                out.iter_mut().for_each(|z| *z /= delta);
            }),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WienerHopfReport {
    pub limit_points: Vec<String>,
    /// `max_λ ‖K̂₀(λ) − K̂_∞(λ)‖` on the comparison grid.
    pub max_difference: f64,
    /// The same against `K̂_∞(−λ)`, the reflection from the chart change.
    pub max_difference_reflected: f64,
    pub identical: bool,
    pub scans: Vec<VertexScan>,
    pub verdicts_agree: bool,
}

pub const IDENTITY_TOLERANCE: f64 = 1e-9;

pub fn wiener_hopf_check(
    cone: &LayerGroupoidDescriptor,
    op: &ConeOperator,
    c: f64,
    opts: &ScanOptions,
) -> Result<WienerHopfReport, MellinError> {
    if cone.model != ConeModel::ClosedHalfLine {
        return Err(MellinError::Spec("needs the closed half-line model".into()));
    }
    let ks = op.limit_kernels(1e-6);
    let grid = uniform_grid(20.0, 0.25);
    let fams = [mellin_transform(&ks[0], 0.0, &grid)?, mellin_transform(&ks[1], 0.0, &grid)?];
    let n = grid.len();
    let mut diff: f64 = 0.0;
    let mut refl: f64 = 0.0;
    for i in 0..n {
        diff = diff.max((&fams[0].values[i] - &fams[1].values[i]).norm());
        refl = refl.max((&fams[0].values[i] - &fams[1].values[n - 1 - i]).norm());
    }
    let scans = ks.iter().map(|k| scan_kernel(k, 0.0, c, opts).map(|s| s.0)).collect::<Result<Vec<_>, _>>()?;
    Ok(WienerHopfReport {
        limit_points: cone.model.fixed_points().iter().map(|s| s.to_string()).collect(),
        max_difference: diff,
        max_difference_reflected: refl,
        identical: diff < IDENTITY_TOLERANCE,
        verdicts_agree: scans[0].invertible == scans[1].invertible,
        scans,
    })
}
