//! Matrix-valued Mellin convolution kernels `k : (0,∞) → M_k(ℂ)`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::MellinError;

/// `|k(t)| = O(t^near_zero)` as `t → 0` and `O(t^{−near_infinity})` as
/// `t → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decay {
    pub near_zero: f64,
    pub near_infinity: f64,
}

impl Decay {
    /// `∫ |k(t)| t^{σ−1} dt < ∞`.
    pub fn integrable_on(&self, sigma: f64) -> bool {
        -self.near_zero < sigma && sigma < self.near_infinity
    }

    fn meet(self, o: Decay) -> Decay {
        Decay { near_zero: self.near_zero.min(o.near_zero), near_infinity: self.near_infinity.min(o.near_infinity) }
    }

    const NONE: Decay = Decay { near_zero: f64::INFINITY, near_infinity: f64::INFINITY };
}

type EvalFn = dyn Fn(f64, &mut [Complex64]) + Send + Sync;

/// Kernel of the operator `u ↦ ∫ k(r/s) u(s) ds/s` on `ℝ⁺ × ∂ω_i`; entry
/// `(c, c′)` couples components `c` and `c′`.
#[derive(Clone)]
pub struct MellinKernel {
    pub vertex: String,
    pub dim: usize,
    pub decay: Decay,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for MellinKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MellinKernel").field("vertex", &self.vertex).field("dim", &self.dim).field("decay", &self.decay).finish()
    }
}

impl MellinKernel {
    /// `eval(t, out)` fills the row-major `dim × dim` matrix `k(t)`.
    pub fn new(
        vertex: impl Into<String>,
        dim: usize,
        decay: Decay,
        eval: impl Fn(f64, &mut [Complex64]) + Send + Sync + 'static,
    ) -> Self {
        MellinKernel { vertex: vertex.into(), dim, decay, eval: Arc::new(eval) }
    }

    pub fn zero(vertex: impl Into<String>, dim: usize) -> Self {
        Self::new(vertex, dim, Decay::NONE, |_, out| out.fill(Complex64::new(0.0, 0.0)))
    }

    pub fn eval_into(&self, t: f64, out: &mut [Complex64]) {
        (self.eval)(t, out)
    }

    pub fn eval(&self, t: f64) -> DMatrix<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.dim * self.dim];
        self.eval_into(t, &mut buf);
        DMatrix::from_row_slice(self.dim, self.dim, &buf)
    }

    /// `k*(t) = conj(k(1/t))ᵀ`, the kernel of the adjoint on `L²(dt/t)`.
    pub fn adjoint(&self) -> Self {
        let inner = self.eval.clone();
        let d = self.dim;
        let decay = Decay { near_zero: self.decay.near_infinity, near_infinity: self.decay.near_zero };
        Self::new(self.vertex.clone(), d, decay, move |t, out| {
            let mut buf = vec![Complex64::new(0.0, 0.0); d * d];
            inner(1.0 / t, &mut buf);
            for i in 0..d {
                for j in 0..d {
                    out[i * d + j] = buf[j * d + i].conj();
                }
            }
        })
    }

    /// `k(1/t)`: the same operator seen from the other end of `(0, ∞)`.
    pub fn inverted(&self) -> Self {
        let inner = self.eval.clone();
        let decay = Decay { near_zero: self.decay.near_infinity, near_infinity: self.decay.near_zero };
        Self::new(self.vertex.clone(), self.dim, decay, move |t, out| inner(1.0 / t, out))
    }

    pub fn from_spec(vertex: impl Into<String>, spec: &KernelSpec) -> Result<Self, MellinError> {
        let d = spec.entries.len();
        if d == 0 || spec.entries.iter().any(|r| r.len() != d) {
            return Err(MellinError::Spec("kernel entries must form a non-empty square matrix".into()));
        }
        let mut decay = Decay::NONE;
        for e in spec.entries.iter().flatten() {
            e.check()?;
            decay = decay.meet(e.decay());
        }
        let entries: Vec<ScalarKernel> = spec.entries.iter().flatten().cloned().collect();
        Ok(Self::new(vertex, d, decay, move |t, out| {
            for (o, e) in out.iter_mut().zip(&entries) {
                *o = Complex64::new(e.eval(t), 0.0);
            }
        }))
    }
}

/// `(1/2π) sin α · t / (t² − 2t cos α + 1)`.
pub fn wedge_entry(alpha: f64, t: f64) -> f64 {
    let (s, c) = alpha.sin_cos();
    s * t / (t * t - 2.0 * t * c + 1.0) / TAU
}

/// One scalar entry of a user kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScalarKernel {
    Zero,
    /// Double-layer coupling between two rays at interior angle `alpha`.
    Wedge { alpha: f64 },
    /// `Σ coef/(π·scale) · sech((ln t − shift)/scale)`.
    Sech { terms: Vec<SechTerm> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SechTerm {
    pub coef: f64,
    pub scale: f64,
    #[serde(default)]
    pub shift: f64,
}

impl ScalarKernel {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ScalarKernel::Zero => 0.0,
            ScalarKernel::Wedge { alpha } => wedge_entry(*alpha, t),
            ScalarKernel::Sech { terms } => {
                let u = t.ln();
                terms.iter().map(|s| s.coef / (PI * s.scale) / ((u - s.shift) / s.scale).cosh()).sum()
            }
        }
    }

    fn decay(&self) -> Decay {
        match self {
            ScalarKernel::Zero => Decay::NONE,
            ScalarKernel::Wedge { .. } => Decay { near_zero: 1.0, near_infinity: 1.0 },
            ScalarKernel::Sech { terms } => {
                let p = terms.iter().map(|s| 1.0 / s.scale).fold(f64::INFINITY, f64::min);
                Decay { near_zero: p, near_infinity: p }
            }
        }
    }

    fn check(&self) -> Result<(), MellinError> {
        match self {
            ScalarKernel::Wedge { alpha } if !(*alpha > 0.0 && *alpha < TAU) => Err(MellinError::Angle(*alpha)),
            ScalarKernel::Sech { terms } if terms.iter().any(|s| !(s.scale > 0.0) || !s.coef.is_finite()) => {
                Err(MellinError::Spec("sech scales must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Square matrix of scalar entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub entries: Vec<Vec<ScalarKernel>>,
}

/// The planar Laplace double layer on two rays at interior angle `α`:
/// the diagonal vanishes (collinear points), the off-diagonal entries are
/// [`wedge_entry`]. Rays are ordered counterclockwise across the interior
/// and normals point outward.
pub fn wedge_double_layer_kernel(vertex: impl Into<String>, alpha: f64) -> Result<MellinKernel, MellinError> {
    if !(alpha > 0.0 && alpha < TAU) {
        return Err(MellinError::Angle(alpha));
    }
    let off = ScalarKernel::Wedge { alpha };
    let spec = KernelSpec { entries: vec![vec![ScalarKernel::Zero, off.clone()], vec![off, ScalarKernel::Zero]] };
    MellinKernel::from_spec(vertex, &spec)
}

/// Diagonal kernel whose symbol is `−c·Σ β_j sech(π λ s_j / 2)` with scales
/// `1, 2, 3` and weights chosen so that `c + K̂(λ) = O(λ⁶)` at `λ = 0`.
pub fn adversarial_kernel(vertex: impl Into<String>, c: f64, dim: usize) -> MellinKernel {
    let terms = [(1.5, 1.0), (-0.6, 2.0), (0.1, 3.0)]
        .map(|(beta, scale)| SechTerm { coef: -c * beta, scale, shift: 0.0 })
        .to_vec();
    let entries = (0..dim)
        .map(|i| {
            (0..dim).map(|j| if i == j { ScalarKernel::Sech { terms: terms.clone() } } else { ScalarKernel::Zero }).collect()
        })
        .collect();
    MellinKernel::from_spec(vertex, &KernelSpec { entries }).expect("valid")
}
