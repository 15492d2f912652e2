//! Mellin symbols of the boundary limit operators at cone points.
//!
//! Near a vertex the space `K⁰_{(n−1)/2}(∂Ω)` is `L²(ℝ⁺ × ∂ω, dr/r)`, on
//! which `u ↦ ∫ k(r/s) u(s) ds/s` is diagonalized by
//! `K̂(λ) = ∫₀^∞ k(t) t^{σ−1−iλ} dt` with `σ = 0`. A weight `a` other than the
//! critical one moves the line to `σ = a − (n−1)/2`.

mod kernel;
pub mod nystrom;
pub mod quadrature;
mod scan;
mod transform;
pub mod wiener_hopf;

use thiserror::Error;

use crate::conical::DomainError;

pub use kernel::{
    adversarial_kernel, wedge_double_layer_kernel, wedge_entry, Decay, KernelSpec, MellinKernel, ScalarKernel, SechTerm,
};
pub use scan::{
    fredholm_verdict, invertibility_scan, scan_kernel, vertex_kernels, FredholmVerdict, KernelChoice, OperatorSpec,
    sigma_min_shifted, ScanMinimum, ScanOptions, VertexScan,
};
pub use transform::{
    first_moment, mellin_transform, scan_grid, symbol_at, total_variation, truncation, uniform_grid, MellinSymbolFamily, Scheme, Truncation,
    QUADRATURE_TOLERANCE,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MellinError {
    #[error("angle {0} outside (0, 2π)")]
    Angle(f64),
    #[error("invalid kernel: {0}")]
    Spec(String),
    #[error("kernel with decay {decay:?} is not integrable on the line σ = {sigma}")]
    NotIntegrable { sigma: f64, decay: Decay },
    #[error("quadrature did not converge at λ = {lambda} (error {error:e})")]
    NoConvergence { lambda: f64, error: f64 },
    #[error("tail bound {bound:e} at Λ = {lambda_max} is not below c/2 = {}", c / 2.0)]
    TailInsufficient { lambda_max: f64, bound: f64, c: f64 },
    #[error("no kernel given for vertex {0:?}")]
    MissingKernel(String),
    #[error("numerical symbols are only available for n = 2, got n = {0}")]
    Unsupported(usize),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("domain is not a polygon")]
    NotPolygon,
    #[error("degenerate polygon")]
    Degenerate,
    #[error("mesh too coarse: {points} points per edge, need at least 8")]
    TooCoarse { points: usize },
    #[error("levels must be in 1..=8, got {0}")]
    Levels(usize),
}
