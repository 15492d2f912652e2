//! Invertibility scans of `c·I + K̂(λ)` along the Mellin line and the
//! resulting Fredholm verdicts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::transform::{mellin_transform, sample, scan_grid, truncation, MellinSymbolFamily};
use super::{adversarial_kernel, wedge_double_layer_kernel, KernelSpec, MellinError, MellinKernel};
use crate::algebra::sigma_min;
use crate::conical::{weight_line, LayerDomain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub lambda_max: f64,
    pub step: f64,
    /// Neighbouring samples whose `σ_min` differ by more than this fraction
    /// (and more than `tolerance`) get a midpoint inserted.
    pub refine_ratio: f64,
    pub max_refinements: usize,
    /// `σ_min > tolerance` counts as invertible.
    pub tolerance: f64,
    /// Λ is doubled while the tail bound is at least `c/2`, up to this.
    pub lambda_cap: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            lambda_max: 200.0,
            step: 0.5,
            refine_ratio: 0.1,
            max_refinements: 8,
            tolerance: 1e-3,
            lambda_cap: 1e5,
        }
    }
}

/// `min σ_min(c·I + K̂(λ))` over a sampled family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanMinimum {
    pub min_sigma: f64,
    pub argmin: f64,
    /// Lower bound beyond the grid, `c − V/Λ`.
    pub tail_lower_bound: f64,
    /// Lower bound on `|λ| ≤ Λ` including between samples, from the
    /// Lipschitz constant of the family.
    pub certified_lower_bound: f64,
}

/// Smallest singular value of `c·I + v`.
pub fn sigma_min_shifted(v: &nalgebra::DMatrix<num_complex::Complex64>, c: f64) -> f64 {
    let mut m = v.clone();
    for i in 0..m.nrows() {
        m[(i, i)] += c;
    }
    sigma_min(&m)
}

pub fn invertibility_scan(s: &MellinSymbolFamily, c: f64) -> ScanMinimum {
    let mut best = (f64::INFINITY, f64::NAN);
    for (l, v) in s.lambdas.iter().zip(&s.values) {
        let m = sigma_min_shifted(v, c);
        if m < best.0 {
            best = (m, *l);
        }
    }
    let lmax = s.lambdas.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let sig: Vec<f64> = s.values.iter().map(|v| sigma_min_shifted(v, c)).collect();
    let mut certified = sig.iter().copied().fold(f64::INFINITY, f64::min);
    for i in 1..sig.len() {
        let (a, b, gap) = (sig[i - 1], sig[i], s.lambdas[i] - s.lambdas[i - 1]);
        // σ_min is 1-Lipschitz in the matrix, hence L-Lipschitz in λ
        let dip = if (a - b).abs() <= s.lipschitz * gap { 0.5 * (a + b - s.lipschitz * gap) } else { a.min(b) };
        certified = certified.min(dip);
    }
    ScanMinimum {
        min_sigma: best.0,
        argmin: best.1,
        tail_lower_bound: c.abs() - s.tail_bound(lmax),
        certified_lower_bound: certified,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexScan {
    pub vertex: String,
    pub min_sigma: f64,
    pub argmin: f64,
    pub lambda_max: f64,
    pub samples: usize,
    /// The tail bound beyond Λ is below `c/2`.
    pub tail_certified: bool,
    /// See [`ScanMinimum::certified_lower_bound`].
    pub certified_lower_bound: f64,
    pub max_quadrature_error: f64,
    pub invertible: bool,
}

/// Samples the symbol of `k` on `|λ| ≤ Λ`, extending Λ until the tail is
/// certified and refining where `σ_min` changes quickly, then scans.
///
/// For `c = 0` no tail can be certified; the scan then runs on the default
/// grid and reports `tail_certified = false` instead of failing.
pub fn scan_kernel(k: &MellinKernel, sigma: f64, c: f64, opts: &ScanOptions) -> Result<(VertexScan, MellinSymbolFamily), MellinError> {
    let range = truncation(k, sigma)?;
    let mut fam = mellin_transform(k, sigma, &[])?;
    let mut lmax = opts.lambda_max;
    let certified = loop {
        if fam.tail_bound(lmax) < c.abs() / 2.0 {
            break true;
        }
        if c == 0.0 {
            break false;
        }
        lmax *= 2.0;
        if lmax > opts.lambda_cap {
            return Err(MellinError::TailInsufficient { lambda_max: lmax / 2.0, bound: fam.tail_bound(lmax / 2.0), c });
        }
    };
    let grid = scan_grid(lmax, opts.step);
    fam.insert(sample(k, sigma, &grid, &range)?);
    for _ in 0..opts.max_refinements {
        let sig: Vec<f64> = fam.values.iter().map(|v| sigma_min_shifted(v, c)).collect();
        let mids: Vec<f64> = (0..sig.len() - 1)
            .filter(|&i| {
                // relative jumps below the tolerance are quadrature-level noise
                let (hi, jump) = (sig[i].max(sig[i + 1]), (sig[i] - sig[i + 1]).abs());
                jump > opts.refine_ratio * hi && jump > opts.tolerance
            })
            .map(|i| 0.5 * (fam.lambdas[i] + fam.lambdas[i + 1]))
            .filter(|m| !fam.lambdas.contains(m))
            .collect();
        if mids.is_empty() {
            break;
        }
        fam.insert(sample(k, sigma, &mids, &range)?);
    }
    let m = invertibility_scan(&fam, c);
    let min_sigma = if certified { m.min_sigma.min(m.tail_lower_bound) } else { m.min_sigma };
    Ok((
        VertexScan {
            vertex: k.vertex.clone(),
            min_sigma,
            argmin: m.argmin,
            lambda_max: lmax,
            samples: fam.lambdas.len(),
            tail_certified: certified,
            certified_lower_bound: m.certified_lower_bound.min(m.tail_lower_bound),
            max_quadrature_error: fam.errors.iter().copied().fold(0.0, f64::max),
            invertible: certified && min_sigma > opts.tolerance,
        },
        fam,
    ))
}

/// Which kernels act at the vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelChoice {
    /// Built-in planar double layer from the interior angles.
    DoubleLayer,
    /// One kernel per vertex id.
    User { kernels: BTreeMap<String, KernelSpec> },
    /// [`adversarial_kernel`] at the listed vertices, double layer elsewhere.
    Adversarial { vertices: Vec<String> },
}

/// `c·I + K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub c: f64,
    pub kernel: KernelChoice,
}

impl OperatorSpec {
    pub fn half_plus_double_layer() -> Self {
        OperatorSpec { c: 0.5, kernel: KernelChoice::DoubleLayer }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FredholmVerdict {
    pub c: f64,
    /// Offset of the Mellin line from the critical weight.
    pub sigma: f64,
    pub weight: f64,
    /// Principal symbol of `c·I + (order −1)` is `c`.
    pub ellipticity: bool,
    pub vertices: Vec<VertexScan>,
    pub fredholm: bool,
    pub tolerance: f64,
    pub witness: Option<String>,
}

/// Kernels for every vertex of a planar domain.
pub fn vertex_kernels(d: &LayerDomain, choice: &KernelChoice, c: f64) -> Result<Vec<MellinKernel>, MellinError> {
    let mut d = d.clone();
    d.validate()?;
    if d.n != 2 {
        return Err(MellinError::Unsupported(d.n));
    }
    let double_layer = |i: usize| {
        let id = &d.vertices[i].id;
        let alpha = d.interior_angle(i).ok_or_else(|| MellinError::Spec(format!("vertex {id:?} is not a two-ray corner")))?;
        wedge_double_layer_kernel(id.clone(), alpha)
    };
    (0..d.vertices.len())
        .map(|i| {
            let id = &d.vertices[i].id;
            match choice {
                KernelChoice::DoubleLayer => double_layer(i),
                KernelChoice::User { kernels } => {
                    let spec = kernels.get(id).ok_or_else(|| MellinError::MissingKernel(id.clone()))?;
                    let k = MellinKernel::from_spec(id.clone(), spec)?;
                    if k.dim != d.components(i) {
                        return Err(MellinError::Spec(format!("kernel at {id:?} must be {0}×{0}", d.components(i))));
                    }
                    Ok(k)
                }
                KernelChoice::Adversarial { vertices } if vertices.contains(id) => {
                    Ok(adversarial_kernel(id.clone(), c, d.components(i)))
                }
                KernelChoice::Adversarial { .. } => double_layer(i),
            }
        })
        .collect()
}

/// Symbol-level Fredholm test for `c·I + K` on `K^s_{(n−1)/2}(∂Ω)`.
/// `weight` defaults to the critical one from [`weight_line`].
pub fn fredholm_verdict(
    d: &LayerDomain,
    op: &OperatorSpec,
    weight: Option<f64>,
    opts: &ScanOptions,
) -> Result<FredholmVerdict, MellinError> {
    let kernels = vertex_kernels(d, &op.kernel, op.c)?;
    let w = weight_line(d.n, 0.0)?;
    let weight = weight.unwrap_or(w.boundary_weight);
    let sigma = weight - w.boundary_weight + w.mellin_offset;
    let ellipticity = op.c != 0.0;
    // the double layer depends on the angle only: scan each angle once
    let mut d = d.clone();
    d.validate()?;
    let mut cache: BTreeMap<i64, VertexScan> = BTreeMap::new();
    let mut vertices = Vec::with_capacity(kernels.len());
    for (i, k) in kernels.iter().enumerate() {
        let key = match (&op.kernel, d.interior_angle(i)) {
            (KernelChoice::DoubleLayer, Some(a)) => Some((a * 1e12).round() as i64),
            _ => None,
        };
        let cached = key.and_then(|key| cache.get(&key).cloned());
        let scan = match cached {
            Some(mut s) => {
                s.vertex = k.vertex.clone();
                s
            }
            None => scan_kernel(k, sigma, op.c, opts)?.0,
        };
        if let Some(key) = key {
            cache.entry(key).or_insert_with(|| scan.clone());
        }
        vertices.push(scan);
    }
    let witness = if !ellipticity {
        Some("principal symbol c vanishes".to_string())
    } else {
        vertices.iter().find(|v| !v.invertible).map(|v| {
            format!("vertex {}: min σ = {:.3e} at λ = {}", v.vertex, v.min_sigma, v.argmin)
        })
    };
    Ok(FredholmVerdict {
        c: op.c,
        sigma,
        weight,
        ellipticity,
        fredholm: ellipticity && vertices.iter().all(|v| v.invertible),
        vertices,
        tolerance: opts.tolerance,
        witness,
    })
}
