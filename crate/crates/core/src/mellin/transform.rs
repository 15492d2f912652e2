//! `K̂(λ) = ∫₀^∞ k(t) t^{σ−1−iλ} dt`, computed in `u = ln t`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::quadrature::{adaptive, trapezoid};
use super::{MellinError, MellinKernel};
use crate::par;

/// Absolute error target per entry.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;
const TAIL_EPS: f64 = 1e-15;
const MAX_PANELS: usize = 200_000;

/// Integration range in `u` outside which the integrand is negligible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub lo: f64,
    pub hi: f64,
    /// Bound on the discarded tails.
    pub tail: f64,
}

fn envelope(k: &MellinKernel, sigma: f64, u: f64, buf: &mut [Complex64]) -> f64 {
    k.eval_into(u.exp(), buf);
    buf.iter().map(|z| z.norm()).fold(0.0, f64::max) * (sigma * u).exp()
}

/// Walks outward in unit steps until the envelope, extrapolated with the
/// declared decay rate, bounds the remaining tail by `1e-15`.
pub fn truncation(k: &MellinKernel, sigma: f64) -> Result<Truncation, MellinError> {
    if !k.decay.integrable_on(sigma) {
        return Err(MellinError::NotIntegrable { sigma, decay: k.decay });
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); k.dim * k.dim];
    let rates = [k.decay.near_infinity - sigma, k.decay.near_zero + sigma];
    let mut ends = [0.0; 2];
    let mut tail = 0.0;
    for (side, dir) in [1.0, -1.0].into_iter().enumerate() {
        let rate = rates[side].min(50.0);
        let mut quiet = 0;
        let mut u = 1.0;
        loop {
            let e = envelope(k, sigma, dir * u, &mut buf);
            if e / rate < TAIL_EPS {
                quiet += 1;
                if quiet == 3 {
                    tail += e / rate;
                    break;
                }
            } else {
                quiet = 0;
            }
            u += 1.0;
            if u > 4000.0 {
                return Err(MellinError::NotIntegrable { sigma, decay: k.decay });
            }
        }
        ends[side] = dir * u;
    }
    Ok(Truncation { lo: ends[1], hi: ends[0], tail })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Scheme {
    /// Adaptive Gauss–Kronrod (7/15) in `u`.
    Adaptive,
    /// Trapezoid rule in `u` with step `h`.
    Trapezoid { h: f64 },
}

fn integrand<'a>(k: &'a MellinKernel, sigma: f64, lambda: f64) -> (usize, impl Fn(f64, &mut [Complex64]) + Sync + 'a) {
    (k.dim * k.dim, move |u: f64, out: &mut [Complex64]| {
        k.eval_into(u.exp(), out);
        let w = Complex64::from_polar((sigma * u).exp(), -lambda * u);
        out.iter_mut().for_each(|z| *z *= w);
    })
}

/// `K̂(λ)` with an error estimate (quadrature plus truncated tails).
pub fn symbol_at(
    k: &MellinKernel,
    sigma: f64,
    lambda: f64,
    scheme: Scheme,
    range: &Truncation,
) -> Result<(DMatrix<Complex64>, f64), MellinError> {
    let f = integrand(k, sigma, lambda);
    let (v, err) = match scheme {
        Scheme::Adaptive => {
            // about two oscillations per initial panel
            let width = (4.0 * std::f64::consts::PI / lambda.abs().max(1e-300)).min(1.0);
            let panels = ((range.hi - range.lo) / width).ceil() as usize;
            adaptive(&f, range.lo, range.hi, panels, QUADRATURE_TOLERANCE, MAX_PANELS)
                .map_err(|e| MellinError::NoConvergence { lambda, error: e.error })?
        }
        Scheme::Trapezoid { h } => (trapezoid(&f, range.lo, range.hi, h), f64::NAN),
    };
    Ok((DMatrix::from_row_slice(k.dim, k.dim, &v), err + range.tail))
}

/// Sampled symbol on a λ-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MellinSymbolFamily {
    pub vertex: String,
    pub sigma: f64,
    pub lambdas: Vec<f64>,
    pub values: Vec<DMatrix<Complex64>>,
    pub errors: Vec<f64>,
    /// `V` with `‖K̂(λ)‖ ≤ V/|λ|`: the total variation of `u ↦ k(e^u)e^{σu}`
    /// (Frobenius over entries), since integrating by parts once gives
    /// `|∫ f e^{−iλu} du| ≤ TV(f)/|λ|`.
    pub tail_variation: f64,
    /// `∫ |u| ‖f(u)‖ du`, a Lipschitz constant of `λ ↦ K̂(λ)`.
    pub lipschitz: f64,
}

impl MellinSymbolFamily {
    pub fn tail_bound(&self, lambda: f64) -> f64 {
        self.tail_variation / lambda.abs()
    }

    /// Largest relative jump of `‖K̂‖` between adjacent samples.
    pub fn max_adjacent_deviation(&self) -> f64 {
        self.values.windows(2).map(|w| (&w[1] - &w[0]).norm()).fold(0.0, f64::max)
    }

    /// Inserts samples (kept sorted by λ).
    pub fn insert(&mut self, samples: Vec<(f64, DMatrix<Complex64>, f64)>) {
        let mut all: Vec<_> = self
            .lambdas
            .drain(..)
            .zip(self.values.drain(..))
            .zip(self.errors.drain(..))
            .map(|((l, v), e)| (l, v, e))
            .chain(samples)
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        all.dedup_by(|a, b| a.0 == b.0);
        for (l, v, e) in all {
            self.lambdas.push(l);
            self.values.push(v);
            self.errors.push(e);
        }
    }
}

/// Numerical total variation on a fine grid in `u`, inflated by 5% to
/// cover sampling.
pub fn total_variation(k: &MellinKernel, sigma: f64, range: &Truncation) -> f64 {
    let d2 = k.dim * k.dim;
    let h = 1e-3;
    let n = ((range.hi - range.lo) / h).ceil() as usize;
    let mut prev = vec![Complex64::new(0.0, 0.0); d2];
    let mut cur = prev.clone();
    let mut tv = vec![0.0; d2];
    let f = integrand(k, sigma, 0.0);
    (f.1)(range.lo, &mut prev);
    for j in 1..=n {
        (f.1)(range.lo + j as f64 * h, &mut cur);
        for i in 0..d2 {
            tv[i] += (cur[i] - prev[i]).norm();
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    // the envelope at the ends is below the tail threshold; count it once each
    1.05 * tv.iter().map(|x| x * x).sum::<f64>().sqrt() + 2.0 * range.tail
}

/// `∫ |u| ‖k(e^u) e^{σu}‖_F du` by the trapezoid rule, inflated by 5%.
pub fn first_moment(k: &MellinKernel, sigma: f64, range: &Truncation) -> f64 {
    let h = 1e-3;
    let n = ((range.hi - range.lo) / h).ceil() as usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); k.dim * k.dim];
    let f = integrand(k, sigma, 0.0);
    let mut sum = 0.0;
    for j in 0..=n {
        let u = range.lo + j as f64 * h;
        (f.1)(u, &mut buf);
        sum += u.abs() * buf.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    1.05 * sum * h
}

pub fn sample(
    k: &MellinKernel,
    sigma: f64,
    lambdas: &[f64],
    range: &Truncation,
) -> Result<Vec<(f64, DMatrix<Complex64>, f64)>, MellinError> {
    par::map(lambdas, |&l| symbol_at(k, sigma, l, Scheme::Adaptive, range).map(|(v, e)| (l, v, e)))
        .into_iter()
        .collect()
}

/// Samples `K̂` on `grid` by adaptive quadrature.
pub fn mellin_transform(k: &MellinKernel, sigma: f64, grid: &[f64]) -> Result<MellinSymbolFamily, MellinError> {
    let range = truncation(k, sigma)?;
    let mut fam = MellinSymbolFamily {
        vertex: k.vertex.clone(),
        sigma,
        lambdas: vec![],
        values: vec![],
        errors: vec![],
        tail_variation: total_variation(k, sigma, &range),
        lipschitz: first_moment(k, sigma, &range),
    };
    fam.insert(sample(k, sigma, grid, &range)?);
    Ok(fam)
}

/// Step `h` on `|λ| ≤ 50`, `4h` beyond, up to `Λ`; symmetric, contains 0.
pub fn scan_grid(lambda_max: f64, step: f64) -> Vec<f64> {
    let inner = lambda_max.min(50.0);
    let mut g = uniform_grid(inner, step);
    let mut l = (inner / step).round() * step + 4.0 * step;
    while l <= lambda_max + 1e-9 {
        g.push(l);
        g.push(-l);
        l += 4.0 * step;
    }
    g.sort_by(f64::total_cmp);
    g
}

/// `−Λ, −Λ+h, …, Λ`.
pub fn uniform_grid(lambda_max: f64, step: f64) -> Vec<f64> {
    let n = (lambda_max / step).round() as i64;
    (-n..=n).map(|j| j as f64 * step).collect()
}
