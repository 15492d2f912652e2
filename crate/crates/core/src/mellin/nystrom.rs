//! Nyström discretization of `½I + K` on polygons, used as an independent
//! oracle for the symbol-level verdicts.
//!
//! Each edge is split at its midpoint and each half is graded toward its
//! vertex, `x = (ℓ/2) s³`, with the midpoint rule in `s`. The discrete inner
//! product carries the weights of `g = r⁻² g_e`, i.e. `ds/r` on the boundary:
//! `ω_j = w_j / r_j = 3/(N s_j)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{MellinError, MellinKernel};
use crate::algebra::sigma_min;
use crate::conical::LayerDomain;
use crate::par;

pub const GRADING: f64 = 3.0;
pub const MAX_LEVELS: usize = 8;
pub const MIN_POINTS_PER_EDGE: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    /// Quadrature weights in arclength.
    pub weights: Vec<f64>,
    /// Distance to the vertex the node's half-edge is graded toward.
    pub radius: Vec<f64>,
    pub edge: Vec<usize>,
    pub vertex: Vec<usize>,
    /// Index of the node's ray in the vertex base (`0` toward the next
    /// vertex, `1` toward the previous one, counterclockwise).
    pub ray: Vec<usize>,
    pub normals: Vec<[f64; 2]>,
}

impl Mesh {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    /// `ω_j` of the weighted inner product.
    pub fn metric_weight(&self, j: usize) -> f64 {
        self.weights[j] / self.radius[j]
    }
}

/// Counterclockwise vertex coordinates, after validation.
fn polygon_points(d: &LayerDomain) -> Result<Vec<[f64; 2]>, MellinError> {
    let mut d = d.clone();
    d.validate()?;
    if d.n != 2 || !d.is_cyclic_polygon() || (0..d.vertices.len()).any(|i| d.interior_angle(i).is_none()) {
        return Err(MellinError::NotPolygon);
    }
    let area = d.signed_area().ok_or(MellinError::Degenerate)?;
    let mut pts: Vec<[f64; 2]> = d.vertices.iter().map(|v| [v.coords[0], v.coords[1]]).collect();
    let diam2 = pts
        .iter()
        .flat_map(|p| pts.iter().map(move |q| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)))
        .fold(0.0, f64::max);
    if area.abs() <= 1e-10 * diam2 {
        return Err(MellinError::Degenerate);
    }
    if area < 0.0 {
        pts.reverse();
    }
    Ok(pts)
}

/// Graded mesh with `n_half` nodes per half-edge.
pub fn graded_mesh(d: &LayerDomain, n_half: usize) -> Result<Mesh, MellinError> {
    if 2 * n_half < MIN_POINTS_PER_EDGE {
        return Err(MellinError::TooCoarse { points: 2 * n_half });
    }
    let pts = polygon_points(d)?;
    // vertex indices of the validated domain, remapped if we reversed
    let np = pts.len();
    let reversed = d.signed_area().is_some_and(|a| a < 0.0);
    let original = |i: usize| if reversed { np - 1 - i } else { i };
    let mut m = Mesh {
        nodes: vec![],
        weights: vec![],
        radius: vec![],
        edge: vec![],
        vertex: vec![],
        ray: vec![],
        normals: vec![],
    };
    for e in 0..np {
        let (a, b) = (pts[e], pts[(e + 1) % np]);
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len = dx.hypot(dy);
        let (ux, uy) = (dx / len, dy / len);
        m.normals.push([uy, -ux]);
        // half at a grades toward a along +u; half at b toward b along −u
        for (v, dir, ray) in [(e, 1.0, 0), ((e + 1) % np, -1.0, 1)] {
            let p = pts[v];
            for j in 0..n_half {
                let s = (j as f64 + 0.5) / n_half as f64;
                let x = 0.5 * len * s.powf(GRADING);
                m.nodes.push([p[0] + dir * x * ux, p[1] + dir * x * uy]);
                m.weights.push(0.5 * len * GRADING * s.powf(GRADING - 1.0) / n_half as f64);
                m.radius.push(x);
                m.edge.push(e);
                m.vertex.push(original(v));
                m.ray.push(if reversed { 1 - ray } else { ray });
            }
        }
    }
    Ok(m)
}

/// `(1/2π) (y−x)·n_y / |x−y|²`, zero on the same edge.
pub fn double_layer_entry(m: &Mesh, j: usize, l: usize) -> f64 {
    if m.edge[j] == m.edge[l] {
        return 0.0;
    }
    let (x, y, n) = (m.nodes[j], m.nodes[l], m.normals[m.edge[l]]);
    let (rx, ry) = (y[0] - x[0], y[1] - x[1]);
    (rx * n[0] + ry * n[1]) / (rx * rx + ry * ry) / std::f64::consts::TAU
}

/// `Ω^{1/2}(c·I + K W)Ω^{−1/2}`.
pub fn weighted_double_layer(m: &Mesh, c: f64) -> DMatrix<f64> {
    let n = m.len();
    let sq: Vec<f64> = (0..n).map(|j| m.metric_weight(j).sqrt()).collect();
    DMatrix::from_fn(n, n, |j, l| {
        let a = if j == l { c } else { 0.0 } + double_layer_entry(m, j, l) * m.weights[l];
        sq[j] * a / sq[l]
    })
}

fn smallest_singular_value(a: &DMatrix<f64>) -> f64 {
    let ata = a.transpose() * a;
    ata.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub level: usize,
    pub dof: usize,
    pub sigma_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NystromTrace {
    pub rows: Vec<TraceRow>,
    /// `|σ_L − σ_{L−1}| / σ_{L−1}` for the two finest levels.
    pub relative_change: f64,
    pub stabilized: bool,
    /// `σ_first / σ_last`.
    pub decay_factor: f64,
}

impl NystromTrace {
    fn from_rows(rows: Vec<TraceRow>) -> Self {
        let n = rows.len();
        let (relative_change, decay_factor) = if n >= 2 {
            let (a, b) = (rows[n - 2].sigma_min, rows[n - 1].sigma_min);
            ((b - a).abs() / a, rows[0].sigma_min / b)
        } else {
            (f64::NAN, 1.0)
        };
        NystromTrace { stabilized: relative_change <= 0.1, relative_change, decay_factor, rows }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,dof,sigma_min\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{:.12e}\n", r.level, r.dof, r.sigma_min));
        }
        s
    }
}

fn level_points(level: usize, base: usize) -> usize {
    base << (level - 1)
}

fn check_levels(levels: usize) -> Result<(), MellinError> {
    if levels == 0 || levels > MAX_LEVELS {
        return Err(MellinError::Levels(levels));
    }
    Ok(())
}

/// `σ_min(½I + K_h)` per level, `N = base·2^{ℓ−1}` nodes per half-edge.
pub fn nystrom_oracle(d: &LayerDomain, levels: usize, base: usize) -> Result<NystromTrace, MellinError> {
    check_levels(levels)?;
    let meshes = (1..=levels).map(|l| graded_mesh(d, level_points(l, base))).collect::<Result<Vec<_>, _>>()?;
    let rows = par::map(&meshes.iter().enumerate().collect::<Vec<_>>(), |(i, m)| TraceRow {
        level: i + 1,
        dof: m.len(),
        sigma_min: smallest_singular_value(&weighted_double_layer(m, 0.5)),
    });
    Ok(NystromTrace::from_rows(rows))
}

/// The same mesh for `c·I + Σ_i P_i`, with `P_i` the Mellin convolution by
/// `kernels[i]` localized to the two half-edges at vertex `i`:
/// `B_{jl} = c δ_{jl} + √ω_j k_{ρ(j)ρ(l)}(r_j/r_l) √ω_l`.
pub fn nystrom_kernel_trace(
    d: &LayerDomain,
    c: f64,
    kernels: &[MellinKernel],
    levels: usize,
    base: usize,
) -> Result<NystromTrace, MellinError> {
    check_levels(levels)?;
    let mut rows = Vec::with_capacity(levels);
    for level in 1..=levels {
        let m = graded_mesh(d, level_points(level, base))?;
        if kernels.len() != d.vertices.len() || kernels.iter().any(|k| k.dim != 2) {
            return Err(MellinError::Spec("need one 2×2 kernel per polygon vertex".into()));
        }
        let blocks: Vec<Vec<usize>> =
            (0..kernels.len()).map(|v| (0..m.len()).filter(|&j| m.vertex[j] == v).collect()).collect();
        let mins = par::map(&blocks.iter().enumerate().collect::<Vec<_>>(), |(v, nodes)| {
            let k = &kernels[*v];
            let mut buf = vec![Complex64::new(0.0, 0.0); 4];
            let mut b = DMatrix::<Complex64>::zeros(nodes.len(), nodes.len());
            for (p, &j) in nodes.iter().enumerate() {
                for (q, &l) in nodes.iter().enumerate() {
                    k.eval_into(m.radius[j] / m.radius[l], &mut buf);
                    let w = (m.metric_weight(j) * m.metric_weight(l)).sqrt();
                    b[(p, q)] = buf[m.ray[j] * 2 + m.ray[l]] * w;
                }
                b[(p, p)] += c;
            }
            sigma_min(&b)
        });
        rows.push(TraceRow { level, dof: m.len(), sigma_min: mins.into_iter().fold(f64::INFINITY, f64::min) });
    }
    Ok(NystromTrace::from_rows(rows))
}
