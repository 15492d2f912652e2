//! Domains with conical points, their desingularized boundary and the
//! symbolic layer-potential groupoid, plus finite truncations of it.
//!
//! Near a vertex `p_i` the boundary is blown up to a cylinder
//! `[0,1) × ∂ω_i`; the groupoid over it is `(H × (∂ω_i)²)` restricted to the
//! cylinder, with `H = [0,∞) ⋊ (0,∞)`, glued to the pair groupoid of the
//! smooth part `Ω₀`. Cylinder length is normalized to 1 and the gluing
//! collar is `[1/2, 1)`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fredholm::{make_structure, FredholmError, FredholmStructure};
use crate::gluing::{glue, AtlasError, GlueError, GluedGroupoid, GluingAtlas};
use crate::groupoid::{
    disjoint_union, fibered_pullback, group_bundle, pair, product, BuildError, FiniteGroup, FiniteGroupoid, UnitId,
    UnitSubset,
};

const GEOMETRY_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("vertex {0:?}: coordinates must have length n")]
    Coordinates(String),
    #[error("vertices {0:?} and {1:?} coincide")]
    Coincident(String, String),
    #[error("duplicate vertex id {0:?}")]
    DuplicateId(String),
    #[error("edge refers to unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("vertex {0:?}: {1}")]
    Base(String, String),
    #[error("domains with cracks are not supported (vertex {0:?})")]
    Crack(String),
}

/// `∂ω` for one vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConeBase {
    /// Planar vertex: directions (radians) of the boundary rays, listed
    /// counterclockwise so that the interior is swept from each ray to the
    /// next. Two rays give a corner of interior angle `rays[1] − rays[0]`.
    Rays { rays: Vec<f64> },
    /// Smooth base in `n ≥ 3`, kept symbolic.
    Named { name: String, components: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: String,
    pub coords: Vec<f64>,
    /// For polygons this may be omitted and is derived from the edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<ConeBase>,
}

/// A bounded domain whose boundary is smooth away from finitely many cone
/// points. For `n = 2` with every vertex on two edges, the vertices listed in
/// cyclic order describe a polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDomain {
    pub n: usize,
    pub vertices: Vec<Vertex>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    #[serde(default = "yes")]
    pub no_cracks: bool,
}

fn yes() -> bool {
    true
}

fn wrap_angle(a: f64) -> f64 {
    a.rem_euclid(TAU)
}

impl LayerDomain {
    /// Polygon from vertices in cyclic order (either orientation).
    pub fn polygon(points: &[(f64, f64)]) -> Result<Self, DomainError> {
        let vertices = points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Vertex { id: format!("p{i}"), coords: vec![x, y], base: None })
            .collect::<Vec<_>>();
        let np = vertices.len();
        let edges = (0..np).map(|i| (vertices[i].id.clone(), vertices[(i + 1) % np].id.clone())).collect();
        let mut d = LayerDomain { n: 2, vertices, edges, no_cracks: true };
        d.validate()?;
        Ok(d)
    }

    pub fn unit_square() -> Self {
        Self::polygon(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).expect("square")
    }

    /// Regular polygon inscribed in the unit circle.
    pub fn regular_polygon(sides: usize) -> Result<Self, DomainError> {
        let pts: Vec<(f64, f64)> =
            (0..sides).map(|k| ((TAU * k as f64 / sides as f64).cos(), (TAU * k as f64 / sides as f64).sin())).collect();
        Self::polygon(&pts)
    }

    /// L-shaped hexagon.
    pub fn l_shape() -> Self {
        Self::polygon(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]).expect("L")
    }

    /// A cone in `n` dimensions over one smooth base.
    pub fn single_cone(n: usize, base: &str, components: usize) -> Result<Self, DomainError> {
        let mut d = LayerDomain {
            n,
            vertices: vec![Vertex {
                id: "p0".into(),
                coords: vec![0.0; n],
                base: Some(ConeBase::Named { name: base.into(), components }),
            }],
            edges: vec![],
            no_cracks: true,
        };
        d.validate()?;
        Ok(d)
    }

    fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    /// Neighbours of each vertex along the edges, in edge order.
    fn adjacency(&self) -> Result<Vec<Vec<usize>>, DomainError> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (a, b) in &self.edges {
            let i = self.vertex_index(a).ok_or_else(|| DomainError::UnknownVertex(a.clone()))?;
            let j = self.vertex_index(b).ok_or_else(|| DomainError::UnknownVertex(b.clone()))?;
            adj[i].push(j);
            adj[j].push(i);
        }
        Ok(adj)
    }

    /// Signed area when the vertices describe a polygon in order.
    pub fn signed_area(&self) -> Option<f64> {
        if self.n != 2 || self.vertices.len() < 3 {
            return None;
        }
        let np = self.vertices.len();
        let mut s = 0.0;
        for i in 0..np {
            let (p, q) = (&self.vertices[i].coords, &self.vertices[(i + 1) % np].coords);
            s += p[0] * q[1] - q[0] * p[1];
        }
        Some(0.5 * s)
    }

    /// Whether the edges form the cycle `v₀ v₁ … v_{N−1}`.
    pub fn is_cyclic_polygon(&self) -> bool {
        let np = self.vertices.len();
        if self.n != 2 || np < 2 || self.edges.len() != np {
            return false;
        }
        let mut want: Vec<(usize, usize)> = (0..np).map(|i| ordered(i, (i + 1) % np)).collect();
        let mut have: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter_map(|(a, b)| Some(ordered(self.vertex_index(a)?, self.vertex_index(b)?)))
            .collect();
        want.sort_unstable();
        have.sort_unstable();
        want == have
    }

    /// Fills in ray bases of polygon vertices from the geometry.
    fn resolve_bases(&mut self) -> Result<(), DomainError> {
        if self.n != 2 {
            return Ok(());
        }
        let orientation = self.signed_area().map(f64::signum).unwrap_or(1.0);
        let adj = self.adjacency()?;
        let np = self.vertices.len();
        for i in 0..np {
            if self.vertices[i].base.is_some() {
                continue;
            }
            if !self.is_cyclic_polygon() {
                return Err(DomainError::Base(self.vertices[i].id.clone(), "base required off polygons".into()));
            }
            debug_assert_eq!(adj[i].len(), 2);
            let (prev, next) = ((i + np - 1) % np, (i + 1) % np);
            let dir = |j: usize| {
                let (p, q) = (&self.vertices[i].coords, &self.vertices[j].coords);
                (q[1] - p[1]).atan2(q[0] - p[0])
            };
            // counterclockwise traversal keeps the interior on the left
            let rays = if orientation >= 0.0 { vec![dir(next), dir(prev)] } else { vec![dir(prev), dir(next)] };
            self.vertices[i].base = Some(ConeBase::Rays { rays });
        }
        Ok(())
    }

    /// Checks the invariants; derives missing polygon bases first.
    pub fn validate(&mut self) -> Result<(), DomainError> {
        if self.n < 2 {
            return Err(DomainError::Dimension(self.n));
        }
        let mut ids = std::collections::BTreeSet::new();
        for v in &self.vertices {
            if !ids.insert(v.id.as_str()) {
                return Err(DomainError::DuplicateId(v.id.clone()));
            }
            if v.coords.len() != self.n || v.coords.iter().any(|c| !c.is_finite()) {
                return Err(DomainError::Coordinates(v.id.clone()));
            }
        }
        // distinct vertices admit disjoint neighbourhoods of radius half the minimum distance
        for (i, v) in self.vertices.iter().enumerate() {
            for w in &self.vertices[i + 1..] {
                let d2: f64 = v.coords.iter().zip(&w.coords).map(|(a, b)| (a - b).powi(2)).sum();
                if d2.sqrt() <= GEOMETRY_EPS {
                    return Err(DomainError::Coincident(v.id.clone(), w.id.clone()));
                }
            }
        }
        if !self.no_cracks {
            return Err(DomainError::Crack(self.vertices.first().map(|v| v.id.clone()).unwrap_or_default()));
        }
        self.resolve_bases()?;
        for v in &self.vertices {
            match (&v.base, self.n) {
                (Some(ConeBase::Rays { rays }), 2) => {
                    if rays.is_empty() || rays.iter().any(|r| !r.is_finite()) {
                        return Err(DomainError::Base(v.id.clone(), "needs at least one finite ray".into()));
                    }
                    if rays.len() == 2 {
                        let a = wrap_angle(rays[1] - rays[0]);
                        if a <= GEOMETRY_EPS || a >= TAU - GEOMETRY_EPS {
                            return Err(DomainError::Crack(v.id.clone()));
                        }
                    }
                }
                (Some(ConeBase::Named { components, .. }), n) if n >= 3 => {
                    if *components == 0 {
                        return Err(DomainError::Base(v.id.clone(), "base must have a component".into()));
                    }
                }
                (Some(_), _) => {
                    return Err(DomainError::Base(v.id.clone(), "ray bases are planar; named bases need n ≥ 3".into()))
                }
                (None, _) => return Err(DomainError::Base(v.id.clone(), "missing base".into())),
            }
        }
        Ok(())
    }

    /// Number of components `k_i` of `∂ω_i`.
    pub fn components(&self, i: usize) -> usize {
        match &self.vertices[i].base {
            Some(ConeBase::Rays { rays }) => rays.len(),
            Some(ConeBase::Named { components, .. }) => *components,
            None => 0,
        }
    }

    /// Interior angle at a two-ray planar vertex.
    pub fn interior_angle(&self, i: usize) -> Option<f64> {
        match &self.vertices[i].base {
            Some(ConeBase::Rays { rays }) if rays.len() == 2 => Some(wrap_angle(rays[1] - rays[0])),
            _ => None,
        }
    }

    fn component_labels(&self, i: usize) -> Vec<String> {
        let v = &self.vertices[i];
        match &v.base {
            Some(ConeBase::Rays { rays }) => (0..rays.len()).map(|j| format!("{}.r{j}", v.id)).collect(),
            Some(ConeBase::Named { name, components }) => (0..*components).map(|j| format!("{}.{name}{j}", v.id)).collect(),
            None => vec![],
        }
    }
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// One blown-up vertex `[0,1) × ∂ω_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub vertex: String,
    /// Components of `∂ω_i`.
    pub components: Vec<String>,
    pub interior_angle: Option<f64>,
    /// Collar of the cylinder glued into `Ω₀`.
    pub collar: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesingularizedBoundary {
    pub dimension: usize,
    pub cylinders: Vec<Cylinder>,
    /// `{0} × ω̄_i`, one per vertex.
    pub hyperfaces_at_infinity: Vec<String>,
    /// `∂M = ⊔ {0} × ∂ω_i`.
    pub boundary_points: Vec<String>,
}

pub fn desingularize(d: &LayerDomain) -> Result<DesingularizedBoundary, DomainError> {
    let mut d = d.clone();
    d.validate()?;
    let cylinders: Vec<Cylinder> = (0..d.vertices.len())
        .map(|i| Cylinder {
            vertex: d.vertices[i].id.clone(),
            components: d.component_labels(i),
            interior_angle: d.interior_angle(i),
            collar: (0.5, 1.0),
        })
        .collect();
    let hyperfaces_at_infinity = cylinders.iter().map(|c| format!("{{0}}×ω̄[{}]", c.vertex)).collect();
    let boundary_points = cylinders.iter().flat_map(|c| c.components.iter().map(|e| format!("0@{e}"))).collect();
    Ok(DesingularizedBoundary { dimension: d.n, cylinders, hyperfaces_at_infinity, boundary_points })
}

/// Which compactification of `(0,∞)` the vertex model acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeModel {
    /// `H = [0,∞) ⋊ (0,∞)`: one fixed point `0`.
    HalfLine,
    /// `H̄ = [0,∞] ⋊ (0,∞)`: fixed points `0` and `∞`.
    ClosedHalfLine,
}

impl ConeModel {
    pub fn fixed_points(self) -> &'static [&'static str] {
        match self {
            ConeModel::HalfLine => &["0"],
            ConeModel::ClosedHalfLine => &["0", "∞"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexPiece {
    pub vertex: String,
    /// `J_i = (H × (∂ω_i)²)|_{[0,1)×∂ω_i}`.
    pub piece: String,
    pub k: usize,
    pub components: Vec<String>,
    pub interior_angle: Option<f64>,
    /// Isotropy at the boundary units.
    pub isotropy: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerGroupoidDescriptor {
    pub dimension: usize,
    pub model: ConeModel,
    pub vertices: Vec<VertexPiece>,
    pub interior_piece: String,
    /// `⊔ (∂ω_i × ∂ω_i) × ℝ⁺`.
    pub boundary_structure: String,
    pub boundary_orbits: usize,
    pub boundary_units: usize,
    pub strong_gluing: bool,
}

pub fn assemble_layer_groupoid(b: &DesingularizedBoundary) -> LayerGroupoidDescriptor {
    assemble_with(b, ConeModel::HalfLine)
}

fn assemble_with(b: &DesingularizedBoundary, model: ConeModel) -> LayerGroupoidDescriptor {
    let h = match model {
        ConeModel::HalfLine => "[0,∞)⋊(0,∞)",
        ConeModel::ClosedHalfLine => "[0,∞]⋊(0,∞)",
    };
    let vertices: Vec<VertexPiece> = b
        .cylinders
        .iter()
        .map(|c| VertexPiece {
            vertex: c.vertex.clone(),
            piece: format!("({h} × (∂ω[{0}])²)|[0,1)×∂ω[{0}]", c.vertex),
            k: c.components.len(),
            components: c.components.clone(),
            interior_angle: c.interior_angle,
            isotropy: "ℝ⁺".into(),
        })
        .collect();
    let boundary_structure =
        vertices.iter().map(|v| format!("(∂ω[{0}]×∂ω[{0}])×ℝ⁺", v.vertex)).collect::<Vec<_>>().join(" ⊔ ");
    let per_point = model.fixed_points().len();
    LayerGroupoidDescriptor {
        dimension: b.dimension,
        model,
        boundary_orbits: vertices.len() * per_point,
        boundary_units: vertices.iter().map(|v| v.k).sum::<usize>() * per_point,
        vertices,
        interior_piece: "Ω₀×Ω₀".into(),
        boundary_structure,
        // every orbit is Ω₀ or one ∂ω_i, each inside a single chart
        strong_gluing: true,
    }
}

/// The straight cone `ℝ⁺ × ∂ω` compactified at both ends, with `F = {0, ∞}`.
pub fn straight_cone(components: usize) -> LayerGroupoidDescriptor {
    let b = DesingularizedBoundary {
        dimension: 2,
        cylinders: vec![Cylinder {
            vertex: "cone".into(),
            components: (0..components).map(|j| format!("cone.r{j}")).collect(),
            interior_angle: None,
            collar: (0.5, 1.0),
        }],
        hyperfaces_at_infinity: vec!["{0}×ω̄[cone]".into(), "{∞}×ω̄[cone]".into()],
        boundary_points: vec![],
    };
    assemble_with(&b, ConeModel::ClosedHalfLine)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub dimension: usize,
    pub boundary_orbits: usize,
    pub sum_k: usize,
    pub k: BTreeMap<String, usize>,
    /// Plain-text form, e.g. `M_2(C0(R+)) ⊕ M_2(C0(R+))`.
    pub algebra: String,
    /// Grouped form, e.g. `⊕₂M₂(C₀(ℝ⁺))`.
    pub algebra_compact: String,
    /// The b-groupoid is an open wide subgroupoid, equal iff all `k_i = 1`.
    pub b_equal: bool,
    pub amenable: bool,
    pub fredholm_groupoid: bool,
    pub notes: Vec<String>,
}

fn subscript(n: usize) -> String {
    const D: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    n.to_string().chars().map(|c| D[c.to_digit(10).unwrap() as usize]).collect()
}

pub fn boundary_algebra_report(l: &LayerGroupoidDescriptor) -> StructureReport {
    let planar = l.dimension == 2;
    let plain = |k: usize| match (planar, k) {
        (false, _) => "C0(R+) ⊗ K".to_string(),
        (true, 1) => "C0(R+)".to_string(),
        (true, k) => format!("M_{k}(C0(R+))"),
    };
    let fancy = |k: usize| match (planar, k) {
        (false, _) => "C₀(ℝ⁺)⊗𝒦".to_string(),
        (true, 1) => "C₀(ℝ⁺)".to_string(),
        (true, k) => format!("M{}(C₀(ℝ⁺))", subscript(k)),
    };
    let per_point = l.model.fixed_points().len();
    let ks: Vec<usize> = l.vertices.iter().flat_map(|v| std::iter::repeat_n(v.k, per_point)).collect();
    let algebra = ks.iter().map(|&k| plain(k)).collect::<Vec<_>>().join(" ⊕ ");
    // group equal summands, in order of first appearance
    let mut groups: Vec<(String, usize)> = Vec::new();
    for &k in &ks {
        let s = fancy(k);
        match groups.iter_mut().find(|(t, _)| *t == s) {
            Some((_, c)) => *c += 1,
            None => groups.push((s, 1)),
        }
    }
    let algebra_compact = groups
        .iter()
        .map(|(s, c)| if *c == 1 { s.clone() } else { format!("⊕{}{s}", subscript(*c)) })
        .collect::<Vec<_>>()
        .join(" ⊕ ");
    let mut notes = vec!["boundary isotropy ℝ⁺ is abelian, so the groupoid is amenable".to_string()];
    if !planar {
        notes.push("cone bases in n ≥ 3 are symbolic".into());
    }
    StructureReport {
        dimension: l.dimension,
        boundary_orbits: l.boundary_orbits,
        sum_k: l.boundary_units,
        k: l.vertices.iter().map(|v| (v.vertex.clone(), v.k)).collect(),
        algebra,
        algebra_compact,
        b_equal: l.vertices.iter().all(|v| v.k == 1),
        amenable: true,
        fredholm_groupoid: l.strong_gluing,
        notes,
    }
}

/// Weights and metric relating K-spaces to Sobolev spaces of `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightDescriptor {
    pub n: usize,
    pub order: f64,
    /// Boundary weight `(n−1)/2`.
    pub boundary_weight: f64,
    /// Volume weight `n/2`.
    pub volume_weight: f64,
    pub metric: String,
    /// Real part of the Mellin line used by the symbol computations, relative
    /// to the boundary weight: the space `K⁰_{(n−1)/2}` is `L²(dr/r)` near a
    /// vertex, on which Mellin convolutions are diagonalized on `Re = 0`.
    pub mellin_offset: f64,
}

pub fn weight_line(n: usize, s: f64) -> Result<WeightDescriptor, DomainError> {
    if n < 2 {
        return Err(DomainError::Dimension(n));
    }
    Ok(WeightDescriptor {
        n,
        order: s,
        boundary_weight: (n as f64 - 1.0) / 2.0,
        volume_weight: n as f64 / 2.0,
        metric: "r_Ω⁻² g_e".into(),
        mellin_offset: 0.0,
    })
}

#[derive(Debug, Error)]
pub enum ToyError {
    #[error("cyclic order must be at least 1")]
    Order,
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error(transparent)]
    Glue(#[from] GlueError),
    #[error(transparent)]
    Fredholm(#[from] FredholmError),
}

/// Finite surrogate of the layer-potential groupoid: `ℝ⁺` becomes `ℤ/m`,
/// each cylinder keeps one collar point per component of `∂ω_i`, and the
/// smooth part is `interior_sample` further points.
#[derive(Debug, Clone)]
pub struct ToyModel {
    pub atlas: GluingAtlas,
    pub glued: GluedGroupoid,
    pub groupoid: Arc<FiniteGroupoid>,
    pub structure: FredholmStructure,
}

fn toy_labels(l: &LayerGroupoidDescriptor, interior_sample: usize) -> (Vec<String>, Vec<String>) {
    let mut interior: Vec<String> = (0..interior_sample).map(|j| format!("b{j}")).collect();
    let mut boundary = Vec::new();
    for v in &l.vertices {
        for e in &v.components {
            interior.push(format!("(c@{};{e})", v.vertex));
            boundary.push(format!("(0@{};{e})", v.vertex));
        }
    }
    (interior, boundary)
}

fn vertex_piece(v: &VertexPiece, m: usize) -> Result<FiniteGroupoid, BuildError> {
    let h = disjoint_union(&[
        pair(&[format!("c@{}", v.vertex)])?,
        group_bundle(&[format!("0@{}", v.vertex)], &FiniteGroup::cyclic(m))?,
    ])?;
    Ok(product(&h, &pair(&v.components)?))
}

pub fn finite_toy_model(l: &LayerGroupoidDescriptor, m: usize, interior_sample: usize) -> Result<ToyModel, ToyError> {
    if m == 0 {
        return Err(ToyError::Order);
    }
    let (interior, boundary) = toy_labels(l, interior_sample);
    let mut pieces = vec![pair(&interior)?];
    for v in &l.vertices {
        pieces.push(vertex_piece(v, m)?);
    }
    let ambient: Vec<String> = interior.iter().chain(&boundary).cloned().collect();
    let atlas = GluingAtlas::from_pair_overlaps(ambient, pieces)?;
    let glued = glue(&atlas)?;
    let groupoid = Arc::new(glued.groupoid.clone());
    let u = UnitSubset::new(&groupoid, (0..interior.len()).collect::<Vec<UnitId>>()).expect("interior units");
    let structure = make_structure(&groupoid, &u)?;
    Ok(ToyModel { atlas, glued, groupoid, structure })
}

/// The same finite model written directly as
/// `pair(interior) ⊔ ⊔_i f_i^⇈(ℤ/m)` without gluing; used as a cross-check.
pub fn toy_direct_model(l: &LayerGroupoidDescriptor, m: usize, interior_sample: usize) -> Result<FiniteGroupoid, ToyError> {
    if m == 0 {
        return Err(ToyError::Order);
    }
    let (interior, boundary) = toy_labels(l, interior_sample);
    let mut parts = vec![pair(&interior)?];
    let mut offset = 0;
    for v in &l.vertices {
        let units = &boundary[offset..offset + v.k];
        offset += v.k;
        let base = group_bundle(&[format!("base@{}", v.vertex)], &FiniteGroup::cyclic(m))?;
        parts.push(fibered_pullback(units, &vec![0; v.k], &base)?);
    }
    Ok(disjoint_union(&parts)?)
}

/// Angle helpers for callers holding a planar vertex.
pub fn reflex(alpha: f64) -> bool {
    alpha > PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fredholm::{recognize_boundary_bundle, strictly_spectral_check};
    use crate::groupoid::{find_isomorphism, validate};

    #[test]
    fn square_layer_structure() {
        let b = desingularize(&LayerDomain::unit_square()).unwrap();
        assert_eq!(b.cylinders.len(), 4);
        assert!(b.cylinders.iter().all(|c| c.components.len() == 2));
        assert_eq!(b.boundary_points.len(), 8);
        for c in &b.cylinders {
            assert!((c.interior_angle.unwrap() - PI / 2.0).abs() < 1e-12);
        }
        let r = boundary_algebra_report(&assemble_layer_groupoid(&b));
        assert_eq!(r.boundary_orbits, 4);
        assert_eq!(r.sum_k, 8);
        assert_eq!(r.algebra_compact, "⊕₄M₂(C₀(ℝ⁺))");
        assert_eq!(r.algebra, ["M_2(C0(R+))"; 4].join(" ⊕ "));
        assert!(!r.b_equal);
    }

    #[test]
    fn clockwise_polygon_has_same_angles() {
        let d = LayerDomain::polygon(&[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]).unwrap();
        for i in 0..4 {
            assert!((d.interior_angle(i).unwrap() - PI / 2.0).abs() < 1e-12);
        }
        let l = LayerDomain::l_shape();
        let reflex_count = (0..6).filter(|&i| reflex(l.interior_angle(i).unwrap())).count();
        assert_eq!(reflex_count, 1);
        assert_eq!(desingularize(&l).unwrap().boundary_points.len(), 12);
    }

    #[test]
    fn cone_in_three_dimensions() {
        let d = LayerDomain::single_cone(3, "disc", 1).unwrap();
        let r = boundary_algebra_report(&assemble_layer_groupoid(&desingularize(&d).unwrap()));
        assert!(r.b_equal);
        assert_eq!(r.algebra_compact, "C₀(ℝ⁺)⊗𝒦");
    }

    #[test]
    fn three_ray_vertex() {
        let d = LayerDomain {
            n: 2,
            vertices: vec![Vertex {
                id: "y".into(),
                coords: vec![0.0, 0.0],
                base: Some(ConeBase::Rays { rays: vec![0.0, 2.0, 4.0] }),
            }],
            edges: vec![],
            no_cracks: true,
        };
        let r = boundary_algebra_report(&assemble_layer_groupoid(&desingularize(&d).unwrap()));
        assert_eq!(r.algebra, "M_3(C0(R+))");
    }

    #[test]
    fn rejects_bad_domains() {
        let mut cracked = LayerDomain::unit_square();
        cracked.no_cracks = false;
        assert!(matches!(desingularize(&cracked), Err(DomainError::Crack(_))));
        let mut slit = LayerDomain::unit_square();
        slit.vertices[0].base = Some(ConeBase::Rays { rays: vec![0.0, TAU] });
        assert!(matches!(desingularize(&slit), Err(DomainError::Crack(_))));
        assert!(matches!(LayerDomain::polygon(&[(0.0, 0.0), (0.0, 0.0), (1.0, 1.0)]), Err(DomainError::Coincident(..))));
        assert!(matches!(weight_line(1, 0.0), Err(DomainError::Dimension(1))));
    }

    #[test]
    fn weights() {
        assert_eq!(weight_line(2, 0.0).unwrap().boundary_weight, 0.5);
        assert_eq!(weight_line(3, 0.0).unwrap().boundary_weight, 1.0);
        assert_eq!(weight_line(2, 0.0).unwrap().volume_weight, 1.0);
    }

    #[test]
    fn straight_cone_has_two_limit_points() {
        let c = straight_cone(1);
        assert_eq!(c.model.fixed_points(), &["0", "∞"]);
        assert_eq!(c.boundary_orbits, 2);
    }

    #[test]
    fn toy_model_square() {
        let l = assemble_layer_groupoid(&desingularize(&LayerDomain::unit_square()).unwrap());
        let toy = finite_toy_model(&l, 2, 3).unwrap();
        assert!(validate(&toy.groupoid).is_empty());
        assert_eq!(toy.structure.boundary.arrow_count(), 32);
        assert_eq!(toy.groupoid.arrow_count(), 121 + 32);
        assert_eq!(toy.structure.f_reps.len(), 4);
        let rec = recognize_boundary_bundle(&toy.structure);
        assert!(rec.recognized);
        assert!(rec.parts.iter().all(|p| p.units.len() == 2 && p.fiber_order == 2));
        assert!(strictly_spectral_check(&toy.structure, 100, 11).passed());
        let direct = toy_direct_model(&l, 2, 3).unwrap();
        assert!(find_isomorphism(&toy.groupoid, &direct).unwrap().is_some());
    }

    #[test]
    fn toy_model_trivial_fiber() {
        let l = assemble_layer_groupoid(&desingularize(&LayerDomain::unit_square()).unwrap());
        let toy = finite_toy_model(&l, 1, 2).unwrap();
        assert_eq!(toy.structure.boundary.arrow_count(), 16);
        assert!(toy.structure.boundary_blocks.shapes().iter().all(|s| s.isotropy_order == 1));
    }
}
