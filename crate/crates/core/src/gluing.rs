//! Gluing groupoids along overlap isomorphisms.
//!
//! Pieces `G_i ⇉ U_i` over subsets of an ambient unit set `X` are glued
//! into `⊔ G_i / ∼`, where `∼` is generated by `g ∼ φ_ji(g)`. Products of
//! classes are only defined when both factors live in a common piece (the
//! weak gluing condition); the strong condition is the orbit-wise criterion
//! that implies it.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groupoid::{
    is_pair_groupoid, verify_map, orbits_and_isotropy, reduction, validate, ArrowId, FiniteGroupoid,
    RawGroupoid, UnitId, UnitSubset, ValidationReport,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AtlasError {
    #[error("piece {piece} is not a valid groupoid: {report}")]
    InvalidPiece { piece: usize, report: ValidationReport },
    #[error("piece {piece}: embedding is not injective into the ambient units")]
    BadEmbedding { piece: usize },
    #[error("ambient unit {0:?} is covered by no piece")]
    NotCovered(String),
    #[error("no overlap isomorphism from piece {from} to piece {to}")]
    MissingPhi { from: usize, to: usize },
    #[error("φ from piece {from} to piece {to}: {reason}")]
    BadPhi { from: usize, to: usize, reason: String },
    #[error("cocycle law fails: arrows {first:?} and {second:?} of piece {piece} are identified")]
    Cocycle { piece: usize, first: String, second: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GlueError {
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error("weak gluing condition fails on composable pair ({0}, {1})")]
    WeakFails(String, String),
    #[error("product of ({first}, {second}) differs between pieces {piece_a} and {piece_b}")]
    Inconsistent { first: String, second: String, piece_a: usize, piece_b: usize },
    #[error("overlap reduction is not a pair groupoid")]
    OverlapNotPair,
    #[error("first piece of attach_ends must be a pair groupoid")]
    NotPair,
    #[error("glued groupoid fails validation: {0}")]
    Invalid(ValidationReport),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub groupoid: FiniteGroupoid,
    /// Local unit index → ambient unit index.
    pub embedding: Vec<UnitId>,
}

/// Overlap isomorphism `φ_ji : G_i|_{U_i∩U_j} → G_j|_{U_i∩U_j}` as arrow pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Phi {
    pub from: usize,
    pub to: usize,
    pub map: Vec<(ArrowId, ArrowId)>,
}

/// A validated atlas. Construction checks every invariant, so all checkers
/// below can assume them.
#[derive(Debug, Clone, PartialEq)]
pub struct GluingAtlas {
    ambient: Vec<String>,
    pieces: Vec<Piece>,
    /// Directed maps with both directions present.
    phis: BTreeMap<(usize, usize), HashMap<ArrowId, ArrowId>>,
    classes: Classes,
}

/// Equivalence classes of `⊔ G_i`, canonicalized by least `(piece, arrow)`.
#[derive(Debug, Clone, PartialEq)]
struct Classes {
    /// Global offsets of each piece's arrows.
    offset: Vec<usize>,
    /// Global arrow index → class index.
    class_of: Vec<usize>,
    /// Class index → representatives `(piece, arrow)`, sorted.
    members: Vec<Vec<(usize, ArrowId)>>,
}

impl Classes {
    fn canonical(&self, c: usize) -> (usize, ArrowId) {
        self.members[c][0]
    }
    fn of(&self, piece: usize, arrow: ArrowId) -> usize {
        self.class_of[self.offset[piece] + arrow]
    }
    fn rep_in(&self, c: usize, piece: usize) -> Option<ArrowId> {
        self.members[c].iter().find(|m| m.0 == piece).map(|m| m.1)
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // keep the smaller index as root so roots are least representatives
        if ra < rb {
            self.0[rb] = ra;
        } else if rb < ra {
            self.0[ra] = rb;
        }
    }
}

impl GluingAtlas {
    /// Validates pieces, embeddings and overlap maps. A map supplied in only
    /// one direction is inverted; both directions must be mutually inverse.
    pub fn new(ambient: Vec<String>, pieces: Vec<Piece>, phis: Vec<Phi>) -> Result<Self, AtlasError> {
        let nx = ambient.len();
        let mut covered = vec![false; nx];
        for (i, p) in pieces.iter().enumerate() {
            let report = validate(&p.groupoid);
            if !report.is_empty() {
                return Err(AtlasError::InvalidPiece { piece: i, report });
            }
            if p.embedding.len() != p.groupoid.unit_count() {
                return Err(AtlasError::BadEmbedding { piece: i });
            }
            let mut seen = BTreeSet::new();
            for &x in &p.embedding {
                if x >= nx || !seen.insert(x) {
                    return Err(AtlasError::BadEmbedding { piece: i });
                }
                covered[x] = true;
            }
        }
        if let Some(x) = covered.iter().position(|c| !c) {
            return Err(AtlasError::NotCovered(ambient[x].clone()));
        }

        let mut directed: BTreeMap<(usize, usize), HashMap<ArrowId, ArrowId>> = BTreeMap::new();
        for phi in &phis {
            if phi.from >= pieces.len() || phi.to >= pieces.len() || phi.from == phi.to {
                return Err(AtlasError::BadPhi { from: phi.from, to: phi.to, reason: "bad piece index".into() });
            }
            let mut m = HashMap::new();
            for &(a, b) in &phi.map {
                if m.insert(a, b).is_some() {
                    return Err(AtlasError::BadPhi {
                        from: phi.from,
                        to: phi.to,
                        reason: format!("arrow {a} mapped twice"),
                    });
                }
            }
            if directed.insert((phi.from, phi.to), m).is_some() {
                return Err(AtlasError::BadPhi { from: phi.from, to: phi.to, reason: "given twice".into() });
            }
        }
        // fill in missing inverse directions
        let keys: Vec<_> = directed.keys().copied().collect();
        for (i, j) in keys {
            if !directed.contains_key(&(j, i)) {
                let inv = directed[&(i, j)].iter().map(|(&a, &b)| (b, a)).collect();
                directed.insert((j, i), inv);
            }
        }

        let mut atlas = GluingAtlas {
            ambient,
            pieces,
            phis: directed,
            classes: Classes { offset: Vec::new(), class_of: Vec::new(), members: Vec::new() },
        };
        atlas.check_phis()?;
        atlas.classes = atlas.compute_classes()?;
        Ok(atlas)
    }

    /// Builds an atlas whose pieces carry ambient unit labels; overlap maps
    /// identify arrows by label.
    pub fn from_labeled_pieces(ambient: Vec<String>, pieces: Vec<FiniteGroupoid>) -> Result<Self, AtlasError> {
        let index: HashMap<&str, UnitId> = ambient.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let mut built = Vec::with_capacity(pieces.len());
        for (i, g) in pieces.into_iter().enumerate() {
            let embedding = g
                .unit_labels()
                .iter()
                .map(|l| index.get(l.as_str()).copied().ok_or(AtlasError::BadEmbedding { piece: i }))
                .collect::<Result<Vec<_>, _>>()?;
            built.push(Piece { groupoid: g, embedding });
        }
        let mut phis = Vec::new();
        for i in 0..built.len() {
            for j in i + 1..built.len() {
                let map = overlap_arrows(&built[i], &built[j])
                    .into_iter()
                    .map(|a| {
                        let label = built[i].groupoid.arrow_label(a);
                        built[j]
                            .groupoid
                            .arrow_index(label)
                            .map(|b| (a, b))
                            .ok_or_else(|| AtlasError::BadPhi {
                                from: i,
                                to: j,
                                reason: format!("arrow {label:?} missing in target"),
                            })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if !map.is_empty() {
                    phis.push(Phi { from: i, to: j, map });
                }
            }
        }
        Self::new(ambient, built, phis)
    }

    /// Pieces over ambient labels whose pairwise overlaps are pair
    /// groupoids; overlap maps match arrows by their endpoints.
    pub fn from_pair_overlaps(ambient: Vec<String>, pieces: Vec<FiniteGroupoid>) -> Result<Self, AtlasError> {
        let index: HashMap<&str, UnitId> = ambient.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let mut built = Vec::with_capacity(pieces.len());
        for (i, g) in pieces.into_iter().enumerate() {
            let embedding = g
                .unit_labels()
                .iter()
                .map(|l| index.get(l.as_str()).copied().ok_or(AtlasError::BadEmbedding { piece: i }))
                .collect::<Result<Vec<_>, _>>()?;
            built.push(Piece { groupoid: g, embedding });
        }
        let ends = |p: &Piece, a: ArrowId| (p.embedding[p.groupoid.rng(a)], p.embedding[p.groupoid.dom(a)]);
        let mut phis = Vec::new();
        for i in 0..built.len() {
            for j in i + 1..built.len() {
                let mut by_ends: HashMap<(UnitId, UnitId), ArrowId> = HashMap::new();
                for b in overlap_arrows(&built[j], &built[i]) {
                    if by_ends.insert(ends(&built[j], b), b).is_some() {
                        return Err(AtlasError::BadPhi { from: i, to: j, reason: "overlap is not a pair groupoid".into() });
                    }
                }
                let over = overlap_arrows(&built[i], &built[j]);
                if over.len() != by_ends.len() {
                    return Err(AtlasError::BadPhi { from: i, to: j, reason: "overlap is not a pair groupoid".into() });
                }
                let map = over
                    .into_iter()
                    .map(|a| {
                        by_ends.get(&ends(&built[i], a)).map(|&b| (a, b)).ok_or_else(|| AtlasError::BadPhi {
                            from: i,
                            to: j,
                            reason: "overlap is not a pair groupoid".into(),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if !map.is_empty() {
                    phis.push(Phi { from: i, to: j, map });
                }
            }
        }
        Self::new(ambient, built, phis)
    }

    /// The atlas of reductions `G|_{U_i}`; overlap maps are identities in `G`.
    pub fn from_reductions(g: &FiniteGroupoid, cover: &[UnitSubset]) -> Result<Self, AtlasError> {
        let reds = cover.iter().map(|u| reduction(g, u).expect("subset of g")).collect::<Vec<_>>();
        let pieces = reds
            .iter()
            .map(|r| Piece { groupoid: r.groupoid.clone(), embedding: r.unit_map.clone() })
            .collect();
        let mut phis = Vec::new();
        for i in 0..reds.len() {
            let back: HashMap<ArrowId, ArrowId> =
                reds[i].arrow_map.iter().enumerate().map(|(local, &global)| (global, local)).collect();
            for (j, rj) in reds.iter().enumerate().skip(i + 1) {
                let map: Vec<_> = rj
                    .arrow_map
                    .iter()
                    .enumerate()
                    .filter_map(|(local_j, global)| back.get(global).map(|&local_i| (local_i, local_j)))
                    .collect();
                if !map.is_empty() {
                    phis.push(Phi { from: i, to: j, map });
                }
            }
        }
        Self::new(g.unit_labels().to_vec(), pieces, phis)
    }

    pub fn ambient(&self) -> &[String] {
        &self.ambient
    }
    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }
    pub fn piece_units(&self, i: usize) -> BTreeSet<UnitId> {
        self.pieces[i].embedding.iter().copied().collect()
    }

    fn check_phis(&self) -> Result<(), AtlasError> {
        let n = self.pieces.len();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let dom = overlap_arrows(&self.pieces[i], &self.pieces[j]);
                let Some(map) = self.phis.get(&(i, j)) else {
                    if dom.is_empty() {
                        continue;
                    }
                    return Err(AtlasError::MissingPhi { from: i, to: j });
                };
                let bad = |reason: String| AtlasError::BadPhi { from: i, to: j, reason };
                let (pi, pj) = (&self.pieces[i], &self.pieces[j]);
                if map.len() != dom.len() || dom.iter().any(|a| !map.contains_key(a)) {
                    return Err(bad("domain is not the overlap reduction".into()));
                }
                let codom: BTreeSet<ArrowId> = overlap_arrows(pj, pi).into_iter().collect();
                let image: BTreeSet<ArrowId> = map.values().copied().collect();
                if image != codom || image.len() != map.len() {
                    return Err(bad("not a bijection onto the overlap reduction".into()));
                }
                for (&a, &b) in map {
                    let (gi, gj) = (&pi.groupoid, &pj.groupoid);
                    if pi.embedding[gi.dom(a)] != pj.embedding[gj.dom(b)]
                        || pi.embedding[gi.rng(a)] != pj.embedding[gj.rng(b)]
                    {
                        return Err(bad(format!("arrow {:?} does not cover the identity", gi.arrow_label(a))));
                    }
                    if self.phis[&(j, i)].get(&b) != Some(&a) {
                        return Err(bad("φ_ij ≠ φ_ji⁻¹".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Union-find over `(piece, arrow)`. With bijective, mutually inverse
    /// overlap maps, the cocycle law holds iff no class has two
    /// representatives in one piece.
    fn compute_classes(&self) -> Result<Classes, AtlasError> {
        let mut offset = Vec::with_capacity(self.pieces.len());
        let mut total = 0;
        for p in &self.pieces {
            offset.push(total);
            total += p.groupoid.arrow_count();
        }
        let mut uf = UnionFind((0..total).collect());
        for (&(i, j), map) in &self.phis {
            for (&a, &b) in map {
                uf.union(offset[i] + a, offset[j] + b);
            }
        }
        let mut class_of = vec![0; total];
        let mut root_class: HashMap<usize, usize> = HashMap::new();
        let mut members: Vec<Vec<(usize, ArrowId)>> = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            for a in 0..p.groupoid.arrow_count() {
                let root = uf.find(offset[i] + a);
                let c = *root_class.entry(root).or_insert_with(|| {
                    members.push(Vec::new());
                    members.len() - 1
                });
                class_of[offset[i] + a] = c;
                members[c].push((i, a));
            }
        }
        for m in &members {
            for w in m.windows(2) {
                if w[0].0 == w[1].0 {
                    let g = &self.pieces[w[0].0].groupoid;
                    return Err(AtlasError::Cocycle {
                        piece: w[0].0,
                        first: g.arrow_label(w[0].1).to_string(),
                        second: g.arrow_label(w[1].1).to_string(),
                    });
                }
            }
        }
        Ok(Classes { offset, class_of, members })
    }

    fn class_label(&self, c: usize) -> String {
        let (p, a) = self.classes.canonical(c);
        self.pieces[p].groupoid.arrow_label(a).to_string()
    }

    fn class_dom(&self, c: usize) -> UnitId {
        let (p, a) = self.classes.canonical(c);
        self.pieces[p].embedding[self.pieces[p].groupoid.dom(a)]
    }

    fn class_rng(&self, c: usize) -> UnitId {
        let (p, a) = self.classes.canonical(c);
        self.pieces[p].embedding[self.pieces[p].groupoid.rng(a)]
    }

    /// Class pairs `(c1, c2)` with `d(c1) = r(c2)`.
    fn composable_class_pairs(&self) -> Vec<(usize, usize)> {
        let nc = self.classes.members.len();
        let mut by_rng = vec![Vec::new(); self.ambient.len()];
        for c in 0..nc {
            by_rng[self.class_rng(c)].push(c);
        }
        let mut out = Vec::new();
        for c1 in 0..nc {
            for &c2 in &by_rng[self.class_dom(c1)] {
                out.push((c1, c2));
            }
        }
        out
    }

    fn common_pieces(&self, c1: usize, c2: usize) -> Vec<usize> {
        let (m1, m2) = (&self.classes.members[c1], &self.classes.members[c2]);
        // both sorted by piece index
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < m1.len() && j < m2.len() {
            match m1[i].0.cmp(&m2[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(m1[i].0);
                    i += 1;
                    j += 1;
                }
            }
        }
        out
    }
}

/// Arrows of `a` with both endpoints over units shared with `b`.
fn overlap_arrows(a: &Piece, b: &Piece) -> Vec<ArrowId> {
    let shared: BTreeSet<UnitId> = b.embedding.iter().copied().collect();
    let g = &a.groupoid;
    (0..g.arrow_count())
        .filter(|&x| shared.contains(&a.embedding[g.dom(x)]) && shared.contains(&a.embedding[g.rng(x)]))
        .collect()
}

/// Outcome of [`check_weak_gluing`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakReport {
    pub holds: bool,
    /// A composable pair of classes with no common piece, by canonical label.
    pub witness: Option<(String, String)>,
}

pub fn check_weak_gluing(atlas: &GluingAtlas) -> WeakReport {
    for (c1, c2) in atlas.composable_class_pairs() {
        if atlas.common_pieces(c1, c2).is_empty() {
            return WeakReport { holds: false, witness: Some((atlas.class_label(c1), atlas.class_label(c2))) };
        }
    }
    WeakReport { holds: true, witness: None }
}

/// Outcome of [`check_strong_gluing`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongReport {
    pub holds: bool,
    /// The least valid `i_x` per ambient unit, if any.
    pub choice: Vec<Option<usize>>,
    /// Other valid indices per unit (the choice is not canonical).
    pub alternatives: Vec<Vec<usize>>,
    /// First unit with no valid chart.
    pub witness: Option<String>,
    /// Result of the weak check, computed whenever the strong one holds.
    pub weak_implied: Option<bool>,
}

pub fn check_strong_gluing(atlas: &GluingAtlas) -> StrongReport {
    let nx = atlas.ambient.len();
    // ambient orbits of x in each piece containing it
    let mut piece_orbits: Vec<Vec<BTreeSet<UnitId>>> = vec![Vec::new(); nx];
    for p in &atlas.pieces {
        let part = orbits_and_isotropy(&p.groupoid);
        for orbit in &part.orbits {
            let set: BTreeSet<UnitId> = orbit.units.iter().map(|&u| p.embedding[u]).collect();
            for &u in &orbit.units {
                piece_orbits[p.embedding[u]].push(set.clone());
            }
        }
    }
    let charts: Vec<BTreeSet<UnitId>> = (0..atlas.pieces.len()).map(|i| atlas.piece_units(i)).collect();
    let mut choice = vec![None; nx];
    let mut alternatives = vec![Vec::new(); nx];
    let mut witness = None;
    for x in 0..nx {
        let valid: Vec<usize> = (0..charts.len())
            .filter(|&i| piece_orbits[x].iter().all(|o| o.is_subset(&charts[i])))
            .collect();
        if valid.is_empty() && witness.is_none() {
            witness = Some(atlas.ambient[x].clone());
        }
        choice[x] = valid.first().copied();
        alternatives[x] = valid.into_iter().skip(1).collect();
    }
    let holds = witness.is_none();
    let weak_implied = holds.then(|| check_weak_gluing(atlas).holds);
    debug_assert!(weak_implied != Some(false), "strong gluing must imply weak gluing");
    StrongReport { holds, choice, alternatives, witness, weak_implied }
}

/// The quotient groupoid together with the projections `π_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GluedGroupoid {
    pub groupoid: FiniteGroupoid,
    /// `projections[i][a]` is the class of arrow `a` of piece `i`.
    pub projections: Vec<Vec<ArrowId>>,
    /// Canonical representative `(piece, arrow)` of each quotient arrow.
    pub representatives: Vec<(usize, ArrowId)>,
}

impl GluedGroupoid {
    /// Checks each `π_i` is an isomorphism onto the reduction to `U_i`.
    pub fn projections_are_isomorphisms(&self, atlas: &GluingAtlas) -> bool {
        atlas.pieces.iter().enumerate().all(|(i, p)| {
            let sub = UnitSubset::new(&self.groupoid, p.embedding.iter().copied()).expect("ambient units");
            let red = reduction(&self.groupoid, &sub).expect("subset");
            let unit_back: HashMap<UnitId, UnitId> = red.unit_map.iter().enumerate().map(|(k, &x)| (x, k)).collect();
            let arrow_back: HashMap<ArrowId, ArrowId> =
                red.arrow_map.iter().enumerate().map(|(k, &a)| (a, k)).collect();
            let units: Option<Vec<_>> = p.embedding.iter().map(|x| unit_back.get(x).copied()).collect();
            let arrows: Option<Vec<_>> = self.projections[i].iter().map(|a| arrow_back.get(a).copied()).collect();
            match (units, arrows) {
                (Some(u), Some(a)) => verify_map(&p.groupoid, &red.groupoid, &u, &a),
                _ => false,
            }
        })
    }
}

/// Glues the atlas. Products are computed in every common piece and must
/// agree.
pub fn glue(atlas: &GluingAtlas) -> Result<GluedGroupoid, GlueError> {
    let weak = check_weak_gluing(atlas);
    if let Some((a, b)) = weak.witness {
        return Err(GlueError::WeakFails(a, b));
    }
    let cls = &atlas.classes;
    // order quotient arrows by canonical representative
    let mut order: Vec<usize> = (0..cls.members.len()).collect();
    order.sort_by_key(|&c| cls.canonical(c));
    let mut new_id = vec![0; order.len()];
    for (k, &c) in order.iter().enumerate() {
        new_id[c] = k;
    }

    let mut compose = Vec::new();
    for (c1, c2) in atlas.composable_class_pairs() {
        let mut product: Option<(usize, usize)> = None;
        for p in atlas.common_pieces(c1, c2) {
            let g = &atlas.pieces[p].groupoid;
            let (a, b) = (cls.rep_in(c1, p).unwrap(), cls.rep_in(c2, p).unwrap());
            let ab = g.compose(a, b).expect("valid piece");
            let c = cls.of(p, ab);
            match product {
                None => product = Some((c, p)),
                Some((prev, q)) if prev != c => {
                    return Err(GlueError::Inconsistent {
                        first: atlas.class_label(c1),
                        second: atlas.class_label(c2),
                        piece_a: q,
                        piece_b: p,
                    })
                }
                _ => {}
            }
        }
        let (c, _) = product.expect("weak condition holds");
        compose.push((new_id[c1], new_id[c2], new_id[c]));
    }

    let nx = atlas.ambient.len();
    let mut unit_arrow = vec![usize::MAX; nx];
    for (i, p) in atlas.pieces.iter().enumerate().rev() {
        for (u, &x) in p.embedding.iter().enumerate() {
            unit_arrow[x] = new_id[cls.of(i, p.groupoid.unit_arrow(u))];
        }
    }
    let inverse = order
        .iter()
        .map(|&c| {
            let (p, a) = cls.canonical(c);
            new_id[cls.of(p, atlas.pieces[p].groupoid.inverse(a))]
        })
        .collect();
    let raw = RawGroupoid {
        units: atlas.ambient.clone(),
        arrows: order.iter().map(|&c| atlas.class_label(c)).collect(),
        dom: order.iter().map(|&c| atlas.class_dom(c)).collect(),
        rng: order.iter().map(|&c| atlas.class_rng(c)).collect(),
        unit_arrow,
        inverse,
        compose,
    };
    let groupoid = FiniteGroupoid::from_raw(raw);
    let report = validate(&groupoid);
    if !report.is_empty() {
        return Err(GlueError::Invalid(report));
    }
    let projections = atlas
        .pieces
        .iter()
        .enumerate()
        .map(|(i, p)| (0..p.groupoid.arrow_count()).map(|a| new_id[cls.of(i, a)]).collect())
        .collect();
    let representatives = order.iter().map(|&c| cls.canonical(c)).collect();
    Ok(GluedGroupoid { groupoid, projections, representatives })
}

/// Glues a pair groupoid `U²` to a groupoid `H ⇉ V` whose reduction to
/// `U ∩ V` is a pair groupoid. Units are identified by label; the ambient
/// set lists `U` first, then `V ∖ U`.
pub fn attach_ends(pairpiece: &FiniteGroupoid, boundarypiece: &FiniteGroupoid) -> Result<GluedGroupoid, GlueError> {
    if !is_pair_groupoid(pairpiece) {
        return Err(GlueError::NotPair);
    }
    let mut ambient: Vec<String> = pairpiece.unit_labels().to_vec();
    for l in boundarypiece.unit_labels() {
        if !ambient.contains(l) {
            ambient.push(l.clone());
        }
    }
    let index: HashMap<&str, UnitId> = ambient.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let embed = |g: &FiniteGroupoid| g.unit_labels().iter().map(|l| index[l.as_str()]).collect::<Vec<_>>();
    let p0 = Piece { groupoid: pairpiece.clone(), embedding: embed(pairpiece) };
    let p1 = Piece { groupoid: boundarypiece.clone(), embedding: embed(boundarypiece) };

    let overlap = overlap_arrows(&p1, &p0);
    let shared: Vec<UnitId> = (0..boundarypiece.unit_count())
        .filter(|&u| pairpiece.unit_index(boundarypiece.unit_label(u)).is_some())
        .collect();
    let sub = UnitSubset::new(boundarypiece, shared).expect("own units");
    if !is_pair_groupoid(&reduction(boundarypiece, &sub).expect("subset").groupoid) {
        return Err(GlueError::OverlapNotPair);
    }
    // in a pair groupoid the arrow is determined by its endpoints
    let map = overlap
        .into_iter()
        .map(|b| {
            let d = pairpiece.unit_index(boundarypiece.unit_label(boundarypiece.dom(b))).unwrap();
            let r = pairpiece.unit_index(boundarypiece.unit_label(boundarypiece.rng(b))).unwrap();
            let a = (0..pairpiece.arrow_count())
                .find(|&a| pairpiece.dom(a) == d && pairpiece.rng(a) == r)
                .expect("pair groupoid");
            (a, b)
        })
        .collect::<Vec<_>>();
    let phis = if map.is_empty() { vec![] } else { vec![Phi { from: 0, to: 1, map }] };
    let atlas = GluingAtlas::new(ambient, vec![p0, p1], phis)?;
    glue(&atlas)
}
