//! Spec-file ingestion and report plumbing for the `gpdlab` binary.
//!
//! Every input file carries `spec_version: 1`. Loading checks all
//! invariants, so a value returned from here is ready to use.

mod run;
#[cfg(feature = "cli")]
pub mod cli;

pub use run::{run, Command, Format, Outcome, Report, RunConfig, TOOL};

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conical::{assemble_layer_groupoid, desingularize, finite_toy_model, LayerDomain};
use crate::gluing::{GluingAtlas, Phi, Piece};
use crate::groupoid::{validate, BuildSpec, FiniteGroupoid, RawGroupoid, UnitSubset, ValidationReport};
use crate::mellin::KernelSpec;

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    /// `field` is the JSON path to the offending value.
    #[error("{path}: schema violation at `{field}`: {message}")]
    Schema { path: PathBuf, field: String, message: String },
    #[error("{path}: unsupported spec_version {found} (expected {SPEC_VERSION})")]
    Version { path: PathBuf, found: u32 },
    #[error("{path}: {message}")]
    Invariant { path: PathBuf, message: String },
    #[error("{path}: groupoid axioms fail: {report}")]
    Axioms { path: PathBuf, report: ValidationReport },
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {message}")]
    Module { context: String, message: String },
}

impl IoError {
    fn invariant(path: &Path, message: impl ToString) -> Self {
        IoError::Invariant { path: path.to_path_buf(), message: message.to_string() }
    }
    pub(crate) fn module(context: &str, e: impl ToString) -> Self {
        IoError::Module { context: context.to_string(), message: e.to_string() }
    }
}

/// A groupoid file: exactly one of `build`, `raw`, `toy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupoidFile {
    pub spec_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub build: Option<BuildSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<RawGroupoid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toy: Option<ToySpec>,
    /// Named unit subsets by label.
    #[serde(default)]
    pub subsets: BTreeMap<String, Vec<String>>,
}

/// The finite layer-potentials model of a domain. Predefines the subsets
/// `interior` and `boundary`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToySpec {
    pub domain: LayerDomain,
    pub m: usize,
    pub interior_sample: usize,
}

/// A piece of an atlas. Unit labels must be ambient labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PieceSpec {
    Build(BuildSpec),
    Raw(RawGroupoid),
}

/// How overlap isomorphisms are obtained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapRule {
    /// Arrows with equal labels are identified.
    #[default]
    Labels,
    /// Overlaps are pair groupoids, matched by endpoints.
    Endpoints,
    /// Only the listed `phis`.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiSpec {
    pub from: usize,
    pub to: usize,
    /// `[arrow label in from, arrow label in to]`.
    pub map: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtlasFile {
    pub spec_version: u32,
    pub ambient: Vec<String>,
    pub pieces: Vec<PieceSpec>,
    #[serde(default)]
    pub overlaps: OverlapRule,
    #[serde(default)]
    pub phis: Vec<PhiSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub spec_version: u32,
    pub domain: LayerDomain,
}

/// User Mellin kernels, one per vertex id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelFile {
    pub spec_version: u32,
    pub kernels: BTreeMap<String, KernelSpec>,
}

/// A loaded groupoid with its named subsets.
#[derive(Debug, Clone)]
pub struct LoadedGroupoid {
    pub groupoid: Arc<FiniteGroupoid>,
    pub subsets: BTreeMap<String, UnitSubset>,
}

impl LoadedGroupoid {
    /// A subset name, or comma-separated unit labels.
    pub fn subset(&self, spec: &str) -> Result<UnitSubset, IoError> {
        if let Some(s) = self.subsets.get(spec) {
            return Ok(s.clone());
        }
        let labels: Vec<&str> = spec.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        UnitSubset::from_labels(&self.groupoid, &labels)
            .map_err(|e| IoError::Usage(format!("--u {spec:?} is neither a subset name nor unit labels: {e}")))
    }
}

/// One typed input of [`parse_specs`].
#[derive(Debug, Clone)]
pub enum Input {
    Groupoid(LoadedGroupoid),
    Atlas(GluingAtlas),
    Domain(LayerDomain),
    Kernels(BTreeMap<String, KernelSpec>),
}

fn read(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read { path: path.to_path_buf(), source })
}

/// Deserializes `text` reporting the JSON path and, where serde_json knows
/// it, line and column of the first error.
pub fn from_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        IoError::Schema { path: path.to_path_buf(), field, message: e.into_inner().to_string() }
    })
}

fn check_version(path: &Path, v: u32) -> Result<(), IoError> {
    if v == SPEC_VERSION {
        Ok(())
    } else {
        Err(IoError::Version { path: path.to_path_buf(), found: v })
    }
}

/// Index sanity the composition table cannot represent: array lengths and
/// compose triples, each bad triple named by position.
pub fn check_raw(raw: &RawGroupoid) -> Result<(), String> {
    let n = raw.arrows.len();
    for (name, len) in [("dom", raw.dom.len()), ("rng", raw.rng.len()), ("inverse", raw.inverse.len())] {
        if len != n {
            return Err(format!("{name} has {len} entries for {n} arrows"));
        }
    }
    if raw.unit_arrow.len() != raw.units.len() {
        return Err(format!("unit_arrow has {} entries for {} units", raw.unit_arrow.len(), raw.units.len()));
    }
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, &(g, h, k)) in raw.compose.iter().enumerate() {
        if let Some(bad) = [g, h, k].into_iter().find(|&a| a >= n) {
            return Err(format!("compose triple #{i} [{g}, {h}, {k}]: arrow {bad} out of range ({n} arrows)"));
        }
        if let Some(&j) = seen.get(&(g, h)) {
            let (_, _, k0) = raw.compose[j];
            if k0 != k {
                return Err(format!("compose triple #{i} [{g}, {h}, {k}] conflicts with triple #{j} [{g}, {h}, {k0}]"));
            }
        }
        seen.insert((g, h), i);
    }
    Ok(())
}

/// Builds the groupoid a file describes without checking the axioms (the
/// `validate` subcommand wants the report, not an error).
pub fn groupoid_unchecked(path: &Path, file: &GroupoidFile) -> Result<LoadedGroupoid, IoError> {
    check_version(path, file.spec_version)?;
    let count = file.build.is_some() as usize + file.raw.is_some() as usize + file.toy.is_some() as usize;
    if count != 1 {
        return Err(IoError::Schema {
            path: path.to_path_buf(),
            field: ".".into(),
            message: "exactly one of `build`, `raw`, `toy` is required".into(),
        });
    }
    let mut subsets = BTreeMap::new();
    let groupoid = if let Some(b) = &file.build {
        b.build().map_err(|e| IoError::invariant(path, e))?
    } else if let Some(raw) = &file.raw {
        check_raw(raw).map_err(|e| IoError::Schema { path: path.to_path_buf(), field: "raw".into(), message: e })?;
        FiniteGroupoid::from_raw(raw.clone())
    } else {
        let t = file.toy.as_ref().expect("counted");
        let b = desingularize(&t.domain).map_err(|e| IoError::invariant(path, e))?;
        let model = finite_toy_model(&assemble_layer_groupoid(&b), t.m, t.interior_sample)
            .map_err(|e| IoError::invariant(path, e))?;
        let s = &model.structure;
        subsets.insert("interior".to_string(), s.u.clone());
        subsets.insert("boundary".to_string(), s.f.clone());
        model.glued.groupoid
    };
    for (name, labels) in &file.subsets {
        let s = UnitSubset::from_labels(&groupoid, labels)
            .map_err(|e| IoError::invariant(path, format!("subset {name:?}: {e}")))?;
        subsets.insert(name.clone(), s);
    }
    Ok(LoadedGroupoid { groupoid: Arc::new(groupoid), subsets })
}

pub fn load_groupoid(path: &Path) -> Result<LoadedGroupoid, IoError> {
    let file: GroupoidFile = from_json(path, &read(path)?)?;
    let g = groupoid_unchecked(path, &file)?;
    let report = validate(&g.groupoid);
    if !report.is_empty() {
        return Err(IoError::Axioms { path: path.to_path_buf(), report });
    }
    Ok(g)
}

fn piece_groupoid(path: &Path, i: usize, p: &PieceSpec) -> Result<FiniteGroupoid, IoError> {
    let g = match p {
        PieceSpec::Build(b) => b.build().map_err(|e| IoError::invariant(path, format!("piece {i}: {e}")))?,
        PieceSpec::Raw(raw) => {
            check_raw(raw).map_err(|e| IoError::Schema {
                path: path.to_path_buf(),
                field: format!("pieces[{i}].raw"),
                message: e,
            })?;
            FiniteGroupoid::from_raw(raw.clone())
        }
    };
    let report = validate(&g);
    if !report.is_empty() {
        return Err(IoError::invariant(path, format!("piece {i}: groupoid axioms fail: {report}")));
    }
    Ok(g)
}

pub fn atlas_from_file(path: &Path, file: &AtlasFile) -> Result<GluingAtlas, IoError> {
    check_version(path, file.spec_version)?;
    let pieces: Vec<FiniteGroupoid> =
        file.pieces.iter().enumerate().map(|(i, p)| piece_groupoid(path, i, p)).collect::<Result<_, _>>()?;
    let ambient = file.ambient.clone();
    let atlas = match file.overlaps {
        OverlapRule::Labels => GluingAtlas::from_labeled_pieces(ambient, pieces),
        OverlapRule::Endpoints => GluingAtlas::from_pair_overlaps(ambient, pieces),
        OverlapRule::Explicit => {
            let index: HashMap<&str, usize> = file.ambient.iter().enumerate().map(|(k, l)| (l.as_str(), k)).collect();
            let mut built = Vec::with_capacity(pieces.len());
            for (i, g) in pieces.iter().enumerate() {
                let embedding = g
                    .unit_labels()
                    .iter()
                    .map(|l| {
                        index.get(l.as_str()).copied().ok_or_else(|| {
                            IoError::invariant(path, format!("piece {i}: unit {l:?} is not an ambient unit"))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                built.push(Piece { groupoid: g.clone(), embedding });
            }
            let mut phis = Vec::with_capacity(file.phis.len());
            for (n, p) in file.phis.iter().enumerate() {
                let (a, b) = match (pieces.get(p.from), pieces.get(p.to)) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return Err(IoError::invariant(path, format!("phis[{n}]: no piece {} or {}", p.from, p.to))),
                };
                let map = p
                    .map
                    .iter()
                    .map(|(x, y)| match (a.arrow_index(x), b.arrow_index(y)) {
                        (Some(x), Some(y)) => Ok((x, y)),
                        _ => Err(IoError::invariant(path, format!("phis[{n}]: unknown arrow in [{x:?}, {y:?}]"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                phis.push(Phi { from: p.from, to: p.to, map });
            }
            GluingAtlas::new(ambient, built, phis)
        }
    };
    atlas.map_err(|e| IoError::invariant(path, e))
}

pub fn load_atlas(path: &Path) -> Result<GluingAtlas, IoError> {
    let file: AtlasFile = from_json(path, &read(path)?)?;
    atlas_from_file(path, &file)
}

pub fn load_domain(path: &Path) -> Result<LayerDomain, IoError> {
    let file: DomainFile = from_json(path, &read(path)?)?;
    check_version(path, file.spec_version)?;
    let mut d = file.domain;
    d.validate().map_err(|e| IoError::invariant(path, e))?;
    Ok(d)
}

pub fn load_kernels(path: &Path) -> Result<BTreeMap<String, KernelSpec>, IoError> {
    let file: KernelFile = from_json(path, &read(path)?)?;
    check_version(path, file.spec_version)?;
    Ok(file.kernels)
}

/// Loads each file, dispatching on its top-level keys.
pub fn parse_specs<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<Input>, IoError> {
    paths
        .iter()
        .map(|p| {
            let path = p.as_ref();
            let text = read(path)?;
            let value: serde_json::Value = from_json(path, &text)?;
            let has = |k: &str| value.get(k).is_some();
            Ok(if has("domain") && !has("toy") {
                Input::Domain(load_domain(path)?)
            } else if has("ambient") {
                Input::Atlas(load_atlas(path)?)
            } else if has("kernels") {
                Input::Kernels(load_kernels(path)?)
            } else {
                Input::Groupoid(load_groupoid(path)?)
            })
        })
        .collect()
}
