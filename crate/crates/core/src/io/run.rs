//! Subcommand dispatch. Every subcommand yields a [`Report`]; the exit code
//! is 0 when the checked statement holds, 1 when it fails, and callers map
//! an `Err` to 2.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{load_atlas, load_domain, load_groupoid, load_kernels, IoError, SPEC_VERSION};
use crate::algebra::{convolve, l1_norm, reduced_norm_with, regular_rep, star};
use crate::conical::{assemble_layer_groupoid, boundary_algebra_report, desingularize, weight_line};
use crate::fredholm::{
    criterion_trials, fredholm_criterion, make_structure, recognize_boundary_bundle, strictly_spectral_check,
};
use crate::gluing::{check_strong_gluing, check_weak_gluing, glue, GlueError};
use crate::groupoid::{orbits_and_isotropy, validate, FiniteGroupoid};
use crate::mellin::{
    fredholm_verdict, nystrom::nystrom_kernel_trace, nystrom::nystrom_oracle, vertex_kernels, KernelChoice,
    OperatorSpec, ScanOptions,
};
use crate::random::{gaussian_element, trial_rng};

pub const TOOL: &str = "gpdlab";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// One subcommand with its arguments. Paths are kept as given so reports
/// echo them verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    Validate {
        groupoid: String,
    },
    Glue {
        atlas: String,
    },
    Orbits {
        groupoid: String,
    },
    Norms {
        groupoid: String,
        seed: u64,
        trials: u64,
        tolerance: f64,
    },
    FredholmCheck {
        groupoid: String,
        u: String,
        seed: u64,
        trials: u64,
    },
    SpectralCheck {
        groupoid: String,
        u: String,
        seed: u64,
        trials: u64,
    },
    LayerReport {
        domain: String,
    },
    MellinScan {
        domain: String,
        c: f64,
        /// `None` is the critical weight.
        weight: Option<f64>,
        lambda_max: f64,
        tolerance: f64,
        kernels: Option<String>,
        adversarial: Vec<String>,
    },
    NystromVerify {
        domain: String,
        levels: usize,
        base: usize,
        /// Vertices carrying the adversarial kernel; empty means `½ + K`.
        adversarial: Vec<String>,
        c: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Glue { .. } => "glue",
            Command::Orbits { .. } => "orbits",
            Command::Norms { .. } => "norms",
            Command::FredholmCheck { .. } => "fredholm-check",
            Command::SpectralCheck { .. } => "spectral-check",
            Command::LayerReport { .. } => "layer-report",
            Command::MellinScan { .. } => "mellin-scan",
            Command::NystromVerify { .. } => "nystrom-verify",
        }
    }

    /// What the report's verdict is about.
    pub fn statement(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "groupoid axioms",
            Command::Glue { .. } => "gluing groupoids along overlap isomorphisms",
            Command::Orbits { .. } => "orbit and isotropy decomposition",
            Command::Norms { .. } => "regular representation laws and the C*-identity",
            Command::FredholmCheck { .. } => "Fredholm criterion for groupoids with a pair-groupoid orbit",
            Command::SpectralCheck { .. } => "regular representations of a fibered pull-back are strictly spectral",
            Command::LayerReport { .. } => "structure of the layer potentials groupoid of a conical domain",
            Command::MellinScan { .. } => "Fredholm criterion for layer potentials via Mellin symbols",
            Command::NystromVerify { .. } => "Nystrom discretization of the layer potential operator",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub output: Option<String>,
    pub format: Format,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig { command, output: None, format: Format::Json }
    }

    /// Tolerances must be positive; csv is only defined for tabular results.
    pub fn check(&self) -> Result<(), IoError> {
        let tol = match &self.command {
            Command::Norms { tolerance, .. } | Command::MellinScan { tolerance, .. } => Some(*tolerance),
            _ => None,
        };
        if let Some(t) = tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(IoError::Usage(format!("tolerance must be positive, got {t}")));
            }
        }
        if self.format == Format::Csv
            && !matches!(self.command, Command::NystromVerify { .. } | Command::MellinScan { .. })
        {
            return Err(IoError::Usage(format!("{} has no csv output", self.command.name())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub spec_version: u32,
    pub config: RunConfig,
    pub statement: String,
    pub passed: bool,
    pub result: Value,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    /// What to write: pretty JSON of the report, or CSV.
    pub rendered: String,
    pub exit_code: i32,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn run(config: &RunConfig) -> Result<Outcome, IoError> {
    config.check()?;
    let (passed, result, csv) = dispatch(&config.command)?;
    let report = Report {
        tool: TOOL.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        spec_version: SPEC_VERSION,
        config: config.clone(),
        statement: config.command.statement().to_string(),
        passed,
        result,
    };
    let rendered = match config.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        Format::Csv => csv.expect("checked"),
    };
    Ok(Outcome { exit_code: if passed { 0 } else { 1 }, report, rendered })
}

type Dispatched = (bool, Value, Option<String>);

fn dispatch(cmd: &Command) -> Result<Dispatched, IoError> {
    match cmd {
        Command::Validate { groupoid } => {
            let file = super::from_json(Path::new(groupoid), &read(groupoid)?)?;
            let g = super::groupoid_unchecked(Path::new(groupoid), &file)?;
            let report = validate(&g.groupoid);
            let ok = report.is_empty();
            let out = json!({
                "units": g.groupoid.unit_count(),
                "arrows": g.groupoid.arrow_count(),
                "valid": ok,
                "violations": report,
            });
            Ok((ok, out, None))
        }
        Command::Glue { atlas } => {
            let atlas = load_atlas(Path::new(atlas))?;
            let weak = check_weak_gluing(&atlas);
            let strong = check_strong_gluing(&atlas);
            let mut out = json!({ "weak": weak, "strong": strong });
            let ok = match glue(&atlas) {
                Ok(glued) => {
                    out["projections_are_isomorphisms"] = json!(glued.projections_are_isomorphisms(&atlas));
                    out["glued"] = to_value(&glued.groupoid.to_raw());
                    true
                }
                Err(e @ (GlueError::WeakFails(..) | GlueError::Inconsistent { .. })) => {
                    out["glue_error"] = json!(e.to_string());
                    false
                }
                Err(e) => return Err(IoError::module("glue", e)),
            };
            Ok((ok, out, None))
        }
        Command::Orbits { groupoid } => {
            let g = load_groupoid(Path::new(groupoid))?.groupoid;
            Ok((true, orbits_json(&g), None))
        }
        Command::Norms { groupoid, seed, trials, tolerance } => {
            let g = load_groupoid(Path::new(groupoid))?.groupoid;
            let r = law_residuals(&g, *seed, *trials);
            let ok = r.iter().all(|(_, v)| *v <= *tolerance);
            let mut out = json!({ "trials": trials, "seed": seed, "tolerance": tolerance });
            for (k, v) in r {
                out[k] = json!(v);
            }
            Ok((ok, out, None))
        }
        Command::FredholmCheck { groupoid, u, seed, trials } => {
            let g = load_groupoid(Path::new(groupoid))?;
            let s = make_structure(&g.groupoid, &g.subset(u)?).map_err(|e| IoError::module("fredholm-check", e))?;
            // the reported element uses a stream no trial uses
            let a = gaussian_element(&g.groupoid, &mut trial_rng(*seed, u64::MAX));
            let verdict = fredholm_criterion(&s, &a).map_err(|e| IoError::module("fredholm-check", e))?;
            let stats = criterion_trials(&s, *trials, *seed);
            let ok = verdict.equivalence_holds && stats.passed();
            let mut out = to_value(&verdict);
            out["trials"] = to_value(&stats);
            out["boundary_bundle"] = to_value(&recognize_boundary_bundle(&s));
            Ok((ok, out, None))
        }
        Command::SpectralCheck { groupoid, u, seed, trials } => {
            let g = load_groupoid(Path::new(groupoid))?;
            let s = make_structure(&g.groupoid, &g.subset(u)?).map_err(|e| IoError::module("spectral-check", e))?;
            let stats = strictly_spectral_check(&s, *trials, *seed);
            let out = json!({ "stats": stats, "boundary_bundle": recognize_boundary_bundle(&s) });
            Ok((stats.passed(), out, None))
        }
        Command::LayerReport { domain } => {
            let d = load_domain(Path::new(domain))?;
            let b = desingularize(&d).map_err(|e| IoError::module("layer-report", e))?;
            let l = assemble_layer_groupoid(&b);
            let report = boundary_algebra_report(&l);
            let weight = weight_line(d.n, 0.0).map_err(|e| IoError::module("layer-report", e))?;
            let ok = report.fredholm_groupoid;
            let out = json!({ "report": report, "desingularized": b, "groupoid": l, "weight": weight });
            Ok((ok, out, None))
        }
        Command::MellinScan { domain, c, weight, lambda_max, tolerance, kernels, adversarial } => {
            let d = load_domain(Path::new(domain))?;
            let kernel = match (kernels, adversarial.is_empty()) {
                (Some(_), false) => return Err(IoError::Usage("--kernels and --adversarial are exclusive".into())),
                (Some(k), true) => KernelChoice::User { kernels: load_kernels(Path::new(k))? },
                (None, false) => KernelChoice::Adversarial { vertices: adversarial.clone() },
                (None, true) => KernelChoice::DoubleLayer,
            };
            let opts = ScanOptions { lambda_max: *lambda_max, tolerance: *tolerance, ..ScanOptions::default() };
            let op = OperatorSpec { c: *c, kernel };
            let v = fredholm_verdict(&d, &op, *weight, &opts).map_err(|e| IoError::module("mellin-scan", e))?;
            let mut csv = String::from("vertex,min_sigma,argmin,lambda_max,samples,certified_lower_bound,tail_certified,invertible\n");
            for s in &v.vertices {
                csv.push_str(&format!(
                    "{},{:.12e},{},{},{},{:.12e},{},{}\n",
                    s.vertex, s.min_sigma, s.argmin, s.lambda_max, s.samples, s.certified_lower_bound, s.tail_certified, s.invertible
                ));
            }
            Ok((v.fredholm, to_value(&v), Some(csv)))
        }
        Command::NystromVerify { domain, levels, base, adversarial, c } => {
            let d = load_domain(Path::new(domain))?;
            let trace = if adversarial.is_empty() {
                nystrom_oracle(&d, *levels, *base)
            } else {
                vertex_kernels(&d, &KernelChoice::Adversarial { vertices: adversarial.clone() }, *c)
                    .and_then(|k| nystrom_kernel_trace(&d, *c, &k, *levels, *base))
            }
            .map_err(|e| IoError::module("nystrom-verify", e))?;
            Ok((trace.stabilized, to_value(&trace), Some(trace.to_csv())))
        }
    }
}

fn read(path: &str) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read { path: path.into(), source })
}

fn orbits_json(g: &FiniteGroupoid) -> Value {
    let part = orbits_and_isotropy(g);
    let orbits: Vec<Value> = part
        .orbits
        .iter()
        .map(|o| {
            json!({
                "units": o.units.iter().map(|&x| g.unit_label(x)).collect::<Vec<_>>(),
                "representative": g.unit_label(o.representative()),
                "isotropy_order": o.isotropy.order(),
                "isotropy_abelian": o.isotropy.group.is_abelian(),
                "isotropy_cyclic": o.isotropy.group.is_cyclic(),
                "isotropy_arrows": o.isotropy.arrows.iter().map(|&a| g.arrow_label(a)).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "count": orbits.len(), "orbits": orbits })
}

/// Worst relative residuals of the four representation laws over seeded
/// Gaussian pairs, at every unit.
fn law_residuals(g: &std::sync::Arc<FiniteGroupoid>, seed: u64, trials: u64) -> Vec<(&'static str, f64)> {
    let part = orbits_and_isotropy(g);
    let mut worst = [0.0f64; 4];
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let a = gaussian_element(g, &mut rng);
        let b = gaussian_element(g, &mut rng);
        let ab = convolve(&a, &b).expect("same groupoid");
        let (la, lb) = (l1_norm(&a), l1_norm(&b));
        for x in 0..g.unit_count() {
            let pa = regular_rep(&a, x).expect("unit").matrix;
            let pb = regular_rep(&b, x).expect("unit").matrix;
            let pab = regular_rep(&ab, x).expect("unit").matrix;
            let pstar = regular_rep(&star(&a), x).expect("unit").matrix;
            let hom = (&pab - &pa * &pb).iter().map(|z: &Complex64| z.norm()).fold(0.0, f64::max);
            let adj = (&pstar - pa.adjoint()).iter().map(|z: &Complex64| z.norm()).fold(0.0, f64::max);
            let op = crate::algebra::sigma_max(&pa);
            worst[0] = worst[0].max(hom / (1.0 + la * lb));
            worst[1] = worst[1].max(adj / (1.0 + la));
            worst[2] = worst[2].max((op - la).max(0.0) / (1.0 + la));
        }
        let na = reduced_norm_with(&a, &part);
        let nsa = reduced_norm_with(&convolve(&star(&a), &a).expect("same groupoid"), &part);
        worst[3] = worst[3].max((nsa - na * na).abs() / (1.0 + na * na));
    }
    vec![
        ("homomorphism", worst[0]),
        ("adjoint", worst[1]),
        ("l1_bound", worst[2]),
        ("c_star_identity", worst[3]),
    ]
}
