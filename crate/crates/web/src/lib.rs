//! Browser bindings. Each operation returns a JSON string; the plain
//! functions are usable (and tested) natively.

use gpdlab::conical::{assemble_layer_groupoid, boundary_algebra_report, desingularize, LayerDomain};
use gpdlab::gluing::{check_strong_gluing, check_weak_gluing, glue, GluingAtlas};
use gpdlab::groupoid::{is_pair_groupoid, orbits_and_isotropy, pair};
use gpdlab::mellin::{fredholm_verdict, scan_kernel, sigma_min_shifted, vertex_kernels, KernelChoice, OperatorSpec, ScanOptions};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest |λ| sent back for plotting.
const PLOT_LAMBDA: f64 = 40.0;

/// One `x y` (or `x, y`) pair per line; blank lines and `#` comments skipped.
pub fn parse_points(text: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let [x, y] = nums.as_slice() else {
            return Err(format!("line {}: expected two coordinates, got {:?}", i + 1, line));
        };
        let p = |s: &str| s.parse::<f64>().map_err(|_| format!("line {}: {s:?} is not a number", i + 1));
        out.push((p(x)?, p(y)?));
    }
    Ok(out)
}

fn polygon(text: &str) -> Result<LayerDomain, String> {
    LayerDomain::polygon(&parse_points(text)?).map_err(|e| e.to_string())
}

pub fn layer_report_value(points: &str) -> Result<Value, String> {
    let d = polygon(points)?;
    let b = desingularize(&d).map_err(|e| e.to_string())?;
    let report = boundary_algebra_report(&assemble_layer_groupoid(&b));
    let angles: Vec<Value> = (0..d.vertices.len())
        .map(|i| json!({ "vertex": d.vertices[i].id, "angle_over_pi": d.interior_angle(i).map(|a| a / std::f64::consts::PI) }))
        .collect();
    Ok(json!({ "report": report, "angles": angles }))
}

/// Verdict for `c·I + K` with the double layer, plus σ_min curves per vertex.
pub fn mellin_scan_value(points: &str, c: f64, lambda_max: f64) -> Result<Value, String> {
    let d = polygon(points)?;
    let opts = ScanOptions { lambda_max, ..ScanOptions::default() };
    let op = OperatorSpec { c, kernel: KernelChoice::DoubleLayer };
    let verdict = fredholm_verdict(&d, &op, None, &opts).map_err(|e| e.to_string())?;
    let kernels = vertex_kernels(&d, &op.kernel, c).map_err(|e| e.to_string())?;
    let mut curves = Vec::new();
    for k in &kernels {
        let (_, fam) = scan_kernel(k, verdict.sigma, c, &opts).map_err(|e| e.to_string())?;
        let (lambdas, sigmas): (Vec<f64>, Vec<f64>) = fam
            .lambdas
            .iter()
            .zip(&fam.values)
            .filter(|(l, _)| **l >= 0.0 && **l <= PLOT_LAMBDA)
            .map(|(l, v)| (*l, sigma_min_shifted(v, c)))
            .unzip();
        curves.push(json!({ "vertex": k.vertex, "lambda": lambdas, "sigma_min": sigmas }));
    }
    Ok(json!({ "verdict": verdict, "curves": curves }))
}

/// Each line is a chart: unit labels separated by spaces or commas. Every
/// chart is a pair groupoid; the ambient set is the union in order of appearance.
pub fn glue_pairs_value(charts: &str) -> Result<Value, String> {
    let mut ambient: Vec<String> = Vec::new();
    let mut pieces = Vec::new();
    for line in charts.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let mut units: Vec<String> = Vec::new();
        for l in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
            if !units.iter().any(|u| u == l) {
                units.push(l.to_string());
            }
            if !ambient.iter().any(|u| u == l) {
                ambient.push(l.to_string());
            }
        }
        pieces.push(pair(&units).map_err(|e| e.to_string())?);
    }
    if pieces.is_empty() {
        return Err("no charts given".into());
    }
    let atlas = GluingAtlas::from_labeled_pieces(ambient.clone(), pieces).map_err(|e| e.to_string())?;
    let weak = check_weak_gluing(&atlas);
    let strong = check_strong_gluing(&atlas);
    let mut out = json!({ "ambient": ambient, "weak": weak, "strong": { "holds": strong.holds, "witness": strong.witness } });
    match glue(&atlas) {
        Ok(g) => {
            let orbits = orbits_and_isotropy(&g.groupoid);
            let orbits: Vec<Vec<&str>> =
                orbits.orbits.iter().map(|o| o.units.iter().map(|&x| g.groupoid.unit_label(x)).collect()).collect();
            out["glued"] = json!({
                "units": g.groupoid.unit_count(),
                "arrows": g.groupoid.arrow_count(),
                "pair_groupoid": is_pair_groupoid(&g.groupoid),
                "orbits": orbits,
            });
        }
        Err(e) => out["glue_error"] = json!(e.to_string()),
    }
    Ok(out)
}

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn layer_report(points: &str) -> Result<String, JsError> {
    to_js(layer_report_value(points))
}

#[wasm_bindgen]
pub fn mellin_scan(points: &str, c: f64, lambda_max: f64) -> Result<String, JsError> {
    to_js(mellin_scan_value(points, c, lambda_max))
}

#[wasm_bindgen]
pub fn glue_pairs(charts: &str) -> Result<String, JsError> {
    to_js(glue_pairs_value(charts))
}
