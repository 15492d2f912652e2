use std::path::{Path, PathBuf};
use std::process::Command as Proc;

use clap::Parser;
use gpdlab::conical::ConeBase;
use gpdlab::groupoid::is_pair_groupoid;
use gpdlab::io::cli::Cli;
use gpdlab::io::{parse_specs, run, Command, Format, Input, IoError, Report, RunConfig};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn fx(name: &str) -> String {
    fixtures().join(name).to_string_lossy().into_owned()
}

fn config(args: &[&str]) -> RunConfig {
    let mut argv = vec!["gpdlab"];
    argv.extend_from_slice(args);
    Cli::try_parse_from(argv).unwrap().into_config().unwrap()
}

#[test]
fn pair3_loads_as_pair_groupoid() {
    let inputs = parse_specs(&[fx("pair3.json")]).unwrap();
    let Input::Groupoid(g) = &inputs[0] else { panic!("expected a groupoid") };
    assert_eq!(g.groupoid.unit_count(), 3);
    assert_eq!(g.groupoid.arrow_count(), 9);
    assert!(is_pair_groupoid(&g.groupoid));
}

#[test]
fn square_loads_with_two_rays_per_vertex() {
    let inputs = parse_specs(&[fx("square.json")]).unwrap();
    let Input::Domain(d) = &inputs[0] else { panic!("expected a domain") };
    assert_eq!(d.vertices.len(), 4);
    for (i, v) in d.vertices.iter().enumerate() {
        assert!(matches!(&v.base, Some(ConeBase::Rays { rays }) if rays.len() == 2));
        assert_eq!(d.components(i), 2);
    }
}

#[test]
fn parse_specs_dispatches_on_keys() {
    let inputs = parse_specs(&[fx("chain_family.json"), fx("kernels_square.json"), fx("toy.json")]).unwrap();
    assert!(matches!(inputs[0], Input::Atlas(_)));
    assert!(matches!(&inputs[1], Input::Kernels(k) if k.len() == 4));
    let Input::Groupoid(toy) = &inputs[2] else { panic!() };
    assert_eq!(toy.groupoid.arrow_count(), 153);
    assert!(toy.subsets.contains_key("interior") && toy.subsets.contains_key("boundary"));
}

#[test]
fn malformed_compose_triple_is_named() {
    let err = parse_specs(&[fx("malformed_compose.json")]).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("compose triple #3 [1, 1, 7]"), "{msg}");
}

#[test]
fn schema_errors_carry_field_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.json");
    std::fs::write(&p, "{\n  \"spec_version\": 1,\n  \"raw\": {\"units\": [\"x\"], \"arrows\": [\"1\"],\n    \"dom\": [\"zero\"]}\n}\n").unwrap();
    let msg = parse_specs(&[&p]).unwrap_err().to_string();
    assert!(msg.contains("raw.dom[0]") && msg.contains("line 4"), "{msg}");

    std::fs::write(&p, r#"{"spec_version": 2, "build": {"kind": "pair", "units": ["a"]}}"#).unwrap();
    assert!(matches!(parse_specs(&[&p]), Err(IoError::Version { found: 2, .. })));

    std::fs::write(&p, r#"{"spec_version": 1}"#).unwrap();
    assert!(parse_specs(&[&p]).unwrap_err().to_string().contains("exactly one of"));

    assert!(matches!(parse_specs(&[dir.path().join("missing.json")]), Err(IoError::Read { .. })));
}

#[test]
fn axiom_failures_report_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.json");
    // g·g is declared to be g, so g is not invertible
    std::fs::write(
        &p,
        r#"{"spec_version": 1, "raw": {"units": ["x"], "arrows": ["1", "g"], "dom": [0, 0], "rng": [0, 0],
            "unit_arrow": [0], "inverse": [0, 1], "compose": [[0,0,0],[0,1,1],[1,0,1],[1,1,1]]}}"#,
    )
    .unwrap();
    let err = parse_specs(&[&p]).unwrap_err();
    assert!(matches!(&err, IoError::Axioms { report, .. } if !report.is_empty()), "{err}");

    let out = run(&RunConfig::new(Command::Validate { groupoid: p.to_string_lossy().into() })).unwrap();
    assert_eq!(out.exit_code, 1);
    assert_eq!(out.report.result["valid"], false);
}

#[test]
fn fredholm_check_on_toy_passes() {
    let out = run(&config(&["fredholm-check", "--groupoid", &fx("toy.json"), "--u", "interior", "--seed", "7"])).unwrap();
    assert_eq!(out.exit_code, 0);
    let r = &out.report.result;
    assert_eq!(r["equivalence_holds"], true);
    assert_eq!(r["boundary_invertible"].as_object().unwrap().len(), 4);
    assert_eq!(r["trials"]["counterexamples"].as_array().unwrap().len(), 0);
    assert_eq!(r["boundary_bundle"]["recognized"], true);
}

#[test]
fn u_accepts_labels() {
    let g = fx("bundle_pullback.json");
    let out = run(&config(&["spectral-check", "--groupoid", &g, "--u", "u0,u1,u2", "--seed", "1", "--trials", "40"])).unwrap();
    assert_eq!(out.exit_code, 0);
    assert!(run(&config(&["spectral-check", "--groupoid", &g, "--u", "nope", "--seed", "1"])).is_err());
}

#[test]
fn cocycle_violation_is_an_error() {
    let err = run(&config(&["glue", "--atlas", &fx("bad.json")])).unwrap_err();
    assert!(err.to_string().contains("cocycle"), "{err}");
}

#[test]
fn weak_failure_is_a_false_verdict() {
    let out = run(&config(&["glue", "--atlas", &fx("chain_pair.json")])).unwrap();
    assert_eq!(out.exit_code, 1);
    assert_eq!(out.report.result["weak"]["holds"], false);
    let out = run(&config(&["glue", "--atlas", &fx("chain_family.json")])).unwrap();
    assert_eq!(out.exit_code, 0);
    assert_eq!(out.report.result["strong"]["holds"], true);
    assert_eq!(out.report.result["projections_are_isomorphisms"], true);
}

#[test]
fn layer_report_on_square() {
    let out = run(&config(&["layer-report", "--domain", &fx("square.json")])).unwrap();
    assert_eq!(out.exit_code, 0);
    assert!(out.rendered.contains("M_2(C0(R+)) ⊕ M_2(C0(R+)) ⊕ M_2(C0(R+)) ⊕ M_2(C0(R+))"));
    assert_eq!(out.report.result["report"]["b_equal"], false);
    let out = run(&config(&["layer-report", "--domain", &fx("cone3d.json")])).unwrap();
    assert_eq!(out.report.result["report"]["b_equal"], true);
}

#[test]
fn norms_hold_on_fixture() {
    let out =
        run(&config(&["norms", "--groupoid", &fx("bundle_pullback.json"), "--seed", "5", "--trials", "20"])).unwrap();
    assert_eq!(out.exit_code, 0, "{}", out.rendered);
}

#[test]
fn reports_round_trip_and_reproduce() {
    let args = ["spectral-check", "--groupoid", &fx("bundle_pullback.json"), "--u", "interior", "--seed", "9", "--trials", "60"];
    let a = run(&config(&args)).unwrap();
    let b = run(&config(&args)).unwrap();
    assert_eq!(a.rendered, b.rendered);
    let back: Report = serde_json::from_str(&a.rendered).unwrap();
    assert_eq!(back, a.report);

    let c = run(&config(&["mellin-scan", "--domain", &fx("square.json"), "--lambda-max", "50"])).unwrap();
    let back: Report = serde_json::from_str(&c.rendered).unwrap();
    assert_eq!(back, c.report);
    assert_eq!(serde_json::to_string_pretty(&back).unwrap() + "\n", c.rendered);
}

#[test]
fn config_checks() {
    assert!(run(&config(&["norms", "--groupoid", &fx("pair3.json"), "--seed", "1", "--tolerance=-1"])).is_err());
    assert!(run(&config(&["orbits", "--groupoid", &fx("pair3.json"), "--format", "csv"])).is_err());
    // randomized subcommands need a seed
    assert!(Cli::try_parse_from(["gpdlab", "fredholm-check", "--groupoid", "toy.json", "--u", "interior"]).is_err());
    assert!(Cli::try_parse_from(["gpdlab", "frobnicate"]).is_err());
    let c = config(&["nystrom-verify", "--domain", "x.json", "--out", "trace.csv"]);
    assert_eq!(c.format, Format::Csv);
    assert!(Cli::try_parse_from(["gpdlab", "mellin-scan", "--domain", "x", "--weight", "heavy"])
        .unwrap()
        .into_config()
        .is_err());
}

#[test]
fn nystrom_csv_is_plot_ready() {
    let out = run(&config(&["nystrom-verify", "--domain", &fx("square.json"), "--levels", "3", "--format", "csv"])).unwrap();
    let lines: Vec<&str> = out.rendered.lines().collect();
    assert_eq!(lines[0], "level,dof,sigma_min");
    assert_eq!(lines.len(), 4);
}

#[test]
fn manifest_fixtures_exit_as_recorded() {
    let text = std::fs::read_to_string(fixtures().join("manifest.json")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(manifest["spec_version"], 1);
    for entry in manifest["fixtures"].as_array().unwrap() {
        assert!(fixtures().join(entry["file"].as_str().unwrap()).exists());
        let args: Vec<&str> = entry["run"].as_array().unwrap().iter().map(|a| a.as_str().unwrap()).collect();
        let status = Proc::new(env!("CARGO_BIN_EXE_gpdlab"))
            .args(&args)
            .current_dir(fixtures())
            .env("GPDLAB_THREADS", "1")
            .output()
            .unwrap();
        assert_eq!(
            status.status.code(),
            Some(entry["exit"].as_i64().unwrap() as i32),
            "{args:?}: {}",
            String::from_utf8_lossy(&status.stderr)
        );
    }
}

#[test]
fn binary_writes_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = Proc::new(env!("CARGO_BIN_EXE_gpdlab"))
        .args(["orbits", "--groupoid", &fx("pair3.json"), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let report: Report = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report.result["count"], 1);
}
