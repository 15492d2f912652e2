use std::f64::consts::{PI, TAU};

use gpdlab::conical::LayerDomain;
use gpdlab::mellin::nystrom::{double_layer_entry, graded_mesh, nystrom_oracle};
use gpdlab::mellin::*;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Direct double-layer kernel `(1/2π)(y−x)·n_y/|x−y|²`.
fn direct(x: [f64; 2], y: [f64; 2], n: [f64; 2]) -> f64 {
    let (dx, dy) = (y[0] - x[0], y[1] - x[1]);
    (dx * n[0] + dy * n[1]) / (dx * dx + dy * dy) / TAU
}

#[test]
fn straight_angle_kernel_vanishes() {
    let k = wedge_double_layer_kernel("v", PI).unwrap();
    for t in [1e-6, 0.1, 1.0, 3.0, 1e5] {
        assert!(k.eval(t).iter().all(|z| z.norm() < 1e-14));
    }
}

#[test]
fn wedge_kernel_matches_pointwise_evaluation() {
    for alpha in [PI / 2.0, 1.0, 2.0 * PI / 3.0, 4.5] {
        let k = wedge_double_layer_kernel("v", alpha).unwrap();
        let (ca, sa) = (alpha.cos(), alpha.sin());
        for (r, s) in [(1.0, 1.0), (0.3, 2.0), (5.0, 0.7)] {
            // x on ray 0, y on ray 1 with outward normal
            let x = [r, 0.0];
            let y = [s * ca, s * sa];
            let expect = direct(x, y, [-sa, ca]);
            assert!((k.eval(r / s)[(0, 1)].re / s - expect).abs() < 1e-12);
            // and the other way round
            let x = [r * ca, r * sa];
            let y = [s, 0.0];
            let expect = direct(x, y, [0.0, -1.0]);
            assert!((k.eval(r / s)[(1, 0)].re / s - expect).abs() < 1e-12);
        }
        assert_eq!(k.eval(0.7)[(0, 0)], Complex64::new(0.0, 0.0));
    }
    // x = (1,0), y = (0,1)
    let k = wedge_double_layer_kernel("v", PI / 2.0).unwrap();
    assert!((k.eval(1.0)[(0, 1)].re - direct([1.0, 0.0], [0.0, 1.0], [-1.0, 0.0])).abs() < 1e-12);
}

#[test]
fn reflex_flip_negates() {
    for alpha in [0.4, 1.3, 2.9] {
        let a = wedge_double_layer_kernel("v", alpha).unwrap();
        let b = wedge_double_layer_kernel("v", TAU - alpha).unwrap();
        for t in [0.01, 0.5, 1.0, 7.0] {
            assert!((a.eval(t) + b.eval(t)).norm() < 1e-14);
        }
    }
    assert!(wedge_double_layer_kernel("v", 0.0).is_err());
    assert!(wedge_double_layer_kernel("v", TAU).is_err());
}

fn sech(x: Complex64) -> Complex64 {
    1.0 / x.cosh()
}

#[test]
fn sech_kernel_matches_closed_form() {
    // ∫ (1/(πs)) sech((u−h)/s) e^{(σ−iλ)u} du = e^{−i(λ+iσ)h} sech(π(λ+iσ)s/2)
    let term = SechTerm { coef: 1.0, scale: 0.8, shift: 0.3 };
    let k = MellinKernel::from_spec("v", &KernelSpec { entries: vec![vec![ScalarKernel::Sech { terms: vec![term] }]] }).unwrap();
    for sigma in [0.0, 0.4] {
        let fam = mellin_transform(&k, sigma, &[-7.0, -1.0, 0.0, 0.5, 3.0, 25.0]).unwrap();
        for (l, v) in fam.lambdas.iter().zip(&fam.values) {
            let z = Complex64::new(*l, sigma);
            let exact = (Complex64::new(0.0, -1.0) * z * term.shift).exp() * sech(z * PI * term.scale / 2.0);
            assert!((v[(0, 0)] - exact).norm() < 1e-8, "λ={l} σ={sigma}");
        }
    }
}

#[test]
fn wedge_symbol_closed_form_and_dual_quadrature() {
    // off-diagonal symbol ½ sinh(λ(π−α))/sinh(λπ)
    for alpha in [PI / 2.0, 3.0 * PI / 5.0, 4.0] {
        let k = wedge_double_layer_kernel("v", alpha).unwrap();
        let range = truncation(&k, 0.0).unwrap();
        for l in [0.0, 0.3, 2.0, 11.0] {
            let (v, err) = symbol_at(&k, 0.0, l, Scheme::Adaptive, &range).unwrap();
            assert!(err < 1e-9);
            let exact = if l == 0.0 { (PI - alpha) / TAU } else { 0.5 * (l * (PI - alpha)).sinh() / (l * PI).sinh() };
            assert!((v[(0, 1)].re - exact).abs() < 1e-9);
            assert!(v[(0, 1)].im.abs() < 1e-9);
            let (t, _) = symbol_at(&k, 0.0, l, Scheme::Trapezoid { h: 0.02 }, &range).unwrap();
            assert!((&t - &v).norm() < 1e-9);
            let (t2, _) = symbol_at(&k, 0.0, l, Scheme::Trapezoid { h: 0.01 }, &range).unwrap();
            assert!((&t2 - &t).norm() < 1e-9);
        }
    }
}

#[test]
fn adjoint_kernel_gives_adjoint_symbol() {
    let sech_entry = |coef, scale, shift| ScalarKernel::Sech { terms: vec![SechTerm { coef, scale, shift }] };
    let spec = KernelSpec {
        entries: vec![
            vec![sech_entry(0.7, 1.0, 0.6), ScalarKernel::Wedge { alpha: 1.1 }],
            vec![ScalarKernel::Zero, sech_entry(-0.2, 0.5, -1.0)],
        ],
    };
    let k = MellinKernel::from_spec("v", &spec).unwrap();
    let grid = uniform_grid(6.0, 0.5);
    let a = mellin_transform(&k, 0.0, &grid).unwrap();
    let b = mellin_transform(&k.adjoint(), 0.0, &grid).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x.adjoint() - y).norm() < 1e-9);
    }
}

#[test]
fn rejects_lines_outside_the_strip() {
    let k = wedge_double_layer_kernel("v", 1.0).unwrap();
    assert!(matches!(mellin_transform(&k, 1.0, &[0.0]), Err(MellinError::NotIntegrable { .. })));
    assert!(mellin_transform(&k, 0.9, &[0.0]).is_ok());
}

#[test]
fn zero_kernel_scans() {
    let z = MellinKernel::zero("v", 2);
    let fam = mellin_transform(&z, 0.0, &uniform_grid(10.0, 1.0)).unwrap();
    assert!(fam.values.iter().all(|v| v.norm() == 0.0));
    for c in [0.5, 1.0, 2.0] {
        let (s, _) = scan_kernel(&z, 0.0, c, &ScanOptions::default()).unwrap();
        assert_eq!(s.min_sigma, c);
        assert!(s.invertible);
    }
}

#[test]
fn scalar_symbol_hitting_minus_half() {
    let mut fam = mellin_transform(&MellinKernel::zero("v", 1), 0.0, &[]).unwrap();
    fam.insert(vec![
        (-1.0, DMatrix::from_element(1, 1, Complex64::new(0.1, 0.0)), 0.0),
        (0.0, DMatrix::from_element(1, 1, Complex64::new(-0.5, 0.0)), 0.0),
    ]);
    let m = invertibility_scan(&fam, 0.5);
    assert_eq!(m.min_sigma, 0.0);
    assert_eq!(m.argmin, 0.0);
}

#[test]
fn verdicts() {
    let opts = ScanOptions::default();
    let sq = LayerDomain::unit_square();
    let v = fredholm_verdict(&sq, &OperatorSpec::half_plus_double_layer(), None, &opts).unwrap();
    assert!(v.fredholm && v.ellipticity);
    for s in &v.vertices {
        // ½ − (π−α)/(2π) at λ = 0
        assert!((s.min_sigma - 0.25).abs() < 1e-9);
        assert!(s.tail_certified);
    }
    let zero_c = OperatorSpec { c: 0.0, kernel: KernelChoice::DoubleLayer };
    let v = fredholm_verdict(&sq, &zero_c, None, &opts).unwrap();
    assert!(!v.ellipticity && !v.fredholm);

    let adv = OperatorSpec { c: 0.5, kernel: KernelChoice::Adversarial { vertices: vec!["p2".into()] } };
    let v = fredholm_verdict(&sq, &adv, None, &opts).unwrap();
    assert!(!v.fredholm);
    assert!(v.witness.unwrap().contains("p2"));
    let bad = v.vertices.iter().find(|s| s.vertex == "p2").unwrap();
    assert!(bad.min_sigma < 1e-9);

    let user = OperatorSpec { c: 0.5, kernel: KernelChoice::User { kernels: Default::default() } };
    assert!(matches!(fredholm_verdict(&sq, &user, None, &opts), Err(MellinError::MissingKernel(_))));
    let cone = LayerDomain::single_cone(3, "disc", 1).unwrap();
    assert!(matches!(
        fredholm_verdict(&cone, &OperatorSpec::half_plus_double_layer(), None, &opts),
        Err(MellinError::Unsupported(3))
    ));
}

#[test]
fn nystrom_mesh_properties() {
    let sq = LayerDomain::unit_square();
    let m = graded_mesh(&sq, 16).unwrap();
    assert_eq!(m.len(), 4 * 32);
    for j in 0..m.len() {
        for l in 0..m.len() {
            if m.edge[j] == m.edge[l] {
                assert_eq!(double_layer_entry(&m, j, l), 0.0);
            }
        }
    }
    // Gauss: the boundary subtends half a turn from a point in an edge's middle
    let fine = graded_mesh(&sq, 128).unwrap();
    let j = (0..fine.len()).max_by(|&a, &b| fine.radius[a].total_cmp(&fine.radius[b])).unwrap();
    let sum: f64 = (0..fine.len()).map(|l| double_layer_entry(&fine, j, l) * fine.weights[l]).sum();
    assert!((sum - 0.5).abs() < 1e-3, "{sum}");
    let total: f64 = fine.weights.iter().sum();
    assert!((total - 4.0).abs() < 1e-3);
}

#[test]
fn nystrom_rejections() {
    assert!(matches!(graded_mesh(&LayerDomain::unit_square(), 3), Err(MellinError::TooCoarse { points: 6 })));
    assert!(matches!(nystrom_oracle(&LayerDomain::unit_square(), 9, 4), Err(MellinError::Levels(9))));
    let flat = LayerDomain {
        n: 2,
        vertices: vec![
            gpdlab::conical::Vertex { id: "a".into(), coords: vec![0.0, 0.0], base: Some(ConeBaseRays::two(0.0, 1.0)) },
            gpdlab::conical::Vertex { id: "b".into(), coords: vec![1.0, 0.0], base: Some(ConeBaseRays::two(0.0, 1.0)) },
        ],
        edges: vec![("a".into(), "b".into()), ("b".into(), "a".into())],
        no_cracks: true,
    };
    assert!(matches!(graded_mesh(&flat, 8), Err(MellinError::Degenerate)));
    assert!(LayerDomain::polygon(&[(0.0, 0.0), (1.0, 0.0)]).is_err());
}

struct ConeBaseRays;
impl ConeBaseRays {
    fn two(a: f64, b: f64) -> gpdlab::conical::ConeBase {
        gpdlab::conical::ConeBase::Rays { rays: vec![a, b] }
    }
}

#[test]
fn nystrom_square_stabilizes() {
    let tr = nystrom_oracle(&LayerDomain::unit_square(), 4, 4).unwrap();
    assert!(tr.stabilized);
    assert!(tr.rows.iter().all(|r| r.sigma_min > 0.01));
    assert!(tr.to_csv().starts_with("level,dof,sigma_min\n1,32,"));
}
