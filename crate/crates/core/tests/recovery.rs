mod common;

use common::{exactness_pair, fd_gradient, FD_STEP};
use cpdk::geometry::{
    ellipse_nodes, ellipse_normal, grid_nodes, max_norm, test_function, EllipseSpec, Radius, ScalingConvention,
};
use cpdk::recovery::{
    differentiation_weights, fit_interpolant, optimal_weights_qp, project_tangent, worst_case_error,
    LinearFunctional,
};
use cpdk::solver::{kernel_basis, null_basis, Tolerances};
use cpdk::{KernelSpec, NodeSet, PolySpace};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lattice(d: usize, r_sq: f64) -> NodeSet {
    grid_nodes(d, Radius::from_squared(r_sq).unwrap()).unwrap()
}

fn laplacian_report(nodes: &NodeSet, scaling: Option<ScalingConvention>) -> cpdk::recovery::WeightReport {
    let d = nodes.dim();
    differentiation_weights(
        nodes,
        &LinearFunctional::LaplacianAt(vec![0.0; d]),
        &KernelSpec::new(7.0, d).unwrap(),
        &PolySpace::new(d, 4).unwrap(),
        scaling,
        &Tolerances::default(),
    )
    .unwrap()
}

#[test]
fn table_anchor_z3_sqrt3() {
    let rep = laplacian_report(&lattice(3, 3.0), Some(ScalingConvention::GridByR(3f64.sqrt())));
    assert_eq!(rep.weights.len(), 27);
    assert!((rep.l1 - 24.8).abs() < 0.05, "{}", rep.l1);
    let cond = rep.cond.unwrap();
    assert!(cond > 2.5e3 / 2.0 && cond < 2.5e3 * 2.0);
}

#[test]
fn worst_case_error_anchors() {
    for (d, sq, expected) in [(2, 4.0, 7.4), (4, 2.0, 14.0)] {
        let nodes = lattice(d, sq);
        let rep = laplacian_report(&nodes, Some(ScalingConvention::GridByR(sq.sqrt())));
        let e = worst_case_error(
            &nodes,
            &rep.weights,
            &LinearFunctional::LaplacianAt(vec![0.0; d]),
            &KernelSpec::new(7.0, d).unwrap(),
            &PolySpace::new(d, 4).unwrap(),
            &Tolerances::default(),
        )
        .unwrap();
        assert!((e - expected).abs() < 0.05, "d={d}: {e}");
        assert_eq!(Some(e), rep.worst_case_error);
    }
}

#[test]
fn prescaled_weights_match_direct_solve() {
    for (d, sq) in [(2, 2.0), (2, 4.0), (3, 3.0)] {
        let nodes = lattice(d, sq);
        let direct = laplacian_report(&nodes, None);
        let scaled = laplacian_report(&nodes, Some(ScalingConvention::GridByR(max_norm(&nodes))));
        let scale = direct.weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        for (a, b) in direct.weights.iter().zip(&scaled.weights) {
            assert!((a - b).abs() <= 1e-7 * scale);
        }
    }
}

#[test]
fn weights_are_symmetric_on_lattice_balls() {
    for (d, sq) in [(2, 2.0), (2, 4.0), (3, 2.0), (3, 3.0), (4, 3.0)] {
        let nodes = lattice(d, sq);
        let rep = laplacian_report(&nodes, Some(ScalingConvention::GridByR(max_norm(&nodes))));
        let orbit = |p: &[f64]| {
            let mut a: Vec<i64> = p.iter().map(|c| c.abs() as i64).collect();
            a.sort_unstable();
            a
        };
        for i in 0..nodes.len() {
            for j in 0..nodes.len() {
                if orbit(nodes.point(i)) == orbit(nodes.point(j)) {
                    assert!((rep.weights[i] - rep.weights[j]).abs() < 1e-9, "d={d} r^2={sq} {i} {j}");
                }
            }
        }
    }
}

#[test]
fn gradient_component_weights_are_exact() {
    let nodes = lattice(2, 4.0);
    let kernel = KernelSpec::new(7.0, 2).unwrap();
    let space = PolySpace::new(2, 4).unwrap();
    let f = LinearFunctional::GradientComponentAt { x: vec![0.0, 0.0], axis: 0 };
    let rep = differentiation_weights(&nodes, &f, &kernel, &space, Some(ScalingConvention::GridByR(2.0)), &Tolerances::default()).unwrap();
    // exact on x^3: derivative at the origin vanishes; exact on x: derivative 1
    let sum = |g: &dyn Fn(&[f64]) -> f64| -> f64 { nodes.iter().zip(&rep.weights).map(|(p, w)| w * g(p)).sum() };
    assert!((sum(&|p| p[0]) - 1.0).abs() < 1e-10);
    assert!(sum(&|p| p[0].powi(3)).abs() < 1e-10);
    assert!(sum(&|p| p[1]).abs() < 1e-10);
    let qp = optimal_weights_qp(&nodes, &f, &kernel, &space, &Tolerances::default()).unwrap();
    for (a, b) in qp.iter().zip(&rep.weights) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn qp_optimum_beats_random_feasible_weights() {
    let nodes = lattice(3, 2.0);
    let kernel = KernelSpec::new(7.0, 3).unwrap();
    let space = PolySpace::new(3, 4).unwrap();
    let f = LinearFunctional::LaplacianAt(vec![0.0; 3]);
    let tol = Tolerances::default();
    let w = optimal_weights_qp(&nodes, &f, &kernel, &space, &tol).unwrap();
    let e = worst_case_error(&nodes, &w, &f, &kernel, &space, &tol).unwrap();
    let m = null_basis(&space.vandermonde(&nodes).unwrap(), &tol).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let z = DVector::from_fn(m.dim(), |_, _| rng.random_range(-1.0..1.0));
        let u: Vec<f64> = (DVector::from_vec(w.clone()) + m.combine(&z).unwrap()).iter().copied().collect();
        assert!(worst_case_error(&nodes, &u, &f, &kernel, &space, &tol).unwrap() >= e);
    }
}

#[test]
fn interpolant_reproduces_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let kernel = KernelSpec::new(5.0, 2).unwrap();
    let space = PolySpace::new(2, 3).unwrap();
    for n in [1, 4, 9, 15] {
        let nodes = NodeSet::new((0..n).map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect()).unwrap();
        let p = |x: &[f64]| 0.5 - x[0] + 2.0 * x[0] * x[1] + x[1] * x[1];
        let values: Vec<f64> = nodes.iter().map(p).collect();
        let s = fit_interpolant(&nodes, &values, &kernel, &space, &Tolerances::default()).unwrap();
        assert!(s.kernel_coefficients().iter().all(|c| c.abs() < 1e-8), "n={n}");
        for (x, f) in nodes.iter().zip(&values) {
            assert!((s.eval(x).unwrap() - f).abs() < 1e-8);
        }
        if n >= 9 {
            // determining for quadratics, so p is recovered everywhere
            assert!((s.eval(&[0.3, -1.7]).unwrap() - p(&[0.3, -1.7])).abs() < 1e-8);
        }
    }
}

#[test]
fn interpolant_gradient_matches_finite_differences() {
    let spec = EllipseSpec::standard(20, 4);
    let (nodes, _) = ellipse_nodes(&spec).unwrap();
    let values: Vec<f64> = nodes.iter().map(|p| test_function(p[0], p[1])).collect();
    for (s, q) in [(5.0, 3), (7.0, 4)] {
        let sigma = fit_interpolant(&nodes, &values, &KernelSpec::new(s, 2).unwrap(), &PolySpace::new(2, q).unwrap(), &Tolerances::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let x = vec![rng.random_range(-1.2..1.2), rng.random_range(-1.0..1.0)];
            let g = sigma.gradient(&x).unwrap();
            let f = |p: &[f64]| sigma.eval(p).unwrap();
            let fd = fd_gradient(&f, &x, FD_STEP * 0.1);
            let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            for (a, b) in g.iter().zip(fd) {
                assert!((a - b).abs() <= 1e-5 * gnorm.max(1.0), "{a} vs {b}");
            }
        }
    }
}

#[test]
fn surface_gradient_projection() {
    let spec = EllipseSpec::standard(20, 1);
    let (nodes, _) = ellipse_nodes(&spec).unwrap();
    let values: Vec<f64> = nodes.iter().map(|p| test_function(p[0], p[1])).collect();
    let sigma = fit_interpolant(&nodes, &values, &KernelSpec::new(5.0, 2).unwrap(), &PolySpace::new(2, 3).unwrap(), &Tolerances::default()).unwrap();
    for i in 0..40 {
        let t = i as f64 * 0.157;
        let x = spec.point(t);
        let nu = ellipse_normal(&spec, t);
        let g = sigma.surface_gradient(&x, &nu).unwrap();
        let dot = g[0] * nu[0] + g[1] * nu[1];
        let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
        assert!(dot.abs() <= 1e-10 * norm.max(1e-300) + 1e-300);
        let twice = project_tangent(&g, &nu).unwrap();
        assert!((twice[0] - g[0]).abs() < 1e-14 && (twice[1] - g[1]).abs() < 1e-14);
    }
    // grad f vanishes at (1, 0)
    let exact = project_tangent(&cpdk::geometry::test_function_gradient(1.0, 0.0), &[1.0, 0.0]).unwrap();
    assert!(exact.iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn ellipse_interpolation_error_is_small() {
    let spec = EllipseSpec::standard(20, 0);
    let (max, _, _) = cpdk::experiment::ellipse_errors(5.0, 3, &spec, 20, &Tolerances::default()).unwrap();
    assert!(max > 2.9e-4 && max < 2.9e-2, "{max}");
}

#[test]
fn unjittered_ellipse_error_decreases_with_doubling() {
    let tol = Tolerances::default();
    let at = |n| {
        let spec = EllipseSpec::new(1.0, 0.75, n, 0.0, 0).unwrap();
        cpdk::experiment::ellipse_errors(5.0, 3, &spec, 20, &tol).unwrap().0
    };
    assert!(at(20) < at(10));
}

#[test]
fn polynomial_part_unique_on_ellipse() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for (s, q, n) in [(5.0, 3, 5), (7.0, 4, 7), (9.0, 5, 9), (7.0, 4, 20)] {
        let spec = EllipseSpec::standard(n, 2);
        let (nodes, _) = ellipse_nodes(&spec).unwrap();
        let values: Vec<f64> = nodes.iter().map(|p| test_function(p[0], p[1])).collect();
        let sigma = fit_interpolant(&nodes, &values, &KernelSpec::new(s, 2).unwrap(), &PolySpace::new(2, q).unwrap(), &tol).unwrap();
        let kb = kernel_basis(&sigma.space().vandermonde(sigma.scaled_nodes()).unwrap(), &tol).unwrap();
        assert!(kb.ncols() > 0);
        let v = DVector::from_column_slice(sigma.poly_coefficients());
        let z = DVector::from_fn(kb.ncols(), |_, _| rng.random_range(-1.0..1.0));
        let perturbed: Vec<f64> = (&v + &kb * z).iter().copied().collect();
        let scale = 1.0 + v.amax();
        for j in 0..1000 {
            let x = spec.point(j as f64 * 2.0 * std::f64::consts::PI / 1000.0);
            let a = sigma.eval_poly_part(sigma.poly_coefficients(), &x).unwrap();
            let b = sigma.eval_poly_part(&perturbed, &x).unwrap();
            assert!((a - b).abs() <= 1e-8 * scale, "s={s} n={n}: {a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn weights_are_exact_on_native_space_sums(seed in 0u64..10_000, sq in prop::sample::select(vec![2.0, 4.0])) {
        let nodes = lattice(2, sq);
        let kernel = KernelSpec::new(7.0, 2).unwrap();
        let space = PolySpace::new(2, 4).unwrap();
        let f = LinearFunctional::LaplacianAt(vec![0.0, 0.0]);
        let rep = laplacian_report(&nodes, Some(ScalingConvention::GridByR(sq.sqrt())));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (applied, exact) = exactness_pair(&nodes, &rep.weights, &f, &kernel, &space, &mut rng);
        prop_assert!((applied - exact).abs() <= 1e-8 * (1.0 + exact.abs()), "{} vs {}", applied, exact);
    }

    #[test]
    fn odd_kernel_weights_scale_covariantly(h in 0.1f64..10.0) {
        let nodes = lattice(2, 2.0);
        let scaled = nodes.map(|p| p.iter().map(|c| c * h).collect()).unwrap();
        let base = laplacian_report(&nodes, None);
        let moved = laplacian_report(&scaled, None);
        let scale = base.weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        for (a, b) in moved.weights.iter().zip(&base.weights) {
            prop_assert!((a * h * h - b).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn prescaled_weights_scale_covariantly(h in 1e-3f64..1e3, sq in prop::sample::select(vec![2.0, 3.0, 4.0])) {
        let nodes = lattice(2, sq);
        let scaled = nodes.map(|p| p.iter().map(|c| c * h).collect()).unwrap();
        let base = laplacian_report(&nodes, Some(ScalingConvention::Centroid));
        let moved = laplacian_report(&scaled, Some(ScalingConvention::Centroid));
        let scale = base.weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        for (a, b) in moved.weights.iter().zip(&base.weights) {
            prop_assert!((a * h * h - b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn interpolant_moments_vanish(seed in 0u64..1000, n in 6usize..30) {
        let spec = EllipseSpec::standard(n, seed);
        let (nodes, _) = ellipse_nodes(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sigma = fit_interpolant(&nodes, &values, &KernelSpec::new(5.0, 2).unwrap(), &PolySpace::new(2, 3).unwrap(), &Tolerances::default()).unwrap();
        let p = sigma.space().vandermonde(sigma.scaled_nodes()).unwrap();
        let c = DVector::from_column_slice(sigma.kernel_coefficients());
        prop_assert!(p.tr_mul(&c).amax() <= 1e-9 * (1.0 + c.abs().sum()));
        for (x, f) in nodes.iter().zip(&values) {
            prop_assert!((sigma.eval(x).unwrap() - f).abs() <= 1e-8);
        }
    }
}
