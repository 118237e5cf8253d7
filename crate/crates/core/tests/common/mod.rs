#![allow(dead_code)]

//! Finite-difference oracles shared by the integration tests. These only call
//! plain function values and never touch closed-form derivatives.

pub const FD_STEP: f64 = 1e-2;

/// Fourth-order central first derivative of `f` along `axis`.
pub fn fd_partial(f: &dyn Fn(&[f64]) -> f64, x: &[f64], axis: usize, h: f64) -> f64 {
    let at = |t: f64| {
        let mut y = x.to_vec();
        y[axis] += t;
        f(&y)
    };
    (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
}

pub fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len()).map(|k| fd_partial(f, x, k, h)).collect()
}

/// Fourth-order central Laplacian.
pub fn fd_laplacian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> f64 {
    let f0 = f(x);
    (0..x.len())
        .map(|k| {
            let at = |t: f64| {
                let mut y = x.to_vec();
                y[k] += t;
                f(&y)
            };
            (-at(2.0 * h) + 16.0 * at(h) - 30.0 * f0 + 16.0 * at(-h) - at(-2.0 * h)) / (12.0 * h * h)
        })
        .sum()
}

pub fn rel_err(approx: f64, exact: f64) -> f64 {
    (approx - exact).abs() / exact.abs().max(1e-300)
}

/// (d, r^2, |X|, dN, dNt, E, |w|_1, cond or None).
pub type LatticeRow = (usize, f64, usize, usize, usize, f64, f64, Option<f64>);

/// Printed lattice-ball table for K_7 with cubic exactness.
pub const LATTICE_TABLE: [LatticeRow; 16] = [
    (2, 1.0, 5, 5, 0, 13.4, 8.0, None),
    (2, 2.0, 9, 2, 1, 10.6, 13.5, Some(2.0e2)),
    (2, 3.0, 9, 2, 1, 10.6, 13.5, Some(2.0e2)),
    (2, 4.0, 13, 0, 3, 7.4, 11.8, Some(3.9e2)),
    (3, 1.0, 7, 13, 0, 17.2, 12.0, None),
    (3, 2.0, 19, 4, 3, 12.3, 22.7, Some(3.8e2)),
    (3, 3.0, 27, 3, 10, 12.4, 24.8, Some(2.5e3)),
    (3, 4.0, 33, 0, 13, 9.0, 30.1, Some(5.1e3)),
    (4, 1.0, 9, 26, 0, 20.8, 16.0, None),
    (4, 2.0, 33, 8, 6, 14.0, 31.8, Some(5.7e2)),
    (4, 3.0, 65, 4, 34, 13.9, 39.7, Some(6.9e3)),
    (4, 4.0, 89, 0, 54, 10.4, 40.5, Some(3.1e4)),
    (5, 1.0, 11, 45, 0, 24.2, 20.0, None),
    (5, 2.0, 51, 15, 10, 15.6, 40.9, Some(7.7e2)),
    (5, 3.0, 131, 5, 80, 15.4, 56.4, Some(1.3e4)),
    (5, 4.0, 221, 0, 165, 11.7, 55.0, Some(9.0e4)),
];

/// Applies `weights` to a random `sigma = sum_j c_j K(., x_j) + p` with
/// `c` in `N(P_X^T)` and returns `(sum_i w_i sigma(x_i), lambda sigma)`.
/// The functional side uses the closed-form kernel derivatives, which are
/// checked against finite differences separately.
pub fn exactness_pair(
    nodes: &cpdk::NodeSet,
    weights: &[f64],
    functional: &cpdk::recovery::LinearFunctional,
    kernel: &cpdk::KernelSpec,
    space: &cpdk::PolySpace,
    rng: &mut impl rand::Rng,
) -> (f64, f64) {
    use nalgebra::DVector;
    let tol = cpdk::Tolerances::default();
    let null = cpdk::solver::null_basis(&space.vandermonde(nodes).unwrap(), &tol).unwrap();
    let z = DVector::from_fn(null.dim(), |_, _| rng.random_range(-1.0..1.0));
    let c = null.combine(&z).unwrap();
    let p: Vec<f64> = (0..space.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let sigma = |x: &[f64]| -> f64 {
        let kernel_part: f64 = nodes.iter().zip(c.iter()).map(|(y, cj)| cj * kernel.eval(x, y).unwrap()).sum();
        kernel_part + space.eval_poly(&p, x).unwrap()
    };
    let applied: f64 = nodes.iter().zip(weights).map(|(x, w)| w * sigma(x)).sum();
    let exact_kernel: f64 = nodes
        .iter()
        .zip(c.iter())
        .map(|(y, cj)| cj * functional.apply_kernel(kernel, y).unwrap())
        .sum();
    let exact_poly: f64 = functional.apply_basis(space).unwrap().iter().zip(&p).map(|(b, pk)| b * pk).sum();
    (applied, exact_kernel + exact_poly)
}
