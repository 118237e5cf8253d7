//! Weights of numerical differentiation formulas, their worst-case error,
//! and kernel interpolants, all built on the saddle-point solver.
//!
//! For a functional `lambda` and nodes `X`, the weights `w` solve
//!
//! ```text
//! K_X w + P_X v = [lambda' K(x_i)]     P_X^T w = [lambda p_j]
//! ```
//!
//! which has a unique `w` as soon as the second block is solvable, whether or
//! not `X` is determining for the polynomial space. Interpolants use the same
//! system with the data as right-hand side and `b = 0`.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{prescale, AffineScaling, ScalingConvention};
use crate::kernels::KernelSpec;
use crate::poly::{NodeSet, PolySpace};
use crate::solver::{self, SaddleProblem, Tolerances};

/// Linear functionals acting on functions `R^d -> R`.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearFunctional {
    PointEval(Vec<f64>),
    LaplacianAt(Vec<f64>),
    /// Partial derivative along `axis` (zero-based).
    GradientComponentAt { x: Vec<f64>, axis: usize },
}

impl LinearFunctional {
    pub fn point(&self) -> &[f64] {
        match self {
            Self::PointEval(x) | Self::LaplacianAt(x) => x,
            Self::GradientComponentAt { x, .. } => x,
        }
    }

    /// Differential order: 0, 1 or 2.
    pub fn order(&self) -> u32 {
        match self {
            Self::PointEval(_) => 0,
            Self::GradientComponentAt { .. } => 1,
            Self::LaplacianAt(_) => 2,
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        check_dim(d, self.point().len())?;
        if let Self::GradientComponentAt { axis, .. } = self {
            if *axis >= d {
                return Err(Error::Config(format!("gradient axis {axis} out of range for d = {d}")));
            }
        }
        Ok(())
    }

    fn with_point(&self, x: Vec<f64>) -> Self {
        match self {
            Self::PointEval(_) => Self::PointEval(x),
            Self::LaplacianAt(_) => Self::LaplacianAt(x),
            Self::GradientComponentAt { axis, .. } => Self::GradientComponentAt { x, axis: *axis },
        }
    }

    /// The same functional expressed in the coordinates `(x - z) / h`.
    /// Its values differ from the original by the factor `h^order`.
    pub fn transformed(&self, t: &AffineScaling) -> Result<Self> {
        Ok(self.with_point(t.apply(self.point())?))
    }

    /// `lambda' K(y)`: the functional applied to the first argument of the kernel.
    pub fn apply_kernel(&self, kernel: &KernelSpec, y: &[f64]) -> Result<f64> {
        match self {
            Self::PointEval(x) => kernel.eval(x, y),
            Self::LaplacianAt(x) => kernel.laplacian(x, y),
            Self::GradientComponentAt { x, axis } => Ok(kernel.gradient(x, y)?[*axis]),
        }
    }

    /// `D' D'' K(x, x)`: the functional applied to both kernel arguments.
    pub fn apply_kernel_twice(&self, kernel: &KernelSpec) -> Result<f64> {
        match self {
            Self::PointEval(x) => kernel.eval(x, x),
            Self::LaplacianAt(x) => kernel.bilaplacian(x, x),
            // mixed second derivatives of phi(|x - y|) vanish on the diagonal for s > 2
            Self::GradientComponentAt { .. } => {
                if kernel.s() > 2.0 {
                    Ok(0.0)
                } else {
                    Err(Error::Singular { s: kernel.s() })
                }
            }
        }
    }

    /// `[lambda p_j]` for the basis of `space`.
    pub fn apply_basis(&self, space: &PolySpace) -> Result<Vec<f64>> {
        match self {
            Self::PointEval(x) => space.eval_basis(x),
            Self::LaplacianAt(x) => space.laplacian_basis(x),
            Self::GradientComponentAt { x, axis } => space.partial_basis(x, *axis),
        }
    }
}

impl fmt::Display for LinearFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PointEval(x) => write!(f, "point evaluation at {x:?}"),
            Self::LaplacianAt(x) => write!(f, "Laplacian at {x:?}"),
            Self::GradientComponentAt { x, axis } => write!(f, "d/dx{axis} at {x:?}"),
        }
    }
}

fn describe_nodes(nodes: &NodeSet) -> String {
    format!("{} nodes in R^{}", nodes.len(), nodes.dim())
}

/// Kernel matrix `[K(x_i, x_j)]`, symmetric by construction.
pub fn kernel_matrix(kernel: &KernelSpec, nodes: &NodeSet) -> Result<DMatrix<f64>> {
    check_dim(kernel.dim(), nodes.dim())?;
    let n = nodes.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = kernel.eval(nodes.point(i), nodes.point(j))?;
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

fn check_setup(nodes: &NodeSet, kernel: &KernelSpec, space: &PolySpace) -> Result<()> {
    check_dim(kernel.dim(), nodes.dim())?;
    check_dim(space.dim(), nodes.dim())?;
    kernel.check_order(space.order())
}

/// Assembles the weight system for `functional` on `nodes` without any
/// rescaling.
pub fn weight_problem(
    nodes: &NodeSet,
    functional: &LinearFunctional,
    kernel: &KernelSpec,
    space: &PolySpace,
) -> Result<SaddleProblem> {
    check_setup(nodes, kernel, space)?;
    functional.validate(nodes.dim())?;
    let a = nodes
        .iter()
        .map(|y| functional.apply_kernel(kernel, y))
        .collect::<Result<Vec<_>>>()?;
    let b = functional.apply_basis(space)?;
    SaddleProblem::new(
        kernel_matrix(kernel, nodes)?,
        space.vandermonde(nodes)?,
        DVector::from_vec(a),
        DVector::from_vec(b),
    )
}

/// Output of [`differentiation_weights`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightReport {
    /// Weights for the original nodes.
    pub weights: Vec<f64>,
    /// Minimal-norm polynomial coefficients, relative to the scaled frame
    /// described by `transform`.
    pub poly_part: Vec<f64>,
    /// Worst-case error on the original nodes; `None` when the kernel is not
    /// smooth enough for the functional (`s <= 2 * order`).
    pub worst_case_error: Option<f64>,
    pub l1: f64,
    /// Condition number of the stacked system; `None` when `N(P_X^T) = 0`
    /// and the weights follow from the polynomial conditions alone.
    pub cond: Option<f64>,
    pub dim_null: usize,
    pub dim_null_transpose: usize,
    pub transform: AffineScaling,
}

/// Unique weights reproducing `functional` on the kernel sums conditional on
/// the polynomial moment condition.
///
/// With `scaling` set, the system is solved on the rescaled nodes and the
/// weights are multiplied by `h^-order`, which is exact for odd `s`.
pub fn differentiation_weights(
    nodes: &NodeSet,
    functional: &LinearFunctional,
    kernel: &KernelSpec,
    space: &PolySpace,
    scaling: Option<ScalingConvention>,
    tol: &Tolerances,
) -> Result<WeightReport> {
    check_setup(nodes, kernel, space)?;
    functional.validate(nodes.dim())?;
    let (work_nodes, transform) = match scaling {
        Some(conv) => prescale(nodes, conv)?,
        None => (nodes.clone(), AffineScaling::identity(nodes.dim())),
    };
    let work_functional = functional.transformed(&transform)?;
    let problem = weight_problem(&work_nodes, &work_functional, kernel, space)?;
    let name_error = |e: Error| match e {
        Error::Inconsistent { residual, .. } => Error::Inconsistent {
            functional: functional.to_string(),
            nodes: describe_nodes(nodes),
            residual,
        },
        other => other,
    };
    let sol = solver::solve(&problem, tol).map_err(name_error)?;

    let factor = transform.pullback_factor(functional.order());
    let weights: Vec<f64> = sol.w.iter().map(|w| w * factor).collect();
    let worst_case_error = if kernel.s() > 2.0 * functional.order() as f64 {
        Some(worst_case_error(nodes, &weights, functional, kernel, space, tol)?)
    } else {
        None
    };
    let k = sol.rank.nullity_transpose;
    Ok(WeightReport {
        l1: weights.iter().map(|w| w.abs()).sum(),
        weights,
        poly_part: sol.v.iter().copied().collect(),
        worst_case_error,
        cond: (k > 0).then_some(sol.cond),
        dim_null: sol.rank.nullity,
        dim_null_transpose: k,
        transform,
    })
}

/// Worst-case error of the formula `sum u_i f(x_i)` for `functional` over the
/// unit ball of the kernel's native space:
///
/// ```text
/// E(u)^2 = D'D''K(x, x) - 2 sum_i u_i D'K(x, x_i) + sum_ij u_i u_j K(x_i, x_j)
/// ```
///
/// Only meaningful for weights exact on the polynomial space, which is
/// checked.
pub fn worst_case_error(
    nodes: &NodeSet,
    u: &[f64],
    functional: &LinearFunctional,
    kernel: &KernelSpec,
    space: &PolySpace,
    tol: &Tolerances,
) -> Result<f64> {
    check_setup(nodes, kernel, space)?;
    functional.validate(nodes.dim())?;
    check_dim(nodes.len(), u.len())?;
    if kernel.s() <= 2.0 * functional.order() as f64 {
        return Err(Error::UnsupportedDerivative {
            what: "worst-case error",
            s: kernel.s(),
        });
    }

    let p = space.vandermonde(nodes)?;
    let u_vec = DVector::from_column_slice(u);
    let b = DVector::from_vec(functional.apply_basis(space)?);
    let residual = (p.tr_mul(&u_vec) - &b).amax();
    let scale = 1.0 + b.amax() + p.amax() * u_vec.abs().sum();
    if residual > tol.consistency * scale {
        return Err(Error::NotExact { residual });
    }

    let both = functional.apply_kernel_twice(kernel)?;
    let mut cross = 0.0;
    for (ui, xi) in u.iter().zip(nodes.iter()) {
        cross += ui * functional.apply_kernel(kernel, xi)?;
    }
    let k = kernel_matrix(kernel, nodes)?;
    let quad = u_vec.dot(&(&k * &u_vec));
    let e2 = both - 2.0 * cross + quad;
    if e2 >= 0.0 {
        return Ok(e2.sqrt());
    }
    // cancellation between large terms
    let magnitude = both.abs().max((2.0 * cross).abs()).max(quad.abs());
    if e2 >= -1e-8 * magnitude - 1e-12 {
        Ok(0.0)
    } else {
        Err(Error::Internal(format!("negative squared worst-case error {e2:.3e}")))
    }
}

/// Minimizes `E(u)^2` subject to polynomial exactness by solving the KKT
/// system of the equality-constrained quadratic program,
///
/// ```text
/// [ 2K_X   P_X ] [u]   [2 lambda'K]
/// [ P_X^T   0  ] [mu] = [lambda p ]
/// ```
///
/// through its pseudoinverse. This does not use null-space bases and serves
/// as an independent route to the weights of [`differentiation_weights`].
///
/// For odd `s` the nodes are centered at the evaluation point and scaled to
/// the unit ball before solving; the weights are mapped back.
pub fn optimal_weights_qp(
    nodes: &NodeSet,
    functional: &LinearFunctional,
    kernel: &KernelSpec,
    space: &PolySpace,
    tol: &Tolerances,
) -> Result<Vec<f64>> {
    check_setup(nodes, kernel, space)?;
    functional.validate(nodes.dim())?;
    let center = functional.point().to_vec();
    let radius = nodes
        .iter()
        .map(|x| x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let transform = if kernel.is_even() || radius == 0.0 {
        AffineScaling::identity(nodes.dim())
    } else {
        AffineScaling::new(center, radius)?
    };
    let work_nodes = transform.apply_nodes(nodes)?;
    let work_functional = functional.transformed(&transform)?;
    let problem = weight_problem(&work_nodes, &work_functional, kernel, space)?;

    let feasible = solver::is_consistent(problem.b_mat(), problem.b(), tol)?;
    if !feasible.consistent {
        return Err(Error::Inconsistent {
            functional: functional.to_string(),
            nodes: describe_nodes(nodes),
            residual: feasible.residual,
        });
    }

    let (n, m) = (problem.n(), problem.m());
    let mut kkt = DMatrix::zeros(n + m, n + m);
    kkt.view_mut((0, 0), (n, n)).copy_from(&(problem.a_mat() * 2.0));
    kkt.view_mut((0, n), (n, m)).copy_from(problem.b_mat());
    kkt.view_mut((n, 0), (m, n)).copy_from(&problem.b_mat().transpose());
    let mut rhs = DVector::zeros(n + m);
    rhs.rows_mut(0, n).copy_from(&(problem.a() * 2.0));
    rhs.rows_mut(n, m).copy_from(problem.b());
    let (sol, _) = solver::lstsq_min_norm(&kkt, &rhs, tol)?;

    let factor = transform.pullback_factor(functional.order());
    Ok(sol.rows(0, n).iter().map(|u| u * factor).collect())
}

/// `sigma(x) = sum_j c_j K(x, x_j) + p(x)` with `P_X^T c = 0`, evaluated
/// through the centroid rescaling used to fit it.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant {
    nodes: NodeSet,
    scaled: NodeSet,
    c: Vec<f64>,
    v: Vec<f64>,
    kernel: KernelSpec,
    space: PolySpace,
    transform: AffineScaling,
    cond: f64,
    dim_null: usize,
    dim_null_transpose: usize,
}

/// Fits the interpolant to `values` at `nodes`. The kernel coefficients are
/// unique for any node set; the polynomial part is the minimal-norm one.
pub fn fit_interpolant(
    nodes: &NodeSet,
    values: &[f64],
    kernel: &KernelSpec,
    space: &PolySpace,
    tol: &Tolerances,
) -> Result<Interpolant> {
    check_setup(nodes, kernel, space)?;
    check_dim(nodes.len(), values.len())?;
    let (scaled, transform) = match prescale(nodes, ScalingConvention::Centroid) {
        Ok(pair) => pair,
        // a single node: shift only
        Err(Error::Degenerate(_)) => {
            let t = AffineScaling::new(nodes.point(0).to_vec(), 1.0)?;
            (t.apply_nodes(nodes)?, t)
        }
        Err(e) => return Err(e),
    };
    let problem = SaddleProblem::new(
        kernel_matrix(kernel, &scaled)?,
        space.vandermonde(&scaled)?,
        DVector::from_column_slice(values),
        DVector::zeros(space.len()),
    )?;
    let sol = solver::solve(&problem, tol)?;
    Ok(Interpolant {
        nodes: nodes.clone(),
        scaled,
        c: sol.w.iter().copied().collect(),
        v: sol.v.iter().copied().collect(),
        kernel: *kernel,
        space: space.clone(),
        transform,
        cond: sol.cond,
        dim_null: sol.rank.nullity,
        dim_null_transpose: sol.rank.nullity_transpose,
    })
}

impl Interpolant {
    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    /// Nodes in the frame the coefficients refer to.
    pub fn scaled_nodes(&self) -> &NodeSet {
        &self.scaled
    }

    pub fn kernel_coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn poly_coefficients(&self) -> &[f64] {
        &self.v
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn space(&self) -> &PolySpace {
        &self.space
    }

    pub fn transform(&self) -> &AffineScaling {
        &self.transform
    }

    /// Condition number of the stacked system solved for `c`.
    pub fn cond(&self) -> f64 {
        self.cond
    }

    pub fn dim_null(&self) -> usize {
        self.dim_null
    }

    pub fn dim_null_transpose(&self) -> usize {
        self.dim_null_transpose
    }

    /// Polynomial part with coefficients `v` (in the scaled frame) at `x`.
    pub fn eval_poly_part(&self, v: &[f64], x: &[f64]) -> Result<f64> {
        self.space.eval_poly(v, &self.transform.apply(x)?)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let y = self.transform.apply(x)?;
        let mut total = self.space.eval_poly(&self.v, &y)?;
        for (cj, yj) in self.c.iter().zip(self.scaled.iter()) {
            total += cj * self.kernel.eval(&y, yj)?;
        }
        Ok(total)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let y = self.transform.apply(x)?;
        let d = y.len();
        let mut g = vec![0.0; d];
        for (cj, yj) in self.c.iter().zip(self.scaled.iter()) {
            if *cj == 0.0 {
                continue;
            }
            for (gi, ki) in g.iter_mut().zip(self.kernel.gradient(&y, yj)?) {
                *gi += cj * ki;
            }
        }
        for (j, grad_p) in self.space.gradient_basis(&y)?.into_iter().enumerate() {
            for (gi, pi) in g.iter_mut().zip(grad_p) {
                *gi += self.v[j] * pi;
            }
        }
        let inv_h = 1.0 / self.transform.scale();
        Ok(g.into_iter().map(|gi| gi * inv_h).collect())
    }

    /// Tangential part of the gradient at a point of a curve or surface with
    /// unit normal `normal`.
    pub fn surface_gradient(&self, x: &[f64], normal: &[f64]) -> Result<Vec<f64>> {
        project_tangent(&self.gradient(x)?, normal)
    }
}

/// `g - (g . nu) nu` for a unit vector `nu`.
pub fn project_tangent(g: &[f64], normal: &[f64]) -> Result<Vec<f64>> {
    check_dim(g.len(), normal.len())?;
    let norm = normal.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NonUnitNormal { norm });
    }
    let dot: f64 = g.iter().zip(normal).map(|(a, b)| a * b).sum();
    Ok(g.iter().zip(normal).map(|(gi, ni)| gi - dot * ni).collect())
}
