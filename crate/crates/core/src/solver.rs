//! Null-space solver for saddle-point systems
//!
//! ```text
//! [ A    B ] [w]   [a]
//! [ B^T  0 ] [v] = [b]
//! ```
//!
//! with `A` symmetric and definite on `N(B^T)`, but `B` allowed to be rank
//! deficient with any shape. The first block row of the solution is unique
//! whenever `b` lies in `R(B^T)`; the polynomial part `v` is not, and the
//! minimal-norm one is returned.
//!
//! Everything goes through SVDs: the rank decision and the null basis come
//! from the left singular vectors of `B`, and the stacked system
//! `[M^T A; B^T] w = [M^T a; b]` is solved as a full-rank least-squares
//! problem.

use nalgebra::{DMatrix, DVector};

use crate::dense::svd;
use crate::error::{check_dim, Error, Result};

/// Tolerances used by the solver. All are relative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Multiplier on the standard rank rule `max(n, m) * eps * sigma_max`.
    pub rank_factor: f64,
    /// `b` is accepted as lying in `R(B^T)` when the least-squares residual is
    /// at most `consistency * (1 + |b|)`.
    pub consistency: f64,
    /// Residual tolerance for post-solve checks, relative to the size of the
    /// terms involved.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_factor: 1.0,
            consistency: 1e-8,
            residual: 1e-8,
        }
    }
}

/// Rank of `B` and the dimensions of `N(B)` and `N(B^T)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankNullity {
    pub rank: usize,
    pub nullity: usize,
    pub nullity_transpose: usize,
}

/// Orthonormal basis `M` of `N(B^T)`, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct NullBasis {
    m: DMatrix<f64>,
}

impl NullBasis {
    /// Wraps a matrix whose columns are assumed orthonormal.
    pub fn from_matrix(m: DMatrix<f64>) -> Self {
        Self { m }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Nullity `k = n - rank(B)`.
    pub fn dim(&self) -> usize {
        self.m.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.m.ncols() == 0
    }

    /// `M Q` for a `k x k` matrix `Q`; another basis of the same space when `Q`
    /// is orthogonal.
    pub fn rotated(&self, q: &DMatrix<f64>) -> Result<Self> {
        check_dim(self.dim(), q.nrows())?;
        check_dim(self.dim(), q.ncols())?;
        Ok(Self { m: &self.m * q })
    }

    /// `M z`.
    pub fn combine(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), z.len())?;
        Ok(&self.m * z)
    }
}

/// Rank-revealing SVD of `B` (`n x m`) with the full set of left singular
/// vectors, so that both `R(B)` and its orthogonal complement are available.
#[derive(Debug, Clone)]
pub struct Decomposition {
    n: usize,
    m: usize,
    /// `n x n`, orthogonal.
    u: DMatrix<f64>,
    /// Descending, length `n`; zero beyond `min(n, m)`.
    sigma: Vec<f64>,
    /// First `rank` right singular vectors as rows, `rank x m`.
    vt: DMatrix<f64>,
    rank: usize,
}

impl Decomposition {
    pub fn new(b: &DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        let (n, m) = b.shape();
        let full = svd(b)?;
        let mut sigma = full.sigma;
        sigma.resize(n, 0.0);
        let smax = sigma.first().copied().unwrap_or(0.0);
        let threshold = tol.rank_factor * n.max(m) as f64 * f64::EPSILON * smax;
        let rank = sigma.iter().filter(|&&s| s > threshold && s > 0.0).count();
        let vt = full.vt.rows(0, rank).into_owned();
        Ok(Self {
            n,
            m,
            u: full.u,
            sigma,
            vt,
            rank,
        })
    }

    pub fn rank_nullity(&self) -> RankNullity {
        RankNullity {
            rank: self.rank,
            nullity: self.m - self.rank,
            nullity_transpose: self.n - self.rank,
        }
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.sigma[..self.n.min(self.m)]
    }

    /// Orthonormal basis of `N(B^T)`, the complement of `R(B)` in `R^n`.
    pub fn null_basis(&self) -> NullBasis {
        NullBasis {
            m: self.u.columns(self.rank, self.n - self.rank).into_owned(),
        }
    }

    /// Minimal-norm least-squares solution of `B^T w = rhs`.
    pub fn solve_transpose(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut w = DVector::zeros(self.n);
        for i in 0..self.rank {
            let coeff = self.vt.row(i).transpose().dot(rhs) / self.sigma[i];
            w.axpy(coeff, &self.u.column(i), 1.0);
        }
        w
    }

    /// `B^+ y`, the minimal-norm least-squares solution of `B v = y`.
    pub fn pinv_apply(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut v = DVector::zeros(self.m);
        for i in 0..self.rank {
            let coeff = self.u.column(i).dot(y) / self.sigma[i];
            v.axpy(coeff, &self.vt.row(i).transpose(), 1.0);
        }
        v
    }
}

pub fn rank_nullity(b: &DMatrix<f64>, tol: &Tolerances) -> Result<RankNullity> {
    Ok(Decomposition::new(b, tol)?.rank_nullity())
}

pub fn null_basis(b: &DMatrix<f64>, tol: &Tolerances) -> Result<NullBasis> {
    Ok(Decomposition::new(b, tol)?.null_basis())
}

/// Orthonormal basis of `N(B)` (columns in `R^m`), i.e. the coefficient
/// vectors of polynomials vanishing on all nodes when `B = P_X`.
pub fn kernel_basis(b: &DMatrix<f64>, tol: &Tolerances) -> Result<DMatrix<f64>> {
    Ok(Decomposition::new(&b.transpose(), tol)?.null_basis().m)
}

/// Result of testing `b` in `R(B^T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Consistency {
    pub consistent: bool,
    /// Minimal-norm least-squares solution of `B^T w0 = b`.
    pub w0: DVector<f64>,
    pub residual: f64,
}

fn consistency_with(dec: &Decomposition, b_mat: &DMatrix<f64>, b: &DVector<f64>, tol: &Tolerances) -> Consistency {
    let w0 = dec.solve_transpose(b);
    let residual = (b_mat.tr_mul(&w0) - b).norm();
    Consistency {
        consistent: residual <= tol.consistency * (1.0 + b.norm()),
        w0,
        residual,
    }
}

pub fn is_consistent(b_mat: &DMatrix<f64>, b: &DVector<f64>, tol: &Tolerances) -> Result<Consistency> {
    check_dim(b_mat.ncols(), b.len())?;
    let dec = Decomposition::new(b_mat, tol)?;
    Ok(consistency_with(&dec, b_mat, b, tol))
}

/// Minimal-norm least-squares solution of `mat x = rhs`, discarding singular
/// values below `max(rows, cols) * eps * sigma_max`. Also returns the
/// 2-norm condition number `sigma_max / sigma_min` over all singular values.
pub fn lstsq_min_norm(mat: &DMatrix<f64>, rhs: &DVector<f64>, tol: &Tolerances) -> Result<(DVector<f64>, f64)> {
    check_dim(mat.nrows(), rhs.len())?;
    let (rows, cols) = mat.shape();
    if cols == 0 {
        return Ok((DVector::zeros(0), f64::NAN));
    }
    if rows == 0 {
        return Ok((DVector::zeros(cols), f64::NAN));
    }
    let full = svd(mat)?;
    let (u, sigma, vt) = (&full.u, &full.sigma, &full.vt);
    let smax = sigma[0];
    let smin = sigma[sigma.len() - 1];
    let threshold = tol.rank_factor * rows.max(cols) as f64 * f64::EPSILON * smax;
    let mut x = DVector::zeros(cols);
    for (i, &s) in sigma.iter().enumerate() {
        if s > threshold && s > 0.0 {
            let coeff = u.column(i).dot(rhs) / s;
            x.axpy(coeff, &vt.row(i).transpose(), 1.0);
        }
    }
    Ok((x, smax / smin))
}

/// The saddle-point system `[A B; B^T 0][w; v] = [a; b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleProblem {
    a_mat: DMatrix<f64>,
    b_mat: DMatrix<f64>,
    a: DVector<f64>,
    b: DVector<f64>,
}

impl SaddleProblem {
    pub fn new(a_mat: DMatrix<f64>, b_mat: DMatrix<f64>, a: DVector<f64>, b: DVector<f64>) -> Result<Self> {
        let n = a_mat.nrows();
        check_dim(n, a_mat.ncols())?;
        check_dim(n, b_mat.nrows())?;
        check_dim(n, a.len())?;
        check_dim(b_mat.ncols(), b.len())?;
        if a_mat != a_mat.transpose() {
            return Err(Error::Internal("A is not symmetric".into()));
        }
        Ok(Self { a_mat, b_mat, a, b })
    }

    pub fn a_mat(&self) -> &DMatrix<f64> {
        &self.a_mat
    }

    pub fn b_mat(&self) -> &DMatrix<f64> {
        &self.b_mat
    }

    pub fn a(&self) -> &DVector<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.a_mat.nrows()
    }

    pub fn m(&self) -> usize {
        self.b_mat.ncols()
    }

    pub fn decompose(&self, tol: &Tolerances) -> Result<Decomposition> {
        Decomposition::new(&self.b_mat, tol)
    }

    /// `‖B^T w - b‖_inf`.
    pub fn constraint_residual(&self, w: &DVector<f64>) -> f64 {
        (self.b_mat.tr_mul(w) - &self.b).amax()
    }

    /// `‖A w + B v - a‖_inf`.
    pub fn stationarity_residual(&self, w: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (&self.a_mat * w + &self.b_mat * v - &self.a).amax()
    }

    fn residual_scale(&self, w: &DVector<f64>) -> f64 {
        let a_norm = self.a_mat.row_iter().map(|r| r.abs().sum()).fold(0.0, f64::max);
        self.a.amax() + a_norm * w.amax()
    }
}

/// Output of the stacked solve.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedSolution {
    pub w: DVector<f64>,
    /// `sigma_max / sigma_min` of the stacked matrix `[M^T A; B^T]`.
    pub cond: f64,
    pub rank: RankNullity,
    pub null: NullBasis,
    /// Minimal-norm particular solution of `B^T w0 = b`.
    pub w0: DVector<f64>,
}

/// Solves `[M^T A; B^T] w = [M^T a; b]` with `M` an orthonormal basis of
/// `N(B^T)` computed from `B`.
pub fn solve_stacked(problem: &SaddleProblem, tol: &Tolerances) -> Result<StackedSolution> {
    let dec = problem.decompose(tol)?;
    let cons = consistency_with(&dec, &problem.b_mat, &problem.b, tol);
    if !cons.consistent {
        return Err(Error::Inconsistent {
            functional: "right-hand side b".into(),
            nodes: "R(B^T)".into(),
            residual: cons.residual,
        });
    }
    let null = dec.null_basis();
    let (w, cond) = solve_stacked_with(problem, &null, tol)?;
    Ok(StackedSolution {
        w,
        cond,
        rank: dec.rank_nullity(),
        null,
        w0: cons.w0,
    })
}

/// Stacked solve with a caller-supplied basis of `N(B^T)`.
pub fn solve_stacked_with(problem: &SaddleProblem, null: &NullBasis, tol: &Tolerances) -> Result<(DVector<f64>, f64)> {
    let n = problem.n();
    check_dim(n, null.ambient_dim())?;
    let k = null.dim();
    let m = problem.m();
    let mut stacked = DMatrix::zeros(k + m, n);
    let mut rhs = DVector::zeros(k + m);
    if k > 0 {
        stacked.rows_mut(0, k).copy_from(&null.m.tr_mul(&problem.a_mat));
        rhs.rows_mut(0, k).copy_from(&null.m.tr_mul(&problem.a));
    }
    stacked.rows_mut(k, m).copy_from(&problem.b_mat.transpose());
    rhs.rows_mut(k, m).copy_from(&problem.b);
    let (w, cond) = lstsq_min_norm(&stacked, &rhs, tol)?;

    let residual = (problem.b_mat.tr_mul(&w) - &problem.b).norm();
    let b_scale = problem.b_mat.norm() * w.norm();
    if residual > tol.consistency * (1.0 + problem.b.norm() + b_scale) {
        return Err(Error::Inconsistent {
            functional: "right-hand side b".into(),
            nodes: "R(B^T)".into(),
            residual,
        });
    }
    Ok((w, cond))
}

/// Null-space method: solves `M^T A M u = M^T (a - A w0)` and returns
/// `w0 + M u`. `w0` must satisfy `B^T w0 = b`.
pub fn solve_reduced(problem: &SaddleProblem, w0: &DVector<f64>, null: &NullBasis) -> Result<DVector<f64>> {
    check_dim(problem.n(), w0.len())?;
    check_dim(problem.n(), null.ambient_dim())?;
    let k = null.dim();
    if k == 0 {
        return Ok(w0.clone());
    }
    let mm = &null.m;
    let reduced = mm.tr_mul(&(&problem.a_mat * mm));
    let rhs = mm.tr_mul(&(&problem.a - &problem.a_mat * w0));
    let full = svd(&reduced)?;
    // relative to |A|, since M is orthonormal and |M^T A M| <= |A|
    let scale = problem.a_mat.norm();
    let smin = full.sigma[k - 1];
    let rcond = if scale > 0.0 { smin / scale } else { 0.0 };
    if rcond.is_nan() || rcond <= problem.n() as f64 * f64::EPSILON {
        return Err(Error::NotDefinite { rcond });
    }
    let coeffs = full.u.tr_mul(&rhs).zip_map(&DVector::from_column_slice(&full.sigma), |c, s| c / s);
    Ok(w0 + mm * full.vt.tr_mul(&coeffs))
}

/// `M^T (A w - a)`, which vanishes exactly when `A w - a` lies in `R(B)`.
pub fn reduced_residual(problem: &SaddleProblem, w: &DVector<f64>, null: &NullBasis) -> DVector<f64> {
    null.m.tr_mul(&(&problem.a_mat * w - &problem.a))
}

/// Minimal-norm `v` with `B v = a - A w`.
pub fn solve_secondary(problem: &SaddleProblem, w: &DVector<f64>, tol: &Tolerances) -> Result<DVector<f64>> {
    check_dim(problem.n(), w.len())?;
    let dec = problem.decompose(tol)?;
    let target = &problem.a - &problem.a_mat * w;
    let v = dec.pinv_apply(&target);
    let residual = (&problem.b_mat * &v - &target).amax();
    let b_norm = problem.b_mat.row_iter().map(|r| r.abs().sum()).fold(0.0, f64::max);
    let scale = problem.residual_scale(w) + b_norm * v.amax();
    if residual > tol.residual * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Internal(format!(
            "a - A w is not in R(B): residual {residual:.3e}"
        )));
    }
    Ok(v)
}

/// Complete solution of the saddle-point system via the stacked path.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSolution {
    pub w: DVector<f64>,
    pub v: DVector<f64>,
    pub cond: f64,
    pub rank: RankNullity,
    pub null: NullBasis,
}

pub fn solve(problem: &SaddleProblem, tol: &Tolerances) -> Result<SaddleSolution> {
    let stacked = solve_stacked(problem, tol)?;
    let v = solve_secondary(problem, &stacked.w, tol)?;
    Ok(SaddleSolution {
        w: stacked.w,
        v,
        cond: stacked.cond,
        rank: stacked.rank,
        null: stacked.null,
    })
}
