//! Dense SVD backed by faer.
//!
//! nalgebra's own bidiagonal QR iteration can stop a sweep early and return
//! factors that do not reproduce the input, which showed up on interpolation
//! systems of moderate size. The matrices here are small enough that the
//! copies between the two matrix types do not matter.

use faer::Mat;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `M = U diag(sigma) V^T` with full square `U` and `V^T`; `sigma` is
/// descending with length `min(rows, cols)`.
#[derive(Debug, Clone)]
pub(crate) struct Svd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub vt: DMatrix<f64>,
}

pub(crate) fn svd(m: &DMatrix<f64>) -> Result<Svd> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(Svd {
            u: DMatrix::identity(rows, rows),
            sigma: Vec::new(),
            vt: DMatrix::identity(cols, cols),
        });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Internal("SVD of a matrix with non-finite entries".into()));
    }
    let a = Mat::from_fn(rows, cols, |i, j| m[(i, j)]);
    let full = a
        .svd()
        .map_err(|e| Error::Internal(format!("SVD did not converge: {e:?}")))?;
    let (u, s, v) = (full.U(), full.S(), full.V());
    let k = rows.min(cols);
    // faer leaves (near-)zero singular values in no particular order
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let col = |j: usize| if j < k { order[j] } else { j };
    Ok(Svd {
        u: DMatrix::from_fn(rows, rows, |i, j| u[(i, col(j))]),
        sigma: order.iter().map(|&i| s[i]).collect(),
        vt: DMatrix::from_fn(cols, cols, |i, j| v[(j, col(i))]),
    })
}
