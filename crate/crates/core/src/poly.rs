//! Monomial bases for `P^d_q`, the `d`-variate polynomials of total degree
//! at most `q - 1`, and the node sets they are evaluated on.

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};

/// Ordered set of distinct points in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    d: usize,
    points: Vec<Vec<f64>>,
}

impl NodeSet {
    /// Builds a node set, rejecting empty input, ragged dimensions and
    /// repeated points.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let d = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidNodes("empty node set".into()))?;
        if d == 0 {
            return Err(Error::InvalidNodes("zero-dimensional points".into()));
        }
        for p in &points {
            check_dim(d, p.len())?;
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidNodes("non-finite coordinate".into()));
            }
        }
        let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidNodes("duplicate points".into()));
        }
        Ok(Self { d, points })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.iter().map(Vec::as_slice)
    }

    /// Applies `f` to every point. The result must still be a valid node set.
    pub fn map<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        Self::new(self.iter().map(f).collect())
    }
}

/// `P^d_q` with graded lexicographic monomial ordering: total degree
/// ascending, and within a degree the exponent vectors in descending
/// lexicographic order (so `x` precedes `y`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolySpace {
    d: usize,
    q: usize,
    basis: Vec<Vec<u32>>,
}

/// `C(q - 1 + d, d)`.
pub fn poly_dim(d: usize, q: usize) -> usize {
    if q == 0 {
        return 0;
    }
    let n = q - 1 + d;
    let k = d.min(q - 1);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

impl PolySpace {
    pub fn new(d: usize, q: usize) -> Result<Self> {
        if d == 0 || q == 0 {
            return Err(Error::Config(format!(
                "polynomial space needs d >= 1 and q >= 1, got d = {d}, q = {q}"
            )));
        }
        let mut basis = Vec::with_capacity(poly_dim(d, q));
        for degree in 0..q as u32 {
            let mut current = vec![0u32; d];
            push_grade(&mut basis, &mut current, 0, degree);
        }
        Ok(Self { d, q, basis })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn order(&self) -> usize {
        self.q
    }

    /// Number of basis monomials, `m`.
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.basis
    }

    fn powers(&self, x: &[f64]) -> Vec<Vec<f64>> {
        x.iter()
            .map(|&xi| {
                let mut row = Vec::with_capacity(self.q);
                let mut acc = 1.0;
                for _ in 0..self.q {
                    row.push(acc);
                    acc *= xi;
                }
                row
            })
            .collect()
    }

    pub fn eval_basis(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.d, x.len())?;
        let pw = self.powers(x);
        Ok(self
            .basis
            .iter()
            .map(|alpha| alpha.iter().enumerate().map(|(k, &a)| pw[k][a as usize]).product())
            .collect())
    }

    /// Partial derivative of every basis monomial along `axis`.
    pub fn partial_basis(&self, x: &[f64], axis: usize) -> Result<Vec<f64>> {
        check_dim(self.d, x.len())?;
        if axis >= self.d {
            return Err(Error::Config(format!("axis {axis} out of range for d = {}", self.d)));
        }
        let pw = self.powers(x);
        Ok(self
            .basis
            .iter()
            .map(|alpha| {
                if alpha[axis] == 0 {
                    return 0.0;
                }
                let mut v = alpha[axis] as f64;
                for (k, &a) in alpha.iter().enumerate() {
                    let e = if k == axis { a - 1 } else { a };
                    v *= pw[k][e as usize];
                }
                v
            })
            .collect())
    }

    /// `m x d` array of basis gradients, one row per monomial.
    pub fn gradient_basis(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let partials = (0..self.d)
            .map(|axis| self.partial_basis(x, axis))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..self.len())
            .map(|j| partials.iter().map(|p| p[j]).collect())
            .collect())
    }

    pub fn laplacian_basis(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.d, x.len())?;
        let pw = self.powers(x);
        Ok(self
            .basis
            .iter()
            .map(|alpha| {
                let mut total = 0.0;
                for axis in 0..self.d {
                    let a = alpha[axis];
                    if a < 2 {
                        continue;
                    }
                    let mut v = (a * (a - 1)) as f64;
                    for (k, &b) in alpha.iter().enumerate() {
                        let e = if k == axis { b - 2 } else { b };
                        v *= pw[k][e as usize];
                    }
                    total += v;
                }
                total
            })
            .collect())
    }

    /// `P_X = [p_j(x_i)]`, one row per node.
    pub fn vandermonde(&self, nodes: &NodeSet) -> Result<DMatrix<f64>> {
        check_dim(self.d, nodes.dim())?;
        let mut p = DMatrix::zeros(nodes.len(), self.len());
        for (i, x) in nodes.iter().enumerate() {
            for (j, v) in self.eval_basis(x)?.into_iter().enumerate() {
                p[(i, j)] = v;
            }
        }
        Ok(p)
    }

    /// Evaluates `sum_j coeffs[j] p_j(x)`.
    pub fn eval_poly(&self, coeffs: &[f64], x: &[f64]) -> Result<f64> {
        check_dim(self.len(), coeffs.len())?;
        Ok(self.eval_basis(x)?.iter().zip(coeffs).map(|(p, c)| p * c).sum())
    }
}

// exponents of total degree `remaining` over axes `axis..d`, x-power first
fn push_grade(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, axis: usize, remaining: u32) {
    if axis + 1 == current.len() {
        current[axis] = remaining;
        out.push(current.clone());
        return;
    }
    for a in (0..=remaining).rev() {
        current[axis] = a;
        push_grade(out, current, axis + 1, remaining - a);
    }
    current[axis] = 0;
}
