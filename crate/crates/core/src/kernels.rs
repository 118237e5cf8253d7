//! Polyharmonic kernels `K(x, y) = phi_s(|x - y|)` with
//! `phi_s(r) = (-1)^(floor(s/2)+1) r^s`, or `r^s log r` when `s` is an even
//! integer, together with the closed-form derivatives needed to apply
//! Laplacian and gradient functionals.
//!
//! Only the gradient is available for even `s`; higher derivatives of the
//! thin-plate type kernels return [`Error::UnsupportedDerivative`].

use crate::error::{check_dim, Error, Result};

/// Polyharmonic kernel with exponent `s` on `R^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    s: f64,
    d: usize,
}

impl KernelSpec {
    pub fn new(s: f64, d: usize) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidKernel(format!("exponent must be positive, got {s}")));
        }
        if d == 0 {
            return Err(Error::InvalidKernel("dimension must be at least 1".into()));
        }
        Ok(Self { s, d })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// True when `s` is an even integer, i.e. the kernel carries a `log r` factor.
    pub fn is_even(&self) -> bool {
        self.s.fract() == 0.0 && (self.s as i64) % 2 == 0
    }

    /// `(-1)^(floor(s/2)+1)`.
    pub fn sign(&self) -> f64 {
        if ((self.s / 2.0).floor() as i64 + 1) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Smallest polynomial order `q` for which the kernel is conditionally
    /// positive definite with respect to polynomials of order `q`.
    pub fn min_poly_order(&self) -> usize {
        (self.s / 2.0).floor() as usize + 1
    }

    pub fn check_order(&self, q: usize) -> Result<()> {
        let min_q = self.min_poly_order();
        if q >= min_q {
            Ok(())
        } else {
            Err(Error::IncompatibleOrder { s: self.s, q, min_q })
        }
    }

    pub fn radial_value(&self, r: f64) -> f64 {
        radial_value(self, r)
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        kernel_eval(self, x, y)
    }

    pub fn laplacian(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        kernel_laplacian(self, x, y)
    }

    pub fn bilaplacian(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        kernel_bilaplacian(self, x, y)
    }

    pub fn gradient(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        kernel_gradient(self, x, y)
    }

    fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(self.d, x.len())?;
        check_dim(self.d, y.len())?;
        Ok(x.iter()
            .zip(y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    fn require_odd(&self, what: &'static str) -> Result<()> {
        if self.is_even() {
            Err(Error::UnsupportedDerivative { what, s: self.s })
        } else {
            Ok(())
        }
    }
}

/// `phi_s(r)`; zero at `r = 0` for every `s > 0`.
pub fn radial_value(spec: &KernelSpec, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let p = r.powf(spec.s);
    if spec.is_even() {
        spec.sign() * p * r.ln()
    } else {
        spec.sign() * p
    }
}

pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(radial_value(spec, spec.distance(x, y)?))
}

/// Laplacian of the kernel in its first argument.
pub fn kernel_laplacian(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    spec.require_odd("kernel Laplacian")?;
    let r = spec.distance(x, y)?;
    let (s, d) = (spec.s, spec.d as f64);
    if r == 0.0 {
        return if s > 2.0 { Ok(0.0) } else { Err(Error::Singular { s }) };
    }
    Ok(spec.sign() * s * (s + d - 2.0) * r.powf(s - 2.0))
}

/// Laplacian applied in both arguments, `Delta_x Delta_y K(x, y)`.
pub fn kernel_bilaplacian(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    spec.require_odd("kernel bi-Laplacian")?;
    let r = spec.distance(x, y)?;
    let (s, d) = (spec.s, spec.d as f64);
    if r == 0.0 {
        return if s > 4.0 { Ok(0.0) } else { Err(Error::Singular { s }) };
    }
    let c = s * (s - 2.0) * (s + d - 2.0) * (s + d - 4.0);
    Ok(spec.sign() * c * r.powf(s - 4.0))
}

/// Gradient of the kernel in its first argument.
pub fn kernel_gradient(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let r = spec.distance(x, y)?;
    let s = spec.s;
    if r == 0.0 {
        return if s > 2.0 {
            Ok(vec![0.0; spec.d])
        } else {
            Err(Error::Singular { s })
        };
    }
    // phi'(r) / r
    let factor = if spec.is_even() {
        spec.sign() * (s * r.ln() + 1.0) * r.powf(s - 2.0)
    } else {
        spec.sign() * s * r.powf(s - 2.0)
    };
    Ok(x.iter().zip(y).map(|(a, b)| factor * (a - b)).collect())
}
