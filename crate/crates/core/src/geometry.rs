//! Node generators for the two experiments (integer lattice balls and
//! jittered samples of an ellipse), the smooth test function, and the affine
//! rescalings applied before solving.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::poly::NodeSet;

/// Ball radius stored through its square, so that radii such as `sqrt(3)`
/// are represented exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radius {
    squared: f64,
}

impl Radius {
    pub fn from_squared(squared: f64) -> Result<Self> {
        if !(squared.is_finite() && squared >= 0.0) {
            return Err(Error::Config(format!("invalid squared radius {squared}")));
        }
        Ok(Self { squared })
    }

    pub fn new(r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::Config(format!("invalid radius {r}")));
        }
        Ok(Self { squared: r * r })
    }

    pub fn squared(&self) -> f64 {
        self.squared
    }

    pub fn value(&self) -> f64 {
        self.squared.sqrt()
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sq = self.squared;
        if sq.fract() == 0.0 && sq < 1e15 {
            let root = sq.sqrt().round();
            if root * root == sq {
                return write!(f, "{root}");
            }
            return write!(f, "sqrt{sq}");
        }
        write!(f, "{}", self.value())
    }
}

impl FromStr for Radius {
    type Err = Error;

    /// Accepts plain numbers (`2`, `0.5`) and square roots written as
    /// `sqrt3` or `√3`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let root = t
            .strip_prefix("sqrt")
            .or_else(|| t.strip_prefix('√'))
            .map(|rest| rest.trim_start_matches('(').trim_end_matches(')'));
        match root {
            Some(inner) => {
                let sq: f64 = inner
                    .parse()
                    .map_err(|_| Error::Config(format!("cannot parse radius '{s}'")))?;
                Self::from_squared(sq)
            }
            None => {
                let r: f64 = t
                    .parse()
                    .map_err(|_| Error::Config(format!("cannot parse radius '{s}'")))?;
                Self::new(r)
            }
        }
    }
}

/// Lattice points `Z_{d,r} = {alpha in Z^d : |alpha| <= r}`, ordered by
/// squared norm, then coordinate by coordinate with larger magnitudes first
/// and positive before negative. The origin always comes first.
pub fn grid_nodes(d: usize, radius: Radius) -> Result<NodeSet> {
    if d == 0 {
        return Err(Error::Config("dimension must be at least 1".into()));
    }
    let limit = radius.squared() + 1e-9;
    let bound = limit.sqrt().floor() as i64;
    let mut points: Vec<Vec<i64>> = Vec::new();
    let mut current = vec![-bound; d];
    loop {
        let sq: i64 = current.iter().map(|a| a * a).sum();
        if (sq as f64) <= limit {
            points.push(current.clone());
        }
        // odometer increment
        let mut axis = 0;
        loop {
            if axis == d {
                return finish_grid(points);
            }
            if current[axis] < bound {
                current[axis] += 1;
                break;
            }
            current[axis] = -bound;
            axis += 1;
        }
    }
}

fn finish_grid(mut points: Vec<Vec<i64>>) -> Result<NodeSet> {
    let key = |p: &Vec<i64>| {
        let sq: i64 = p.iter().map(|a| a * a).sum();
        let rest: Vec<(i64, i64)> = p.iter().map(|&a| (-a.abs(), -a.signum())).collect();
        (sq, rest)
    };
    points.sort_by_key(key);
    NodeSet::new(
        points
            .into_iter()
            .map(|p| p.into_iter().map(|a| a as f64).collect())
            .collect(),
    )
}

/// The map `x -> (x - shift) / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineScaling {
    shift: Vec<f64>,
    scale: f64,
}

impl AffineScaling {
    pub fn new(shift: Vec<f64>, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Degenerate(format!("scale must be positive, got {scale}")));
        }
        Ok(Self { shift, scale })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            shift: vec![0.0; d],
            scale: 1.0,
        }
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.shift.len(), x.len())?;
        Ok(x.iter().zip(&self.shift).map(|(xi, zi)| (xi - zi) / self.scale).collect())
    }

    pub fn invert(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.shift.len(), y.len())?;
        Ok(y.iter().zip(&self.shift).map(|(yi, zi)| zi + self.scale * yi).collect())
    }

    pub fn apply_nodes(&self, nodes: &NodeSet) -> Result<NodeSet> {
        NodeSet::new(nodes.iter().map(|x| self.apply(x)).collect::<Result<_>>()?)
    }

    /// Factor mapping weights of a functional of derivative order `order`
    /// computed on scaled nodes back to the original nodes.
    pub fn pullback_factor(&self, order: u32) -> f64 {
        self.scale.powi(-(order as i32))
    }
}

/// How nodes are normalized before solving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingConvention {
    /// `X / r`, no shift.
    GridByR(f64),
    /// Shift to the centroid `z`, divide by `max |x_i - z|`.
    Centroid,
}

pub fn prescale(nodes: &NodeSet, convention: ScalingConvention) -> Result<(NodeSet, AffineScaling)> {
    let d = nodes.dim();
    let transform = match convention {
        ScalingConvention::GridByR(r) => AffineScaling::new(vec![0.0; d], r)?,
        ScalingConvention::Centroid => {
            let n = nodes.len() as f64;
            let mut z = vec![0.0; d];
            for x in nodes.iter() {
                for (zi, xi) in z.iter_mut().zip(x) {
                    *zi += xi / n;
                }
            }
            let h = nodes.iter().map(|x| distance(x, &z)).fold(0.0, f64::max);
            if h == 0.0 {
                return Err(Error::Degenerate("all nodes coincide with their centroid".into()));
            }
            AffineScaling::new(z, h)?
        }
    };
    let scaled = transform.apply_nodes(nodes)?;
    Ok((scaled, transform))
}

/// Largest Euclidean norm among the nodes.
pub fn max_norm(nodes: &NodeSet) -> f64 {
    nodes
        .iter()
        .map(|x| x.iter().map(|c| c * c).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Jittered equispaced samples on the ellipse `x^2/a^2 + y^2/b^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseSpec {
    pub a: f64,
    pub b_axis: f64,
    pub n: usize,
    /// Parameter perturbation as a fraction of the step `2 pi / n`.
    pub jitter: f64,
    pub seed: u64,
}

impl EllipseSpec {
    pub fn new(a: f64, b_axis: f64, n: usize, jitter: f64, seed: u64) -> Result<Self> {
        let spec = Self { a, b_axis, n, jitter, seed };
        spec.validate()?;
        Ok(spec)
    }

    /// Half-axes 1 and 0.75, jitter 0.3.
    pub fn standard(n: usize, seed: u64) -> Self {
        Self { a: 1.0, b_axis: 0.75, n, jitter: 0.3, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b_axis > 0.0 && self.a.is_finite() && self.b_axis.is_finite()) {
            return Err(Error::Config("ellipse half-axes must be positive".into()));
        }
        if !(0.0..0.5).contains(&self.jitter) {
            return Err(Error::Config(format!("jitter must lie in [0, 0.5), got {}", self.jitter)));
        }
        if self.n == 0 {
            return Err(Error::Config("ellipse needs at least one node".into()));
        }
        Ok(())
    }

    /// Parameter step `2 pi / n`.
    pub fn step(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn point(&self, t: f64) -> Vec<f64> {
        vec![self.a * t.cos(), self.b_axis * t.sin()]
    }
}

/// Nodes `(a cos(t_i + e_i), b sin(t_i + e_i))` with `t_i = i h` and
/// `e_i ~ U[-jitter h, jitter h]`, together with the perturbed parameters.
///
/// The perturbations come from ChaCha8 seeded with `seed`, on the stream
/// numbered `n`, so every size gets an independent sequence.
pub fn ellipse_nodes(spec: &EllipseSpec) -> Result<(NodeSet, Vec<f64>)> {
    spec.validate()?;
    let h = spec.step();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(spec.n as u64);
    let width = spec.jitter * h;
    let noise = if width > 0.0 {
        Some(Uniform::new_inclusive(-width, width).map_err(|e| Error::Config(e.to_string()))?)
    } else {
        None
    };
    let params: Vec<f64> = (0..spec.n)
        .map(|i| {
            let eps = noise.as_ref().map_or(0.0, |u| u.sample(&mut rng));
            i as f64 * h + eps
        })
        .collect();
    let nodes = NodeSet::new(params.iter().map(|&t| spec.point(t)).collect())?;
    Ok((nodes, params))
}

/// Outward unit normal at parameter `t`.
pub fn ellipse_normal(spec: &EllipseSpec, t: f64) -> Vec<f64> {
    let g = [t.cos() / spec.a, t.sin() / spec.b_axis];
    let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
    vec![g[0] / norm, g[1] / norm]
}

/// `sin(pi x) sin(pi y)`.
pub fn test_function(x: f64, y: f64) -> f64 {
    (PI * x).sin() * (PI * y).sin()
}

pub fn test_function_gradient(x: f64, y: f64) -> [f64; 2] {
    [
        PI * (PI * x).cos() * (PI * y).sin(),
        PI * (PI * x).sin() * (PI * y).cos(),
    ]
}
