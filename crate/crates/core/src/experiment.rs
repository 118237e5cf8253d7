//! End-to-end runs of the lattice Laplacian and ellipse interpolation
//! experiments, and their CSV / text / markdown tables.
//!
//! CSV files carry full-precision numbers (`-` for absent values) and parse
//! back to identical rows. The text and markdown renderings round errors and
//! condition numbers to two significant digits, and `E(w)`, `|w|_1` to one
//! decimal.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    ellipse_nodes, ellipse_normal, grid_nodes, max_norm, test_function, test_function_gradient, EllipseSpec,
    Radius, ScalingConvention,
};
use crate::kernels::KernelSpec;
use crate::poly::PolySpace;
use crate::recovery::{differentiation_weights, fit_interpolant, project_tangent, LinearFunctional};
use crate::solver::{rank_nullity, Tolerances};

/// Outcome of a single table row.
#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    /// Intentionally not computed, e.g. too few nodes for a unique polynomial
    /// part on the ellipse.
    Skipped,
    /// The functional is not reproducible on the polynomial space from these
    /// nodes.
    Inconsistent,
    Failed(String),
}

impl RowStatus {
    pub fn is_error(&self) -> bool {
        matches!(self, Self::Failed(_))
    }

    fn encode(&self) -> String {
        match self {
            Self::Ok => "ok".into(),
            Self::Skipped => "skipped".into(),
            Self::Inconsistent => "inconsistent".into(),
            Self::Failed(msg) => format!("error: {msg}"),
        }
    }

    fn decode(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(Self::Ok),
            "skipped" => Ok(Self::Skipped),
            "inconsistent" => Ok(Self::Inconsistent),
            other => other
                .strip_prefix("error: ")
                .map(|m| Self::Failed(m.to_string()))
                .ok_or_else(|| Error::Config(format!("unknown row status '{other}'"))),
        }
    }
}

/// A row type that can be written to and read from the experiment tables.
pub trait TableRow: Sized {
    fn header() -> &'static [&'static str];
    /// Full-precision CSV fields.
    fn to_record(&self) -> Vec<String>;
    fn from_record(fields: &[&str]) -> Result<Self>;
    /// Rounded fields for human-readable tables.
    fn to_display(&self) -> Vec<String>;
}

const DASH: &str = "-";

fn opt_field<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| DASH.to_string(), |x| x.to_string())
}

fn opt_sci(v: Option<f64>) -> String {
    v.map_or_else(|| DASH.to_string(), |x| format!("{x:e}"))
}

fn parse_opt<T: std::str::FromStr>(s: &str) -> Result<Option<T>> {
    if s == DASH {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::Config(format!("cannot parse field '{s}'")))
}

fn parse_req<T: std::str::FromStr>(s: &str) -> Result<T> {
    parse_opt(s)?.ok_or_else(|| Error::Config("missing required field".into()))
}

/// Scientific notation with two significant digits, e.g. `3.9e+02`.
pub fn sci2(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.1e}");
    match s.split_once('e') {
        Some((mantissa, exp)) => {
            let e: i32 = exp.parse().unwrap_or(0);
            format!("{mantissa}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
        }
        None => s,
    }
}

fn opt_display(v: Option<f64>, f: impl Fn(f64) -> String) -> String {
    v.map_or_else(|| DASH.to_string(), f)
}

pub fn to_csv<R: TableRow>(rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(R::header()).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.to_record()).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
}

pub fn from_csv<R: TableRow>(text: &str) -> Result<Vec<R>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(R::header().iter().copied()) {
        return Err(Error::Config(format!("unexpected CSV header {header:?}")));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            let fields: Vec<&str> = rec.iter().collect();
            R::from_record(&fields)
        })
        .collect()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

/// Right-aligned plain-text table.
pub fn to_text<R: TableRow>(rows: &[R]) -> String {
    let cells: Vec<Vec<String>> = rows.iter().map(R::to_display).collect();
    let widths: Vec<usize> = R::header()
        .iter()
        .enumerate()
        .map(|(j, h)| cells.iter().map(|r| r[j].len()).chain([h.len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let line = |fields: Vec<&str>, out: &mut String| {
        let parts: Vec<String> = fields
            .iter()
            .zip(&widths)
            .map(|(f, w)| format!("{f:>w$}"))
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(R::header().to_vec(), &mut out);
    for row in &cells {
        line(row.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

pub fn to_markdown<R: TableRow>(rows: &[R]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "| {} |", R::header().join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(R::header().len()));
    for row in rows {
        let _ = writeln!(out, "| {} |", row.to_display().join(" | "));
    }
    out
}

/// Output file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Markdown,
}

pub fn render<R: TableRow>(rows: &[R], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => to_csv(rows),
        OutputFormat::Markdown => Ok(to_markdown(rows)),
    }
}

// ---------------------------------------------------------------------------
// Laplacian stencils on lattice balls

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub dims: Vec<usize>,
    pub radii: Vec<Radius>,
    pub s: f64,
    pub q: usize,
}

impl Default for GridConfig {
    /// `d = 2..5`, `r in {1, sqrt2, sqrt3, 2}`, `K_7`, cubic exactness.
    fn default() -> Self {
        Self {
            dims: vec![2, 3, 4, 5],
            radii: [1.0, 2.0, 3.0, 4.0]
                .iter()
                .map(|&sq| Radius::from_squared(sq).expect("valid radius"))
                .collect(),
            s: 7.0,
            q: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub d: usize,
    pub r: Radius,
    pub n_nodes: usize,
    pub dim_null: Option<usize>,
    pub dim_null_transpose: Option<usize>,
    pub worst_case_error: Option<f64>,
    pub l1: Option<f64>,
    pub cond: Option<f64>,
    pub status: RowStatus,
}

impl TableRow for GridRow {
    fn header() -> &'static [&'static str] {
        &["d", "r", "n_nodes", "dim_null", "dim_null_t", "worst_case_error", "l1", "cond", "status"]
    }

    fn to_record(&self) -> Vec<String> {
        vec![
            self.d.to_string(),
            self.r.to_string(),
            self.n_nodes.to_string(),
            opt_field(self.dim_null),
            opt_field(self.dim_null_transpose),
            opt_field(self.worst_case_error),
            opt_field(self.l1),
            opt_sci(self.cond),
            self.status.encode(),
        ]
    }

    fn from_record(f: &[&str]) -> Result<Self> {
        if f.len() != Self::header().len() {
            return Err(Error::Config(format!("expected {} fields, got {}", Self::header().len(), f.len())));
        }
        Ok(Self {
            d: parse_req(f[0])?,
            r: f[1].parse()?,
            n_nodes: parse_req(f[2])?,
            dim_null: parse_opt(f[3])?,
            dim_null_transpose: parse_opt(f[4])?,
            worst_case_error: parse_opt(f[5])?,
            l1: parse_opt(f[6])?,
            cond: parse_opt(f[7])?,
            status: RowStatus::decode(f[8])?,
        })
    }

    fn to_display(&self) -> Vec<String> {
        vec![
            self.d.to_string(),
            self.r.to_string(),
            self.n_nodes.to_string(),
            opt_field(self.dim_null),
            opt_field(self.dim_null_transpose),
            opt_display(self.worst_case_error, |x| format!("{x:.1}")),
            opt_display(self.l1, |x| format!("{x:.1}")),
            opt_display(self.cond, sci2),
            self.status.encode(),
        ]
    }
}

/// Laplacian weights at the origin on `Z_{d,r}`, one row per `(d, r)`.
///
/// Nodes are rescaled by their largest norm before solving. That equals `r`
/// whenever some lattice point lies on the sphere of radius `r`.
pub fn run_grid_experiment(config: &GridConfig, tol: &Tolerances) -> Result<Vec<GridRow>> {
    let cases: Vec<(usize, Radius)> = config
        .dims
        .iter()
        .flat_map(|&d| config.radii.iter().map(move |&r| (d, r)))
        .collect();
    for &(d, _) in &cases {
        KernelSpec::new(config.s, d)?.check_order(config.q)?;
    }
    cases
        .par_iter()
        .map(|&(d, r)| grid_row(d, r, config, tol))
        .collect()
}

fn grid_row(d: usize, r: Radius, config: &GridConfig, tol: &Tolerances) -> Result<GridRow> {
    let kernel = KernelSpec::new(config.s, d)?;
    let space = PolySpace::new(d, config.q)?;
    let nodes = grid_nodes(d, r)?;
    let rn = rank_nullity(&space.vandermonde(&nodes)?, tol)?;
    let mut row = GridRow {
        d,
        r,
        n_nodes: nodes.len(),
        dim_null: Some(rn.nullity),
        dim_null_transpose: Some(rn.nullity_transpose),
        worst_case_error: None,
        l1: None,
        cond: None,
        status: RowStatus::Ok,
    };
    let radius = max_norm(&nodes);
    let scaling = (radius > 0.0).then_some(ScalingConvention::GridByR(radius));
    let functional = LinearFunctional::LaplacianAt(vec![0.0; d]);
    match differentiation_weights(&nodes, &functional, &kernel, &space, scaling, tol) {
        Ok(rep) => {
            row.dim_null = Some(rep.dim_null);
            row.dim_null_transpose = Some(rep.dim_null_transpose);
            row.worst_case_error = rep.worst_case_error;
            row.l1 = Some(rep.l1);
            row.cond = rep.cond;
        }
        Err(Error::Inconsistent { .. }) => row.status = RowStatus::Inconsistent,
        Err(e) => row.status = RowStatus::Failed(e.to_string()),
    }
    Ok(row)
}

// ---------------------------------------------------------------------------
// Interpolation on the ellipse

#[derive(Debug, Clone, PartialEq)]
pub struct EllipseConfig {
    /// `(s, q)` pairs.
    pub pairs: Vec<(f64, usize)>,
    pub sizes: Vec<usize>,
    pub seed: u64,
    pub jitter: f64,
    pub a: f64,
    pub b_axis: f64,
    /// Error sampling uses the parameter step `(2 pi / n) / refinement`.
    pub refinement: usize,
}

impl Default for EllipseConfig {
    fn default() -> Self {
        Self {
            pairs: vec![(5.0, 3), (7.0, 4), (9.0, 5)],
            sizes: (0..7).map(|i| 5 << i).collect(),
            seed: 0,
            jitter: 0.3,
            a: 1.0,
            b_axis: 0.75,
            refinement: 20,
        }
    }
}

impl EllipseConfig {
    pub fn spec(&self, n: usize) -> EllipseSpec {
        EllipseSpec {
            a: self.a,
            b_axis: self.b_axis,
            n,
            jitter: self.jitter,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipseRow {
    pub s: f64,
    pub q: usize,
    pub n_nodes: usize,
    pub max_error: Option<f64>,
    pub max_grad_error: Option<f64>,
    pub cond: Option<f64>,
    pub status: RowStatus,
}

impl TableRow for EllipseRow {
    fn header() -> &'static [&'static str] {
        &["s", "q", "n_nodes", "max", "maxg", "cond", "status"]
    }

    fn to_record(&self) -> Vec<String> {
        vec![
            self.s.to_string(),
            self.q.to_string(),
            self.n_nodes.to_string(),
            opt_sci(self.max_error),
            opt_sci(self.max_grad_error),
            opt_sci(self.cond),
            self.status.encode(),
        ]
    }

    fn from_record(f: &[&str]) -> Result<Self> {
        if f.len() != Self::header().len() {
            return Err(Error::Config(format!("expected {} fields, got {}", Self::header().len(), f.len())));
        }
        Ok(Self {
            s: parse_req(f[0])?,
            q: parse_req(f[1])?,
            n_nodes: parse_req(f[2])?,
            max_error: parse_opt(f[3])?,
            max_grad_error: parse_opt(f[4])?,
            cond: parse_opt(f[5])?,
            status: RowStatus::decode(f[6])?,
        })
    }

    fn to_display(&self) -> Vec<String> {
        vec![
            self.s.to_string(),
            self.q.to_string(),
            self.n_nodes.to_string(),
            opt_display(self.max_error, sci2),
            opt_display(self.max_grad_error, sci2),
            opt_display(self.cond, sci2),
            self.status.encode(),
        ]
    }
}

/// Interpolates `sin(pi x) sin(pi y)` on jittered ellipse samples and
/// measures the maximum function and surface-gradient errors along the
/// ellipse. Sizes below `2q - 1` are skipped since the polynomial part is
/// then not unique on the curve.
pub fn run_ellipse_experiment(config: &EllipseConfig, tol: &Tolerances) -> Result<Vec<EllipseRow>> {
    if config.refinement == 0 {
        return Err(Error::Config("refinement must be positive".into()));
    }
    for &(s, q) in &config.pairs {
        KernelSpec::new(s, 2)?.check_order(q)?;
    }
    for &n in &config.sizes {
        config.spec(n).validate()?;
    }
    let cases: Vec<(f64, usize, usize)> = config
        .pairs
        .iter()
        .flat_map(|&(s, q)| config.sizes.iter().map(move |&n| (s, q, n)))
        .collect();
    Ok(cases
        .par_iter()
        .map(|&(s, q, n)| ellipse_row(s, q, n, config, tol))
        .collect())
}

fn ellipse_row(s: f64, q: usize, n: usize, config: &EllipseConfig, tol: &Tolerances) -> EllipseRow {
    let mut row = EllipseRow {
        s,
        q,
        n_nodes: n,
        max_error: None,
        max_grad_error: None,
        cond: None,
        status: RowStatus::Ok,
    };
    if n + 1 < 2 * q {
        row.status = RowStatus::Skipped;
        return row;
    }
    match ellipse_errors(s, q, &config.spec(n), config.refinement, tol) {
        Ok((max, maxg, cond)) => {
            row.max_error = Some(max);
            row.max_grad_error = Some(maxg);
            row.cond = Some(cond);
        }
        Err(e) => row.status = RowStatus::Failed(e.to_string()),
    }
    row
}

/// `(max |f - sigma|, max |grad_E f - grad_E sigma|, cond)` sampled with
/// `refinement * n` equispaced parameters.
pub fn ellipse_errors(
    s: f64,
    q: usize,
    spec: &EllipseSpec,
    refinement: usize,
    tol: &Tolerances,
) -> Result<(f64, f64, f64)> {
    let kernel = KernelSpec::new(s, 2)?;
    let space = PolySpace::new(2, q)?;
    let (nodes, _) = ellipse_nodes(spec)?;
    let values: Vec<f64> = nodes.iter().map(|p| test_function(p[0], p[1])).collect();
    let sigma = fit_interpolant(&nodes, &values, &kernel, &space, tol)?;
    let samples = refinement * spec.n;
    let dt = spec.step() / refinement as f64;
    let mut max = 0.0f64;
    let mut maxg = 0.0f64;
    for j in 0..samples {
        let t = j as f64 * dt;
        let x = spec.point(t);
        let nu = ellipse_normal(spec, t);
        max = max.max((test_function(x[0], x[1]) - sigma.eval(&x)?).abs());
        let exact = project_tangent(&test_function_gradient(x[0], x[1]), &nu)?;
        let approx = sigma.surface_gradient(&x, &nu)?;
        let diff = exact
            .iter()
            .zip(&approx)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        maxg = maxg.max(diff);
    }
    Ok((max, maxg, sigma.cond()))
}

/// Node coordinates of every configured ellipse size, as CSV with columns
/// `n,i,t,x,y`.
pub fn ellipse_nodes_csv(config: &EllipseConfig) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "i", "t", "x", "y"]).map_err(csv_err)?;
    for &n in &config.sizes {
        let (nodes, params) = ellipse_nodes(&config.spec(n))?;
        for (i, (p, t)) in nodes.iter().zip(&params).enumerate() {
            w.write_record([n.to_string(), i.to_string(), t.to_string(), p[0].to_string(), p[1].to_string()])
                .map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
}
